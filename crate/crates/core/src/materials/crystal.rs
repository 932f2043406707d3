//! Rate-dependent FCC crystal plasticity at finite strain.
//!
//! `F = Fᵉ·Fᵖ`, slip on the twelve {111}⟨110⟩ systems with the power law
//! `γ̇ = γ̇₀ |τ/τ_c|ⁿ sign τ`, saturating hardening
//! `τ̇_c^α = Σ_β q_αβ h(Γ) |γ̇^β|` with `h(Γ) = h₀ sech²(h₀Γ/(τ_s − τ₀))`,
//! and `Fᵖ` advanced by the exponential map. The elastic law is
//! St. Venant–Kirchhoff on the elastic Green–Lagrange strain with the cubic
//! stiffness rotated into the sample frame.
//!
//! User state (34 slots): `Fᵖ` row-major (9), `τ_c` (12), `Γ` (1), signed
//! accumulated slip per system (12). An all-zero state is read as `Fᵖ = I`,
//! `τ_c = τ₀`.

use nalgebra::{SMatrix, SVector, Vector3};

use crate::bridge::jaumann_from_dtau_df;
use crate::error::{Error, Result};
use crate::material_api::{Material, Regime, UmatCall, UmatResult};
use crate::polar::rotation_from_bunge;
use crate::tensor::{ddot, sym, Tensor2, Tensor4};
use crate::voigt::{umat_tangent_from_tensor, UmatStress};

use super::{require_props, require_user_state, ElasticConstants};

pub const CRYSTAL_NSTATV: usize = 34;
const NSYS: usize = 12;
const MAX_LOCAL_ITER: usize = 50;
const TANGENT_STEP: f64 = 1e-7;

type VecN = SVector<f64, NSYS>;
type MatN = SMatrix<f64, NSYS, NSYS>;

/// Slip direction and plane normal, both unit vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlipSystem {
    pub s: Vector3<f64>,
    pub n: Vector3<f64>,
}

impl SlipSystem {
    /// Schmid tensor `s ⊗ n`.
    pub fn schmid(&self) -> Tensor2 {
        self.s * self.n.transpose()
    }

    pub fn rotated(&self, r: &Tensor2) -> Self {
        Self {
            s: r * self.s,
            n: r * self.n,
        }
    }
}

/// The twelve octahedral systems in the crystal frame.
pub fn fcc_slip_systems() -> [SlipSystem; 12] {
    const TABLE: [([f64; 3], [f64; 3]); 12] = [
        ([1.0, 1.0, 1.0], [0.0, 1.0, -1.0]),
        ([1.0, 1.0, 1.0], [1.0, 0.0, -1.0]),
        ([1.0, 1.0, 1.0], [1.0, -1.0, 0.0]),
        ([-1.0, 1.0, 1.0], [0.0, 1.0, -1.0]),
        ([-1.0, 1.0, 1.0], [1.0, 0.0, 1.0]),
        ([-1.0, 1.0, 1.0], [1.0, 1.0, 0.0]),
        ([1.0, -1.0, 1.0], [0.0, 1.0, 1.0]),
        ([1.0, -1.0, 1.0], [1.0, 0.0, -1.0]),
        ([1.0, -1.0, 1.0], [1.0, 1.0, 0.0]),
        ([1.0, 1.0, -1.0], [0.0, 1.0, 1.0]),
        ([1.0, 1.0, -1.0], [1.0, 0.0, 1.0]),
        ([1.0, 1.0, -1.0], [1.0, -1.0, 0.0]),
    ];
    TABLE.map(|(n, s)| SlipSystem {
        s: Vector3::from(s).normalize(),
        n: Vector3::from(n).normalize(),
    })
}

/// `τ = s · (stress · n)`.
pub fn resolved_shear(stress: &Tensor2, sys: &SlipSystem) -> f64 {
    sys.s.dot(&(stress * sys.n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HardeningVariant {
    /// `sech²`, bounded and saturating. Default.
    HyperbolicSecant,
    /// `sec²`, kept for comparison; grows without bound.
    Secant,
}

/// How `Fᵖ` is advanced over an increment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlasticUpdate {
    /// `Fᵖ ← exp(Σ Δγ s⊗n) Fᵖ`, keeps `det Fᵖ = 1`.
    Exponential,
    /// `Fᵖ ← (I + Σ Δγ s⊗n) Fᵖ`.
    FirstOrder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrystalParams {
    pub elastic: ElasticConstants,
    pub gamma_dot_0: f64,
    pub n: f64,
    pub h0: f64,
    pub tau_s: f64,
    pub tau_0: f64,
    /// Latent hardening ratio; self hardening is 1.
    pub q: f64,
    /// Bunge angles in degrees.
    pub euler_deg: [f64; 3],
    pub hardening: HardeningVariant,
    pub update: PlasticUpdate,
}

impl CrystalParams {
    /// Copper-like values: C11 168.4, C12 121.4, C44 75.4 GPa; h₀ 541.4,
    /// τ_s 109.5, τ₀ 60.8 MPa; γ̇₀ 0.001, n 10, q 1; cube orientation.
    pub fn reference_defaults() -> Self {
        Self {
            elastic: ElasticConstants::Cubic {
                c11: 168.4e9,
                c12: 121.4e9,
                c44: 75.4e9,
            },
            gamma_dot_0: 0.001,
            n: 10.0,
            h0: 541.4e6,
            tau_s: 109.5e6,
            tau_0: 60.8e6,
            q: 1.0,
            euler_deg: [0.0; 3],
            hardening: HardeningVariant::HyperbolicSecant,
            update: PlasticUpdate::Exponential,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.elastic, ElasticConstants::Cubic { .. }) {
            return Err(Error::contract("crystal plasticity needs cubic elastic constants"));
        }
        self.elastic.validate()?;
        if !(self.tau_0 > 0.0 && self.tau_s > self.tau_0) {
            return Err(Error::contract(format!(
                "crystal plasticity needs τ_s > τ₀ > 0 (τ_s = {}, τ₀ = {})",
                self.tau_s, self.tau_0
            )));
        }
        if !(self.n >= 1.0) || !(self.gamma_dot_0 > 0.0) || !(self.h0 >= 0.0) || !(self.q >= 0.0)
        {
            return Err(Error::contract(
                "crystal plasticity needs n >= 1, γ̇₀ > 0, h₀ >= 0, q >= 0",
            ));
        }
        if !self.euler_deg.iter().all(|a| a.is_finite()) {
            return Err(Error::contract("orientation angles must be finite"));
        }
        Ok(())
    }

    /// Props order `[C11, C12, C44, γ̇₀, n, h₀, τ_s, τ₀, q, φ1, Φ, φ2, secant]`;
    /// the trailing flag is optional and selects `sec²` when nonzero.
    pub fn from_props(props: &[f64]) -> Result<Self> {
        require_props("crystal-fcc", props, 12)?;
        let p = Self {
            elastic: ElasticConstants::Cubic {
                c11: props[0],
                c12: props[1],
                c44: props[2],
            },
            gamma_dot_0: props[3],
            n: props[4],
            h0: props[5],
            tau_s: props[6],
            tau_0: props[7],
            q: props[8],
            euler_deg: [props[9], props[10], props[11]],
            hardening: match props.get(12) {
                Some(&flag) if flag != 0.0 => HardeningVariant::Secant,
                _ => HardeningVariant::HyperbolicSecant,
            },
            update: PlasticUpdate::Exponential,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn to_props(&self) -> Vec<f64> {
        let ElasticConstants::Cubic { c11, c12, c44 } = self.elastic else {
            unreachable!("validated as cubic")
        };
        vec![
            c11,
            c12,
            c44,
            self.gamma_dot_0,
            self.n,
            self.h0,
            self.tau_s,
            self.tau_0,
            self.q,
            self.euler_deg[0],
            self.euler_deg[1],
            self.euler_deg[2],
            match self.hardening {
                HardeningVariant::HyperbolicSecant => 0.0,
                HardeningVariant::Secant => 1.0,
            },
        ]
    }

    /// Rotation taking crystal axes to sample axes.
    pub fn orientation(&self) -> Tensor2 {
        let [a, b, c] = self.euler_deg.map(f64::to_radians);
        rotation_from_bunge(a, b, c)
    }

    fn q_ab(&self, a: usize, b: usize) -> f64 {
        if a == b {
            1.0
        } else {
            self.q
        }
    }

    /// `h(Γ)` and `dh/dΓ`.
    fn hardening_modulus(&self, gamma_acc: f64) -> (f64, f64) {
        let k = self.h0 / (self.tau_s - self.tau_0);
        let x = k * gamma_acc;
        match self.hardening {
            HardeningVariant::HyperbolicSecant => {
                let sech2 = 1.0 / x.cosh().powi(2);
                (self.h0 * sech2, -2.0 * self.h0 * k * sech2 * x.tanh())
            }
            HardeningVariant::Secant => {
                let sec2 = 1.0 / x.cos().powi(2);
                (self.h0 * sec2, 2.0 * self.h0 * k * sec2 * x.tan())
            }
        }
    }
}

/// `γ̇ = γ̇₀ |τ/τ_c|ⁿ sign τ`.
pub fn slip_rate(tau: f64, tau_c: f64, params: &CrystalParams) -> f64 {
    params.gamma_dot_0 * (tau / tau_c).abs().powf(params.n) * sign(tau)
}

/// `τ̇_c^α = Σ_β q_αβ h₀ sech²(h₀Γ/(τ_s − τ₀)) |γ̇^β|`.
pub fn hardening_rate(gamma_acc: f64, slip_rates: &[f64; 12], params: &CrystalParams) -> [f64; 12] {
    let (h, _) = params.hardening_modulus(gamma_acc);
    std::array::from_fn(|a| {
        (0..NSYS)
            .map(|b| params.q_ab(a, b) * h * slip_rates[b].abs())
            .sum()
    })
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Unpacked user state.
#[derive(Clone, Debug, PartialEq)]
pub struct CrystalState {
    pub fp: Tensor2,
    pub tau_c: [f64; 12],
    pub gamma_acc: f64,
    pub gamma: [f64; 12],
}

impl CrystalState {
    pub fn initial(params: &CrystalParams) -> Self {
        Self {
            fp: Tensor2::identity(),
            tau_c: [params.tau_0; 12],
            gamma_acc: 0.0,
            gamma: [0.0; 12],
        }
    }

    pub fn from_statev(statev: &[f64], params: &CrystalParams) -> Result<Self> {
        require_user_state("crystal-fcc", statev, CRYSTAL_NSTATV)?;
        if statev.iter().all(|&v| v == 0.0) {
            return Ok(Self::initial(params));
        }
        Ok(Self {
            fp: Tensor2::from_row_slice(&statev[0..9]),
            tau_c: std::array::from_fn(|a| statev[9 + a]),
            gamma_acc: statev[21],
            gamma: std::array::from_fn(|a| statev[22 + a]),
        })
    }

    pub fn to_statev(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(CRYSTAL_NSTATV);
        for i in 0..3 {
            for j in 0..3 {
                v.push(self.fp[(i, j)]);
            }
        }
        v.extend_from_slice(&self.tau_c);
        v.push(self.gamma_acc);
        v.extend_from_slice(&self.gamma);
        v
    }
}

/// Sample-frame data shared by every evaluation of one call.
struct Frame {
    systems: [SlipSystem; 12],
    schmid: [Tensor2; 12],
    stiffness: Tensor4,
}

impl Frame {
    fn new(params: &CrystalParams) -> Self {
        let r = params.orientation();
        let systems = fcc_slip_systems().map(|s| s.rotated(&r));
        Self {
            schmid: systems.map(|s| s.schmid()),
            systems,
            stiffness: params.elastic.stiffness().rotated(&r),
        }
    }
}

struct Local {
    dgamma: VecN,
    tau_c: VecN,
    fp: Tensor2,
    /// Kirchhoff stress.
    tau: Tensor2,
}

struct Trial {
    residual: VecN,
    tau_alpha: VecN,
    tau_c: VecN,
    fp: Tensor2,
    ce: Tensor2,
    s_bar: Tensor2,
    fe: Tensor2,
}

fn evaluate_trial(
    f: &Tensor2,
    state: &CrystalState,
    fp_n_inv: &Tensor2,
    dgamma: &VecN,
    dt: f64,
    params: &CrystalParams,
    frame: &Frame,
) -> Trial {
    let a: Tensor2 = (0..NSYS).map(|k| frame.schmid[k] * dgamma[k]).sum();
    let (incr, incr_inv) = match params.update {
        PlasticUpdate::Exponential => (a.exp(), (-a).exp()),
        PlasticUpdate::FirstOrder => {
            let m = Tensor2::identity() + a;
            (m, m.try_inverse().unwrap_or(Tensor2::identity() - a))
        }
    };
    let fp = incr * state.fp;
    let fe = f * fp_n_inv * incr_inv;
    let ce = fe.transpose() * fe;
    let ee = (ce - Tensor2::identity()) * 0.5;
    let s_bar = frame.stiffness.contract(&ee);

    let gamma_acc = state.gamma_acc + dgamma.abs().sum();
    let (h, _) = params.hardening_modulus(gamma_acc);
    let tau_c = VecN::from_fn(|a, _| {
        state.tau_c[a] + (0..NSYS).map(|b| params.q_ab(a, b) * h * dgamma[b].abs()).sum::<f64>()
    });
    let tau_alpha = VecN::from_fn(|a, _| resolved_shear(&s_bar, &frame.systems[a]));
    let residual = VecN::from_fn(|a, _| dgamma[a] - dt * slip_rate(tau_alpha[a], tau_c[a], params));
    Trial {
        residual,
        tau_alpha,
        tau_c,
        fp,
        ce,
        s_bar,
        fe,
    }
}

fn jacobian(
    t: &Trial,
    state: &CrystalState,
    dgamma: &VecN,
    dt: f64,
    params: &CrystalParams,
    frame: &Frame,
) -> MatN {
    // dτ^α/dΔγ^β ≈ −P^α : C : sym(Cᵉ P^β)
    let dtau_cols: [Tensor2; 12] =
        std::array::from_fn(|b| frame.stiffness.contract(&sym(&(t.ce * frame.schmid[b]))));
    let gamma_acc = state.gamma_acc + dgamma.abs().sum();
    let (h, dh) = params.hardening_modulus(gamma_acc);
    let mut jac = MatN::identity();
    for a in 0..NSYS {
        let ratio = (t.tau_alpha[a] / t.tau_c[a]).abs();
        // ∂γ̇/∂τ and ∂γ̇/∂τ_c
        let d_rate_d_tau = params.gamma_dot_0 * params.n * ratio.powf(params.n - 1.0) / t.tau_c[a];
        let d_rate_d_tc = -params.n * slip_rate(t.tau_alpha[a], t.tau_c[a], params) / t.tau_c[a];
        let latent: f64 = (0..NSYS).map(|d| params.q_ab(a, d) * dgamma[d].abs()).sum();
        for b in 0..NSYS {
            let dtau = -ddot(&frame.schmid[a], &dtau_cols[b]);
            let dtc = (params.q_ab(a, b) * h + dh * latent) * sign(dgamma[b]);
            jac[(a, b)] -= dt * (d_rate_d_tau * dtau + d_rate_d_tc * dtc);
        }
    }
    jac
}

fn solve_local(
    f: &Tensor2,
    state: &CrystalState,
    fp_n_inv: &Tensor2,
    guess: VecN,
    dt: f64,
    params: &CrystalParams,
    frame: &Frame,
) -> Result<Local> {
    let mut dgamma = guess;
    let mut trial = evaluate_trial(f, state, fp_n_inv, &dgamma, dt, params, frame);
    let tol = 1e-14 + 1e-11 * params.gamma_dot_0 * dt.max(0.0);
    for _ in 0..MAX_LOCAL_ITER {
        let r_norm = trial.residual.amax();
        if !r_norm.is_finite() {
            break;
        }
        if r_norm <= tol {
            return Ok(Local {
                dgamma,
                tau_c: trial.tau_c,
                fp: trial.fp,
                tau: trial.fe * trial.s_bar * trial.fe.transpose(),
            });
        }
        let jac = jacobian(&trial, state, &dgamma, dt, params, frame);
        let Some(step) = jac.lu().solve(&(-trial.residual)) else {
            break;
        };
        let mut alpha = 1.0;
        loop {
            let cand = dgamma + step * alpha;
            let t = evaluate_trial(f, state, fp_n_inv, &cand, dt, params, frame);
            let n = t.residual.amax();
            if (n.is_finite() && n < r_norm) || alpha < 1.0 / 256.0 {
                dgamma = cand;
                trial = t;
                break;
            }
            alpha *= 0.5;
        }
    }
    Err(Error::material(
        "crystal-fcc",
        format!(
            "local slip iteration did not converge in {MAX_LOCAL_ITER} iterations (residual {:.3e})",
            trial.residual.amax()
        ),
    ))
}

/// Implicit update over `DTIME` with a numerically differentiated Jaumann
/// tangent (nine forward perturbations of `F`).
pub fn crystal_plasticity_umat(call: &UmatCall, params: &CrystalParams) -> Result<UmatResult> {
    let state = CrystalState::from_statev(&call.statev_in, params)?;
    let f = call.dfgrd1;
    let j = f.determinant();
    if !(j > 0.0) {
        return Err(Error::InvalidConfiguration { det: j });
    }
    if !(call.dtime >= 0.0) {
        return Err(Error::contract("crystal plasticity needs DTIME >= 0"));
    }
    let frame = Frame::new(params);
    let fp_n_inv = state
        .fp
        .try_inverse()
        .ok_or(Error::SingularMatrix { det: state.fp.determinant() })?;
    let dt = call.dtime;
    let base = solve_local(&f, &state, &fp_n_inv, VecN::zeros(), dt, params, &frame)?;

    let mut dtau = Tensor4::zeros();
    for k in 0..3 {
        for l in 0..3 {
            let mut fk = f;
            fk[(k, l)] += TANGENT_STEP;
            let pert = solve_local(&fk, &state, &fp_n_inv, base.dgamma, dt, params, &frame)?;
            let d = (pert.tau - base.tau) / TANGENT_STEP;
            for i in 0..3 {
                for p in 0..3 {
                    dtau[(i, p, k, l)] = d[(i, p)];
                }
            }
        }
    }
    let tau_sym = sym(&base.tau);
    let c = jaumann_from_dtau_df(&dtau, &tau_sym, &f)?;

    let new_state = CrystalState {
        fp: base.fp,
        tau_c: std::array::from_fn(|a| base.tau_c[a]),
        gamma_acc: state.gamma_acc + base.dgamma.abs().sum(),
        gamma: std::array::from_fn(|a| state.gamma[a] + base.dgamma[a]),
    };
    let out = UmatResult {
        stress_out: UmatStress::from_tensor(&(tau_sym / j)),
        statev_out: new_state.to_statev(),
        ddsdde: umat_tangent_from_tensor(&c),
    };
    if !out.is_finite() {
        return Err(Error::material("crystal-fcc", "non-finite stress or tangent"));
    }
    Ok(out)
}

/// Registered FCC crystal plasticity model; see [`CrystalParams::from_props`].
#[derive(Clone, Debug)]
pub struct CrystalPlasticity {
    props: Vec<f64>,
    params: CrystalParams,
}

impl CrystalPlasticity {
    pub fn new(props: Vec<f64>) -> Result<Self> {
        let params = CrystalParams::from_props(&props)?;
        Ok(Self { props, params })
    }
}

impl Material for CrystalPlasticity {
    fn name(&self) -> &str {
        "crystal-fcc"
    }
    fn regime(&self) -> Regime {
        Regime::FiniteStrain
    }
    fn nstatv_user(&self) -> usize {
        CRYSTAL_NSTATV
    }
    fn props(&self) -> &[f64] {
        &self.props
    }
    fn initial_state(&self) -> Vec<f64> {
        CrystalState::initial(&self.params).to_statev()
    }
    fn evaluate(&self, call: &UmatCall) -> Result<UmatResult> {
        crystal_plasticity_umat(call, &CrystalParams::from_props(&call.props)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor2;

    fn params() -> CrystalParams {
        CrystalParams::reference_defaults()
    }

    fn call(f: Tensor2, statev: Vec<f64>, dt: f64) -> UmatCall {
        let mut c = UmatCall::finite_strain(f, params().to_props(), statev);
        c.dtime = dt;
        c
    }

    #[test]
    fn slip_system_table() {
        let systems = fcc_slip_systems();
        for s in &systems {
            assert!(s.s.dot(&s.n).abs() <= 1e-16);
            assert!((s.s.norm() - 1.0).abs() <= 1e-12);
            assert!((s.n.norm() - 1.0).abs() <= 1e-12);
        }
        // closed under the cyclic axis permutation, up to sign
        for s in &systems {
            let p = Vector3::new(s.s[2], s.s[0], s.s[1]);
            let m = Vector3::new(s.n[2], s.n[0], s.n[1]);
            assert!(systems.iter().any(|t| {
                (t.s - p).norm().min((t.s + p).norm()) < 1e-12
                    && (t.n - m).norm().min((t.n + m).norm()) < 1e-12
            }));
        }
    }

    #[test]
    fn schmid_factors_for_001_tension() {
        let e3 = Vector3::z();
        let m: Vec<f64> = fcc_slip_systems()
            .iter()
            .map(|s| (s.s.dot(&e3) * s.n.dot(&e3)).abs())
            .collect();
        let max = m.iter().cloned().fold(0.0, f64::max);
        assert!((max - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.iter().filter(|&&x| (x - max).abs() < 1e-15).count(), 8);
    }

    #[test]
    fn resolved_shear_cases() {
        let hyd = Tensor2::identity() * 5e7;
        let uni = Tensor2::from_diagonal(&Vector3::new(0.0, 0.0, 1e8));
        for s in fcc_slip_systems() {
            assert!(resolved_shear(&hyd, &s).abs() < 1e-8);
            let along = s.s * s.s.transpose() * 1e8;
            assert!(resolved_shear(&along, &s).abs() < 1e-8);
            let t = resolved_shear(&uni, &s).abs();
            assert!(t < 1e-8 || (t - 1e8 / 6f64.sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn slip_rate_examples() {
        let p = params();
        assert!((slip_rate(60.8e6, 60.8e6, &p) - 0.001).abs() < 1e-18);
        assert!((slip_rate(-60.8e6, 60.8e6, &p) + 0.001).abs() < 1e-18);
        assert_eq!(slip_rate(0.0, 60.8e6, &p), 0.0);
        assert!((slip_rate(2.0 * 60.8e6, 60.8e6, &p) - 1.024).abs() < 1e-12);
    }

    #[test]
    fn hardening_examples() {
        let p = params();
        let mut rates = [0.0; 12];
        rates[0] = 1.0;
        let h = hardening_rate(0.0, &rates, &p);
        assert!(h.iter().all(|&x| (x - 541.4e6).abs() < 1e-6));
        let gamma_one = (p.tau_s - p.tau_0) / p.h0;
        let h1 = hardening_rate(gamma_one, &rates, &p);
        assert!((h1[3] / 541.4e6 - 0.419_974_341_614).abs() < 1e-9);
        let sat = hardening_rate(1e3, &rates, &p);
        assert!(sat.iter().all(|&x| x < 1e-6));
        let mut secant = p.clone();
        secant.hardening = HardeningVariant::Secant;
        let hs = hardening_rate(gamma_one, &rates, &secant);
        assert!((hs[3] / 541.4e6 - 1.0 / 1f64.cos().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn props_round_trip() {
        let mut p = params();
        p.euler_deg = [10.0, 20.0, 30.0];
        p.hardening = HardeningVariant::Secant;
        assert_eq!(CrystalParams::from_props(&p.to_props()).unwrap(), p);
        let mut bad = p.to_props();
        bad[7] = 200e6;
        assert!(CrystalParams::from_props(&bad).is_err());
    }

    #[test]
    fn zero_strain_from_virgin_state_is_a_no_op() {
        let r = crystal_plasticity_umat(&call(Tensor2::identity(), vec![0.0; 34], 1.0), &params())
            .unwrap();
        assert!(r.stress_out.max_abs() <= 1e-12);
        let expected = CrystalState::initial(&params()).to_statev();
        for (a, b) in r.statev_out.iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn small_strain_response_is_cubic_elastic() {
        let p = params();
        let d = p.elastic.voigt_stiffness();
        let eps = 5e-4;
        let f = Tensor2::from_diagonal(&Vector3::new(1.0, 1.0, 1.0 + eps));
        let r = crystal_plasticity_umat(&call(f, vec![0.0; 34], 1.0), &p).unwrap();
        let expected = d[(2, 2)] * eps;
        assert!((r.stress_out[2] - expected).abs() <= 1e-3 * expected);
        assert!((r.stress_out[0] - d[(0, 2)] * eps).abs() <= 1e-3 * expected);
    }

    /// Laterally symmetric [001] stretch well past yield over several steps.
    #[test]
    fn tension_run_keeps_invariants() {
        let p = params();
        let mut statev = vec![0.0; 34];
        let mut prev_tc = [p.tau_0; 12];
        for step in 1..=10 {
            let e = 0.005 * step as f64;
            let f = Tensor2::from_diagonal(&Vector3::new(1.0 - 0.3 * e, 1.0 - 0.3 * e, 1.0 + e));
            let r = crystal_plasticity_umat(&call(f, statev.clone(), 1.0), &p).unwrap();
            let st = CrystalState::from_statev(&r.statev_out, &p).unwrap();
            assert!((st.fp.determinant() - 1.0).abs() <= 1e-8);
            for a in 0..12 {
                assert!(st.tau_c[a] >= prev_tc[a]);
                assert!(st.tau_c[a] <= p.tau_s * (1.0 + 1e-6));
            }
            let peak = st.gamma.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            let active: Vec<f64> =
                st.gamma.iter().map(|g| g.abs()).filter(|g| *g > 1e-6 * peak).collect();
            assert_eq!(active.len(), 8);
            for g in &active {
                assert!((g - active[0]).abs() <= 1e-8 * active[0]);
            }
            prev_tc = st.tau_c;
            statev = r.statev_out;
        }
        assert!(prev_tc[0] > p.tau_0);
    }

    #[test]
    fn first_order_update_drifts_from_isochoric() {
        let mut p = params();
        p.update = PlasticUpdate::FirstOrder;
        let f = Tensor2::from_diagonal(&Vector3::new(0.95, 0.95, 1.1));
        let r = crystal_plasticity_umat(&call(f, vec![0.0; 34], 1.0), &p).unwrap();
        let st = CrystalState::from_statev(&r.statev_out, &p).unwrap();
        assert!((st.fp.determinant() - 1.0).abs() > 1e-8);
        p.update = PlasticUpdate::Exponential;
        let r = crystal_plasticity_umat(&call(f, vec![0.0; 34], 1.0), &p).unwrap();
        let st = CrystalState::from_statev(&r.statev_out, &p).unwrap();
        assert!((st.fp.determinant() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn repeated_calls_are_bit_identical() {
        let f = Tensor2::new(1.01, 0.02, 0.0, 0.0, 0.99, 0.01, 0.003, 0.0, 1.02);
        let c = call(f, vec![0.0; 34], 1.0);
        let a = crystal_plasticity_umat(&c, &params()).unwrap();
        let b = crystal_plasticity_umat(&c, &params()).unwrap();
        assert_eq!(a, b);
    }
}
