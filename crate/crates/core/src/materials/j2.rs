//! Small-strain von Mises plasticity with linear isotropic hardening,
//! integrated by radial return.
//!
//! User state: plastic strain tensor (6 tensorial components in UMAT slot
//! order) followed by the equivalent plastic strain.

use crate::error::{Error, Result};
use crate::material_api::{Material, Regime, UmatCall, UmatResult};
use crate::tensor::{dev, ddot, kronecker, Tensor2, Tensor4};
use crate::voigt::{umat_tangent_from_tensor, Convention, UmatOrder, UmatStress};

use super::{require_props, require_user_state, ElasticConstants};

pub const J2_NSTATV: usize = 7;

/// Von Mises parameters; props order `[E, ν, σ_y, h]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct J2Params {
    pub elastic: ElasticConstants,
    pub sigma_y: f64,
    /// Plastic hardening modulus: yield stress grows as `σ_y + h ε_p`.
    pub h: f64,
}

impl J2Params {
    pub fn new(e: f64, nu: f64, sigma_y: f64, h: f64) -> Result<Self> {
        let elastic = ElasticConstants::isotropic(e, nu)?;
        if !(sigma_y > 0.0) || !(h >= 0.0) {
            return Err(Error::contract(format!(
                "J2 needs σ_y > 0 and h >= 0 (σ_y = {sigma_y}, h = {h})"
            )));
        }
        Ok(Self {
            elastic,
            sigma_y,
            h,
        })
    }

    pub fn from_props(props: &[f64]) -> Result<Self> {
        require_props("j2-plasticity", props, 4)?;
        Self::new(props[0], props[1], props[2], props[3])
    }

    pub fn to_props(&self) -> Vec<f64> {
        let ElasticConstants::Isotropic { e, nu } = self.elastic else {
            unreachable!()
        };
        vec![e, nu, self.sigma_y, self.h]
    }
}

fn unpack_tensorial(s: &[f64]) -> Tensor2 {
    let mut t = Tensor2::zeros();
    for (slot, &(i, j)) in UmatOrder::SLOTS.iter().enumerate() {
        t[(i, j)] = s[slot];
        t[(j, i)] = s[slot];
    }
    t
}

fn pack_tensorial(t: &Tensor2) -> [f64; 6] {
    UmatOrder::SLOTS.map(|(i, j)| t[(i, j)])
}

/// Radial-return update with the consistent (algorithmic) tangent.
pub fn j2_plasticity_umat(call: &UmatCall, params: &J2Params) -> Result<UmatResult> {
    require_user_state("j2-plasticity", &call.statev_in, J2_NSTATV)?;
    let (_, mu) = params.elastic.lame().unwrap();
    let kappa = params.elastic.bulk_modulus();
    let d = params.elastic.voigt_stiffness();

    let eps_p = unpack_tensorial(&call.statev_in[..6]);
    let eqps = call.statev_in[6];

    let trial = UmatStress::from_vector(&(call.stress_in.to_vector() + d * call.dstran.to_vector()))
        .to_tensor();
    let s_trial = dev(&trial);
    let q_trial = (1.5 * ddot(&s_trial, &s_trial)).sqrt();
    let yield_stress = params.sigma_y + params.h * eqps;
    let f_trial = q_trial - yield_stress;

    if f_trial <= 0.0 {
        return Ok(UmatResult {
            stress_out: UmatStress::from_tensor(&trial),
            statev_out: call.statev_in.clone(),
            ddsdde: d,
        });
    }

    let dlambda = f_trial / (3.0 * mu + params.h);
    let theta = 1.0 - 3.0 * mu * dlambda / q_trial;
    let flow = s_trial * (1.5 / q_trial);
    let stress = trial - s_trial * (1.0 - theta);
    let eps_p_new = eps_p + flow * dlambda;

    let n = s_trial / ddot(&s_trial, &s_trial).sqrt();
    let theta_bar = 1.0 / (1.0 + params.h / (3.0 * mu)) - (1.0 - theta);
    let isym = Tensor4::sym_identity();
    let tangent = Tensor4::from_fn(|i, j, k, l| {
        let one_one = kronecker(i, j) * kronecker(k, l);
        kappa * one_one + 2.0 * mu * theta * (isym[(i, j, k, l)] - one_one / 3.0)
            - 2.0 * mu * theta_bar * n[(i, j)] * n[(k, l)]
    });

    let mut statev = Vec::with_capacity(J2_NSTATV);
    statev.extend_from_slice(&pack_tensorial(&eps_p_new));
    statev.push(eqps + dlambda);

    let out = UmatResult {
        stress_out: UmatStress::from_tensor(&stress),
        statev_out: statev,
        ddsdde: umat_tangent_from_tensor(&tangent),
    };
    if !out.is_finite() {
        return Err(Error::material("j2-plasticity", "radial return produced non-finite values"));
    }
    Ok(out)
}

/// Registered von Mises model, props `[E, ν, σ_y, h]`.
#[derive(Clone, Debug)]
pub struct J2Plasticity {
    props: Vec<f64>,
}

impl J2Plasticity {
    pub fn new(props: Vec<f64>) -> Result<Self> {
        J2Params::from_props(&props)?;
        Ok(Self { props })
    }
}

impl Material for J2Plasticity {
    fn name(&self) -> &str {
        "j2-plasticity"
    }
    fn regime(&self) -> Regime {
        Regime::SmallStrain
    }
    fn nstatv_user(&self) -> usize {
        J2_NSTATV
    }
    fn props(&self) -> &[f64] {
        &self.props
    }
    fn evaluate(&self, call: &UmatCall) -> Result<UmatResult> {
        j2_plasticity_umat(call, &J2Params::from_props(&call.props)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voigt::UmatStrain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> J2Params {
        J2Params::new(70e9, 0.2, 243e6, 2171e6).unwrap()
    }

    fn step(stress: UmatStress, statev: &[f64], dstran: UmatStrain) -> UmatResult {
        let mut call = UmatCall::small_strain(dstran, params().to_props(), statev.to_vec());
        call.stress_in = stress;
        j2_plasticity_umat(&call, &params()).unwrap()
    }

    fn von_mises(s: &UmatStress) -> f64 {
        let d = dev(&s.to_tensor());
        (1.5 * ddot(&d, &d)).sqrt()
    }

    #[test]
    fn elastic_step_below_yield() {
        let r = step(
            UmatStress::zeros(),
            &[0.0; 7],
            UmatStrain::new([1e-3, 0.0, 0.0, 0.0, 0.0, 0.0]),
        );
        assert_eq!(r.statev_out, vec![0.0; 7]);
        assert_eq!(r.ddsdde, params().elastic.voigt_stiffness());
    }

    #[test]
    fn pure_shear_yields_at_sigma_y_over_sqrt3() {
        let g = 70e9 / 2.4;
        let tau_y = 243e6 / 3f64.sqrt();
        assert!((tau_y - 140.3e6).abs() < 0.05e6);
        // just below and just above the shear yield strain
        let gamma_y = tau_y / g;
        let below = step(
            UmatStress::zeros(),
            &[0.0; 7],
            UmatStrain::new([0.0, 0.0, 0.0, 0.999 * gamma_y, 0.0, 0.0]),
        );
        assert_eq!(below.statev_out[6], 0.0);
        let above = step(
            UmatStress::zeros(),
            &[0.0; 7],
            UmatStrain::new([0.0, 0.0, 0.0, 1.001 * gamma_y, 0.0, 0.0]),
        );
        assert!(above.statev_out[6] > 0.0);
        assert!((von_mises(&above.stress_out) - (243e6 + 2171e6 * above.statev_out[6])).abs() < 1e-8 * 243e6);
    }

    #[test]
    fn invariants_over_random_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let mut stress = UmatStress::zeros();
            let mut statev = vec![0.0; 7];
            for _ in 0..20 {
                let de = UmatStrain::new(std::array::from_fn(|_| rng.random_range(-2e-3..2e-3)));
                let r = step(stress, &statev, de);
                let yield_stress = 243e6 + 2171e6 * r.statev_out[6];
                assert!(von_mises(&r.stress_out) - yield_stress <= 1e-8 * 243e6);
                let tr = r.statev_out[0] + r.statev_out[1] + r.statev_out[2];
                assert!(tr.abs() <= 1e-12);
                assert!(r.statev_out[6] >= statev[6]);
                stress = r.stress_out;
                statev = r.statev_out;
            }
        }
    }

    /// Forward differences of the update (same start state, perturbed Δε)
    /// against the returned algorithmic tangent.
    #[test]
    fn algorithmic_tangent_matches_forward_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut checked = 0;
        while checked < 30 {
            let mut stress = UmatStress::zeros();
            let mut statev = vec![0.0; 7];
            for _ in 0..3 {
                let de = UmatStrain::new(std::array::from_fn(|_| rng.random_range(-3e-3..3e-3)));
                let r = step(stress, &statev, de);
                stress = r.stress_out;
                statev = r.statev_out;
            }
            let de = UmatStrain::new(std::array::from_fn(|_| rng.random_range(-3e-3..3e-3)));
            let base = step(stress, &statev, de);
            // skip states near the elastic/plastic transition
            let mut call = UmatCall::small_strain(de, params().to_props(), statev.clone());
            call.stress_in = stress;
            let d = params().elastic.voigt_stiffness();
            let trial = UmatStress::from_vector(&(stress.to_vector() + d * de.to_vector()));
            let f = von_mises(&trial) - (243e6 + 2171e6 * statev[6]);
            if f.abs() < 1e-6 * 243e6 * 1e3 {
                continue;
            }
            let h = 1e-8;
            for col in 0..6 {
                let mut c = *de.components();
                c[col] += h;
                let pert = step(stress, &statev, UmatStrain::new(c));
                for row in 0..6 {
                    let fd = (pert.stress_out[row] - base.stress_out[row]) / h;
                    let an = base.ddsdde[(row, col)];
                    let scale = base.ddsdde.amax();
                    assert!((fd - an).abs() <= 1e-4 * scale, "({row},{col}) fd {fd} an {an}");
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn wrong_state_length_is_rejected() {
        let call = UmatCall::small_strain(UmatStrain::zeros(), params().to_props(), vec![0.0; 3]);
        assert!(matches!(
            j2_plasticity_umat(&call, &params()),
            Err(Error::ContractViolation(_))
        ));
    }
}
