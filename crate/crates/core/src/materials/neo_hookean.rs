//! Compressible neo-Hookean solid:
//! `σ = (μ/J)(FFᵀ − ⅓ tr(FFᵀ) I) + κ(J − 1) I` with `μ = E/(2(1+ν))`,
//! `κ = E/(3(1−2ν))`.

use crate::error::{Error, Result};
use crate::material_api::{Material, Regime, UmatCall, UmatResult};
use crate::tensor::{kronecker, Tensor2, Tensor4};
use crate::voigt::{umat_tangent_from_tensor, UmatStress};

use super::{require_props, ElasticConstants};

fn moduli(params: &ElasticConstants) -> Result<(f64, f64)> {
    match *params {
        ElasticConstants::Isotropic { e, nu } => {
            Ok((e / (2.0 * (1.0 + nu)), e / (3.0 * (1.0 - 2.0 * nu))))
        }
        ElasticConstants::Cubic { .. } => Err(Error::contract("neo-Hookean needs isotropic constants")),
    }
}

pub fn neo_hookean_cauchy(f: &Tensor2, params: &ElasticConstants) -> Result<Tensor2> {
    let j = f.determinant();
    if !(j > 0.0) {
        return Err(Error::InvalidConfiguration { det: j });
    }
    let (mu, kappa) = moduli(params)?;
    let b = f * f.transpose();
    let i = Tensor2::identity();
    Ok((b - i * (b.trace() / 3.0)) * (mu / j) + i * (kappa * (j - 1.0)))
}

/// Exact Jaumann-rate modulus of the Kirchhoff stress, divided by `J`:
///
/// ```text
/// J C_ijkl = ½μ(δ_ik b_jl + δ_il b_jk + b_ik δ_jl + b_il δ_jk) − ⅔μ δ_ij b_kl + κJ(2J−1) δ_ij δ_kl
/// ```
///
/// Obtained from `τ = μ(b − ⅓ tr b I) + κJ(J−1) I`, whose Jaumann rate is
/// `μ(db + b d) − ⅔μ (b:d) I + κJ(2J−1) tr(d) I` with `d` the rate of deformation.
pub fn neo_hookean_jaumann_tangent(f: &Tensor2, params: &ElasticConstants) -> Result<Tensor4> {
    let j = f.determinant();
    if !(j > 0.0) {
        return Err(Error::InvalidConfiguration { det: j });
    }
    let (mu, kappa) = moduli(params)?;
    let b = f * f.transpose();
    let vol = kappa * j * (2.0 * j - 1.0);
    Ok(Tensor4::from_fn(|i, jj, k, l| {
        let d = kronecker;
        (0.5 * mu * (d(i, k) * b[(jj, l)] + d(i, l) * b[(jj, k)] + b[(i, k)] * d(jj, l) + b[(i, l)] * d(jj, k))
            - 2.0 / 3.0 * mu * d(i, jj) * b[(k, l)]
            + vol * d(i, jj) * d(k, l))
            / j
    }))
}

pub fn neo_hookean_umat(call: &UmatCall, params: &ElasticConstants) -> Result<UmatResult> {
    let sigma = neo_hookean_cauchy(&call.dfgrd1, params)?;
    let c = neo_hookean_jaumann_tangent(&call.dfgrd1, params)?;
    Ok(UmatResult {
        stress_out: UmatStress::from_tensor(&sigma),
        statev_out: call.statev_in.clone(),
        ddsdde: umat_tangent_from_tensor(&c),
    })
}

/// Registered neo-Hookean model, props `[E, ν]`.
#[derive(Clone, Debug)]
pub struct NeoHookean {
    props: Vec<f64>,
}

impl NeoHookean {
    pub fn new(props: Vec<f64>) -> Result<Self> {
        require_props("neo-hookean", &props, 2)?;
        ElasticConstants::isotropic(props[0], props[1])?;
        Ok(Self { props })
    }
}

impl Material for NeoHookean {
    fn name(&self) -> &str {
        "neo-hookean"
    }
    fn regime(&self) -> Regime {
        Regime::FiniteStrain
    }
    fn nstatv_user(&self) -> usize {
        0
    }
    fn props(&self) -> &[f64] {
        &self.props
    }
    fn evaluate(&self, call: &UmatCall) -> Result<UmatResult> {
        require_props(self.name(), &call.props, 2)?;
        let params = ElasticConstants::isotropic(call.props[0], call.props[1])?;
        neo_hookean_umat(call, &params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::rotation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> ElasticConstants {
        ElasticConstants::isotropic(1e6, 0.3).unwrap()
    }

    #[test]
    fn undeformed_and_rotated_states_are_stress_free() {
        let s = neo_hookean_cauchy(&Tensor2::identity(), &params()).unwrap();
        assert_eq!(s, Tensor2::zeros());
        let q = rotation([1.0, -1.0, 0.5], 0.8);
        assert!(neo_hookean_cauchy(&q, &params()).unwrap().amax() < 1e-9);
    }

    #[test]
    fn uniform_dilation_is_hydrostatic() {
        let s = neo_hookean_cauchy(&(Tensor2::identity() * 1.1), &params()).unwrap();
        let expected = 1e6 / (3.0 * 0.4) * (1.331 - 1.0);
        for i in 0..3 {
            assert!((s[(i, i)] - expected).abs() < 1e-9 * expected);
        }
        assert!((expected - 2.758e5).abs() < 1e2);
        assert_eq!(s[(0, 1)], 0.0);
    }

    #[test]
    fn inverted_element_is_rejected() {
        let f = Tensor2::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, -0.5));
        assert!(matches!(
            neo_hookean_cauchy(&f, &params()),
            Err(Error::InvalidConfiguration { .. })
        ));
    }

    #[test]
    fn stress_is_symmetric_and_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let f = Tensor2::identity() + Tensor2::from_fn(|_, _| rng.random_range(-0.3..0.3));
            let q = rotation(
                [rng.random(), rng.random(), rng.random::<f64>() + 0.1],
                rng.random_range(-3.0..3.0),
            );
            let s = neo_hookean_cauchy(&f, &params()).unwrap();
            assert!((s - s.transpose()).amax() <= 1e-12 * s.amax().max(1.0));
            let sq = neo_hookean_cauchy(&(q * f), &params()).unwrap();
            assert!((sq - q * s * q.transpose()).amax() <= 1e-10 * s.amax().max(1.0));
        }
    }

    /// Jaumann modulus checked against its definition: perturb `F ← (I + h·L)F`
    /// with a pure stretching `L = D` (no spin), so the Jaumann rate reduces to
    /// `dτ/dh` and must equal `J C : D`.
    #[test]
    fn tangent_matches_definition_by_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = params();
        for _ in 0..20 {
            let f = Tensor2::identity() + Tensor2::from_fn(|_, _| rng.random_range(-0.25..0.25));
            let j = f.determinant();
            let c = neo_hookean_jaumann_tangent(&f, &p).unwrap();
            let tau = |g: &Tensor2| neo_hookean_cauchy(g, &p).unwrap() * g.determinant();
            for (k, l) in [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)] {
                let mut d = Tensor2::zeros();
                d[(k, l)] = 0.5;
                d[(l, k)] += 0.5;
                let h = 1e-6;
                let fp = (Tensor2::identity() + d * h) * f;
                let fm = (Tensor2::identity() - d * h) * f;
                let fd = (tau(&fp) - tau(&fm)) / (2.0 * h);
                let an = c.contract(&d) * j;
                let err = (fd - an).amax() / an.amax().max(1e3);
                assert!(err < 1e-6, "err {err}");
            }
        }
    }
}
