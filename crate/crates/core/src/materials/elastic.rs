use crate::error::{Error, Result};
use crate::material_api::{Material, Regime, UmatCall, UmatResult};
use crate::tensor::{inv_deformation, kronecker, Tensor2, Tensor4};
use crate::voigt::{umat_tangent_from_tensor, UmatStress};

use super::{require_props, ElasticConstants};

/// Isotropic small-strain elasticity: `σ = σ_n + D·Δε`, tangent `D`.
pub fn linear_elastic_umat(call: &UmatCall, params: &ElasticConstants) -> UmatResult {
    let d = params.voigt_stiffness();
    let stress = call.stress_in.to_vector() + d * call.dstran.to_vector();
    UmatResult {
        stress_out: UmatStress::from_vector(&stress),
        statev_out: call.statev_in.clone(),
        ddsdde: d,
    }
}

/// St. Venant–Kirchhoff hyperelasticity `S = C : E`, with `E` the
/// Green–Lagrange strain of `DFGRD1`.
///
/// The Jaumann modulus of this law is
/// `J C_ijkl = ½(δ_ik τ_jl + δ_il τ_jk + τ_ik δ_jl + τ_il δ_jk) + F_ia F_jb F_kc F_ld C_abcd`.
pub fn saint_venant_kirchhoff_umat(
    call: &UmatCall,
    params: &ElasticConstants,
) -> Result<UmatResult> {
    let f = call.dfgrd1;
    let (_, j) = inv_deformation(&f)?;
    let c = params.stiffness();
    let e = (f.transpose() * f - Tensor2::identity()) * 0.5;
    let s = c.contract(&e);
    let tau = f * s * f.transpose();
    let pushed = c.rotated(&f);
    let modulus = Tensor4::from_fn(|i, jj, k, l| {
        (0.5 * (kronecker(i, k) * tau[(jj, l)]
            + kronecker(i, l) * tau[(jj, k)]
            + tau[(i, k)] * kronecker(jj, l)
            + tau[(i, l)] * kronecker(jj, k))
            + pushed[(i, jj, k, l)])
            / j
    });
    Ok(UmatResult {
        stress_out: UmatStress::from_tensor(&(tau / j)),
        statev_out: call.statev_in.clone(),
        ddsdde: umat_tangent_from_tensor(&modulus),
    })
}

fn isotropic_from_props(name: &str, props: &[f64]) -> Result<ElasticConstants> {
    require_props(name, props, 2)?;
    ElasticConstants::isotropic(props[0], props[1])
}

/// Registered small-strain linear elastic model, props `[E, ν]`.
#[derive(Clone, Debug)]
pub struct LinearElastic {
    props: Vec<f64>,
}

impl LinearElastic {
    pub fn new(props: Vec<f64>) -> Result<Self> {
        isotropic_from_props("linear-elastic", &props)?;
        Ok(Self { props })
    }
}

impl Material for LinearElastic {
    fn name(&self) -> &str {
        "linear-elastic"
    }
    fn regime(&self) -> Regime {
        Regime::SmallStrain
    }
    fn nstatv_user(&self) -> usize {
        0
    }
    fn props(&self) -> &[f64] {
        &self.props
    }
    fn evaluate(&self, call: &UmatCall) -> Result<UmatResult> {
        let params = isotropic_from_props(self.name(), &call.props)?;
        Ok(linear_elastic_umat(call, &params))
    }
}

/// Registered finite-strain linear elastic model (St. Venant–Kirchhoff), props `[E, ν]`.
#[derive(Clone, Debug)]
pub struct SaintVenantKirchhoff {
    props: Vec<f64>,
}

impl SaintVenantKirchhoff {
    pub fn new(props: Vec<f64>) -> Result<Self> {
        isotropic_from_props("saint-venant-kirchhoff", &props)?;
        Ok(Self { props })
    }
}

impl Material for SaintVenantKirchhoff {
    fn name(&self) -> &str {
        "saint-venant-kirchhoff"
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
        let params = isotropic_from_props(self.name(), &call.props)?;
        saint_venant_kirchhoff_umat(call, &params)
            .map_err(|e| Error::material(self.name(), e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voigt::UmatStrain;

    fn approx(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn zero_increment_keeps_stress() {
        let params = ElasticConstants::isotropic(70e9, 0.2).unwrap();
        let mut call = UmatCall::small_strain(UmatStrain::zeros(), vec![70e9, 0.2], vec![]);
        call.stress_in = UmatStress::new([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let r = linear_elastic_umat(&call, &params);
        assert_eq!(r.stress_out, call.stress_in);
    }

    #[test]
    fn zero_poisson_decouples_uniaxial_strain() {
        let params = ElasticConstants::isotropic(200e9, 0.0).unwrap();
        let call = UmatCall::small_strain(
            UmatStrain::new([1e-3, 0.0, 0.0, 0.0, 0.0, 0.0]),
            vec![],
            vec![],
        );
        let r = linear_elastic_umat(&call, &params);
        assert_eq!(r.stress_out[0], 200e9 * 1e-3);
        assert_eq!(r.stress_out[1], 0.0);
    }

    #[test]
    fn uniaxial_strain_with_poisson() {
        // λ = 19.444 GPa, μ = 29.167 GPa for E = 70 GPa, ν = 0.2
        let params = ElasticConstants::isotropic(70e9, 0.2).unwrap();
        let call = UmatCall::small_strain(
            UmatStrain::new([1e-3, 0.0, 0.0, 0.0, 0.0, 0.0]),
            vec![],
            vec![],
        );
        let r = linear_elastic_umat(&call, &params);
        assert!(approx(r.stress_out[0], 77.777_777_8e6, 1e-8));
        assert!(approx(r.stress_out[1], 19.444_444_4e6, 1e-8));
        assert!(approx(r.stress_out[2], 19.444_444_4e6, 1e-8));
    }

    #[test]
    fn engineering_shear_column_gives_mu() {
        let params = ElasticConstants::isotropic(70e9, 0.2).unwrap();
        let call = UmatCall::small_strain(
            UmatStrain::new([0.0, 0.0, 0.0, 2e-3, 0.0, 0.0]),
            vec![],
            vec![],
        );
        let r = linear_elastic_umat(&call, &params);
        let mu = 70e9 / 2.4;
        assert!(approx(r.stress_out[3], mu * 2e-3, 1e-12));
    }

    #[test]
    fn svk_is_stress_free_under_rotation() {
        let params = ElasticConstants::isotropic(1e6, 0.3).unwrap();
        let q = crate::polar::rotation([0.3, 0.2, 1.0], 1.2);
        let call = UmatCall::finite_strain(q, vec![], vec![]);
        let r = saint_venant_kirchhoff_umat(&call, &params).unwrap();
        assert!(r.stress_out.max_abs() < 1e-9);
    }
}
