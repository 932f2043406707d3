//! Built-in UMAT-style material models and their registry.
//!
//! Every model reads its parameters from `PROPS` on each call, exactly as a
//! compiled UMAT would; the structs only remember the property vector used
//! to register them.
//!
//! | name                     | regime | props                                                     | user state |
//! |--------------------------|--------|-----------------------------------------------------------|-----------:|
//! | `linear-elastic`         | small  | `E, ν`                                                    | 0 |
//! | `j2-plasticity`          | small  | `E, ν, σ_y, h`                                            | 7 |
//! | `saint-venant-kirchhoff` | finite | `E, ν`                                                    | 0 |
//! | `neo-hookean`            | finite | `E, ν`                                                    | 0 |
//! | `crystal-fcc`            | finite | `C11, C12, C44, γ̇₀, n, h₀, τ_s, τ₀, q, φ1, Φ, φ2, secant` | 34 |

mod crystal;
mod elastic;
mod j2;
mod neo_hookean;

pub use crystal::{
    crystal_plasticity_umat, fcc_slip_systems, hardening_rate, resolved_shear, slip_rate,
    CrystalParams, CrystalPlasticity, CrystalState, HardeningVariant, PlasticUpdate, SlipSystem,
    CRYSTAL_NSTATV,
};
pub use elastic::{
    linear_elastic_umat, saint_venant_kirchhoff_umat, LinearElastic, SaintVenantKirchhoff,
};
pub use j2::{j2_plasticity_umat, J2Params, J2Plasticity, J2_NSTATV};
pub use neo_hookean::{neo_hookean_cauchy, neo_hookean_jaumann_tangent, neo_hookean_umat, NeoHookean};

use crate::error::{Error, Result};
use crate::material_api::{Material, MaterialInfo, Regime};
use crate::tensor::{Matrix6, Tensor4};
use crate::voigt::umat_tangent_from_tensor;

/// Elastic constants: isotropic `(E, ν)` or cubic `(C11, C12, C44)`, in Pa.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ElasticConstants {
    Isotropic { e: f64, nu: f64 },
    Cubic { c11: f64, c12: f64, c44: f64 },
}

impl ElasticConstants {
    pub fn isotropic(e: f64, nu: f64) -> Result<Self> {
        let c = ElasticConstants::Isotropic { e, nu };
        c.validate()?;
        Ok(c)
    }

    pub fn cubic(c11: f64, c12: f64, c44: f64) -> Result<Self> {
        let c = ElasticConstants::Cubic { c11, c12, c44 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ElasticConstants::Isotropic { e, nu } => {
                if !(e > 0.0) || !(nu > -1.0 && nu < 0.5) {
                    return Err(Error::contract(format!(
                        "isotropic constants need E > 0 and -1 < ν < 0.5 (E = {e}, ν = {nu})"
                    )));
                }
            }
            ElasticConstants::Cubic { c11, c12, c44 } => {
                // Positive definiteness of cubic stiffness.
                if !(c44 > 0.0 && c11 - c12 > 0.0 && c11 + 2.0 * c12 > 0.0) {
                    return Err(Error::contract(format!(
                        "cubic stiffness is not positive definite ({c11}, {c12}, {c44})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Lamé constants of an isotropic set.
    pub fn lame(&self) -> Option<(f64, f64)> {
        match *self {
            ElasticConstants::Isotropic { e, nu } => {
                Some((e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu))))
            }
            ElasticConstants::Cubic { .. } => None,
        }
    }

    pub fn bulk_modulus(&self) -> f64 {
        match *self {
            ElasticConstants::Isotropic { e, nu } => e / (3.0 * (1.0 - 2.0 * nu)),
            ElasticConstants::Cubic { c11, c12, .. } => (c11 + 2.0 * c12) / 3.0,
        }
    }

    /// Stiffness tensor in the material frame.
    pub fn stiffness(&self) -> Tensor4 {
        match *self {
            ElasticConstants::Isotropic { .. } => {
                let (lambda, mu) = self.lame().unwrap();
                Tensor4::isotropic(lambda, mu)
            }
            ElasticConstants::Cubic { c11, c12, c44 } => Tensor4::from_fn(|i, j, k, l| {
                if i == j && k == l {
                    if i == k {
                        c11
                    } else {
                        c12
                    }
                } else if i != j && k != l && ((i == k && j == l) || (i == l && j == k)) {
                    c44
                } else {
                    0.0
                }
            }),
        }
    }

    /// UMAT-order 6×6 stiffness with engineering-shear columns.
    pub fn voigt_stiffness(&self) -> Matrix6 {
        umat_tangent_from_tensor(&self.stiffness())
    }
}

pub(crate) fn require_props(name: &str, props: &[f64], n: usize) -> Result<()> {
    if props.len() < n {
        return Err(Error::contract(format!(
            "material `{name}` needs {n} properties, got {}",
            props.len()
        )));
    }
    Ok(())
}

pub(crate) fn require_user_state(name: &str, statev: &[f64], n: usize) -> Result<()> {
    if statev.len() != n {
        return Err(Error::contract(format!(
            "material `{name}` expects {n} user state slots, got {}",
            statev.len()
        )));
    }
    Ok(())
}

/// Metadata of every built-in model.
pub fn builtin_list() -> Vec<MaterialInfo> {
    vec![
        MaterialInfo {
            name: "linear-elastic".into(),
            nprops: 2,
            nstatv_user: 0,
            regime: Regime::SmallStrain,
        },
        MaterialInfo {
            name: "j2-plasticity".into(),
            nprops: 4,
            nstatv_user: J2_NSTATV,
            regime: Regime::SmallStrain,
        },
        MaterialInfo {
            name: "saint-venant-kirchhoff".into(),
            nprops: 2,
            nstatv_user: 0,
            regime: Regime::FiniteStrain,
        },
        MaterialInfo {
            name: "neo-hookean".into(),
            nprops: 2,
            nstatv_user: 0,
            regime: Regime::FiniteStrain,
        },
        MaterialInfo {
            name: "crystal-fcc".into(),
            nprops: 13,
            nstatv_user: CRYSTAL_NSTATV,
            regime: Regime::FiniteStrain,
        },
    ]
}

pub fn builtin_info(name: &str) -> Option<MaterialInfo> {
    builtin_list().into_iter().find(|m| m.name == name)
}

/// Instantiates a built-in model with the given property vector.
pub fn builtin(name: &str, props: &[f64]) -> Result<Box<dyn Material>> {
    let info = builtin_info(name).ok_or_else(|| Error::UnknownMaterial(name.to_string()))?;
    let props = props.to_vec();
    Ok(match info.name.as_str() {
        "linear-elastic" => Box::new(LinearElastic::new(props)?),
        "j2-plasticity" => Box::new(J2Plasticity::new(props)?),
        "saint-venant-kirchhoff" => Box::new(SaintVenantKirchhoff::new(props)?),
        "neo-hookean" => Box::new(NeoHookean::new(props)?),
        "crystal-fcc" => Box::new(CrystalPlasticity::new(props)?),
        _ => unreachable!(),
    })
}
