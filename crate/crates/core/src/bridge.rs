//! Transfer between host-style requests and UMAT-style material calls.
//!
//! Input side: total host strain becomes an engineering-shear increment in
//! UMAT order; at finite strain the deformation gradients yield a strain
//! increment `Δε = sym(ΔF·F⁻¹)` and the incremental rotation from the polar
//! decomposition of `F_new·F_old⁻¹`.
//!
//! Output side: small-strain stress and tangent are permuted back to host
//! order. At finite strain the Cauchy stress is pulled back to the second
//! Piola–Kirchhoff stress and the Jaumann-rate modulus `C` is converted to
//! `K = dS/dF` through `∂τ/∂F`.

use crate::error::{Error, Result};
use crate::material_api::{
    BridgeState, HostRequest, HostResponse, HostTangent, Kinematics, Material, Regime,
    StateLayout, UmatCall,
};
use crate::polar::polar_decompose;
use crate::tensor::{inv_deformation, kronecker, Matrix9, Tensor2, Tensor4};
use crate::voigt::{
    reorder_strain_host_to_umat, reorder_stress_umat_to_host, reorder_tangent_umat_to_host,
    tangent_tensor_from_umat, HostStress, UmatStrain, UmatStress,
};

/// Kinematic quantities handed to a finite-strain UMAT.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicIncrement {
    pub dstran: UmatStrain,
    pub drot: Tensor2,
    /// Relative deformation gradient `F_new·F_old⁻¹`.
    pub f_incr: Tensor2,
    pub j_new: f64,
}

/// Builds the UMAT call for a small-strain request.
pub fn small_strain_inputs(req: &HostRequest, layout: &StateLayout) -> Result<UmatCall> {
    let Kinematics::SmallStrain { strain_total } = &req.kinematics else {
        return Err(Error::contract("small_strain_inputs needs a small-strain request"));
    };
    if layout.regime != Regime::SmallStrain {
        return Err(Error::contract("material is not a small-strain model"));
    }
    let state = layout.unpack(&req.state_in)?;
    let stran = state
        .stran
        .ok_or_else(|| Error::contract("small-strain state without stored strain"))?;
    let total = reorder_strain_host_to_umat(strain_total);
    Ok(UmatCall {
        stress_in: state.stress,
        statev_in: state.user,
        stran,
        dstran: total - stran,
        time: state.time,
        dtime: req.delta,
        props: req.par.clone(),
        dfgrd0: Tensor2::identity(),
        dfgrd1: Tensor2::identity(),
        drot: Tensor2::identity(),
    })
}

/// Strain increment and incremental rotation between two deformation gradients.
pub fn finite_strain_increment(f_old: &Tensor2, f_new: &Tensor2) -> Result<KinematicIncrement> {
    let (f_old_inv, _) = inv_deformation(f_old)?;
    let (f_new_inv, j_new) = inv_deformation(f_new)?;
    let df = f_new - f_old;
    let l = df * f_new_inv;
    let dstran = UmatStrain::from_tensor(&((l + l.transpose()) * 0.5));
    let f_incr = f_new * f_old_inv;
    let (drot, _) = polar_decompose(&f_incr)?;
    Ok(KinematicIncrement {
        dstran,
        drot,
        f_incr,
        j_new,
    })
}

/// Builds the UMAT call for a finite-strain request.
pub fn finite_strain_inputs(req: &HostRequest, layout: &StateLayout) -> Result<UmatCall> {
    let Kinematics::FiniteStrain { f_old, f_new } = &req.kinematics else {
        return Err(Error::contract("finite_strain_inputs needs a finite-strain request"));
    };
    if layout.regime != Regime::FiniteStrain {
        return Err(Error::contract("material is not a finite-strain model"));
    }
    let state = layout.unpack(&req.state_in)?;
    let inc = finite_strain_increment(f_old, f_new)?;
    Ok(UmatCall {
        stress_in: state.stress,
        statev_in: state.user,
        stran: UmatStrain::zeros(),
        dstran: inc.dstran,
        time: state.time,
        dtime: req.delta,
        props: req.par.clone(),
        dfgrd0: *f_old,
        dfgrd1: *f_new,
        drot: inc.drot,
    })
}

/// `S = J F⁻¹ σ F⁻ᵀ`.
pub fn cauchy_to_second_pk(sigma: &Tensor2, f: &Tensor2) -> Result<Tensor2> {
    let (f_inv, j) = inv_deformation(f)?;
    Ok(f_inv * sigma * f_inv.transpose() * j)
}

fn check_symmetric(tau: &Tensor2) -> Result<()> {
    let scale = tau.amax().max(f64::MIN_POSITIVE);
    let defect = (tau - tau.transpose()).amax();
    if defect > 1e-8 * scale {
        return Err(Error::contract(format!(
            "Kirchhoff stress is not symmetric (defect {:.3e} relative)",
            defect / scale
        )));
    }
    Ok(())
}

/// Spin contribution to `∂τ_ip/∂F_kl`: the four τ terms that accompany
/// `J C_ipkm F⁻¹_lm`.
fn spin_terms(tau: &Tensor2, f_inv: &Tensor2) -> Tensor4 {
    // (F⁻¹τ)_lp = F⁻¹_lm τ_mp and (τF⁻ᵀ)_il = τ_im F⁻¹_lm
    let finv_tau = f_inv * tau;
    let tau_finv_t = tau * f_inv.transpose();
    Tensor4::from_fn(|i, p, k, l| {
        0.5 * kronecker(i, k) * finv_tau[(l, p)] - 0.5 * f_inv[(l, i)] * tau[(k, p)]
            + 0.5 * kronecker(p, k) * tau_finv_t[(i, l)]
            - 0.5 * f_inv[(l, p)] * tau[(i, k)]
    })
}

/// `∂τ_ip/∂F_kl` from the Jaumann modulus `C`, the Kirchhoff stress and `F`:
///
/// ```text
/// J C_ipkm F⁻¹_lm + ½δ_ik F⁻¹_lm τ_mp − ½F⁻¹_li τ_kp + ½δ_pk F⁻¹_lm τ_im − ½F⁻¹_lp τ_ik
/// ```
pub fn dtau_df(c_abaqus: &Tensor4, tau: &Tensor2, f: &Tensor2) -> Result<Tensor4> {
    check_symmetric(tau)?;
    let (f_inv, j) = inv_deformation(f)?;
    let spin = spin_terms(tau, &f_inv);
    let mut out = Tensor4::zeros();
    for i in 0..3 {
        for p in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut first = 0.0;
                    for m in 0..3 {
                        first += c_abaqus[(i, p, k, m)] * f_inv[(l, m)];
                    }
                    out[(i, p, k, l)] = j * first + spin[(i, p, k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Recovers the minor-symmetric Jaumann modulus from `∂τ/∂F`, inverting
/// [`dtau_df`] at the given state.
pub fn jaumann_from_dtau_df(dtau: &Tensor4, tau: &Tensor2, f: &Tensor2) -> Result<Tensor4> {
    let (f_inv, j) = inv_deformation(f)?;
    let spin = spin_terms(tau, &f_inv);
    let b = *dtau - spin;
    // J C_ipkm = B_ipkl F_ml
    let raw = Tensor4::from_fn(|i, p, k, m| {
        (0..3).map(|l| b[(i, p, k, l)] * f[(m, l)]).sum::<f64>() / j
    });
    Ok(Tensor4::from_fn(|i, p, k, m| {
        0.25 * (raw[(i, p, k, m)] + raw[(p, i, k, m)] + raw[(i, p, m, k)] + raw[(p, i, m, k)])
    }))
}

/// `K_ijkl = ∂S_ij/∂F_kl` as a 9×9 matrix over row-major index pairs:
///
/// ```text
/// −F⁻¹_ik F⁻¹_lq τ_qp F⁻¹_jp + F⁻¹_iq (∂τ_qp/∂F_kl) F⁻¹_jp − F⁻¹_iq τ_qp F⁻¹_lp F⁻¹_jk
/// ```
pub fn tangent_jaumann_to_dsdf(c_abaqus: &Tensor4, tau: &Tensor2, f: &Tensor2) -> Result<Matrix9> {
    let dtau = dtau_df(c_abaqus, tau, f)?;
    let (f_inv, _) = inv_deformation(f)?;
    let s = f_inv * tau * f_inv.transpose();
    let mut k4 = Tensor4::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut mid = 0.0;
                    for q in 0..3 {
                        for p in 0..3 {
                            mid += f_inv[(i, q)] * dtau[(q, p, k, l)] * f_inv[(j, p)];
                        }
                    }
                    k4[(i, j, k, l)] =
                        -f_inv[(i, k)] * s[(l, j)] + mid - s[(i, l)] * f_inv[(j, k)];
                }
            }
        }
    }
    Ok(k4.to_matrix9())
}

/// Runs one host-style evaluation through a UMAT-style material.
///
/// Never mutates the request: the updated state is returned in
/// [`HostResponse::state_out`] and committing it is the caller's decision, so
/// repeated calls with the same request give bit-identical responses.
pub fn eval(req: &HostRequest, material: &dyn Material) -> Result<HostResponse> {
    let layout = StateLayout::for_material(material);
    if req.kinematics.regime() != layout.regime {
        return Err(Error::contract(format!(
            "material `{}` is {} but the request is {}",
            material.name(),
            layout.regime,
            req.kinematics.regime()
        )));
    }
    match &req.kinematics {
        Kinematics::SmallStrain { strain_total } => {
            let call = small_strain_inputs(req, &layout)?;
            let res = evaluate_checked(material, &call)?;
            let state_out = layout.pack(&BridgeState {
                time: call.time + req.delta,
                stress: res.stress_out,
                stran: Some(reorder_strain_host_to_umat(strain_total)),
                user: res.statev_out,
            })?;
            Ok(HostResponse {
                s: reorder_stress_umat_to_host(&res.stress_out),
                tangent: HostTangent::Small(reorder_tangent_umat_to_host(&res.ddsdde)),
                state_out,
            })
        }
        Kinematics::FiniteStrain { f_new, .. } => {
            let call = finite_strain_inputs(req, &layout)?;
            let res = evaluate_checked(material, &call)?;
            let sigma = res.stress_out.to_tensor();
            let j = f_new.determinant();
            let tau = sigma * j;
            let s = cauchy_to_second_pk(&sigma, f_new)?;
            let c = tangent_tensor_from_umat(&res.ddsdde);
            let k = tangent_jaumann_to_dsdf(&c, &tau, f_new)?;
            let state_out = layout.pack(&BridgeState {
                time: call.time + req.delta,
                stress: res.stress_out,
                stran: None,
                user: res.statev_out,
            })?;
            Ok(HostResponse {
                s: HostStress::from_tensor(&s),
                tangent: HostTangent::Finite(k),
                state_out,
            })
        }
    }
}

fn evaluate_checked(material: &dyn Material, call: &UmatCall) -> Result<crate::UmatResult> {
    let res = material.evaluate(call)?;
    if res.statev_out.len() != material.nstatv_user() {
        return Err(Error::contract(format!(
            "material `{}` returned {} state slots, registered {}",
            material.name(),
            res.statev_out.len(),
            material.nstatv_user()
        )));
    }
    if !res.is_finite() {
        return Err(Error::material(material.name(), "non-finite output"));
    }
    Ok(res)
}

/// Cauchy stress stored in a finite-strain bridge state.
pub fn stored_cauchy(state: &[f64]) -> UmatStress {
    UmatStress::from_slice(&state[1..7])
}

/// `S` at `F` as a 9-vector in row-major pair order.
pub fn flatten_pairs(t: &Tensor2) -> [f64; 9] {
    std::array::from_fn(|n| t[(n / 3, n % 3)])
}

