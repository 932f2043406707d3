//! Right polar decomposition `F = R·U`.

use crate::error::{Error, Result};
use crate::tensor::{inv3, Tensor2};

const MAX_ITERATIONS: usize = 100;

/// Splits `f` into a proper rotation `R` and a symmetric positive definite
/// stretch `U` with `F = R·U`.
///
/// Uses Newton's iteration `X ← ½(γX + X⁻ᵀ/γ)` on the orthogonal factor with
/// Frobenius-norm scaling, which converges quadratically from any
/// nonsingular start.
pub fn polar_decompose(f: &Tensor2) -> Result<(Tensor2, Tensor2)> {
    let det = f.determinant();
    if !det.is_finite() || det <= 0.0 {
        return Err(Error::InvalidConfiguration { det });
    }

    let mut x = *f;
    let mut scaled = true;
    for _ in 0..MAX_ITERATIONS {
        let x_inv = inv3(&x).map_err(|_| Error::InvalidConfiguration { det })?;
        let gamma = if scaled {
            (x_inv.norm() / x.norm()).sqrt()
        } else {
            1.0
        };
        let next = (x * gamma + x_inv.transpose() / gamma) * 0.5;
        let change = (next - x).norm();
        x = next;
        if change <= 1e-3 {
            // Scaling only helps far from convergence.
            scaled = false;
        }
        if change <= 4.0 * f64::EPSILON {
            break;
        }
    }

    let r = x;
    let u = r.transpose() * f;
    let u = (u + u.transpose()) * 0.5;
    Ok((r, u))
}

/// Rotation about a unit `axis` by `angle` radians (Rodrigues' formula).
pub fn rotation(axis: [f64; 3], angle: f64) -> Tensor2 {
    let n = nalgebra::Vector3::from(axis).normalize();
    let k = n.cross_matrix();
    Tensor2::identity() + k * angle.sin() + k * k * (1.0 - angle.cos())
}

/// Active rotation from Bunge Euler angles `(φ1, Φ, φ2)` in radians,
/// mapping crystal axes to sample axes.
pub fn rotation_from_bunge(phi1: f64, big_phi: f64, phi2: f64) -> Tensor2 {
    let z1 = rotation([0.0, 0.0, 1.0], phi1);
    let x = rotation([1.0, 0.0, 0.0], big_phi);
    let z2 = rotation([0.0, 0.0, 1.0], phi2);
    z1 * x * z2
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{SymmetricEigen, Vector3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Spectral oracle: `U = sqrt(FᵀF)` from an eigendecomposition, `R = F U⁻¹`.
    fn spectral_polar(f: &Tensor2) -> (Tensor2, Tensor2) {
        let eig = SymmetricEigen::new(f.transpose() * f);
        let sqrt = eig.eigenvalues.map(f64::sqrt);
        let u = eig.eigenvectors * Tensor2::from_diagonal(&sqrt) * eig.eigenvectors.transpose();
        let r = f * u.try_inverse().unwrap();
        (r, u)
    }

    fn random_f(rng: &mut impl Rng, det_lo: f64, det_hi: f64) -> Tensor2 {
        loop {
            let f = Tensor2::identity() + Tensor2::from_fn(|_, _| rng.random_range(-0.6..0.6));
            let d = f.determinant();
            if d >= det_lo && d <= det_hi {
                return f;
            }
        }
    }

    #[test]
    fn rotation_input_returns_itself() {
        let q = rotation([1.0, 2.0, -0.5], 0.9);
        let (r, u) = polar_decompose(&q).unwrap();
        assert!((r - q).amax() < 1e-14);
        assert!((u - Tensor2::identity()).amax() < 1e-14);
    }

    #[test]
    fn spd_input_has_identity_rotation() {
        let f = Tensor2::from_diagonal(&Vector3::new(2.0, 1.0, 1.0));
        let (r, u) = polar_decompose(&f).unwrap();
        assert!((r - Tensor2::identity()).amax() < 1e-15);
        assert!((u - f).amax() < 1e-15);
    }

    #[test]
    fn matches_spectral_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let f = random_f(&mut rng, 0.5, 2.0);
            let (r, u) = polar_decompose(&f).unwrap();
            let (ro, uo) = spectral_polar(&f);
            assert!((r - ro).amax() < 1e-10, "{f}");
            assert!((u - uo).amax() < 1e-10, "{f}");
        }
    }

    #[test]
    fn invariants_hold_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let f = random_f(&mut rng, 0.1, 10.0);
            let (r, u) = polar_decompose(&f).unwrap();
            assert!((r.transpose() * r - Tensor2::identity()).amax() <= 1e-12);
            assert!((r.determinant() - 1.0).abs() <= 1e-12);
            assert!((u - u.transpose()).amax() <= 1e-12);
            assert!(SymmetricEigen::new(u).eigenvalues.min() > 0.0);
            assert!((r * u - f).amax() <= 1e-10 * f.amax());
        }
    }

    #[test]
    fn rejects_inverted_configuration() {
        let f = Tensor2::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(matches!(
            polar_decompose(&f),
            Err(Error::InvalidConfiguration { .. })
        ));
    }

    #[test]
    fn bunge_identity_and_orthogonality() {
        assert_eq!(rotation_from_bunge(0.0, 0.0, 0.0), Tensor2::identity());
        let q = rotation_from_bunge(0.3, 1.1, -2.0);
        assert!((q.transpose() * q - Tensor2::identity()).amax() < 1e-15);
        assert!((q.determinant() - 1.0).abs() < 1e-15);
    }
}
