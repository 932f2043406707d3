//! Dense second- and fourth-order tensors in three dimensions.
//!
//! Second-order tensors are plain [`nalgebra::Matrix3`] values with the usual
//! `t[(i, j)]` row/column semantics. Fourth-order tensors are stored densely
//! in [`Tensor4`], indexed as `c[(i, j, k, l)]`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{Matrix3, SMatrix};

use crate::error::{Error, Result};

/// A 3×3 real tensor (deformation gradient, stress, rotation).
pub type Tensor2 = Matrix3<f64>;

/// A 6×6 matrix in Voigt layout.
pub type Matrix6 = SMatrix<f64, 6, 6>;

/// A 9×9 matrix over index pairs in row-major pair order
/// `(11, 12, 13, 21, 22, 23, 31, 32, 33)`.
pub type Matrix9 = SMatrix<f64, 9, 9>;

/// Threshold below which `inv3` refuses to invert.
pub const SINGULAR_DET: f64 = 1e-14;

/// Position of the index pair `(i, j)` in the row-major 9-component layout.
#[inline]
pub fn pair_index(i: usize, j: usize) -> usize {
    3 * i + j
}

#[inline]
pub fn kronecker(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

pub fn det3(t: &Tensor2) -> f64 {
    t.determinant()
}

pub fn inv3(t: &Tensor2) -> Result<Tensor2> {
    let det = t.determinant();
    if !det.is_finite() || det.abs() <= SINGULAR_DET {
        return Err(Error::SingularMatrix { det });
    }
    t.try_inverse().ok_or(Error::SingularMatrix { det })
}

/// Inverse of a deformation gradient, rejecting `det F <= 0`.
pub fn inv_deformation(f: &Tensor2) -> Result<(Tensor2, f64)> {
    let det = f.determinant();
    if !det.is_finite() || det <= 0.0 {
        return Err(Error::InvalidConfiguration { det });
    }
    let inv = inv3(f).map_err(|_| Error::InvalidConfiguration { det })?;
    Ok((inv, det))
}

/// Largest absolute entry.
pub fn max_abs(t: &Tensor2) -> f64 {
    t.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn sym(t: &Tensor2) -> Tensor2 {
    (t + t.transpose()) * 0.5
}

pub fn dev(t: &Tensor2) -> Tensor2 {
    t - Tensor2::identity() * (t.trace() / 3.0)
}

/// Double contraction `a : b`.
pub fn ddot(a: &Tensor2, b: &Tensor2) -> f64 {
    a.component_mul(b).sum()
}

/// Fourth-order tensor with 81 dense components.
#[derive(Clone, Copy, PartialEq)]
pub struct Tensor4 {
    data: [f64; 81],
}

impl std::fmt::Debug for Tensor4 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Tensor4 {:?}", self.to_matrix9())
    }
}

impl Default for Tensor4 {
    fn default() -> Self {
        Self::zeros()
    }
}

#[inline]
fn flat(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + l
}

impl Tensor4 {
    pub fn zeros() -> Self {
        Self { data: [0.0; 81] }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t.data[flat(i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// Symmetric fourth-order identity `½(δ_ik δ_jl + δ_il δ_jk)`.
    pub fn sym_identity() -> Self {
        Self::from_fn(|i, j, k, l| {
            0.5 * (kronecker(i, k) * kronecker(j, l) + kronecker(i, l) * kronecker(j, k))
        })
    }

    /// Isotropic elasticity `λ δ_ij δ_kl + 2μ I^sym`.
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        let isym = Self::sym_identity();
        Self::from_fn(|i, j, k, l| {
            lambda * kronecker(i, j) * kronecker(k, l) + 2.0 * mu * isym[(i, j, k, l)]
        })
    }

    pub fn as_slice(&self) -> &[f64; 81] {
        &self.data
    }

    /// Row `pair(i,j)`, column `pair(k,l)`.
    pub fn to_matrix9(&self) -> Matrix9 {
        Matrix9::from_fn(|r, c| self.data[r * 9 + c])
    }

    pub fn from_matrix9(m: &Matrix9) -> Self {
        let mut t = Self::zeros();
        for r in 0..9 {
            for c in 0..9 {
                t.data[r * 9 + c] = m[(r, c)];
            }
        }
        t
    }

    /// `c_ijkl = c'_ijkl = C : T` contraction over the last pair.
    pub fn contract(&self, t: &Tensor2) -> Tensor2 {
        Tensor2::from_fn(|i, j| {
            let mut s = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    s += self[(i, j, k, l)] * t[(k, l)];
                }
            }
            s
        })
    }

    /// Rotates every index: `R_ia R_jb R_kc R_ld C_abcd`.
    pub fn rotated(&self, r: &Tensor2) -> Self {
        // Rotate one index at a time; 4 × 3^5 operations instead of 3^8.
        let mut cur = *self;
        for slot in 0..4 {
            let mut next = Self::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            let mut s = 0.0;
                            for a in 0..3 {
                                let (idx, w) = match slot {
                                    0 => (flat(a, j, k, l), r[(i, a)]),
                                    1 => (flat(i, a, k, l), r[(j, a)]),
                                    2 => (flat(i, j, a, l), r[(k, a)]),
                                    _ => (flat(i, j, k, a), r[(l, a)]),
                                };
                                s += w * cur.data[idx];
                            }
                            next.data[flat(i, j, k, l)] = s;
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }

    /// Largest violation of `C_ijkl = C_jikl = C_ijlk`, relative to the largest entry.
    pub fn minor_symmetry_defect(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let c = self[(i, j, k, l)];
                        worst = worst
                            .max((c - self[(j, i, k, l)]).abs())
                            .max((c - self[(i, j, l, k)]).abs());
                    }
                }
            }
        }
        worst / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        &self.data[flat(i, j, k, l)]
    }
}

impl IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    #[inline]
    fn index_mut(&mut self, (i, j, k, l): (usize, usize, usize, usize)) -> &mut f64 {
        &mut self.data[flat(i, j, k, l)]
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(mut self, rhs: Tensor4) -> Tensor4 {
        self.data.iter_mut().zip(rhs.data).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Tensor4 {
    type Output = Tensor4;
    fn sub(mut self, rhs: Tensor4) -> Tensor4 {
        self.data.iter_mut().zip(rhs.data).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Mul<f64> for Tensor4 {
    type Output = Tensor4;
    fn mul(mut self, rhs: f64) -> Tensor4 {
        self.data.iter_mut().for_each(|a| *a *= rhs);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse_of_identity_and_diagonal() {
        let i = Tensor2::identity();
        assert_eq!(det3(&i), 1.0);
        assert_eq!(inv3(&i).unwrap(), i);

        let d = Tensor2::from_diagonal(&nalgebra::Vector3::new(2.0, 4.0, 5.0));
        assert_eq!(det3(&d), 40.0);
        let inv = inv3(&d).unwrap();
        assert_eq!(
            inv,
            Tensor2::from_diagonal(&nalgebra::Vector3::new(0.5, 0.25, 0.2))
        );
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let s = Tensor2::new(1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0);
        assert!(matches!(inv3(&s), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn inverting_deformation_with_negative_jacobian_fails() {
        let f = Tensor2::from_diagonal(&nalgebra::Vector3::new(-1.0, 1.0, 1.0));
        assert!(matches!(
            inv_deformation(&f),
            Err(Error::InvalidConfiguration { .. })
        ));
    }

    #[test]
    fn matrix9_roundtrip_keeps_pair_order() {
        let t = Tensor4::from_fn(|i, j, k, l| (1000 * i + 100 * j + 10 * k + l) as f64);
        let m = t.to_matrix9();
        assert_eq!(m[(pair_index(1, 2), pair_index(0, 1))], 1201.0);
        assert_eq!(Tensor4::from_matrix9(&m), t);
    }

    #[test]
    fn isotropic_tensor_is_rotation_invariant() {
        let c = Tensor4::isotropic(3.0, 2.0);
        let (s, co) = (0.3_f64.sin(), 0.3_f64.cos());
        let r = Tensor2::new(co, -s, 0.0, s, co, 0.0, 0.0, 0.0, 1.0);
        let d = c.rotated(&r) - c;
        assert!(d.max_abs() < 1e-14);
        assert!(c.minor_symmetry_defect() == 0.0);
    }
}
