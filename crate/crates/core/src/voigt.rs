//! Voigt packing of symmetric tensors under the two component orderings.
//!
//! | slot | [`HostOrder`] | [`UmatOrder`] |
//! |------|---------------|---------------|
//! | 1–3  | xx, yy, zz    | xx, yy, zz    |
//! | 4    | yz            | xy            |
//! | 5    | xz            | xz            |
//! | 6    | xy            | yz            |
//!
//! Host-order strains store tensorial shear components; UMAT-order strains
//! store engineering shears `γ = 2ε`. Stresses never carry a factor.
//!
//! The ordering and the physical kind are phantom type parameters, so mixing
//! a host-order strain with a UMAT-order stress does not compile.

use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::Vector6;

use crate::tensor::{Matrix6, Tensor2, Tensor4};

mod sealed {
    pub trait Sealed {}
}

/// Component ordering of a Voigt vector.
pub trait Convention: sealed::Sealed + Copy + fmt::Debug + Send + Sync + 'static {
    /// Tensor indices `(i, j)` stored in each slot.
    const SLOTS: [(usize, usize); 6];
    /// Multiplier applied to shear slots of a strain vector.
    const STRAIN_SHEAR_FACTOR: f64;
}

/// Physical kind of the packed tensor.
pub trait Kind: sealed::Sealed + Copy + fmt::Debug + Send + Sync + 'static {
    const IS_STRAIN: bool;
}

/// Host ordering `(xx, yy, zz, yz, xz, xy)`, tensorial shear strains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HostOrder;

/// UMAT ordering `(xx, yy, zz, xy, xz, yz)`, engineering shear strains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UmatOrder;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stress;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Strain;

impl sealed::Sealed for HostOrder {}
impl sealed::Sealed for UmatOrder {}
impl sealed::Sealed for Stress {}
impl sealed::Sealed for Strain {}

impl Convention for HostOrder {
    const SLOTS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
    const STRAIN_SHEAR_FACTOR: f64 = 1.0;
}

impl Convention for UmatOrder {
    const SLOTS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
    const STRAIN_SHEAR_FACTOR: f64 = 2.0;
}

impl Kind for Stress {
    const IS_STRAIN: bool = false;
}

impl Kind for Strain {
    const IS_STRAIN: bool = true;
}

/// Six Voigt components tagged with ordering `C` and kind `K`.
pub struct Voigt<C: Convention, K: Kind> {
    components: [f64; 6],
    _tag: PhantomData<(C, K)>,
}

pub type HostStress = Voigt<HostOrder, Stress>;
pub type HostStrain = Voigt<HostOrder, Strain>;
pub type UmatStress = Voigt<UmatOrder, Stress>;
pub type UmatStrain = Voigt<UmatOrder, Strain>;

impl<C: Convention, K: Kind> Clone for Voigt<C, K> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<C: Convention, K: Kind> Copy for Voigt<C, K> {}

impl<C: Convention, K: Kind> PartialEq for Voigt<C, K> {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components
    }
}

impl<C: Convention, K: Kind> fmt::Debug for Voigt<C, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Voigt<{:?}, {:?}>{:?}", C::SLOTS[3], K::IS_STRAIN, self.components)
    }
}

impl<C: Convention, K: Kind> Default for Voigt<C, K> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<C: Convention, K: Kind> Voigt<C, K> {
    pub const fn new(components: [f64; 6]) -> Self {
        Self {
            components,
            _tag: PhantomData,
        }
    }

    pub const fn zeros() -> Self {
        Self::new([0.0; 6])
    }

    pub fn from_slice(s: &[f64]) -> Self {
        let mut c = [0.0; 6];
        c.copy_from_slice(&s[..6]);
        Self::new(c)
    }

    pub fn components(&self) -> &[f64; 6] {
        &self.components
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::from_column_slice(&self.components)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self::from_slice(v.as_slice())
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Unpacks into a symmetric tensor, undoing any engineering-shear factor.
    pub fn to_tensor(&self) -> Tensor2 {
        let mut t = Tensor2::zeros();
        for (slot, &(i, j)) in C::SLOTS.iter().enumerate() {
            let mut v = self.components[slot];
            if K::IS_STRAIN && i != j {
                v /= C::STRAIN_SHEAR_FACTOR;
            }
            t[(i, j)] = v;
            t[(j, i)] = v;
        }
        t
    }

    /// Packs the symmetric part of `t`.
    pub fn from_tensor(t: &Tensor2) -> Self {
        let mut c = [0.0; 6];
        for (slot, &(i, j)) in C::SLOTS.iter().enumerate() {
            let mut v = 0.5 * (t[(i, j)] + t[(j, i)]);
            if K::IS_STRAIN && i != j {
                v *= C::STRAIN_SHEAR_FACTOR;
            }
            c[slot] = v;
        }
        Self::new(c)
    }
}

impl<C: Convention, K: Kind> Index<usize> for Voigt<C, K> {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.components[i]
    }
}

impl<C: Convention, K: Kind> Add for Voigt<C, K> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(std::array::from_fn(|i| self.components[i] + rhs.components[i]))
    }
}

impl<C: Convention, K: Kind> Sub for Voigt<C, K> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(std::array::from_fn(|i| self.components[i] - rhs.components[i]))
    }
}

impl<C: Convention, K: Kind> Neg for Voigt<C, K> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.components.map(|c| -c))
    }
}

impl<C: Convention, K: Kind> Mul<f64> for Voigt<C, K> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.components.map(|c| c * rhs))
    }
}

/// Swaps slots 4 and 6; the permutation between the two orderings is an involution.
const SWAP: [usize; 6] = [0, 1, 2, 5, 4, 3];

/// Host-order tensorial strain to UMAT order with engineering shears.
pub fn reorder_strain_host_to_umat(v: &HostStrain) -> UmatStrain {
    let c = v.components();
    UmatStrain::new([c[0], c[1], c[2], 2.0 * c[5], 2.0 * c[4], 2.0 * c[3]])
}

pub fn reorder_strain_umat_to_host(v: &UmatStrain) -> HostStrain {
    let c = v.components();
    HostStrain::new([c[0], c[1], c[2], 0.5 * c[5], 0.5 * c[4], 0.5 * c[3]])
}

pub fn reorder_stress_umat_to_host(v: &UmatStress) -> HostStress {
    HostStress::new(SWAP.map(|s| v.components[s]))
}

pub fn reorder_stress_host_to_umat(v: &HostStress) -> UmatStress {
    UmatStress::new(SWAP.map(|s| v.components[s]))
}

/// Permutes rows and columns of a UMAT-order tangent into host order.
///
/// The result still maps engineering-shear strain increments to stress; only
/// the component positions change.
pub fn reorder_tangent_umat_to_host(m: &Matrix6) -> Matrix6 {
    Matrix6::from_fn(|r, c| m[(SWAP[r], SWAP[c])])
}

pub fn reorder_tangent_host_to_umat(m: &Matrix6) -> Matrix6 {
    reorder_tangent_umat_to_host(m)
}

/// Expands a UMAT-order `DDSDDE` into the minor-symmetric tensor `C_ijkl`.
///
/// Engineering shear columns make `D[a][b]` equal to `C_ijkl` for `(ij)` in
/// slot `a` and `(kl)` in slot `b`, without any factor.
pub fn tangent_tensor_from_umat(d: &Matrix6) -> Tensor4 {
    let slot = |i: usize, j: usize| {
        UmatOrder::SLOTS
            .iter()
            .position(|&(a, b)| (a, b) == (i, j) || (b, a) == (i, j))
            .unwrap()
    };
    Tensor4::from_fn(|i, j, k, l| d[(slot(i, j), slot(k, l))])
}

/// Packs the minor-symmetric part of `c` into a UMAT-order 6×6 matrix.
pub fn umat_tangent_from_tensor(c: &Tensor4) -> Matrix6 {
    let s = UmatOrder::SLOTS;
    Matrix6::from_fn(|a, b| {
        let (i, j) = s[a];
        let (k, l) = s[b];
        0.25 * (c[(i, j, k, l)] + c[(j, i, k, l)] + c[(i, j, l, k)] + c[(j, i, l, k)])
    })
}

/// Row-major flat layout of a 6×6 matrix, as a C-ordered host expects.
pub fn to_row_major(m: &Matrix6) -> [f64; 36] {
    std::array::from_fn(|n| m[(n / 6, n % 6)])
}

/// Column-major flat layout, as a Fortran-ordered `DDSDDE` is stored.
pub fn to_column_major(m: &Matrix6) -> [f64; 36] {
    std::array::from_fn(|n| m[(n % 6, n / 6)])
}

pub fn from_column_major(a: &[f64]) -> Matrix6 {
    Matrix6::from_column_slice(&a[..36])
}
