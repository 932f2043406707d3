//! The two material-evaluation contracts and the bridge's state layout.
//!
//! A *UMAT-style* material receives increments (`dstran`, `dfgrd0 → dfgrd1`),
//! the Cauchy stress at increment start and its own state, and returns the
//! updated Cauchy stress, state and the Jaumann-rate tangent `DDSDDE` in
//! [`UmatOrder`](crate::voigt::UmatOrder).
//!
//! A *host-style* evaluation receives total quantities (small-strain tensor
//! or the deformation gradients) and expects the stress the host works with
//! (second Piola–Kirchhoff at finite strain) plus `dS/dE` or `dS/dF`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Matrix6, Matrix9, Tensor2};
use crate::voigt::{HostStrain, HostStress, UmatStrain, UmatStress};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    SmallStrain,
    FiniteStrain,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::SmallStrain => "small-strain",
            Regime::FiniteStrain => "finite-strain",
        })
    }
}

/// Inputs of one UMAT-style evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct UmatCall {
    /// Cauchy stress at increment start.
    pub stress_in: UmatStress,
    /// User state variables only (the bridge header is stripped).
    pub statev_in: Vec<f64>,
    pub stran: UmatStrain,
    pub dstran: UmatStrain,
    /// Pseudo-time at increment start.
    pub time: f64,
    pub dtime: f64,
    pub props: Vec<f64>,
    pub dfgrd0: Tensor2,
    pub dfgrd1: Tensor2,
    pub drot: Tensor2,
}

impl UmatCall {
    /// A small-strain call from zero stress and strain.
    pub fn small_strain(dstran: UmatStrain, props: Vec<f64>, statev_in: Vec<f64>) -> Self {
        Self {
            stress_in: UmatStress::zeros(),
            statev_in,
            stran: UmatStrain::zeros(),
            dstran,
            time: 0.0,
            dtime: 1.0,
            props,
            dfgrd0: Tensor2::identity(),
            dfgrd1: Tensor2::identity(),
            drot: Tensor2::identity(),
        }
    }

    /// A finite-strain call from an undeformed, stress-free start.
    pub fn finite_strain(dfgrd1: Tensor2, props: Vec<f64>, statev_in: Vec<f64>) -> Self {
        Self {
            dfgrd1,
            ..Self::small_strain(UmatStrain::zeros(), props, statev_in)
        }
    }
}

/// Outputs of one UMAT-style evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct UmatResult {
    pub stress_out: UmatStress,
    pub statev_out: Vec<f64>,
    /// Jaumann-rate tangent, UMAT order, engineering-shear columns.
    pub ddsdde: Matrix6,
}

impl UmatResult {
    pub fn is_finite(&self) -> bool {
        self.stress_out.is_finite()
            && self.ddsdde.iter().all(|v| v.is_finite())
            && self.statev_out.iter().all(|v| v.is_finite())
    }
}

/// Kinematic input of a host-style request.
#[derive(Clone, Debug, PartialEq)]
pub enum Kinematics {
    /// Total small-strain tensor, host order, tensorial shears.
    SmallStrain { strain_total: HostStrain },
    /// Deformation gradients at the start and end of the increment.
    FiniteStrain { f_old: Tensor2, f_new: Tensor2 },
}

impl Kinematics {
    pub fn regime(&self) -> Regime {
        match self {
            Kinematics::SmallStrain { .. } => Regime::SmallStrain,
            Kinematics::FiniteStrain { .. } => Regime::FiniteStrain,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HostRequest {
    pub kinematics: Kinematics,
    pub par: Vec<f64>,
    /// Time increment.
    pub delta: f64,
    /// Full bridge state (header + user slots).
    pub state_in: Vec<f64>,
}

/// Host tangent: `dS/dE` (6×6, host order, columns taken per engineering
/// shear strain) or `dS/dF` (9×9 over row-major index pairs).
#[derive(Clone, Debug, PartialEq)]
pub enum HostTangent {
    Small(Matrix6),
    Finite(Matrix9),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HostResponse {
    /// Second Piola–Kirchhoff stress (finite strain) or small-strain stress.
    pub s: HostStress,
    pub tangent: HostTangent,
    pub state_out: Vec<f64>,
}

impl HostResponse {
    pub fn small_tangent(&self) -> Option<&Matrix6> {
        match &self.tangent {
            HostTangent::Small(d) => Some(d),
            HostTangent::Finite(_) => None,
        }
    }

    pub fn finite_tangent(&self) -> Option<&Matrix9> {
        match &self.tangent {
            HostTangent::Finite(k) => Some(k),
            HostTangent::Small(_) => None,
        }
    }
}

/// A UMAT-style constitutive model.
///
/// Implementations must be pure functions of the call: the bridge relies on
/// repeated evaluation with identical input giving identical output.
pub trait Material: Send + Sync {
    fn name(&self) -> &str;
    fn regime(&self) -> Regime;
    fn nstatv_user(&self) -> usize;
    /// Property vector passed as `PROPS`.
    fn props(&self) -> &[f64];
    /// Initial user state (zeros unless the model needs otherwise).
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0; self.nstatv_user()]
    }
    fn evaluate(&self, call: &UmatCall) -> Result<UmatResult>;
}

/// Registry metadata of a material model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterialInfo {
    pub name: String,
    pub nprops: usize,
    pub nstatv_user: usize,
    pub regime: Regime,
}

/// Slot layout of the state vector the host stores per integration point.
///
/// | slot   | small strain          | finite strain                   |
/// |--------|-----------------------|---------------------------------|
/// | 0      | pseudo-time           | pseudo-time                     |
/// | 1–6    | stress (UMAT order)   | Cauchy stress at increment start|
/// | 7–12   | total strain (UMAT)   | user state …                    |
/// | 13…    | user state …          |                                 |
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateLayout {
    pub regime: Regime,
    pub nstatv_user: usize,
}

/// Contents of a bridge state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeState {
    pub time: f64,
    pub stress: UmatStress,
    /// Present for the small-strain layout only.
    pub stran: Option<UmatStrain>,
    pub user: Vec<f64>,
}

impl StateLayout {
    pub fn new(regime: Regime, nstatv_user: usize) -> Self {
        Self {
            regime,
            nstatv_user,
        }
    }

    pub fn for_material(m: &dyn Material) -> Self {
        Self::new(m.regime(), m.nstatv_user())
    }

    pub fn header_len(&self) -> usize {
        match self.regime {
            Regime::SmallStrain => 13,
            Regime::FiniteStrain => 7,
        }
    }

    pub fn total_len(&self) -> usize {
        self.header_len() + self.nstatv_user
    }

    /// Fresh state: zero time, stress and strain, followed by `user`.
    pub fn initial(&self, user: &[f64]) -> Result<Vec<f64>> {
        let stran = match self.regime {
            Regime::SmallStrain => Some(UmatStrain::zeros()),
            Regime::FiniteStrain => None,
        };
        self.pack(&BridgeState {
            time: 0.0,
            stress: UmatStress::zeros(),
            stran,
            user: user.to_vec(),
        })
    }

    pub fn pack(&self, s: &BridgeState) -> Result<Vec<f64>> {
        if s.user.len() != self.nstatv_user {
            return Err(Error::contract(format!(
                "expected {} user state slots, got {}",
                self.nstatv_user,
                s.user.len()
            )));
        }
        let mut out = Vec::with_capacity(self.total_len());
        out.push(s.time);
        out.extend_from_slice(s.stress.components());
        match (self.regime, &s.stran) {
            (Regime::SmallStrain, Some(e)) => out.extend_from_slice(e.components()),
            (Regime::FiniteStrain, None) => {}
            (Regime::SmallStrain, None) => {
                return Err(Error::contract("small-strain state needs a total strain"))
            }
            (Regime::FiniteStrain, Some(_)) => {
                return Err(Error::contract("finite-strain state stores no total strain"))
            }
        }
        out.extend_from_slice(&s.user);
        Ok(out)
    }

    pub fn unpack(&self, state: &[f64]) -> Result<BridgeState> {
        if state.len() != self.total_len() {
            return Err(Error::contract(format!(
                "state vector has {} slots, layout needs {}",
                state.len(),
                self.total_len()
            )));
        }
        let stran = match self.regime {
            Regime::SmallStrain => Some(UmatStrain::from_slice(&state[7..13])),
            Regime::FiniteStrain => None,
        };
        Ok(BridgeState {
            time: state[0],
            stress: UmatStress::from_slice(&state[1..7]),
            stran,
            user: state[self.header_len()..].to_vec(),
        })
    }
}

/// Free-function form of [`StateLayout::pack`].
pub fn pack_state(
    layout: &StateLayout,
    time: f64,
    stress: UmatStress,
    stran: Option<UmatStrain>,
    user: &[f64],
) -> Result<Vec<f64>> {
    layout.pack(&BridgeState {
        time,
        stress,
        stran,
        user: user.to_vec(),
    })
}

pub fn unpack_state(layout: &StateLayout, state: &[f64]) -> Result<BridgeState> {
    layout.unpack(state)
}
