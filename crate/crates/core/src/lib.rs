//! Constitutive-model interoperability kernel.
//!
//! Materials written against the incremental UMAT convention (engineering
//! shear, Cauchy stress, Jaumann-rate tangent) are evaluated for a host that
//! speaks total quantities (tensorial shear, second Piola–Kirchhoff stress,
//! `dS/dF` tangent). [`bridge::eval`] performs the full transfer.
//!
//! ```
//! use constikit::{bridge, materials, HostRequest, Kinematics, StateLayout, Tensor2};
//!
//! let m = materials::builtin("neo-hookean", &[1e6, 0.3]).unwrap();
//! let layout = StateLayout::for_material(m.as_ref());
//! let req = HostRequest {
//!     kinematics: Kinematics::FiniteStrain {
//!         f_old: Tensor2::identity(),
//!         f_new: Tensor2::identity() * 1.1,
//!     },
//!     par: m.props().to_vec(),
//!     delta: 1.0,
//!     state_in: layout.initial(&m.initial_state()).unwrap(),
//! };
//! let res = bridge::eval(&req, m.as_ref()).unwrap();
//! assert!(res.s[0] > 0.0);
//! ```

pub mod bridge;
pub mod error;
pub mod material_api;
pub mod materials;
pub mod plugin;
pub mod polar;
pub mod tensor;
pub mod voigt;

pub use error::{Error, Result};
pub use material_api::{
    pack_state, unpack_state, BridgeState, HostRequest, HostResponse, HostTangent, Kinematics,
    Material, MaterialInfo, Regime, StateLayout, UmatCall, UmatResult,
};
pub use tensor::{Matrix6, Matrix9, Tensor2, Tensor4};
pub use voigt::{HostOrder, HostStrain, HostStress, UmatOrder, UmatStrain, UmatStress, Voigt};
