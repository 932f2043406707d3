//! The mdbook guide under `book/src`, compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/conventions.md")]
pub mod conventions {}

#[doc = include_str!("../../../book/src/bridge.md")]
pub mod bridge {}

#[doc = include_str!("../../../book/src/tangent.md")]
pub mod tangent {}

#[doc = include_str!("../../../book/src/polar.md")]
pub mod polar {}

#[doc = include_str!("../../../book/src/materials.md")]
pub mod materials {}

#[doc = include_str!("../../../book/src/plugins.md")]
pub mod plugins {}

#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}

#[doc = include_str!("../../../book/src/hydrogen.md")]
pub mod hydrogen {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
