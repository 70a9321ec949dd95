//! The guide in `book/` as doctests: every chapter is attached to a module so
//! that `cargo test` compiles and runs its listings.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/discrete-laplace.md")]
pub mod discrete_laplace {}
#[doc = include_str!("../../../book/src/generic.md")]
pub mod generic {}
#[doc = include_str!("../../../book/src/fast-estimators.md")]
pub mod fast_estimators {}
#[doc = include_str!("../../../book/src/noise-conversion.md")]
pub mod noise_conversion {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
