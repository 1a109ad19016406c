//! Hypothesis tests for the displacement of squeezed Gaussian states.
//!
//! Two tests are implemented and cross-checked: the heterodyne–Hotelling test
//! (Hotelling's T² on heterodyne data, whose statistic follows a noncentral F
//! law) and the squeezing-invariant test (built from photon-number-conserving
//! operators, evaluated exactly through truncated Fock space and in closed
//! form where one exists).
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the stated tolerances assume.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod distributions;
pub mod error;
pub mod fock;
pub mod hypothesis;
pub mod level;
pub mod linalg;
pub mod phase_space;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type Complex64 = Cplx<f64>;
pub type SqueezeParam = phase_space::SqueezeParam<f64>;
pub type GaussianSpec = phase_space::GaussianSpec<f64>;
pub type PhaseSpaceMoments = phase_space::PhaseSpaceMoments<f64>;
pub type IntegerDistribution = distributions::IntegerDistribution<f64>;
pub type DiscreteLaw = distributions::DiscreteLaw<f64>;
pub type NoncentralFParams = distributions::NoncentralFParams<f64>;
pub type TruncatedOperator = fock::TruncatedOperator<f64>;
pub type TruncatedState = fock::TruncatedState<f64>;
pub type BlockOperator = fock::BlockOperator<f64>;
pub type TestSpec = hypothesis::TestSpec<f64>;
pub type ErrorCurve = curve::ErrorCurve<f64>;
