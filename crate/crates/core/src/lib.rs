//! Unbiased post-processing for data released under the discrete Laplace
//! mechanism.
//!
//! A vector `x` is released as `x + η` where every `η_i` is drawn independently
//! from the discrete Laplace distribution `DLap(p)`. For any function `f` of
//! the data, [`generic::debias_multivariate`] turns the naive plug-in estimate
//! `f(x + η)` into an estimate whose expectation is exactly `f(x)`. The
//! [`fast`] module computes the same estimator in polynomial time for order
//! statistics, decision trees, entropy, KL divergence and polynomials, and
//! [`transform`] re-noises a discrete release into an exact continuous
//! Laplace or Staircase release.
//!
//! ```
//! use dlap_debias::{DebiasCoefficients, generic::debias_univariate};
//!
//! let coeffs = DebiasCoefficients::new(0.5).unwrap();
//! // E[ỹ²] = x² + Var(η); the estimator subtracts exactly that variance.
//! let g = debias_univariate(|y| (y * y) as f64, &coeffs, 7);
//! assert_eq!(g, 49.0 - 4.0);
//! ```

pub mod dlap;
mod error;
pub mod experiments;
pub mod fast;
pub mod generic;
pub mod numeric;
pub mod oracle;
pub mod rng;
pub mod transform;

pub use dlap::{pmf, DebiasCoefficients, NoisyVector, PrivacyParams};
pub use error::{Error, Result};
