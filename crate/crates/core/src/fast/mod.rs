//! Polynomial-time evaluation of the unbiased estimator.
//!
//! The `3ⁿ`-term estimator only depends on `f` restricted to the cube
//! `y + {-1,0,1}ⁿ`. When `f` restricted to that cube is a short weighted sum
//! of indicator functions of regions whose α-weighted *volume* has a closed
//! form, the estimator collapses to `Σ c_i · vol(S_i)`. [`region`] provides
//! the region kinds and their volumes, the other modules build the region
//! lists for specific functions and evaluate them directly.

pub mod entropy;
pub mod order;
pub mod poly;
pub mod region;
pub mod tree;

pub use entropy::{debias_entropy, debias_kl, LogBase};
pub use order::{debias_max, debias_min, debias_order_stat};
pub use poly::{debias_binomial, debias_monomial, debias_polynomial, Monomial, Polynomial};
pub use region::{
    evaluate_decomposition, vol_layer, vol_rectangle, vol_symmetric, LayerSet, LayerVolumes,
    LocalDecomposition, Rectangle, Region, Sign, SymmetricSlice,
};
pub use tree::{debias_decision_tree, DecisionTree};
