//! The universal unbiased estimator.
//!
//! For `f: ℤⁿ → ℝ` the estimator is
//!
//! ```text
//! g(y) = Σ_{ξ ∈ {-1,0,1}ⁿ} f(y + ξ) · Π_j α_{ξ_j}
//! ```
//!
//! with the weights of [`DebiasCoefficients`]. For `n = 1` this is
//! `f(y) - c·(f(y+1) - 2f(y) + f(y-1))`. Whenever `E|f(x + η)|` is finite,
//! `E[g(x + η)] = f(x)`; when it is not, `g` is still a well-defined finite
//! sum but its unbiasedness is vacuous.

use std::fmt;

use crate::numeric::KahanSum;
use crate::{DebiasCoefficients, Error, Result};

/// A real-valued function on the integer lattice.
pub trait LatticeFn {
    fn eval(&self, y: &[i64]) -> Result<f64>;
}

impl<F> LatticeFn for F
where
    F: Fn(&[i64]) -> f64,
{
    fn eval(&self, y: &[i64]) -> Result<f64> {
        Ok(self(y))
    }
}

/// A function stored as a dense table over an integer box, constant outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TableFunction {
    base_point: Vec<i64>,
    shape: Vec<usize>,
    values: Vec<f64>,
    outside_value: f64,
}

impl TableFunction {
    /// `values` is laid out with the first coordinate varying fastest over the
    /// box `base_point + [0, shape_0) × ⋯ × [0, shape_{n-1})`.
    pub fn new(
        base_point: Vec<i64>,
        shape: Vec<usize>,
        values: Vec<f64>,
        outside_value: f64,
    ) -> Result<Self> {
        if base_point.len() != shape.len() {
            return Err(Error::structure(format!(
                "base point has {} coordinates but shape has {}",
                base_point.len(),
                shape.len()
            )));
        }
        if shape.contains(&0) {
            return Err(Error::structure("table box must be non-empty"));
        }
        let len: usize = shape.iter().product();
        if values.len() != len {
            return Err(Error::structure(format!(
                "table box holds {len} cells but {} values were given",
                values.len()
            )));
        }
        Ok(TableFunction {
            base_point,
            shape,
            values,
            outside_value,
        })
    }

    /// A finitely supported table: zero outside the box.
    pub fn finite_support(
        base_point: Vec<i64>,
        shape: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        Self::new(base_point, shape, values, 0.0)
    }

    pub fn arity(&self) -> usize {
        self.shape.len()
    }

    pub fn has_finite_support(&self) -> bool {
        self.outside_value == 0.0
    }

    pub fn outside_value(&self) -> f64 {
        self.outside_value
    }

    /// Inclusive lower and upper corners of the table box.
    pub fn support_box(&self) -> (Vec<i64>, Vec<i64>) {
        let hi = self
            .base_point
            .iter()
            .zip(&self.shape)
            .map(|(&b, &s)| b + s as i64 - 1)
            .collect();
        (self.base_point.clone(), hi)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, y: &[i64]) -> f64 {
        debug_assert_eq!(y.len(), self.arity());
        let mut index = 0usize;
        let mut stride = 1usize;
        for ((&yj, &bj), &sj) in y.iter().zip(&self.base_point).zip(&self.shape) {
            let off = yj - bj;
            if off < 0 || off >= sj as i64 {
                return self.outside_value;
            }
            index += off as usize * stride;
            stride *= sj;
        }
        self.values[index]
    }
}

impl LatticeFn for TableFunction {
    fn eval(&self, y: &[i64]) -> Result<f64> {
        if y.len() != self.arity() {
            return Err(Error::structure(format!(
                "table function has arity {} but was evaluated at a point of dimension {}",
                self.arity(),
                y.len()
            )));
        }
        Ok(self.value(y))
    }
}

/// An increasing envelope `r` with `|f(y)| ≤ r(‖y‖₁)`.
pub enum GrowthEnvelope {
    /// `r(k) = k^degree`.
    Polynomial { degree: f64 },
    /// `r(k) = base^k`.
    Exponential { base: f64 },
    /// An arbitrary envelope given through `k ↦ ln r(k)`.
    Log(Box<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for GrowthEnvelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthEnvelope::Polynomial { degree } => write!(f, "Polynomial(k^{degree})"),
            GrowthEnvelope::Exponential { base } => write!(f, "Exponential({base}^k)"),
            GrowthEnvelope::Log(_) => f.write_str("Log(<fn>)"),
        }
    }
}

type Evaluator = Box<dyn Fn(&[i64]) -> Result<f64> + Send + Sync>;

/// A function given by an evaluation procedure, optionally with a growth
/// envelope used by [`check_expectation_exists`].
pub struct CallbackFunction {
    arity: usize,
    eval: Evaluator,
    growth: Option<GrowthEnvelope>,
}

impl fmt::Debug for CallbackFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CallbackFunction")
            .field("arity", &self.arity)
            .field("growth", &self.growth)
            .finish_non_exhaustive()
    }
}

impl CallbackFunction {
    pub fn new<F>(arity: usize, eval: F) -> Self
    where
        F: Fn(&[i64]) -> Result<f64> + Send + Sync + 'static,
    {
        CallbackFunction {
            arity,
            eval: Box::new(eval),
            growth: None,
        }
    }

    pub fn with_growth(mut self, growth: GrowthEnvelope) -> Self {
        self.growth = Some(growth);
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn growth(&self) -> Option<&GrowthEnvelope> {
        self.growth.as_ref()
    }
}

impl LatticeFn for CallbackFunction {
    fn eval(&self, y: &[i64]) -> Result<f64> {
        if y.len() != self.arity {
            return Err(Error::structure(format!(
                "callback has arity {} but was evaluated at a point of dimension {}",
                self.arity,
                y.len()
            )));
        }
        (self.eval)(y)
    }
}

/// Univariate estimator `f(y) - c·(f(y+1) - 2f(y) + f(y-1))`.
pub fn debias_univariate<F>(f: F, coeffs: &DebiasCoefficients, y: i64) -> f64
where
    F: Fn(i64) -> f64,
{
    let centre = f(y);
    centre - coeffs.c() * (f(y + 1) - 2.0 * centre + f(y - 1))
}

/// [`debias_univariate`] for fallible `f`; the first failure is returned.
pub fn try_debias_univariate<F, E>(f: F, coeffs: &DebiasCoefficients, y: i64) -> Result<f64, E>
where
    F: Fn(i64) -> Result<f64, E>,
{
    let centre = f(y)?;
    let up = f(y + 1)?;
    let down = f(y - 1)?;
    Ok(centre - coeffs.c() * (up - 2.0 * centre + down))
}

/// Dimension limits for the `3ⁿ` enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenericOptions {
    /// Larger dimensions are rejected with [`Error::ResourceLimit`].
    pub max_dim: usize,
    /// A warning is logged above this dimension.
    pub warn_dim: usize,
}

impl Default for GenericOptions {
    fn default() -> Self {
        GenericOptions {
            max_dim: 20,
            warn_dim: 12,
        }
    }
}

/// The multivariate estimator, summing all `3ⁿ` terms.
pub fn debias_multivariate<F>(f: &F, coeffs: &DebiasCoefficients, y: &[i64]) -> Result<f64>
where
    F: LatticeFn + ?Sized,
{
    debias_multivariate_with(f, coeffs, y, GenericOptions::default())
}

pub fn debias_multivariate_with<F>(
    f: &F,
    coeffs: &DebiasCoefficients,
    y: &[i64],
    options: GenericOptions,
) -> Result<f64>
where
    F: LatticeFn + ?Sized,
{
    let n = y.len();
    if n > options.max_dim {
        return Err(Error::ResourceLimit(format!(
            "generic estimator needs 3^{n} evaluations; dimension cap is {}",
            options.max_dim
        )));
    }
    if n > options.warn_dim {
        log::warn!("generic estimator in dimension {n} evaluates 3^{n} points");
    }
    if n == 1 {
        // Same value as the enumeration, computed as a second difference so
        // that both entry points agree bit for bit.
        return try_debias_univariate(|v| f.eval(&[v]), coeffs, y[0]);
    }
    // weights[k]: weight of any ξ with exactly k non-zero entries.
    let weights: Vec<f64> = (0..=n)
        .map(|k| coeffs.alpha_zero().powi((n - k) as i32) * coeffs.alpha_one().powi(k as i32))
        .collect();

    // Odometer over ξ, first coordinate fastest, each digit running -1, 0, 1.
    let mut xi = vec![-1i8; n];
    let mut point: Vec<i64> = y.iter().map(|v| v - 1).collect();
    let mut nonzero = n;
    let mut acc = KahanSum::new();
    loop {
        acc.add(f.eval(&point)? * weights[nonzero]);
        let mut j = 0;
        loop {
            if j == n {
                return Ok(acc.value());
            }
            if xi[j] < 1 {
                xi[j] += 1;
                point[j] += 1;
                if xi[j] == 0 {
                    nonzero -= 1;
                } else {
                    nonzero += 1;
                }
                break;
            }
            xi[j] = -1;
            point[j] -= 2;
            j += 1;
        }
    }
}

/// Scalar factor `A(γ)` of the exponential family `f_γ(y) = γ^(Σ y_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFamilyFactor {
    /// `A(γ) = 1 - c·(1-γ)²/γ`; the unbiased estimate of `γ^(Σx)` is
    /// `A(γ)ⁿ · γ^(Σỹ)`.
    pub value: f64,
    /// Whether `√p < |γ| < 1/√p`, in which case both estimators have finite
    /// variance and `Var g = A(γ)^(2n) Var f`.
    pub finite_variance: bool,
}

impl ExpFamilyFactor {
    /// The unbiased estimate of `γ^(Σx)` from a release `y`.
    pub fn estimate(&self, gamma: f64, y: &[i64]) -> f64 {
        let s: i64 = y.iter().sum();
        self.value.powi(y.len() as i32) * gamma.powf(s as f64)
    }
}

pub fn exp_family_factor(gamma: f64, p: f64) -> Result<ExpFamilyFactor> {
    let coeffs = DebiasCoefficients::new(p)?;
    let g = gamma.abs();
    if !(gamma.is_finite() && g > p && g < 1.0 / p) {
        return Err(Error::domain(format!(
            "gamma = {gamma} outside the convergence region (-{hi}, -{p}) ∪ ({p}, {hi}) for p = {p}",
            hi = 1.0 / p
        )));
    }
    let sqrt_p = p.sqrt();
    let one_minus = 1.0 - gamma;
    Ok(ExpFamilyFactor {
        value: 1.0 - coeffs.c() * one_minus * one_minus / gamma,
        finite_variance: g > sqrt_p && g < 1.0 / sqrt_p,
    })
}

/// `(3·((1+p²)² + 2p)/(1-p)⁴)ⁿ`: the MSE of the unbiased estimator is at most
/// this factor times the MSE of the naive one.
pub fn mse_bound_factor(p: f64, n: u32) -> Result<f64> {
    DebiasCoefficients::new(p)?;
    let one = 1.0 + p * p;
    let q = 1.0 - p;
    let base = 3.0 * (one * one + 2.0 * p) / (q * q * q * q);
    Ok(base.powi(n as i32))
}

/// Outcome of the advisory expectation-existence check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExistenceStatus {
    /// The envelope satisfies `r(k) p^(k/4) → 0`, so `E f(x + η)` is finite.
    Exists,
    /// The envelope does not decay; existence is not established.
    NotEstablished,
    /// No growth envelope was supplied.
    Indeterminate,
}

impl ExistenceStatus {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            ExistenceStatus::Exists => Some(true),
            ExistenceStatus::NotEstablished => Some(false),
            ExistenceStatus::Indeterminate => None,
        }
    }
}

/// Checks the growth condition `r(k)·p^(k/4) → 0` for the envelope attached
/// to `f`.
///
/// Polynomial and exponential envelopes are decided in closed form. A custom
/// envelope passes when `ln r(k) + (k/4) ln p` decreases strictly along
/// `k = 4096·2^j` and ends below `ln 10⁻¹⁶`; probing starts at the latest
/// point `k₀ ∈ {64, 128, …, 4096}` from which the sequence is monotone.
pub fn check_expectation_exists(f: &CallbackFunction, p: f64) -> Result<ExistenceStatus> {
    DebiasCoefficients::new(p)?;
    let ln_p = p.ln();
    let Some(growth) = f.growth() else {
        return Ok(ExistenceStatus::Indeterminate);
    };
    let exists = match growth {
        GrowthEnvelope::Polynomial { .. } => true,
        GrowthEnvelope::Exponential { base } => base.ln() + ln_p / 4.0 < 0.0,
        GrowthEnvelope::Log(ln_r) => {
            let ln_h = |k: f64| ln_r(k) + k * ln_p / 4.0;
            let probes: Vec<f64> = (0..=24).map(|j| 64.0 * 2f64.powi(j)).collect();
            let values: Vec<f64> = probes.iter().map(|&k| ln_h(k)).collect();
            let last = *values.last().expect("non-empty probe grid");
            // Index of 4096 in the grid is 6; a start at or before it must work.
            let decreasing_from = |start: usize| values[start..].windows(2).all(|w| w[1] < w[0]);
            last < (1e-16f64).ln() && (0..=6).any(decreasing_from)
        }
    };
    Ok(if exists {
        ExistenceStatus::Exists
    } else {
        ExistenceStatus::NotEstablished
    })
}
