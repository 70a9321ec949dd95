//! Brute-force expectations and Monte Carlo error, for checking estimators.

use crate::dlap::{mechanism, pmf_unchecked, tail_mass};
use crate::generic::{LatticeFn, TableFunction};
use crate::numeric::KahanSum;
use crate::rng::{map_streams, Parallelism};
use crate::{Error, PrivacyParams, Result};

/// Largest dimension accepted by [`exact_expectation`].
pub const EXACT_MAX_DIM: usize = 6;
/// Largest truncation radius tried by [`bounded_expectation`].
pub const MAX_RADIUS: u64 = 200;
/// Largest number of lattice points [`bounded_expectation`] will visit.
pub const MAX_POINTS: u128 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationReport {
    pub expectation: f64,
    /// `f(x)`.
    pub target: f64,
    /// `|expectation - target|`.
    pub gap: f64,
    /// `ℓ∞` radius around `x` that was summed; 0 for the exact path.
    pub radius: u64,
    /// Bound on the neglected mass of the sum; 0 when the sum is exact.
    pub tail_bound: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("p must lie in (0, 1), got {p}")))
    }
}

/// Visits every point of the integer box `[lo, hi]`, first coordinate
/// fastest.
fn for_each_point(
    lo: &[i64],
    hi: &[i64],
    mut visit: impl FnMut(&[i64]) -> Result<()>,
) -> Result<()> {
    let mut y = lo.to_vec();
    loop {
        visit(&y)?;
        let mut j = 0;
        loop {
            if j == y.len() {
                return Ok(());
            }
            if y[j] < hi[j] {
                y[j] += 1;
                break;
            }
            y[j] = lo[j];
            j += 1;
        }
    }
}

fn weighted_sum(g: &impl LatticeFn, x: &[i64], p: f64, lo: &[i64], hi: &[i64]) -> Result<f64> {
    let mut acc = KahanSum::new();
    for_each_point(lo, hi, |y| {
        let v = g.eval(y)?;
        if v != 0.0 {
            let w: f64 = y
                .iter()
                .zip(x)
                .map(|(&a, &b)| pmf_unchecked(p, a - b))
                .product();
            acc.add(w * v);
        }
        Ok(())
    })?;
    Ok(acc.value())
}

/// `E[g(x + η)]` computed exactly for `g` derived from a finitely supported
/// table `f`.
///
/// The unbiased estimator of `f` vanishes outside the table box dilated by one
/// in every direction, so the infinite sum is a finite one. Pass `f` itself as
/// `g` to measure the bias of the naive estimate.
pub fn exact_expectation(
    f: &TableFunction,
    g: &impl LatticeFn,
    x: &[i64],
    p: f64,
) -> Result<ExpectationReport> {
    check_p(p)?;
    if !f.has_finite_support() {
        return Err(Error::Precondition(
            "function is not finitely supported; use bounded_expectation with a sup-norm bound"
                .into(),
        ));
    }
    if x.len() != f.arity() {
        return Err(Error::structure(format!(
            "table has arity {} but x has {} coordinates",
            f.arity(),
            x.len()
        )));
    }
    if f.arity() > EXACT_MAX_DIM {
        return Err(Error::Precondition(format!(
            "exact expectation supports at most {EXACT_MAX_DIM} coordinates, got {}",
            f.arity()
        )));
    }
    let (lo, hi) = f.support_box();
    let lo: Vec<i64> = lo.iter().map(|v| v - 1).collect();
    let hi: Vec<i64> = hi.iter().map(|v| v + 1).collect();
    let expectation = weighted_sum(g, x, p, &lo, &hi)?;
    let target = f.value(x);
    Ok(ExpectationReport {
        expectation,
        target,
        gap: (expectation - target).abs(),
        radius: 0,
        tail_bound: 0.0,
    })
}

/// Smallest `R ≤ MAX_RADIUS` with `n·M·P(|η| > R) < tol`.
pub fn truncation_radius(n: usize, bound: f64, p: f64, tol: f64) -> Result<u64> {
    check_p(p)?;
    if !(tol > 0.0) || !(bound >= 0.0) || !bound.is_finite() {
        return Err(Error::domain(format!(
            "need tol > 0 and a finite bound >= 0, got tol={tol}, bound={bound}"
        )));
    }
    (0..=MAX_RADIUS)
        .find(|&r| n as f64 * bound * tail_mass(p, r) < tol)
        .ok_or_else(|| {
            Error::ResourceLimit(format!(
                "tolerance {tol} needs a truncation radius above {MAX_RADIUS} at p={p}"
            ))
        })
}

/// `E[g(x + η)]` truncated to the `ℓ∞` ball around `x` whose complement has
/// probability small enough that `|g| ≤ bound` contributes less than `tol`.
pub fn bounded_expectation(
    f: &impl LatticeFn,
    g: &impl LatticeFn,
    bound: f64,
    x: &[i64],
    p: f64,
    tol: f64,
) -> Result<ExpectationReport> {
    let n = x.len();
    let radius = truncation_radius(n, bound, p, tol)?;
    let points = (2 * radius as u128 + 1)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if points > MAX_POINTS {
        return Err(Error::ResourceLimit(format!(
            "radius {radius} in {n} dimensions needs {points} evaluations"
        )));
    }
    let r = radius as i64;
    let lo: Vec<i64> = x.iter().map(|v| v - r).collect();
    let hi: Vec<i64> = x.iter().map(|v| v + r).collect();
    let expectation = weighted_sum(g, x, p, &lo, &hi)?;
    let target = f.eval(x)?;
    Ok(ExpectationReport {
        expectation,
        target,
        gap: (expectation - target).abs(),
        radius,
        tail_bound: n as f64 * bound * tail_mass(p, radius),
    })
}

/// Minimum number of trials accepted by [`empirical_mse`].
pub const MIN_TRIALS: u64 = 100;

/// Monte Carlo estimate of `E[(estimator(x + η) - target)²]` and its standard
/// error. Trial `i` uses stream `i` of `seed`.
pub fn empirical_mse<E>(
    estimator: E,
    target: f64,
    x: &[i64],
    params: &PrivacyParams,
    trials: u64,
    seed: u64,
    parallelism: Parallelism,
) -> Result<(f64, f64)>
where
    E: Fn(&[i64]) -> f64 + Sync + Send,
{
    if trials < MIN_TRIALS {
        return Err(Error::domain(format!(
            "empirical MSE needs at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    if x.is_empty() {
        return Err(Error::Input("x must be non-empty".into()));
    }
    let errors = map_streams(seed, trials, parallelism, |_, rng| {
        let noisy = mechanism(x, params, rng).expect("x is non-empty");
        let e = estimator(noisy.values()) - target;
        e * e
    });
    Ok(mean_and_se(&errors))
}

/// Sample mean and its standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().copied().sum::<KahanSum>().value() / n;
    let var = values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<KahanSum>()
        .value()
        / (n - 1.0);
    (mean, (var / n).sqrt())
}
