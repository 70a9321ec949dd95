//! Randomized self-check of the estimators against exact references.

use std::process::ExitCode;

use dlap_debias::fast::entropy::extended_entropy;
use dlap_debias::fast::{debias_entropy, debias_max, debias_min, debias_order_stat, LogBase};
use dlap_debias::generic::{debias_multivariate, TableFunction};
use dlap_debias::oracle::exact_expectation;
use dlap_debias::rng::stream_rng;
use dlap_debias::{Error, PrivacyParams};
use rand::Rng;

struct Check {
    name: &'static str,
    failures: u64,
    worst: f64,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            failures: 0,
            worst: 0.0,
        }
    }

    /// Records `|a - b|` measured in units of the allowed error.
    fn compare(&mut self, a: f64, b: f64, allowed: f64) {
        let ratio = (a - b).abs() / allowed;
        if !(ratio <= 1.0) {
            self.failures += 1;
        }
        self.worst = self.worst.max(ratio);
    }
}

/// Rounding in the `3ⁿ` sum is bounded by `max|f| · (1 + 4c)ⁿ` times a few
/// ulps; anything within that of each other agrees.
fn allowed(max_f: f64, c: f64, n: usize, rel: f64, a: f64) -> f64 {
    rel * a.abs().max(1.0) + 64.0 * f64::EPSILON * max_f * (1.0 + 4.0 * c).powi(n as i32)
}

pub fn run(epsilon: f64, trials: u64, seed: u64) -> Result<ExitCode, Error> {
    let params = PrivacyParams::from_epsilon(epsilon)?;
    if trials == 0 {
        return Err(Error::Config("at least one instance is required".into()));
    }
    let coeffs = params.coefficients();
    let (p, c) = (params.p(), coeffs.c());
    let mut rng = stream_rng(seed, 0);

    let mut exact = Check::new("unbiasedness on finite tables");
    for _ in 0..trials {
        let n = rng.random_range(1..=3);
        let shape: Vec<usize> = (0..n).map(|_| rng.random_range(1..=3)).collect();
        let base: Vec<i64> = (0..n).map(|_| rng.random_range(-2..=2)).collect();
        let values = (0..shape.iter().product())
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        let f = TableFunction::finite_support(base.clone(), shape, values)?;
        let x: Vec<i64> = base.iter().map(|b| b + rng.random_range(-1..=3)).collect();
        let g = |y: &[i64]| debias_multivariate(&f, &coeffs, y).unwrap_or(f64::NAN);
        let report = exact_expectation(&f, &g, &x, p)?;
        exact.compare(
            report.expectation,
            report.target,
            allowed(1.0, c, n, 1e-12, 0.0),
        );
    }

    let mut min = Check::new("minimum");
    let mut max = Check::new("maximum");
    let mut order = Check::new("order statistic");
    let mut entropy = Check::new("entropy");
    for _ in 0..trials {
        let n = rng.random_range(1..=6);
        let y: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=6)).collect();
        let max_abs = y.iter().map(|v| v.abs() + 1).max().unwrap_or(1) as f64;

        let fmin = |v: &[i64]| *v.iter().min().unwrap() as f64;
        let a = debias_min(&y, &coeffs)?;
        min.compare(
            a,
            debias_multivariate(&fmin, &coeffs, &y)?,
            allowed(max_abs, c, n, 1e-9, a),
        );

        let fmax = |v: &[i64]| *v.iter().max().unwrap() as f64;
        let a = debias_max(&y, &coeffs)?;
        max.compare(
            a,
            debias_multivariate(&fmax, &coeffs, &y)?,
            allowed(max_abs, c, n, 1e-9, a),
        );

        let rank = rng.random_range(1..=n);
        let fo = |v: &[i64]| {
            let mut s = v.to_vec();
            s.sort_unstable();
            s[rank - 1] as f64
        };
        let a = debias_order_stat(&y, rank, &coeffs)?;
        order.compare(
            a,
            debias_multivariate(&fo, &coeffs, &y)?,
            allowed(max_abs, c, n, 1e-9, a),
        );

        let counts: Vec<i64> = y.iter().map(|v| v.abs()).collect();
        let fh = |v: &[i64]| extended_entropy(v, LogBase::Two);
        let a = debias_entropy(&counts, &coeffs, LogBase::Two)?;
        // Extended entropy is bounded by log2 of the number of columns.
        let bound = (n as f64).log2().max(1.0);
        entropy.compare(
            a,
            debias_multivariate(&fh, &coeffs, &counts)?,
            allowed(bound, c, n, 1e-9, a),
        );
    }

    println!("epsilon {epsilon}, {trials} instances per check, seed {seed}");
    let checks = [exact, min, max, order, entropy];
    for check in &checks {
        let status = if check.failures == 0 { "ok" } else { "FAILED" };
        println!(
            "{:<32} {status:<6} worst error {:.3} of allowed, {} failures",
            check.name, check.worst, check.failures
        );
    }
    if checks.iter().all(|c| c.failures == 0) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}
