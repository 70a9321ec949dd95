use super::data::{EdgeListGraph, Histogram};
use super::report::{RunMetadata, TrialRecord};
use crate::dlap::mechanism;
use crate::fast::debias_binomial;
use crate::generic::{debias_univariate, exp_family_factor};
use crate::numeric::{binomial_count, KahanSum};
use crate::rng::{map_streams, Parallelism};
use crate::{DebiasCoefficients, Error, PrivacyParams, Result};

/// Settings shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    pub parallelism: Parallelism,
}

impl TrialConfig {
    pub fn new(epsilon: f64, trials: u64, seed: u64) -> Self {
        TrialConfig {
            epsilon,
            trials,
            seed,
            parallelism: Parallelism::Sequential,
        }
    }

    pub fn with_parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }

    fn params(&self, sensitivity: u32) -> Result<PrivacyParams> {
        if self.trials == 0 {
            return Err(Error::Config("at least one trial is required".into()));
        }
        PrivacyParams::new(self.epsilon, sensitivity)
    }

    fn metadata(&self, params: &PrivacyParams) -> RunMetadata {
        RunMetadata {
            p: params.p(),
            sensitivity: params.sensitivity(),
            seed: self.seed,
        }
    }
}

/// Records of one experiment in trial order, with the noise parameters used.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub metadata: RunMetadata,
    pub records: Vec<TrialRecord>,
}

/// Runs `trial` once per trial index on its own stream, each returning
/// `(experiment, true, naive, unbiased)` rows, and flattens in trial order.
fn run_trials<F>(cfg: &TrialConfig, params: &PrivacyParams, x: &[i64], trial: F) -> ExperimentRun
where
    F: Fn(&[i64]) -> Vec<(String, f64, f64, f64)> + Sync + Send,
{
    let per_trial = map_streams(cfg.seed, cfg.trials, cfg.parallelism, |_, rng| {
        let noisy = mechanism(x, params, rng).expect("experiment inputs are non-empty");
        trial(noisy.values())
    });
    let records = per_trial
        .into_iter()
        .enumerate()
        .flat_map(|(i, rows)| {
            rows.into_iter().map(
                move |(experiment, true_value, naive, unbiased)| TrialRecord {
                    experiment,
                    epsilon: cfg.epsilon,
                    trial: i as u64,
                    true_value,
                    naive,
                    unbiased,
                },
            )
        })
        .collect();
    ExperimentRun {
        metadata: cfg.metadata(params),
        records,
    }
}

fn sum(values: impl Iterator<Item = f64>) -> f64 {
    values.sum::<KahanSum>().value()
}

/// k-star counts `Σ_i C(d_i, k)` from degrees released with sensitivity 1.
///
/// The naive estimate treats `C(m, k)` as zero for `m < k`; the unbiased one
/// is `Σ_i [C(d̃_i, k) - c·C(d̃_i - 1, k - 2)]` with `C` the binomial
/// polynomial, which is negative for some negative arguments.
pub fn experiment_kstars(
    graph: &EdgeListGraph,
    k: u32,
    cfg: &TrialConfig,
) -> Result<ExperimentRun> {
    if k < 2 {
        return Err(Error::domain(format!("k-stars need k >= 2, got {k}")));
    }
    if graph.nodes() == 0 {
        return Err(Error::Input("graph has no nodes".into()));
    }
    let params = cfg.params(1)?;
    let coeffs = params.coefficients();
    let degrees = graph.degrees();
    let truth = sum(degrees.iter().map(|&d| binomial_count(d, k)));
    Ok(run_trials(cfg, &params, &degrees, |noisy| {
        let naive = sum(noisy.iter().map(|&d| binomial_count(d, k)));
        let unbiased = sum(noisy.iter().map(|&d| debias_binomial(d, k, &coeffs)));
        vec![("kstars".to_string(), truth, naive, unbiased)]
    }))
}

/// `(t/s)·ln(s/t)` for `t > 0`, zero otherwise.
fn entropy_summand(t: i64, s: f64) -> f64 {
    if t <= 0 {
        0.0
    } else {
        let z = t as f64 / s;
        -z * z.ln()
    }
}

/// Entropy (natural log) of a histogram with public total `s`, released with
/// sensitivity 2. Each column's summand is a univariate function of that
/// column alone, so the unbiased estimate is a per-column correction.
pub fn experiment_entropy(hist: &Histogram, cfg: &TrialConfig) -> Result<ExperimentRun> {
    let s = hist.public_total().ok_or_else(|| {
        Error::Config("entropy needs the histogram total to be declared public".into())
    })?;
    if s <= 0 {
        return Err(Error::Input("entropy needs a positive total".into()));
    }
    let s = s as f64;
    let params = cfg.params(2)?;
    let coeffs = params.coefficients();
    let truth = sum(hist.counts().iter().map(|&x| entropy_summand(x, s)));
    Ok(run_trials(cfg, &params, hist.counts(), |noisy| {
        let naive = sum(noisy.iter().map(|&y| entropy_summand(y, s)));
        let unbiased = sum(noisy
            .iter()
            .map(|&y| debias_univariate(|t| entropy_summand(t, s), &coeffs, y)));
        vec![("entropy".to_string(), truth, naive, unbiased)]
    }))
}

/// Partition function `Z(t) = Σ_i exp(t·x_i)`. The naive estimate is biased
/// by the factor `1/A(e^t)`, which the unbiased estimate undoes.
pub fn experiment_partition(hist: &Histogram, t: f64, cfg: &TrialConfig) -> Result<ExperimentRun> {
    if !t.is_finite() || t.abs() >= cfg.epsilon {
        return Err(Error::domain(format!(
            "|t| must be below epsilon = {} for the expectation to exist, got t = {t}",
            cfg.epsilon
        )));
    }
    if t.abs() > 0.8 * cfg.epsilon {
        log::warn!(
            "|t| = {} is close to epsilon = {}; the estimator's variance is infinite once |t| >= epsilon/2",
            t.abs(),
            cfg.epsilon
        );
    }
    let params = cfg.params(1)?;
    let factor = exp_family_factor(t.exp(), params.p())?.value;
    let truth = sum(hist.counts().iter().map(|&x| (t * x as f64).exp()));
    Ok(run_trials(cfg, &params, hist.counts(), |noisy| {
        let naive = sum(noisy.iter().map(|&y| (t * y as f64).exp()));
        vec![("partition".to_string(), truth, naive, factor * naive)]
    }))
}

/// Profile `φ_k = #{i : x_i = k} / n` for `k = 0..=k_max`, one record per
/// `(trial, k)` named `profile:k=<k>`.
pub fn experiment_profile(
    hist: &Histogram,
    k_max: u32,
    cfg: &TrialConfig,
) -> Result<ExperimentRun> {
    let params = cfg.params(1)?;
    let coeffs: DebiasCoefficients = params.coefficients();
    let n = hist.len() as f64;
    let counts = hist.counts();
    let names: Vec<String> = (0..=k_max).map(|k| format!("profile:k={k}")).collect();
    let truth: Vec<f64> = (0..=i64::from(k_max))
        .map(|k| counts.iter().filter(|&&x| x == k).count() as f64 / n)
        .collect();
    Ok(run_trials(cfg, &params, counts, |noisy| {
        let mut hits = vec![0usize; k_max as usize + 1];
        let mut near = vec![0usize; k_max as usize + 1];
        let slot = |k: i64| (0..=i64::from(k_max)).contains(&k).then_some(k as usize);
        for &y in noisy {
            if let Some(k) = slot(y) {
                hits[k] += 1;
            }
            for k in [y - 1, y + 1].into_iter().filter_map(slot) {
                near[k] += 1;
            }
        }
        (0..=k_max as usize)
            .map(|k| {
                let naive = hits[k] as f64 / n;
                let unbiased = (hits[k] as f64 * coeffs.alpha_zero()
                    + near[k] as f64 * coeffs.alpha_one())
                    / n;
                (names[k].clone(), truth[k], naive, unbiased)
            })
            .collect()
    }))
}
