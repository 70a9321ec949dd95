//! The discrete Laplace distribution and the additive mechanism.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::{Error, Result};

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("p must lie in (0, 1), got {p}")))
    }
}

/// Probability mass of `DLap(p)` at `i`: `(1-p)/(1+p) · p^|i|`.
pub fn pmf(p: f64, i: i64) -> Result<f64> {
    check_p(p)?;
    Ok(pmf_unchecked(p, i))
}

pub(crate) fn pmf_unchecked(p: f64, i: i64) -> f64 {
    let k = i.unsigned_abs();
    let tail = if k <= i32::MAX as u64 {
        p.powi(k as i32)
    } else {
        p.powf(k as f64)
    };
    (1.0 - p) / (1.0 + p) * tail
}

/// `P(|η| > r)` for `η ~ DLap(p)`.
pub fn tail_mass(p: f64, r: u64) -> f64 {
    2.0 * p.powf(r as f64 + 1.0) / (1.0 + p)
}

/// Variance of `DLap(p)`, `2p/(1-p)²`.
pub fn variance(p: f64) -> f64 {
    2.0 * p / ((1.0 - p) * (1.0 - p))
}

/// Privacy budget and integer sensitivity, with the derived noise parameter
/// `p = exp(-epsilon / sensitivity)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    epsilon: f64,
    sensitivity: u32,
    p: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, sensitivity: u32) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::domain(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        if sensitivity == 0 {
            return Err(Error::domain("sensitivity must be at least 1"));
        }
        let p = (-epsilon / f64::from(sensitivity)).exp();
        check_p(p).map_err(|_| {
            Error::domain(format!(
                "epsilon/sensitivity = {} gives p = {p}, outside (0, 1)",
                epsilon / f64::from(sensitivity)
            ))
        })?;
        Ok(PrivacyParams {
            epsilon,
            sensitivity,
            p,
        })
    }

    /// Unit sensitivity.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 1)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sensitivity(&self) -> u32 {
        self.sensitivity
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn coefficients(&self) -> DebiasCoefficients {
        DebiasCoefficients::from_valid_p(self.p)
    }
}

/// Per-coordinate weights of the unbiased estimator.
///
/// `alpha_zero = 1 + 2c` weighs the centre point and `alpha_one = -c` each
/// of the two neighbours, where `c = p/(1-p)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebiasCoefficients {
    p: f64,
    c: f64,
    alpha_zero: f64,
    alpha_one: f64,
}

impl DebiasCoefficients {
    pub fn new(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self::from_valid_p(p))
    }

    fn from_valid_p(p: f64) -> Self {
        let q = 1.0 - p;
        let c = p / (q * q);
        DebiasCoefficients {
            p,
            c,
            alpha_zero: 1.0 + 2.0 * c,
            alpha_one: -c,
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha_zero(&self) -> f64 {
        self.alpha_zero
    }

    pub fn alpha_one(&self) -> f64 {
        self.alpha_one
    }

    /// Weight for the offset `xi ∈ {-1, 0, 1}`.
    pub fn alpha(&self, xi: i8) -> f64 {
        match xi {
            0 => self.alpha_zero,
            -1 | 1 => self.alpha_one,
            _ => panic!("offset {xi} outside {{-1, 0, 1}}"),
        }
    }
}

/// Draws one `DLap(p)` variate as the difference of two geometric variables
/// with success probability `1 - p`.
pub fn sample_dlap<R: Rng + ?Sized>(params: &PrivacyParams, rng: &mut R) -> i64 {
    sample_dlap_p(params.p, rng)
}

pub(crate) fn sample_dlap_p<R: Rng + ?Sized>(p: f64, rng: &mut R) -> i64 {
    let geom = Geometric::new(1.0 - p).expect("1 - p lies in (0, 1)");
    let a = geom.sample(rng) as i64;
    let b = geom.sample(rng) as i64;
    a - b
}

/// A release `x + η` of an integer vector together with its noise parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyVector {
    values: Vec<i64>,
    params: PrivacyParams,
}

impl NoisyVector {
    pub fn new(values: Vec<i64>, params: PrivacyParams) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("noisy vector must be non-empty".into()));
        }
        Ok(NoisyVector { values, params })
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn params(&self) -> &PrivacyParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<i64> {
        self.values
    }
}

/// The discrete Laplace mechanism: adds independent `DLap(p)` noise to every
/// coordinate of `x`.
pub fn mechanism<R: Rng + ?Sized>(
    x: &[i64],
    params: &PrivacyParams,
    rng: &mut R,
) -> Result<NoisyVector> {
    if x.is_empty() {
        return Err(Error::Input("cannot privatize an empty vector".into()));
    }
    let geom = Geometric::new(1.0 - params.p).expect("1 - p lies in (0, 1)");
    let values = x
        .iter()
        .map(|&xi| xi + geom.sample(rng) as i64 - geom.sample(rng) as i64)
        .collect();
    NoisyVector::new(values, *params)
}
