//! Accumulators and combinatorial tables shared by the estimators.
//!
//! The estimators are signed sums whose terms can be many orders of magnitude
//! larger than the result, so every sum goes through a compensated
//! accumulator. Volumes for large dimensions additionally need terms whose
//! individual factors overflow `f64`; those are carried as
//! `(sign, ln|value|)` pairs.

use std::iter::Sum;
use std::ops::AddAssign;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.compensation *= factor;
    }
}

impl AddAssign<f64> for KahanSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl Sum<f64> for KahanSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of `values`.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().sum::<KahanSum>().value()
}

/// Products whose natural log-magnitude exceeds this are accumulated with an
/// explicit exponent instead of as plain `f64`.
pub const LOG_PATH_THRESHOLD: f64 = 600.0;

/// `mant · 2^exp` with `0.5 ≤ |mant| < 1`, or zero. Multiplication rounds
/// exactly like `f64` but never overflows or underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WideFloat {
    mant: f64,
    exp: i64,
}

impl WideFloat {
    pub const ZERO: WideFloat = WideFloat { mant: 0.0, exp: 0 };
    pub const ONE: WideFloat = WideFloat { mant: 0.5, exp: 1 };

    fn normalized(mant: f64, exp: i64) -> Self {
        if mant == 0.0 {
            return Self::ZERO;
        }
        let (m, e) = libm::frexp(mant);
        WideFloat {
            mant: m,
            exp: exp + i64::from(e),
        }
    }

    pub fn from_f64(v: f64) -> Self {
        Self::normalized(v, 0)
    }

    /// `sign · exp(ln_mag)`.
    pub fn from_ln(sign: i8, ln_mag: f64) -> Self {
        if sign == 0 || ln_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let e = (ln_mag / std::f64::consts::LN_2).floor();
        let m = (ln_mag - e * std::f64::consts::LN_2).exp();
        Self::normalized(f64::from(sign.signum()) * m, e as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.mant == 0.0
    }

    pub fn signum(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.mant.signum()
        }
    }

    /// `ln|self|`, `-∞` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mant.abs().ln() + self.exp as f64 * std::f64::consts::LN_2
        }
    }

    pub fn mul(self, other: WideFloat) -> WideFloat {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self::normalized(self.mant * other.mant, self.exp + other.exp)
    }

    /// `self^k` by repeated squaring.
    pub fn powi(self, mut k: u64) -> WideFloat {
        let mut base = self;
        let mut acc = Self::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            k >>= 1;
        }
        acc
    }

    /// Nearest `f64`, saturating to `±∞` or `0`.
    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let e = self.exp.clamp(-2000, 2000) as i32;
        libm::ldexp(self.mant, e)
    }

    fn fits_plain(&self) -> bool {
        self.ln_abs().abs() <= LOG_PATH_THRESHOLD
    }
}

/// Compensated sum of plain `f64` terms and [`WideFloat`] products.
///
/// Products that fit comfortably in `f64` join the plain sum. The rest are
/// summed relative to a running binary exponent (the largest seen) and folded
/// in at the end. [`MixedSum::used_log_path`] reports whether any factor was
/// outside the `f64`-safe range, i.e. whether the wide arithmetic mattered.
#[derive(Debug, Clone)]
pub struct MixedSum {
    plain: KahanSum,
    shifted: KahanSum,
    shift: Option<i64>,
    used_log_path: bool,
}

impl Default for MixedSum {
    fn default() -> Self {
        Self::new()
    }
}

impl MixedSum {
    pub fn new() -> Self {
        MixedSum {
            plain: KahanSum::new(),
            shifted: KahanSum::new(),
            shift: None,
            used_log_path: false,
        }
    }

    pub fn add_plain(&mut self, v: f64) {
        self.plain.add(v);
    }

    pub fn add_product(&mut self, factors: &[WideFloat]) {
        let mut prod = WideFloat::ONE;
        for f in factors {
            if f.is_zero() {
                return;
            }
            self.used_log_path |= !f.fits_plain();
            prod = prod.mul(*f);
        }
        self.add_wide(prod);
    }

    pub fn add_wide(&mut self, term: WideFloat) {
        if term.is_zero() {
            return;
        }
        if term.fits_plain() {
            self.plain.add(term.to_f64());
            return;
        }
        self.used_log_path = true;
        let shift = match self.shift {
            Some(s) if s >= term.exp => s,
            Some(s) => {
                self.shifted
                    .scale(libm::ldexp(1.0, (s - term.exp).max(-2000) as i32));
                term.exp
            }
            None => term.exp,
        };
        self.shift = Some(shift);
        self.shifted
            .add(libm::ldexp(term.mant, (term.exp - shift).max(-2000) as i32));
    }

    pub fn used_log_path(&self) -> bool {
        self.used_log_path
    }

    pub fn value(&self) -> f64 {
        match self.shift {
            None => self.plain.value(),
            Some(shift) => {
                let wide = WideFloat::normalized(self.shifted.value(), shift);
                let mut acc = self.plain;
                acc.add(wide.to_f64());
                acc.value()
            }
        }
    }

    /// The sum as a [`WideFloat`], for results that may leave `f64` range.
    pub fn wide_value(&self) -> WideFloat {
        match self.shift {
            None => WideFloat::from_f64(self.plain.value()),
            Some(shift) => {
                let plain = WideFloat::from_f64(self.plain.value());
                let rel = libm::ldexp(plain.mant, (plain.exp - shift).max(-2000) as i32);
                let mut acc = self.shifted;
                acc.add(rel);
                WideFloat::normalized(acc.value(), shift)
            }
        }
    }
}

/// Factorials for exact small arguments plus log-factorials for all arguments
/// up to a fixed bound.
#[derive(Debug, Clone)]
pub struct FactorialTable {
    exact: Vec<f64>,
    ln: Vec<f64>,
}

/// `170!` is the largest factorial representable in `f64`.
const MAX_EXACT_FACTORIAL: usize = 170;

impl FactorialTable {
    pub fn new(max: usize) -> Self {
        let exact_len = max.min(MAX_EXACT_FACTORIAL) + 1;
        let mut exact = Vec::with_capacity(exact_len);
        let mut f = 1.0f64;
        exact.push(1.0);
        for k in 1..exact_len {
            f *= k as f64;
            exact.push(f);
        }
        let mut ln = Vec::with_capacity(max + 1);
        let mut acc = KahanSum::new();
        ln.push(0.0);
        for k in 1..=max {
            acc.add((k as f64).ln());
            ln.push(acc.value());
        }
        FactorialTable { exact, ln }
    }

    pub fn max(&self) -> usize {
        self.ln.len() - 1
    }

    pub fn ln_factorial(&self, k: usize) -> f64 {
        self.ln[k]
    }

    /// Multinomial coefficient `total! / (k_1! ⋯ k_m!)`, zero when any part
    /// is negative or the parts do not sum to `total`.
    pub fn multinomial(&self, total: i64, parts: &[i64]) -> WideFloat {
        if total < 0 || parts.iter().any(|&k| k < 0) || parts.iter().sum::<i64>() != total {
            return WideFloat::ZERO;
        }
        let total = total as usize;
        if total <= MAX_EXACT_FACTORIAL && total < self.exact.len() {
            let mut v = self.exact[total];
            for &k in parts {
                v /= self.exact[k as usize];
            }
            return WideFloat::from_f64(v.round());
        }
        let mut ln = self.ln[total];
        for &k in parts {
            ln -= self.ln[k as usize];
        }
        WideFloat::from_ln(1, ln)
    }

    pub fn binomial(&self, n: i64, k: i64) -> WideFloat {
        self.multinomial(n, &[k, n - k])
    }
}

/// Generalized binomial coefficient `m (m-1) ⋯ (m-k+1) / k!`, defined for
/// every integer `m` (negative `m` included) as a polynomial in `m`.
pub fn binomial_poly(m: i64, k: u32) -> f64 {
    let mut v = 1.0f64;
    for j in 0..k as i64 {
        v *= (m - j) as f64;
        v /= (j + 1) as f64;
    }
    v
}

/// Binomial coefficient that is zero whenever `m < k`, the combinatorial
/// count of `k`-subsets of an `m`-set (for `m < 0` also zero).
pub fn binomial_count(m: i64, k: u32) -> f64 {
    if m < k as i64 {
        0.0
    } else {
        binomial_poly(m, k)
    }
}

/// Formats `v` like C's `%.17g`, which round-trips every `f64`.
pub fn format_g17(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    const PRECISION: i32 = 17;
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..PRECISION).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp) as usize;
        trim_fraction(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
