//! Polynomials in the released counts.
//!
//! The estimator is linear and, for a product of functions of distinct
//! coordinates, multiplicative. A monomial `Π y_j^{k_j}` therefore debiases
//! to the product of the univariate estimates of `t ↦ t^{k_j}`, which costs
//! `O(n)` instead of `3ⁿ`.

use crate::generic::debias_univariate;
use crate::numeric::{binomial_poly, KahanSum};
use crate::{DebiasCoefficients, Error, Result};

/// `coefficient · Π y_var^exp` with sparse `(var, exp)` powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub powers: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn new(coefficient: f64, powers: Vec<(usize, u32)>) -> Self {
        Monomial {
            coefficient,
            powers,
        }
    }

    pub fn constant(coefficient: f64) -> Self {
        Monomial::new(coefficient, Vec::new())
    }

    pub fn evaluate(&self, y: &[i64]) -> f64 {
        self.powers
            .iter()
            .fold(self.coefficient, |acc, &(var, exp)| {
                acc * (y[var] as f64).powi(exp as i32)
            })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Polynomial { terms }
    }

    /// `C(t, k)` in the power basis of variable `var`, from the expansion of
    /// the falling factorial `t (t-1) ⋯ (t-k+1)`.
    pub fn binomial(var: usize, k: u32) -> Self {
        // coefficients of the falling factorial, lowest degree first
        let mut coef = vec![1.0f64];
        for j in 0..k {
            let mut next = vec![0.0; coef.len() + 1];
            for (d, &a) in coef.iter().enumerate() {
                next[d + 1] += a;
                next[d] -= a * f64::from(j);
            }
            coef = next;
        }
        let k_fact: f64 = (1..=k).map(f64::from).product();
        let terms = coef
            .into_iter()
            .enumerate()
            .filter(|&(_, a)| a != 0.0)
            .map(|(d, a)| {
                let powers = if d == 0 {
                    Vec::new()
                } else {
                    vec![(var, d as u32)]
                };
                Monomial::new(a / k_fact, powers)
            })
            .collect();
        Polynomial { terms }
    }

    pub fn evaluate(&self, y: &[i64]) -> f64 {
        self.terms
            .iter()
            .map(|m| m.evaluate(y))
            .sum::<KahanSum>()
            .value()
    }

    fn validate(&self, n: usize) -> Result<()> {
        for m in &self.terms {
            for &(var, _) in &m.powers {
                if var >= n {
                    return Err(Error::structure(format!(
                        "monomial uses variable {var} but the input has {n} coordinates"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn debias_power(y: i64, k: u32, coeffs: &DebiasCoefficients) -> f64 {
    debias_univariate(|t| (t as f64).powi(k as i32), coeffs, y)
}

/// Unbiased estimate of `Π_j x_j^{exponents[j]}` from the release `y`.
pub fn debias_monomial(y: &[i64], exponents: &[u32], coeffs: &DebiasCoefficients) -> Result<f64> {
    if y.len() != exponents.len() {
        return Err(Error::structure(format!(
            "{} exponents for {} coordinates",
            exponents.len(),
            y.len()
        )));
    }
    Ok(y.iter()
        .zip(exponents)
        .filter(|&(_, &k)| k != 0)
        .map(|(&v, &k)| debias_power(v, k, coeffs))
        .product())
}

/// Unbiased estimate of a polynomial, term by term.
///
/// Repeated variables within one monomial have their exponents merged first,
/// since `y_j^a · y_j^b` is not a product over distinct coordinates.
pub fn debias_polynomial(y: &[i64], poly: &Polynomial, coeffs: &DebiasCoefficients) -> Result<f64> {
    poly.validate(y.len())?;
    let mut acc = KahanSum::new();
    for m in &poly.terms {
        let mut merged: Vec<(usize, u32)> = m.powers.clone();
        merged.sort_unstable_by_key(|&(var, _)| var);
        merged.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let prod: f64 = merged
            .iter()
            .filter(|&&(_, k)| k != 0)
            .map(|&(var, k)| debias_power(y[var], k, coeffs))
            .product();
        acc.add(m.coefficient * prod);
    }
    Ok(acc.value())
}

/// Unbiased estimate of `C(x, k)` from `ỹ`: `C(ỹ, k) - c·C(ỹ-1, k-2)`.
///
/// The second difference of `t ↦ C(t, k)` is `C(t-1, k-2)`, so this is the
/// univariate estimator in closed form.
pub fn debias_binomial(y: i64, k: u32, coeffs: &DebiasCoefficients) -> f64 {
    if k < 2 {
        return binomial_poly(y, k);
    }
    binomial_poly(y, k) - coeffs.c() * binomial_poly(y - 1, k - 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generic::debias_multivariate;

    fn coeffs() -> DebiasCoefficients {
        DebiasCoefficients::new(0.35).unwrap()
    }

    #[test]
    fn monomial_matches_generic() {
        let c = coeffs();
        let y = [3, -1, 2];
        let e = [2, 1, 3];
        let f = |v: &[i64]| (v[0] * v[0] * v[1] * v[2] * v[2] * v[2]) as f64;
        let oracle = debias_multivariate(&f, &c, &y).unwrap();
        let fast = debias_monomial(&y, &e, &c).unwrap();
        assert!((oracle - fast).abs() < 1e-9 * oracle.abs().max(1.0));
    }

    #[test]
    fn repeated_variable_is_merged() {
        let c = coeffs();
        let p = Polynomial::new(vec![Monomial::new(2.0, vec![(0, 1), (1, 1), (0, 1)])]);
        let via_poly = debias_polynomial(&[4, 5], &p, &c).unwrap();
        let direct = 2.0 * debias_monomial(&[4, 5], &[2, 1], &c).unwrap();
        assert!((via_poly - direct).abs() < 1e-12);
    }

    #[test]
    fn binomial_expansion_agrees() {
        for k in 0..7 {
            let p = Polynomial::binomial(0, k);
            for t in -4..12 {
                let want = binomial_poly(t, k);
                assert!((p.evaluate(&[t]) - want).abs() < 1e-9 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn binomial_closed_form_matches_univariate() {
        let c = coeffs();
        for k in 0..6 {
            for y in -3..10 {
                let g = debias_univariate(|t| binomial_poly(t, k), &c, y);
                assert!((debias_binomial(y, k, &c) - g).abs() < 1e-9 * g.abs().max(1.0));
            }
        }
    }

    #[test]
    fn out_of_range_variable() {
        let p = Polynomial::new(vec![Monomial::new(1.0, vec![(3, 1)])]);
        assert!(matches!(
            debias_polynomial(&[1, 2], &p, &coeffs()),
            Err(Error::Structure(_))
        ));
        assert!(matches!(
            debias_monomial(&[1], &[1, 2], &coeffs()),
            Err(Error::Structure(_))
        ));
    }
}
