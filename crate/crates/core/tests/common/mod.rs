//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use dlap_debias::fast::{DecisionTree, Monomial, Polynomial};
use dlap_debias::generic::TableFunction;
use dlap_debias::rng::StreamRng;
use rand::Rng;
use std::ops::RangeInclusive;

/// A finitely supported table on a random box of side 1..=3 near the
/// origin, values uniform in [-1, 1].
pub fn random_table(rng: &mut StreamRng, n: usize) -> TableFunction {
    let shape: Vec<usize> = (0..n).map(|_| rng.random_range(1..=3)).collect();
    let base: Vec<i64> = (0..n).map(|_| rng.random_range(-2..=2)).collect();
    let len: usize = shape.iter().product();
    let values = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
    TableFunction::finite_support(base, shape, values).unwrap()
}

/// A point within distance 2 of the table's box, so that the estimator at
/// neighbouring points is exercised both inside and outside the support.
pub fn point_near(rng: &mut StreamRng, f: &TableFunction) -> Vec<i64> {
    let (lo, hi) = f.support_box();
    lo.iter()
        .zip(&hi)
        .map(|(&l, &h)| rng.random_range(l - 2..=h + 2))
        .collect()
}

/// A vector of length drawn from `len` with entries uniform in `[lo, hi]`.
pub fn random_counts(
    rng: &mut StreamRng,
    len: RangeInclusive<usize>,
    lo: i64,
    hi: i64,
) -> Vec<i64> {
    let n = rng.random_range(len);
    (0..n).map(|_| rng.random_range(lo..=hi)).collect()
}

/// Random tree with exactly `internal` split nodes over `n` variables, with
/// thresholds near `y` so that splits cut through the cube around it.
pub fn random_tree(rng: &mut StreamRng, y: &[i64], internal: usize) -> DecisionTree {
    if internal == 0 {
        return DecisionTree::Leaf(rng.random_range(-1.0..=1.0));
    }
    let rest = internal - 1;
    let left = rng.random_range(0..=rest);
    let var = rng.random_range(0..y.len());
    let threshold =
        (y[var] + rng.random_range(-2..=1)) as f64 + if rng.random_bool(0.3) { 0.5 } else { 0.0 };
    DecisionTree::split(
        var,
        threshold,
        random_tree(rng, y, left),
        random_tree(rng, y, rest - left),
    )
}

/// A handful of monomials with exponents up to 3 and coefficients in [-2, 2].
pub fn random_polynomial(rng: &mut StreamRng, n: usize) -> Polynomial {
    let terms = (0..rng.random_range(1..=4))
        .map(|_| {
            let vars: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
            let powers = vars
                .into_iter()
                .map(|j| (j, rng.random_range(1..=3)))
                .collect();
            Monomial::new(rng.random_range(-2.0..=2.0), powers)
        })
        .collect();
    Polynomial::new(terms)
}

/// `|a - b|` relative to the larger magnitude; two values that are both
/// indistinguishable from zero agree.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d <= 1e-12 {
        return 0.0;
    }
    d / a.abs().max(b.abs())
}
