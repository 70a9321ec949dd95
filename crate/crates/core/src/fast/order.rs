//! Minimum, maximum and general order statistics.
//!
//! On the cube around `y`, the `i`-th smallest value takes only the values
//! `k - 1`, `k` and `k + 1` where `k = y_(i)`, and which one it takes depends
//! only on how many coordinates equal to `k - 1`, `k`, `k + 1` move up or
//! down. That makes the estimator a short sum of rectangle volumes (min/max)
//! or of products of symmetric-slice volumes (general rank).

use super::region::{
    symmetric_volume_wide, LocalDecomposition, Rectangle, Region, Sign, SymmetricSlice,
};
use crate::numeric::{FactorialTable, MixedSum, WideFloat};
use crate::{DebiasCoefficients, Error, Result};

fn non_empty(y: &[i64]) -> Result<()> {
    if y.is_empty() {
        Err(Error::Input(
            "order statistics need at least one value".into(),
        ))
    } else {
        Ok(())
    }
}

fn count_eq(y: &[i64], v: i64) -> usize {
    y.iter().filter(|&&x| x == v).count()
}

fn indices_eq(y: &[i64], v: i64) -> Vec<usize> {
    y.iter()
        .enumerate()
        .filter_map(|(j, &x)| (x == v).then_some(j))
        .collect()
}

fn power(base: f64, k: usize) -> WideFloat {
    WideFloat::from_f64(base).powi(k as u64)
}

/// `min(y) - 1 + (α_0+α_1)^n₀ + α_1^n₀ (α_0+α_1)^n₁`, with `n₀`, `n₁` the
/// multiplicities of `min(y)` and `min(y) + 1`.
pub fn debias_min(y: &[i64], coeffs: &DebiasCoefficients) -> Result<f64> {
    non_empty(y)?;
    let k = *y.iter().min().expect("non-empty");
    Ok(extreme(
        k - 1,
        count_eq(y, k),
        count_eq(y, k + 1),
        1.0,
        coeffs,
    ))
}

/// Mirror image of [`debias_min`]: `max(y) + 1 - (α_0+α_1)^n₀ - α_1^n₀ (α_0+α_1)^n₁`.
pub fn debias_max(y: &[i64], coeffs: &DebiasCoefficients) -> Result<f64> {
    non_empty(y)?;
    let k = *y.iter().max().expect("non-empty");
    Ok(extreme(
        k + 1,
        count_eq(y, k),
        count_eq(y, k - 1),
        -1.0,
        coeffs,
    ))
}

fn extreme(base: i64, n0: usize, n1: usize, sign: f64, coeffs: &DebiasCoefficients) -> f64 {
    let side = coeffs.alpha_zero() + coeffs.alpha_one();
    let mut acc = MixedSum::new();
    acc.add_plain(base as f64);
    let s = WideFloat::from_f64(sign);
    acc.add_product(&[s, power(side, n0)]);
    acc.add_product(&[s, power(coeffs.alpha_one(), n0), power(side, n1)]);
    acc.value()
}

/// Local decomposition of `min` around `y` under rectangles.
pub fn decompose_min(y: &[i64]) -> Result<LocalDecomposition> {
    non_empty(y)?;
    let k = *y.iter().min().expect("non-empty");
    Ok(extreme_decomposition(y, k, k + 1, k - 1, 1))
}

/// Local decomposition of `max` around `y` under rectangles.
pub fn decompose_max(y: &[i64]) -> Result<LocalDecomposition> {
    non_empty(y)?;
    let k = *y.iter().max().expect("non-empty");
    Ok(extreme_decomposition(y, k, k - 1, k + 1, -1))
}

fn extreme_decomposition(y: &[i64], k: i64, next: i64, base: i64, dir: i8) -> LocalDecomposition {
    let n = y.len();
    // For the minimum (dir = +1): R2 keeps every argmin from moving down, R4
    // additionally forces them up and keeps the runners-up from moving down.
    let mut r2 = Rectangle::full(n);
    let mut r4 = Rectangle::full(n);
    for (j, &v) in y.iter().enumerate() {
        if v == k {
            r2 = r2.restrict(j, &[0, dir]);
            r4 = r4.restrict(j, &[dir]);
        } else if v == next {
            r4 = r4.restrict(j, &[0, dir]);
        }
    }
    let step = f64::from(dir);
    let mut d = LocalDecomposition::new();
    d.push(base as f64, Region::Rectangle(Rectangle::full(n)));
    d.push(step, Region::Rectangle(r2));
    d.push(step, Region::Rectangle(r4));
    d
}

/// The `rank`-th smallest value of `y` (1-indexed).
pub fn order_stat(y: &[i64], rank: usize) -> Result<i64> {
    check_rank(y, rank)?;
    let mut sorted = y.to_vec();
    sorted.sort_unstable();
    Ok(sorted[rank - 1])
}

fn check_rank(y: &[i64], rank: usize) -> Result<()> {
    non_empty(y)?;
    if rank == 0 || rank > y.len() {
        return Err(Error::domain(format!(
            "rank {rank} outside 1..={}",
            y.len()
        )));
    }
    Ok(())
}

struct RankLayout {
    k: i64,
    below: Vec<usize>,
    at: Vec<usize>,
    above: Vec<usize>,
    /// How many of the `k` entries must move down before the value drops.
    d1: usize,
    /// How many of the `k` entries must move up before the value rises.
    d2: usize,
}

fn rank_layout(y: &[i64], rank: usize) -> Result<RankLayout> {
    let k = order_stat(y, rank)?;
    let l1 = y.iter().filter(|&&v| v < k).count();
    let l2 = y.iter().filter(|&&v| v <= k).count();
    Ok(RankLayout {
        k,
        below: indices_eq(y, k - 1),
        at: indices_eq(y, k),
        above: indices_eq(y, k + 1),
        d1: rank - l1,
        d2: l2 - rank + 1,
    })
}

/// Unbiased estimate of the `rank`-th smallest value (1-indexed) in `O(n²)`.
///
/// With `A`, `B`, `C` the coordinates equal to `k - 1`, `k`, `k + 1`, the
/// value drops to `k - 1` exactly when (number of `B` moving down) minus
/// (number of `A` moving up) is at least `d₁`, and rises to `k + 1` when
/// (`B` moving up) minus (`C` moving down) is at least `d₂`:
///
/// ```text
/// g = k - Σ_b Σ_{a ≤ b-d₁} vol(S⁺_{A,a}) vol(S⁻_{B,b})
///       + Σ_b Σ_{c ≤ b-d₂} vol(S⁺_{B,b}) vol(S⁻_{C,c})
/// ```
pub fn debias_order_stat(y: &[i64], rank: usize, coeffs: &DebiasCoefficients) -> Result<f64> {
    let layout = rank_layout(y, rank)?;
    let table = FactorialTable::new(y.len());
    let (na, nb, nc) = (layout.below.len(), layout.at.len(), layout.above.len());
    let vol = |size: usize, count: usize| symmetric_volume_wide(size, count, coeffs, &table);
    let vol_a: Vec<WideFloat> = (0..=na).map(|a| vol(na, a)).collect();
    let vol_b: Vec<WideFloat> = (0..=nb).map(|b| vol(nb, b)).collect();
    let vol_c: Vec<WideFloat> = (0..=nc).map(|c| vol(nc, c)).collect();
    let minus_one = WideFloat::from_f64(-1.0);

    let mut acc = MixedSum::new();
    acc.add_plain(layout.k as f64);
    for b in layout.d1..=nb {
        for vol_lo in vol_a.iter().take((b - layout.d1).min(na) + 1) {
            acc.add_product(&[minus_one, *vol_lo, vol_b[b]]);
        }
    }
    for b in layout.d2..=nb {
        for vol_hi in vol_c.iter().take((b - layout.d2).min(nc) + 1) {
            acc.add_product(&[vol_b[b], *vol_hi]);
        }
    }
    Ok(acc.value())
}

/// Local decomposition of the `rank`-th order statistic around `y` under
/// products of symmetric slices.
pub fn decompose_order_stat(y: &[i64], rank: usize) -> Result<LocalDecomposition> {
    let l = rank_layout(y, rank)?;
    let n = y.len();
    let slice = |idx: &Vec<usize>, count, sign| SymmetricSlice {
        indices: idx.clone(),
        count,
        sign,
    };
    let mut d = LocalDecomposition::new();
    d.push(l.k as f64, Region::Rectangle(Rectangle::full(n)));
    for b in l.d1..=l.at.len() {
        for a in 0..=(b - l.d1).min(l.below.len()) {
            d.push(
                -1.0,
                Region::Symmetric {
                    dim: n,
                    slices: vec![slice(&l.below, a, Sign::Plus), slice(&l.at, b, Sign::Minus)],
                },
            );
        }
    }
    for b in l.d2..=l.at.len() {
        for c in 0..=(b - l.d2).min(l.above.len()) {
            d.push(
                1.0,
                Region::Symmetric {
                    dim: n,
                    slices: vec![slice(&l.at, b, Sign::Plus), slice(&l.above, c, Sign::Minus)],
                },
            );
        }
    }
    Ok(d)
}
