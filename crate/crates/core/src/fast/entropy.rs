//! Entropy and KL divergence of count vectors.
//!
//! Both are extended to all of `ℤⁿ` by clamping ratios to 1 and treating any
//! non-positive count or total as contributing zero. Each summand depends on
//! `ξ` only through `(ξ_i, Σ_j ξ_j)`, so the cube splits into the layer sets
//! `P^i_{a,b}` whose volumes come from [`LayerVolumes`].

use std::collections::HashMap;

use super::region::{LayerSet, LayerVolumes, LocalDecomposition, Region};
use crate::numeric::KahanSum;
use crate::{DebiasCoefficients, Error, Result};

/// Logarithm base for entropy and divergence values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    /// Bits.
    #[default]
    Two,
    /// Nats.
    E,
}

impl LogBase {
    fn ln_base(self) -> f64 {
        match self {
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::E => 1.0,
        }
    }
}

/// `h(x, s)`: zero when `x ≤ 0` or `s ≤ 0`, otherwise `-z log z` with
/// `z = min(x/s, 1)`.
pub fn entropy_term(x: i64, s: i64, base: LogBase) -> f64 {
    if x <= 0 || s <= 0 {
        return 0.0;
    }
    let z = (x as f64 / s as f64).min(1.0);
    -z * z.ln() / base.ln_base()
}

/// Entropy of the empirical distribution of `y`, extended to all integer
/// vectors.
pub fn extended_entropy(y: &[i64], base: LogBase) -> f64 {
    let s: i64 = y.iter().sum();
    y.iter()
        .map(|&x| entropy_term(x, s, base))
        .sum::<KahanSum>()
        .value()
}

/// `kl(x₁, x₂, y₁, y₂)`: zero when any argument is non-positive, otherwise
/// `u log(u/v)` with `u = min(x₁/x₂, 1)` and `v = min(y₁/y₂, 1)`.
pub fn kl_term(x1: i64, x2: i64, y1: i64, y2: i64, base: LogBase) -> f64 {
    if x1 <= 0 || x2 <= 0 || y1 <= 0 || y2 <= 0 {
        return 0.0;
    }
    let u = (x1 as f64 / x2 as f64).min(1.0);
    let v = (y1 as f64 / y2 as f64).min(1.0);
    u * (u / v).ln() / base.ln_base()
}

/// KL divergence between the empirical distributions of `x` and `y`,
/// extended to all integer vectors.
pub fn extended_kl(x: &[i64], y: &[i64], base: LogBase) -> f64 {
    let sx: i64 = x.iter().sum();
    let sy: i64 = y.iter().sum();
    x.iter()
        .zip(y)
        .map(|(&a, &b)| kl_term(a, sx, b, sy, base))
        .sum::<KahanSum>()
        .value()
}

/// Multiplicity of each distinct value, in first-seen order.
fn distinct_counts(y: &[i64]) -> Vec<(i64, usize)> {
    let mut index: HashMap<i64, usize> = HashMap::new();
    let mut out: Vec<(i64, usize)> = Vec::new();
    for &v in y {
        match index.get(&v) {
            Some(&i) => out[i].1 += 1,
            None => {
                index.insert(v, out.len());
                out.push((v, 1));
            }
        }
    }
    out
}

/// `Σ_i Σ_a Σ_b vol(P^i_{a,b}) · h(y_i + a, b + Σ_j y_j)` in `O(n²)`.
pub fn debias_entropy(y: &[i64], coeffs: &DebiasCoefficients, base: LogBase) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::Input("entropy needs at least one count".into()));
    }
    let volumes = LayerVolumes::new(y.len(), coeffs);
    volumes.warn_if_ill_conditioned("entropy");
    Ok(entropy_with_volumes(y, &volumes, base))
}

pub(crate) fn entropy_with_volumes(y: &[i64], volumes: &LayerVolumes, base: LogBase) -> f64 {
    let s: i64 = y.iter().sum();
    let cells: Vec<(i8, i64, f64)> = volumes.cells().collect();
    let mut acc = KahanSum::new();
    for (v, mult) in distinct_counts(y) {
        let mut per_value = KahanSum::new();
        for &(a, b, vol) in &cells {
            let h = entropy_term(v + i64::from(a), s + b, base);
            if h != 0.0 {
                per_value.add(vol * h);
            }
        }
        acc.add(mult as f64 * per_value.value());
    }
    acc.value()
}

/// Layer-set decomposition of the extended entropy around `y`.
pub fn decompose_entropy(y: &[i64], base: LogBase) -> LocalDecomposition {
    let n = y.len();
    let s: i64 = y.iter().sum();
    let mut d = LocalDecomposition::new();
    for (i, &yi) in y.iter().enumerate() {
        for a in -1i8..=1 {
            for b in -(n as i64)..=n as i64 {
                let h = entropy_term(yi + i64::from(a), s + b, base);
                if h != 0.0 {
                    d.push(
                        h,
                        Region::Layer {
                            dim: n,
                            set: LayerSet { coord: i, a, b },
                        },
                    );
                }
            }
        }
    }
    d
}

/// Per-count partial sums of the separable KL estimator.
struct KlSide {
    /// `Σ vol · u ln u` over cells where the term is defined.
    u_ln_u: f64,
    /// `Σ vol · u`.
    u: f64,
    /// `Σ vol`.
    mass: f64,
    /// `Σ vol · ln u`.
    ln_u: f64,
}

fn kl_side(v: i64, total: i64, cells: &[(i8, i64, f64)]) -> KlSide {
    let (mut u_ln_u, mut u_sum, mut mass, mut ln_u) = (
        KahanSum::new(),
        KahanSum::new(),
        KahanSum::new(),
        KahanSum::new(),
    );
    for &(a, b, vol) in cells {
        let num = v + i64::from(a);
        let den = total + b;
        if num <= 0 || den <= 0 {
            continue;
        }
        let u = (num as f64 / den as f64).min(1.0);
        let l = u.ln();
        u_ln_u.add(vol * u * l);
        u_sum.add(vol * u);
        mass.add(vol);
        ln_u.add(vol * l);
    }
    KlSide {
        u_ln_u: u_ln_u.value(),
        u: u_sum.value(),
        mass: mass.value(),
        ln_u: ln_u.value(),
    }
}

/// Unbiased estimate of the extended KL divergence from the releases `x` and
/// `y` (both noised with the same parameter).
///
/// The defining sum runs over `(i, a₁, b₁, a₂, b₂)` with weight
/// `vol(P^i_{a₁,b₁})·vol(P^i_{a₂,b₂})`. Because `u log(u/v) = u log u - u log v`
/// separates into an `x` part and a `y` part, the inner double sum over
/// `(a₂, b₂)` factors out, giving `O(n²)` work instead of `O(n³)`.
pub fn debias_kl(x: &[i64], y: &[i64], coeffs: &DebiasCoefficients, base: LogBase) -> Result<f64> {
    check_pair(x, y)?;
    let volumes = LayerVolumes::new(x.len(), coeffs);
    volumes.warn_if_ill_conditioned("KL divergence");
    let cells: Vec<(i8, i64, f64)> = volumes.cells().collect();
    let sx: i64 = x.iter().sum();
    let sy: i64 = y.iter().sum();
    let mut x_sides: HashMap<i64, KlSide> = HashMap::new();
    let mut y_sides: HashMap<i64, KlSide> = HashMap::new();
    let mut acc = KahanSum::new();
    for (&xi, &yi) in x.iter().zip(y) {
        let xs = x_sides.entry(xi).or_insert_with(|| kl_side(xi, sx, &cells));
        let (xs_u_ln_u, xs_u) = (xs.u_ln_u, xs.u);
        let ys = y_sides.entry(yi).or_insert_with(|| kl_side(yi, sy, &cells));
        acc.add(xs_u_ln_u * ys.mass);
        acc.add(-xs_u * ys.ln_u);
    }
    Ok(acc.value() / base.ln_base())
}

/// The quadruple sum over `(i, a₁, b₁, a₂, b₂)` evaluated term by term in
/// `O(n³)`; a reference for [`debias_kl`].
pub fn debias_kl_direct(
    x: &[i64],
    y: &[i64],
    coeffs: &DebiasCoefficients,
    base: LogBase,
) -> Result<f64> {
    check_pair(x, y)?;
    let volumes = LayerVolumes::new(x.len(), coeffs);
    let cells: Vec<(i8, i64, f64)> = volumes.cells().collect();
    let sx: i64 = x.iter().sum();
    let sy: i64 = y.iter().sum();
    let mut acc = KahanSum::new();
    for (&xi, &yi) in x.iter().zip(y) {
        for &(a1, b1, v1) in &cells {
            for &(a2, b2, v2) in &cells {
                let term = kl_term(
                    xi + i64::from(a1),
                    sx + b1,
                    yi + i64::from(a2),
                    sy + b2,
                    base,
                );
                if term != 0.0 {
                    acc.add(v1 * v2 * term);
                }
            }
        }
    }
    Ok(acc.value())
}

fn check_pair(x: &[i64], y: &[i64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::structure(format!(
            "KL arguments have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Input(
            "KL divergence needs at least one count".into(),
        ));
    }
    Ok(())
}
