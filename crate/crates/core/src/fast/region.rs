//! Regions of the cube `{-1,0,1}ⁿ` and their volumes
//! `vol(S) = Σ_{ξ ∈ S} Π_j α_{ξ_j}`.

use std::collections::HashMap;

use crate::numeric::{FactorialTable, KahanSum, MixedSum, WideFloat};
use crate::{DebiasCoefficients, Error, Result};

const MINUS: u8 = 0b001;
const ZERO: u8 = 0b010;
const PLUS: u8 = 0b100;
const FULL: u8 = MINUS | ZERO | PLUS;

fn offset_bit(xi: i8) -> u8 {
    match xi {
        -1 => MINUS,
        0 => ZERO,
        1 => PLUS,
        _ => panic!("offset {xi} outside {{-1, 0, 1}}"),
    }
}

/// A Cartesian product `R_1 × ⋯ × R_n` with every `R_j ⊆ {-1, 0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rectangle {
    masks: Vec<u8>,
}

impl Rectangle {
    pub fn full(n: usize) -> Self {
        Rectangle {
            masks: vec![FULL; n],
        }
    }

    /// Builds a rectangle from the allowed offsets of each coordinate. A
    /// coordinate with no allowed offset makes the rectangle empty.
    pub fn from_sets<S: AsRef<[i8]>>(sets: &[S]) -> Self {
        let masks = sets
            .iter()
            .map(|s| s.as_ref().iter().fold(0u8, |m, &xi| m | offset_bit(xi)))
            .collect();
        Rectangle { masks }
    }

    /// Restricts coordinate `j` to `allowed`.
    pub fn restrict(mut self, j: usize, allowed: &[i8]) -> Self {
        self.masks[j] = allowed.iter().fold(0u8, |m, &xi| m | offset_bit(xi));
        self
    }

    pub fn dim(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.contains(&0)
    }

    pub fn allows(&self, j: usize, xi: i8) -> bool {
        self.masks[j] & offset_bit(xi) != 0
    }

    pub fn contains(&self, xi: &[i8]) -> bool {
        xi.len() == self.dim() && xi.iter().enumerate().all(|(j, &v)| self.allows(j, v))
    }
}

/// Volume of one coordinate set.
pub(crate) fn mask_volume(mask: u8, coeffs: &DebiasCoefficients) -> f64 {
    match mask {
        // α_{-1} + α_0 + α_1 = 1 exactly.
        FULL => 1.0,
        _ => {
            let mut v = 0.0;
            if mask & ZERO != 0 {
                v += coeffs.alpha_zero();
            }
            if mask & MINUS != 0 {
                v += coeffs.alpha_one();
            }
            if mask & PLUS != 0 {
                v += coeffs.alpha_one();
            }
            v
        }
    }
}

/// `vol(R) = Π_j Σ_{v ∈ R_j} α_v`; zero for an empty rectangle.
pub fn vol_rectangle(r: &Rectangle, coeffs: &DebiasCoefficients) -> f64 {
    if r.is_empty() {
        return 0.0;
    }
    r.masks
        .iter()
        .filter(|&&m| m != FULL)
        .map(|&m| mask_volume(m, coeffs))
        .product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn offset(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Vectors over the coordinates `indices` with exactly `count` entries equal
/// to `+1` (sign `Plus`) or `-1` (sign `Minus`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricSlice {
    pub indices: Vec<usize>,
    pub count: usize,
    pub sign: Sign,
}

impl SymmetricSlice {
    pub fn new(indices: Vec<usize>, count: usize, sign: Sign) -> Result<Self> {
        if count > indices.len() {
            return Err(Error::domain(format!(
                "slice count {count} exceeds its {} coordinates",
                indices.len()
            )));
        }
        Ok(SymmetricSlice {
            indices,
            count,
            sign,
        })
    }

    pub fn contains(&self, xi: &[i8]) -> bool {
        let target = self.sign.offset();
        self.indices.iter().filter(|&&j| xi[j] == target).count() == self.count
    }
}

/// `C(size, count) · α_1^count · (α_0 + α_1)^(size - count)`, identical for
/// both signs.
pub fn vol_symmetric(s: &SymmetricSlice, coeffs: &DebiasCoefficients) -> Result<f64> {
    let size = s.indices.len();
    if s.count > size {
        return Err(Error::domain(format!(
            "slice count {} exceeds its {size} coordinates",
            s.count
        )));
    }
    let table = FactorialTable::new(size);
    Ok(symmetric_volume_wide(size, s.count, coeffs, &table).to_f64())
}

pub(crate) fn symmetric_volume_wide(
    size: usize,
    count: usize,
    coeffs: &DebiasCoefficients,
    table: &FactorialTable,
) -> WideFloat {
    let one = WideFloat::from_f64(coeffs.alpha_one());
    let rest = WideFloat::from_f64(coeffs.alpha_zero() + coeffs.alpha_one());
    table
        .binomial(size as i64, count as i64)
        .mul(one.powi(count as u64))
        .mul(rest.powi((size - count) as u64))
}

/// `P^i_{a,b}`: vectors with `ξ_i = a` and `Σ_j ξ_j = b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSet {
    pub coord: usize,
    pub a: i8,
    pub b: i64,
}

impl LayerSet {
    pub fn contains(&self, xi: &[i8]) -> bool {
        xi[self.coord] == self.a && xi.iter().map(|&v| i64::from(v)).sum::<i64>() == self.b
    }
}

/// Volume of `P^i_{a,b}` in dimension `n` (independent of `i`):
///
/// ```text
/// Σ_{r ≡ b (mod 2)} α_0^(n-r) α_1^r · (n-1)! / ((n-1-r+|a|)! ((b-a+r-|a|)/2)! ((r-|a|-b+a)/2)!)
/// ```
///
/// where a multinomial with a negative part is zero.
pub fn vol_layer(l: &LayerSet, n: usize, coeffs: &DebiasCoefficients) -> f64 {
    if n == 0 || l.a.abs() > 1 {
        return 0.0;
    }
    let table = FactorialTable::new(n);
    let powers = AlphaPowers::new(n, coeffs);
    layer_volume_sum(n, l.a, l.b, &powers, &table).value()
}

/// `α_0^k` and `α_1^k` for `k = 0..=n`.
struct AlphaPowers {
    zero: Vec<WideFloat>,
    one: Vec<WideFloat>,
}

impl AlphaPowers {
    fn new(n: usize, coeffs: &DebiasCoefficients) -> Self {
        let table = |base: f64| {
            let base = WideFloat::from_f64(base);
            let mut v = Vec::with_capacity(n + 1);
            let mut acc = WideFloat::ONE;
            for _ in 0..=n {
                v.push(acc);
                acc = acc.mul(base);
            }
            v
        };
        AlphaPowers {
            zero: table(coeffs.alpha_zero()),
            one: table(coeffs.alpha_one()),
        }
    }
}

fn layer_volume_sum(
    n: usize,
    a: i8,
    b: i64,
    powers: &AlphaPowers,
    table: &FactorialTable,
) -> MixedSum {
    let n_i = n as i64;
    let a = i64::from(a);
    let abs_a = a.abs();
    let mut acc = MixedSum::new();
    if b.abs() > n_i {
        return acc;
    }
    // Both half-counts must be non-negative: r ≥ |a| + |b - a|.
    let r_min = abs_a + (b - a).abs();
    let mut r = r_min;
    while r <= n_i {
        let plus = (b - a + r - abs_a) / 2;
        let minus = (r - abs_a - b + a) / 2;
        let zeros = n_i - 1 - r + abs_a;
        let count = table.multinomial(n_i - 1, &[zeros, plus, minus]);
        if !count.is_zero() {
            acc.add_product(&[
                count,
                powers.zero[(n_i - r) as usize],
                powers.one[r as usize],
            ]);
        }
        r += 2;
    }
    acc
}

/// Volumes of every `P^i_{a,b}` for one dimension, indexed by `(a, b)`.
#[derive(Debug, Clone)]
pub struct LayerVolumes {
    n: usize,
    // volumes[a + 1][b + n]
    volumes: [Vec<f64>; 3],
    used_log_path: bool,
}

impl LayerVolumes {
    pub fn new(n: usize, coeffs: &DebiasCoefficients) -> Self {
        let table = FactorialTable::new(n.max(1));
        let powers = AlphaPowers::new(n, coeffs);
        let mut used_log_path = false;
        let mut row = |a: i8| -> Vec<f64> {
            (-(n as i64)..=n as i64)
                .map(|b| {
                    let sum = layer_volume_sum(n, a, b, &powers, &table);
                    used_log_path |= sum.used_log_path();
                    sum.value()
                })
                .collect()
        };
        let volumes = if n == 0 {
            [vec![0.0], vec![0.0], vec![0.0]]
        } else {
            [row(-1), row(0), row(1)]
        };
        LayerVolumes {
            n,
            volumes,
            used_log_path,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: i8, b: i64) -> f64 {
        if a.abs() > 1 || b.abs() > self.n as i64 {
            return 0.0;
        }
        self.volumes[(a + 1) as usize][(b + self.n as i64) as usize]
    }

    /// Non-zero cells as `(a, b, volume)`.
    pub fn cells(&self) -> impl Iterator<Item = (i8, i64, f64)> + '_ {
        let n = self.n as i64;
        (-1i8..=1).flat_map(move |a| {
            (-n..=n).filter_map(move |b| {
                let v = self.get(a, b);
                (v != 0.0).then_some((a, b, v))
            })
        })
    }

    /// Whether any volume needed log-space accumulation.
    pub fn used_log_path(&self) -> bool {
        self.used_log_path
    }

    /// Compensated sum of all volumes, which is 1 in exact arithmetic.
    pub fn total(&self) -> f64 {
        crate::numeric::kahan_sum(self.volumes.iter().flatten().copied())
    }

    /// Sum of absolute volumes. Sums weighted by these volumes lose about
    /// `log10(abs_total)` decimal digits to cancellation.
    pub fn abs_total(&self) -> f64 {
        self.volumes.iter().flatten().map(|v| v.abs()).sum()
    }

    /// Logs a warning when cancellation leaves no trustworthy digits.
    pub(crate) fn warn_if_ill_conditioned(&self, what: &str) {
        let scale = self.abs_total();
        if !(scale * f64::EPSILON < 1e-3) {
            log::warn!(
                "{what}: layer volumes reach {scale:.3e} in absolute sum for n={}; \
                 the f64 result carries little or no precision",
                self.n
            );
        }
    }
}

/// One region kind of a local decomposition, tagged with its ambient
/// dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Rectangle(Rectangle),
    /// A product of symmetric slices over pairwise disjoint coordinate sets,
    /// unconstrained on the remaining coordinates.
    Symmetric {
        dim: usize,
        slices: Vec<SymmetricSlice>,
    },
    Layer {
        dim: usize,
        set: LayerSet,
    },
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Rectangle(r) => r.dim(),
            Region::Symmetric { dim, .. } | Region::Layer { dim, .. } => *dim,
        }
    }

    pub fn contains(&self, xi: &[i8]) -> bool {
        match self {
            Region::Rectangle(r) => r.contains(xi),
            Region::Symmetric { slices, .. } => slices.iter().all(|s| s.contains(xi)),
            Region::Layer { set, .. } => set.contains(xi),
        }
    }
}

/// `f(y + ξ) = Σ_i c_i · 1[ξ ∈ S_i]` for all `ξ` in the cube.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalDecomposition {
    pub terms: Vec<(f64, Region)>,
}

impl LocalDecomposition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, coefficient: f64, region: Region) {
        self.terms.push((coefficient, region));
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The represented function at offset `ξ`.
    pub fn value_at(&self, xi: &[i8]) -> f64 {
        self.terms
            .iter()
            .filter(|(_, r)| r.contains(xi))
            .map(|(c, _)| *c)
            .sum::<KahanSum>()
            .value()
    }
}

/// `g(y) = Σ_i c_i · vol(S_i)`.
pub fn evaluate_decomposition(d: &LocalDecomposition, coeffs: &DebiasCoefficients) -> Result<f64> {
    let Some((_, first)) = d.terms.first() else {
        return Ok(0.0);
    };
    let dim = first.dim();
    let mut layer_cache: HashMap<(i8, i64), f64> = HashMap::new();
    let mut table: Option<FactorialTable> = None;
    let mut acc = MixedSum::new();
    for (c, region) in &d.terms {
        if region.dim() != dim {
            return Err(Error::structure(format!(
                "decomposition mixes dimensions {dim} and {}",
                region.dim()
            )));
        }
        let vol = match region {
            Region::Rectangle(r) => WideFloat::from_f64(vol_rectangle(r, coeffs)),
            Region::Symmetric { slices, .. } => {
                let t = table.get_or_insert_with(|| FactorialTable::new(dim.max(1)));
                let mut used = vec![false; dim];
                let mut v = WideFloat::ONE;
                for s in slices {
                    if s.count > s.indices.len() {
                        return Err(Error::domain("slice count exceeds its coordinates"));
                    }
                    for &j in &s.indices {
                        if j >= dim || std::mem::replace(&mut used[j], true) {
                            return Err(Error::structure(
                                "symmetric slices must use distinct in-range coordinates",
                            ));
                        }
                    }
                    v = v.mul(symmetric_volume_wide(s.indices.len(), s.count, coeffs, t));
                }
                v
            }
            Region::Layer { set, .. } => {
                if set.coord >= dim {
                    return Err(Error::structure("layer coordinate out of range"));
                }
                let v = *layer_cache
                    .entry((set.a, set.b))
                    .or_insert_with(|| vol_layer(set, dim, coeffs));
                WideFloat::from_f64(v)
            }
        };
        acc.add_product(&[WideFloat::from_f64(*c), vol]);
    }
    Ok(acc.value())
}

/// Calls `visit` with every `ξ ∈ {-1,0,1}ⁿ`.
#[cfg(test)]
pub(crate) fn for_each_offset(n: usize, mut visit: impl FnMut(&[i8])) {
    let mut xi = vec![-1i8; n];
    loop {
        visit(&xi);
        let mut j = 0;
        loop {
            if j == n {
                return;
            }
            if xi[j] < 1 {
                xi[j] += 1;
                break;
            }
            xi[j] = -1;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(p: f64) -> DebiasCoefficients {
        DebiasCoefficients::new(p).unwrap()
    }

    fn brute_volume(n: usize, c: &DebiasCoefficients, member: impl Fn(&[i8]) -> bool) -> f64 {
        let mut acc = KahanSum::new();
        for_each_offset(n, |xi| {
            if member(xi) {
                acc.add(xi.iter().map(|&v| c.alpha(v)).product());
            }
        });
        acc.value()
    }

    #[test]
    fn rectangle_volumes() {
        let c = coeffs(0.5);
        assert_eq!(vol_rectangle(&Rectangle::full(5), &c), 1.0);
        for n in 1..5 {
            let r = Rectangle::from_sets(&vec![[0i8, 1]; n]);
            assert_eq!(vol_rectangle(&r, &c), 3f64.powi(n as i32));
        }
        let empty = Rectangle::full(3).restrict(1, &[]);
        assert!(empty.is_empty());
        assert_eq!(vol_rectangle(&empty, &c), 0.0);
        let r = Rectangle::full(3).restrict(0, &[-1]).restrict(2, &[0, 1]);
        let brute = brute_volume(3, &c, |xi| r.contains(xi));
        assert!((vol_rectangle(&r, &c) - brute).abs() < 1e-12);
    }

    #[test]
    fn symmetric_volumes() {
        let c = coeffs(0.5);
        let s = SymmetricSlice::new(vec![0, 1], 1, Sign::Minus).unwrap();
        assert!((vol_symmetric(&s, &c).unwrap() + 12.0).abs() < 1e-12);
        let zero = SymmetricSlice::new(vec![0, 1, 2], 0, Sign::Plus).unwrap();
        assert!((vol_symmetric(&zero, &c).unwrap() - 27.0).abs() < 1e-12);
        assert!(SymmetricSlice::new(vec![0], 2, Sign::Plus).is_err());
        let bad = SymmetricSlice {
            indices: vec![0],
            count: 2,
            sign: Sign::Plus,
        };
        assert!(vol_symmetric(&bad, &c).is_err());

        let c = coeffs(0.3);
        for size in 0..6 {
            let total: f64 = (0..=size)
                .map(|a| {
                    vol_symmetric(
                        &SymmetricSlice::new((0..size).collect(), a, Sign::Minus).unwrap(),
                        &c,
                    )
                    .unwrap()
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
            for a in 0..=size {
                for sign in [Sign::Plus, Sign::Minus] {
                    let s = SymmetricSlice::new((0..size).collect(), a, sign).unwrap();
                    let brute = brute_volume(size, &c, |xi| s.contains(xi));
                    assert!((vol_symmetric(&s, &c).unwrap() - brute).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn layer_volumes_one_dimension() {
        let c = coeffs(0.4);
        for a in -1i8..=1 {
            for b in -1i64..=1 {
                let v = vol_layer(&LayerSet { coord: 0, a, b }, 1, &c);
                let expected = if b == i64::from(a) { c.alpha(a) } else { 0.0 };
                assert!((v - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn layer_volumes_match_enumeration() {
        for p in [0.2, 0.5, 0.8] {
            let c = coeffs(p);
            for n in 1..=6 {
                let table = LayerVolumes::new(n, &c);
                for a in -1i8..=1 {
                    for b in -(n as i64)..=n as i64 {
                        let set = LayerSet { coord: n - 1, a, b };
                        let brute = brute_volume(n, &c, |xi| set.contains(xi));
                        let scale = 1.0 + brute.abs();
                        assert!(
                            (table.get(a, b) - brute).abs() < 1e-12 * scale,
                            "n={n} a={a} b={b}"
                        );
                    }
                }
                // Σ vol = 1 is a cancellation of terms as large as Σ |vol|.
                let scale: f64 = table.cells().map(|(_, _, v)| v.abs()).sum();
                assert!((table.total() - 1.0).abs() < 1e-13 * scale, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn decomposition_edge_cases() {
        let c = coeffs(0.5);
        assert_eq!(
            evaluate_decomposition(&LocalDecomposition::new(), &c).unwrap(),
            0.0
        );
        let mut d = LocalDecomposition::new();
        d.push(7.5, Region::Rectangle(Rectangle::full(3)));
        assert_eq!(evaluate_decomposition(&d, &c).unwrap(), 7.5);
        d.push(1.0, Region::Rectangle(Rectangle::full(2)));
        assert!(matches!(
            evaluate_decomposition(&d, &c),
            Err(Error::Structure(_))
        ));
    }
}
