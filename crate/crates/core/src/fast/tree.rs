//! Decision-tree regression functions.

use super::region::{mask_volume, LocalDecomposition, Rectangle, Region};
use crate::{DebiasCoefficients, Error, Result};

/// A binary tree whose internal nodes test `x[var] ≤ threshold` and whose
/// leaves hold real values.
#[derive(Debug, Clone, PartialEq)]
pub enum DecisionTree {
    Leaf(f64),
    Split {
        var: usize,
        threshold: f64,
        yes: Box<DecisionTree>,
        no: Box<DecisionTree>,
    },
}

impl DecisionTree {
    pub fn split(var: usize, threshold: f64, yes: DecisionTree, no: DecisionTree) -> Self {
        DecisionTree::Split {
            var,
            threshold,
            yes: Box::new(yes),
            no: Box::new(no),
        }
    }

    /// Number of internal nodes.
    pub fn internal_nodes(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Split { yes, no, .. } => 1 + yes.internal_nodes() + no.internal_nodes(),
        }
    }

    pub fn evaluate(&self, x: &[i64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                DecisionTree::Leaf(v) => return *v,
                DecisionTree::Split {
                    var,
                    threshold,
                    yes,
                    no,
                } => {
                    node = if (x[*var] as f64) <= *threshold {
                        yes
                    } else {
                        no
                    };
                }
            }
        }
    }

    /// Checks that every tested variable exists in dimension `n` and that
    /// thresholds are not NaN.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            DecisionTree::Leaf(_) => Ok(()),
            DecisionTree::Split {
                var,
                threshold,
                yes,
                no,
            } => {
                if *var >= n {
                    return Err(Error::structure(format!(
                        "tree tests variable {var} but the input has dimension {n}"
                    )));
                }
                if threshold.is_nan() {
                    return Err(Error::structure("tree threshold is NaN"));
                }
                yes.validate(n)?;
                no.validate(n)
            }
        }
    }

    /// Visits every leaf with the half-open interval `(lo, hi]` accumulated for
    /// each coordinate along its path.
    fn for_each_leaf(&self, bounds: &mut [(f64, f64)], visit: &mut impl FnMut(f64, &[(f64, f64)])) {
        match self {
            DecisionTree::Leaf(v) => visit(*v, bounds),
            DecisionTree::Split {
                var,
                threshold,
                yes,
                no,
            } => {
                let saved = bounds[*var];
                bounds[*var].1 = saved.1.min(*threshold);
                yes.for_each_leaf(bounds, visit);
                bounds[*var] = (saved.0.max(*threshold), saved.1);
                no.for_each_leaf(bounds, visit);
                bounds[*var] = saved;
            }
        }
    }
}

/// Offsets `ξ` with `lo < y + ξ ≤ hi`.
fn allowed_offsets(y: i64, (lo, hi): (f64, f64)) -> Vec<i8> {
    (-1i8..=1)
        .filter(|&xi| {
            let v = (y + i64::from(xi)) as f64;
            lo < v && v <= hi
        })
        .collect()
}

fn leaf_rectangle(y: &[i64], bounds: &[(f64, f64)]) -> Rectangle {
    let sets: Vec<Vec<i8>> = y
        .iter()
        .zip(bounds)
        .map(|(&yj, &b)| allowed_offsets(yj, b))
        .collect();
    Rectangle::from_sets(&sets)
}

/// `Σ_leaves value · vol((R_leaf - y) ∩ {-1,0,1}ⁿ)` in `O(n·s)`.
pub fn debias_decision_tree(
    y: &[i64],
    tree: &DecisionTree,
    coeffs: &DebiasCoefficients,
) -> Result<f64> {
    tree.validate(y.len())?;
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); y.len()];
    let mut acc = crate::numeric::KahanSum::new();
    tree.for_each_leaf(&mut bounds, &mut |value, bounds| {
        if value == 0.0 {
            return;
        }
        let mut vol = 1.0;
        for (&yj, &b) in y.iter().zip(bounds) {
            if b.0 == f64::NEG_INFINITY && b.1 == f64::INFINITY {
                continue;
            }
            let mask = allowed_offsets(yj, b)
                .iter()
                .fold(0u8, |m, &xi| m | (1u8 << (xi + 1)));
            vol *= mask_volume(mask, coeffs);
            if vol == 0.0 {
                break;
            }
        }
        acc.add(value * vol);
    });
    Ok(acc.value())
}

/// One rectangle per leaf.
pub fn decompose_decision_tree(y: &[i64], tree: &DecisionTree) -> Result<LocalDecomposition> {
    tree.validate(y.len())?;
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); y.len()];
    let mut d = LocalDecomposition::new();
    tree.for_each_leaf(&mut bounds, &mut |value, bounds| {
        d.push(value, Region::Rectangle(leaf_rectangle(y, bounds)));
    });
    Ok(d)
}
