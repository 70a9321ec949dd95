mod common;

use dlap_debias::dlap::tail_mass;
use dlap_debias::experiments::{read_csv, write_csv, RunMetadata, TrialRecord};
use dlap_debias::fast::entropy::{decompose_entropy, extended_entropy};
use dlap_debias::fast::{
    debias_decision_tree, debias_min, debias_order_stat, evaluate_decomposition, vol_layer,
    LayerSet, LayerVolumes, LogBase,
};
use dlap_debias::generic::{debias_multivariate, debias_univariate, TableFunction};
use dlap_debias::rng::stream_rng;
use dlap_debias::transform::{q_staircase_density, BridgeStaircase};
use dlap_debias::{pmf, DebiasCoefficients};
use proptest::prelude::*;

use common::{random_table, random_tree, rel_diff};

fn coeffs() -> impl Strategy<Value = DebiasCoefficients> {
    (1.0f64..4.0).prop_map(|eps| DebiasCoefficients::new((-eps).exp()).unwrap())
}

fn cube(n: usize) -> Vec<Vec<i8>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-1i8..=1).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn estimator_is_linear_in_f(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0, c in coeffs()) {
        let mut rng = stream_rng(seed, 0);
        let f = random_table(&mut rng, 3);
        let h = random_table(&mut rng, 3);
        let y = [0i64, 1, -1];
        let combo = |v: &[i64]| a * f.value(v) + b * h.value(v);
        let lhs = debias_multivariate(&combo, &c, &y).unwrap();
        let rhs = a * debias_multivariate(&f, &c, &y).unwrap() + b * debias_multivariate(&h, &c, &y).unwrap();
        prop_assert!(rel_diff(lhs, rhs) < 1e-10);
    }

    #[test]
    fn one_coordinate_reduces_to_univariate(seed in any::<u64>(), y in -5i64..5, c in coeffs()) {
        let mut rng = stream_rng(seed, 0);
        let f = random_table(&mut rng, 1);
        let multi = debias_multivariate(&f, &c, &[y]).unwrap();
        let uni = debias_univariate(|v| f.value(&[v]), &c, y);
        prop_assert_eq!(multi, uni);
    }

    #[test]
    fn estimator_commutes_with_shifts(seed in any::<u64>(), t in -4i64..4, c in coeffs()) {
        let mut rng = stream_rng(seed, 0);
        let f = random_table(&mut rng, 2);
        let shifted = |v: &[i64]| f.value(&[v[0] + t, v[1] - t]);
        let a = debias_multivariate(&shifted, &c, &[1, 2]).unwrap();
        let b = debias_multivariate(&f, &c, &[1 + t, 2 - t]).unwrap();
        prop_assert!(rel_diff(a, b) < 1e-12);
    }

    #[test]
    fn layer_volumes_partition_the_cube(n in 1usize..40, c in coeffs()) {
        let volumes = LayerVolumes::new(n, &c);
        let scale = volumes.abs_total();
        prop_assert!((volumes.total() - 1.0).abs() < 1e-13 * scale.max(1.0));
        for (a, b, v) in volumes.cells() {
            let direct = vol_layer(&LayerSet { coord: 0, a, b }, n, &c);
            prop_assert!(rel_diff(v, direct) < 1e-12);
        }
    }

    #[test]
    fn entropy_decomposition_reproduces_f(y in prop::collection::vec(0i64..6, 1..5)) {
        let d = decompose_entropy(&y, LogBase::E);
        for xi in cube(y.len()) {
            let shifted: Vec<i64> = y.iter().zip(&xi).map(|(v, x)| v + i64::from(*x)).collect();
            let expected = extended_entropy(&shifted, LogBase::E);
            prop_assert!((d.value_at(&xi) - expected).abs() < 1e-12, "xi={:?}", xi);
        }
    }

    #[test]
    fn entropy_decomposition_evaluates_to_estimate(y in prop::collection::vec(0i64..6, 1..5), c in coeffs()) {
        let d = decompose_entropy(&y, LogBase::E);
        let via_regions = evaluate_decomposition(&d, &c).unwrap();
        let fast = dlap_debias::fast::debias_entropy(&y, &c, LogBase::E).unwrap();
        prop_assert!(rel_diff(via_regions, fast) < 1e-9);
    }

    #[test]
    fn order_statistics_at_the_ends(y in prop::collection::vec(-20i64..20, 1..40), c in coeffs()) {
        let n = y.len();
        let low = debias_order_stat(&y, 1, &c).unwrap();
        prop_assert!(rel_diff(low, debias_min(&y, &c).unwrap()) < 1e-9);
        let neg: Vec<i64> = y.iter().map(|v| -v).collect();
        let high = debias_order_stat(&y, n, &c).unwrap();
        prop_assert!(rel_diff(high, -debias_min(&neg, &c).unwrap()) < 1e-9);
    }

    #[test]
    fn trees_match_generic(seed in any::<u64>(), internal in 0usize..6, c in coeffs()) {
        let mut rng = stream_rng(seed, 0);
        let y = [2i64, -1, 0];
        let tree = random_tree(&mut rng, &y, internal);
        let f = |v: &[i64]| tree.evaluate(v);
        let generic = debias_multivariate(&f, &c, &y).unwrap();
        prop_assert!(rel_diff(debias_decision_tree(&y, &tree, &c).unwrap(), generic) < 1e-9);
    }

    #[test]
    fn pmf_partial_sums_match_tail(eps in 0.2f64..5.0, r in 0u64..60) {
        let p = (-eps).exp();
        let r_i = r as i64;
        let inside: f64 = (-r_i..=r_i).map(|i| pmf(p, i).unwrap()).sum();
        prop_assert!((inside + tail_mass(p, r) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn staircase_bridge_has_unit_mass(eps in 0.2f64..5.0, gamma in 0.0f64..=0.5) {
        let p = (-eps).exp();
        let b = BridgeStaircase::new(p, gamma).unwrap();
        let mass = 2.0 * gamma * b.inner_height() + 2.0 * (1.0 - 2.0 * gamma) * b.outer_height();
        prop_assert!((mass - 1.0).abs() < 1e-12);
        prop_assert!((b.inner_height() / b.outer_height() - (1.0 + p) / p).abs() < 1e-9 * (1.0 + p) / p);
        prop_assert_eq!(q_staircase_density(1.0, p, gamma).unwrap(), 0.0);
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6, -1e300f64..1e300), 0..20)) {
        let records: Vec<TrialRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, &(t, n, u))| TrialRecord {
                experiment: "profile:k=3".into(),
                epsilon: 0.7,
                trial: i as u64,
                true_value: t,
                naive: n,
                unbiased: u,
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let meta = RunMetadata { p: (-0.7f64).exp(), sensitivity: 1, seed: 9 };
        write_csv(std::fs::File::create(&path).unwrap(), Some(&meta), &records).unwrap();
        prop_assert_eq!(read_csv(&path).unwrap(), records);
    }
}

#[test]
fn finite_tables_outside_their_dilated_box_give_zero() {
    let c = DebiasCoefficients::new(0.3).unwrap();
    let f =
        TableFunction::finite_support(vec![0, 0], vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(debias_multivariate(&f, &c, &[3, 0]).unwrap(), 0.0);
    assert_eq!(debias_multivariate(&f, &c, &[0, -2]).unwrap(), 0.0);
    assert_ne!(debias_multivariate(&f, &c, &[2, 1]).unwrap(), 0.0);
}
