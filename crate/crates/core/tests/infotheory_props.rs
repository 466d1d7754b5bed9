mod common;

use common::*;
use hyperband_core::{conditional_mi, entropy, joint_entropy, joint_mi, mutual_information, DiscreteSeries};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn triple() -> impl Strategy<Value = (DiscreteSeries, DiscreteSeries, DiscreteSeries)> {
    (1usize..=120, 1usize..=6, 1usize..=6, 1usize..=5).prop_flat_map(|(len, na, nb, nc)| {
        let col = |n: usize| proptest::collection::vec(0..n as u32, len).prop_map(move |v| series(v, n));
        (col(na), col(nb), col(nc))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn mi_matches_entropy_identities((x, y, _) in triple()) {
        let (hx, hy) = (entropy(&x).unwrap(), entropy(&y).unwrap());
        let hxy = joint_entropy(&[&x, &y]).unwrap();
        let mi = mutual_information(&x, &y).unwrap();
        prop_assert!((mi - (hx + hy - hxy)).abs() <= TOL);
        prop_assert!((mi - (hx - (hxy - hy))).abs() <= TOL);
    }

    #[test]
    fn mi_is_symmetric((x, y, _) in triple()) {
        let d = mutual_information(&x, &y).unwrap() - mutual_information(&y, &x).unwrap();
        prop_assert!(d.abs() <= 1e-12);
    }

    #[test]
    fn chain_rule((a, b, c) in triple()) {
        let jmi = joint_mi(&a, &b, &c).unwrap();
        let split = mutual_information(&b, &c).unwrap() + conditional_mi(&a, &c, &b).unwrap();
        prop_assert!((jmi - split).abs() <= TOL);
    }

    #[test]
    fn adding_a_variable_never_loses_information((a, b, c) in triple()) {
        prop_assert!(joint_mi(&a, &b, &c).unwrap() >= mutual_information(&b, &c).unwrap() - TOL);
    }

    #[test]
    fn bounds((a, b, c) in triple()) {
        let mi = mutual_information(&a, &b).unwrap();
        let (ha, hb, hc) = (entropy(&a).unwrap(), entropy(&b).unwrap(), entropy(&c).unwrap());
        prop_assert!(mi >= 0.0);
        prop_assert!(mi <= ha.min(hb) + TOL);
        let jmi = joint_mi(&a, &b, &c).unwrap();
        prop_assert!(jmi >= 0.0);
        prop_assert!(jmi <= hc + TOL);
        prop_assert!(conditional_mi(&a, &c, &b).unwrap() >= 0.0);
        prop_assert!(ha <= (a.n_bins() as f64).log2() + TOL);
    }

    #[test]
    fn relabeling_bins_changes_nothing((x, y, _) in triple()) {
        let n = x.n_bins() as u32;
        let flipped = series(x.bins().iter().map(|&v| n - 1 - v).collect(), x.n_bins());
        let d = mutual_information(&x, &y).unwrap() - mutual_information(&flipped, &y).unwrap();
        prop_assert!(d.abs() <= 1e-12);
        prop_assert!((entropy(&x).unwrap() - entropy(&flipped).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn small_series_match_oracle((a, b, c) in triple()) {
        prop_assert!((entropy(&a).unwrap() - oracle_entropy(&a)).abs() <= 1e-12);
        prop_assert!((joint_entropy(&[&a, &b]).unwrap() - oracle_joint_entropy(&a, &b)).abs() <= 1e-12);
        prop_assert!((mutual_information(&a, &c).unwrap() - oracle_mi(&a, &c)).abs() <= 1e-12);
        prop_assert!((conditional_mi(&a, &c, &b).unwrap() - oracle_cmi(&a, &c, &b)).abs() <= 1e-12);
        prop_assert!((joint_mi(&a, &b, &c).unwrap() - oracle_jmi(&a, &b, &c)).abs() <= 1e-12);
    }
}

#[test]
fn duplicate_pair_adds_nothing() {
    let mut r = rng(5);
    for _ in 0..50 {
        let a = random_series(&mut r, 80, 5);
        let c = random_series(&mut r, 80, 3);
        let d = joint_mi(&a, &a, &c).unwrap() - mutual_information(&a, &c).unwrap();
        assert!(d.abs() <= 1e-12);
        assert!(conditional_mi(&a, &c, &a).unwrap().abs() <= 1e-12);
    }
}

#[test]
fn large_alphabet_takes_sparse_path_and_agrees() {
    // 3000 * 3000 * 2 cells is far past the dense limit
    let mut r = rng(9);
    let a = random_series(&mut r, 4000, 3000);
    let b = random_series(&mut r, 4000, 3000);
    let c = random_series(&mut r, 4000, 2);
    let expected = oracle_jmi_sparse(a.bins(), b.bins(), c.bins());
    assert!((joint_mi(&a, &b, &c).unwrap() - expected).abs() <= 1e-10);
    let expected_mi = oracle_mi_sparse(a.bins(), c.bins());
    assert!((mutual_information(&a, &c).unwrap() - expected_mi).abs() <= 1e-10);
}

#[test]
fn length_mismatch_is_an_error() {
    let a = series(vec![0, 1, 0], 2);
    let b = series(vec![0, 1], 2);
    assert!(mutual_information(&a, &b).is_err());
    assert!(joint_mi(&a, &a, &b).is_err());
    assert!(conditional_mi(&a, &b, &a).is_err());
}
