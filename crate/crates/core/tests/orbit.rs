use rankone_core::orbit::*;
use rankone_core::presets;
use rankone_core::spaces::{H2Point, ModelPoint};
use rankone_core::Error;

/// Ball of radius `r` about the root in the rank-2 unit tree: `1 + 4(1 + 3 + … + 3^{⌊r⌋−1})`.
fn tree_ball_size(r: f64) -> usize {
    2 * 3usize.pow(r.floor() as u32) - 1
}

#[test]
fn tree_counts_match_closed_form() {
    let gp = presets::unit_tree(2).unwrap();
    let x = gp.basepoint.clone();
    let ob = enumerate_ball(&gp, &x, &x, 9.0).unwrap();
    assert_eq!(ob.len(), tree_ball_size(9.0));
    let cc = counting_curve(&ob);
    for r in [0.0, 0.5, 1.0, 2.7, 5.0, 8.99, 9.0] {
        assert_eq!(cc.count(r), tree_ball_size(r), "radius {r}");
    }
}

#[test]
fn radius_zero_holds_only_the_identity() {
    for gp in [presets::unit_tree(2).unwrap(), presets::schottky().unwrap()] {
        let x = gp.basepoint.clone();
        let ob = enumerate_ball(&gp, &x, &x, 0.0).unwrap();
        assert_eq!(ob.len(), 1);
        assert!(ob.entries[0].word.is_empty());
        assert_eq!(ob.entries[0].direction, None);
    }
}

#[test]
fn pruned_search_equals_exhaustive_enumeration() {
    let gp = presets::schottky().unwrap();
    let x = gp.basepoint.clone();
    let y = ModelPoint::H2(H2Point::new(0.2, 1.3).unwrap());
    let r = 6.5;
    let ob = enumerate_ball(&gp, &x, &y, r).unwrap();
    let depth = safe_depth(&gp, &x, &y, r, 30).unwrap();
    let oracle: std::collections::BTreeSet<_> = exhaustive_ball(&gp, &x, &y, r, depth).unwrap().into_iter().collect();
    assert_eq!(ob.words(), oracle);
}

#[test]
fn counts_are_symmetric_in_the_two_basepoints() {
    let gp = presets::schottky().unwrap();
    let x = gp.basepoint.clone();
    let y = ModelPoint::H2(H2Point::new(-0.4, 0.8).unwrap());
    let xy = counting_curve(&enumerate_ball(&gp, &x, &y, 8.0).unwrap());
    let yx = counting_curve(&enumerate_ball(&gp, &y, &x, 8.0).unwrap());
    for i in 0..=80 {
        let r = 0.1 * i as f64;
        assert_eq!(xy.count(r), yx.count(r), "radius {r}");
    }
}

#[test]
fn restriction_matches_a_smaller_enumeration() {
    let gp = presets::schottky().unwrap();
    let x = gp.basepoint.clone();
    let big = enumerate_ball(&gp, &x, &x, 9.0).unwrap();
    let small = enumerate_ball(&gp, &x, &x, 6.0).unwrap();
    assert_eq!(big.restricted(6.0).entries, small.entries);
    let cc = counting_curve(&big);
    let counts: Vec<usize> = (0..=90).map(|i| cc.count(0.1 * i as f64)).collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn tree_exponent_is_log_three() {
    let gp = presets::unit_tree(2).unwrap();
    let x = gp.basepoint.clone();
    let cc = counting_curve(&enumerate_ball(&gp, &x, &x, 12.0).unwrap());
    let est = estimate_delta(&cc, (4.0, 12.0)).unwrap();
    assert!((est.delta_hat - 3f64.ln()).abs() < 0.01, "{}", est.delta_hat);
    assert!(!est.polynomial_growth);
}

#[test]
fn schottky_exponent_does_not_depend_on_the_basepoint() {
    let gp = presets::schottky().unwrap();
    let x = gp.basepoint.clone();
    let z = ModelPoint::H2(H2Point::new(0.3, 0.9).unwrap());
    let a = estimate_delta(&counting_curve(&enumerate_ball(&gp, &x, &x, 12.0).unwrap()), (4.0, 12.0)).unwrap();
    let b = estimate_delta(&counting_curve(&enumerate_ball(&gp, &z, &z, 12.0).unwrap()), (4.0, 12.0)).unwrap();
    assert!(a.delta_hat > 0.0 && a.delta_hat < 1.0);
    assert!((a.delta_hat - b.delta_hat).abs() < 0.05, "{} vs {}", a.delta_hat, b.delta_hat);
}

#[test]
fn cyclic_group_grows_polynomially() {
    let gp = presets::cyclic(0.5).unwrap();
    let x = gp.basepoint.clone();
    let ob = enumerate_ball(&gp, &x, &x, 12.0).unwrap();
    // translates at distances 0.5 k on both sides
    assert_eq!(ob.len(), 1 + 2 * 24);
    let est = estimate_delta(&counting_curve(&ob), (4.0, 12.0)).unwrap();
    assert!(est.polynomial_growth);
}

#[test]
fn short_windows_are_rejected() {
    let gp = presets::unit_tree(2).unwrap();
    let x = gp.basepoint.clone();
    let cc = counting_curve(&enumerate_ball(&gp, &x, &x, 6.0).unwrap());
    assert!(matches!(estimate_delta(&cc, (3.0, 6.0)), Err(Error::InvalidInput(_))));
    assert!(matches!(estimate_delta(&cc, (2.0, 7.0)), Err(Error::InvalidInput(_))));
    assert!(matches!(estimate_delta(&cc, (2.0, 6.0)), Err(Error::InsufficientData(_))));
}

#[test]
fn budget_overrun_reports_progress() {
    let gp = presets::unit_tree(2).unwrap();
    let x = gp.basepoint.clone();
    let opts = EnumerationOptions { budget: 1000, ..Default::default() };
    let e = enumerate_ball_with(&gp, &x, &x, 12.0, &opts).unwrap();
    assert!(!e.complete);
    assert!(e.nodes <= 1000);
    assert!(e.completed_depth < 12);
    match enumerate_ball(&gp, &x, &x, 20.0) {
        Err(Error::BudgetExceeded { completed_depth, .. }) => assert!(completed_depth < 20),
        other => panic!("expected a budget error, got {:?}", other.map(|b| b.len())),
    }
}

#[test]
fn tree_shells_contribute_four_thirds_at_the_critical_exponent() {
    let gp = presets::unit_tree(2).unwrap();
    let x = gp.basepoint.clone();
    let ob = enumerate_ball(&gp, &x, &x, 10.0).unwrap();
    let rep = divergence_diagnostic(&ob, 3f64.ln());
    assert_eq!(rep.verdict, DivergenceVerdict::NonVanishing);
    for inc in &rep.increments {
        assert!((inc - 4.0 / 3.0).abs() < 1e-9, "{inc}");
    }
    // a radius of 10 cannot separate s = δ + 0.1 from δ; δ + 0.3 decays visibly
    let above = divergence_diagnostic(&ob, 3f64.ln() + 0.3);
    assert_eq!(above.verdict, DivergenceVerdict::Vanishing);
    // geometric tail: P = 1 + 4/3 Σ q^n with q = e^{-0.1}
    let q = (-0.1f64).exp();
    let closed = 1.0 + 4.0 / 3.0 * q * (1.0 - q.powi(10)) / (1.0 - q);
    assert!((poincare_partial(&ob, 3f64.ln() + 0.1) - closed).abs() < 1e-9);
}

#[test]
fn csv_lists_every_entry() {
    let gp = presets::unit_tree(2).unwrap();
    let x = gp.basepoint.clone();
    let ob = enumerate_ball(&gp, &x, &x, 2.0).unwrap();
    let mut buf = Vec::new();
    ob.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + ob.len());
}
