use rankone_core::orbit::{enumerate_ball, estimate_delta, counting_curve, OrbitBall};
use rankone_core::presets;
use rankone_core::psmeasure::*;
use rankone_core::spaces::{H2Point, ModelPoint, ModelSpace, Source};
use rankone_core::word::Word;
use rankone_core::Error;

fn log3() -> f64 {
    3f64.ln()
}

fn cell(bp: &BoundaryPartition, name: &str) -> usize {
    (0..bp.len()).find(|&i| bp.describe(i) == name).unwrap_or_else(|| panic!("no cell {name}"))
}

fn tree_ball(x: &str, r: f64) -> OrbitBall {
    let gp = presets::unit_tree(2).unwrap();
    let root = gp.basepoint.clone();
    let x = gp.act(&Word::parse(x, 2).unwrap(), &root).unwrap();
    enumerate_ball(&gp, &x, &root, r).unwrap()
}

fn schottky_ball(x: ModelPoint, r: f64) -> OrbitBall {
    let gp = presets::schottky().unwrap();
    let y = gp.basepoint.clone();
    enumerate_ball(&gp, &x, &y, r).unwrap()
}

#[test]
fn partitions_have_the_expected_cell_counts() {
    assert_eq!(build_partition(&ModelSpace::H2, 3).unwrap().len(), 8);
    let tree = presets::unit_tree(2).unwrap().space;
    assert_eq!(build_partition(&tree, 1).unwrap().len(), 4);
    assert_eq!(build_partition(&tree, 2).unwrap().len(), 12);
    assert_eq!(build_partition(&tree, 3).unwrap().len(), 36);
    assert!(matches!(build_partition(&tree, 0), Err(Error::InvalidInput(_))));
}

#[test]
fn midpoints_lie_in_their_own_cells() {
    let tree = presets::unit_tree(2).unwrap().space;
    for bp in [
        build_partition(&ModelSpace::H2, 5).unwrap(),
        build_partition(&ModelSpace::H2, 4).unwrap().with_offset(-0.7).unwrap(),
        build_partition(&tree, 3).unwrap(),
    ] {
        for i in 0..bp.len() {
            assert_eq!(bp.lookup(&bp.midpoint(i)).unwrap(), i);
            for p in bp.samples(i, 9) {
                assert_eq!(bp.lookup(&p).unwrap(), i);
            }
        }
    }
}

#[test]
fn tree_measure_is_uniform_on_first_letters() {
    let ob = tree_ball("", 9.0);
    let bp = build_partition(&ob.space, 1).unwrap();
    let mu = patterson_sullivan(&ob, log3() + 0.02, log3(), &bp).unwrap();
    for w in &mu.weights {
        assert!((w - 0.25).abs() < 1e-12, "{w}");
    }
    assert!((mu.total - 1.0).abs() < 1e-12);
}

#[test]
fn exponent_must_exceed_the_critical_estimate() {
    let ob = tree_ball("", 4.0);
    let bp = build_partition(&ob.space, 1).unwrap();
    assert!(matches!(patterson_sullivan(&ob, log3(), log3(), &bp), Err(Error::ExponentTooSmall { .. })));
}

#[test]
fn coarsening_agrees_with_a_direct_coarse_measure() {
    let ob = schottky_ball(ModelPoint::H2(H2Point::I), 9.0);
    let fine = build_partition(&ob.space, 7).unwrap();
    let coarse = build_partition(&ob.space, 3).unwrap();
    let s = 0.95;
    let a = patterson_sullivan(&ob, s, 0.88, &fine).unwrap().coarsened(&fine, &coarse).unwrap();
    let b = patterson_sullivan(&ob, s, 0.88, &coarse).unwrap();
    for (u, v) in a.weights.iter().zip(&b.weights) {
        assert!((u - v).abs() < 1e-12);
    }
}

#[test]
fn tree_measures_change_conformally() {
    let s = log3() + 0.02;
    let ob_x = tree_ball("", 10.0);
    let ob_x2 = tree_ball("a", 10.0);
    let bp = build_partition(&ob_x.space, 2).unwrap();
    let rep = conformality_residual(&ob_x, &ob_x2, s, &bp, 1e-6).unwrap();
    assert_eq!(rep.retained_cells, 12);
    assert!(rep.max_residual < 1e-9, "{}", rep.max_residual);
}

#[test]
fn schottky_measures_change_conformally() {
    let x = ModelPoint::H2(H2Point::I);
    let x2 = ModelPoint::H2(H2Point::new(0.0, 1f64.exp()).unwrap());
    let ob_x = schottky_ball(x, 12.0);
    let ob_x2 = schottky_ball(x2, 12.0);
    let dh = estimate_delta(&counting_curve(&ob_x), (4.0, 12.0)).unwrap().delta_hat;
    let s = default_exponent(dh, 12.0);
    let bp = build_partition(&ob_x.space, 10).unwrap();
    let rep = conformality_residual(&ob_x, &ob_x2, s, &bp, 1e-4).unwrap();
    assert!(rep.retained_cells > 20);
    assert!(rep.max_residual < 0.05, "{}", rep.max_residual);
    let same = conformality_residual(&ob_x, &ob_x, s, &bp, 1e-4).unwrap();
    assert!(same.max_residual < 1e-12);
}

#[test]
fn tree_measures_are_equivariant() {
    // μ_{a·o}(a·E) = μ_o(E): the ball about a·o is the a-translate of the ball about o
    let s = log3() + 0.05;
    let ob_o = tree_ball("", 8.0);
    let ob_a = tree_ball("a", 8.0);
    let bp = build_partition(&ob_o.space, 2).unwrap();
    let mu_o = patterson_sullivan(&ob_o, s, log3(), &bp).unwrap();
    let mu_a = patterson_sullivan(&ob_a, s, log3(), &bp).unwrap();
    for (e, ae) in [("ba", "aba"), ("bb", "abb"), ("BA", "aBA"), ("aa", "aaa")] {
        let lhs = mu_o.weights[cell(&bp, e)];
        let deep = build_partition(&ob_o.space, 3).unwrap();
        let rhs = patterson_sullivan(&ob_a, s, log3(), &deep).unwrap().weights[cell(&deep, ae)];
        assert!((lhs - rhs).abs() < 1e-12, "{e}: {lhs} vs {rhs}");
    }
    // a·(cylinder A) is the complement of cylinder a
    let lhs = ["Ab", "AB", "AA"].iter().map(|c| mu_o.weights[cell(&bp, c)]).sum::<f64>();
    let rhs = 1.0 - ["aa", "ab", "aB"].iter().map(|c| mu_a.weights[cell(&bp, c)]).sum::<f64>();
    assert!((lhs - rhs).abs() < 1e-12);
}

#[test]
fn schottky_support_lies_on_the_ping_pong_domains() {
    let gp = presets::schottky().unwrap();
    let ob = schottky_ball(gp.basepoint.clone(), 10.0);
    let bp = build_partition(&ob.space, 8).unwrap();
    let mu = patterson_sullivan(&ob, 0.98, 0.88, &bp).unwrap();
    let mut allowed = std::collections::BTreeSet::new();
    for d in &gp.domains {
        allowed.extend(bp.cells_meeting(d).unwrap());
    }
    // the identity has no direction; every other direction ends in a domain
    for i in 0..bp.len() {
        if mu.weights[i] > 0.0 {
            assert!(allowed.contains(&i), "cell {} carries mass", bp.describe(i));
        }
    }
    assert!(allowed.len() < bp.len());
    let hits = limit_set_sample(&ob, &bp).unwrap().hit_cells();
    let support: Vec<usize> = (0..bp.len()).filter(|&i| mu.weights[i] > 0.0).collect();
    assert_eq!(hits, support);
}

#[test]
fn large_shadows_carry_all_the_mass() {
    let ob = schottky_ball(ModelPoint::H2(H2Point::I), 9.0);
    let bp = build_partition(&ob.space, 6).unwrap();
    let mu = patterson_sullivan(&ob, 0.95, 0.88, &bp).unwrap();
    let z = ModelPoint::H2(H2Point::new(0.5, 2.0).unwrap());
    let d = ob.space.distance(&ob.x, &z).unwrap();
    let full = shadow_measure(&mu, &bp, d + 0.5, &Source::Point(ob.x.clone()), &z).unwrap();
    assert!((full.mass - 1.0).abs() < 1e-12 && full.uncertainty == 0.0);
    let part = shadow_measure(&mu, &bp, 0.5, &Source::Point(ob.x.clone()), &z).unwrap();
    assert!(part.mass < 1.0);
    assert!(part.uncertainty <= part.mass);
}

#[test]
fn current_is_symmetric_off_the_diagonal() {
    let ob = tree_ball("", 8.0);
    let bp = build_partition(&ob.space, 2).unwrap();
    let mu = patterson_sullivan(&ob, log3() + 0.05, log3(), &bp).unwrap();
    let cur = gromov_current(&mu, &mu, &bp, log3()).unwrap();
    assert_eq!(cur.pairs.len(), 12 * 11);
    for &(a, b, w) in &cur.pairs {
        assert_ne!(a, b);
        assert!((w - cur.weight(b, a)).abs() < 1e-15);
    }
    // Gr_o(ab…, aB…) = 1 for the root, so that pair gets e^{2 log 3} = 9
    let (ab, a_b) = (cell(&bp, "ab"), cell(&bp, "aB"));
    assert!((cur.weight(ab, a_b) - 9.0 * mu.weights[ab] * mu.weights[a_b]).abs() < 1e-12);
    // disjoint first letters meet at the root
    let (ab, ba) = (cell(&bp, "ab"), cell(&bp, "ba"));
    assert!((cur.weight(ab, ba) - mu.weights[ab] * mu.weights[ba]).abs() < 1e-12);
}

#[test]
fn csv_output_has_a_row_per_cell() {
    let ob = tree_ball("", 4.0);
    let bp = build_partition(&ob.space, 2).unwrap();
    let mu = patterson_sullivan(&ob, 1.2, log3(), &bp).unwrap();
    let mut buf = Vec::new();
    mu.write_csv(&mut buf, &bp).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 13);
}
