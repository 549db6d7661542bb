use std::f64::consts::PI;

use rankone_core::sampling;
use rankone_core::spaces::{BoundaryPoint, CayleyTree, E2Point, H2Point, ModelPoint, ModelSpace, Sign, Source};

fn h2(x: f64, y: f64) -> ModelPoint {
    ModelPoint::H2(H2Point::new(x, y).unwrap())
}

#[test]
fn pittet_pair_lies_in_both_refined_shadows_but_not_in_the_corridor() {
    let s = ModelSpace::H2;
    let x = h2(1.0, 1.0);
    let e4 = 4f64.exp();
    let y = h2(e4, e4);
    let r = s.distance(&x, &h2(0.0, 2f64.sqrt())).unwrap();
    assert!((r - s.distance(&y, &h2(0.0, 2f64.sqrt() * e4)).unwrap()).abs() < 1e-12);
    // σ(t) = e^t i runs from 0 (angle π) to ∞ (angle 0)
    let (minus, plus) = (BoundaryPoint::H2(PI), BoundaryPoint::H2(0.0));
    assert!(s.refined_shadow_contains(r, &y, &x, &minus, Sign::Minus).unwrap().value);
    assert!(s.refined_shadow_contains(r, &x, &y, &plus, Sign::Minus).unwrap().value);
    let corridor = s.corridor_contains(r, &x, &y, &minus, &plus).unwrap();
    assert!(!corridor.value);
    // a slightly larger radius lets the tangent line through
    assert!(s.corridor_contains(r * 1.01, &x, &y, &minus, &plus).unwrap().value);
}

#[test]
fn euclidean_shadows_do_not_converge() {
    let s = ModelSpace::E2;
    let o = ModelPoint::E2(E2Point { x: 0.0, y: 0.0 });
    let r = 0.7;
    let from_pi = Source::Boundary(BoundaryPoint::E2(PI));
    assert!(s.shadow_contains(r, &from_pi, &o, &BoundaryPoint::E2(0.0)).unwrap().value);
    for eta in [0.01, -0.01, 0.5, 2.0, 4.0] {
        assert!(!s.shadow_contains(r, &from_pi, &o, &BoundaryPoint::E2(eta)).unwrap().value);
    }
    for n in 1..=5 {
        let phi = 1.0 / n as f64;
        let z = ModelPoint::E2(E2Point { x: -r * n as f64 * phi.cos(), y: -r * n as f64 * phi.sin() });
        let at = |t: f64| s.refined_shadow_contains(r, &z, &o, &BoundaryPoint::E2(t), Sign::Minus).unwrap().value;
        assert!(at(phi), "n = {n}");
        assert!(!at(phi + 1e-6) && !at(phi - 1e-6) && !at(0.0) && !at(phi + PI), "n = {n}");
    }
}

#[test]
fn tree_shadows_follow_the_ceiling_formula() {
    let space = ModelSpace::Tree(CayleyTree::unit(2));
    let mut rng = sampling::rng(7);
    let mut seen = [0usize; 4];
    for _ in 0..2000 {
        let xi = sampling::boundary_point(&mut rng, &space);
        let eta = sampling::boundary_point(&mut rng, &space);
        if space.same_boundary(&xi, &eta) {
            continue;
        }
        let ModelPoint::Tree(p) = sampling::point(&mut rng, &space, 3.0) else { unreachable!() };
        let x = ModelPoint::Tree(rankone_core::spaces::TreePoint::vertex(p.vertex));
        let d = space.gromov_product(&x, &xi, &eta).unwrap();
        seen[(d as usize).min(3)] += 1;
        for r in [0.5, 1.0, 1.7, 2.0] {
            let inside = space.shadow_contains(r, &Source::Boundary(xi.clone()), &x, &eta).unwrap();
            // d = r is the tangent case, flagged but still decided as outside
            assert_eq!(inside.ambiguous, d == r, "r = {r}, d = {d}");
            assert_eq!(inside.value, d <= r.ceil() - 1.0, "r = {r}, d = {d}");
        }
    }
    assert!(seen.iter().all(|&c| c > 20), "{seen:?}");
}
