use proptest::prelude::*;
use rankone_core::groups::{apply_boundary, apply_point, Classification};
use rankone_core::sampling::{self, Rng64};
use rankone_core::spaces::{BoundaryPoint, CayleyTree, ModelSpace};

const TOL: f64 = 1e-9;

fn spaces() -> Vec<ModelSpace> {
    vec![
        ModelSpace::H2,
        ModelSpace::Tree(CayleyTree::unit(2)),
        ModelSpace::Tree(CayleyTree::new(vec![0.7, 1.3, 2.0]).unwrap()),
        ModelSpace::E2,
    ]
}

fn group_spaces() -> Vec<ModelSpace> {
    spaces().into_iter().filter(|s| !matches!(s, ModelSpace::E2)).collect()
}

/// Two distinct boundary points, antipodal in the plane so that a line
/// joins them.
fn joinable_pair(rng: &mut Rng64, space: &ModelSpace) -> (BoundaryPoint, BoundaryPoint) {
    loop {
        let xi = sampling::boundary_point(rng, space);
        let eta = match (&xi, space) {
            (BoundaryPoint::E2(t), _) => BoundaryPoint::E2((t + std::f64::consts::PI) % std::f64::consts::TAU),
            _ => sampling::boundary_point(rng, space),
        };
        if space.boundary_gap(&xi, &eta).unwrap() > 1e-3 {
            return (xi, eta);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn busemann_cocycle(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        for space in spaces() {
            let xi = sampling::boundary_point(&mut rng, &space);
            let [x, y, z] = [0, 1, 2].map(|_| sampling::point(&mut rng, &space, 3.0));
            let lhs = space.busemann(&xi, &x, &z).unwrap();
            let rhs = space.busemann(&xi, &x, &y).unwrap() + space.busemann(&xi, &y, &z).unwrap();
            prop_assert!((lhs - rhs).abs() < TOL, "{:?}: {} vs {}", space.kind(), lhs, rhs);
            prop_assert!(lhs.abs() <= space.distance(&x, &z).unwrap() + TOL);
        }
    }

    #[test]
    fn lines_have_unit_speed_and_flow_shifts_hopf_time(seed in any::<u64>(), s in -4.0f64..4.0, t in -4.0f64..4.0) {
        let mut rng = sampling::rng(seed);
        for space in spaces() {
            let (xi, eta) = joinable_pair(&mut rng, &space);
            let x = sampling::point(&mut rng, &space, 2.0);
            let v = space.geodesic_through(&xi, &eta, &x).unwrap();
            let p = space.line_point(&v, s).unwrap();
            let q = space.line_point(&v, t).unwrap();
            prop_assert!((space.distance(&p, &q).unwrap() - (s - t).abs()).abs() < TOL);
            let h0 = space.hopf_coords(&x, &v).unwrap();
            let h1 = space.hopf_coords(&x, &v.flow(t)).unwrap();
            prop_assert!((h1.s - h0.s - t).abs() < TOL);
            let (a, b) = v.endpoints();
            prop_assert!(space.same_boundary(&a, &xi) && space.same_boundary(&b, &eta));
        }
    }

    #[test]
    fn gromov_product_is_half_busemann_sum(seed in any::<u64>(), t in -3.0f64..3.0) {
        let mut rng = sampling::rng(seed);
        for space in spaces() {
            let (xi, eta) = joinable_pair(&mut rng, &space);
            let y = sampling::point(&mut rng, &space, 2.0);
            let v = space.geodesic_through(&xi, &eta, &y).unwrap();
            let z = space.line_point(&v, t).unwrap();
            let gr = space.gromov_product(&y, &xi, &eta).unwrap();
            let half = 0.5 * (space.busemann(&xi, &y, &z).unwrap() + space.busemann(&eta, &y, &z).unwrap());
            prop_assert!((gr - half).abs() < TOL, "{:?}: {} vs {}", space.kind(), gr, half);
            prop_assert!(gr >= -TOL);
            prop_assert!((gr - space.gromov_product(&y, &eta, &xi).unwrap()).abs() < TOL);
        }
    }

    #[test]
    fn isometries_preserve_distance_busemann_and_gromov(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        for space in group_spaces() {
            let g = sampling::axial_element(&mut rng, &space).unwrap();
            let [x, y] = [0, 1].map(|_| sampling::point(&mut rng, &space, 2.0));
            let (xi, eta) = joinable_pair(&mut rng, &space);
            let (gx, gy) = (apply_point(&space, &g, &x).unwrap(), apply_point(&space, &g, &y).unwrap());
            let (gxi, geta) = (apply_boundary(&space, &g, &xi).unwrap(), apply_boundary(&space, &g, &eta).unwrap());
            prop_assert!((space.distance(&gx, &gy).unwrap() - space.distance(&x, &y).unwrap()).abs() < TOL);
            let b = space.busemann(&xi, &x, &y).unwrap();
            prop_assert!((space.busemann(&gxi, &gx, &gy).unwrap() - b).abs() < TOL);
            let gr = space.gromov_product(&y, &xi, &eta).unwrap();
            prop_assert!((space.gromov_product(&gy, &gxi, &geta).unwrap() - gr).abs() < TOL);
        }
    }

    #[test]
    fn cross_ratio_recovers_translation_length(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        for space in group_spaces() {
            let g = sampling::axial_element(&mut rng, &space).unwrap();
            let Classification::Axial { length, fix_minus, fix_plus } = g.classification.clone() else {
                panic!("sampled element is not axial");
            };
            let zeta = loop {
                let z = sampling::boundary_point(&mut rng, &space);
                if space.boundary_gap(&z, &fix_minus).unwrap() > 1e-2 && space.boundary_gap(&z, &fix_plus).unwrap() > 1e-2 {
                    break z;
                }
            };
            let gz = apply_boundary(&space, &g, &zeta).unwrap();
            let o = sampling::point(&mut rng, &space, 1.0);
            let cr = space.cross_ratio(&o, &fix_minus, &fix_plus, &zeta, &gz).unwrap();
            prop_assert!((cr - length).abs() < TOL, "{:?}: CR {} vs ℓ {}", space.kind(), cr, length);
        }
    }
}
