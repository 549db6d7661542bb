//! `geometry-check`: sampled identities of the model spaces and the
//! counterexample configurations.

use std::f64::consts::PI;

use serde::Serialize;

use rankone_core::groups::{apply_boundary, apply_point, Classification};
use rankone_core::sampling::{self, Rng64};
use rankone_core::spaces::{BoundaryPoint, CayleyTree, E2Point, H2Point, ModelPoint, ModelSpace, Sign, Source, TreePoint};

use crate::config::{Check, ExperimentConfig, Setup};
use crate::output::CheckResult;

#[derive(Debug, Serialize)]
pub struct GeometryReport {
    pub model: String,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub checks: Vec<CheckResult>,
}

pub fn run(cfg: &ExperimentConfig, setup: &Setup) -> anyhow::Result<GeometryReport> {
    let tol = cfg.thresholds.property_tolerance;
    let n = cfg.geometry.samples;
    let mut checks = Vec::new();
    for check in &cfg.geometry.checks {
        match check {
            Check::Properties => checks.extend(properties(&setup.space, cfg.seed, n, tol)?),
            Check::Pittet => checks.push(pittet()?),
            Check::EuclidShadow => checks.push(euclid_shadow(cfg.geometry.euclid_radius, cfg.geometry.euclid_n)?),
            Check::TreeShadow => checks.push(tree_shadow(cfg.seed, n)?),
        }
    }
    Ok(GeometryReport { model: setup.space.kind().to_string(), seed: cfg.seed, samples: n, tolerance: tol, checks })
}

/// Largest error over the samples, and whether it stays within `tol`.
struct MaxErr(f64);

impl MaxErr {
    fn add(&mut self, e: f64) {
        // NaN counts as a failure
        if !(e <= self.0) {
            self.0 = if e.is_nan() { f64::INFINITY } else { e };
        }
    }

    fn check(&self, name: &str, tol: f64, n: usize) -> CheckResult {
        CheckResult::new(name, self.0 <= tol, Some(self.0), Some(tol), format!("max error over {n} samples"))
    }
}

fn joinable_pair(rng: &mut Rng64, space: &ModelSpace) -> anyhow::Result<(BoundaryPoint, BoundaryPoint)> {
    loop {
        let xi = sampling::boundary_point(rng, space);
        let eta = match &xi {
            BoundaryPoint::E2(t) => BoundaryPoint::E2((t + PI) % std::f64::consts::TAU),
            _ => sampling::boundary_point(rng, space),
        };
        if space.boundary_gap(&xi, &eta)? > 1e-3 {
            return Ok((xi, eta));
        }
    }
}

/// Runs each identity on `n` fresh samples; the group identities are
/// skipped for the plane, which carries no group actions.
pub fn properties(space: &ModelSpace, seed: u64, n: usize, tol: f64) -> anyhow::Result<Vec<CheckResult>> {
    let mut rng = sampling::rng(seed);
    let mut out = Vec::new();

    let mut cocycle = MaxErr(0.0);
    for _ in 0..n {
        let xi = sampling::boundary_point(&mut rng, space);
        let [x, y, z] = [0, 1, 2].map(|_| sampling::point(&mut rng, space, 3.0));
        let lhs = space.busemann(&xi, &x, &z)?;
        let rhs = space.busemann(&xi, &x, &y)? + space.busemann(&xi, &y, &z)?;
        cocycle.add((lhs - rhs).abs());
        cocycle.add((lhs.abs() - space.distance(&x, &z)?).max(0.0));
    }
    out.push(cocycle.check("busemann_cocycle", tol, n));

    let mut speed = MaxErr(0.0);
    for _ in 0..n {
        let (xi, eta) = joinable_pair(&mut rng, space)?;
        let x = sampling::point(&mut rng, space, 2.0);
        let v = space.geodesic_through(&xi, &eta, &x)?;
        let s = sampling::uniform(&mut rng, -4.0, 4.0);
        let t = sampling::uniform(&mut rng, -4.0, 4.0);
        let d = space.distance(&space.line_point(&v, s)?, &space.line_point(&v, t)?)?;
        speed.add((d - (s - t).abs()).abs());
        let h0 = space.hopf_coords(&x, &v)?;
        let h1 = space.hopf_coords(&x, &v.flow(t))?;
        speed.add((h1.s - h0.s - t).abs());
    }
    out.push(speed.check("unit_speed_and_hopf_time", tol, n));

    let mut gromov = MaxErr(0.0);
    for _ in 0..n {
        let (xi, eta) = joinable_pair(&mut rng, space)?;
        let y = sampling::point(&mut rng, space, 2.0);
        let v = space.geodesic_through(&xi, &eta, &y)?;
        let t = sampling::uniform(&mut rng, -3.0, 3.0);
        let z = space.line_point(&v, t)?;
        let gr = space.gromov_product(&y, &xi, &eta)?;
        let half = 0.5 * (space.busemann(&xi, &y, &z)? + space.busemann(&eta, &y, &z)?);
        gromov.add((gr - half).abs());
        gromov.add((gr - space.gromov_product(&y, &eta, &xi)?).abs());
        gromov.add((-gr).max(0.0));
    }
    out.push(gromov.check("gromov_product", tol, n));

    if matches!(space, ModelSpace::E2) {
        return Ok(out);
    }

    let mut equi = MaxErr(0.0);
    for _ in 0..n {
        let g = sampling::axial_element(&mut rng, space)?;
        let [x, y] = [0, 1].map(|_| sampling::point(&mut rng, space, 2.0));
        let (xi, eta) = joinable_pair(&mut rng, space)?;
        let (gx, gy) = (apply_point(space, &g, &x)?, apply_point(space, &g, &y)?);
        let (gxi, geta) = (apply_boundary(space, &g, &xi)?, apply_boundary(space, &g, &eta)?);
        equi.add((space.distance(&gx, &gy)? - space.distance(&x, &y)?).abs());
        equi.add((space.busemann(&gxi, &gx, &gy)? - space.busemann(&xi, &x, &y)?).abs());
        equi.add((space.gromov_product(&gy, &gxi, &geta)? - space.gromov_product(&y, &xi, &eta)?).abs());
    }
    out.push(equi.check("equivariance", tol, n));

    let mut cr = MaxErr(0.0);
    for _ in 0..n {
        let g = sampling::axial_element(&mut rng, space)?;
        let Classification::Axial { length, fix_minus, fix_plus } = g.classification.clone() else {
            anyhow::bail!("sampled element is not axial");
        };
        let zeta = loop {
            let z = sampling::boundary_point(&mut rng, space);
            if space.boundary_gap(&z, &fix_minus)? > 1e-2 && space.boundary_gap(&z, &fix_plus)? > 1e-2 {
                break z;
            }
        };
        let gz = apply_boundary(space, &g, &zeta)?;
        let o = sampling::point(&mut rng, space, 1.0);
        cr.add((space.cross_ratio(&o, &fix_minus, &fix_plus, &zeta, &gz)? - length).abs());
    }
    out.push(cr.check("cross_ratio_translation_length", tol, n));
    Ok(out)
}

/// The line `t ↦ e^t i` touches the balls about `1 + i` and `e⁴(1 + i)` of
/// radius their distance to the imaginary axis: both refined shadows contain
/// its endpoints, yet the endpoint pair is outside the corridor.
pub fn pittet() -> anyhow::Result<CheckResult> {
    let s = ModelSpace::H2;
    let h2 = |a: f64, b: f64| -> anyhow::Result<ModelPoint> { Ok(ModelPoint::H2(H2Point::new(a, b)?)) };
    let e4 = 4f64.exp();
    let (x, y) = (h2(1.0, 1.0)?, h2(e4, e4)?);
    let r = s.distance(&x, &h2(0.0, 2f64.sqrt())?)?;
    let (minus, plus) = (BoundaryPoint::H2(PI), BoundaryPoint::H2(0.0));
    let back = s.refined_shadow_contains(r, &y, &x, &minus, Sign::Minus)?.value;
    let fwd = s.refined_shadow_contains(r, &x, &y, &plus, Sign::Minus)?.value;
    let corridor = s.corridor_contains(r, &x, &y, &minus, &plus)?.value;
    Ok(CheckResult::new(
        "corridor_excludes",
        back && fwd && !corridor,
        Some(r),
        None,
        format!("O⁻(y,x) ∋ σ(−∞): {back}; O⁻(x,y) ∋ σ(∞): {fwd}; (σ(−∞), σ(∞)) ∈ L_r(x,y): {corridor}"),
    ))
}

/// `O_r(π, 0) = {0}` while `O_r^−(z_n, 0) = {1/n}` for
/// `z_n = −rn(cos 1/n, sin 1/n)`, so the refined shadows do not converge to
/// the shadow of the limit point.
pub fn euclid_shadow(r: f64, n_max: usize) -> anyhow::Result<CheckResult> {
    let s = ModelSpace::E2;
    let o = ModelPoint::E2(E2Point { x: 0.0, y: 0.0 });
    let src = Source::Boundary(BoundaryPoint::E2(PI));
    let mut ok = s.shadow_contains(r, &src, &o, &BoundaryPoint::E2(0.0))?.value;
    for eta in [1e-6, -1e-6, 0.5, PI / 2.0, 4.0] {
        ok &= !s.shadow_contains(r, &src, &o, &BoundaryPoint::E2(eta))?.value;
    }
    for n in 1..=n_max {
        let phi = 1.0 / n as f64;
        let z = ModelPoint::E2(E2Point { x: -r * n as f64 * phi.cos(), y: -r * n as f64 * phi.sin() });
        let at = |t: f64| s.refined_shadow_contains(r, &z, &o, &BoundaryPoint::E2(t), Sign::Minus).map(|d| d.value);
        ok &= at(phi)? && !at(phi + 1e-6)? && !at(phi - 1e-6)? && !at(0.0)?;
    }
    Ok(CheckResult::new(
        "shadow_limit_mismatch",
        ok,
        None,
        None,
        format!("O_r(π, 0) = {{0}} and O_r⁻(z_n, 0) = {{1/n}} for n ≤ {n_max}, r = {}", rankone_core::format::real(r)),
    ))
}

/// `η ∈ O_r(ξ, x)` iff `d(x, (ξη)) ≤ ⌈r⌉ − 1` in the unit 4-regular tree.
pub fn tree_shadow(seed: u64, n: usize) -> anyhow::Result<CheckResult> {
    let space = ModelSpace::Tree(CayleyTree::unit(2));
    let mut rng = sampling::rng(seed);
    let mut mismatches = 0usize;
    let mut tested = 0usize;
    for _ in 0..n {
        let xi = sampling::boundary_point(&mut rng, &space);
        let eta = sampling::boundary_point(&mut rng, &space);
        if space.same_boundary(&xi, &eta) {
            continue;
        }
        let ModelPoint::Tree(p) = sampling::point(&mut rng, &space, 3.0) else { unreachable!() };
        let x = ModelPoint::Tree(TreePoint::vertex(p.vertex));
        let d = space.gromov_product(&x, &xi, &eta)?;
        for r in [0.5, 1.0, 1.7, 2.0] {
            tested += 1;
            if space.shadow_contains(r, &Source::Boundary(xi.clone()), &x, &eta)?.value != (d <= r.ceil() - 1.0) {
                mismatches += 1;
            }
        }
    }
    Ok(CheckResult::new(
        "tree_shadow_formula",
        mismatches == 0 && tested > 0,
        Some(mismatches as f64),
        Some(0.0),
        format!("{tested} (ξ, η, x, r) cases with r ∈ {{0.5, 1, 1.7, 2}}"),
    ))
}
