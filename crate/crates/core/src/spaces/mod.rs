//! Closed-form geometry of the model spaces: the hyperbolic plane, Cayley
//! trees of free groups, and the Euclidean plane (primitives only).

pub mod boundary_set;
pub mod decision;
pub mod e2;
pub mod h2;
pub mod tree;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use boundary_set::{BoundarySet, Interval};
pub use decision::Decision;
pub use e2::{E2Line, E2Point};
pub use h2::{H2Line, H2Point, Mobius};
pub use tree::{CayleyTree, End, TreeLine, TreePoint};

use crate::error::{Error, Result};
use crate::format::real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelSpace {
    H2,
    Tree(CayleyTree),
    E2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelPoint {
    H2(H2Point),
    Tree(TreePoint),
    E2(E2Point),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPoint {
    /// Cayley-circle angle in `[0, 2π)`.
    H2(f64),
    Tree(End),
    /// Direction angle in `[0, 2π)`.
    E2(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GeodesicLine {
    H2(H2Line),
    Tree(TreeLine),
    E2(E2Line),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfCoordinates {
    pub xi_minus: BoundaryPoint,
    pub xi_plus: BoundaryPoint,
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Point(ModelPoint),
    Boundary(BoundaryPoint),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl ModelPoint {
    fn kind(&self) -> &'static str {
        match self {
            ModelPoint::H2(_) => "H2",
            ModelPoint::Tree(_) => "tree",
            ModelPoint::E2(_) => "E2",
        }
    }
}

impl BoundaryPoint {
    pub(crate) fn kind(&self) -> &'static str {
        match self {
            BoundaryPoint::H2(_) => "H2",
            BoundaryPoint::Tree(_) => "tree",
            BoundaryPoint::E2(_) => "E2",
        }
    }

    pub fn h2_real(t: f64) -> BoundaryPoint {
        BoundaryPoint::H2(h2::angle_from_real(t))
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            BoundaryPoint::H2(t) | BoundaryPoint::E2(t) => Some(*t),
            BoundaryPoint::Tree(_) => None,
        }
    }
}

impl fmt::Display for ModelPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelPoint::H2(p) => write!(f, "({}, {})", real(p.re), real(p.im)),
            ModelPoint::E2(p) => write!(f, "({}, {})", real(p.x), real(p.y)),
            ModelPoint::Tree(p) => match p.step {
                None => write!(f, "{}", p.vertex),
                Some((l, o)) => write!(f, "{}+{}:{}", p.vertex, crate::word::letter_char(l), real(o)),
            },
        }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::H2(t) | BoundaryPoint::E2(t) => write!(f, "{}", real(*t)),
            BoundaryPoint::Tree(e) => write!(f, "{e}"),
        }
    }
}

impl GeodesicLine {
    pub fn flow(&self, t: f64) -> GeodesicLine {
        match self {
            GeodesicLine::H2(l) => GeodesicLine::H2(l.flow(t)),
            GeodesicLine::Tree(l) => GeodesicLine::Tree(l.flow(t)),
            GeodesicLine::E2(l) => GeodesicLine::E2(l.flow(t)),
        }
    }

    pub fn reversed(&self) -> GeodesicLine {
        match self {
            GeodesicLine::H2(l) => GeodesicLine::H2(l.reversed()),
            GeodesicLine::Tree(l) => GeodesicLine::Tree(l.reversed()),
            GeodesicLine::E2(l) => GeodesicLine::E2(l.reversed()),
        }
    }

    /// `(v(−∞), v(+∞))`.
    pub fn endpoints(&self) -> (BoundaryPoint, BoundaryPoint) {
        match self {
            GeodesicLine::H2(l) => (BoundaryPoint::H2(l.start()), BoundaryPoint::H2(l.end())),
            GeodesicLine::Tree(l) => (BoundaryPoint::Tree(l.back.clone()), BoundaryPoint::Tree(l.fwd.clone())),
            GeodesicLine::E2(l) => (
                BoundaryPoint::E2(h2::canonical_angle(l.theta + std::f64::consts::PI)),
                BoundaryPoint::E2(l.theta),
            ),
        }
    }

    /// Width of the set of parallel lines: zero in the plane of curvature −1
    /// and in trees, unbounded in the Euclidean plane.
    pub fn width(&self) -> f64 {
        match self {
            GeodesicLine::H2(_) | GeodesicLine::Tree(_) => 0.0,
            GeodesicLine::E2(_) => f64::INFINITY,
        }
    }
}

fn mismatch(expected: &'static str, found: &'static str) -> Error {
    Error::ModelMismatch { expected, found }
}

impl ModelSpace {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpace::H2 => "H2",
            ModelSpace::Tree(_) => "tree",
            ModelSpace::E2 => "E2",
        }
    }

    pub fn tree(&self) -> Option<&CayleyTree> {
        match self {
            ModelSpace::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn check_point(&self, p: &ModelPoint) -> Result<()> {
        match (self, p) {
            (ModelSpace::H2, ModelPoint::H2(z)) => H2Point::new(z.re, z.im).map(|_| ()),
            (ModelSpace::E2, ModelPoint::E2(z)) => {
                if z.x.is_finite() && z.y.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidInput("E2 point must be finite".into()))
                }
            }
            (ModelSpace::Tree(t), ModelPoint::Tree(p)) => {
                t.check_word(&p.vertex)?;
                if let Some((l, o)) = p.step {
                    if crate::word::generator_of(l) >= t.rank() || !(o > 0.0 && o < t.edge(l)) {
                        return Err(Error::InvalidInput(format!("edge offset {o} is outside its edge")));
                    }
                    if p.vertex.last() == Some(crate::word::inverse_letter(l)) {
                        return Err(Error::InvalidInput("tree point is not in canonical form".into()));
                    }
                }
                Ok(())
            }
            _ => Err(mismatch(self.kind(), p.kind())),
        }
    }

    pub fn check_boundary(&self, b: &BoundaryPoint) -> Result<()> {
        match (self, b) {
            (ModelSpace::H2, BoundaryPoint::H2(_)) | (ModelSpace::E2, BoundaryPoint::E2(_)) => Ok(()),
            (ModelSpace::Tree(t), BoundaryPoint::Tree(e)) => {
                t.check_word(e.prefix())?;
                t.check_word(e.period())
            }
            _ => Err(mismatch(self.kind(), b.kind())),
        }
    }

    pub fn same_boundary(&self, a: &BoundaryPoint, b: &BoundaryPoint) -> bool {
        match (a, b) {
            (BoundaryPoint::H2(s), BoundaryPoint::H2(t)) | (BoundaryPoint::E2(s), BoundaryPoint::E2(t)) => {
                h2::same_boundary_point(*s, *t)
            }
            (BoundaryPoint::Tree(s), BoundaryPoint::Tree(t)) => s == t,
            _ => false,
        }
    }

    /// A visual metric on the boundary: the shorter arc between angles, or
    /// `e^{−n}` for ends agreeing on exactly `n` letters.
    pub fn boundary_gap(&self, a: &BoundaryPoint, b: &BoundaryPoint) -> Result<f64> {
        match (a, b) {
            (BoundaryPoint::H2(s), BoundaryPoint::H2(t)) | (BoundaryPoint::E2(s), BoundaryPoint::E2(t)) => {
                Ok(h2::angle_gap(*s, *t))
            }
            (BoundaryPoint::Tree(s), BoundaryPoint::Tree(t)) => {
                Ok(s.common_prefix_len(t).map_or(0.0, |n| (-(n as f64)).exp()))
            }
            _ => Err(mismatch(a.kind(), b.kind())),
        }
    }

    pub fn full_boundary(&self) -> BoundarySet {
        match self {
            ModelSpace::Tree(t) => BoundarySet::full_tree(t.rank()),
            _ => BoundarySet::full_circle(),
        }
    }

    pub fn root(&self) -> ModelPoint {
        match self {
            ModelSpace::H2 => ModelPoint::H2(H2Point::I),
            ModelSpace::Tree(_) => ModelPoint::Tree(TreePoint::root()),
            ModelSpace::E2 => ModelPoint::E2(E2Point { x: 0.0, y: 0.0 }),
        }
    }

    pub fn distance(&self, x: &ModelPoint, y: &ModelPoint) -> Result<f64> {
        match (self, x, y) {
            (ModelSpace::H2, ModelPoint::H2(a), ModelPoint::H2(b)) => Ok(h2::distance(*a, *b)),
            (ModelSpace::Tree(t), ModelPoint::Tree(a), ModelPoint::Tree(b)) => Ok(t.distance(a, b)),
            (ModelSpace::E2, ModelPoint::E2(a), ModelPoint::E2(b)) => Ok(e2::distance(*a, *b)),
            _ => Err(self.mismatch_pp(x, y)),
        }
    }

    fn mismatch_pp(&self, x: &ModelPoint, y: &ModelPoint) -> Error {
        if x.kind() != self.kind() {
            mismatch(self.kind(), x.kind())
        } else {
            mismatch(self.kind(), y.kind())
        }
    }

    fn mismatch_b(&self, b: &BoundaryPoint) -> Error {
        mismatch(self.kind(), b.kind())
    }

    pub fn busemann(&self, xi: &BoundaryPoint, x: &ModelPoint, y: &ModelPoint) -> Result<f64> {
        match (self, xi, x, y) {
            (ModelSpace::H2, BoundaryPoint::H2(t), ModelPoint::H2(a), ModelPoint::H2(b)) => {
                Ok(h2::busemann(*t, *a, *b))
            }
            (ModelSpace::Tree(tr), BoundaryPoint::Tree(e), ModelPoint::Tree(a), ModelPoint::Tree(b)) => {
                Ok(tr.busemann(e, a, b))
            }
            (ModelSpace::E2, BoundaryPoint::E2(t), ModelPoint::E2(a), ModelPoint::E2(b)) => {
                Ok(e2::busemann(*t, *a, *b))
            }
            _ if xi.kind() != self.kind() => Err(self.mismatch_b(xi)),
            _ => Err(self.mismatch_pp(x, y)),
        }
    }

    /// The line from `xi` to `eta` parametrized so that `v(0)` is the
    /// projection of `x`.
    pub fn geodesic_through(&self, xi: &BoundaryPoint, eta: &BoundaryPoint, x: &ModelPoint) -> Result<GeodesicLine> {
        match (self, xi, eta, x) {
            (ModelSpace::H2, BoundaryPoint::H2(a), BoundaryPoint::H2(b), ModelPoint::H2(p)) => {
                Ok(GeodesicLine::H2(H2Line::through(*a, *b, *p)?))
            }
            (ModelSpace::Tree(t), BoundaryPoint::Tree(a), BoundaryPoint::Tree(b), ModelPoint::Tree(p)) => {
                Ok(GeodesicLine::Tree(t.line_through(a, b, p)?))
            }
            (ModelSpace::E2, BoundaryPoint::E2(a), BoundaryPoint::E2(b), ModelPoint::E2(p)) => {
                Ok(GeodesicLine::E2(e2::line_through(*a, *b, *p)?))
            }
            _ => Err(self.mismatch_any(&[xi, eta], &[x])),
        }
    }

    fn mismatch_any(&self, bs: &[&BoundaryPoint], ps: &[&ModelPoint]) -> Error {
        for b in bs {
            if b.kind() != self.kind() {
                return self.mismatch_b(b);
            }
        }
        for p in ps {
            if p.kind() != self.kind() {
                return mismatch(self.kind(), p.kind());
            }
        }
        mismatch(self.kind(), "unknown")
    }

    pub fn line_point(&self, v: &GeodesicLine, t: f64) -> Result<ModelPoint> {
        match (self, v) {
            (ModelSpace::H2, GeodesicLine::H2(l)) => Ok(ModelPoint::H2(l.at(t))),
            (ModelSpace::Tree(tr), GeodesicLine::Tree(l)) => Ok(ModelPoint::Tree(tr.line_point(l, t))),
            (ModelSpace::E2, GeodesicLine::E2(l)) => Ok(ModelPoint::E2(l.at(t))),
            _ => Err(mismatch(self.kind(), "line of another model")),
        }
    }

    /// Foot time and distance of the projection of `x` onto `v`.
    pub fn foot(&self, v: &GeodesicLine, x: &ModelPoint) -> Result<(f64, f64)> {
        match (self, v, x) {
            (ModelSpace::H2, GeodesicLine::H2(l), ModelPoint::H2(p)) => Ok(l.foot(*p)),
            (ModelSpace::Tree(tr), GeodesicLine::Tree(l), ModelPoint::Tree(p)) => Ok(tr.foot(l, p)),
            (ModelSpace::E2, GeodesicLine::E2(l), ModelPoint::E2(p)) => {
                let dx = p.x - l.base.x;
                let dy = p.y - l.base.y;
                let (c, s) = (l.theta.cos(), l.theta.sin());
                Ok((dx * c + dy * s, (-dx * s + dy * c).abs()))
            }
            _ => Err(mismatch(self.kind(), x.kind())),
        }
    }

    pub fn gromov_product(&self, y: &ModelPoint, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<f64> {
        match (self, y, xi, eta) {
            (ModelSpace::H2, ModelPoint::H2(p), BoundaryPoint::H2(a), BoundaryPoint::H2(b)) => {
                h2::gromov_product(*p, *a, *b)
            }
            (ModelSpace::Tree(t), ModelPoint::Tree(p), BoundaryPoint::Tree(a), BoundaryPoint::Tree(b)) => {
                let line = t.line_between(a, b)?;
                Ok(t.project(&line, p).1)
            }
            (ModelSpace::E2, ModelPoint::E2(_), BoundaryPoint::E2(a), BoundaryPoint::E2(b)) => {
                e2::gromov_product(*a, *b)
            }
            _ => Err(self.mismatch_any(&[xi, eta], &[y])),
        }
    }

    pub fn hopf_coords(&self, x: &ModelPoint, v: &GeodesicLine) -> Result<HopfCoordinates> {
        let (xi_minus, xi_plus) = v.endpoints();
        let v0 = self.line_point(v, 0.0)?;
        let s = self.busemann(&xi_minus, &v0, x)?;
        Ok(HopfCoordinates { xi_minus, xi_plus, s })
    }

    /// Endpoint of the geodesic ray from `x` through `p`; `None` if `p = x`.
    pub fn direction(&self, x: &ModelPoint, p: &ModelPoint) -> Result<Option<BoundaryPoint>> {
        match (self, x, p) {
            (ModelSpace::H2, ModelPoint::H2(a), ModelPoint::H2(b)) => Ok(h2::direction(*a, *b).map(BoundaryPoint::H2)),
            (ModelSpace::Tree(t), ModelPoint::Tree(a), ModelPoint::Tree(b)) => {
                Ok(t.direction(a, b).map(BoundaryPoint::Tree))
            }
            (ModelSpace::E2, ModelPoint::E2(a), ModelPoint::E2(b)) => Ok(e2::direction(*a, *b).map(BoundaryPoint::E2)),
            _ => Err(self.mismatch_pp(x, p)),
        }
    }

    fn check_radius(r: f64) -> Result<()> {
        if r > 0.0 && r.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("radius {r} must be positive")))
        }
    }

    /// `η ∈ O_r(source, y)`.
    pub fn shadow_contains(&self, r: f64, source: &Source, y: &ModelPoint, eta: &BoundaryPoint) -> Result<Decision> {
        Self::check_radius(r)?;
        match source {
            Source::Point(x) => match (self, x, y, eta) {
                (ModelSpace::H2, ModelPoint::H2(a), ModelPoint::H2(b), BoundaryPoint::H2(t)) => {
                    Ok(h2::shadow_from_point(r, *a, *b, *t))
                }
                (ModelSpace::Tree(tr), ModelPoint::Tree(a), ModelPoint::Tree(b), BoundaryPoint::Tree(e)) => {
                    Ok(tr.shadow_from_point(r, a, b, e))
                }
                (ModelSpace::E2, ModelPoint::E2(a), ModelPoint::E2(b), BoundaryPoint::E2(t)) => {
                    Ok(e2::shadow_from_point(r, *a, *b, *t))
                }
                _ => Err(self.mismatch_any(&[eta], &[x, y])),
            },
            Source::Boundary(xi) => {
                if self.same_boundary(xi, eta) {
                    return Err(Error::DegeneratePair);
                }
                match (self, xi, y, eta) {
                    (ModelSpace::H2, BoundaryPoint::H2(a), ModelPoint::H2(p), BoundaryPoint::H2(b)) => {
                        h2::shadow_from_boundary(r, *a, *p, *b)
                    }
                    (ModelSpace::Tree(tr), BoundaryPoint::Tree(a), ModelPoint::Tree(p), BoundaryPoint::Tree(b)) => {
                        tr.shadow_from_boundary(r, a, p, b)
                    }
                    (ModelSpace::E2, BoundaryPoint::E2(a), ModelPoint::E2(_), BoundaryPoint::E2(b)) => {
                        e2::shadow_from_boundary(*a, *b)
                    }
                    _ => Err(self.mismatch_any(&[xi, eta], &[y])),
                }
            }
        }
    }

    /// `η ∈ O_r^∓(x, y)`.
    pub fn refined_shadow_contains(
        &self,
        r: f64,
        x: &ModelPoint,
        y: &ModelPoint,
        eta: &BoundaryPoint,
        sign: Sign,
    ) -> Result<Decision> {
        Self::check_radius(r)?;
        match (self, x, y, eta) {
            (ModelSpace::H2, ModelPoint::H2(a), ModelPoint::H2(b), BoundaryPoint::H2(t)) => Ok(match sign {
                Sign::Plus => h2::refined_shadow_plus(r, *a, *b, *t),
                Sign::Minus => h2::refined_shadow_minus(r, *a, *b, *t),
            }),
            (ModelSpace::Tree(tr), ModelPoint::Tree(a), ModelPoint::Tree(b), BoundaryPoint::Tree(e)) => {
                Ok(match sign {
                    Sign::Plus => tr.refined_shadow_plus(r, a, b, e),
                    Sign::Minus => tr.refined_shadow_minus(r, a, b, e),
                })
            }
            (ModelSpace::E2, ModelPoint::E2(a), ModelPoint::E2(b), BoundaryPoint::E2(t)) => Ok(match sign {
                Sign::Plus => e2::refined_shadow_plus(r, *a, *b, *t),
                Sign::Minus => e2::refined_shadow_minus(r, *a, *b, *t),
            }),
            _ => Err(self.mismatch_any(&[eta], &[x, y])),
        }
    }

    /// `O_r^+(x, z)` as a boundary set (an open arc, or tree cylinders).
    pub fn plus_shadow_set(&self, r: f64, x: &ModelPoint, z: &ModelPoint) -> Result<BoundarySet> {
        Self::check_radius(r)?;
        let arc = |center: f64, left: f64, right: f64| {
            if left + right <= 0.0 {
                return Ok(BoundarySet::empty_circle());
            }
            BoundarySet::arc(center - left, left + right, false, false)
        };
        match (self, x, z) {
            (ModelSpace::H2, ModelPoint::H2(a), ModelPoint::H2(b)) => match h2::plus_shadow_arc(r, *a, *b) {
                None => Ok(BoundarySet::full_circle()),
                Some((c, l, rr)) => arc(c, l, rr),
            },
            (ModelSpace::E2, ModelPoint::E2(a), ModelPoint::E2(b)) => match e2::plus_shadow_arc(r, *a, *b) {
                None => Ok(BoundarySet::full_circle()),
                Some((c, w)) => arc(c, w, w),
            },
            (ModelSpace::Tree(t), ModelPoint::Tree(a), ModelPoint::Tree(b)) => {
                Ok(BoundarySet::cylinders(t.rank(), t.plus_shadow_cylinders(r, a, b)))
            }
            _ => Err(self.mismatch_pp(x, z)),
        }
    }

    /// `z ∈ C_r^−(x, A)` iff `O_r^+(x, z) ⊆ A`; `z ∈ C_r^+(x, A)` iff
    /// `O_r^+(x, z) ∩ A ≠ ∅`.
    pub fn cone_contains(&self, r: f64, x: &ModelPoint, a: &BoundarySet, z: &ModelPoint, sign: Sign) -> Result<bool> {
        let shadow = self.plus_shadow_set(r, x, z)?;
        match sign {
            Sign::Minus => shadow.is_subset_of(a),
            Sign::Plus => shadow.intersects(a),
        }
    }

    /// `(ξ, η) ∈ L_r(x, y)`.
    pub fn corridor_contains(
        &self,
        r: f64,
        x: &ModelPoint,
        y: &ModelPoint,
        xi: &BoundaryPoint,
        eta: &BoundaryPoint,
    ) -> Result<Decision> {
        Self::check_radius(r)?;
        if self.same_boundary(xi, eta) {
            return Err(Error::DegeneratePair);
        }
        match (self, x, y, xi, eta) {
            (ModelSpace::H2, ModelPoint::H2(a), ModelPoint::H2(b), BoundaryPoint::H2(s), BoundaryPoint::H2(t)) => {
                h2::corridor(r, *a, *b, *s, *t)
            }
            (
                ModelSpace::Tree(tr),
                ModelPoint::Tree(a),
                ModelPoint::Tree(b),
                BoundaryPoint::Tree(s),
                BoundaryPoint::Tree(t),
            ) => tr.corridor(r, a, b, s, t),
            (ModelSpace::E2, ModelPoint::E2(a), ModelPoint::E2(b), BoundaryPoint::E2(s), BoundaryPoint::E2(t)) => {
                e2::corridor(r, *a, *b, *s, *t)
            }
            _ => Err(self.mismatch_any(&[xi, eta], &[x, y])),
        }
    }

    /// `Gr_o(ξ,η) + Gr_o(ξ′,η′) − Gr_o(ξ,η′) − Gr_o(ξ′,η)`.
    pub fn cross_ratio(
        &self,
        o: &ModelPoint,
        xi: &BoundaryPoint,
        xi2: &BoundaryPoint,
        eta: &BoundaryPoint,
        eta2: &BoundaryPoint,
    ) -> Result<f64> {
        Ok(self.gromov_product(o, xi, eta)? + self.gromov_product(o, xi2, eta2)?
            - self.gromov_product(o, xi, eta2)?
            - self.gromov_product(o, xi2, eta)?)
    }
}
