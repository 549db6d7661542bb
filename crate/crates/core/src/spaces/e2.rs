//! Euclidean plane primitives. Boundary points are direction angles.

use serde::{Deserialize, Serialize};

use super::decision::{ge, le, lt, Decision};
use super::h2::{canonical_angle, same_boundary_point};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct E2Point {
    pub x: f64,
    pub y: f64,
}

/// The line `t ↦ base + t·(cos θ, sin θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct E2Line {
    pub base: E2Point,
    pub theta: f64,
}

impl E2Line {
    pub fn at(&self, t: f64) -> E2Point {
        E2Point { x: self.base.x + t * self.theta.cos(), y: self.base.y + t * self.theta.sin() }
    }

    pub fn flow(&self, t: f64) -> E2Line {
        E2Line { base: self.at(t), theta: self.theta }
    }

    pub fn reversed(&self) -> E2Line {
        E2Line { base: self.base, theta: canonical_angle(self.theta + std::f64::consts::PI) }
    }
}

fn unit(theta: f64) -> (f64, f64) {
    (theta.cos(), theta.sin())
}

/// Coordinates of `p − x` along and across the direction `theta`.
fn frame(x: E2Point, p: E2Point, theta: f64) -> (f64, f64) {
    let (c, s) = unit(theta);
    let dx = p.x - x.x;
    let dy = p.y - x.y;
    (dx * c + dy * s, -dx * s + dy * c)
}

pub fn distance(x: E2Point, y: E2Point) -> f64 {
    (x.x - y.x).hypot(x.y - y.y)
}

pub fn busemann(theta: f64, x: E2Point, y: E2Point) -> f64 {
    frame(x, y, theta).0
}

pub fn antipodal(xi: f64, eta: f64) -> bool {
    same_boundary_point(canonical_angle(xi + std::f64::consts::PI), eta)
}

pub fn direction(x: E2Point, p: E2Point) -> Option<f64> {
    if x == p {
        None
    } else {
        Some(canonical_angle((p.y - x.y).atan2(p.x - x.x)))
    }
}

/// The only lines joining boundary points are those between antipodes; the
/// one through `x` is returned.
pub fn line_through(xi: f64, eta: f64, x: E2Point) -> Result<E2Line> {
    if same_boundary_point(xi, eta) {
        return Err(Error::DegeneratePair);
    }
    if !antipodal(xi, eta) {
        return Err(Error::NotJoinable);
    }
    Ok(E2Line { base: x, theta: canonical_angle(eta) })
}

pub fn gromov_product(xi: f64, eta: f64) -> Result<f64> {
    if same_boundary_point(xi, eta) {
        return Err(Error::DegeneratePair);
    }
    if !antipodal(xi, eta) {
        return Err(Error::NotJoinable);
    }
    Ok(0.0)
}

fn ray_distance(x: E2Point, y: E2Point, eta: f64) -> f64 {
    let (along, across) = frame(x, y, eta);
    if along >= 0.0 {
        across.abs()
    } else {
        distance(x, y)
    }
}

pub fn shadow_from_point(r: f64, x: E2Point, y: E2Point, eta: f64) -> Decision {
    lt(ray_distance(x, y, eta), r)
}

/// The line `(ξη)` exists only for antipodal pairs and then sweeps the whole
/// plane through every point.
pub fn shadow_from_boundary(xi: f64, eta: f64) -> Result<Decision> {
    if same_boundary_point(xi, eta) {
        return Err(Error::DegeneratePair);
    }
    Ok(Decision::exact(antipodal(xi, eta)))
}

/// Two open balls of radius `r` are joined by a ray in direction `η` from a
/// point of the first iff the ray from the first center passes within `2r`
/// of the second.
pub fn refined_shadow_plus(r: f64, x: E2Point, y: E2Point, eta: f64) -> Decision {
    lt(ray_distance(x, y, eta), 2.0 * r)
}

/// Every point of `B_r(x)` must see `B_r(y)`: forces `y` onto the ray from
/// `x` (zero transverse offset) and not behind `x`.
pub fn refined_shadow_minus(_r: f64, x: E2Point, y: E2Point, eta: f64) -> Decision {
    let (along, across) = frame(x, y, eta);
    le(across.abs(), 0.0).and(ge(along, 0.0))
}

/// Every line in direction `η` joins `ξ = η + π` to `η`, so the corridor
/// condition is the same as for the large shadow.
pub fn corridor(r: f64, x: E2Point, y: E2Point, xi: f64, eta: f64) -> Result<Decision> {
    line_through(xi, eta, x)?;
    Ok(refined_shadow_plus(r, x, y, eta))
}

/// `O_r^+(x, z)` as `(center, half-width)`, or `None` for the full circle.
pub fn plus_shadow_arc(r: f64, x: E2Point, z: E2Point) -> Option<(f64, f64)> {
    let d = distance(x, z);
    if d < 2.0 * r {
        return None;
    }
    Some((direction(x, z).unwrap(), (2.0 * r / d).asin()))
}
