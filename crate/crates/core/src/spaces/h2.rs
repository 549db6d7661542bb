//! The hyperbolic plane in the upper half-plane model.
//!
//! Boundary points are stored as angles on the unit circle after the Cayley
//! transform `w = (z - i)/(z + i)`. The angle `θ` corresponds to the real
//! number `t = -cot(θ/2)` and to the homogeneous vector
//! `(-cos(θ/2), sin(θ/2))`, so `∞` sits at angle 0 and `0` at angle `π`.
//! Möbius maps act linearly on homogeneous vectors, which keeps every
//! boundary computation free of special cases at infinity.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::decision::{ge, gt, le, lt, Decision};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct H2Point {
    pub re: f64,
    pub im: f64,
}

impl H2Point {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidInput(format!(
                "H2 point ({re}, {im}) must have finite coordinates and positive imaginary part"
            )));
        }
        Ok(H2Point { re, im })
    }

    pub const I: H2Point = H2Point { re: 0.0, im: 1.0 };
}

/// An element of SL(2, ℝ) acting by Möbius transformations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    /// Builds a matrix from entries with positive determinant, rescaled to
    /// determinant 1 with the first nonzero entry positive.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "matrix [[{a}, {b}], [{c}, {d}]] does not have positive determinant"
            )));
        }
        Ok(Mobius { a, b, c, d }.renormalized())
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn renormalized(self) -> Mobius {
        let s = self.det().sqrt();
        let mut m = Mobius { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s };
        let first = [m.a, m.b, m.c, m.d].into_iter().find(|v| *v != 0.0).unwrap_or(1.0);
        if first < 0.0 {
            m = Mobius { a: -m.a, b: -m.b, c: -m.c, d: -m.d };
        }
        m
    }

    pub fn mul(&self, o: &Mobius) -> Mobius {
        Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
        .renormalized()
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }.renormalized()
    }

    /// `diag(e^{t/2}, e^{-t/2})`: translation by `t` along the imaginary axis.
    pub fn translation(t: f64) -> Mobius {
        Mobius { a: (t / 2.0).exp(), b: 0.0, c: 0.0, d: (-t / 2.0).exp() }
    }

    /// Maps `i` to `z` by `w ↦ re + im·w`.
    pub fn lift(z: H2Point) -> Mobius {
        let s = z.im.sqrt();
        Mobius { a: s, b: z.re / s, c: 0.0, d: 1.0 / s }
    }

    /// Rotation about `i` sending the boundary point `θ` to `∞`.
    pub fn normalizer(theta: f64) -> Mobius {
        let (p, q) = hom(theta);
        Mobius { a: -p, b: -q, c: q, d: -p }
    }

    pub fn apply(&self, z: H2Point) -> H2Point {
        // (a z + b)/(c z + d) with z = x + iy
        let nr = self.a * z.re + self.b;
        let ni = self.a * z.im;
        let dr = self.c * z.re + self.d;
        let di = self.c * z.im;
        let den = dr * dr + di * di;
        H2Point { re: (nr * dr + ni * di) / den, im: (ni * dr - nr * di) / den }
    }

    pub fn apply_hom(&self, (p, q): (f64, f64)) -> (f64, f64) {
        (self.a * p + self.b * q, self.c * p + self.d * q)
    }

    pub fn apply_angle(&self, theta: f64) -> f64 {
        angle_from_hom(self.apply_hom(hom(theta)))
    }
}

/// Homogeneous unit vector of a boundary angle.
pub fn hom(theta: f64) -> (f64, f64) {
    let h = theta / 2.0;
    (-h.cos(), h.sin())
}

pub fn angle_from_hom((p, q): (f64, f64)) -> f64 {
    canonical_angle(2.0 * q.atan2(-p))
}

pub fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Boundary angle of the extended real `t` (`±∞` gives angle 0).
pub fn angle_from_real(t: f64) -> f64 {
    if t.is_infinite() {
        0.0
    } else {
        angle_from_hom((t, 1.0))
    }
}

/// Extended real of a boundary angle; angle 0 gives `+∞`.
pub fn real_from_angle(theta: f64) -> f64 {
    let (p, q) = hom(theta);
    if q.abs() < 1e-300 {
        f64::INFINITY
    } else {
        p / q
    }
}

/// Length of the shorter arc between two angles.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

pub fn same_boundary_point(a: f64, b: f64) -> bool {
    angle_gap(a, b) <= 1e-12
}

pub fn distance(x: H2Point, y: H2Point) -> f64 {
    let dx = x.re - y.re;
    let dy = x.im - y.im;
    let e = (dx * dx + dy * dy).sqrt();
    2.0 * (e / (2.0 * (x.im * y.im).sqrt())).asinh()
}

/// `B_θ(x, y) = lim d(x, σ(s)) − d(y, σ(s))` along a ray towards `θ`.
pub fn busemann(theta: f64, x: H2Point, y: H2Point) -> f64 {
    let n = Mobius::normalizer(theta);
    n.apply(y).im.ln() - n.apply(x).im.ln()
}

/// Gromov product `½(B_ξ(y,z) + B_η(y,z))` for `z` on the line `(ξη)`.
/// Equals `ln cosh d(y, (ξη))`.
pub fn gromov_product(y: H2Point, xi: f64, eta: f64) -> Result<f64> {
    if same_boundary_point(xi, eta) {
        return Err(Error::DegeneratePair);
    }
    let a = Mobius::lift(y).inverse();
    let u = a.apply_hom(hom(xi));
    let v = a.apply_hom(hom(eta));
    let det = (u.0 * v.1 - u.1 * v.0).abs();
    let nu = u.0.hypot(u.1);
    let nv = v.0.hypot(v.1);
    Ok((nu * nv / det).ln().max(0.0))
}

/// Forward endpoint of the geodesic ray from `x` through `p`, or `None` if
/// the points coincide.
pub fn direction(x: H2Point, p: H2Point) -> Option<f64> {
    let lift = Mobius::lift(x);
    let q = lift.inverse().apply(p);
    let re = q.re * q.re + q.im * q.im - 1.0;
    let im = -2.0 * q.re;
    if re.abs() < 1e-300 && im.abs() < 1e-300 {
        return None;
    }
    Some(lift.apply_angle(canonical_angle(im.atan2(re))))
}

/// A unit-speed geodesic `t ↦ frame(i·e^t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct H2Line {
    pub frame: Mobius,
}

impl H2Line {
    /// Line from `xi` (at `t = −∞`) to `eta`, anchored at an arbitrary point.
    pub fn between(xi: f64, eta: f64) -> Result<H2Line> {
        let (pa, qa) = hom(xi);
        let (pb, qb) = hom(eta);
        let det = pb * qa - pa * qb;
        if det.abs() < 1e-12 {
            return Err(Error::DegeneratePair);
        }
        Ok(H2Line { frame: Mobius { a: pb, b: pa / det, c: qb, d: qa / det } })
    }

    /// The line from `xi` to `eta` with `v(0)` the projection of `x`.
    pub fn through(xi: f64, eta: f64, x: H2Point) -> Result<H2Line> {
        let l = H2Line::between(xi, eta)?;
        let (t, _) = l.foot(x);
        Ok(l.flow(t))
    }

    /// Geodesic ray from `x` towards `eta` as a line with `v(0) = x`.
    pub fn ray(x: H2Point, eta: f64) -> H2Line {
        let n = Mobius::normalizer(eta);
        let frame = n.inverse().mul(&Mobius::lift(n.apply(x)));
        H2Line { frame }
    }

    pub fn at(&self, t: f64) -> H2Point {
        self.frame.apply(H2Point { re: 0.0, im: t.exp() })
    }

    pub fn start(&self) -> f64 {
        angle_from_hom((self.frame.b, self.frame.d))
    }

    pub fn end(&self) -> f64 {
        angle_from_hom((self.frame.a, self.frame.c))
    }

    pub fn flow(&self, t: f64) -> H2Line {
        H2Line { frame: self.frame.mul(&Mobius::translation(t)) }
    }

    pub fn reversed(&self) -> H2Line {
        let j = Mobius { a: 0.0, b: -1.0, c: 1.0, d: 0.0 };
        H2Line { frame: self.frame.mul(&j) }
    }

    pub fn transformed(&self, g: &Mobius) -> H2Line {
        H2Line { frame: g.mul(&self.frame) }
    }

    /// Time of the projection of `x` onto the line and the distance to it.
    pub fn foot(&self, x: H2Point) -> (f64, f64) {
        let q = self.frame.inverse().apply(x);
        let t = q.re.hypot(q.im).ln();
        let h = (q.re.abs() / q.im).asinh();
        (t, h)
    }
}

/// Distance from `y` to the ray from `x` towards `eta`.
fn ray_distance(x: H2Point, y: H2Point, eta: f64) -> f64 {
    let ray = H2Line::ray(x, eta);
    let (t, h) = ray.foot(y);
    if t >= 0.0 {
        h
    } else {
        distance(x, y)
    }
}

pub fn shadow_from_point(r: f64, x: H2Point, y: H2Point, eta: f64) -> Decision {
    lt(ray_distance(x, y, eta), r)
}

pub fn shadow_from_boundary(r: f64, xi: f64, y: H2Point, eta: f64) -> Result<Decision> {
    let line = H2Line::between(xi, eta)?;
    Ok(lt(line.foot(y).1, r))
}

/// Euclidean picture of a hyperbolic ball after moving `η` to `∞`.
#[derive(Clone, Copy, Debug)]
struct Disk {
    c: f64,
    h: f64,
    rho: f64,
}

impl Disk {
    fn of_ball(z: H2Point, r: f64) -> Disk {
        Disk { c: z.re, h: z.im * r.cosh(), rho: z.im * r.sinh() }
    }

    fn half_chord(&self, u: f64) -> f64 {
        let du = u - self.c;
        (self.rho * self.rho - du * du).max(0.0).sqrt()
    }

    fn top(&self, u: f64) -> f64 {
        self.h + self.half_chord(u)
    }

    fn bottom(&self, u: f64) -> f64 {
        self.h - self.half_chord(u)
    }
}

/// Maximizer of `f` on `[lo, hi]` by golden-section search (exact for
/// unimodal `f`).
fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..200 {
        if (hi - lo) <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    let mut best = (lo + hi) / 2.0;
    for u in [lo, hi, a, b] {
        if f(u) > f(best) {
            best = u;
        }
    }
    best
}

/// Maximizer of a possibly multimodal `f` by dense sampling plus local
/// golden refinement.
fn sampled_max<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    const N: usize = 512;
    let step = (hi - lo) / N as f64;
    let vals: Vec<f64> = (0..=N).map(|k| f(lo + step * k as f64)).collect();
    let mut order: Vec<usize> = (0..=N).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let mut best = lo + step * order[0] as f64;
    for &k in order.iter().take(4) {
        let a = lo + step * k.saturating_sub(1) as f64;
        let b = (lo + step * (k + 1) as f64).min(hi);
        let u = golden_max(f, a, b);
        if f(u) > f(best) {
            best = u;
        }
    }
    best
}

/// `η ∈ O_r^+(x, y)`: some point of `B_r(x)` sees `B_r(y)` in direction `η`.
pub fn refined_shadow_plus(r: f64, x: H2Point, y: H2Point, eta: f64) -> Decision {
    let n = Mobius::normalizer(eta);
    let dx = Disk::of_ball(n.apply(x), r);
    let dy = Disk::of_ball(n.apply(y), r);
    let lo = (dx.c - dx.rho).max(dy.c - dy.rho);
    let hi = (dx.c + dx.rho).min(dy.c + dy.rho);
    let overlap = lt(lo, hi);
    if !overlap.value {
        return overlap;
    }
    let gap = |u: f64| dy.top(u) - dx.bottom(u);
    let u = golden_max(&gap, lo, hi);
    overlap.and(gt(dy.top(u), dx.bottom(u)))
}

/// `η ∈ O_r^-(x, y)`: every point of `B_r(x)` sees `B_r(y)` in direction `η`.
pub fn refined_shadow_minus(r: f64, x: H2Point, y: H2Point, eta: f64) -> Decision {
    let n = Mobius::normalizer(eta);
    let dx = Disk::of_ball(n.apply(x), r);
    let dy = Disk::of_ball(n.apply(y), r);
    let left = ge(dx.c - dx.rho, dy.c - dy.rho);
    let right = le(dx.c + dx.rho, dy.c + dy.rho);
    let range = left.and(right);
    if !range.value {
        return range;
    }
    let excess = |u: f64| dx.top(u) - dy.top(u);
    let u = sampled_max(&excess, dx.c - dx.rho, dx.c + dx.rho);
    range.and(le(dx.top(u), dy.top(u)))
}

/// `(ξ, η) ∈ L_r(x, y)`: the line from `ξ` to `η` passes within `r` of `x`
/// and afterwards within `r` of `y`.
pub fn corridor(r: f64, x: H2Point, y: H2Point, xi: f64, eta: f64) -> Result<Decision> {
    let line = H2Line::between(xi, eta)?;
    let (tx, hx) = line.foot(x);
    let (ty, hy) = line.foot(y);
    let near = lt(hx, r).and(lt(hy, r));
    if !near.value {
        return Ok(near);
    }
    let cr = r.cosh();
    let wx = (cr / hx.cosh()).max(1.0).acosh();
    let wy = (cr / hy.cosh()).max(1.0).acosh();
    Ok(near.and(lt(tx - wx, ty + wy)))
}

/// Angle of the boundary point seen from `x` in the direction of `z`,
/// together with the half-width (in the same angular coordinate) of the
/// arc `O_r^+(x, z)`, found by bisection on each side.
pub fn plus_shadow_arc(r: f64, x: H2Point, z: H2Point) -> Option<(f64, f64, f64)> {
    if distance(x, z) < 2.0 * r {
        return None;
    }
    let center = direction(x, z).expect("distinct points");
    let side = |sign: f64| {
        let (mut lo, mut hi) = (0.0f64, PI);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if refined_shadow_plus(r, x, z, canonical_angle(center + sign * mid)).value {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Some((center, side(-1.0), side(1.0)))
}
