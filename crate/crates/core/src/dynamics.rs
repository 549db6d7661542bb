//! Flow-box masses, the mixing correlation, the equidistribution measures
//! `ν^T` and counting asymptotics, all in ratio or bracket form so that the
//! total Bowen-Margulis mass never has to be known.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{apply_boundary, GroupPresentation};
use crate::orbit::{CountingCurve, OrbitBall};
use crate::psmeasure::{shadow_measure, BoundaryPartition, DiscreteMeasure};
use crate::spaces::{BoundaryPoint, BoundarySet, ModelPoint, Source};
use crate::word::Word;

/// Side of a flow box: `K_r^+(x, A)` constrains forward endpoints,
/// `K_r^−(y, B)` backward ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum KSide {
    Plus(BoundarySet),
    Minus(BoundarySet),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSetSpec {
    pub center: ModelPoint,
    pub r: f64,
    pub side: KSide,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub central: f64,
    pub upper: f64,
}

/// `r·∫_A μ(O_r(ξ, center)) dμ(ξ)` and its `e^{2δr}` multiple, integrated
/// over the cells whose midpoint lies in `A` (or `B`). Straddling shadow
/// cells widen the bracket; the central value is the geometric mean of the
/// two multipliers.
pub fn k_set_mass_bracket(dm: &DiscreteMeasure, bp: &BoundaryPartition, ks: &KSetSpec, delta: f64) -> Result<Bracket> {
    if dm.x != ks.center {
        return Err(Error::InvalidInput("flow box center differs from the measure basepoint".into()));
    }
    if !(ks.r > 0.0) {
        return Err(Error::InvalidInput(format!("flow box radius {} must be positive", ks.r)));
    }
    let set = match &ks.side {
        KSide::Plus(a) | KSide::Minus(a) => a,
    };
    let mut cells = Vec::new();
    for i in 0..bp.len() {
        if dm.weights[i] > 0.0 && set.contains(&bp.midpoint(i))? {
            cells.push(i);
        }
    }
    let terms: Vec<(f64, f64, f64)> = cells
        .par_iter()
        .map(|&i| -> Result<(f64, f64, f64)> {
            let sm = shadow_measure(dm, bp, ks.r, &Source::Boundary(bp.midpoint(i)), &ks.center)?;
            let w = dm.weights[i];
            Ok((w * (sm.mass - sm.uncertainty), w * sm.mass, w * (sm.mass + sm.uncertainty)))
        })
        .collect::<Result<_>>()?;
    let (lo, mid, hi) = terms.iter().fold((0.0, 0.0, 0.0), |a, t| (a.0 + t.0, a.1 + t.1, a.2 + t.2));
    let r = ks.r;
    Ok(Bracket {
        lower: r * lo,
        central: r * (delta * r).exp() * mid,
        upper: r * (2.0 * delta * r).exp() * hi,
    })
}

/// The two factors of the Gromov-product current at the orbit basepoints:
/// `μ_x` for backward endpoints and `μ_y` for forward ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentFactors {
    pub bp: BoundaryPartition,
    /// Exponent used in `e^{2δ·Gr}` and in the conformal change of basepoint;
    /// normally `δ̂`.
    pub delta: f64,
    pub mu_x: DiscreteMeasure,
    pub mu_y: DiscreteMeasure,
}

struct Atom {
    weight: f64,
    point: BoundaryPoint,
}

impl CurrentFactors {
    pub fn new(bp: BoundaryPartition, delta: f64, mu_x: DiscreteMeasure, mu_y: DiscreteMeasure) -> Result<Self> {
        if mu_x.weights.len() != bp.len() || mu_y.weights.len() != bp.len() {
            return Err(Error::InvalidInput("measures do not live on this partition".into()));
        }
        Ok(CurrentFactors { bp, delta, mu_x, mu_y })
    }

    fn atoms(&self, m: &DiscreteMeasure, scale: f64) -> Vec<Atom> {
        (0..self.bp.len())
            .filter(|&i| m.weights[i] > 0.0)
            .map(|i| Atom { weight: scale * m.weights[i], point: self.bp.midpoint(i) })
            .collect()
    }
}

/// `μ̄(L_r(x, γy) ∩ (γB × A))` with `dμ̄(ζ,ξ) = e^{2δ·Gr_x(ζ,ξ)} dμ_x(ζ) dμ_x(ξ)`.
///
/// The forward factor is evaluated as `dμ_x(ξ) = e^{δ·B_ξ(γy, x)} d(γ_*μ_y)(ξ)`:
/// the corridor's forward endpoints fill a set of size about `e^{−d(x,γy)}`
/// seen from `x`, but a set of bounded size seen from `γy`, so pulling back by
/// `γ` keeps the partition resolution adequate at every distance. Both
/// measures are put on the common scale of `μ_x`'s raw sum.
pub fn corridor_current_mass(
    cf: &CurrentFactors,
    gp: &GroupPresentation,
    gamma: &Word,
    r: f64,
    a_set: &BoundarySet,
    b_set: &BoundarySet,
) -> Result<f64> {
    let space = &gp.space;
    let x = &cf.mu_x.x;
    let y = &cf.mu_y.x;
    let gy = gp.act(gamma, y)?;
    let d = space.distance(x, &gy)?;
    if d < 3.0 * r {
        return Err(Error::InvalidInput(format!("corridor needs d(x, γy) = {d} ≥ 3r = {}", 3.0 * r)));
    }
    if a_set.is_empty() || b_set.is_empty() {
        return Ok(0.0);
    }
    let g = gp.element(gamma)?;
    let ginv = gp.element(&gamma.inverse())?;
    let gix = gp.act(&gamma.inverse(), x)?;
    let slack = r * (1.0 + 1e-6);
    // necessary conditions: ζ ∈ O⁺_r(γy, x), γ⁻¹ξ ∈ O⁺_r(γ⁻¹x, y)
    let back_window = space.plus_shadow_set(slack, &gy, x)?;
    let fwd_window = space.plus_shadow_set(slack, &gix, y)?;
    let scale = cf.mu_y.raw_total / cf.mu_x.raw_total;
    let mut zetas = Vec::new();
    for a in cf.atoms(&cf.mu_x, 1.0) {
        if back_window.contains(&a.point)? && b_set.contains(&apply_boundary(space, &ginv, &a.point)?)? {
            zetas.push(a);
        }
    }
    let mut xis = Vec::new();
    for b in cf.atoms(&cf.mu_y, scale) {
        if fwd_window.contains(&b.point)? {
            let xi = apply_boundary(space, &g, &b.point)?;
            if a_set.contains(&xi)? {
                let w = b.weight * (cf.delta * space.busemann(&xi, &gy, x)?).exp();
                xis.push(Atom { weight: w, point: xi });
            }
        }
    }
    let mut total = 0.0;
    for z in &zetas {
        for xi in &xis {
            if space.same_boundary(&z.point, &xi.point) {
                continue;
            }
            if space.corridor_contains(r, x, &gy, &z.point, &xi.point)?.value {
                let gr = space.gromov_product(x, &z.point, &xi.point)?;
                total += z.weight * xi.weight * (2.0 * cf.delta * gr).exp();
            }
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingSeries {
    pub r: f64,
    pub t_grid: Vec<f64>,
    /// `Σ_{|d(x,γy) − t| ≤ 3r} r·μ̄(L_r(x,γy) ∩ (γB × A))`.
    pub values: Vec<f64>,
    /// `values·e^{∓3δr}`.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// `(max − min)/mean` over the last five grid values.
    pub oscillation_ratio: f64,
    pub spectral_period: Option<f64>,
}

/// One value of the mixing correlation at time `t ≥ 6r`.
#[allow(clippy::too_many_arguments)]
pub fn mixing_correlation(
    cf: &CurrentFactors,
    gp: &GroupPresentation,
    ob: &OrbitBall,
    r: f64,
    a_set: &BoundarySet,
    b_set: &BoundarySet,
    t: f64,
) -> Result<Bracket> {
    let s = mixing_series(cf, gp, ob, r, a_set, b_set, &[t])?;
    Ok(Bracket { lower: s.lower[0], central: s.values[0], upper: s.upper[0] })
}

/// The mixing correlation over a grid of times; each orbit element's
/// corridor mass is computed once.
#[allow(clippy::too_many_arguments)]
pub fn mixing_series(
    cf: &CurrentFactors,
    gp: &GroupPresentation,
    ob: &OrbitBall,
    r: f64,
    a_set: &BoundarySet,
    b_set: &BoundarySet,
    t_grid: &[f64],
) -> Result<MixingSeries> {
    if ob.x != cf.mu_x.x || ob.y != cf.mu_y.x {
        return Err(Error::InvalidInput("orbit ball basepoints differ from the measure basepoints".into()));
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if let Some(&t) = t_grid.iter().find(|&&t| !(t >= 6.0 * r)) {
        return Err(Error::InvalidInput(format!("time {t} is below 6r = {}", 6.0 * r)));
    }
    let tmax = t_grid.iter().copied().fold(f64::MIN, f64::max);
    let tmin = t_grid.iter().copied().fold(f64::MAX, f64::min);
    if tmax + 3.0 * r > ob.radius + 1e-9 {
        return Err(Error::InvalidInput(format!(
            "time {tmax} + 3r exceeds the enumerated radius {}",
            ob.radius
        )));
    }
    let relevant: Vec<_> = ob
        .entries
        .iter()
        .filter(|e| e.distance >= tmin - 3.0 * r && e.distance <= tmax + 3.0 * r)
        .collect();
    let masses: Vec<f64> = relevant
        .par_iter()
        .map(|e| corridor_current_mass(cf, gp, &e.word, r, a_set, b_set))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = t_grid
        .iter()
        .map(|&t| {
            relevant
                .iter()
                .zip(&masses)
                .filter(|(e, _)| (e.distance - t).abs() <= 3.0 * r)
                .fold(0.0, |acc, (_, m)| acc + r * m)
        })
        .collect();
    let f = (3.0 * cf.delta * r).exp();
    let tail = &values[values.len().saturating_sub(5)..];
    Ok(MixingSeries {
        r,
        t_grid: t_grid.to_vec(),
        lower: values.iter().map(|v| v / f).collect(),
        upper: values.iter().map(|v| v * f).collect(),
        oscillation_ratio: relative_oscillation(tail),
        spectral_period: spectral_peak(t_grid, &values).map(|p| p.period),
        values,
    })
}

/// `(max − min)/mean`; zero for an empty or all-zero slice.
pub fn relative_oscillation(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if mean == 0.0 {
        return 0.0;
    }
    let max = v.iter().copied().fold(f64::MIN, f64::max);
    let min = v.iter().copied().fold(f64::MAX, f64::min);
    (max - min) / mean
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub period: f64,
    /// Share of the detrended signal's energy explained by the peak sinusoid.
    pub strength: f64,
}

/// Period maximizing the periodogram of the linearly detrended samples,
/// scanned over `[2.5·step, span/1.5]`.
pub fn spectral_peak(ts: &[f64], values: &[f64]) -> Option<SpectralPeak> {
    let n = ts.len();
    if n < 8 || values.len() != n {
        return None;
    }
    let mt = ts.iter().sum::<f64>() / n as f64;
    let mv = values.iter().sum::<f64>() / n as f64;
    let stt: f64 = ts.iter().map(|t| (t - mt) * (t - mt)).sum();
    let stv: f64 = ts.iter().zip(values).map(|(t, v)| (t - mt) * (v - mv)).sum();
    let slope = stv / stt;
    let resid: Vec<f64> = ts.iter().zip(values).map(|(t, v)| v - mv - slope * (t - mt)).collect();
    let energy: f64 = resid.iter().map(|r| r * r).sum();
    if !(energy > 0.0) {
        return None;
    }
    let step = (ts[n - 1] - ts[0]) / (n - 1) as f64;
    let span = ts[n - 1] - ts[0];
    let (pmin, pmax) = (2.5 * step, span / 1.5);
    if !(pmax > pmin) {
        return None;
    }
    let power = |p: f64| {
        let w = TAU / p;
        let (c, s) = ts.iter().zip(&resid).fold((0.0, 0.0), |(c, s), (t, r)| (c + r * (w * t).cos(), s + r * (w * t).sin()));
        c * c + s * s
    };
    let steps = 4000;
    let ratio = (pmax / pmin).ln();
    let mut best = (pmin, f64::MIN);
    for j in 0..=steps {
        let p = pmin * (ratio * j as f64 / steps as f64).exp();
        let pw = power(p);
        if pw > best.1 {
            best = (p, pw);
        }
    }
    // golden refinement around the best grid period
    let h = (ratio / steps as f64).exp();
    let (mut a, mut b) = (best.0 / h, best.0 * h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if power(c) > power(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let period = 0.5 * (a + b);
    Some(SpectralPeak { period, strength: (2.0 * power(period) / n as f64 / energy).min(1.0) })
}

/// Continuous bump on a boundary cell: arcs get a flat top with linear
/// ramps over `ramp` (fraction of the width) at both ends; tree cylinders
/// are clopen, so their indicator is already continuous.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CellProfile {
    Arc { start: f64, width: f64, ramp: f64 },
    Cylinder(Word),
}

impl CellProfile {
    pub fn eval(&self, p: &BoundaryPoint) -> f64 {
        match (self, p) {
            (CellProfile::Arc { start, width, ramp }, BoundaryPoint::H2(t) | BoundaryPoint::E2(t)) => {
                let u = (t - start).rem_euclid(TAU);
                if u >= *width {
                    return 0.0;
                }
                let edge = ramp * width;
                if edge <= 0.0 {
                    return 1.0;
                }
                (u.min(width - u) / edge).min(1.0)
            }
            (CellProfile::Cylinder(w), BoundaryPoint::Tree(e))
                if crate::spaces::boundary_set::cylinder_contains(w, e) => {
                    1.0
                }
            _ => 0.0,
        }
    }

    /// `∫ profile dμ`, with each cell represented by its midpoint.
    pub fn integrate(&self, dm: &DiscreteMeasure, bp: &BoundaryPartition) -> f64 {
        (0..bp.len()).filter(|&i| dm.weights[i] > 0.0).map(|i| dm.weights[i] * self.eval(&bp.midpoint(i))).sum()
    }
}

/// Test function on `X̄ × X̄`, evaluated on `(γy, γ⁻¹x)` through the
/// directions of `γy` from `x` and of `γ⁻¹x` from `y`. Entries without a
/// direction (`γy = x` or `γ⁻¹x = y`) contribute only to constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    Constant(f64),
    CellPair { a: CellProfile, b: CellProfile },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistStatistic {
    pub delta_hat: f64,
    pub t_grid: Vec<f64>,
    /// `values[f][j] = δ̂·e^{−δ̂T_j}·Σ_{d(x,γy) ≤ T_j} f(γy, γ⁻¹x)`.
    pub values: Vec<Vec<f64>>,
}

pub fn equidist_statistic(
    gp: &GroupPresentation,
    ob: &OrbitBall,
    delta_hat: f64,
    fs: &[TestFunction],
    t_grid: &[f64],
) -> Result<EquidistStatistic> {
    if let Some(&t) = t_grid.iter().find(|&&t| t > ob.radius + 1e-9) {
        return Err(Error::InvalidInput(format!("time {t} exceeds the enumerated radius {}", ob.radius)));
    }
    let back: Vec<Option<BoundaryPoint>> = ob
        .entries
        .par_iter()
        .map(|e| {
            let p = gp.act(&e.word.inverse(), &ob.x)?;
            gp.space.direction(&ob.y, &p)
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(fs.len());
    for f in fs {
        let terms: Vec<f64> = ob
            .entries
            .iter()
            .zip(&back)
            .map(|(e, q)| match f {
                TestFunction::Constant(c) => *c,
                TestFunction::CellPair { a, b } => match (&e.direction, q) {
                    (Some(p), Some(q)) => a.eval(p) * b.eval(q),
                    _ => 0.0,
                },
            })
            .collect();
        // entries are in ascending distance, so one pass serves the grid
        let mut order: Vec<usize> = (0..t_grid.len()).collect();
        order.sort_by(|&i, &j| t_grid[i].total_cmp(&t_grid[j]));
        let mut row = vec![0.0; t_grid.len()];
        let mut acc = 0.0;
        let mut k = 0;
        for &j in &order {
            while k < terms.len() && ob.entries[k].distance <= t_grid[j] {
                acc += terms[k];
                k += 1;
            }
            row[j] = delta_hat * (-delta_hat * t_grid[j]).exp() * acc;
        }
        values.push(row);
    }
    Ok(EquidistStatistic { delta_hat, t_grid: t_grid.to_vec(), values })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Trailing max/min below which the counting quantity is converging.
    pub converging_ratio: f64,
    /// Allowed distance between spectral peak and arithmetic period.
    pub period_tolerance: f64,
    /// Trailing mean below this fraction of the global mean means decaying.
    pub decay_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { converging_ratio: 1.2, period_tolerance: 0.05, decay_fraction: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingClass {
    Converging,
    OscillatingPeriodic,
    Decaying,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingAsymptotic {
    pub delta_hat: f64,
    pub grid: Vec<f64>,
    /// `δ̂·e^{−δ̂R}·N(R)`.
    pub values: Vec<f64>,
    pub trailing_mean: f64,
    pub trailing_min: f64,
    pub trailing_max: f64,
    pub global_mean: f64,
    pub spectral_period: Option<f64>,
    pub classification: CountingClass,
    pub thresholds: Thresholds,
}

impl CountingAsymptotic {
    pub fn trailing_ratio(&self) -> f64 {
        self.trailing_max / self.trailing_min
    }
}

/// Evaluates `δ̂·e^{−δ̂R}·N(R)` on `grid` and classifies it from the
/// trailing quarter: decaying, converging, oscillating with the arithmetic
/// period `period_hint`, or unresolved (checked in that order). The spectral
/// peak is taken over the whole detrended grid; a quarter of a short grid
/// holds too few periods to locate it.
pub fn counting_asymptotic(
    cc: &CountingCurve,
    delta_hat: f64,
    grid: &[f64],
    period_hint: Option<f64>,
    th: Thresholds,
) -> Result<CountingAsymptotic> {
    if grid.len() < 4 {
        return Err(Error::InsufficientData(format!("{} grid points; at least 4 are needed", grid.len())));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be strictly ascending".into()));
    }
    if grid[grid.len() - 1] > cc.radius + 1e-9 {
        return Err(Error::InvalidInput(format!("grid exceeds the enumerated radius {}", cc.radius)));
    }
    let values: Vec<f64> = grid.iter().map(|&r| delta_hat * (-delta_hat * r).exp() * cc.count(r) as f64).collect();
    let start = grid.len() - (grid.len() / 4).max(2);
    let tail = &values[start..];
    let trailing_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let trailing_min = tail.iter().copied().fold(f64::MAX, f64::min);
    let trailing_max = tail.iter().copied().fold(f64::MIN, f64::max);
    let global_mean = values.iter().sum::<f64>() / values.len() as f64;
    let spectral_period = spectral_peak(grid, &values).map(|p| p.period);
    let classification = if trailing_mean < th.decay_fraction * global_mean {
        CountingClass::Decaying
    } else if trailing_max / trailing_min < th.converging_ratio {
        CountingClass::Converging
    } else if matches!((spectral_period, period_hint), (Some(p), Some(c)) if (p - c).abs() <= th.period_tolerance) {
        CountingClass::OscillatingPeriodic
    } else {
        CountingClass::Unresolved
    };
    Ok(CountingAsymptotic {
        delta_hat,
        grid: grid.to_vec(),
        values,
        trailing_mean,
        trailing_min,
        trailing_max,
        global_mean,
        spectral_period,
        classification,
        thresholds: th,
    })
}

/// Points `lo, lo + step, …` up to `hi` (inclusive within rounding).
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|j| lo + step * j as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_peak_finds_sine_period() {
        let ts = grid(0.0, 10.0, 0.1);
        let v: Vec<f64> = ts.iter().map(|t| 2.0 + 0.3 * t + (TAU * t / 1.7).sin()).collect();
        let p = spectral_peak(&ts, &v).unwrap();
        assert!((p.period - 1.7).abs() < 0.02, "{p:?}");
    }

    #[test]
    fn hat_profile_ramps() {
        let h = CellProfile::Arc { start: 1.0, width: 1.0, ramp: 0.1 };
        assert_eq!(h.eval(&BoundaryPoint::H2(1.5)), 1.0);
        assert!((h.eval(&BoundaryPoint::H2(1.05)) - 0.5).abs() < 1e-12);
        assert_eq!(h.eval(&BoundaryPoint::H2(2.5)), 0.0);
    }
}
