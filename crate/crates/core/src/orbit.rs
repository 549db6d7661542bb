//! Orbit balls `{γ : d(x, γy) ≤ R}`, counting functions, Poincaré partial
//! sums and critical-exponent estimates.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::real;
use crate::groups::{GroupPresentation, PingPong};
use crate::spaces::{BoundaryPoint, ModelPoint, ModelSpace, Mobius};
use crate::word::{inverse_letter, Letter, Word};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitEntry {
    pub word: Word,
    pub point: ModelPoint,
    pub distance: f64,
    /// Endpoint of the ray from `x` through `γy`; `None` when `γy = x`.
    pub direction: Option<BoundaryPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitBall {
    pub space: ModelSpace,
    pub x: ModelPoint,
    pub y: ModelPoint,
    pub radius: f64,
    /// Sorted by distance, then word.
    pub entries: Vec<OrbitEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationOptions {
    /// Maximum number of accepted search nodes.
    pub budget: u64,
    /// Radius of the exhaustive completeness audit; `0` disables it.
    pub audit_radius: f64,
    /// Depth of the word sample used to estimate the pruning margin.
    pub margin_depth: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { budget: 10_000_000, audit_radius: 6.0, margin_depth: 6 }
    }
}

/// Result of a possibly truncated enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub ball: OrbitBall,
    pub complete: bool,
    /// Last word length whose subtree was fully explored.
    pub completed_depth: usize,
    pub pruning_margin: f64,
    pub nodes: u64,
}

/// Incremental state of a word during the search.
#[derive(Clone)]
enum Cursor {
    H2(Mobius),
    Tree,
}

struct Walker<'a> {
    gp: &'a GroupPresentation,
    x: &'a ModelPoint,
    y: &'a ModelPoint,
    letters: Vec<Option<Mobius>>,
}

impl<'a> Walker<'a> {
    fn new(gp: &'a GroupPresentation, x: &'a ModelPoint, y: &'a ModelPoint) -> Self {
        let letters = (0..2 * gp.rank() as Letter).map(|l| gp.letter_matrix(l)).collect();
        Walker { gp, x, y, letters }
    }

    fn root(&self) -> Cursor {
        match self.gp.space {
            ModelSpace::H2 => Cursor::H2(Mobius::IDENTITY),
            _ => Cursor::Tree,
        }
    }

    fn step(&self, c: &Cursor, l: Letter) -> Cursor {
        match c {
            Cursor::H2(m) => Cursor::H2(m.mul(&self.letters[l as usize].unwrap())),
            Cursor::Tree => Cursor::Tree,
        }
    }

    fn point(&self, c: &Cursor, w: &Word) -> ModelPoint {
        match (c, self.y, &self.gp.space) {
            (Cursor::H2(m), ModelPoint::H2(p), _) => ModelPoint::H2(m.apply(*p)),
            (Cursor::Tree, ModelPoint::Tree(p), ModelSpace::Tree(t)) => ModelPoint::Tree(t.translate_point(w, p)),
            _ => unreachable!("checked at entry"),
        }
    }

    fn distance(&self, p: &ModelPoint) -> f64 {
        self.gp.space.distance(self.x, p).expect("same model")
    }

    fn entry(&self, w: Word, p: ModelPoint, d: f64) -> OrbitEntry {
        let direction = self.gp.space.direction(self.x, &p).expect("same model");
        OrbitEntry { word: w, point: p, distance: d, direction }
    }
}

fn check_inputs(gp: &GroupPresentation, x: &ModelPoint, y: &ModelPoint, r: f64) -> Result<()> {
    if matches!(gp.space, ModelSpace::E2) {
        return Err(Error::Unsupported("the Euclidean plane carries no group actions here".into()));
    }
    gp.space.check_point(x)?;
    gp.space.check_point(y)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("radius {r} must be finite and nonnegative")));
    }
    for g in &gp.generators {
        if !matches!(g.classification, crate::groups::Classification::Axial { .. }) {
            return Err(Error::InvalidInput(format!(
                "generator {} is not axial; orbit enumeration needs a free discrete presentation",
                g.word
            )));
        }
    }
    Ok(())
}

/// Largest decrease of `d(x, wy)` along the prefixes of any word of length at
/// most `depth`, inflated by `1/0.9`.
pub fn pruning_margin(gp: &GroupPresentation, x: &ModelPoint, y: &ModelPoint, depth: usize) -> Result<f64> {
    check_inputs(gp, x, y, 0.0)?;
    let walker = Walker::new(gp, x, y);
    let root = walker.root();
    let d0 = walker.distance(&walker.point(&root, &Word::identity()));
    // (word, cursor, distance, running max of distances along the prefix)
    let mut level = vec![(Word::identity(), root, d0, d0)];
    let mut drop = 0f64;
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * 3);
        for (w, c, _, peak) in &level {
            for l in 0..2 * gp.rank() as Letter {
                if w.last() == Some(inverse_letter(l)) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                let cc = walker.step(c, l);
                let d = walker.distance(&walker.point(&cc, &v));
                drop = drop.max(peak - d);
                next.push((v, cc, d, peak.max(d)));
            }
        }
        level = next;
    }
    Ok(drop / 0.9)
}

/// All reduced words of length at most `depth` with `d(x, wy) ≤ r`, without
/// pruning.
pub fn exhaustive_ball(gp: &GroupPresentation, x: &ModelPoint, y: &ModelPoint, r: f64, depth: usize) -> Result<Vec<Word>> {
    check_inputs(gp, x, y, r)?;
    let mut out = Vec::new();
    for len in 0..=depth {
        for w in Word::all_of_length(gp.rank(), len) {
            let p = gp.act(&w, y)?;
            if gp.space.distance(x, &p)? <= r {
                out.push(w);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Word length beyond which no orbit point lies in the ball, with two extra
/// levels of slack: the first length whose every word lands outside `R`.
pub fn safe_depth(gp: &GroupPresentation, x: &ModelPoint, y: &ModelPoint, r: f64, max_depth: usize) -> Result<usize> {
    for len in 1..=max_depth {
        let mut all_out = true;
        for w in Word::all_of_length(gp.rank(), len) {
            if gp.space.distance(x, &gp.act(&w, y)?)? <= r {
                all_out = false;
                break;
            }
        }
        if all_out {
            return Ok(len + 2);
        }
    }
    Err(Error::AuditFailed(format!("no word length up to {max_depth} clears radius {r}")))
}

pub fn enumerate_ball(gp: &GroupPresentation, x: &ModelPoint, y: &ModelPoint, r: f64) -> Result<OrbitBall> {
    let e = enumerate_ball_with(gp, x, y, r, &EnumerationOptions::default())?;
    if e.complete {
        Ok(e.ball)
    } else {
        Err(Error::BudgetExceeded { budget: EnumerationOptions::default().budget, completed_depth: e.completed_depth })
    }
}

/// Breadth-first search over reduced words; a node is expanded while
/// `d(x, wy) ≤ R + margin`. Stops early (returning `complete = false`) when
/// the node budget runs out.
pub fn enumerate_ball_with(
    gp: &GroupPresentation,
    x: &ModelPoint,
    y: &ModelPoint,
    r: f64,
    opts: &EnumerationOptions,
) -> Result<Enumeration> {
    check_inputs(gp, x, y, r)?;
    if let PingPong::Violation { reason, .. } = crate::groups::verify_ping_pong(gp) {
        return Err(Error::PingPong(reason));
    }
    let margin = pruning_margin(gp, x, y, opts.margin_depth)?;
    let mut result = search(gp, x, y, r, margin, opts.budget);
    if result.complete && opts.audit_radius > 0.0 {
        let ra = opts.audit_radius.min(r);
        let small = search(gp, x, y, ra, margin, opts.budget);
        let depth = safe_depth(gp, x, y, ra, 40)?;
        let oracle = exhaustive_ball(gp, x, y, ra, depth)?;
        let mut found: Vec<Word> = small.ball.entries.iter().map(|e| e.word.clone()).collect();
        found.sort();
        if found != oracle {
            return Err(Error::AuditFailed(format!(
                "pruned search found {} elements within radius {ra}, exhaustive search {}",
                found.len(),
                oracle.len()
            )));
        }
    }
    result.pruning_margin = margin;
    Ok(result)
}

fn search(gp: &GroupPresentation, x: &ModelPoint, y: &ModelPoint, r: f64, margin: f64, budget: u64) -> Enumeration {
    let walker = Walker::new(gp, x, y);
    let root = walker.root();
    let id = Word::identity();
    let p0 = walker.point(&root, &id);
    let d0 = walker.distance(&p0);
    let limit = r + margin;
    let mut entries = Vec::new();
    if d0 <= r {
        entries.push(walker.entry(id.clone(), p0, d0));
    }
    let mut frontier: Vec<(Word, Cursor)> = if d0 <= limit { vec![(id, root)] } else { Vec::new() };
    let mut nodes = frontier.len() as u64;
    let mut depth = 0;
    let mut complete = true;
    let nletters = 2 * gp.rank() as Letter;
    while !frontier.is_empty() {
        let children: Vec<(Word, Cursor, ModelPoint, f64)> = frontier
            .par_iter()
            .flat_map_iter(|(w, c)| {
                let walker = &walker;
                (0..nletters).filter_map(move |l| {
                    if w.last() == Some(inverse_letter(l)) {
                        return None;
                    }
                    let mut v = w.clone();
                    v.push(l);
                    let cc = walker.step(c, l);
                    let p = walker.point(&cc, &v);
                    let d = walker.distance(&p);
                    (d <= limit).then_some((v, cc, p, d))
                })
            })
            .collect();
        if nodes + children.len() as u64 > budget {
            complete = false;
            break;
        }
        nodes += children.len() as u64;
        depth += 1;
        let accepted: Vec<OrbitEntry> = children
            .par_iter()
            .filter(|(_, _, _, d)| *d <= r)
            .map(|(v, _, p, d)| walker.entry(v.clone(), p.clone(), *d))
            .collect();
        entries.extend(accepted);
        frontier = children.into_iter().map(|(v, c, _, _)| (v, c)).collect();
    }
    entries.par_sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.word.cmp(&b.word)));
    Enumeration {
        ball: OrbitBall { space: gp.space.clone(), x: x.clone(), y: y.clone(), radius: r, entries },
        complete,
        completed_depth: depth,
        pruning_margin: margin,
        nodes,
    }
}

impl OrbitBall {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> BTreeSet<Word> {
        self.entries.iter().map(|e| e.word.clone()).collect()
    }

    /// Sub-ball of radius `r ≤ self.radius`.
    pub fn restricted(&self, r: f64) -> OrbitBall {
        OrbitBall {
            entries: self.entries.iter().filter(|e| e.distance <= r).cloned().collect(),
            radius: r.min(self.radius),
            ..self.clone()
        }
    }

    /// CSV with columns `word,distance,direction`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidInput(format!("csv output failed: {e}"));
        w.write_record(["word", "distance", "direction"]).map_err(io)?;
        for e in &self.entries {
            let dir = e.direction.as_ref().map(|d| d.to_string()).unwrap_or_default();
            w.write_record([e.word.to_string(), real(e.distance), dir]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingCurve {
    /// Ascending.
    pub distances: Vec<f64>,
    pub radius: f64,
}

pub fn counting_curve(ob: &OrbitBall) -> CountingCurve {
    let mut distances: Vec<f64> = ob.entries.iter().map(|e| e.distance).collect();
    distances.sort_by(f64::total_cmp);
    CountingCurve { distances, radius: ob.radius }
}

impl CountingCurve {
    /// `N(R) = #{d ≤ R}`.
    pub fn count(&self, r: f64) -> usize {
        self.distances.partition_point(|&d| d <= r)
    }

    /// Distinct distances in `[lo, hi]`.
    pub fn jump_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &d in &self.distances {
            if d >= lo && d <= hi && out.last() != Some(&d) {
                out.push(d);
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W, grid: &[f64]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidInput(format!("csv output failed: {e}"));
        w.write_record(["radius", "count"]).map_err(io)?;
        for &r in grid {
            w.write_record([real(r), self.count(r).to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// `Σ e^{−s·d(x,γy)}` over the ball, summed in ascending distance.
pub fn poincare_partial(ob: &OrbitBall, s: f64) -> f64 {
    let mut d: Vec<f64> = ob.entries.iter().map(|e| e.distance).collect();
    d.sort_by(f64::total_cmp);
    d.iter().map(|&t| (-s * t).exp()).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMethod {
    LogCountSlope,
    PoincareRoot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponentEstimate {
    pub delta_hat: f64,
    pub method: DeltaMethod,
    pub window: (f64, f64),
    /// Largest deviation of `ln N` from the fitted line.
    pub residual: f64,
    pub jump_points: usize,
    /// Exponent at which the two half-window Poincaré increments balance.
    pub root_test: Option<f64>,
    pub disagreement: bool,
    /// `ln N` is better fit by `ln R` than by `R`: polynomial growth, as for
    /// elementary groups.
    pub polynomial_growth: bool,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let resid = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).abs()).fold(0.0, f64::max);
    (slope, icpt, resid)
}

fn root_test(cc: &CountingCurve, lo: f64, hi: f64) -> Option<f64> {
    let mid = 0.5 * (lo + hi);
    let inner: Vec<f64> = cc.distances.iter().copied().filter(|&d| d > lo && d <= mid).collect();
    let outer: Vec<f64> = cc.distances.iter().copied().filter(|&d| d > mid && d <= hi).collect();
    if inner.is_empty() || outer.is_empty() {
        return None;
    }
    // ln(I_outer/I_inner), decreasing in s; shift by the window start to keep
    // the exponentials in range
    let h = |s: f64| {
        let a: f64 = inner.iter().map(|d| (-s * (d - lo)).exp()).sum();
        let b: f64 = outer.iter().map(|d| (-s * (d - lo)).exp()).sum();
        b.ln() - a.ln()
    };
    let (mut a, mut b) = (0.0, 20.0);
    if h(a) <= 0.0 || h(b) >= 0.0 {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if h(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Slope of `ln N(R)` against `R` over the jump points in the window, with
/// the Poincaré root test as a cross-check.
pub fn estimate_delta(cc: &CountingCurve, window: (f64, f64)) -> Result<CriticalExponentEstimate> {
    let (lo, hi) = window;
    if !(hi - lo >= 4.0) {
        return Err(Error::InvalidInput(format!("window ({lo}, {hi}) must span at least 4")));
    }
    if hi > cc.radius + 1e-9 {
        return Err(Error::InvalidInput(format!(
            "window end {hi} exceeds the enumerated radius {}",
            cc.radius
        )));
    }
    let jumps = cc.jump_points(lo, hi);
    if jumps.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "{} jump points in ({lo}, {hi}); at least 8 are needed",
            jumps.len()
        )));
    }
    let logn: Vec<f64> = jumps.iter().map(|&r| (cc.count(r) as f64).ln()).collect();
    let (slope, _, residual) = least_squares(&jumps, &logn);
    let logr: Vec<f64> = jumps.iter().map(|r| r.ln()).collect();
    let (_, _, resid_loglog) = least_squares(&logr, &logn);
    let root = root_test(cc, lo, hi);
    Ok(CriticalExponentEstimate {
        delta_hat: slope,
        method: DeltaMethod::LogCountSlope,
        window,
        residual,
        jump_points: jumps.len(),
        root_test: root,
        disagreement: root.is_none_or(|r| (r - slope).abs() > 0.05),
        polynomial_growth: resid_loglog < residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub s: f64,
    pub radii: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub increments: Vec<f64>,
    pub verdict: DivergenceVerdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceVerdict {
    /// Increments stay comparable to their average: evidence of divergence.
    NonVanishing,
    /// Increments decay.
    Vanishing,
    /// Nothing beyond the identity.
    Trivial,
}

/// Partial sums of `P(s; x, y)` at radii `1, 2, …, ⌊R⌋` and their increments.
pub fn divergence_diagnostic(ob: &OrbitBall, s: f64) -> DivergenceReport {
    let cc = counting_curve(ob);
    let n = ob.radius.floor() as usize;
    let radii: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    let mut partial_sums = Vec::with_capacity(n);
    let mut acc = 0.0;
    let mut idx = 0;
    for &r in &radii {
        while idx < cc.distances.len() && cc.distances[idx] <= r {
            acc += (-s * cc.distances[idx]).exp();
            idx += 1;
        }
        partial_sums.push(acc);
    }
    let mut increments = Vec::with_capacity(n);
    let mut prev = cc.distances.iter().filter(|&&d| d <= 0.0).map(|&d| (-s * d).exp()).sum::<f64>();
    for &p in &partial_sums {
        increments.push(p - prev);
        prev = p;
    }
    let verdict = if ob.entries.len() <= 1 || increments.len() < 3 {
        DivergenceVerdict::Trivial
    } else {
        let mean = increments.iter().sum::<f64>() / increments.len() as f64;
        let k = (increments.len() / 3).max(2);
        let tail = increments[increments.len() - k..].iter().sum::<f64>() / k as f64;
        if mean > 0.0 && tail >= 0.5 * mean {
            DivergenceVerdict::NonVanishing
        } else {
            DivergenceVerdict::Vanishing
        }
    };
    DivergenceReport { s, radii, partial_sums, increments, verdict }
}
