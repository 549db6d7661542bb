//! Boundary partitions, Patterson-Sullivan approximants built from orbit
//! balls, and the Gromov-product current.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::real;
use crate::orbit::OrbitBall;
use crate::spaces::h2::canonical_angle;
use crate::spaces::{BoundaryPoint, BoundarySet, End, ModelPoint, ModelSpace, Source};
use crate::word::{inverse_letter, Letter, Word};

/// Disjoint cells covering the boundary: `2^k` equal arcs of the circle, or
/// the cylinders of depth `k` in a tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPartition {
    pub space: ModelSpace,
    pub k: usize,
    /// Tree cells, sorted; empty for circle partitions.
    prefixes: Vec<Word>,
    len: usize,
    /// Start of arc 0 (circle partitions).
    offset: f64,
}

pub fn build_partition(space: &ModelSpace, k: usize) -> Result<BoundaryPartition> {
    if k == 0 {
        return Err(Error::InvalidInput("partition resolution must be at least 1".into()));
    }
    match space {
        ModelSpace::H2 | ModelSpace::E2 => {
            if k > 30 {
                return Err(Error::InvalidInput(format!("circle resolution {k} exceeds 30")));
            }
            Ok(BoundaryPartition { space: space.clone(), k, prefixes: Vec::new(), len: 1 << k, offset: 0.0 })
        }
        ModelSpace::Tree(t) => {
            let rank = t.rank();
            let count = 2 * rank * (2 * rank - 1).pow(k as u32 - 1);
            if count > 5_000_000 {
                return Err(Error::InvalidInput(format!("{count} cylinders at depth {k} is too many")));
            }
            let prefixes = Word::all_of_length(rank, k);
            Ok(BoundaryPartition { space: space.clone(), k, len: prefixes.len(), prefixes, offset: 0.0 })
        }
    }
}

impl BoundaryPartition {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn width(&self) -> f64 {
        TAU / self.len as f64
    }

    /// Rotates a circle partition so that arc 0 starts at `offset`.
    pub fn with_offset(mut self, offset: f64) -> Result<Self> {
        if matches!(self.space, ModelSpace::Tree(_)) {
            return Err(Error::Unsupported("tree partitions have no rotation".into()));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidInput(format!("offset {offset} is not finite")));
        }
        self.offset = offset.rem_euclid(TAU);
        Ok(self)
    }

    fn start(&self, i: usize) -> f64 {
        self.offset + i as f64 * self.width()
    }

    /// Index of the cell containing `p`.
    pub fn lookup(&self, p: &BoundaryPoint) -> Result<usize> {
        match (&self.space, p) {
            (ModelSpace::H2, BoundaryPoint::H2(t)) | (ModelSpace::E2, BoundaryPoint::E2(t)) => {
                let t = canonical_angle(*t - self.offset);
                Ok(((t / self.width()) as usize).min(self.len - 1))
            }
            (ModelSpace::Tree(_), BoundaryPoint::Tree(e)) => {
                let head = e.head(self.k);
                self.prefixes
                    .binary_search(&head)
                    .map_err(|_| Error::InvalidInput(format!("end {e} uses an unknown generator")))
            }
            _ => Err(Error::ModelMismatch { expected: self.space.kind(), found: p.kind() }),
        }
    }

    /// Interior representative: arc midpoint, or the end continuing the
    /// cylinder prefix with its last letter forever.
    pub fn midpoint(&self, i: usize) -> BoundaryPoint {
        match &self.space {
            ModelSpace::H2 => BoundaryPoint::H2(canonical_angle(self.start(i) + 0.5 * self.width())),
            ModelSpace::E2 => BoundaryPoint::E2(canonical_angle(self.start(i) + 0.5 * self.width())),
            ModelSpace::Tree(_) => {
                let w = &self.prefixes[i];
                BoundaryPoint::Tree(End::ray(&w.prefix(w.len() - 1), w.last().unwrap()))
            }
        }
    }

    /// Points spread through the cell, used to detect cells straddling a set
    /// boundary. Arcs: `n` evenly spaced points from just after the start to
    /// just before the end. Cylinders: one end per continuation of depth
    /// `⌈log₃ n⌉`.
    pub fn samples(&self, i: usize, n: usize) -> Vec<BoundaryPoint> {
        match &self.space {
            ModelSpace::H2 | ModelSpace::E2 => {
                let w = self.width();
                let lo = self.start(i);
                (0..n.max(2))
                    .map(|j| {
                        let t = canonical_angle(lo + w * (1e-9 + j as f64 / (n.max(2) - 1) as f64 * (1.0 - 2e-9)));
                        match self.space {
                            ModelSpace::H2 => BoundaryPoint::H2(t),
                            _ => BoundaryPoint::E2(t),
                        }
                    })
                    .collect()
            }
            ModelSpace::Tree(t) => {
                let rank = t.rank();
                let mut words = vec![self.prefixes[i].clone()];
                while words.len() < n {
                    let next: Vec<Word> = words.iter().flat_map(|w| extensions(w, rank)).collect();
                    if next.len() > 4 * n.max(1) {
                        break;
                    }
                    words = next;
                }
                words.iter().map(|w| BoundaryPoint::Tree(End::ray(&w.prefix(w.len() - 1), w.last().unwrap()))).collect()
            }
        }
    }

    pub fn cell_set(&self, i: usize) -> BoundarySet {
        match &self.space {
            ModelSpace::Tree(t) => BoundarySet::cylinders(t.rank(), vec![self.prefixes[i].clone()]),
            _ => BoundarySet::arc(self.start(i), self.width(), true, false).expect("nonempty arc"),
        }
    }

    /// `[lo, hi)` for arcs, the prefix for cylinders.
    pub fn describe(&self, i: usize) -> String {
        match &self.space {
            ModelSpace::Tree(_) => self.prefixes[i].to_string(),
            _ => format!("[{}, {})", real(self.start(i)), real(self.start(i) + self.width())),
        }
    }

    /// Cells meeting `set`.
    pub fn cells_meeting(&self, set: &BoundarySet) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for i in 0..self.len {
            if self.cell_set(i).intersects(set)? {
                out.push(i);
            }
        }
        Ok(out)
    }
}

fn extensions(w: &Word, rank: usize) -> Vec<Word> {
    (0..2 * rank as Letter)
        .filter(|&l| w.last() != Some(inverse_letter(l)))
        .map(|l| {
            let mut v = w.clone();
            v.push(l);
            v
        })
        .collect()
}

/// Weights per partition cell, normalized to total mass one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub x: ModelPoint,
    pub s: f64,
    pub k: usize,
    pub weights: Vec<f64>,
    pub total: f64,
    /// `Σ e^{−s·d(x,γy)}` over the entries with a direction, before
    /// normalization.
    pub raw_total: f64,
}

impl DiscreteMeasure {
    pub fn max_cell_mass(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn raw(&self, i: usize) -> f64 {
        self.weights[i] * self.raw_total
    }

    pub fn mass_of(&self, cells: &[usize]) -> f64 {
        cells.iter().map(|&i| self.weights[i]).sum()
    }

    /// Sums the weights of `fine` cells into the cells of `coarse`.
    pub fn coarsened(&self, fine: &BoundaryPartition, coarse: &BoundaryPartition) -> Result<DiscreteMeasure> {
        if fine.len() != self.weights.len() {
            return Err(Error::InvalidInput("measure does not live on the fine partition".into()));
        }
        let mut weights = vec![0.0; coarse.len()];
        for (i, &w) in self.weights.iter().enumerate() {
            weights[coarse.lookup(&fine.midpoint(i))?] += w;
        }
        Ok(DiscreteMeasure { weights, k: coarse.k, ..self.clone() })
    }

    pub fn write_csv<W: Write>(&self, out: W, bp: &BoundaryPartition) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidInput(format!("csv output failed: {e}"));
        w.write_record(["cell", "description", "weight"]).map_err(io)?;
        for (i, x) in self.weights.iter().enumerate() {
            w.write_record([i.to_string(), bp.describe(i), real(*x)]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// `s = δ̂·(1 + 1/R_max)`.
pub fn default_exponent(delta_hat: f64, r_max: f64) -> f64 {
    delta_hat * (1.0 + 1.0 / r_max)
}

fn check_space(ob: &OrbitBall, bp: &BoundaryPartition) -> Result<()> {
    if ob.space != bp.space {
        return Err(Error::ModelMismatch { expected: bp.space.kind(), found: ob.space.kind() });
    }
    Ok(())
}

/// Raw per-cell sums `Σ e^{−s·d}` over the entries of `ob` that carry a
/// direction, accumulated in the ball's (ascending-distance) order.
fn raw_weights(ob: &OrbitBall, s: f64, bp: &BoundaryPartition, keep: Option<&(dyn Fn(&Word) -> bool + Sync)>) -> Result<Vec<f64>> {
    let cells: Vec<Option<(usize, f64)>> = ob
        .entries
        .par_iter()
        .map(|e| -> Result<Option<(usize, f64)>> {
            if keep.is_some_and(|f| !f(&e.word)) {
                return Ok(None);
            }
            match &e.direction {
                Some(d) => Ok(Some((bp.lookup(d)?, (-s * e.distance).exp()))),
                None => Ok(None),
            }
        })
        .collect::<Result<_>>()?;
    let mut w = vec![0.0; bp.len()];
    for (i, v) in cells.into_iter().flatten() {
        w[i] += v;
    }
    Ok(w)
}

fn normalized(x: ModelPoint, s: f64, k: usize, raw: Vec<f64>) -> Result<DiscreteMeasure> {
    let raw_total: f64 = raw.iter().sum();
    if !(raw_total > 0.0) {
        return Err(Error::InsufficientData("orbit ball has no entries besides the identity".into()));
    }
    let weights: Vec<f64> = raw.iter().map(|w| w / raw_total).collect();
    let total = weights.iter().sum();
    Ok(DiscreteMeasure { x, s, k, weights, total, raw_total })
}

/// Patterson-Sullivan approximant at `ob.x` with exponent `s > δ̂`.
pub fn patterson_sullivan(ob: &OrbitBall, s: f64, delta_hat: f64, bp: &BoundaryPartition) -> Result<DiscreteMeasure> {
    check_space(ob, bp)?;
    if !(s > delta_hat) {
        return Err(Error::ExponentTooSmall { s, delta: delta_hat });
    }
    let raw = raw_weights(ob, s, bp, None)?;
    normalized(ob.x.clone(), s, bp.k, raw)
}

/// Cells hit by orbit directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSetSample {
    pub hits: Vec<u64>,
    /// Hit from at least three of the distance bands `[2^j, 2^{j+1})`.
    pub radial: Vec<bool>,
}

impl LimitSetSample {
    pub fn hit_cells(&self) -> Vec<usize> {
        self.hits.iter().enumerate().filter(|(_, &h)| h > 0).map(|(i, _)| i).collect()
    }
}

pub fn limit_set_sample(ob: &OrbitBall, bp: &BoundaryPartition) -> Result<LimitSetSample> {
    check_space(ob, bp)?;
    let mut hits = vec![0u64; bp.len()];
    let mut bands = vec![0u64; bp.len()];
    for e in &ob.entries {
        if let Some(d) = &e.direction {
            let i = bp.lookup(d)?;
            hits[i] += 1;
            if e.distance >= 1.0 {
                let j = (e.distance.log2().floor() as u32).min(63);
                bands[i] |= 1 << j;
            }
        }
    }
    let radial = bands.iter().map(|b| b.count_ones() >= 3).collect();
    Ok(LimitSetSample { hits, radial })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalityReport {
    pub s: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub retained_cells: usize,
    pub common_elements: usize,
    /// `(cell, residual)` for every retained cell.
    pub residuals: Vec<(usize, f64)>,
}

/// Compares `log(μ_x(b)/μ_{x′}(b))` with `s·B_η(x′, x)` at each cell
/// midpoint. Both measures sum over the group elements present in both
/// balls, so the differing truncation shells do not enter, and both assign
/// `γy` to the cell of its direction seen from `x`. Raw (unnormalized) sums
/// are compared, as Patterson's construction normalizes both by the same
/// constant.
pub fn conformality_residual(
    ob_x: &OrbitBall,
    ob_x2: &OrbitBall,
    s: f64,
    bp: &BoundaryPartition,
    floor: f64,
) -> Result<ConformalityReport> {
    check_space(ob_x, bp)?;
    check_space(ob_x2, bp)?;
    let in_x2: HashMap<&Word, ()> = ob_x2.entries.iter().map(|e| (&e.word, ())).collect();
    let keep = |w: &Word| in_x2.contains_key(w);
    let raw1 = raw_weights(ob_x, s, bp, Some(&keep))?;
    let mut cell_of: HashMap<&Word, usize> = HashMap::new();
    for e in &ob_x.entries {
        if let (Some(d), true) = (&e.direction, keep(&e.word)) {
            cell_of.insert(&e.word, bp.lookup(d)?);
        }
    }
    let mut raw2 = vec![0.0; bp.len()];
    for e in &ob_x2.entries {
        if let Some(&i) = cell_of.get(&e.word) {
            raw2[i] += (-s * e.distance).exp();
        }
    }
    let common = cell_of.len();
    let t1: f64 = raw1.iter().sum();
    let t2: f64 = raw2.iter().sum();
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(Error::InsufficientData("the two balls share no elements besides the identity".into()));
    }
    let mut residuals = Vec::new();
    for i in 0..bp.len() {
        if raw1[i] / t1 < floor || raw2[i] / t2 < floor {
            continue;
        }
        let b = bp.space.busemann(&bp.midpoint(i), &ob_x2.x, &ob_x.x)?;
        residuals.push((i, ((raw1[i] / raw2[i]).ln() - s * b).abs()));
    }
    if residuals.is_empty() {
        return Err(Error::InsufficientData("no cell carries mass above the floor in both measures".into()));
    }
    let max_residual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    let mean_residual = residuals.iter().map(|r| r.1).sum::<f64>() / residuals.len() as f64;
    Ok(ConformalityReport {
        s,
        max_residual,
        mean_residual,
        retained_cells: residuals.len(),
        common_elements: common,
        residuals,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowMass {
    /// Full weight of cells inside plus half the weight of straddling cells.
    pub mass: f64,
    /// Half the weight of straddling cells.
    pub uncertainty: f64,
}

/// Mass of the shadow `O_r(source, y)`, cell by cell. A cell counts as
/// inside when all its sample points are definitely inside, and as
/// straddling when the samples disagree or a decision is ambiguous.
pub fn shadow_measure(
    dm: &DiscreteMeasure,
    bp: &BoundaryPartition,
    r: f64,
    source: &Source,
    y: &ModelPoint,
) -> Result<ShadowMass> {
    let space = &bp.space;
    let verdicts: Vec<(f64, u8)> = (0..bp.len())
        .into_par_iter()
        .filter(|&i| dm.weights[i] > 0.0)
        .map(|i| -> Result<(f64, u8)> {
            let mut inside = 0usize;
            let mut outside = 0usize;
            let mut ambiguous = false;
            let samples = bp.samples(i, 9);
            for p in samples.iter().chain(std::iter::once(&bp.midpoint(i))) {
                // the source itself carries no line; skip it
                if matches!(source, Source::Boundary(xi) if space.same_boundary(xi, p)) {
                    continue;
                }
                let d = space.shadow_contains(r, source, y, p)?;
                ambiguous |= d.ambiguous;
                if d.value {
                    inside += 1;
                } else {
                    outside += 1;
                }
            }
            let state = if ambiguous || (inside > 0 && outside > 0) {
                1
            } else if inside > 0 {
                2
            } else {
                0
            };
            Ok((dm.weights[i], state))
        })
        .collect::<Result<_>>()?;
    let mut mass = 0.0;
    let mut uncertainty = 0.0;
    for (w, state) in verdicts {
        match state {
            2 => mass += w,
            1 => {
                mass += 0.5 * w;
                uncertainty += 0.5 * w;
            }
            _ => {}
        }
    }
    Ok(ShadowMass { mass, uncertainty })
}

/// Weights of ordered cell pairs `(a, b)`, `a ≠ b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentApprox {
    pub k: usize,
    pub delta: f64,
    pub x: ModelPoint,
    pub pairs: Vec<(usize, usize, f64)>,
}

impl CurrentApprox {
    pub fn total(&self) -> f64 {
        self.pairs.iter().map(|p| p.2).sum()
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.pairs
            .binary_search_by(|p| (p.0, p.1).cmp(&(a, b)))
            .map(|i| self.pairs[i].2)
            .unwrap_or(0.0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidInput(format!("csv output failed: {e}"));
        w.write_record(["cell_a", "cell_b", "weight"]).map_err(io)?;
        for (a, b, x) in &self.pairs {
            w.write_record([a.to_string(), b.to_string(), real(*x)]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// `μ_x(a)·μ′_x(b)·e^{2δ·Gr_x(η_a, η_b)}` over pairs of distinct cells with
/// positive mass, `η` the cell midpoints. Pairs sorted by `(a, b)`.
pub fn gromov_current(
    dm_x: &DiscreteMeasure,
    dm_x_second: &DiscreteMeasure,
    bp: &BoundaryPartition,
    delta: f64,
) -> Result<CurrentApprox> {
    if dm_x.x != dm_x_second.x {
        return Err(Error::InvalidInput("both measures must sit at the same basepoint".into()));
    }
    if dm_x.weights.len() != bp.len() || dm_x_second.weights.len() != bp.len() {
        return Err(Error::InvalidInput("measures do not live on this partition".into()));
    }
    let support_a: Vec<usize> = (0..bp.len()).filter(|&i| dm_x.weights[i] > 0.0).collect();
    let support_b: Vec<usize> = (0..bp.len()).filter(|&i| dm_x_second.weights[i] > 0.0).collect();
    let mids: Vec<BoundaryPoint> = (0..bp.len()).map(|i| bp.midpoint(i)).collect();
    let x = &dm_x.x;
    let pairs: Vec<Vec<(usize, usize, f64)>> = support_a
        .par_iter()
        .map(|&a| -> Result<Vec<(usize, usize, f64)>> {
            let mut row = Vec::with_capacity(support_b.len());
            for &b in &support_b {
                if a == b {
                    continue;
                }
                let gr = bp.space.gromov_product(x, &mids[a], &mids[b])?;
                row.push((a, b, dm_x.weights[a] * dm_x_second.weights[b] * (2.0 * delta * gr).exp()));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(CurrentApprox { k: bp.k, delta, x: x.clone(), pairs: pairs.into_iter().flatten().collect() })
}
