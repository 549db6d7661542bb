//! The `orbit`, `measures` and `dynamics` commands.

use serde::Serialize;

use rankone_core::dynamics::{
    counting_asymptotic, equidist_statistic, mixing_series, CellProfile, CountingAsymptotic, CountingClass,
    CurrentFactors, MixingSeries, TestFunction,
};
use rankone_core::format::real;
use rankone_core::groups::{arithmeticity_test, length_spectrum, Arithmeticity, GroupPresentation};
use rankone_core::orbit::{
    counting_curve, divergence_diagnostic, enumerate_ball_with, estimate_delta, CriticalExponentEstimate,
    DivergenceReport, Enumeration, EnumerationOptions, OrbitBall,
};
use rankone_core::psmeasure::{
    build_partition, conformality_residual, default_exponent, gromov_current, limit_set_sample, patterson_sullivan,
    ConformalityReport, DiscreteMeasure,
};
use rankone_core::spaces::{BoundarySet, ModelPoint};
use rankone_core::word::{letter_char, Letter, Word};

use crate::config::{grid_of, ConfigError, Expectation, ExperimentConfig, GroupConfig, Setup, ThresholdConfig};
use crate::output::{CheckResult, OutDir};

/// How a command ended, short of an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    BudgetPartial,
    BandFailure,
}

impl Outcome {
    pub fn from_checks(checks: &[CheckResult]) -> Outcome {
        if checks.iter().all(|c| c.pass) {
            Outcome::Success
        } else {
            Outcome::BandFailure
        }
    }
}

/// Inputs echoed into every report.
#[derive(Debug, Serialize)]
pub struct Inputs<'a> {
    pub seed: u64,
    pub group: Option<&'a GroupConfig>,
    pub x: &'a ModelPoint,
    pub y: &'a ModelPoint,
    pub radius: f64,
    pub thresholds: &'a ThresholdConfig,
    /// H2 reports rest on the finiteness of the Bowen-Margulis mass of
    /// convex-cocompact Schottky groups, which is assumed, not checked.
    pub assumption: Option<&'static str>,
}

fn inputs<'a>(cfg: &'a ExperimentConfig, setup: &'a Setup) -> Inputs<'a> {
    Inputs {
        seed: cfg.seed,
        group: cfg.group.as_ref(),
        x: &setup.x,
        y: &setup.y,
        radius: cfg.orbit.radius,
        thresholds: &cfg.thresholds,
        assumption: matches!(setup.space, rankone_core::spaces::ModelSpace::H2)
            .then_some("finite Bowen-Margulis mass (convex cocompact)"),
    }
}

fn enumerate(cfg: &ExperimentConfig, gp: &GroupPresentation, x: &ModelPoint, y: &ModelPoint) -> anyhow::Result<Enumeration> {
    let o = &cfg.orbit;
    let opts = EnumerationOptions { budget: o.budget, audit_radius: o.audit_radius, margin_depth: o.margin_depth };
    log::info!("enumerating the orbit ball of radius {}", o.radius);
    let e = enumerate_ball_with(gp, x, y, o.radius, &opts)?;
    log::info!("{} elements, {} search nodes, complete: {}", e.ball.len(), e.nodes, e.complete);
    Ok(e)
}

#[derive(Debug, Serialize)]
struct Partial<'a> {
    inputs: Inputs<'a>,
    complete: bool,
    completed_depth: usize,
    nodes: u64,
    budget: u64,
    elements_found: usize,
}

/// Records a budget overrun: the report, and the manifest written by the caller.
fn partial(cfg: &ExperimentConfig, setup: &Setup, e: &Enumeration, out: &mut OutDir, name: &str) -> anyhow::Result<Outcome> {
    log::warn!("node budget {} exhausted after depth {}", cfg.orbit.budget, e.completed_depth);
    out.json(
        name,
        &Partial {
            inputs: inputs(cfg, setup),
            complete: false,
            completed_depth: e.completed_depth,
            nodes: e.nodes,
            budget: cfg.orbit.budget,
            elements_found: e.ball.len(),
        },
    )?;
    Ok(Outcome::BudgetPartial)
}

fn delta_hat(cfg: &ExperimentConfig, ob: &OrbitBall) -> anyhow::Result<(f64, Option<CriticalExponentEstimate>)> {
    if let Some(d) = cfg.measures.delta_hat {
        return Ok((d, None));
    }
    let est = estimate_delta(&counting_curve(ob), cfg.orbit.window())?;
    Ok((est.delta_hat, Some(est)))
}

#[derive(Debug, Serialize)]
struct OrbitReport<'a> {
    inputs: Inputs<'a>,
    complete: bool,
    count: usize,
    nodes: u64,
    pruning_margin: f64,
    estimate: Option<CriticalExponentEstimate>,
    estimate_error: Option<String>,
    divergence: Option<DivergenceReport>,
}

pub fn orbit(cfg: &ExperimentConfig, setup: &Setup, out: &mut OutDir) -> anyhow::Result<Outcome> {
    let gp = setup.group()?;
    let e = enumerate(cfg, gp, &setup.x, &setup.y)?;
    if cfg.orbit.write_ball {
        out.csv("orbit_ball.csv", |w| e.ball.write_csv(w))?;
    }
    if !e.complete {
        return partial(cfg, setup, &e, out, "orbit.json");
    }
    let ob = &e.ball;
    let cc = counting_curve(ob);
    let grid = rankone_core::dynamics::grid(0.0, cfg.orbit.radius, cfg.orbit.counting_step);
    out.csv("counting_curve.csv", |w| cc.write_csv(w, &grid))?;
    let (estimate, estimate_error) = match estimate_delta(&cc, cfg.orbit.window()) {
        Ok(est) => (Some(est), None),
        Err(err) => (None, Some(err.to_string())),
    };
    let divergence = estimate.as_ref().map(|est| divergence_diagnostic(ob, est.delta_hat));
    out.json(
        "orbit.json",
        &OrbitReport {
            inputs: inputs(cfg, setup),
            complete: true,
            count: ob.len(),
            nodes: e.nodes,
            pruning_margin: e.pruning_margin,
            estimate,
            estimate_error,
            divergence,
        },
    )?;
    Ok(Outcome::Success)
}

#[derive(Debug, Serialize)]
struct MeasuresReport<'a> {
    inputs: Inputs<'a>,
    delta_hat: f64,
    estimate: Option<CriticalExponentEstimate>,
    s: f64,
    k: usize,
    cells: usize,
    support: usize,
    radial_cells: usize,
    max_cell_mass: f64,
    total: f64,
    conformality: Option<ConformalityReport>,
    checks: Vec<CheckResult>,
}

pub fn measures(cfg: &ExperimentConfig, setup: &Setup, out: &mut OutDir) -> anyhow::Result<Outcome> {
    let gp = setup.group()?;
    let e = enumerate(cfg, gp, &setup.x, &setup.y)?;
    if !e.complete {
        return partial(cfg, setup, &e, out, "measures.json");
    }
    let ob = &e.ball;
    let (dh, estimate) = delta_hat(cfg, ob)?;
    let s = cfg.measures.exponent.unwrap_or_else(|| default_exponent(dh, cfg.orbit.radius));
    let bp = build_partition(&setup.space, cfg.measures.k)?;
    let mu = patterson_sullivan(ob, s, dh, &bp)?;
    out.csv("ps_measure.csv", |w| mu.write_csv(w, &bp))?;
    let ls = limit_set_sample(ob, &bp)?;
    if cfg.measures.current {
        let cur = gromov_current(&mu, &mu, &bp, dh)?;
        out.csv("current.csv", |w| cur.write_csv(w))?;
    }
    let mut checks = Vec::new();
    let conformality = match &setup.x_prime {
        None => None,
        Some(x2) => {
            let e2 = enumerate(cfg, gp, x2, &setup.y)?;
            if !e2.complete {
                return partial(cfg, setup, &e2, out, "measures.json");
            }
            let rep = conformality_residual(ob, &e2.ball, s, &bp, cfg.measures.floor)?;
            let bound = cfg.thresholds.conformality_bound;
            checks.push(CheckResult::new(
                "conformality_residual",
                rep.max_residual <= bound,
                Some(rep.max_residual),
                Some(bound),
                format!("{} cells above the floor, {} common elements", rep.retained_cells, rep.common_elements),
            ));
            Some(rep)
        }
    };
    for c in &checks {
        log::info!("{}", c.line());
    }
    out.json(
        "measures.json",
        &MeasuresReport {
            inputs: inputs(cfg, setup),
            delta_hat: dh,
            estimate,
            s,
            k: bp.k,
            cells: bp.len(),
            support: mu.weights.iter().filter(|&&w| w > 0.0).count(),
            radial_cells: ls.radial.iter().filter(|&&r| r).count(),
            max_cell_mass: mu.max_cell_mass(),
            total: mu.total,
            conformality,
            checks: checks.clone(),
        },
    )?;
    Ok(Outcome::from_checks(&checks))
}

/// Continuous hat on the ping-pong domain of `l`.
fn domain_hat(gp: &GroupPresentation, l: Letter, ramp: f64) -> anyhow::Result<CellProfile> {
    match &gp.domains[l as usize] {
        BoundarySet::Cylinders { prefixes, .. } if prefixes.len() == 1 => Ok(CellProfile::Cylinder(prefixes[0].clone())),
        BoundarySet::Arcs(parts) => {
            let (start, width) = match parts.as_slice() {
                [a] => (a.lo, a.hi - a.lo),
                // an arc through angle 0 is stored as [0, b] and [a, 2π]
                [a, b] if a.lo == 0.0 => (b.lo, a.hi + std::f64::consts::TAU - b.lo),
                _ => anyhow::bail!("domain of {} is not a single arc", letter_char(l)),
            };
            Ok(CellProfile::Arc { start, width, ramp })
        }
        _ => anyhow::bail!("domain of {} is not a single cylinder", letter_char(l)),
    }
}

#[derive(Debug, Serialize)]
struct PairRatio {
    pair: String,
    /// Statistic of the first pair over this pair, per time.
    observed: Vec<f64>,
    predicted: f64,
    relative_error: f64,
}

#[derive(Debug, Serialize)]
struct EquidistReport {
    delta_hat: f64,
    t_grid: Vec<f64>,
    pairs: Vec<String>,
    values: Vec<Vec<f64>>,
    /// `∫ a dμ_x · ∫ b dμ_y` per pair.
    ps_products: Vec<f64>,
    ratios: Vec<PairRatio>,
}

#[derive(Debug, Serialize)]
struct DynamicsReport<'a> {
    inputs: Inputs<'a>,
    delta_hat: f64,
    estimate: Option<CriticalExponentEstimate>,
    arithmeticity: Arithmeticity,
    spectrum_size: usize,
    period_hint: Option<f64>,
    counting: CountingAsymptotic,
    mixing: Option<MixingSeries>,
    equidist: Option<EquidistReport>,
    checks: Vec<CheckResult>,
}

fn ps_measure_at(
    cfg: &ExperimentConfig,
    gp: &GroupPresentation,
    setup: &Setup,
    ob: &OrbitBall,
    s: f64,
    dh: f64,
    k: usize,
) -> anyhow::Result<Option<(rankone_core::psmeasure::BoundaryPartition, DiscreteMeasure, DiscreteMeasure)>> {
    let bp = build_partition(&setup.space, k)?;
    let mu_x = patterson_sullivan(ob, s, dh, &bp)?;
    let mu_y = if setup.x == setup.y {
        mu_x.clone()
    } else {
        let e = enumerate(cfg, gp, &setup.y, &setup.y)?;
        if !e.complete {
            return Ok(None);
        }
        patterson_sullivan(&e.ball, s, dh, &bp)?
    };
    Ok(Some((bp, mu_x, mu_y)))
}

pub fn dynamics(cfg: &ExperimentConfig, setup: &Setup, out: &mut OutDir) -> anyhow::Result<Outcome> {
    let gp = setup.group()?;
    let d = &cfg.dynamics;
    let th = &cfg.thresholds;
    let e = enumerate(cfg, gp, &setup.x, &setup.y)?;
    if !e.complete {
        return partial(cfg, setup, &e, out, "dynamics.json");
    }
    let ob = &e.ball;
    let r = cfg.orbit.radius;
    let (dh, estimate) = delta_hat(cfg, ob)?;
    let s = cfg.measures.exponent.unwrap_or_else(|| default_exponent(dh, r));

    let ls = length_spectrum(gp, d.spectrum_word_length)?;
    let arith = arithmeticity_test(&ls, None)?;
    let period_hint = d.period_hint.or(match arith {
        Arithmeticity::Arithmetic { c } => Some(c),
        Arithmeticity::NoEvidence { .. } => None,
    });

    let cgrid = grid_of(d.counting_grid.unwrap_or([r / 3.0, r, 0.05]));
    let cc = counting_curve(ob);
    let counting = counting_asymptotic(&cc, dh, &cgrid, period_hint, th.counting())?;
    out.csv("counting.csv", |w| write_series(w, ("R", "value"), &counting.grid, &counting.values))?;
    let mut checks = Vec::new();
    let one = equidist_statistic(gp, ob, dh, &[TestFunction::Constant(1.0)], &cgrid)?;
    checks.push(CheckResult::new(
        "equidist_constant_matches_counting",
        one.values[0] == counting.values,
        None,
        None,
        format!("f ≡ 1 against δ̂e^(−δ̂R)N(R) on {} grid points", cgrid.len()),
    ));

    let mixing = match &d.mixing {
        None => None,
        Some(m) => {
            log::info!("mixing series at r = {}", m.r);
            let Some((bp, mu_x, mu_y)) = ps_measure_at(cfg, gp, setup, ob, s, dh, m.k)? else {
                return Ok(Outcome::BudgetPartial);
            };
            let cf = CurrentFactors::new(bp, dh, mu_x, mu_y)?;
            let full = setup.space.full_boundary();
            let ms = mixing_series(&cf, gp, ob, m.r, &full, &full, &grid_of(m.t_grid))?;
            out.csv("mixing.csv", |w| write_series(w, ("t", "value"), &ms.t_grid, &ms.values))?;
            Some(ms)
        }
    };

    let equidist = match &d.equidist {
        None => None,
        Some(q) => {
            log::info!("equidistribution statistic for {} pairs", q.pairs.len());
            let Some((bp, mu_x, mu_y)) = ps_measure_at(cfg, gp, setup, ob, s, dh, q.k)? else {
                return Ok(Outcome::BudgetPartial);
            };
            let mut fs = Vec::new();
            let mut products = Vec::new();
            let mut names = Vec::new();
            for [a, b] in &q.pairs {
                let la = parse_letter(a, gp.rank())?;
                let lb = parse_letter(b, gp.rank())?;
                let (ha, hb) = (domain_hat(gp, la, q.ramp)?, domain_hat(gp, lb, q.ramp)?);
                products.push(ha.integrate(&mu_x, &bp) * hb.integrate(&mu_y, &bp));
                fs.push(TestFunction::CellPair { a: ha, b: hb });
                names.push(format!("{a}{b}"));
            }
            let st = equidist_statistic(gp, ob, dh, &fs, &q.t_grid)?;
            let last = q.t_grid.len() - 1;
            let mut ratios = Vec::new();
            for i in 1..fs.len() {
                let observed: Vec<f64> = (0..q.t_grid.len()).map(|j| st.values[0][j] / st.values[i][j]).collect();
                let predicted = products[0] / products[i];
                let relative_error = (observed[last] - predicted).abs() / predicted;
                checks.push(CheckResult::new(
                    &format!("theorem_b_ratio_{}_{}", names[0], names[i]),
                    relative_error <= th.theorem_b_tolerance,
                    Some(relative_error),
                    Some(th.theorem_b_tolerance),
                    format!("at T = {}", real(q.t_grid[last])),
                ));
                ratios.push(PairRatio { pair: names[i].clone(), observed, predicted, relative_error });
            }
            Some(EquidistReport {
                delta_hat: dh,
                t_grid: q.t_grid.clone(),
                pairs: names,
                values: st.values,
                ps_products: products,
                ratios,
            })
        }
    };

    match d.expect {
        None => {}
        Some(Expectation::Arithmetic) => {
            let c = match arith {
                Arithmeticity::Arithmetic { c } => Some(c),
                _ => None,
            };
            checks.push(CheckResult::new("arithmetic_spectrum", c.is_some(), c, None, "length-spectrum gcd test"));
            checks.push(CheckResult::new(
                "counting_oscillating_periodic",
                counting.classification == CountingClass::OscillatingPeriodic,
                counting.spectral_period,
                Some(th.period_tolerance),
                format!("classification {:?}, period hint {:?}", counting.classification, period_hint),
            ));
            let target = period_hint.unwrap_or(f64::NAN);
            let mp = mixing.as_ref().and_then(|m| m.spectral_period);
            checks.push(CheckResult::new(
                "mixing_period",
                mp.is_some_and(|p| (p - target).abs() <= th.period_tolerance),
                mp,
                Some(th.period_tolerance),
                "spectral period of the mixing series against the arithmetic period",
            ));
        }
        Some(Expectation::NonArithmetic) => {
            checks.push(CheckResult::new(
                "no_arithmetic_evidence",
                matches!(arith, Arithmeticity::NoEvidence { .. }),
                None,
                None,
                "length-spectrum gcd test",
            ));
            let ratio = counting.trailing_ratio();
            checks.push(CheckResult::new(
                "counting_trailing_ratio",
                ratio < th.counting_band,
                Some(ratio),
                Some(th.counting_band),
                format!("classification {:?}", counting.classification),
            ));
            let osc = mixing.as_ref().map(|m| m.oscillation_ratio);
            checks.push(CheckResult::new(
                "mixing_oscillation",
                osc.is_some_and(|o| o < th.mixing_band),
                osc,
                Some(th.mixing_band),
                "relative oscillation of the last five mixing values",
            ));
        }
    }
    for c in &checks {
        log::info!("{}", c.line());
    }
    out.json(
        "dynamics.json",
        &DynamicsReport {
            inputs: inputs(cfg, setup),
            delta_hat: dh,
            estimate,
            arithmeticity: arith,
            spectrum_size: ls.lengths.len(),
            period_hint,
            counting,
            mixing,
            equidist,
            checks: checks.clone(),
        },
    )?;
    Ok(Outcome::from_checks(&checks))
}

fn parse_letter(s: &str, rank: usize) -> anyhow::Result<Letter> {
    let w = Word::parse(s, rank).map_err(|e| ConfigError(format!("dynamics.equidist.pairs: {e}")))?;
    match w.letters() {
        [l] => Ok(*l),
        _ => Err(ConfigError(format!("dynamics.equidist.pairs: {s:?} is not a single letter")).into()),
    }
}

fn write_series(out: &mut Vec<u8>, header: (&str, &str), ts: &[f64], vs: &[f64]) -> rankone_core::Result<()> {
    use std::fmt::Write;
    let mut text = format!("{},{}\n", header.0, header.1);
    for (t, v) in ts.iter().zip(vs) {
        let _ = writeln!(text, "{},{}", real(*t), real(*v));
    }
    out.extend_from_slice(text.as_bytes());
    Ok(())
}
