//! Acceptance suite: one pass/fail line per criterion, exit status 1 if any
//! criterion fails. Tolerances are pinned below.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde_json::Value;

use rankone_core::groups::{apply_boundary, Classification, IsometryElement};
use rankone_core::orbit::{counting_curve, divergence_diagnostic, enumerate_ball, estimate_delta, DivergenceVerdict};
use rankone_core::presets;
use rankone_core::psmeasure::{build_partition, conformality_residual};
use rankone_core::sampling;
use rankone_core::spaces::{BoundaryPoint, CayleyTree, E2Point, H2Point, ModelPoint, ModelSpace, Sign, Source, TreePoint};
use rankone_core::word::{inverse_letter, Letter, Word};

const DELTA_TOL: f64 = 1e-3;
const CROSS_RATIO_TOL: f64 = 1e-9;
const PROPERTY_TOL: f64 = 1e-9;
const PROPERTY_SAMPLES: u64 = 1000;
const TREE_CONFORMALITY: f64 = 0.1;
const SCHOTTKY_CONFORMALITY: f64 = 0.15;
const PERIOD_TOL: f64 = 0.05;
const COUNTING_BAND: f64 = 1.5;
const MIXING_BAND: f64 = 0.3;
const THEOREM_B_TOL: f64 = 0.15;
const COUNTING_SECONDS: f64 = 60.0;

type Outcome = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Reduced words of length at most `n` over `a, A, b, B`, by brute force.
fn reduced_words(n: usize) -> BTreeSet<Word> {
    let mut all = BTreeSet::from([Word::identity()]);
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for l in 0..4 {
                if w.last() == Some(&inverse_letter(l)) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        all.extend(next.iter().map(|v| Word::from_letters(v.iter().copied())));
        layer = next;
    }
    all
}

fn criterion_1() -> Outcome {
    let gp = presets::unit_tree(2).map_err(|e| e.to_string())?;
    let x = gp.basepoint.clone();
    for r in 0..=8 {
        let ob = enumerate_ball(&gp, &x, &x, r as f64).map_err(|e| e.to_string())?;
        if ob.words() != reduced_words(r) {
            return Err(format!("ball of radius {r} differs from the brute-force set"));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let ob = pool.install(|| enumerate_ball(&gp, &x, &x, 12.0)).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let cc = counting_curve(&ob);
    for r in 0..=24 {
        let r = r as f64 / 2.0;
        let exact = 2 * 3usize.pow(r.floor() as u32) - 1;
        if cc.count(r) != exact {
            return Err(format!("N({r}) = {} instead of {exact}", cc.count(r)));
        }
    }
    ensure(
        secs <= COUNTING_SECONDS,
        format!("set equality for R ≤ 8, N(12) = {}, {secs:.1} s on one thread", ob.len()),
    )
}

fn criterion_2() -> Outcome {
    let gp = presets::unit_tree(2).map_err(|e| e.to_string())?;
    let x = gp.basepoint.clone();
    let ob = enumerate_ball(&gp, &x, &x, 12.0).map_err(|e| e.to_string())?;
    let est = estimate_delta(&counting_curve(&ob), (4.0, 12.0)).map_err(|e| e.to_string())?;
    let err = (est.delta_hat - 3f64.ln()).abs();
    let div = divergence_diagnostic(&ob, 3f64.ln());
    ensure(
        err <= DELTA_TOL && div.verdict == DivergenceVerdict::NonVanishing,
        format!("|δ̂ − log 3| = {err:.2e}, divergence at log 3: {:?}", div.verdict),
    )
}

fn criterion_3() -> Outcome {
    let h2 = ModelSpace::H2;
    let p = |a: f64, b: f64| ModelPoint::H2(H2Point::new(a, b).unwrap());
    let e4 = 4f64.exp();
    let (x, y) = (p(1.0, 1.0), p(e4, e4));
    let r = h2.distance(&x, &p(0.0, 2f64.sqrt())).map_err(|e| e.to_string())?;
    let (minus, plus) = (BoundaryPoint::H2(PI), BoundaryPoint::H2(0.0));
    let back = h2.refined_shadow_contains(r, &y, &x, &minus, Sign::Minus).map_err(|e| e.to_string())?.value;
    let fwd = h2.refined_shadow_contains(r, &x, &y, &plus, Sign::Minus).map_err(|e| e.to_string())?.value;
    let corridor = h2.corridor_contains(r, &x, &y, &minus, &plus).map_err(|e| e.to_string())?.value;
    let pittet = back && fwd && !corridor;

    let e2 = ModelSpace::E2;
    let o = ModelPoint::E2(E2Point { x: 0.0, y: 0.0 });
    let rr = 1.0;
    let src = Source::Boundary(BoundaryPoint::E2(PI));
    let shadow = |t: f64| e2.shadow_contains(rr, &src, &o, &BoundaryPoint::E2(t)).unwrap().value;
    let mut euclid = shadow(0.0) && !shadow(1e-6) && !shadow(-1e-6) && !shadow(1.0);
    for n in 1..=5 {
        let phi = 1.0 / n as f64;
        let nf = n as f64;
        let z = ModelPoint::E2(E2Point { x: -rr * nf * phi.cos(), y: -rr * nf * phi.sin() });
        let at = |t: f64| e2.refined_shadow_contains(rr, &z, &o, &BoundaryPoint::E2(t), Sign::Minus).unwrap().value;
        euclid &= at(phi) && !at(phi + 1e-6) && !at(phi - 1e-6) && !at(0.0);
    }

    let tree = ModelSpace::Tree(CayleyTree::unit(2));
    let mut rng = sampling::rng(3);
    let mut cases = 0;
    let mut formula = true;
    while cases < 2000 {
        let xi = sampling::boundary_point(&mut rng, &tree);
        let eta = sampling::boundary_point(&mut rng, &tree);
        if tree.same_boundary(&xi, &eta) {
            continue;
        }
        let ModelPoint::Tree(q) = sampling::point(&mut rng, &tree, 3.0) else { unreachable!() };
        let v = ModelPoint::Tree(TreePoint::vertex(q.vertex));
        let d = tree.gromov_product(&v, &xi, &eta).map_err(|e| e.to_string())?;
        for r in [0.5, 1.0, 1.7, 2.0] {
            let got = tree.shadow_contains(r, &Source::Boundary(xi.clone()), &v, &eta).map_err(|e| e.to_string())?;
            formula &= got.value == (d <= r.ceil() - 1.0);
            cases += 1;
        }
    }
    ensure(
        pittet && euclid && formula,
        format!("Pittet corridor: {pittet}, plane shadows: {euclid}, tree formula on {cases} cases: {formula}"),
    )
}

/// Translation length from the matrix trace or the cyclically reduced word.
fn length_oracle(g: &IsometryElement) -> f64 {
    match g.matrix() {
        Some(m) => {
            let det = m.a * m.d - m.b * m.c;
            2.0 * ((m.a + m.d).abs() / (2.0 * det.sqrt())).acosh()
        }
        None => {
            let l = g.word.letters();
            let mut k = 0;
            while 2 * k + 1 < l.len() && l[k] == inverse_letter(l[l.len() - 1 - k]) {
                k += 1;
            }
            (l.len() - 2 * k) as f64
        }
    }
}

fn criterion_4() -> Outcome {
    let mut worst = 0f64;
    for space in [ModelSpace::H2, ModelSpace::Tree(CayleyTree::unit(2))] {
        let mut rng = sampling::rng(17);
        for _ in 0..200 {
            let g = sampling::axial_element(&mut rng, &space).map_err(|e| e.to_string())?;
            let Classification::Axial { fix_minus, fix_plus, .. } = g.classification.clone() else {
                return Err(format!("{} is not axial", g.word));
            };
            let zeta = loop {
                let z = sampling::boundary_point(&mut rng, &space);
                let gap = |b: &BoundaryPoint| space.boundary_gap(&z, b).unwrap();
                if gap(&fix_minus) > 1e-2 && gap(&fix_plus) > 1e-2 {
                    break z;
                }
            };
            let gz = apply_boundary(&space, &g, &zeta).map_err(|e| e.to_string())?;
            let o = sampling::point(&mut rng, &space, 1.0);
            let cr = space.cross_ratio(&o, &fix_minus, &fix_plus, &zeta, &gz).map_err(|e| e.to_string())?;
            worst = worst.max((cr - length_oracle(&g)).abs());
        }
    }
    ensure(worst <= CROSS_RATIO_TOL, format!("max |CR − ℓ| = {worst:.2e} over 200 elements in H2 and the tree"))
}

fn binary(cmd: &str, config: &str, out: &Path) -> Result<i32, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_rankone-lab"))
        .args([cmd, "--config"])
        .arg(configs().join(config))
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    o.status.code().ok_or_else(|| format!("{cmd} {config} was killed"))
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn checks(report: &Value) -> Vec<(String, bool, Option<f64>, Option<f64>)> {
    report["checks"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|c| {
                    (
                        c["name"].as_str().unwrap_or_default().to_string(),
                        c["pass"].as_bool().unwrap_or(false),
                        c["value"].as_f64(),
                        c["band"].as_f64(),
                    )
                })
                .collect()
        })
        .unwrap_or_default()
}

/// Runs of the shipped configs, kept for the determinism rerun.
const RUNS: [(&str, &str); 10] = [
    ("geometry-check", "tree.toml"),
    ("geometry-check", "schottky.toml"),
    ("geometry-check", "euclid_shadow.toml"),
    ("geometry-check", "pittet.toml"),
    ("orbit", "tree.toml"),
    ("orbit", "schottky.toml"),
    ("measures", "tree.toml"),
    ("measures", "schottky.toml"),
    ("dynamics", "tree.toml"),
    ("dynamics", "schottky.toml"),
];

fn run_dir(root: &Path, cmd: &str, config: &str) -> PathBuf {
    root.join(format!("{cmd}-{}", config.trim_end_matches(".toml")))
}

fn criterion_5(root: &Path) -> Outcome {
    let mut lines = Vec::new();
    for config in ["tree.toml", "schottky.toml", "euclid_shadow.toml"] {
        let rep = read_json(&run_dir(root, "geometry-check", config).join("geometry_check.json"))?;
        let samples = rep["samples"].as_u64().unwrap_or(0);
        let tol = rep["tolerance"].as_f64().unwrap_or(f64::INFINITY);
        if samples < PROPERTY_SAMPLES || tol > PROPERTY_TOL {
            return Err(format!("{config}: {samples} samples at tolerance {tol}"));
        }
        let cs = checks(&rep);
        let mut wanted = vec!["busemann_cocycle", "unit_speed_and_hopf_time", "gromov_product"];
        if config != "euclid_shadow.toml" {
            wanted.push("equivariance");
        }
        for w in wanted {
            match cs.iter().find(|c| c.0 == w) {
                Some((_, true, v, _)) => lines.push(format!("{}/{w} {:.1e}", rep["model"].as_str().unwrap_or("?"), v.unwrap_or(0.0))),
                Some(_) => return Err(format!("{config}: {w} failed")),
                None => return Err(format!("{config}: {w} missing")),
            }
        }
    }
    Ok(format!("{PROPERTY_SAMPLES} samples each at {PROPERTY_TOL:e}; {}", lines.join(", ")))
}

fn criterion_6() -> Outcome {
    let s = 3f64.ln() + 0.02;
    let tree = presets::unit_tree(2).map_err(|e| e.to_string())?;
    let root = tree.basepoint.clone();
    let nb = tree.act(&Word::parse("a", 2).unwrap(), &root).map_err(|e| e.to_string())?;
    let ob = enumerate_ball(&tree, &root, &root, 10.0).map_err(|e| e.to_string())?;
    let ob2 = enumerate_ball(&tree, &nb, &root, 10.0).map_err(|e| e.to_string())?;
    let bp = build_partition(&tree.space, 2).map_err(|e| e.to_string())?;
    let t = conformality_residual(&ob, &ob2, s, &bp, 1e-4).map_err(|e| e.to_string())?;

    let gp = presets::schottky().map_err(|e| e.to_string())?;
    let x = gp.basepoint.clone();
    let x2 = ModelPoint::H2(H2Point::new(0.0, 1f64.exp()).unwrap());
    let ob = enumerate_ball(&gp, &x, &x, 12.0).map_err(|e| e.to_string())?;
    let ob2 = enumerate_ball(&gp, &x2, &x, 12.0).map_err(|e| e.to_string())?;
    let dh = estimate_delta(&counting_curve(&ob), (4.0, 12.0)).map_err(|e| e.to_string())?.delta_hat;
    let bp = build_partition(&gp.space, 10).map_err(|e| e.to_string())?;
    let h = conformality_residual(&ob, &ob2, dh * (1.0 + 1.0 / 12.0), &bp, 1e-4).map_err(|e| e.to_string())?;
    ensure(
        t.max_residual <= TREE_CONFORMALITY && h.max_residual <= SCHOTTKY_CONFORMALITY,
        format!(
            "tree residual {:.2e} ≤ {TREE_CONFORMALITY}, Schottky residual {:.4} ≤ {SCHOTTKY_CONFORMALITY} over {} cells",
            t.max_residual, h.max_residual, h.retained_cells
        ),
    )
}

fn want(cs: &[(String, bool, Option<f64>, Option<f64>)], name: &str, band: Option<f64>) -> Result<Option<f64>, String> {
    let Some(c) = cs.iter().find(|c| c.0 == name) else {
        return Err(format!("{name} missing"));
    };
    if band.is_some() && c.3 != band {
        return Err(format!("{name} ran with band {:?} instead of {band:?}", c.3));
    }
    if !c.1 {
        return Err(format!("{name} failed with {:?}", c.2));
    }
    Ok(c.2)
}

fn criterion_7(root: &Path) -> Outcome {
    let tree = read_json(&run_dir(root, "dynamics", "tree.toml").join("dynamics.json"))?;
    let cs = checks(&tree);
    let c = want(&cs, "arithmetic_spectrum", None)?.unwrap_or(f64::NAN);
    if (c - 1.0).abs() > 1e-9 {
        return Err(format!("arithmetic period {c}"));
    }
    let cp = want(&cs, "counting_oscillating_periodic", Some(PERIOD_TOL))?.unwrap_or(f64::NAN);
    let mp = want(&cs, "mixing_period", Some(PERIOD_TOL))?.unwrap_or(f64::NAN);
    if (cp - 1.0).abs() > PERIOD_TOL || (mp - 1.0).abs() > PERIOD_TOL {
        return Err(format!("periods {cp}, {mp}"));
    }
    let sch = read_json(&run_dir(root, "dynamics", "schottky.toml").join("dynamics.json"))?;
    let cs = checks(&sch);
    want(&cs, "no_arithmetic_evidence", None)?;
    let ratio = want(&cs, "counting_trailing_ratio", Some(COUNTING_BAND))?.unwrap_or(f64::NAN);
    let osc = want(&cs, "mixing_oscillation", Some(MIXING_BAND))?.unwrap_or(f64::NAN);
    let last_t = sch["mixing"]["t_grid"].as_array().and_then(|a| a.last()).and_then(Value::as_f64).unwrap_or(0.0);
    ensure(
        (last_t - 10.0).abs() <= 0.5,
        format!(
            "tree: arithmetic(1), counting period {cp:.4}, mixing period {mp:.4}; \
             Schottky: no evidence, trailing ratio {ratio:.4} < {COUNTING_BAND}, mixing oscillation {osc:.4} < {MIXING_BAND}"
        ),
    )
}

fn criterion_8(root: &Path) -> Outcome {
    let sch = read_json(&run_dir(root, "dynamics", "schottky.toml").join("dynamics.json"))?;
    let cs = checks(&sch);
    let err = want(&cs, "theorem_b_ratio_ab_aa", Some(THEOREM_B_TOL))?.unwrap_or(f64::NAN);
    let t_last = sch["equidist"]["t_grid"].as_array().and_then(|a| a.last()).and_then(Value::as_f64).unwrap_or(0.0);
    if t_last != 12.0 {
        return Err(format!("ratio taken at T = {t_last}"));
    }
    want(&cs, "equidist_constant_matches_counting", None)?;
    let tree = read_json(&run_dir(root, "dynamics", "tree.toml").join("dynamics.json"))?;
    want(&checks(&tree), "equidist_constant_matches_counting", None)?;
    Ok(format!("relative error {err:.4} ≤ {THEOREM_B_TOL} at T = 12; f ≡ 1 equals the counting values on both presets"))
}

fn digests(dir: &Path) -> Result<Value, String> {
    Ok(read_json(&dir.join("manifest.json"))?["files"].clone())
}

fn criterion_9(first: &Path, second: &Path) -> Outcome {
    for (cmd, config) in RUNS {
        let dir = run_dir(second, cmd, config);
        let code = binary(cmd, config, &dir)?;
        if code != 0 {
            return Err(format!("{cmd} {config} rerun exited {code}"));
        }
        if digests(&run_dir(first, cmd, config))? != digests(&dir)? {
            return Err(format!("{cmd} {config}: digests differ between runs"));
        }
    }
    Ok(format!("{} command/config pairs rerun with identical digests", RUNS.len()))
}

fn main() {
    let first = tempfile::tempdir().expect("temporary directory");
    let second = tempfile::tempdir().expect("temporary directory");
    let mut setup_error = None;
    for (cmd, config) in RUNS {
        match binary(cmd, config, &run_dir(first.path(), cmd, config)) {
            Ok(0) => {}
            Ok(code) => setup_error = Some(format!("{cmd} {config} exited {code}")),
            Err(e) => setup_error = Some(e),
        }
    }
    let from_runs = |f: fn(&Path) -> Outcome| -> Outcome {
        match &setup_error {
            Some(e) => Err(e.clone()),
            None => f(first.path()),
        }
    };

    let results: Vec<(&str, Outcome)> = vec![
        ("exact tree counting", criterion_1()),
        ("critical exponent", criterion_2()),
        ("shadow and corridor counterexamples", criterion_3()),
        ("cross ratio equals translation length", criterion_4()),
        ("property suites", from_runs(criterion_5)),
        ("conformality", criterion_6()),
        ("arithmetic dichotomy", from_runs(criterion_7)),
        ("equidistribution ratio", from_runs(criterion_8)),
        ("determinism", criterion_9(first.path(), second.path())),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(msg) => println!("criterion {} {name}: pass ({msg})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} {name}: fail ({msg})", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
