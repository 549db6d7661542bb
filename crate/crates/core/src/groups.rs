//! Discrete free groups acting on the model spaces: Möbius generators on
//! the hyperbolic plane, free generators acting on their Cayley tree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::h2::{angle_from_hom, canonical_angle};
use crate::spaces::{BoundaryPoint, BoundarySet, GeodesicLine, Interval, ModelPoint, ModelSpace, Mobius};
use crate::spaces::End;
use crate::word::{generator_of, inverse_letter, is_inverse, Letter, Word};

/// Trace band around 2 inside which an element counts as parabolic.
pub const PARABOLIC_BAND: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Action {
    H2(Mobius),
    /// The tree action is left multiplication by the element's own word.
    Tree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Classification {
    Identity,
    Elliptic,
    Parabolic,
    Axial { length: f64, fix_minus: BoundaryPoint, fix_plus: BoundaryPoint },
}

impl Classification {
    pub fn translation_length(&self) -> Option<f64> {
        match self {
            Classification::Axial { length, .. } => Some(*length),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryElement {
    pub action: Action,
    pub word: Word,
    pub classification: Classification,
}

fn classify_mobius(m: &Mobius) -> Classification {
    let tr = m.trace();
    let atr = tr.abs();
    if (atr - 2.0).abs() <= PARABOLIC_BAND {
        let scale = 1f64.max(m.a.abs()).max(m.d.abs());
        if m.b.abs() <= PARABOLIC_BAND * scale && m.c.abs() <= PARABOLIC_BAND * scale {
            return Classification::Identity;
        }
        return Classification::Parabolic;
    }
    if atr < 2.0 {
        return Classification::Elliptic;
    }
    let s = tr.signum();
    let (a, b, c, d) = (s * m.a, s * m.b, s * m.c, s * m.d);
    let disc = (atr * atr - 4.0).sqrt();
    let big = (atr + disc) / 2.0;
    let small = 1.0 / big;
    let eig = |mu: f64| {
        let v1 = (b, mu - a);
        let v2 = (mu - d, c);
        if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) {
            v1
        } else {
            v2
        }
    };
    Classification::Axial {
        length: 2.0 * big.ln(),
        fix_minus: BoundaryPoint::H2(angle_from_hom(eig(small))),
        fix_plus: BoundaryPoint::H2(angle_from_hom(eig(big))),
    }
}

fn classify_word(space: &ModelSpace, w: &Word) -> Classification {
    if w.is_empty() {
        return Classification::Identity;
    }
    let tree = space.tree().expect("tree words act on trees");
    let (u, c) = w.cyclic_reduction();
    Classification::Axial {
        length: tree.word_length(&c),
        fix_minus: BoundaryPoint::Tree(End::new(&u, &c.inverse()).expect("nontrivial")),
        fix_plus: BoundaryPoint::Tree(End::new(&u, &c).expect("nontrivial")),
    }
}

impl IsometryElement {
    pub fn mobius(m: Mobius, word: Word) -> Self {
        IsometryElement { classification: classify_mobius(&m), action: Action::H2(m), word }
    }

    pub fn tree_word(space: &ModelSpace, word: Word) -> Self {
        IsometryElement { classification: classify_word(space, &word), action: Action::Tree, word }
    }

    pub fn identity(space: &ModelSpace) -> Result<Self> {
        match space {
            ModelSpace::H2 => Ok(Self::mobius(Mobius::IDENTITY, Word::identity())),
            ModelSpace::Tree(_) => Ok(Self::tree_word(space, Word::identity())),
            ModelSpace::E2 => Err(e2_rejected()),
        }
    }

    pub fn matrix(&self) -> Option<&Mobius> {
        match &self.action {
            Action::H2(m) => Some(m),
            Action::Tree => None,
        }
    }

    fn kind(&self) -> &'static str {
        match self.action {
            Action::H2(_) => "H2",
            Action::Tree => "tree",
        }
    }
}

fn e2_rejected() -> Error {
    Error::Unsupported("the Euclidean plane carries no group actions here".into())
}

fn check_model(space: &ModelSpace, g: &IsometryElement) -> Result<()> {
    match (space, &g.action) {
        (ModelSpace::H2, Action::H2(_)) | (ModelSpace::Tree(_), Action::Tree) => Ok(()),
        (ModelSpace::E2, _) => Err(e2_rejected()),
        _ => Err(Error::ModelMismatch { expected: space.kind(), found: g.kind() }),
    }
}

/// `g ∘ h`: first `h`, then `g`.
pub fn compose(space: &ModelSpace, g: &IsometryElement, h: &IsometryElement) -> Result<IsometryElement> {
    check_model(space, g)?;
    check_model(space, h)?;
    let word = g.word.mul(&h.word);
    Ok(match (&g.action, &h.action) {
        (Action::H2(a), Action::H2(b)) => IsometryElement::mobius(a.mul(b), word),
        _ => IsometryElement::tree_word(space, word),
    })
}

pub fn inverse(space: &ModelSpace, g: &IsometryElement) -> Result<IsometryElement> {
    check_model(space, g)?;
    let word = g.word.inverse();
    Ok(match &g.action {
        Action::H2(m) => IsometryElement::mobius(m.inverse(), word),
        Action::Tree => IsometryElement::tree_word(space, word),
    })
}

pub fn apply_point(space: &ModelSpace, g: &IsometryElement, p: &ModelPoint) -> Result<ModelPoint> {
    check_model(space, g)?;
    match (&g.action, p, space) {
        (Action::H2(m), ModelPoint::H2(z), _) => Ok(ModelPoint::H2(m.apply(*z))),
        (Action::Tree, ModelPoint::Tree(q), ModelSpace::Tree(t)) => {
            Ok(ModelPoint::Tree(t.translate_point(&g.word, q)))
        }
        _ => Err(Error::ModelMismatch { expected: g.kind(), found: "point of another model" }),
    }
}

pub fn apply_boundary(space: &ModelSpace, g: &IsometryElement, b: &BoundaryPoint) -> Result<BoundaryPoint> {
    check_model(space, g)?;
    match (&g.action, b) {
        (Action::H2(m), BoundaryPoint::H2(t)) => Ok(BoundaryPoint::H2(m.apply_angle(*t))),
        (Action::Tree, BoundaryPoint::Tree(e)) => Ok(BoundaryPoint::Tree(e.translated(&g.word))),
        _ => Err(Error::ModelMismatch { expected: g.kind(), found: b.kind() }),
    }
}

pub fn apply_line(space: &ModelSpace, g: &IsometryElement, v: &GeodesicLine) -> Result<GeodesicLine> {
    check_model(space, g)?;
    match (&g.action, v, space) {
        (Action::H2(m), GeodesicLine::H2(l), _) => Ok(GeodesicLine::H2(l.transformed(m))),
        (Action::Tree, GeodesicLine::Tree(l), ModelSpace::Tree(t)) => {
            Ok(GeodesicLine::Tree(t.translate_line(&g.word, l)))
        }
        _ => Err(Error::ModelMismatch { expected: g.kind(), found: "line of another model" }),
    }
}

/// `gⁿξ`, which converges to `g⁺` for every `ξ ≠ g⁻`.
pub fn north_south_check(space: &ModelSpace, g: &IsometryElement, xi: &BoundaryPoint, n: u32) -> Result<BoundaryPoint> {
    let Classification::Axial { fix_minus, .. } = &g.classification else {
        return Err(Error::InvalidInput("north-south dynamics needs an axial element".into()));
    };
    if space.same_boundary(xi, fix_minus) {
        return Err(Error::FixedPoint);
    }
    let mut p = xi.clone();
    for _ in 0..n {
        p = apply_boundary(space, g, &p)?;
    }
    Ok(p)
}

/// Generators with ping-pong domains `D_l`, one per letter (generator or
/// inverse), and a basepoint with trivial stabilizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub space: ModelSpace,
    pub generators: Vec<IsometryElement>,
    pub domains: Vec<BoundarySet>,
    pub basepoint: ModelPoint,
}

impl GroupPresentation {
    /// Möbius generators with domains listed as `[D_a, D_A, D_b, D_B, …]`.
    pub fn h2(matrices: Vec<Mobius>, domains: Vec<BoundarySet>, basepoint: ModelPoint) -> Result<Self> {
        if domains.len() != 2 * matrices.len() {
            return Err(Error::InvalidInput(format!(
                "{} generators need {} ping-pong domains, got {}",
                matrices.len(),
                2 * matrices.len(),
                domains.len()
            )));
        }
        if matrices.len() > crate::word::MAX_GENERATORS {
            return Err(Error::InvalidInput("too many generators".into()));
        }
        let generators: Vec<IsometryElement> = matrices
            .into_iter()
            .enumerate()
            .map(|(i, m)| IsometryElement::mobius(m, Word::from_letter(crate::word::letter(i, false))))
            .collect();
        for (i, g) in generators.iter().enumerate() {
            if !matches!(g.classification, Classification::Axial { .. }) {
                return Err(Error::InvalidInput(format!(
                    "generator {} is {:?}; free presentations need axial generators",
                    crate::word::letter_char(crate::word::letter(i, false)),
                    g.classification
                )));
            }
        }
        if let Some(d) = domains.iter().find(|d| !matches!(d, BoundarySet::Arcs(_))) {
            return Err(Error::ModelMismatch { expected: "circle boundary set", found: d_kind(d) });
        }
        ModelSpace::H2.check_point(&basepoint)?;
        Ok(GroupPresentation { space: ModelSpace::H2, generators, domains, basepoint })
    }

    /// The free group acting on its own Cayley tree, with cylinder domains.
    pub fn tree(space: ModelSpace) -> Result<Self> {
        let ModelSpace::Tree(t) = &space else {
            return Err(match space {
                ModelSpace::E2 => e2_rejected(),
                _ => Error::ModelMismatch { expected: "tree", found: space.kind() },
            });
        };
        let rank = t.rank();
        let generators = (0..rank)
            .map(|i| IsometryElement::tree_word(&space, Word::from_letter(crate::word::letter(i, false))))
            .collect();
        let domains = (0..2 * rank as Letter)
            .map(|l| BoundarySet::cylinders(rank, vec![Word::from_letter(l)]))
            .collect();
        Ok(GroupPresentation { basepoint: space.root(), space, generators, domains })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Matrix of a letter (generator or inverse).
    pub fn letter_matrix(&self, l: Letter) -> Option<Mobius> {
        let m = *self.generators[generator_of(l)].matrix()?;
        Some(if is_inverse(l) { m.inverse() } else { m })
    }

    pub fn element(&self, w: &Word) -> Result<IsometryElement> {
        if w.letters().iter().any(|&l| generator_of(l) >= self.rank()) {
            return Err(Error::InvalidInput(format!("word {w} uses an unknown generator")));
        }
        match &self.space {
            ModelSpace::H2 => {
                let mut m = Mobius::IDENTITY;
                for &l in w.letters() {
                    m = m.mul(&self.letter_matrix(l).unwrap());
                }
                Ok(IsometryElement::mobius(m, w.clone()))
            }
            ModelSpace::Tree(_) => Ok(IsometryElement::tree_word(&self.space, w.clone())),
            ModelSpace::E2 => Err(e2_rejected()),
        }
    }

    /// `w·p` for a point `p`.
    pub fn act(&self, w: &Word, p: &ModelPoint) -> Result<ModelPoint> {
        apply_point(&self.space, &self.element(w)?, p)
    }
}

fn d_kind(d: &BoundarySet) -> &'static str {
    match d {
        BoundarySet::Arcs(_) => "circle boundary set",
        BoundarySet::Cylinders { .. } => "tree boundary set",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PingPong {
    Certified { samples: usize },
    Violation { letter: String, witness: BoundaryPoint, reason: String },
}

/// Points spread over a circle set: interval endpoints (nudged inside) plus
/// an even grid of interior points.
fn circle_samples(set: &BoundarySet, per_interval: usize) -> Vec<f64> {
    let BoundarySet::Arcs(v) = set else { return Vec::new() };
    let mut out = Vec::new();
    for Interval { lo, hi, .. } in v {
        let w = hi - lo;
        if w <= 0.0 {
            out.push(*lo);
            continue;
        }
        let nudge = w * 1e-9;
        out.push(lo + nudge);
        out.push(hi - nudge);
        for k in 1..per_interval {
            out.push(lo + w * k as f64 / per_interval as f64);
        }
    }
    out
}

fn within(set: &BoundarySet, t: f64, slack: f64) -> bool {
    let probe = |u: f64| set.contains(&BoundaryPoint::H2(canonical_angle(u))).unwrap_or(false);
    probe(t) || probe(t - slack) || probe(t + slack)
}

/// Checks the Klein criterion: domains pairwise disjoint and each letter `l`
/// mapping the complement of `D_{l⁻¹}` into `D_l`.
pub fn verify_ping_pong(gp: &GroupPresentation) -> PingPong {
    let letters: Vec<Letter> = (0..2 * gp.rank() as Letter).collect();
    let name = |l: Letter| crate::word::letter_char(l).to_string();
    let mut samples = 0;
    match &gp.space {
        ModelSpace::H2 => {
            for (i, &l) in letters.iter().enumerate() {
                for &m in &letters[i + 1..] {
                    let (di, dm) = (&gp.domains[l as usize], &gp.domains[m as usize]);
                    if di.intersects(dm).unwrap_or(true) {
                        let witness = circle_samples(di, 256)
                            .into_iter()
                            .find(|&t| within(dm, t, 0.0))
                            .or_else(|| circle_samples(di, 1).first().copied())
                            .unwrap_or(0.0);
                        return PingPong::Violation {
                            letter: name(l),
                            witness: BoundaryPoint::H2(witness),
                            reason: format!("domains of {} and {} intersect", name(l), name(m)),
                        };
                    }
                }
            }
            for &l in &letters {
                let m = gp.letter_matrix(l).unwrap();
                let outside = gp.domains[inverse_letter(l) as usize].complement();
                let target = &gp.domains[l as usize];
                for t in circle_samples(&outside, 1024) {
                    samples += 1;
                    let image = m.apply_angle(t);
                    if !within(target, image, 1e-9) {
                        return PingPong::Violation {
                            letter: name(l),
                            witness: BoundaryPoint::H2(t),
                            reason: format!(
                                "{} maps a point outside the domain of {} outside its own domain",
                                name(l),
                                name(inverse_letter(l))
                            ),
                        };
                    }
                }
            }
            PingPong::Certified { samples }
        }
        ModelSpace::Tree(t) => {
            let rank = t.rank();
            for (i, &l) in letters.iter().enumerate() {
                for &m in &letters[i + 1..] {
                    if gp.domains[l as usize].intersects(&gp.domains[m as usize]).unwrap_or(true) {
                        return PingPong::Violation {
                            letter: name(l),
                            witness: BoundaryPoint::Tree(End::ray(&Word::from_letter(l), l)),
                            reason: format!("domains of {} and {} intersect", name(l), name(m)),
                        };
                    }
                }
            }
            for &l in &letters {
                let g = Word::from_letter(l);
                let target = &gp.domains[l as usize];
                for w in Word::all_of_length(rank, 3) {
                    if w.first() == Some(inverse_letter(l)) {
                        continue;
                    }
                    samples += 1;
                    let e = BoundaryPoint::Tree(End::ray(&w, w.last().unwrap()));
                    let image = match &e {
                        BoundaryPoint::Tree(end) => BoundaryPoint::Tree(end.translated(&g)),
                        _ => unreachable!(),
                    };
                    if !target.contains(&image).unwrap_or(false) {
                        return PingPong::Violation {
                            letter: name(l),
                            witness: e,
                            reason: format!("{} does not map into its domain", name(l)),
                        };
                    }
                }
            }
            PingPong::Certified { samples }
        }
        ModelSpace::E2 => PingPong::Violation {
            letter: String::new(),
            witness: BoundaryPoint::E2(0.0),
            reason: "the Euclidean plane carries no group actions here".into(),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthSpectrumSample {
    /// `(ℓ, canonical conjugacy representative)`, sorted by word.
    pub lengths: Vec<(f64, Word)>,
    pub max_word_len: usize,
}

impl LengthSpectrumSample {
    pub fn values(&self) -> Vec<f64> {
        self.lengths.iter().map(|(l, _)| *l).collect()
    }
}

/// Translation lengths of one representative per conjugacy class among
/// cyclically reduced words of length `1..=max_word_len`.
pub fn length_spectrum(gp: &GroupPresentation, max_word_len: usize) -> Result<LengthSpectrumSample> {
    let mut classes: BTreeMap<Word, f64> = BTreeMap::new();
    for len in 1..=max_word_len {
        for w in Word::all_of_length(gp.rank(), len) {
            if !w.is_cyclically_reduced() {
                continue;
            }
            let key = w.least_rotation();
            if classes.contains_key(&key) {
                continue;
            }
            let g = gp.element(&key)?;
            if let Some(l) = g.classification.translation_length() {
                classes.insert(key, l);
            }
        }
    }
    Ok(LengthSpectrumSample {
        lengths: classes.into_iter().map(|(w, l)| (l, w)).collect(),
        max_word_len,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Arithmeticity {
    Arithmetic { c: f64 },
    NoEvidence { min_gap_ratio: f64, c: f64 },
}

fn real_gcd(mut a: f64, mut b: f64, tol: f64) -> f64 {
    a = a.abs();
    b = b.abs();
    while b >= tol {
        let r = (a - b * (a / b).round()).abs();
        a = b;
        b = r;
    }
    a
}

/// Approximate generator of the additive group spanned by the sample, via
/// Euclid's algorithm on reals. `tol` defaults to `1e−6·max ℓ`.
pub fn arithmeticity_test(ls: &LengthSpectrumSample, tol: Option<f64>) -> Result<Arithmeticity> {
    let mut vals = ls.values();
    if vals.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "arithmeticity needs at least 2 lengths, got {}",
            vals.len()
        )));
    }
    vals.sort_by(f64::total_cmp);
    let max = *vals.last().unwrap();
    let tol = tol.unwrap_or(1e-6 * max);
    let mut c = vals[0];
    for &v in &vals[1..] {
        c = real_gcd(c, v, tol);
        if c < tol {
            break;
        }
    }
    let on_lattice = vals.iter().all(|v| (v - c * (v / c).round()).abs() <= tol);
    if c > 10.0 * tol && on_lattice {
        Ok(Arithmeticity::Arithmetic { c })
    } else {
        Ok(Arithmeticity::NoEvidence { min_gap_ratio: c / tol, c })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_is_axial() {
        let e = 1f64.exp();
        let g = IsometryElement::mobius(Mobius::new(e, 0.0, 0.0, 1.0 / e).unwrap(), Word::identity());
        match g.classification {
            Classification::Axial { length, fix_minus, fix_plus } => {
                assert!((length - 2.0).abs() < 1e-12);
                assert_eq!(fix_plus, BoundaryPoint::H2(0.0));
                assert!(matches!(fix_minus, BoundaryPoint::H2(t) if (t - std::f64::consts::PI).abs() < 1e-12));
            }
            other => panic!("{other:?}"),
        }
        let p = IsometryElement::mobius(Mobius::new(1.0, 1.0, 0.0, 1.0).unwrap(), Word::identity());
        assert_eq!(p.classification, Classification::Parabolic);
    }

    #[test]
    fn real_gcd_of_integers() {
        let ls = LengthSpectrumSample {
            lengths: vec![(2.0, Word::identity()), (3.0, Word::identity()), (4.0, Word::identity())],
            max_word_len: 1,
        };
        match arithmeticity_test(&ls, None).unwrap() {
            Arithmeticity::Arithmetic { c } => assert!((c - 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
}
