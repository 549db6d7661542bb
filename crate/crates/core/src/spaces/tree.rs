//! Cayley trees of free groups with per-generator edge lengths.
//!
//! Vertices are reduced words; the root is the empty word and the edge from
//! `w` to `w·s` has the length of the generator of `s`. Ends are eventually
//! periodic reduced rays `prefix · period^∞` kept in a canonical form, so
//! equality of ends is equality of the stored words.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::decision::{ge, le, lt, Decision};
use crate::error::{Error, Result};
use crate::word::{generator_of, inverse_letter, letter_from_char, Letter, Word};

const SNAP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CayleyTree {
    lengths: Vec<f64>,
}

/// A point of the tree: a vertex, or a point at `offset` along the edge from
/// `vertex` to `vertex·letter` (always with `0 < offset < length`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    pub vertex: Word,
    pub step: Option<(Letter, f64)>,
}

impl TreePoint {
    pub fn root() -> Self {
        TreePoint { vertex: Word::identity(), step: None }
    }

    pub fn vertex(w: Word) -> Self {
        TreePoint { vertex: w, step: None }
    }

    /// Letters of the root path to this point, including a partial last edge.
    pub fn path_letters(&self) -> Word {
        let mut w = self.vertex.clone();
        if let Some((l, _)) = self.step {
            w.push(l);
        }
        w
    }
}

/// The end `prefix · period^∞`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct End {
    prefix: Word,
    period: Word,
}

impl End {
    /// Canonical end of the ray `prefix · period · period · …`. The period is
    /// conjugated to a cyclically reduced word first.
    pub fn new(prefix: &Word, period: &Word) -> Result<End> {
        let (u, c) = period.cyclic_reduction();
        if c.is_empty() {
            return Err(Error::InvalidInput("an end needs a nontrivial period".into()));
        }
        let prefix = prefix.mul(&u);
        let k = prefix.len() / c.len() + 2;
        let mut w = prefix.mul(&c.pow(k));
        let mut per: Vec<Letter> = c.letters().to_vec();
        while let Some(l) = w.last() {
            if l != *per.last().unwrap() {
                break;
            }
            w.pop();
            per.rotate_right(1);
        }
        let period = Word::from_letters(per).primitive_root();
        Ok(End { prefix: w, period })
    }

    /// The end `w · l^∞`.
    pub fn ray(w: &Word, l: Letter) -> End {
        End::new(w, &Word::from_letter(l)).expect("single letters are cyclically reduced")
    }

    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    pub fn letter(&self, i: usize) -> Letter {
        let p = self.prefix.len();
        if i < p {
            self.prefix.letters()[i]
        } else {
            self.period.letters()[(i - p) % self.period.len()]
        }
    }

    /// First `n` letters.
    pub fn head(&self, n: usize) -> Word {
        let mut w = Word::identity();
        for i in 0..n {
            w.push(self.letter(i));
        }
        w
    }

    /// Length of the longest common prefix, or `None` if the ends coincide.
    pub fn common_prefix_len(&self, other: &End) -> Option<usize> {
        if self == other {
            return None;
        }
        let bound = self.prefix.len().max(other.prefix.len()) + self.period.len() + other.period.len();
        (0..=bound).find(|&i| self.letter(i) != other.letter(i))
    }

    pub fn translated(&self, g: &Word) -> End {
        End::new(&g.mul(&self.prefix), &self.period).expect("period is nontrivial")
    }

    /// Parses `prefix(period)`, e.g. `aB(b)`; `e` denotes the empty prefix.
    pub fn parse(s: &str, rank: usize) -> Result<End> {
        let s = s.trim();
        let open = s
            .find('(')
            .ok_or_else(|| Error::InvalidInput(format!("end '{s}' must look like prefix(period)")))?;
        if !s.ends_with(')') {
            return Err(Error::InvalidInput(format!("end '{s}' must end with ')'")));
        }
        let prefix = Word::parse(&s[..open], rank)?;
        let mut period = Word::identity();
        for c in s[open + 1..s.len() - 1].chars() {
            period.push(letter_from_char(c, rank)?);
        }
        End::new(&prefix, &period)
    }
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.prefix.is_empty() {
            write!(f, "{}", self.prefix)?;
        }
        write!(f, "({})", self.period)
    }
}

impl fmt::Debug for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "End({self})")
    }
}

/// A bi-infinite geodesic from `back` to `fwd`. Positions are measured from
/// `pivot`, the branch point of the two ends, positive towards `fwd`;
/// `v(t)` is the point at position `anchor + t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeLine {
    pub back: End,
    pub fwd: End,
    pub pivot: Word,
    pub anchor: f64,
}

impl TreeLine {
    pub fn flow(&self, t: f64) -> TreeLine {
        TreeLine { anchor: self.anchor + t, ..self.clone() }
    }

    pub fn reversed(&self) -> TreeLine {
        TreeLine {
            back: self.fwd.clone(),
            fwd: self.back.clone(),
            pivot: self.pivot.clone(),
            anchor: -self.anchor,
        }
    }
}

impl CayleyTree {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() || lengths.len() > crate::word::MAX_GENERATORS {
            return Err(Error::InvalidInput(format!(
                "a Cayley tree needs between 1 and {} generators",
                crate::word::MAX_GENERATORS
            )));
        }
        if let Some(l) = lengths.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidInput(format!("edge length {l} is not positive")));
        }
        Ok(CayleyTree { lengths })
    }

    /// Regular tree of valence `2·rank` with unit edges.
    pub fn unit(rank: usize) -> Self {
        CayleyTree { lengths: vec![1.0; rank] }
    }

    pub fn rank(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    #[inline]
    pub fn edge(&self, l: Letter) -> f64 {
        self.lengths[generator_of(l)]
    }

    pub fn word_length(&self, w: &Word) -> f64 {
        w.letters().iter().map(|&l| self.edge(l)).sum()
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.letters().iter().find(|&&l| generator_of(l) >= self.rank()) {
            Some(_) => Err(Error::InvalidInput(format!("word {w} uses a generator outside the tree"))),
            None => Ok(()),
        }
    }

    /// Canonical point at `offset` along the edge from `vertex` to `vertex·l`.
    pub fn point_on_edge(&self, vertex: &Word, l: Letter, offset: f64) -> Result<TreePoint> {
        let len = self.edge(l);
        if !(0.0..=len).contains(&offset) {
            return Err(Error::InvalidInput(format!("offset {offset} outside edge of length {len}")));
        }
        if offset <= SNAP * len {
            return Ok(TreePoint::vertex(vertex.clone()));
        }
        let mut far = vertex.clone();
        far.push(l);
        if offset >= len * (1.0 - SNAP) {
            return Ok(TreePoint::vertex(far));
        }
        if vertex.last() == Some(inverse_letter(l)) {
            Ok(TreePoint { vertex: far, step: Some((inverse_letter(l), len - offset)) })
        } else {
            Ok(TreePoint { vertex: vertex.clone(), step: Some((l, offset)) })
        }
    }

    pub fn depth(&self, p: &TreePoint) -> f64 {
        self.word_length(&p.vertex) + p.step.map_or(0.0, |(_, o)| o)
    }

    /// `(letter, amount)` segments of the root path to `p`.
    fn segments<'a>(&'a self, p: &'a TreePoint) -> impl Iterator<Item = (Letter, f64)> + 'a {
        p.vertex
            .letters()
            .iter()
            .map(move |&l| (l, self.edge(l)))
            .chain(p.step.iter().copied())
    }

    /// Length of the common part of the root paths to `p` and `q`.
    pub fn overlap(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        let mut common = 0.0;
        for ((lp, ap), (lq, aq)) in self.segments(p).zip(self.segments(q)) {
            if lp != lq {
                break;
            }
            common += ap.min(aq);
            if ap != aq {
                break;
            }
        }
        common
    }

    /// Length of the common part of the root path to `p` and the ray to `xi`.
    pub fn overlap_end(&self, p: &TreePoint, xi: &End) -> f64 {
        let mut common = 0.0;
        for (i, (l, a)) in self.segments(p).enumerate() {
            if l != xi.letter(i) {
                break;
            }
            common += a;
            if a != self.edge(l) {
                break;
            }
        }
        common
    }

    pub fn distance(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        (self.depth(p) + self.depth(q) - 2.0 * self.overlap(p, q)).max(0.0)
    }

    pub fn busemann(&self, xi: &End, x: &TreePoint, y: &TreePoint) -> f64 {
        let hx = self.depth(x) - 2.0 * self.overlap_end(x, xi);
        let hy = self.depth(y) - 2.0 * self.overlap_end(y, xi);
        hx - hy
    }

    /// The point reached from the vertex `xi.head(start)` after travelling
    /// `dist` along `xi`.
    pub fn walk(&self, xi: &End, start: usize, dist: f64) -> TreePoint {
        let mut v = xi.head(start);
        let mut rem = dist;
        let mut i = start;
        loop {
            if rem <= SNAP * (1.0 + dist) {
                return TreePoint::vertex(v);
            }
            let l = xi.letter(i);
            let len = self.edge(l);
            if rem >= len * (1.0 - SNAP) {
                v.push(l);
                rem -= len;
                i += 1;
            } else {
                return TreePoint { vertex: v, step: Some((l, rem)) };
            }
        }
    }

    pub fn line_between(&self, xi: &End, eta: &End) -> Result<TreeLine> {
        let c = xi.common_prefix_len(eta).ok_or(Error::DegeneratePair)?;
        Ok(TreeLine { back: xi.clone(), fwd: eta.clone(), pivot: xi.head(c), anchor: 0.0 })
    }

    pub fn line_through(&self, xi: &End, eta: &End, x: &TreePoint) -> Result<TreeLine> {
        let mut line = self.line_between(xi, eta)?;
        let (pos, _) = self.project(&line, x);
        line.anchor = pos;
        Ok(line)
    }

    /// Position (from the pivot) of the projection of `x`, and its distance.
    pub fn project(&self, line: &TreeLine, x: &TreePoint) -> (f64, f64) {
        let c = self.word_length(&line.pivot);
        let of = self.overlap_end(x, &line.fwd);
        let ob = self.overlap_end(x, &line.back);
        let depth = self.depth(x);
        let eps = SNAP * (1.0 + c);
        if of > c + eps {
            (of - c, (depth - of).max(0.0))
        } else if ob > c + eps {
            (c - ob, (depth - ob).max(0.0))
        } else {
            (0.0, (depth + c - 2.0 * of.min(ob)).max(0.0))
        }
    }

    /// Foot time `t` (so that `v(t)` is the projection) and distance.
    pub fn foot(&self, line: &TreeLine, x: &TreePoint) -> (f64, f64) {
        let (pos, h) = self.project(line, x);
        (pos - line.anchor, h)
    }

    pub fn line_point(&self, line: &TreeLine, t: f64) -> TreePoint {
        let u = line.anchor + t;
        let start = line.pivot.len();
        if u >= 0.0 {
            self.walk(&line.fwd, start, u)
        } else {
            self.walk(&line.back, start, -u)
        }
    }

    pub fn translate_point(&self, g: &Word, p: &TreePoint) -> TreePoint {
        let v = g.mul(&p.vertex);
        match p.step {
            None => TreePoint::vertex(v),
            Some((l, o)) => self.point_on_edge(&v, l, o).expect("offset stays inside its edge"),
        }
    }

    pub fn translate_line(&self, g: &Word, line: &TreeLine) -> TreeLine {
        let back = line.back.translated(g);
        let fwd = line.fwd.translated(g);
        let base = self.translate_point(g, &self.line_point(line, 0.0));
        let mut out = self.line_between(&back, &fwd).expect("isometries keep ends distinct");
        out.anchor = self.project(&out, &base).0;
        out
    }

    /// End of the geodesic ray from `x` through `p`.
    pub fn direction(&self, x: &TreePoint, p: &TreePoint) -> Option<End> {
        if x == p {
            return None;
        }
        let o = self.overlap(x, p);
        let dp = self.depth(p);
        let (w, l) = if dp > o + SNAP * (1.0 + dp) {
            match p.step {
                Some((l, _)) => (p.vertex.clone(), l),
                None => {
                    let mut w = p.vertex.clone();
                    let l = w.pop().expect("p is not the root here");
                    (w, l)
                }
            }
        } else {
            let s = match p.step {
                Some((l, _)) => l,
                None => x.path_letters().letters()[p.vertex.len()],
            };
            let mut w = p.vertex.clone();
            w.push(s);
            (w, inverse_letter(s))
        };
        Some(End::ray(&w, l))
    }

    /// Ray from `x` towards `eta`: `(a, p)` with `a` the distance from `z`
    /// to the ray and `p` the distance from `x` to the branch point.
    fn tripod(&self, x: &TreePoint, z: &TreePoint, eta: &End) -> (f64, f64) {
        let d = self.distance(x, z);
        let b = self.busemann(eta, z, x);
        (((d + b) / 2.0).max(0.0), ((d - b) / 2.0).max(0.0))
    }

    pub fn shadow_from_point(&self, r: f64, x: &TreePoint, z: &TreePoint, eta: &End) -> Decision {
        lt(self.tripod(x, z, eta).0, r)
    }

    pub fn shadow_from_boundary(&self, r: f64, xi: &End, y: &TreePoint, eta: &End) -> Result<Decision> {
        let line = self.line_between(xi, eta)?;
        Ok(lt(self.project(&line, y).1, r))
    }

    pub fn refined_shadow_plus(&self, r: f64, x: &TreePoint, z: &TreePoint, eta: &End) -> Decision {
        let (a, p) = self.tripod(x, z, eta);
        lt(a, r).or(lt(p, r).and(lt(a + p, 2.0 * r)))
    }

    pub fn refined_shadow_minus(&self, r: f64, x: &TreePoint, z: &TreePoint, eta: &End) -> Decision {
        let (a, p) = self.tripod(x, z, eta);
        lt(a, r).and(ge(p, r).or(le(a, p)))
    }

    pub fn corridor(&self, r: f64, x: &TreePoint, y: &TreePoint, xi: &End, eta: &End) -> Result<Decision> {
        let line = self.line_between(xi, eta)?;
        let (px, hx) = self.project(&line, x);
        let (py, hy) = self.project(&line, y);
        let near = lt(hx, r).and(lt(hy, r));
        if !near.value {
            return Ok(near);
        }
        Ok(near.and(lt(px - (r - hx), py + (r - hy))))
    }

    /// `O_r^+(x, z)` as a list of cylinder prefixes (the empty prefix is the
    /// whole boundary).
    pub fn plus_shadow_cylinders(&self, r: f64, x: &TreePoint, z: &TreePoint) -> Vec<Word> {
        let px = x.path_letters();
        let pz = z.path_letters();
        let settled = |c: &Word, path: &Word| {
            let k = c.common_prefix_len(path);
            (k < c.len() && k < path.len()) || c.len() > path.len()
        };
        let mut out = Vec::new();
        let mut stack = vec![Word::identity()];
        while let Some(c) = stack.pop() {
            if !c.is_empty() && settled(&c, &px) && settled(&c, &pz) {
                let rep = End::ray(&c, c.last().unwrap());
                if self.refined_shadow_plus(r, x, z, &rep).value {
                    out.push(c);
                }
                continue;
            }
            for l in (0..2 * self.rank() as Letter).rev() {
                if c.last() == Some(inverse_letter(l)) {
                    continue;
                }
                let mut child = c.clone();
                child.push(l);
                stack.push(child);
            }
        }
        out.sort();
        crate::spaces::boundary_set::merge_cylinders(out, self.rank())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn ends_are_canonical() {
        let a = End::new(&w("ab"), &w("b")).unwrap();
        let b = End::new(&w("a"), &w("bb")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "a(b)");
        let c = End::new(&w("aB"), &w("b")).unwrap();
        assert_eq!(c.to_string(), "a(b)");
        let e = End::new(&w("bB"), &w("B")).unwrap();
        assert_eq!(e.to_string(), "(B)");
        let d = End::new(&w(""), &w("abA")).unwrap();
        assert_eq!(d.to_string(), "a(b)");
    }

    #[test]
    fn distances_and_busemann() {
        let t = CayleyTree::unit(2);
        let root = TreePoint::root();
        let ab = TreePoint::vertex(w("ab"));
        assert_eq!(t.distance(&root, &ab), 2.0);
        let xi = End::ray(&w(""), 0);
        assert_eq!(t.busemann(&xi, &root, &TreePoint::vertex(w("a"))), 1.0);
    }

    #[test]
    fn walking_a_line() {
        let t = CayleyTree::unit(2);
        let xi = End::ray(&w(""), 1);
        let eta = End::ray(&w(""), 2);
        let line = t.line_through(&xi, &eta, &TreePoint::root()).unwrap();
        assert_eq!(t.line_point(&line, 2.0), TreePoint::vertex(w("bb")));
        assert_eq!(t.line_point(&line, -1.5).vertex, w("A"));
    }
}
