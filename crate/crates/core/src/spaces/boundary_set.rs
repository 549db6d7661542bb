//! Finite unions of boundary intervals (circle boundaries) or cylinders
//! (tree boundaries), with exact set relations.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::tree::End;
use super::BoundaryPoint;
use crate::error::{Error, Result};
use crate::word::{inverse_letter, Letter, Word};

/// Interval `[lo, hi]` of angles inside `[0, 2π]`, endpoints open or closed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    fn contains(&self, t: f64) -> bool {
        (t > self.lo || (self.lo_closed && t == self.lo)) && (t < self.hi || (self.hi_closed && t == self.hi))
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    fn intersects(&self, o: &Interval) -> bool {
        let (lo, lo_closed) = if self.lo > o.lo {
            (self.lo, self.lo_closed)
        } else if o.lo > self.lo {
            (o.lo, o.lo_closed)
        } else {
            (self.lo, self.lo_closed && o.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < o.hi {
            (self.hi, self.hi_closed)
        } else if o.hi < self.hi {
            (o.hi, o.hi_closed)
        } else {
            (self.hi, self.hi_closed && o.hi_closed)
        };
        !Interval { lo, hi, lo_closed, hi_closed }.is_empty()
    }
}

/// A boundary subset. Circle sets are sorted disjoint intervals in
/// `[0, 2π)`; tree sets are cylinder prefixes, none a prefix of another
/// (the empty prefix is the whole boundary).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundarySet {
    Arcs(Vec<Interval>),
    Cylinders { rank: usize, prefixes: Vec<Word> },
}

impl BoundarySet {
    pub fn empty_circle() -> Self {
        BoundarySet::Arcs(Vec::new())
    }

    pub fn full_circle() -> Self {
        BoundarySet::Arcs(vec![Interval { lo: 0.0, hi: TAU, lo_closed: true, hi_closed: false }])
    }

    pub fn empty_tree(rank: usize) -> Self {
        BoundarySet::Cylinders { rank, prefixes: Vec::new() }
    }

    pub fn full_tree(rank: usize) -> Self {
        BoundarySet::Cylinders { rank, prefixes: vec![Word::identity()] }
    }

    /// The arc from `start` counterclockwise over `length` radians.
    pub fn arc(start: f64, length: f64, closed_start: bool, closed_end: bool) -> Result<Self> {
        Self::arcs(&[(start, length, closed_start, closed_end)])
    }

    pub fn arcs(parts: &[(f64, f64, bool, bool)]) -> Result<Self> {
        let mut pieces = Vec::new();
        for &(start, length, cs, ce) in parts {
            if !(length > 0.0) || !start.is_finite() {
                return Err(Error::InvalidInput(format!("arc of length {length} is empty")));
            }
            if length >= TAU {
                return Ok(Self::full_circle());
            }
            let lo = start.rem_euclid(TAU);
            let hi = lo + length;
            if hi <= TAU {
                pieces.push(Interval { lo, hi, lo_closed: cs, hi_closed: ce });
            } else {
                pieces.push(Interval { lo, hi: TAU, lo_closed: cs, hi_closed: false });
                pieces.push(Interval { lo: 0.0, hi: hi - TAU, lo_closed: true, hi_closed: ce });
            }
        }
        Ok(BoundarySet::Arcs(normalize_intervals(pieces)))
    }

    pub fn cylinders(rank: usize, prefixes: Vec<Word>) -> Self {
        BoundarySet::Cylinders { rank, prefixes: merge_cylinders(prefixes, rank) }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            BoundarySet::Arcs(v) => v.is_empty(),
            BoundarySet::Cylinders { prefixes, .. } => prefixes.is_empty(),
        }
    }

    pub fn contains(&self, p: &BoundaryPoint) -> Result<bool> {
        match (self, p) {
            (BoundarySet::Arcs(v), BoundaryPoint::H2(t) | BoundaryPoint::E2(t)) => {
                let t = crate::spaces::h2::canonical_angle(*t);
                Ok(v.iter().any(|i| i.contains(t)))
            }
            (BoundarySet::Cylinders { prefixes, .. }, BoundaryPoint::Tree(e)) => {
                Ok(prefixes.iter().any(|c| cylinder_contains(c, e)))
            }
            _ => Err(Error::ModelMismatch { expected: self.kind(), found: p.kind() }),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            BoundarySet::Arcs(_) => "circle boundary set",
            BoundarySet::Cylinders { .. } => "tree boundary set",
        }
    }

    pub fn complement(&self) -> BoundarySet {
        match self {
            BoundarySet::Arcs(v) => {
                let mut out = Vec::new();
                let mut cur = 0.0;
                let mut cur_closed = true;
                for i in v {
                    out.push(Interval { lo: cur, hi: i.lo, lo_closed: cur_closed, hi_closed: !i.lo_closed });
                    cur = i.hi;
                    cur_closed = !i.hi_closed;
                }
                out.push(Interval { lo: cur, hi: TAU, lo_closed: cur_closed, hi_closed: false });
                BoundarySet::Arcs(normalize_intervals(out))
            }
            BoundarySet::Cylinders { rank, prefixes } => {
                let mut out = Vec::new();
                complement_under(&Word::identity(), prefixes, *rank, &mut out);
                BoundarySet::cylinders(*rank, out)
            }
        }
    }

    pub fn intersects(&self, other: &BoundarySet) -> Result<bool> {
        match (self, other) {
            (BoundarySet::Arcs(a), BoundarySet::Arcs(b)) => {
                Ok(a.iter().any(|i| b.iter().any(|j| i.intersects(j))))
            }
            (BoundarySet::Cylinders { prefixes: a, .. }, BoundarySet::Cylinders { prefixes: b, .. }) => Ok(a
                .iter()
                .any(|c| b.iter().any(|d| c.is_prefix_of(d) || d.is_prefix_of(c)))),
            _ => Err(Error::ModelMismatch { expected: self.kind(), found: other.kind() }),
        }
    }

    pub fn is_subset_of(&self, other: &BoundarySet) -> Result<bool> {
        Ok(!self.intersects(&other.complement())?)
    }

    /// Total angular length (circle sets only).
    pub fn measure(&self) -> Option<f64> {
        match self {
            BoundarySet::Arcs(v) => Some(v.iter().map(|i| i.hi - i.lo).sum()),
            BoundarySet::Cylinders { .. } => None,
        }
    }
}

pub fn cylinder_contains(prefix: &Word, e: &End) -> bool {
    prefix.letters().iter().enumerate().all(|(i, &l)| e.letter(i) == l)
}

fn children(c: &Word, rank: usize) -> impl Iterator<Item = Word> + '_ {
    (0..2 * rank as Letter).filter_map(move |l| {
        if c.last() == Some(inverse_letter(l)) {
            None
        } else {
            let mut w = c.clone();
            w.push(l);
            Some(w)
        }
    })
}

fn complement_under(c: &Word, set: &[Word], rank: usize, out: &mut Vec<Word>) {
    if set.iter().any(|p| p.is_prefix_of(c)) {
        return;
    }
    if !set.iter().any(|p| c.is_prefix_of(p)) {
        out.push(c.clone());
        return;
    }
    for child in children(c, rank) {
        complement_under(&child, set, rank, out);
    }
}

/// Removes cylinders covered by others and replaces complete sibling
/// families by their parent.
pub fn merge_cylinders(mut set: Vec<Word>, rank: usize) -> Vec<Word> {
    loop {
        set.sort();
        set.dedup();
        let covered: Vec<bool> = set
            .iter()
            .map(|c| set.iter().any(|p| p.len() < c.len() && p.is_prefix_of(c)))
            .collect();
        let mut kept: Vec<Word> = set.iter().zip(covered).filter(|(_, cov)| !cov).map(|(c, _)| c.clone()).collect();
        let mut changed = kept.len() != set.len();
        let parents: Vec<Word> = kept.iter().filter(|c| !c.is_empty()).map(|c| c.prefix(c.len() - 1)).collect();
        for p in parents {
            if kept.contains(&p) {
                continue;
            }
            if children(&p, rank).all(|ch| kept.contains(&ch)) {
                kept.retain(|c| !(c.len() == p.len() + 1 && p.is_prefix_of(c)));
                kept.push(p);
                changed = true;
            }
        }
        set = kept;
        if !changed {
            set.sort();
            return set;
        }
    }
}

fn normalize_intervals(mut v: Vec<Interval>) -> Vec<Interval> {
    // a closed endpoint at 2π is the point 0
    let mut extra = Vec::new();
    for i in v.iter_mut() {
        if i.hi >= TAU {
            if i.hi_closed {
                extra.push(Interval { lo: 0.0, hi: 0.0, lo_closed: true, hi_closed: true });
            }
            i.hi = TAU;
            i.hi_closed = false;
        }
    }
    v.extend(extra);
    v.retain(|i| !i.is_empty());
    v.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
    let mut out: Vec<Interval> = Vec::new();
    for i in v {
        if let Some(last) = out.last_mut() {
            let touches = i.lo < last.hi || (i.lo == last.hi && (i.lo_closed || last.hi_closed));
            if touches {
                if i.hi > last.hi {
                    last.hi = i.hi;
                    last.hi_closed = i.hi_closed;
                } else if i.hi == last.hi {
                    last.hi_closed |= i.hi_closed;
                }
                if i.lo == last.lo {
                    last.lo_closed |= i.lo_closed;
                }
                continue;
            }
        }
        out.push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcs_wrap_and_complement() {
        let a = BoundarySet::arc(6.0, 1.0, true, false).unwrap();
        assert!(a.contains(&BoundaryPoint::H2(0.1)).unwrap());
        assert!(!a.contains(&BoundaryPoint::H2(1.0)).unwrap());
        let c = a.complement();
        assert!(c.contains(&BoundaryPoint::H2(1.0)).unwrap());
        assert!(!c.contains(&BoundaryPoint::H2(6.0)).unwrap());
        assert!(!a.intersects(&c).unwrap());
        assert!(a.is_subset_of(&BoundarySet::full_circle()).unwrap());
    }

    #[test]
    fn cylinder_algebra() {
        let a = Word::parse("a", 2).unwrap();
        let ab = Word::parse("ab", 2).unwrap();
        let s = BoundarySet::cylinders(2, vec![a.clone(), ab.clone()]);
        assert_eq!(s, BoundarySet::Cylinders { rank: 2, prefixes: vec![a.clone()] });
        let c = s.complement();
        if let BoundarySet::Cylinders { prefixes, .. } = &c {
            assert_eq!(prefixes.len(), 3);
        }
        let whole = BoundarySet::cylinders(2, Word::all_of_length(2, 1));
        assert_eq!(whole, BoundarySet::full_tree(2));
        assert!(!s.intersects(&c).unwrap());
    }
}
