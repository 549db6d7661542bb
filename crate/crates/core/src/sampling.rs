//! Seeded random samples of points, boundary points and group elements for
//! property checks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

use crate::error::Result;
use crate::groups::{Classification, IsometryElement};
use crate::spaces::h2::{self, H2Point, Mobius};
use crate::spaces::{BoundaryPoint, CayleyTree, E2Point, End, ModelPoint, ModelSpace};
use crate::word::{inverse_letter, Letter, Word};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from `[lo, hi)`.
pub fn uniform(rng: &mut Rng64, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// Reduced word of exactly `len` letters.
pub fn word(rng: &mut Rng64, rank: usize, len: usize) -> Word {
    let mut w = Word::identity();
    while w.len() < len {
        let l = rng.gen_range(0..2 * rank) as Letter;
        if w.last() != Some(inverse_letter(l)) {
            w.push(l);
        }
    }
    w
}

/// Cyclically reduced word of exactly `len ≥ 1` letters.
pub fn cyclic_word(rng: &mut Rng64, rank: usize, len: usize) -> Word {
    loop {
        let w = word(rng, rank, len);
        if w.is_cyclically_reduced() {
            return w;
        }
    }
}

/// A point within hyperbolic distance `spread` of `i`, or within `spread`
/// of the root (tree), or in the square `[−spread, spread]²` (plane).
pub fn point(rng: &mut Rng64, space: &ModelSpace, spread: f64) -> ModelPoint {
    match space {
        ModelSpace::H2 => {
            let r = rng.gen_range(0.0..spread);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let m = Mobius::normalizer(theta).inverse();
            let p = H2Point::new(0.0, r.exp()).expect("positive imaginary part");
            ModelPoint::H2(m.apply(p))
        }
        ModelSpace::Tree(t) => ModelPoint::Tree(tree_point(rng, t, spread)),
        ModelSpace::E2 => ModelPoint::E2(E2Point { x: rng.gen_range(-spread..spread), y: rng.gen_range(-spread..spread) }),
    }
}

fn tree_point(rng: &mut Rng64, t: &CayleyTree, spread: f64) -> crate::spaces::TreePoint {
    let rank = t.rank();
    let mut v = Word::identity();
    let mut depth = 0.0;
    loop {
        let l = loop {
            let l = rng.gen_range(0..2 * rank) as Letter;
            if v.last() != Some(inverse_letter(l)) {
                break l;
            }
        };
        let e = t.edge(l);
        let stop = rng.gen_bool(0.3);
        if stop || depth + e > spread {
            let off = rng.gen_range(0.0..e);
            return t.point_on_edge(&v, l, off).expect("offset inside the edge");
        }
        depth += e;
        v.push(l);
    }
}

pub fn boundary_point(rng: &mut Rng64, space: &ModelSpace) -> BoundaryPoint {
    match space {
        ModelSpace::H2 => BoundaryPoint::H2(rng.gen_range(0.0..std::f64::consts::TAU)),
        ModelSpace::E2 => BoundaryPoint::E2(rng.gen_range(0.0..std::f64::consts::TAU)),
        ModelSpace::Tree(t) => {
            let rank = t.rank();
            let plen0 = rng.gen_range(0..5);
            let prefix = word(rng, rank, plen0);
            let plen = rng.gen_range(1..4);
            let period = loop {
                let p = cyclic_word(rng, rank, plen);
                // the period must continue the prefix without cancellation
                if prefix.last().is_none_or(|l| p.first() != Some(inverse_letter(l))) {
                    break p;
                }
            };
            BoundaryPoint::Tree(End::new(&prefix, &period).expect("valid ray"))
        }
    }
}

/// Hyperbolic isometry with translation length in `[0.2, 4]` and random
/// axis endpoints.
pub fn axial_mobius(rng: &mut Rng64) -> Mobius {
    let len: f64 = rng.gen_range(0.2..4.0);
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut b = rng.gen_range(0.0..std::f64::consts::TAU);
    while h2::angle_gap(a, b) < 0.05 {
        b = rng.gen_range(0.0..std::f64::consts::TAU);
    }
    // rotate so that b ↦ ∞ , then a sits at a real point t
    let n = Mobius::normalizer(b);
    let t = h2::real_from_angle(n.apply_angle(a));
    // translation along the vertical line over t, attracting towards ∞
    let h = (0.5 * len).exp();
    let d = Mobius::new(h, t * (1.0 / h - h), 0.0, 1.0 / h).expect("positive determinant");
    n.inverse().mul(&d).mul(&n)
}

/// Axial element of the model's isometry group: a random hyperbolic Möbius
/// map, or a random nontrivial word of the tree's free group.
pub fn axial_element(rng: &mut Rng64, space: &ModelSpace) -> Result<IsometryElement> {
    match space {
        ModelSpace::H2 => loop {
            let g = IsometryElement::mobius(axial_mobius(rng), Word::identity());
            if matches!(g.classification, Classification::Axial { .. }) {
                return Ok(g);
            }
        },
        ModelSpace::Tree(t) => {
            let len = rng.gen_range(1..7);
            Ok(IsometryElement::tree_word(space, word(rng, t.rank(), len)))
        }
        ModelSpace::E2 => Err(crate::error::Error::Unsupported(
            "the Euclidean plane carries no group actions here".into(),
        )),
    }
}
