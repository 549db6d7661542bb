//! Reduced words in a free group on up to 26 generators.
//!
//! A letter is a `u8` code: generator `i` is `2i`, its inverse is `2i + 1`.
//! Words are kept freely reduced by every constructor in this module.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Letter = u8;

/// Largest number of generators a presentation may use.
pub const MAX_GENERATORS: usize = 26;

#[inline]
pub fn inverse_letter(l: Letter) -> Letter {
    l ^ 1
}

#[inline]
pub fn generator_of(l: Letter) -> usize {
    (l >> 1) as usize
}

#[inline]
pub fn is_inverse(l: Letter) -> bool {
    l & 1 == 1
}

#[inline]
pub fn letter(generator: usize, inverse: bool) -> Letter {
    (generator as u8) << 1 | inverse as u8
}

/// Display form of a letter: generator `i` is the `i`-th lowercase ASCII
/// letter, its inverse the uppercase one.
pub fn letter_char(l: Letter) -> char {
    let c = (b'a' + (l >> 1)) as char;
    if is_inverse(l) {
        c.to_ascii_uppercase()
    } else {
        c
    }
}

pub fn letter_from_char(c: char, rank: usize) -> Result<Letter> {
    if !c.is_ascii_alphabetic() {
        return Err(Error::InvalidInput(format!("'{c}' is not a generator letter")));
    }
    let g = (c.to_ascii_lowercase() as u8 - b'a') as usize;
    if g >= rank {
        return Err(Error::InvalidInput(format!(
            "letter '{c}' names generator {g} but the group has rank {rank}"
        )));
    }
    Ok(letter(g, c.is_ascii_uppercase()))
}

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(SmallVec<[Letter; 22]>);

impl Word {
    pub fn identity() -> Self {
        Word(SmallVec::new())
    }

    pub fn from_letter(l: Letter) -> Self {
        let mut w = Word::identity();
        w.0.push(l);
        w
    }

    /// Builds a word from arbitrary letters, reducing freely.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut w = Word::identity();
        for l in letters {
            w.push(l);
        }
        w
    }

    /// Parses `"e"`, `""` or a string of generator letters such as `"aB"`.
    pub fn parse(s: &str, rank: usize) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" && rank < 5 {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            letters.push(letter_from_char(c, rank)?);
        }
        Ok(Word::from_letters(letters))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    /// Right-multiplies by a letter, cancelling if needed. Returns `true` if
    /// the word grew.
    pub fn push(&mut self, l: Letter) -> bool {
        if self.0.last() == Some(&inverse_letter(l)) {
            self.0.pop();
            false
        } else {
            self.0.push(l);
            true
        }
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    pub fn truncate(&mut self, n: usize) {
        self.0.truncate(n);
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].iter().copied().collect())
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &l in other.letters() {
            w.push(l);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| inverse_letter(l)).collect())
    }

    pub fn pow(&self, k: usize) -> Word {
        let mut w = Word::identity();
        for _ in 0..k {
            w = w.mul(self);
        }
        w
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.len() >= self.len() && other.0[..self.len()] == self.0[..]
    }

    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(a), Some(b)) => self.len() == 1 || a != inverse_letter(b),
            _ => true,
        }
    }

    /// Writes `self = u · c · u⁻¹` with `c` cyclically reduced; returns `(u, c)`.
    pub fn cyclic_reduction(&self) -> (Word, Word) {
        let n = self.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.0[k] == inverse_letter(self.0[n - 1 - k]) {
            k += 1;
        }
        let u = Word(self.0[..k].iter().copied().collect());
        let c = Word(self.0[k..n - k].iter().copied().collect());
        (u, c)
    }

    /// Lexicographically least cyclic rotation.
    pub fn least_rotation(&self) -> Word {
        let n = self.len();
        if n == 0 {
            return self.clone();
        }
        let mut best: Option<SmallVec<[Letter; 22]>> = None;
        for i in 0..n {
            let rot: SmallVec<[Letter; 22]> =
                self.0[i..].iter().chain(self.0[..i].iter()).copied().collect();
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
        Word(best.unwrap())
    }

    /// Shortest word `p` with `self = p^k`.
    pub fn primitive_root(&self) -> Word {
        let n = self.len();
        for d in 1..=n {
            if n.is_multiple_of(d) && (0..n).all(|i| self.0[i] == self.0[i % d]) {
                return Word(self.0[..d].iter().copied().collect());
            }
        }
        self.clone()
    }

    /// Canonical representative of the conjugacy class.
    pub fn conjugacy_key(&self) -> Word {
        self.cyclic_reduction().1.least_rotation()
    }

    /// All reduced words of exactly `len` letters over `rank` generators, in
    /// lexicographic order of letter codes.
    pub fn all_of_length(rank: usize, len: usize) -> Vec<Word> {
        let mut out = vec![Word::identity()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * (2 * rank).saturating_sub(1).max(1));
            for w in &out {
                for l in 0..(2 * rank) as Letter {
                    if w.last() == Some(inverse_letter(l)) {
                        continue;
                    }
                    let mut v = w.clone();
                    v.0.push(l);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("e");
        }
        for &l in self.letters() {
            write!(f, "{}", letter_char(l))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}
