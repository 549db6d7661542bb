//! Boolean outcomes of open-ball tests, with a flag for values that fall
//! inside the comparison band.

use serde::{Deserialize, Serialize};

/// Half-width of the comparison band, relative to `max(1, |a|, |b|)`.
pub const BAND: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub value: bool,
    /// At least one comparison that determined `value` was within the band.
    pub ambiguous: bool,
}

impl Decision {
    pub const TRUE: Decision = Decision { value: true, ambiguous: false };
    pub const FALSE: Decision = Decision { value: false, ambiguous: false };

    pub fn exact(value: bool) -> Self {
        Decision { value, ambiguous: false }
    }

    fn definite_false(self) -> bool {
        !self.value && !self.ambiguous
    }

    fn definite_true(self) -> bool {
        self.value && !self.ambiguous
    }

    pub fn and(self, other: Decision) -> Decision {
        if self.definite_false() || other.definite_false() {
            return Decision::FALSE;
        }
        Decision {
            value: self.value && other.value,
            ambiguous: self.ambiguous || other.ambiguous,
        }
    }

    pub fn or(self, other: Decision) -> Decision {
        if self.definite_true() || other.definite_true() {
            return Decision::TRUE;
        }
        Decision {
            value: self.value || other.value,
            ambiguous: self.ambiguous || other.ambiguous,
        }
    }
}

impl std::ops::Not for Decision {
    type Output = Decision;

    fn not(self) -> Decision {
        Decision { value: !self.value, ambiguous: self.ambiguous }
    }
}

impl From<Decision> for bool {
    fn from(d: Decision) -> bool {
        d.value
    }
}

#[inline]
fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= BAND * 1f64.max(a.abs()).max(b.abs())
}

/// `a < b`; equality within the band counts as false.
pub fn lt(a: f64, b: f64) -> Decision {
    if near(a, b) {
        Decision { value: false, ambiguous: true }
    } else {
        Decision::exact(a < b)
    }
}

/// `a ≤ b`; equality within the band counts as true.
pub fn le(a: f64, b: f64) -> Decision {
    if near(a, b) {
        Decision { value: true, ambiguous: true }
    } else {
        Decision::exact(a < b)
    }
}

pub fn gt(a: f64, b: f64) -> Decision {
    lt(b, a)
}

pub fn ge(a: f64, b: f64) -> Decision {
    le(b, a)
}
