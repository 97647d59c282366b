use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rat::Rat;

/// A closed interval `[lo, hi]` with exact endpoints. Serialized as `["lo", "hi"]`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[Rat; 2]", into = "[Rat; 2]")]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Interval {
        Interval { lo, hi }
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rat {
        self.lo.midpoint(&self.hi)
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// `x` lies in the open interval `(lo, hi)`.
    pub fn contains_open(&self, x: &Rat) -> bool {
        &self.lo < x && x < &self.hi
    }

    /// Inclusive containment of `other` in `self`.
    pub fn includes(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Closed intervals intersect iff neither lies strictly to one side of the other.
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Whether this closed interval meets the open interval `(lo, hi)`.
    pub fn meets_open(&self, lo: &Rat, hi: &Rat) -> bool {
        lo < hi && &self.lo < hi && lo < &self.hi
    }

    /// Strictly inside the open interval `(lo, hi)`.
    pub fn inside_open(&self, lo: &Rat, hi: &Rat) -> bool {
        lo < &self.lo && &self.hi < hi
    }
}

impl From<[Rat; 2]> for Interval {
    fn from([lo, hi]: [Rat; 2]) -> Interval {
        Interval { lo, hi }
    }
}

impl From<Interval> for [Rat; 2] {
    fn from(i: Interval) -> [Rat; 2] {
        [i.lo, i.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
