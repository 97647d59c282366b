//! The fixed enumeration of the rationals in a closed rational interval.
//!
//! The scheme lists `ℚ ∩ [0, 1]` as `0, 1`, then the Stern–Brocot tree below
//! `1/2` level by level, left to right:
//!
//! ```text
//! index  0    1    2    3    4    5    6    7    8    9 ...
//! value  0/1  1/1  1/2  1/3  2/3  1/4  2/5  3/5  3/4  1/5 ...
//! ```
//!
//! and maps `q ↦ lo + q·(hi − lo)`. Level `L ≥ 1` holds `2^(L-1)` fractions
//! starting at index `2^(L-1) + 1`; the position inside a level is the
//! left/right path from `1/2` read as a binary number.
//!
//! Indices are arbitrary-precision because the least-index element of a narrow
//! interval can sit extremely deep in the tree. [`RatEnumeration::first_in`]
//! does not scan: among the tree nodes in an open interval there is exactly one
//! of minimal depth (any two nodes of equal depth have a shallower common
//! ancestor between them), and it is found by a Stern–Brocot descent that
//! takes runs of equal turns in one step.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rat::Rat;

/// Default cap on the Stern–Brocot level `first_in` will descend to.
pub const DEFAULT_LEVEL_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("empty interval ({x}, {y})")]
    EmptyInterval { x: Rat, y: Rat },
    #[error("interval ({x}, {y}) is not inside the enumerated range [{lo}, {hi}]")]
    OutOfRange { x: Rat, y: Rat, lo: Rat, hi: Rat },
    #[error("no element of ({x}, {y}) within Stern-Brocot level {cap}")]
    CapExceeded { x: Rat, y: Rat, cap: u64 },
    #[error("enumeration range [{lo}, {hi}] is empty")]
    InvalidRange { lo: Rat, hi: Rat },
}

/// Enumeration of `ℚ ∩ [lo, hi]` by the Stern–Brocot breadth-first scheme.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RatEnumeration {
    lo: Rat,
    hi: Rat,
}

/// A hit from [`RatEnumeration::first_in`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumHit {
    pub value: Rat,
    pub index: BigUint,
    /// Stern–Brocot level of the unit-interval preimage (1 for `1/2`).
    pub level: u64,
}

impl RatEnumeration {
    pub const SCHEME: &'static str = "stern-brocot";

    pub fn new(lo: Rat, hi: Rat) -> Result<RatEnumeration, EnumError> {
        if lo >= hi {
            return Err(EnumError::InvalidRange { lo, hi });
        }
        Ok(RatEnumeration { lo, hi })
    }

    pub fn unit() -> RatEnumeration {
        RatEnumeration { lo: Rat::zero(), hi: Rat::one() }
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    fn to_range(&self, q: &Rat) -> Rat {
        &self.lo + q * (&self.hi - &self.lo)
    }

    fn to_unit(&self, x: &Rat) -> Rat {
        (x - &self.lo) / (&self.hi - &self.lo)
    }

    /// The `k`-th element.
    pub fn at(&self, k: u64) -> Rat {
        self.at_index(&BigUint::from(k))
    }

    pub fn at_index(&self, k: &BigUint) -> Rat {
        self.to_range(&unit_at(k))
    }

    /// The least-index element `v` with `x < v < y`.
    pub fn first_in(&self, x: &Rat, y: &Rat, level_cap: u64) -> Result<EnumHit, EnumError> {
        if x >= y {
            return Err(EnumError::EmptyInterval { x: x.clone(), y: y.clone() });
        }
        if x < &self.lo || y > &self.hi {
            return Err(EnumError::OutOfRange {
                x: x.clone(),
                y: y.clone(),
                lo: self.lo.clone(),
                hi: self.hi.clone(),
            });
        }
        let ux = self.to_unit(x);
        let uy = self.to_unit(y);
        let node = simplest_between(&ux, &uy, level_cap).ok_or_else(|| EnumError::CapExceeded {
            x: x.clone(),
            y: y.clone(),
            cap: level_cap,
        })?;
        Ok(EnumHit { value: self.to_range(&node.value), index: node.index(), level: node.level })
    }

    /// Index of a rational of the range, if it lies in `[lo, hi]`.
    pub fn index_of(&self, x: &Rat) -> Option<BigUint> {
        if x < &self.lo || x > &self.hi {
            return None;
        }
        Some(unit_index_of(&self.to_unit(x)))
    }
}

/// A node of the Stern–Brocot tree restricted to `(0, 1)`, with its path from
/// `1/2` stored as runs of equal turns (`true` = right).
struct SbNode {
    value: Rat,
    level: u64,
    runs: Vec<(bool, u64)>,
}

impl SbNode {
    fn index(&self) -> BigUint {
        // index = 2^(L-1) + 1 + position, position = path bits MSB first
        let mut position = BigUint::zero();
        for &(right, len) in &self.runs {
            position <<= len as usize;
            if right {
                position += (BigUint::one() << len as usize) - BigUint::one();
            }
        }
        (BigUint::one() << (self.level - 1) as usize) + BigUint::one() + position
    }
}

fn unit_at(k: &BigUint) -> Rat {
    if k.is_zero() {
        return Rat::zero();
    }
    if k.is_one() {
        return Rat::one();
    }
    // k - 1 = 2^(L-1) + position  with  0 <= position < 2^(L-1)
    let m = k - BigUint::one();
    let path_len = m.bits() - 1;
    let position = m - (BigUint::one() << path_len as usize);
    let (mut a, mut b, mut c, mut d) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::one());
    for i in (0..path_len).rev() {
        let (p, q) = (&a + &c, &b + &d);
        if position.bit(i) {
            a = p;
            b = q;
        } else {
            c = p;
            d = q;
        }
    }
    Rat::new(a + c, b + d)
}

fn unit_index_of(q: &Rat) -> BigUint {
    if q.is_zero() {
        return BigUint::zero();
    }
    if q == &Rat::one() {
        return BigUint::one();
    }
    // continued-fraction walk from 1/2: [0; a1, ..., an] turns into runs
    // L^(a1-1) R^(a2) L^(a3) ... with the last run shortened by one
    let mut runs = Vec::new();
    let (mut n, mut d) = (q.numer().clone(), q.denom().clone());
    let mut right = false;
    while !n.is_zero() {
        let (quot, rem) = d.div_rem(&n);
        let mut len = quot.to_u64().expect("partial quotient fits u64");
        if rem.is_zero() {
            len -= 1;
        }
        runs.push((right, len));
        right = !right;
        d = n;
        n = rem;
    }
    // runs[0] counts turns from the virtual root 1/1; drop the step onto 1/2
    runs[0].1 -= 1;
    let level = 1 + runs.iter().map(|r| r.1).sum::<u64>();
    let runs: Vec<_> = runs.into_iter().filter(|r| r.1 > 0).collect();
    SbNode { value: q.clone(), level, runs }.index()
}

/// Shallowest Stern–Brocot node strictly between `x` and `y` (`0 <= x < y <= 1`).
fn simplest_between(x: &Rat, y: &Rat, level_cap: u64) -> Option<SbNode> {
    let (xn, xd) = (x.numer(), x.denom());
    let (yn, yd) = (y.numer(), y.denom());
    // bounds a/b < node < c/d
    let (mut a, mut b, mut c, mut d) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::one());
    let mut level: u64 = 1;
    let mut runs: Vec<(bool, u64)> = Vec::new();
    loop {
        if level > level_cap {
            return None;
        }
        let (p, q) = (&a + &c, &b + &d);
        // p/q <= x  <=>  p*xd <= xn*q
        if &p * xd <= xn * &q {
            // go right while (a + k c)/(b + k d) <= x:  k <= (xn b - xd a) / (xd c - xn d)
            let num = xn * &b - xd * &a;
            let den = xd * &c - xn * &d;
            let k = num.div_floor(&den);
            let k = k.to_u64().unwrap_or(u64::MAX).max(1);
            a += &c * BigInt::from(k);
            b += &d * BigInt::from(k);
            push_run(&mut runs, true, k);
            level = level.saturating_add(k);
        } else if &p * yd >= yn * &q {
            // go left while (c + k a)/(d + k b) >= y:  k <= (yd c - yn d) / (yn b - yd a)
            let num = yd * &c - yn * &d;
            let den = yn * &b - yd * &a;
            let k = num.div_floor(&den);
            let k = k.to_u64().unwrap_or(u64::MAX).max(1);
            c += &a * BigInt::from(k);
            d += &b * BigInt::from(k);
            push_run(&mut runs, false, k);
            level = level.saturating_add(k);
        } else {
            return Some(SbNode { value: Rat::new(p, q), level, runs });
        }
    }
}

fn push_run(runs: &mut Vec<(bool, u64)>, right: bool, len: u64) {
    match runs.last_mut() {
        Some((r, l)) if *r == right => *l += len,
        _ => runs.push((right, len)),
    }
}
