//! Exact rationals.
//!
//! [`Rat`] is the only number type the engine uses. Values are always kept in
//! lowest terms with a positive denominator, so structural equality is value
//! equality and `Ord` is the exact order on the rationals.
//!
//! The wire form is `"num/den"` in lowest terms with an optional leading `-`
//! (`"-3/7"`, `"2/1"`, `"0/1"`). Parsing is strict: anything that is not already
//! normalized is rejected.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRatError {
    #[error("expected \"num/den\", got {0:?}")]
    Syntax(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("{0:?} is not in lowest terms")]
    NotNormalized(String),
}

/// An exact rational number in lowest terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rat {
        let den = den.into();
        assert!(!den.is_zero(), "zero denominator");
        Rat(BigRational::new(num.into(), den))
    }

    pub fn from_int(n: i64) -> Rat {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Rat {
        Rat(BigRational::zero())
    }

    pub fn one() -> Rat {
        Rat(BigRational::one())
    }

    pub fn from_big(r: BigRational) -> Rat {
        Rat(r)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Always positive.
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn midpoint(&self, other: &Rat) -> Rat {
        Rat((&self.0 + &other.0) / BigInt::from(2))
    }

    /// The mediant `(p + r) / (q + s)` of `p/q` and `r/s` (both in lowest terms).
    /// Strictly between the two when they differ.
    pub fn mediant(&self, other: &Rat) -> Rat {
        Rat::new(self.numer() + other.numer(), self.denom() + other.denom())
    }

    /// `2^-k`.
    pub fn pow2_inv(k: u32) -> Rat {
        Rat(BigRational::new(BigInt::one(), BigInt::one() << k))
    }

    /// `self^k` for a non-negative exponent.
    pub fn pow(&self, k: u32) -> Rat {
        Rat(num_traits::pow::pow(self.0.clone(), k as usize))
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.0.to_f64()
    }

    /// Rough size in bits of numerator plus denominator.
    pub fn bits(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }
}

/// Exact three-way comparison.
pub fn rat_cmp(x: &Rat, y: &Rat) -> std::cmp::Ordering {
    x.cmp(y)
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    fn from_str(s: &str) -> Result<Rat, ParseRatError> {
        let syntax = || ParseRatError::Syntax(s.to_string());
        let (num, den) = s.split_once('/').ok_or_else(syntax)?;
        let (negative, digits) = match num.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, num),
        };
        let all_digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(digits) || !all_digits(den) {
            return Err(syntax());
        }
        // leading zeros would make the textual form non-canonical
        let canonical = |t: &str| t == "0" || !t.starts_with('0');
        if !canonical(digits) || !canonical(den) {
            return Err(ParseRatError::NotNormalized(s.to_string()));
        }
        let n: BigUint = digits.parse().map_err(|_| syntax())?;
        let d: BigUint = den.parse().map_err(|_| syntax())?;
        if d.is_zero() {
            return Err(ParseRatError::ZeroDenominator(s.to_string()));
        }
        if !n.gcd(&d).is_one() || (negative && n.is_zero()) {
            return Err(ParseRatError::NotNormalized(s.to_string()));
        }
        let sign = if negative { Sign::Minus } else { Sign::Plus };
        Ok(Rat(BigRational::new_raw(
            BigInt::from_biguint(sign, n),
            BigInt::from_biguint(Sign::Plus, d),
        )))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::from_int(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat($trait::$method(self.0, &rhs.0))
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat($trait::$method(&self.0, rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

/// Shorthand for building rationals in code and tests: `rat(3, 4)`.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num, den)
}
