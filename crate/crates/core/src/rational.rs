//! Exact rationals and the extended rationals `Q ∪ {+∞}`.
//!
//! Rationals travel through JSON as `"p/q"` strings so no precision is lost.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| format!("`{s}` is not a rational of the form p/q"))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| format!("`{s}` is not a rational of the form p/q"))?;
    if den.is_zero() {
        return Err(format!("`{s}` has a zero denominator"));
    }
    Ok(Rational::new(num, den))
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// A nonnegative quantity that may be `+∞` (e.g. the threshold of a bounded function).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(Rational),
    Infinity,
}

impl ExtRational {
    pub fn zero() -> Self {
        ExtRational::Finite(Rational::zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinity)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinity => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRational::Finite(r) => to_f64(r),
            ExtRational::Infinity => f64::INFINITY,
        }
    }

    /// `1/x` with `1/0 = +∞` and `1/∞ = 0`.
    pub fn recip(&self) -> Self {
        match self {
            ExtRational::Finite(r) if r.is_zero() => ExtRational::Infinity,
            ExtRational::Finite(r) => ExtRational::Finite(r.recip()),
            ExtRational::Infinity => ExtRational::zero(),
        }
    }

    /// Multiplication by a positive rational.
    pub fn scale(&self, c: &Rational) -> Self {
        match self {
            ExtRational::Finite(r) => ExtRational::Finite(r * c),
            ExtRational::Infinity => ExtRational::Infinity,
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(ExtRational::Infinity),
            other => parse_rational(other).map(ExtRational::Finite),
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(r: Rational) -> Self {
        ExtRational::Finite(r)
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.cmp(b),
            (ExtRational::Finite(_), ExtRational::Infinity) => Ordering::Less,
            (ExtRational::Infinity, ExtRational::Finite(_)) => Ordering::Greater,
            (ExtRational::Infinity, ExtRational::Infinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(r) => write!(f, "{}", format_rational(r)),
            ExtRational::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ExtRational::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    use num_integer::Integer;
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}
