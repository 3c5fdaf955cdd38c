//! The `p` in all ℓ^p-type quantities, and the norm itself.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExponentError {
    #[error("exponent p must lie in [1, inf], got {0}")]
    OutOfRange(f64),
    #[error("cannot parse exponent `{0}` (expected a number >= 1 or `inf`)")]
    Parse(String),
}

/// An exponent `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self, ExponentError> {
        if p >= 1.0 {
            Ok(Exponent(p))
        } else {
            Err(ExponentError::OutOfRange(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = ExponentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Exponent::INFINITY);
        }
        let p: f64 = s.parse().map_err(|_| ExponentError::Parse(s.to_string()))?;
        Exponent::new(p)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let p = deserializer.deserialize_any(ExtendedRealVisitor)?;
        Exponent::new(p).map_err(de::Error::custom)
    }
}

/// Visitor accepting a JSON number or the string `"inf"`.
pub(crate) struct ExtendedRealVisitor;

impl Visitor<'_> for ExtendedRealVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a number or the string \"inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        if v.eq_ignore_ascii_case("inf") || v.eq_ignore_ascii_case("infinity") {
            Ok(f64::INFINITY)
        } else {
            Err(E::custom(format!("expected \"inf\", got \"{v}\"")))
        }
    }
}

/// ℓ^p norm of a vector given by its entries.
pub fn lp_norm<I: IntoIterator<Item = f64>>(values: I, p: Exponent) -> f64 {
    let values = values.into_iter().map(f64::abs);
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else if p.0 == 1.0 {
        values.sum()
    } else if p.0 == 2.0 {
        values.map(|x| x * x).sum::<f64>().sqrt()
    } else {
        values.map(|x| x.powf(p.0)).sum::<f64>().powf(1.0 / p.0)
    }
}

/// ℓ^p distance between two equally long vectors.
pub fn lp_distance(a: &[f64], b: &[f64], p: Exponent) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    lp_norm(a.iter().zip(b).map(|(x, y)| x - y), p)
}
