use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A non-negative exact rational, always kept in lowest terms.
///
/// Serialized as `{num, den, decimal}`; `decimal` is for human readers only.
/// Deserializes from that object, from a decimal number, or from a
/// `"num/den"` / `"0.75"` string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(Ratio<u64>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FractionError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("`{0}` is not a non-negative decimal or fraction")]
    Malformed(String),
}

impl Fraction {
    pub const ZERO: Fraction = Fraction(Ratio::new_raw(0, 1));
    pub const ONE: Fraction = Fraction(Ratio::new_raw(1, 1));

    pub fn new(num: u64, den: u64) -> Result<Self, FractionError> {
        if den == 0 {
            return Err(FractionError::ZeroDenominator);
        }
        Ok(Fraction(Ratio::new(num, den)))
    }

    /// `num / den` for sizes where `den` is known to be positive.
    pub(crate) fn of(num: usize, den: usize) -> Self {
        debug_assert!(den > 0);
        Fraction(Ratio::new(num as u64, den as u64))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }

    pub fn is_unit_interval(&self) -> bool {
        self.numer() <= self.denom()
    }

    /// Exact weighted mean `w·a + (1 − w)·b`; `w` is clamped to [0, 1].
    pub fn blend(weight: Fraction, a: Fraction, b: Fraction) -> Fraction {
        let one = Ratio::from_integer(1u64);
        let w = weight.0.min(one);
        Fraction(w * a.0 + (one - w) * b.0)
    }

    /// Arithmetic mean of `values`; zero for an empty input.
    pub fn mean(values: &[Fraction]) -> Fraction {
        if values.is_empty() {
            return Fraction::ZERO;
        }
        let sum = values
            .iter()
            .fold(Ratio::from_integer(0u64), |acc, v| acc + v.0);
        Fraction(sum / Ratio::from_integer(values.len() as u64))
    }

    /// Parses `"3/5"`, `"0.6"`, `"1"`.
    pub fn parse(text: &str) -> Result<Self, FractionError> {
        let text = text.trim();
        let malformed = || FractionError::Malformed(text.to_string());
        if let Some((n, d)) = text.split_once('/') {
            let n: u64 = n.trim().parse().map_err(|_| malformed())?;
            let d: u64 = d.trim().parse().map_err(|_| malformed())?;
            return Fraction::new(n, d);
        }
        let (int, frac) = text.split_once('.').unwrap_or((text, ""));
        let digits_ok = |s: &str| s.chars().all(|c| c.is_ascii_digit());
        if (int.is_empty() && frac.is_empty())
            || !digits_ok(int)
            || !digits_ok(frac)
            || frac.len() > 18
        {
            return Err(malformed());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| malformed())?
        };
        let frac_val: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| malformed())?
        };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(malformed)?;
        Fraction::new(num, den)
    }

    /// Exact value of the shortest decimal rendering of `value`.
    pub fn from_decimal(value: f64) -> Result<Self, FractionError> {
        if !value.is_finite() || value < 0.0 {
            return Err(FractionError::Malformed(value.to_string()));
        }
        Fraction::parse(&value.to_string())
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Fraction {
    type Err = FractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Fraction::parse(s)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Fraction", 3)?;
        s.serialize_field("num", &self.numer())?;
        s.serialize_field("den", &self.denom())?;
        s.serialize_field("decimal", &self.to_f64())?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Parts { num: u64, den: u64 },
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Parts { num, den } => Fraction::new(num, den),
            Repr::Number(v) => Fraction::from_decimal(v),
            Repr::Text(t) => Fraction::parse(&t),
        }
        .map_err(D::Error::custom)
    }
}
