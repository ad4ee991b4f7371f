//! Exact finite-precision decimals in `[0, 1]`.
//!
//! A [`Valuation`] is stored as a scaled integer `mantissa × 10^(-precision)`
//! in canonical form: the mantissa carries no trailing zero unless the
//! precision is already 1. Canonical forms make structural equality coincide
//! with numeric equality, so `=_p` checks and grid membership stay exact.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest precision a valuation may carry. `10^18` still fits in a `u64`.
pub const MAX_PRECISION: u32 = 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuationError {
    #[error("invalid decimal literal `{0}`")]
    Syntax(String),
    #[error("decimal `{0}` exceeds the maximum precision of {MAX_PRECISION} digits")]
    TooPrecise(String),
    #[error("value is outside the unit interval")]
    OutOfRange,
    #[error("precision must be between 1 and {MAX_PRECISION}, got {0}")]
    BadPrecision(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Valuation {
    mantissa: u64,
    precision: u32,
}

fn pow10(exp: u32) -> u64 {
    10u64.pow(exp)
}

fn check_precision(p: u32) -> Result<(), ValuationError> {
    if (1..=MAX_PRECISION).contains(&p) {
        Ok(())
    } else {
        Err(ValuationError::BadPrecision(p))
    }
}

impl Valuation {
    pub const ZERO: Valuation = Valuation { mantissa: 0, precision: 1 };
    pub const ONE: Valuation = Valuation { mantissa: 10, precision: 1 };

    /// Builds `mantissa × 10^(-precision)` and canonicalizes it.
    pub fn new(mantissa: u64, precision: u32) -> Result<Self, ValuationError> {
        check_precision(precision)?;
        if mantissa > pow10(precision) {
            return Err(ValuationError::OutOfRange);
        }
        Ok(Self::canonical(mantissa, precision))
    }

    fn canonical(mut mantissa: u64, mut precision: u32) -> Self {
        while precision > 1 && mantissa.is_multiple_of(10) {
            mantissa /= 10;
            precision -= 1;
        }
        Valuation { mantissa, precision }
    }

    /// `10^(-p)`, the smallest positive point of the precision-`p` grid.
    pub fn unit(p: u32) -> Result<Self, ValuationError> {
        Self::new(1, p)
    }

    /// The `index`-th point of the precision-`p` grid, `index × 10^(-p)`.
    pub fn grid_point(index: u64, p: u32) -> Result<Self, ValuationError> {
        Self::new(index, p)
    }

    pub fn mantissa(&self) -> u64 {
        self.mantissa
    }

    /// Digits of the shortest exact decimal representation (at least 1).
    pub fn prec(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    pub fn is_one(&self) -> bool {
        *self == Self::ONE
    }

    /// Mantissa rescaled to `p` digits. Only valid for `p >= self.prec()`.
    fn scaled(&self, p: u32) -> u128 {
        debug_assert!(p >= self.precision);
        self.mantissa as u128 * 10u128.pow(p - self.precision)
    }

    /// Floor toward zero at `p` digits.
    pub fn truncate(&self, p: u32) -> Valuation {
        if p >= self.precision {
            *self
        } else {
            Self::canonical(self.mantissa / pow10(self.precision - p), p)
        }
    }

    /// Index of `truncate(p)` inside the precision-`p` grid.
    pub fn grid_index(&self, p: u32) -> u64 {
        let t = self.truncate(p);
        t.mantissa * pow10(p - t.precision)
    }

    /// `1 - self`.
    pub fn complement(&self) -> Valuation {
        Self::canonical(pow10(self.precision) - self.mantissa, self.precision)
    }

    /// `self + 10^(-p)`, or `None` when that would leave the unit interval.
    pub fn step_up(&self, p: u32) -> Option<Valuation> {
        if check_precision(p).is_err() {
            return None;
        }
        let q = p.max(self.precision);
        let m = self.scaled(q) + 10u128.pow(q - p);
        if m > 10u128.pow(q) {
            None
        } else {
            Some(Self::canonical(m as u64, q))
        }
    }
}

/// `a =_p b`: both truncate to the same `p`-digit value.
pub fn eq_p(a: Valuation, b: Valuation, p: u32) -> bool {
    a.truncate(p) == b.truncate(p)
}

/// All points `i × 10^(-p)` for `0 <= i <= 10^p`, ascending.
pub fn grid(p: u32) -> Result<Vec<Valuation>, ValuationError> {
    check_precision(p)?;
    Ok((0..=pow10(p)).map(|i| Valuation::canonical(i, p)).collect())
}

/// The positive part of the grid, `(0, 1]_p`.
pub fn positive_grid(p: u32) -> Result<Vec<Valuation>, ValuationError> {
    let mut g = grid(p)?;
    g.remove(0);
    Ok(g)
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        let p = self.precision.max(other.precision);
        self.scaled(p).cmp(&other.scaled(p))
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            f.write_str("0")
        } else if self.is_one() {
            f.write_str("1")
        } else {
            write!(f, "0.{:0width$}", self.mantissa, width = self.precision as usize)
        }
    }
}

impl FromStr for Valuation {
    type Err = ValuationError;

    /// Accepts `0`, `1`, `1.0…0` and `0.D+`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || ValuationError::Syntax(s.to_string());
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (s, None),
        };
        let frac = match frac {
            Some(f) if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) => {
                return Err(syntax())
            }
            Some(f) => f,
            None => "0",
        };
        match int {
            "1" => {
                if frac.bytes().all(|b| b == b'0') {
                    Ok(Valuation::ONE)
                } else {
                    Err(ValuationError::OutOfRange)
                }
            }
            "0" => {
                let digits = frac.trim_end_matches('0');
                if digits.is_empty() {
                    return Ok(Valuation::ZERO);
                }
                let p = digits.len() as u32;
                if p > MAX_PRECISION {
                    return Err(ValuationError::TooPrecise(s.to_string()));
                }
                let m = digits.parse::<u64>().map_err(|_| syntax())?;
                Ok(Valuation::canonical(m, p))
            }
            _ => Err(syntax()),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
