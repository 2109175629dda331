//! Exact rational satisfaction values.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An exact rational number.
///
/// Satisfaction values and proposition weights live in `[-1, 1]`, but
/// intermediate results of interpreted functions (sums, slot indices, ...)
/// may leave that interval, so the type itself is unrestricted.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Value(Ratio<i128>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValueParseError {
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Value {
    pub const ONE: Value = Value(Ratio::new_raw(1, 1));
    pub const ZERO: Value = Value(Ratio::new_raw(0, 1));
    pub const MINUS_ONE: Value = Value(Ratio::new_raw(-1, 1));

    /// Builds `num/den` in lowest terms. Panics on a zero denominator.
    pub fn new(num: i128, den: i128) -> Self {
        Value(Ratio::new(num, den))
    }

    pub fn int(n: i128) -> Self {
        Value(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    /// Always positive.
    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        Value(self.0.abs())
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Truncated integer part.
    pub fn trunc_int(&self) -> i128 {
        self.0.to_integer()
    }

    pub fn floor(&self) -> Self {
        Value(self.0.floor())
    }

    /// `true` iff `-1 <= self <= 1`.
    pub fn in_unit_interval(&self) -> bool {
        value_in_unit_interval(*self)
    }

    pub fn checked_div(&self, other: &Value) -> Option<Value> {
        if other.is_zero() {
            None
        } else {
            Some(Value(self.0 / other.0))
        }
    }

    /// Crisp truth: `1` if `b`, `-1` otherwise.
    pub fn from_bool(b: bool) -> Self {
        if b {
            Value::ONE
        } else {
            Value::MINUS_ONE
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

pub fn value_in_unit_interval(v: Value) -> bool {
    v >= Value::MINUS_ONE && v <= Value::ONE
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Value {
    type Err = ValueParseError;

    /// Accepts integers, `p/q` fractions and decimals (`-0.25`), all converted
    /// exactly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let bad = || ValueParseError::Invalid(s.to_string());
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let digits = |d: &str| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit());
        let v = if let Some((n, d)) = body.split_once('/') {
            if !digits(n) || !digits(d) {
                return Err(bad());
            }
            let n: i128 = n.parse().map_err(|_| bad())?;
            let d: i128 = d.parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(ValueParseError::ZeroDenominator(s.to_string()));
            }
            Value::new(n, d)
        } else if let Some((int, frac)) = body.split_once('.') {
            if !(digits(int) || int.is_empty()) || !digits(frac) || frac.len() > 30 {
                return Err(bad());
            }
            let int: i128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let scale = 10i128.pow(frac.len() as u32);
            let frac: i128 = frac.parse().map_err(|_| bad())?;
            Value::new(int * scale + frac, scale)
        } else {
            if !digits(body) {
                return Err(bad());
            }
            Value::int(body.parse().map_err(|_| bad())?)
        };
        Ok(if neg { -v } else { v })
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(i) => Ok(Value::int(i as i128)),
            // Shortest round-trip decimal form, then exact conversion.
            Raw::Float(x) => format!("{x}").parse().map_err(serde::de::Error::custom),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Value {
            type Output = Value;
            fn $m(self, rhs: Value) -> Value {
                Value(self.0 $op rhs.0)
            }
        }
    };
}
binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Div for Value {
    type Output = Value;
    /// Panics on division by zero; use [`Value::checked_div`] on untrusted input.
    fn div(self, rhs: Value) -> Value {
        Value(self.0 / rhs.0)
    }
}

impl Neg for Value {
    type Output = Value;
    fn neg(self) -> Value {
        Value(-self.0)
    }
}

impl std::iter::Sum for Value {
    fn sum<I: Iterator<Item = Value>>(iter: I) -> Value {
        iter.fold(Value::ZERO, |a, b| a + b)
    }
}

impl From<i128> for Value {
    fn from(n: i128) -> Self {
        Value::int(n)
    }
}

/// Rounds `x` to the nearest multiple of `inc` inside `[0, 1]`; exact halves
/// round toward zero. `inc` must be positive.
pub fn snap_to_grid(x: Value, inc: Value) -> Value {
    debug_assert!(inc > Value::ZERO);
    let clamped = x.max(Value::ZERO).min(Value::ONE);
    let steps = clamped / inc;
    let lower = steps.floor();
    let rem = steps - lower;
    let half = Value::new(1, 2);
    let chosen = if rem > half { lower + Value::ONE } else { lower };
    let snapped = chosen * inc;
    if snapped > Value::ONE {
        // 1 is off-grid when 1/inc is not integral; fall back to the top grid point.
        (Value::ONE / inc).floor() * inc
    } else {
        snapped
    }
}

impl One for Value {
    fn one() -> Self {
        Value::ONE
    }
}

impl Zero for Value {
    fn zero() -> Self {
        Value::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}
