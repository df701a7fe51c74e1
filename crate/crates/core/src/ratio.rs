//! Exact rational scalars and their serialized `"p/q"` form.
//!
//! Every quantity on the exact path (weights, breakpoints, times, atom
//! positions, …) is a [`Q`], an arbitrary-precision rational.  Floating-point
//! values appear only in explicitly approximate outputs (spectral estimates,
//! resolvent values, probe gaps) and are formatted with 17 significant digits
//! so that round-tripping through text is lossless.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact rational scalar used throughout the exact computation path.
pub type Q = BigRational;

/// Builds a rational from an integer numerator and denominator.
///
/// Panics if `den == 0`; intended for literals in code and tests.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Builds a rational from an integer.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses a rational from `"p/q"`, an integer literal, or a finite decimal
/// (`"0.25"`), all interpreted exactly.
pub fn parse_ratio(text: &str) -> Result<Q, Error> {
    let s = text.trim();
    let bad = || Error::ParseRatio { text: text.to_string() };
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let sign = if whole.trim_start().starts_with('-') { -1 } else { 1 };
        let w: BigInt = whole.trim().parse().map_err(|_| bad())?;
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = Q::new(digits, scale);
        let whole_part = Q::from_integer(w);
        return Ok(if sign < 0 { whole_part - frac_part } else { whole_part + frac_part });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

/// Formats a rational as `"p/q"` (denominator always present, in lowest terms).
pub fn format_ratio(value: &Q) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Converts a rational to the nearest `f64`.
pub fn to_f64(value: &Q) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Formats a float with 17 significant digits (lossless for `f64`).
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Splits a nonnegative time into its integer part (number of completed unit
/// laps) and fractional remainder in `[0, 1)`.
pub fn split_time(t: &Q) -> Result<(usize, Q), Error> {
    if t.is_negative() {
        return Err(Error::NegativeTime { t: format_ratio(t) });
    }
    let floor = t.floor();
    let n = floor
        .to_integer()
        .to_usize()
        .ok_or_else(|| Error::TimeTooLarge { t: format_ratio(t) })?;
    Ok((n, t - floor))
}

/// Serde adapter serializing a [`Q`] as a `"p/q"` string.
pub mod ratio_serde {
    use super::{format_ratio, parse_ratio, Q};
    use serde::{de, Deserialize, Deserializer, Serializer};

    /// Serializes `value` as `"p/q"`.
    pub fn serialize<S: Serializer>(value: &Q, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&format_ratio(value))
    }

    /// Deserializes a `"p/q"` string.
    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Q, D::Error> {
        let s = String::deserialize(de)?;
        parse_ratio(&s).map_err(de::Error::custom)
    }
}

/// Serde adapter for `Option<Q>` as an optional `"p/q"` string.
pub mod ratio_serde_opt {
    use super::{format_ratio, parse_ratio, Q};
    use serde::{de, Deserialize, Deserializer, Serializer};

    /// Serializes `value` as `"p/q"` or `null`.
    pub fn serialize<S: Serializer>(value: &Option<Q>, ser: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => ser.serialize_some(&format_ratio(v)),
            None => ser.serialize_none(),
        }
    }

    /// Deserializes an optional `"p/q"` string.
    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Q>, D::Error> {
        let s: Option<String> = Option::deserialize(de)?;
        s.map(|s| parse_ratio(&s).map_err(de::Error::custom)).transpose()
    }
}

/// Serde adapter for `Vec<Q>` as a list of `"p/q"` strings.
pub mod ratio_serde_vec {
    use super::{format_ratio, parse_ratio, Q};
    use serde::{de, Deserialize, Deserializer, Serializer};

    /// Serializes each element as `"p/q"`.
    pub fn serialize<S: Serializer>(values: &[Q], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(values.iter().map(format_ratio))
    }

    /// Deserializes a list of `"p/q"` strings.
    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Q>, D::Error> {
        let strings: Vec<String> = Vec::deserialize(de)?;
        strings.iter().map(|s| parse_ratio(s).map_err(de::Error::custom)).collect()
    }
}
