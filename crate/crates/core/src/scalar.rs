//! Scalar types usable as vector coefficients.
//!
//! Orbit and conjugacy arithmetic is generic over [`Scalar`], so the same code
//! path runs exactly over [`BigRational`] and approximately over `f64`/`f32`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialEq + Signed + Send + Sync + 'static {
    /// Whether arithmetic in this type is exact.
    const EXACT: bool;

    fn from_f64(x: f64) -> Option<Self>;
    fn from_ratio(r: &BigRational) -> Option<Self>;
    fn to_f64(&self) -> f64;
    fn to_ratio(&self) -> Option<BigRational>;

    /// Text form used in JSON documents.
    fn encode(&self) -> String;
    fn decode(text: &str) -> Option<Self>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn from_ratio(r: &BigRational) -> Option<Self> {
        ratio_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_ratio(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
    fn encode(&self) -> String {
        format!("{self:?}")
    }
    fn decode(text: &str) -> Option<Self> {
        text.parse().ok()
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Option<Self> {
        let y = x as f32;
        y.is_finite().then_some(y)
    }
    fn from_ratio(r: &BigRational) -> Option<Self> {
        ratio_to_f64(r).and_then(<f32 as Scalar>::from_f64)
    }
    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
    fn to_ratio(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
    fn encode(&self) -> String {
        format!("{self:?}")
    }
    fn decode(text: &str) -> Option<Self> {
        text.parse().ok()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn from_ratio(r: &BigRational) -> Option<Self> {
        Some(r.clone())
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self).unwrap_or(if self.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        })
    }
    fn to_ratio(&self) -> Option<BigRational> {
        Some(self.clone())
    }
    fn encode(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
    fn decode(text: &str) -> Option<Self> {
        parse_ratio(text)
    }
}

/// Parses `n`, `n/d` or a terminating decimal such as `-1.25` exactly.
pub fn parse_ratio(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// Converts a big rational to the nearest `f64`, working through logarithms
/// when numerator or denominator overflow.
pub fn ratio_to_f64(r: &BigRational) -> Option<f64> {
    if r.is_zero() {
        return Some(0.0);
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return Some(n / d);
        }
    }
    let l = ln_abs_ratio(r);
    let v = l.exp();
    v.is_finite()
        .then_some(if r.is_negative() { -v } else { v })
}

/// Natural log of |r| for nonzero r, robust for very large numerators/denominators.
pub fn ln_abs_ratio(r: &BigRational) -> f64 {
    ln_abs_bigint(r.numer()) - ln_abs_bigint(r.denom())
}

pub fn ln_abs_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}
