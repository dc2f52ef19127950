use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural logarithm of a strictly positive weight, or `+∞` for a forbidden
/// coordinate (weight `v = ∞`).
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LogWeight(f64);

impl LogWeight {
    pub const ONE: LogWeight = LogWeight(0.0);
    pub const FORBIDDEN: LogWeight = LogWeight(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value == f64::NEG_INFINITY {
            return Err(Error::Domain(format!("log-weight {value} is not a positive weight")));
        }
        Ok(LogWeight(value))
    }

    /// From a plain weight value `v ∈ (0, ∞]`.
    pub fn from_weight(v: f64) -> Result<Self> {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("weight {v} is not strictly positive")));
        }
        Ok(LogWeight(v.ln()))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_forbidden(self) -> bool {
        self.0 == f64::INFINITY
    }

    /// The plain weight; may overflow to `∞` or underflow to `0` in `f64`.
    pub fn weight(self) -> f64 {
        self.0.exp()
    }
}

impl TryFrom<f64> for LogWeight {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        LogWeight::new(v)
    }
}

impl From<LogWeight> for f64 {
    fn from(w: LogWeight) -> f64 {
        w.0
    }
}

impl Add for LogWeight {
    type Output = LogWeight;
    fn add(self, rhs: LogWeight) -> LogWeight {
        LogWeight(self.0 + rhs.0)
    }
}

impl PartialOrd for LogWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.0.total_cmp(&other.0))
    }
}

impl fmt::Debug for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_forbidden() {
            write!(f, "LogWeight(+inf)")
        } else {
            write!(f, "LogWeight({})", self.0)
        }
    }
}

/// `log(Σ exp(x_i))` without overflow; `-∞` for an empty or all `-∞` input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Streaming accumulator for `log Σ exp(x_i)`.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        LogSum { max: f64::NEG_INFINITY, scaled: 0.0 }
    }
}

impl LogSum {
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x == f64::INFINITY || self.max == f64::INFINITY {
            self.max = f64::INFINITY;
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY || self.max == f64::INFINITY {
            self.max
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `log(e^a - e^b)` for `a > b`.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp()).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive() {
        assert!(LogWeight::new(f64::NEG_INFINITY).is_err());
        assert!(LogWeight::new(f64::NAN).is_err());
        assert!(LogWeight::from_weight(0.0).is_err());
        assert!(LogWeight::from_weight(f64::INFINITY).unwrap().is_forbidden());
    }

    #[test]
    fn sum_is_product_and_infinity_absorbs() {
        let a = LogWeight::from_weight(3.0).unwrap();
        let b = LogWeight::from_weight(0.25).unwrap();
        assert!(((a + b).weight() - 0.75).abs() < 1e-15);
        assert!((a + LogWeight::FORBIDDEN).is_forbidden());
    }

    #[test]
    fn streaming_log_sum_matches_batch() {
        let xs = [-3.0, 700.0, 710.0, -1e308, 0.5];
        let mut acc = LogSum::default();
        xs.iter().for_each(|&x| acc.push(x));
        assert!((acc.value() - log_sum_exp(xs)).abs() < 1e-12);
        assert!((log_sub_exp(2f64.ln(), 1f64.ln()) - 0.0).abs() < 1e-15);
    }
}
