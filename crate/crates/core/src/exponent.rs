use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Summability exponent of a step space: the `c0` case or a finite `p ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    C0,
    Finite(f64),
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::Domain(format!("exponent p = {p} must satisfy p >= 1")))
        }
    }

    /// Integer value of a finite exponent, for exact rational arithmetic.
    pub fn integer(self) -> Option<u32> {
        match self {
            Exponent::Finite(p) if p.fract() == 0.0 && p <= u32::MAX as f64 => Some(p as u32),
            _ => None,
        }
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Exponent::C0 => Ok(self),
            Exponent::Finite(p) => Exponent::finite(p),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::C0 => write!(f, "0"),
            Exponent::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let p: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("invalid exponent `{s}`")))?;
        if p == 0.0 {
            Ok(Exponent::C0)
        } else {
            Exponent::finite(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_means_c0() {
        assert_eq!("0".parse::<Exponent>().unwrap(), Exponent::C0);
        assert_eq!("2".parse::<Exponent>().unwrap().integer(), Some(2));
        assert!("0.5".parse::<Exponent>().is_err());
        assert_eq!(Exponent::Finite(1.5).integer(), None);
    }
}
