use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finitely supported coefficient vector `Σ x_j e_j`, indices `j ≥ 1`.
///
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedVector<S: Scalar> {
    entries: BTreeMap<usize, S>,
}

impl<S: Scalar> Default for TruncatedVector<S> {
    fn default() -> Self {
        TruncatedVector { entries: BTreeMap::new() }
    }
}

impl<S: Scalar> TruncatedVector<S> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit vector `e_j`.
    pub fn basis(j: usize) -> Result<Self> {
        let mut v = Self::zero();
        v.set(j, S::one())?;
        Ok(v)
    }

    pub fn from_entries<I: IntoIterator<Item = (usize, S)>>(entries: I) -> Result<Self> {
        let mut v = Self::zero();
        for (j, x) in entries {
            let cur = v.get(j);
            v.set(j, cur + x)?;
        }
        Ok(v)
    }

    pub fn get(&self, j: usize) -> S {
        self.entries.get(&j).cloned().unwrap_or_else(S::zero)
    }

    pub fn set(&mut self, j: usize, x: S) -> Result<()> {
        if j == 0 {
            return Err(Error::Domain("vector indices start at 1".into()));
        }
        if x.is_zero() {
            self.entries.remove(&j);
        } else {
            self.entries.insert(j, x);
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &S)> {
        self.entries.iter().map(|(j, x)| (*j, x))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest index carrying a nonzero entry (0 for the zero vector).
    pub fn support_end(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, x) in other.iter() {
            let s = out.get(j) + x.clone();
            // indices come from valid vectors, so `set` cannot fail
            let _ = out.set(j, s);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero();
        for (j, x) in self.iter() {
            let _ = out.set(j, x.clone() * c.clone());
        }
        out
    }

    /// Sum of absolute values of the coefficients.
    pub fn l1(&self) -> S {
        self.entries.values().fold(S::zero(), |acc, x| acc + x.abs())
    }

    /// Plain backward shift `B`: `e_1 ↦ 0`, `e_j ↦ e_{j-1}`.
    pub fn backward_shift(&self) -> Self {
        self.backward_shift_by(1)
    }

    pub fn backward_shift_by(&self, n: usize) -> Self {
        TruncatedVector {
            entries: self
                .entries
                .iter()
                .filter(|(j, _)| **j > n)
                .map(|(j, x)| (j - n, x.clone()))
                .collect(),
        }
    }

    /// Forward shift `S^n`: `e_j ↦ e_{j+n}`, a right inverse of `B^n`.
    pub fn forward_shift_by(&self, n: usize) -> Self {
        TruncatedVector {
            entries: self.entries.iter().map(|(j, x)| (j + n, x.clone())).collect(),
        }
    }

    pub fn map_scalar<T: Scalar>(&self) -> Result<TruncatedVector<T>> {
        let mut out = TruncatedVector::zero();
        for (j, x) in self.iter() {
            let y = match x.to_ratio() {
                Some(r) if T::EXACT => T::from_ratio(&r),
                _ => T::from_f64(x.to_f64()),
            }
            .ok_or_else(|| Error::NotExact(format!("coefficient {x:?}")))?;
            out.set(j, y)?;
        }
        Ok(out)
    }
}

impl<S: Scalar> Serialize for TruncatedVector<S> {
    fn serialize<Z: Serializer>(&self, ser: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let pairs: Vec<(usize, String)> = self.iter().map(|(j, x)| (j, x.encode())).collect();
        pairs.serialize(ser)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for TruncatedVector<S> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(usize, String)> = Vec::deserialize(de)?;
        let mut out = TruncatedVector::zero();
        for (j, text) in pairs {
            let x = S::decode(&text).ok_or_else(|| D::Error::custom(format!("bad scalar `{text}`")))?;
            out.set(j, x).map_err(D::Error::custom)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn zeros_are_not_stored() {
        let v = TruncatedVector::from_entries([(2, q(1)), (2, q(-1)), (3, q(4))]).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.get(2), q(0));
        assert!(TruncatedVector::<Q>::basis(0).is_err());
    }

    #[test]
    fn shifts() {
        let v = TruncatedVector::from_entries([(1, q(5)), (3, q(2))]).unwrap();
        let b = v.backward_shift();
        assert_eq!(b, TruncatedVector::from_entries([(2, q(2))]).unwrap());
        assert_eq!(v.forward_shift_by(2).backward_shift_by(2), v);
    }

    #[test]
    fn json_roundtrip() {
        let v = TruncatedVector::from_entries([(1, Q::new(1.into(), 3.into())), (7, q(-2))]).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[[1,"1/3"],[7,"-2"]]"#);
        let back: TruncatedVector<Q> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
