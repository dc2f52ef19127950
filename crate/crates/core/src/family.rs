use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::hints::Hint;
use crate::scalar::Scalar;
use crate::vector::TruncatedVector;
use crate::verdict::{Certificate, Verdict, Window};
use crate::weight::{LogSum, LogWeight};

/// How indices of a family are laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexKind {
    Linear,
    Planar,
}

/// Anti-diagonal pairing `ℕ×ℕ → ℕ`: `(1,1) ↦ 1, (2,1) ↦ 2, (1,2) ↦ 3, …`.
pub fn pair(i: usize, j: usize) -> usize {
    debug_assert!(i >= 1 && j >= 1);
    let d = i + j - 1;
    d * (d - 1) / 2 + j
}

/// Inverse of [`pair`].
pub fn unpair(flat: usize) -> (usize, usize) {
    debug_assert!(flat >= 1);
    // largest d with d(d-1)/2 < flat
    let mut d = (((8 * flat) as f64).sqrt() as usize).div_ceil(2);
    while d * (d - 1) / 2 >= flat {
        d -= 1;
    }
    while (d + 1) * d / 2 < flat {
        d += 1;
    }
    let j = flat - d * (d - 1) / 2;
    (d + 1 - j, j)
}

pub type LogEval = dyn Fn(usize, usize, usize) -> f64 + Send + Sync;
/// Exact weight; `None` encodes a forbidden coordinate (`v = ∞`).
pub type ExactEval = dyn Fn(usize, usize, usize) -> Option<BigRational> + Send + Sync;

/// Weights `v^{(m,k)}_j ∈ (0, ∞]` over levels `m`, grades `k` and indices `j`.
///
/// Planar families receive flattened indices (see [`pair`]).
#[derive(Clone)]
pub struct WeightFamily {
    name: String,
    eval: Arc<LogEval>,
    exact: Option<Arc<ExactEval>>,
    hints: Vec<Hint>,
    index_kind: IndexKind,
    graded: bool,
    levels_hint: usize,
}

impl fmt::Debug for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFamily")
            .field("name", &self.name)
            .field("index_kind", &self.index_kind)
            .field("graded", &self.graded)
            .field("exact", &self.exact.is_some())
            .field("hints", &self.hints.iter().map(Hint::label).collect::<Vec<_>>())
            .finish()
    }
}

impl WeightFamily {
    /// Banach-step family on `ℕ` given by `log v^{(m)}_j`.
    pub fn linear<F>(name: impl Into<String>, log_eval: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Send + Sync + 'static,
    {
        WeightFamily {
            name: name.into(),
            eval: Arc::new(move |m, _k, j| log_eval(m, j)),
            exact: None,
            hints: Vec::new(),
            index_kind: IndexKind::Linear,
            graded: false,
            levels_hint: 8,
        }
    }

    /// General family given by `log v^{(m,k)}_j`.
    pub fn from_log_fn<F>(name: impl Into<String>, index_kind: IndexKind, graded: bool, log_eval: F) -> Self
    where
        F: Fn(usize, usize, usize) -> f64 + Send + Sync + 'static,
    {
        WeightFamily {
            name: name.into(),
            eval: Arc::new(log_eval),
            exact: None,
            hints: Vec::new(),
            index_kind,
            graded,
            levels_hint: 8,
        }
    }

    /// Attaches exact rational values; the log evaluator stays authoritative for scans.
    pub fn with_exact<F>(mut self, exact: F) -> Self
    where
        F: Fn(usize, usize, usize) -> Option<BigRational> + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn with_exact_arc(mut self, exact: Option<Arc<ExactEval>>) -> Self {
        self.exact = exact;
        self
    }

    pub fn with_hint(mut self, hint: Hint) -> Self {
        self.hints.push(hint);
        self
    }

    pub fn with_hints<I: IntoIterator<Item = Hint>>(mut self, hints: I) -> Self {
        self.hints.extend(hints);
        self
    }

    pub fn without_hints(mut self) -> Self {
        self.hints.clear();
        self
    }

    pub fn with_levels_hint(mut self, levels: usize) -> Self {
        self.levels_hint = levels.max(1);
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn hints(&self) -> &[Hint] {
        &self.hints
    }

    pub fn index_kind(&self) -> IndexKind {
        self.index_kind
    }

    pub fn is_graded(&self) -> bool {
        self.graded
    }

    pub fn levels_hint(&self) -> usize {
        self.levels_hint
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub(crate) fn log_eval_arc(&self) -> Arc<LogEval> {
        self.eval.clone()
    }

    pub(crate) fn exact_eval_arc(&self) -> Option<Arc<ExactEval>> {
        self.exact.clone()
    }

    fn grade(&self, k: usize) -> usize {
        if self.graded {
            k
        } else {
            1
        }
    }

    /// Unchecked `log v^{(m,k)}_j` for `m, k, j ≥ 1`.
    pub fn log_weight(&self, m: usize, k: usize, j: usize) -> f64 {
        (self.eval)(m, self.grade(k), j)
    }

    pub fn weight_at(&self, m: usize, k: usize, j: usize) -> Result<LogWeight> {
        if m == 0 || k == 0 || j == 0 {
            return Err(Error::Domain(format!("weight_at({m},{k},{j}): levels, grades and indices start at 1")));
        }
        LogWeight::new(self.log_weight(m, k, j))
            .map_err(|_| Error::Domain(format!("family `{}` is not positive at ({m},{k},{j})", self.name)))
    }

    /// Exact value, `Ok(None)` for a forbidden coordinate.
    pub fn exact_at(&self, m: usize, k: usize, j: usize) -> Result<Option<BigRational>> {
        if m == 0 || k == 0 || j == 0 {
            return Err(Error::Domain(format!("exact_at({m},{k},{j}): levels, grades and indices start at 1")));
        }
        let exact = self
            .exact
            .as_ref()
            .ok_or_else(|| Error::NotExact(format!("family `{}` has no exact form", self.name)))?;
        Ok(exact(m, self.grade(k), j))
    }

    /// Whether `x` avoids every forbidden coordinate at `(m, k)`.
    pub fn admits<S: Scalar>(&self, x: &TruncatedVector<S>, m: usize, k: usize) -> bool {
        x.support().all(|j| self.log_weight(m, k, j) < f64::INFINITY)
    }
}

/// Logarithm of the step seminorm `‖x‖_{p, v^{(m,k)}}`; `+∞` on forbidden support.
pub fn log_seminorm<S: Scalar>(x: &TruncatedVector<S>, f: &WeightFamily, m: usize, k: usize, p: Exponent) -> Result<f64> {
    let mut acc = LogSum::default();
    let mut sup = f64::NEG_INFINITY;
    for (j, xj) in x.iter() {
        let term = xj.to_f64().abs().ln() + f.weight_at(m, k, j)?.value();
        match p {
            Exponent::C0 => sup = sup.max(term),
            Exponent::Finite(p) => acc.push(p * term),
        }
    }
    Ok(match p {
        Exponent::C0 => sup,
        Exponent::Finite(p) => acc.value() / p,
    })
}

/// The step seminorm `‖x‖_{p, v^{(m,k)}}` as a float (`0` for `x = 0`).
pub fn seminorm<S: Scalar>(x: &TruncatedVector<S>, f: &WeightFamily, m: usize, k: usize, p: Exponent) -> Result<f64> {
    Ok(log_seminorm(x, f, m, k, p)?.exp())
}

/// Exact `Σ_j |x_j v_j|^p` for integer `p`, or `sup_j |x_j| v_j` for `c0`.
///
/// `Ok(None)` when `x` touches a forbidden coordinate.
pub fn exact_seminorm_power(
    x: &TruncatedVector<BigRational>,
    f: &WeightFamily,
    m: usize,
    k: usize,
    p: Exponent,
) -> Result<Option<BigRational>> {
    let mut out = BigRational::zero();
    for (j, xj) in x.iter() {
        let Some(v) = f.exact_at(m, k, j)? else {
            return Ok(None);
        };
        let t = (xj * v).abs();
        match p {
            Exponent::C0 => {
                if t > out {
                    out = t;
                }
            }
            Exponent::Finite(_) => {
                let e = p
                    .integer()
                    .ok_or_else(|| Error::NotExact(format!("exponent {p} is not an integer")))?;
                out += num_traits::pow(t, e as usize);
            }
        }
    }
    Ok(Some(out))
}

const SHAPE_TOL: f64 = 1e-12;

/// Scans positivity and the level/grade monotonicity on a window.
pub fn verify_family_shape(f: &WeightFamily, window: Window) -> Verdict {
    let grades = if f.is_graded() { window.grades.max(1) } else { 1 };
    let fail = |m, k, j, why: &str| {
        Verdict::fails(Certificate {
            witness_triple: Some((m, k, j)),
            window: Some(window),
            label: Some(why.to_string()),
            ..Certificate::default()
        })
    };
    for m in 1..=window.levels.max(1) {
        for k in 1..=grades {
            for j in 1..=window.n.max(1) {
                let v = f.log_weight(m, k, j);
                if v.is_nan() || v == f64::NEG_INFINITY {
                    return fail(m, k, j, "not strictly positive");
                }
                if m < window.levels {
                    let below = f.log_weight(m + 1, k, j);
                    if below > v + SHAPE_TOL * (1.0 + v.abs()) {
                        return fail(m, k, j, "increasing in level");
                    }
                }
                if f.is_graded() && k < grades {
                    let above = f.log_weight(m, k + 1, j);
                    if v > above + SHAPE_TOL * (1.0 + above.abs()) {
                        return fail(m, k, j, "decreasing in grade");
                    }
                }
            }
        }
    }
    Verdict::empirical(Certificate { window: Some(window), ..Certificate::default() })
}

/// Deterministic probe indices: `[1, 1024] ∪ {2^t, 2^t ± 1 : t ≤ 20}`, capped at `n`.
pub fn probe_indices(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=1024.min(n)).collect();
    for t in 0..=20u32 {
        let b = 1usize << t;
        for j in [b - 1, b, b + 1] {
            if j >= 1 && j <= n {
                out.push(j);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_roundtrip() {
        assert_eq!(pair(1, 1), 1);
        assert_eq!(pair(2, 1), 2);
        assert_eq!(pair(1, 2), 3);
        for flat in 1..5000 {
            let (i, j) = unpair(flat);
            assert_eq!(pair(i, j), flat);
        }
    }

    #[test]
    fn weight_at_rejects_zero_index() {
        let f = WeightFamily::linear("s'", |m, j| -(m as f64) * (j as f64).ln());
        assert!(f.weight_at(1, 1, 0).is_err());
        assert!((f.weight_at(2, 1, 3).unwrap().value() - (1.0f64 / 9.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn shape_violation_witness() {
        let f = WeightFamily::linear("up", |m, _| (m as f64).ln());
        let v = verify_family_shape(&f, Window::new(4, 1, 10));
        assert_eq!(v.certificate.witness_triple, Some((1, 1, 1)));
    }
}
