use std::fmt;
use std::sync::{Arc, RwLock};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::family::WeightFamily;
use crate::scalar::{ln_abs_ratio, Scalar};
use crate::symbol::{Symbol, ROOT};
use crate::vector::TruncatedVector;

type LogFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
type ExactFn = Arc<dyn Fn(usize) -> BigRational + Send + Sync>;
type SignFn = Arc<dyn Fn(usize) -> bool + Send + Sync>;

/// A nowhere-vanishing scalar sequence `(w_j)`, stored as `log|w_j|` plus an optional sign
/// and an optional exact rational form.
#[derive(Clone)]
pub struct WeightSequence {
    name: String,
    log_modulus: LogFn,
    negative: Option<SignFn>,
    exact: Option<ExactFn>,
    unit: bool,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSequence").field("name", &self.name).field("exact", &self.exact.is_some()).finish()
    }
}

impl WeightSequence {
    /// `w ≡ 1`.
    pub fn unit() -> Self {
        WeightSequence {
            name: "1".into(),
            log_modulus: Arc::new(|_| 0.0),
            negative: None,
            exact: Some(Arc::new(|_| BigRational::one())),
            unit: true,
        }
    }

    /// `w ≡ c` for a nonzero rational `c`.
    pub fn constant(c: BigRational) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::Domain("weights must be nonzero".into()));
        }
        let l = ln_abs_ratio(&c);
        let neg = c.is_negative();
        let name = format!("{c}");
        Ok(WeightSequence {
            name,
            log_modulus: Arc::new(move |_| l),
            negative: neg.then(|| Arc::new(|_| true) as SignFn),
            exact: Some(Arc::new(move |_| c.clone())),
            unit: false,
        })
    }

    /// `w_j = √j` (no exact form).
    pub fn sqrt_index() -> Self {
        WeightSequence::from_log("sqrt(j)", |j| 0.5 * (j as f64).ln())
    }

    /// Positive weights given by `log w_j`.
    pub fn from_log<F>(name: impl Into<String>, log_modulus: F) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        WeightSequence { name: name.into(), log_modulus: Arc::new(log_modulus), negative: None, exact: None, unit: false }
    }

    /// Exact rational weights; zero values are a domain error at evaluation.
    pub fn from_exact<F>(name: impl Into<String>, exact: F) -> Self
    where
        F: Fn(usize) -> BigRational + Send + Sync + 'static,
    {
        let exact: ExactFn = Arc::new(exact);
        let (e1, e2) = (exact.clone(), exact.clone());
        WeightSequence {
            name: name.into(),
            log_modulus: Arc::new(move |j| ln_abs_ratio(&e1(j))),
            negative: Some(Arc::new(move |j| e2(j).is_negative())),
            exact: Some(exact),
            unit: false,
        }
    }

    /// `λ · w`.
    pub fn scaled(&self, lambda: &BigRational) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::Domain("lambda must be nonzero".into()));
        }
        if lambda.is_one() {
            return Ok(self.clone());
        }
        let l = ln_abs_ratio(lambda);
        let base = self.log_modulus.clone();
        let neg_l = lambda.is_negative();
        let base_neg = self.negative.clone();
        let exact = self.exact.clone().map(|e| {
            let lambda = lambda.clone();
            Arc::new(move |j| e(j) * lambda.clone()) as ExactFn
        });
        Ok(WeightSequence {
            name: format!("{lambda}*{}", self.name),
            log_modulus: Arc::new(move |j| base(j) + l),
            negative: if neg_l || base_neg.is_some() {
                Some(Arc::new(move |j| neg_l ^ base_neg.as_ref().is_some_and(|n| n(j))))
            } else {
                None
            },
            exact,
            unit: false,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_unit(&self) -> bool {
        self.unit
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn log_modulus(&self, j: usize) -> f64 {
        (self.log_modulus)(j)
    }

    pub fn exact(&self, j: usize) -> Option<BigRational> {
        self.exact.as_ref().map(|e| e(j))
    }

    /// `w_j` in the scalar type `S`.
    pub fn value<S: Scalar>(&self, j: usize) -> Result<S> {
        if let Some(e) = &self.exact {
            let r = e(j);
            if r.is_zero() {
                return Err(Error::Domain(format!("weight w_{j} vanishes")));
            }
            return S::from_ratio(&r).ok_or_else(|| Error::NotExact(format!("w_{j}")));
        }
        if S::EXACT {
            return Err(Error::NotExact(format!("weight sequence `{}` has no exact form", self.name)));
        }
        let m = self.log_modulus(j).exp();
        let neg = self.negative.as_ref().is_some_and(|n| n(j));
        S::from_f64(if neg { -m } else { m }).ok_or_else(|| Error::NotExact(format!("w_{j}")))
    }
}

/// Preimage `s` with `ψ(s) = t`, `None` for the root.
fn preimage(psi: &Symbol, t: usize) -> Result<Option<usize>> {
    if t == ROOT {
        return Ok(None);
    }
    if let Some(inv) = psi.invert(t) {
        return Ok(inv);
    }
    let p = psi.position(t)?;
    Ok(Some(psi.chi(p - 1)?))
}

/// `B_{w,ψ} x = (w_{ψ(j)} x_{ψ(j)})_j`.
pub fn apply_generalized_shift<S: Scalar>(
    w: &WeightSequence,
    psi: &Symbol,
    x: &TruncatedVector<S>,
) -> Result<TruncatedVector<S>> {
    let mut y = TruncatedVector::zero();
    for (t, xt) in x.iter() {
        if let Some(s) = preimage(psi, t)? {
            y.set(s, w.value::<S>(t)? * xt.clone())?;
        }
    }
    Ok(y)
}

/// `B^n_{w,ψ} x`.
pub fn apply_generalized_shift_n<S: Scalar>(
    w: &WeightSequence,
    psi: &Symbol,
    x: &TruncatedVector<S>,
    n: usize,
) -> Result<TruncatedVector<S>> {
    (0..n).try_fold(x.clone(), |acc, _| apply_generalized_shift(w, psi, &acc))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Prefix products `P(p) = ∏_{l ≤ p} w_{χ(l)}` for `p = 0..=len`.
fn prefix_products<S: Scalar>(w: &WeightSequence, psi: &Symbol, len: usize) -> Result<Vec<S>> {
    let chi = psi.orbit_enumeration(len)?;
    let mut out = Vec::with_capacity(len + 1);
    out.push(S::one());
    for &c in &chi {
        let next = out.last().expect("nonempty").clone() * w.value::<S>(c)?;
        out.push(next);
    }
    Ok(out)
}

/// `T_{w,ψ}` (forward: `(Tx)_p = P(p) x_{χ(p)}`) or its exact inverse.
pub fn transform<S: Scalar>(
    w: &WeightSequence,
    psi: &Symbol,
    x: &TruncatedVector<S>,
    direction: Direction,
) -> Result<TruncatedVector<S>> {
    match direction {
        Direction::Forward => {
            let pos: Vec<(usize, usize)> =
                x.support().map(|t| psi.position(t).map(|p| (t, p))).collect::<Result<_>>()?;
            let len = pos.iter().map(|&(_, p)| p).max().unwrap_or(0);
            let prods = prefix_products::<S>(w, psi, len)?;
            let mut y = TruncatedVector::zero();
            for (t, p) in pos {
                y.set(p, prods[p].clone() * x.get(t))?;
            }
            Ok(y)
        }
        Direction::Inverse => {
            let len = x.support_end();
            let prods = prefix_products::<S>(w, psi, len)?;
            let chi = psi.orbit_enumeration(len)?;
            let mut y = TruncatedVector::zero();
            for (p, xp) in x.iter() {
                y.set(chi[p - 1], xp.clone() / prods[p].clone())?;
            }
            Ok(y)
        }
    }
}

/// Cumulative `Σ_{l ≤ p} log|w_{χ(l)}|` and exact `∏ |w_{χ(l)}|`, extended on demand.
struct Transport {
    w: WeightSequence,
    psi: Symbol,
    logs: RwLock<Vec<f64>>,
    exact: RwLock<Vec<BigRational>>,
}

impl Transport {
    fn new(w: WeightSequence, psi: Symbol) -> Self {
        Transport { w, psi, logs: RwLock::new(vec![0.0]), exact: RwLock::new(vec![BigRational::one()]) }
    }

    fn extend_logs(&self, p: usize) -> Result<()> {
        if self.logs.read().expect("lock").len() > p {
            return Ok(());
        }
        let target = p.max(64).next_power_of_two();
        let chi = self.psi.orbit_enumeration(target)?;
        let mut logs = self.logs.write().expect("lock");
        while logs.len() <= target {
            let l = logs.len();
            let next = logs[l - 1] + self.w.log_modulus(chi[l - 1]);
            logs.push(next);
        }
        Ok(())
    }

    fn log_prefix(&self, p: usize) -> Result<f64> {
        self.extend_logs(p)?;
        Ok(self.logs.read().expect("lock")[p])
    }

    fn exact_prefix(&self, p: usize) -> Result<BigRational> {
        if let Some(v) = self.exact.read().expect("lock").get(p) {
            return Ok(v.clone());
        }
        let chi = self.psi.orbit_enumeration(p)?;
        let mut ex = self.exact.write().expect("lock");
        while ex.len() <= p {
            let l = ex.len();
            let wl = self.w.exact(chi[l - 1]).ok_or_else(|| Error::NotExact("weight sequence".into()))?;
            let next = ex[l - 1].clone() * wl.abs();
            ex.push(next);
        }
        Ok(ex[p].clone())
    }
}

/// Weights of the plain-shift model: `u^{(m,k)}_p = v^{(m,k)}_{χ(p)} / ∏_{l ≤ p} |w_{χ(l)}|`.
///
/// The orbit is enumerated up front to `extent`; larger indices extend lazily and
/// evaluate to `NaN` if enumeration fails. Only transport-invariant hints are kept,
/// except for the identity transport, which keeps every hint.
pub fn conjugate_family(f: &WeightFamily, w: &WeightSequence, psi: &Symbol, extent: usize) -> Result<WeightFamily> {
    if w.is_unit() && psi.is_successor() {
        return Ok(f.clone());
    }
    let t = Arc::new(Transport::new(w.clone(), psi.clone()));
    t.extend_logs(extent + 1)?;
    let eval = f.log_eval_arc();
    let tl = t.clone();
    let name = format!("{}@({},{})", f.name(), w.name(), psi.name());
    let out = WeightFamily::from_log_fn(name, crate::family::IndexKind::Linear, f.is_graded(), move |m, k, p| {
        match (tl.psi.chi(p), tl.log_prefix(p)) {
            (Ok(c), Ok(l)) => eval(m, k, c) - l,
            _ => f64::NAN,
        }
    })
    .with_levels_hint(f.levels_hint())
    .with_hints(f.hints().iter().filter(|h| h.survives_transport()).cloned());
    match (f.exact_eval_arc(), w.is_exact()) {
        (Some(ex), true) => {
            let te = t.clone();
            Ok(out.with_exact(move |m, k, p| {
                let c = te.psi.chi(p).ok()?;
                let v = ex(m, k, c)?;
                let pr = te.exact_prefix(p).ok()?;
                Some(v / pr)
            }))
        }
        _ => Ok(out),
    }
}

/// Inverse of [`conjugate_family`]: `v^{(m,k)}_j = u^{(m,k)}_{pos(j)} · ∏_{l ≤ pos(j)} |w_{χ(l)}|`.
pub fn untransport_family(g: &WeightFamily, w: &WeightSequence, psi: &Symbol, extent: usize) -> Result<WeightFamily> {
    let t = Arc::new(Transport::new(w.clone(), psi.clone()));
    t.extend_logs(extent + 1)?;
    let eval = g.log_eval_arc();
    let index_kind = psi.index_kind();
    Ok(WeightFamily::from_log_fn(format!("{}@inverse", g.name()), index_kind, g.is_graded(), move |m, k, j| {
        match t.psi.position(j).and_then(|p| t.log_prefix(p).map(|l| (p, l))) {
            Ok((p, l)) => eval(m, k, p) + l,
            Err(_) => f64::NAN,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn plain_shift_examples() {
        let s = Symbol::successor();
        let w = WeightSequence::unit();
        let e2 = TruncatedVector::<Q>::basis(2).unwrap();
        assert_eq!(apply_generalized_shift(&w, &s, &e2).unwrap(), TruncatedVector::basis(1).unwrap());
        let e1 = TruncatedVector::<Q>::basis(1).unwrap();
        assert!(apply_generalized_shift(&w, &s, &e1).unwrap().is_empty());
        let wj = WeightSequence::from_exact("j", |j| q(j as i64));
        let e3 = TruncatedVector::<Q>::basis(3).unwrap();
        assert_eq!(apply_generalized_shift(&wj, &s, &e3).unwrap(), TruncatedVector::from_entries([(2, q(3))]).unwrap());
    }

    #[test]
    fn forward_transform_doubling() {
        let w = WeightSequence::constant(q(2)).unwrap();
        let s = Symbol::successor();
        let x = TruncatedVector::from_entries((1..=5).map(|j| (j, q(1)))).unwrap();
        let y = transform(&w, &s, &x, Direction::Forward).unwrap();
        for j in 1..=5 {
            assert_eq!(y.get(j), q(1 << j));
        }
        assert_eq!(transform(&w, &s, &y, Direction::Inverse).unwrap(), x);
    }

    #[test]
    fn sqrt_weights_transport_to_factorial() {
        let f = WeightFamily::linear("s'", |m, j| -(m as f64) * (j as f64).ln());
        let g = conjugate_family(&f, &WeightSequence::sqrt_index(), &Symbol::successor(), 64).unwrap();
        let lf: f64 = (1..=10).map(|l| (l as f64).ln()).sum();
        assert!((g.log_weight(2, 1, 10) - (-2.0 * 10f64.ln() - 0.5 * lf)).abs() < 1e-12);
    }
}
