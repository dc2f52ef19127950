//! Explicit dynamical witnesses and their replay.

use std::f64::consts::LN_2;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::classifier::{check_chaotic, check_hypercyclic, Model, SpaceSpec};
use crate::conjugacy::{apply_generalized_shift_n, transform, Direction, WeightSequence};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::family::{log_seminorm, WeightFamily};
use crate::scalar::ratio_to_f64;
use crate::hints::{Hint, TailBound};
use crate::sets::{syndetic_scan, IndexWindowSet};
use crate::verdict::Status;
use crate::weight::LogSum;
use crate::{RatVector, Rational};

pub const WITNESS_SCHEMA: u32 = 1;

/// Coordinates in which a witness is stated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coordinates {
    /// Original coordinates, acted on by `B_{w,ψ}`.
    Original,
    /// Plain-shift coordinates `T_{w,ψ} x`, acted on by `B`.
    Transported,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// `B^n(x + w) = y` with `w` small and supported away from `x`.
    Transitivity {
        x: RatVector,
        y: RatVector,
        n: usize,
        perturbation: RatVector,
        #[serde(with = "crate::serde_log")]
        log_eps: f64,
        #[serde(with = "crate::serde_log")]
        log_norm: f64,
    },
    /// `z = Σ_{j ≥ 0} e_{k + j·period}` truncated, with `‖e_k − z‖ < ε`.
    Periodic {
        k: usize,
        period: usize,
        z: RatVector,
        #[serde(with = "crate::serde_log")]
        log_eps: f64,
        #[serde(with = "crate::serde_log")]
        log_bound: f64,
    },
    /// `x = Σ_k S^{ñ_k} y^{(k)}` with distances `‖B^{ñ_k} x − y^{(k)}‖`.
    HypercyclicCandidate {
        targets: Vec<RatVector>,
        iterates: Vec<usize>,
        x: RatVector,
        #[serde(with = "crate::serde_log::vec")]
        log_distances: Vec<f64>,
        #[serde(with = "crate::serde_log")]
        log_tolerance: f64,
    },
    /// `{n ≤ horizon : ‖Σ_l y_l e_{n+l}‖ < ε}` and its syndetic gap.
    ReturnSet {
        x: RatVector,
        y: RatVector,
        #[serde(with = "crate::serde_log")]
        log_eps: f64,
        horizon: usize,
        members: Vec<usize>,
        gap: Option<usize>,
    },
}

impl Witness {
    pub fn kind(&self) -> &'static str {
        match self {
            Witness::Transitivity { .. } => "transitivity",
            Witness::Periodic { .. } => "periodic",
            Witness::HypercyclicCandidate { .. } => "hypercyclic-candidate",
            Witness::ReturnSet { .. } => "return-set",
        }
    }
}

/// A witness with the data needed to replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub schema: u32,
    pub space: String,
    pub p: Exponent,
    pub level: usize,
    pub truncation: usize,
    pub coordinates: Coordinates,
    pub witness: Witness,
}

impl WitnessRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid witness record: {e}")))
    }
}

/// Tolerance for float-mode replays.
pub const REPLAY_TOL: f64 = 1e-9;

struct Lab {
    model: Model,
    w: WeightSequence,
    exact: bool,
}

impl Lab {
    fn new(spec: &SpaceSpec) -> Result<Self> {
        let w = spec.effective_weights()?;
        Ok(Lab { model: spec.model()?, exact: w.is_exact(), w })
    }

    fn coordinates(&self) -> Coordinates {
        if self.exact {
            Coordinates::Original
        } else {
            Coordinates::Transported
        }
    }

    /// Maps a vector given in record coordinates to plain-shift coordinates.
    fn to_plain(&self, spec: &SpaceSpec, v: &RatVector) -> Result<RatVector> {
        if self.exact {
            transform(&self.w, &spec.psi, v, Direction::Forward)
        } else {
            Ok(v.clone())
        }
    }

    fn plain_to_lab(&self, spec: &SpaceSpec, v: &RatVector) -> Result<RatVector> {
        if self.exact {
            transform(&self.w, &spec.psi, v, Direction::Inverse)
        } else {
            Ok(v.clone())
        }
    }

    /// `max_k log ‖v‖_{p, u^{(m,k)}}` in plain coordinates.
    fn log_norm(&self, v: &RatVector, m: usize) -> Result<f64> {
        level_log_norm(&self.model.family, v, m, self.model.grades(), self.model.p)
    }
}

fn level_log_norm(f: &WeightFamily, v: &RatVector, m: usize, grades: usize, p: Exponent) -> Result<f64> {
    (1..=grades).try_fold(f64::NEG_INFINITY, |acc, k| Ok(acc.max(log_seminorm(v, f, m, k, p)?)))
}

/// `B^n` in the coordinates of a record.
fn shift_n(spec: &SpaceSpec, coords: Coordinates, v: &RatVector, n: usize) -> Result<RatVector> {
    match coords {
        Coordinates::Original => apply_generalized_shift_n(&spec.effective_weights()?, &spec.psi, v, n),
        Coordinates::Transported => Ok(v.backward_shift_by(n)),
    }
}

fn support_bound(v: &RatVector) -> usize {
    v.support_end()
}

/// `Σ_l y_l e_{n+l}` for `l ≤ s`.
fn lifted(y: &RatVector, n: usize) -> RatVector {
    y.forward_shift_by(n)
}

/// Perturbation `w` with `B^n(x + w) = y` and `‖w‖_m < ε`, found on the window.
pub fn transitivity_witness(x: &RatVector, y: &RatVector, spec: &SpaceSpec, m: usize, log_eps: f64) -> Result<WitnessRecord> {
    let lab = Lab::new(spec)?;
    let (xp, yp) = (lab.to_plain(spec, x)?, lab.to_plain(spec, y)?);
    let s = support_bound(&xp).max(support_bound(&yp)).max(1);
    let hi = lab.model.n().saturating_sub(s);
    for n in s..=hi {
        let wp = lifted(&yp, n);
        let ln = lab.log_norm(&wp, m)?;
        if ln < log_eps {
            let perturbation = lab.plain_to_lab(spec, &wp)?;
            return Ok(WitnessRecord {
                schema: WITNESS_SCHEMA,
                space: spec.name.clone(),
                p: spec.p,
                level: m,
                truncation: n + s,
                coordinates: lab.coordinates(),
                witness: Witness::Transitivity { x: x.clone(), y: y.clone(), n, perturbation, log_eps, log_norm: ln },
            });
        }
    }
    Err(Error::WitnessNotFound(format!("no iterate n in [{s}, {hi}] with a perturbation below the threshold")))
}

fn summable_tail(model: &Model) -> Option<&TailBound> {
    model.hints().iter().find_map(|h| match h {
        Hint::Summable { tail, .. } => Some(tail),
        _ => None,
    })
}

/// `log Σ_{j ≥ 1} (u_{k + j·i})^p` bounded by the window part plus the hint tail past `trunc`.
fn periodic_bound(model: &Model, m: usize, k: usize, i: usize, trunc: usize) -> Option<f64> {
    match model.p {
        Exponent::Finite(p) => {
            let tail = crate::classifier::checks::tail_bound(model, summable_tail(model)?, m, p, trunc)?;
            let mut acc = LogSum::default();
            let mut q = k + i;
            while q <= trunc {
                acc.push(p * model.u(m, 1, q));
                q += i;
            }
            acc.push(tail);
            Some(acc.value() / p)
        }
        Exponent::C0 => {
            let beyond = model.hints().iter().find_map(|h| match h {
                Hint::LimitZero { level, beyond: Some(b) } if *level <= m => Some(b),
                _ => None,
            })?;
            let mut sup = f64::NEG_INFINITY;
            let mut q = k + i;
            while q <= trunc {
                sup = sup.max(model.u(m, 1, q));
                q += i;
            }
            let eps = sup.max(-(trunc as f64));
            (beyond(1, eps) <= trunc).then_some(sup)
        }
    }
}

/// Periodic point `z` of `B` with `‖e_k − z‖_{p,u^{(m)}} < ε`, in plain coordinates.
pub fn periodic_approximant(k: usize, spec: &SpaceSpec, m: usize, log_eps: f64) -> Result<WitnessRecord> {
    if k == 0 {
        return Err(Error::Domain("indices start at 1".into()));
    }
    let model = spec.model()?;
    if model.graded() {
        return Err(Error::Precondition("periodic approximants need an ungraded space".into()));
    }
    let chaos = check_chaotic(&model)?;
    if chaos.status != Status::CertifiedHolds {
        return Err(Error::Precondition(format!("chaos is not certified ({})", chaos.status)));
    }
    let trunc = spec.bounds.truncation.min(model.n());
    for i in (k + 1)..trunc {
        let Some(bound) = periodic_bound(&model, m, k, i, trunc) else {
            return Err(Error::Precondition(format!("no tail bound at level {m}")));
        };
        if bound < log_eps {
            let z = RatVector::from_entries((0..).map(|j| k + j * i).take_while(|&q| q <= trunc).map(|q| (q, Rational::one())))?;
            return Ok(WitnessRecord {
                schema: WITNESS_SCHEMA,
                space: spec.name.clone(),
                p: spec.p,
                level: m,
                truncation: trunc,
                coordinates: Coordinates::Transported,
                witness: Witness::Periodic { k, period: i, z, log_eps, log_bound: bound },
            });
        }
    }
    Err(Error::WitnessNotFound(format!("no period below {trunc} reaches the threshold")))
}

/// Start of a low-weight stretch `[a, a+len)` past `min_start` with `max_k log u ≤ log_tol`.
fn low_stretch(model: &Model, m: usize, len: usize, min_start: usize, log_tol: f64) -> Option<usize> {
    let n = model.n();
    let ok = |j: usize| model.u_all_grades(m, j) <= log_tol;
    for h in model.hints() {
        match h {
            Hint::ThickZero { level, runs, bound } if *level <= m => {
                for r in 1.. {
                    let (a, b) = runs(r);
                    if b > n {
                        break;
                    }
                    let bd = (1..=model.grades()).map(|k| bound(k, r)).fold(f64::NEG_INFINITY, f64::max);
                    let a = a.max(min_start);
                    if bd <= log_tol && b + 1 >= a + len {
                        return Some(a);
                    }
                }
            }
            _ => {}
        }
    }
    // scan the window directly
    let mut run = 0;
    for j in min_start..=n {
        if ok(j) {
            run += 1;
            if run >= len {
                return Some(j + 1 - len);
            }
        } else {
            run = 0;
        }
    }
    None
}

/// Finite-depth candidate `x = Σ_k S^{ñ_k} y^{(k)}` along a thick low-weight set.
pub fn hypercyclic_candidate(targets: &[RatVector], spec: &SpaceSpec, m: usize, log_tol: f64) -> Result<WitnessRecord> {
    let lab = Lab::new(spec)?;
    let hyper = check_hypercyclic(&lab.model)?;
    if hyper.status != Status::CertifiedHolds {
        return Err(Error::Precondition(format!("hypercyclicity is not certified ({})", hyper.status)));
    }
    let plain: Vec<RatVector> = targets.iter().map(|t| lab.to_plain(spec, t)).collect::<Result<_>>()?;
    let s = plain.iter().map(support_bound).max().unwrap_or(0).max(1);
    let mass = ratio_to_f64(&plain.iter().map(|t| t.l1()).fold(Rational::one(), |a, b| a + b)).unwrap_or(f64::MAX).ln();
    let tol = log_tol - mass - (s as f64).ln() - LN_2;
    let mut iterates: Vec<usize> = Vec::new();
    for k in 0..plain.len() {
        let next = match iterates.last() {
            None => 0,
            Some(&prev) => {
                let a = low_stretch(&lab.model, m, prev + s, s + 1, tol)
                    .ok_or_else(|| Error::WitnessNotFound(format!("no thick stretch for target {} in the window", k + 1)))?;
                a + prev - 1
            }
        };
        iterates.push(next);
    }
    let mut xp = RatVector::zero();
    for (t, &n) in plain.iter().zip(&iterates) {
        xp = xp.add(&t.forward_shift_by(n));
    }
    let mut log_distances = Vec::new();
    for (t, &n) in plain.iter().zip(&iterates) {
        let d = xp.backward_shift_by(n).sub(t);
        log_distances.push(lab.log_norm(&d, m)?);
    }
    Ok(WitnessRecord {
        schema: WITNESS_SCHEMA,
        space: spec.name.clone(),
        p: spec.p,
        level: m,
        truncation: xp.support_end(),
        coordinates: lab.coordinates(),
        witness: Witness::HypercyclicCandidate {
            targets: targets.to_vec(),
            iterates,
            x: lab.plain_to_lab(spec, &xp)?,
            log_distances,
            log_tolerance: log_tol,
        },
    })
}

fn return_members(lab: &Lab, yp: &RatVector, s: usize, m: usize, log_eps: f64, horizon: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for n in s..=horizon.min(lab.model.n().saturating_sub(s)) {
        if lab.log_norm(&lifted(yp, n), m)? < log_eps {
            out.push(n);
        }
    }
    Ok(out)
}

/// Return times `n ≤ horizon` realized by `w_n = Σ_l y_l e_{n+l}` with `‖w_n‖_m < ε`.
pub fn return_set(x: &RatVector, y: &RatVector, log_eps: f64, spec: &SpaceSpec, m: usize, horizon: usize) -> Result<WitnessRecord> {
    if horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let lab = Lab::new(spec)?;
    let (xp, yp) = (lab.to_plain(spec, x)?, lab.to_plain(spec, y)?);
    let s = support_bound(&xp).max(support_bound(&yp)).max(1);
    let members = return_members(&lab, &yp, s, m, log_eps, horizon)?;
    let gap = gap_of(&members, horizon)?;
    Ok(WitnessRecord {
        schema: WITNESS_SCHEMA,
        space: spec.name.clone(),
        p: spec.p,
        level: m,
        truncation: horizon + s,
        coordinates: lab.coordinates(),
        witness: Witness::ReturnSet { x: x.clone(), y: y.clone(), log_eps, horizon, members, gap },
    })
}

fn gap_of(members: &[usize], horizon: usize) -> Result<Option<usize>> {
    let set = IndexWindowSet::new(1, horizon, members.iter().copied())?;
    Ok(syndetic_scan(&set).map(|s| s.bound))
}

/// What a successful replay established.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplaySummary {
    pub kind: &'static str,
    pub detail: String,
}

fn replay_fail(kind: &str, what: impl Into<String>) -> Error {
    Error::Precondition(format!("{kind} witness does not replay: {}", what.into()))
}

/// Re-executes a record against `spec`.
pub fn replay(record: &WitnessRecord, spec: &SpaceSpec) -> Result<ReplaySummary> {
    let kind = record.witness.kind();
    if record.schema != WITNESS_SCHEMA {
        return Err(replay_fail(kind, format!("schema {}", record.schema)));
    }
    let lab = Lab::new(spec)?;
    let periodic = matches!(record.witness, Witness::Periodic { .. });
    if periodic && record.coordinates != Coordinates::Transported || !periodic && record.coordinates != lab.coordinates() {
        return Err(replay_fail(kind, "coordinate mode differs from the space"));
    }
    let m = record.level;
    match &record.witness {
        Witness::Transitivity { x, y, n, perturbation, log_eps, .. } => {
            if perturbation.support().any(|j| !x.get(j).is_zero()) {
                return Err(replay_fail(kind, "perturbation overlaps the support of x"));
            }
            let out = shift_n(spec, record.coordinates, &x.add(perturbation), *n)?;
            if &out != y {
                return Err(replay_fail(kind, format!("B^{n}(x + w) differs from y")));
            }
            let ln = match record.coordinates {
                Coordinates::Original => level_log_norm(&spec.family, perturbation, m, lab.model.grades(), spec.p)?,
                Coordinates::Transported => lab.log_norm(perturbation, m)?,
            };
            if !(ln < *log_eps + REPLAY_TOL) {
                return Err(replay_fail(kind, format!("perturbation norm {ln} not below {log_eps}")));
            }
            Ok(ReplaySummary { kind, detail: format!("B^{n}(x + w) = y exactly, log norm {ln:.6}") })
        }
        Witness::Periodic { k, period, z, log_eps, log_bound } => {
            let trunc = record.truncation;
            let shifted = z.backward_shift_by(*period);
            for q in 1..=trunc.saturating_sub(*period) {
                if shifted.get(q) != z.get(q) {
                    return Err(replay_fail(kind, format!("pattern breaks at index {q}")));
                }
            }
            if z.get(*k) != Rational::one() || z.support().any(|q| q < *k || (q - k) % period != 0) {
                return Err(replay_fail(kind, "z is not the periodic pattern through k"));
            }
            let model = spec.model()?;
            let bound = periodic_bound(&model, m, *k, *period, trunc).ok_or_else(|| replay_fail(kind, "no tail bound"))?;
            if (bound - log_bound).abs() > REPLAY_TOL * (1.0 + bound.abs()) || !(bound < *log_eps) {
                return Err(replay_fail(kind, format!("bound {bound} vs recorded {log_bound}, threshold {log_eps}")));
            }
            Ok(ReplaySummary { kind, detail: format!("B^{period} z = z on [1, {}], log bound {bound:.6}", trunc - period) })
        }
        Witness::HypercyclicCandidate { targets, iterates, x, log_distances, .. } => {
            let xp = lab.to_plain(spec, x)?;
            for ((t, &n), &d) in targets.iter().zip(iterates).zip(log_distances) {
                let tp = lab.to_plain(spec, t)?;
                let diff = xp.backward_shift_by(n).sub(&tp);
                let ln = lab.log_norm(&diff, m)?;
                let same = ln == d || (ln - d).abs() <= REPLAY_TOL * (1.0 + d.abs());
                if !same {
                    return Err(replay_fail(kind, format!("distance at iterate {n}: {ln} vs {d}")));
                }
                if record.coordinates == Coordinates::Original {
                    let direct = shift_n(spec, record.coordinates, x, n)?;
                    if lab.to_plain(spec, &direct)? != xp.backward_shift_by(n) {
                        return Err(replay_fail(kind, format!("B^{n} x disagrees with the plain model")));
                    }
                }
            }
            Ok(ReplaySummary { kind, detail: format!("{} distances re-measured", targets.len()) })
        }
        Witness::ReturnSet { y, log_eps, horizon, members, gap, x } => {
            let (xp, yp) = (lab.to_plain(spec, x)?, lab.to_plain(spec, y)?);
            let s = support_bound(&xp).max(support_bound(&yp)).max(1);
            let again = return_members(&lab, &yp, s, m, *log_eps, *horizon)?;
            if &again != members {
                return Err(replay_fail(kind, "member set differs"));
            }
            let g = gap_of(&again, *horizon)?;
            if &g != gap {
                return Err(replay_fail(kind, format!("gap {g:?} vs {gap:?}")));
            }
            if let Some(&n) = members.first() {
                let w = lab.plain_to_lab(spec, &lifted(&yp, n))?;
                if shift_n(spec, record.coordinates, &x.add(&w), n)? != *y {
                    return Err(replay_fail(kind, format!("B^{n}(x + w_n) differs from y")));
                }
            }
            Ok(ReplaySummary { kind, detail: format!("{} members, gap {gap:?}", members.len()) })
        }
    }
}
