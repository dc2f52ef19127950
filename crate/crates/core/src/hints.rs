use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::family::{probe_indices, WeightFamily};
use crate::verdict::Window;

/// A closure together with a human-readable statement of what it computes.
pub struct Described<F: ?Sized> {
    pub desc: String,
    pub f: Arc<F>,
}

impl<F: ?Sized> Clone for Described<F> {
    fn clone(&self) -> Self {
        Described { desc: self.desc.clone(), f: self.f.clone() }
    }
}

impl<F: ?Sized> Deref for Described<F> {
    type Target = F;
    fn deref(&self) -> &F {
        &self.f
    }
}

impl<F: ?Sized> fmt::Debug for Described<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.desc)
    }
}

/// `m ↦ f64` (typically `log ε_m`).
pub type LevelFn = Described<dyn Fn(usize) -> f64 + Send + Sync>;
/// `m ↦ count`.
pub type LevelCount = Described<dyn Fn(usize) -> usize + Send + Sync>;
/// `n ↦ j`.
pub type SeqFn = Described<dyn Fn(usize) -> usize + Send + Sync>;
/// `(a, b) ↦ index`.
pub type Seq2Fn = Described<dyn Fn(usize, usize) -> usize + Send + Sync>;
/// `n ↦ (start, end)`, inclusive.
pub type RunFn = Described<dyn Fn(usize) -> (usize, usize) + Send + Sync>;
/// `(m, n) ↦ (start, end)`, inclusive.
pub type LevelRunFn = Described<dyn Fn(usize, usize) -> (usize, usize) + Send + Sync>;
/// `(a, b) ↦ log bound`.
pub type Bound2 = Described<dyn Fn(usize, usize) -> f64 + Send + Sync>;
/// `j ↦ (l, k)`.
pub type CoordFn = Described<dyn Fn(usize) -> (usize, usize) + Send + Sync>;
/// `(k, log ε) ↦ j₀`.
pub type ThresholdFn = Described<dyn Fn(usize, f64) -> usize + Send + Sync>;
/// `(m, p, j) ↦ log q`.
pub type RatioFn = Described<dyn Fn(usize, f64, usize) -> f64 + Send + Sync>;

pub fn level_fn(desc: &str, f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> LevelFn {
    Described { desc: desc.into(), f: Arc::new(f) }
}

pub fn level_count(desc: &str, f: impl Fn(usize) -> usize + Send + Sync + 'static) -> LevelCount {
    Described { desc: desc.into(), f: Arc::new(f) }
}

pub fn seq_fn(desc: &str, f: impl Fn(usize) -> usize + Send + Sync + 'static) -> SeqFn {
    Described { desc: desc.into(), f: Arc::new(f) }
}

pub fn seq2_fn(desc: &str, f: impl Fn(usize, usize) -> usize + Send + Sync + 'static) -> Seq2Fn {
    Described { desc: desc.into(), f: Arc::new(f) }
}

pub fn run_fn(desc: &str, f: impl Fn(usize) -> (usize, usize) + Send + Sync + 'static) -> RunFn {
    Described { desc: desc.into(), f: Arc::new(f) }
}

pub fn level_run_fn(desc: &str, f: impl Fn(usize, usize) -> (usize, usize) + Send + Sync + 'static) -> LevelRunFn {
    Described { desc: desc.into(), f: Arc::new(f) }
}

pub fn bound2(desc: &str, f: impl Fn(usize, usize) -> f64 + Send + Sync + 'static) -> Bound2 {
    Described { desc: desc.into(), f: Arc::new(f) }
}

pub fn coord_fn(desc: &str, f: impl Fn(usize) -> (usize, usize) + Send + Sync + 'static) -> CoordFn {
    Described { desc: desc.into(), f: Arc::new(f) }
}

pub fn threshold_fn(desc: &str, f: impl Fn(usize, f64) -> usize + Send + Sync + 'static) -> ThresholdFn {
    Described { desc: desc.into(), f: Arc::new(f) }
}

pub fn ratio_fn(desc: &str, f: impl Fn(usize, f64, usize) -> f64 + Send + Sync + 'static) -> RatioFn {
    Described { desc: desc.into(), f: Arc::new(f) }
}

/// Closed-form tail control for `Σ_j (u^{(m)}_j)^p`, valid for every level `m ≥ from_level`.
#[derive(Clone, Debug)]
pub enum TailBound {
    /// `a_{i+1}/a_i ≤ q(m,p,j) < 1` for all `i ≥ j ≥ from`, with `q` nonincreasing in `j`.
    Ratio { from: usize, log_q: RatioFn },
    /// `u^{(m)}_j ≤ c_m j^{-s_m}`.
    PowerLaw { log_c: LevelFn, s: LevelFn },
}

/// Structural facts about a (transported) weight family.
///
/// Unless a closure takes the grade explicitly, a hint holds for every grade.
#[derive(Clone, Debug)]
pub enum Hint {
    DecreasingInLevel,
    IncreasingInGrade,
    /// `u^{(level)}_j` is nonincreasing for `j ≥ from`.
    TailMonotone { level: usize, from: usize },
    /// `u^{(level,k)}_j → 0`; `beyond(k, log ε)` is an index past which `u < ε`.
    LimitZero { level: usize, beyond: Option<ThresholdFn> },
    /// `log u^{(level,k)}_{seq(n)} ≤ bound(k, n) → -∞`.
    ZeroAlong { level: usize, seq: SeqFn, bound: Bound2 },
    /// Runs `runs(n)` of growing length with `log u^{(level,k)}_j ≤ bound(k, n) → -∞` on run `n`.
    ThickZero { level: usize, runs: RunFn, bound: Bound2 },
    /// `u^{(level)}_j < 2^{-t}` whenever `2^{t+shift}` divides `j`.
    DyadicSublevel { level: usize, shift: u32 },
    /// For every level `m`, runs of `{u^{(m)} < ε_m}` have length at most `max_run(m)`.
    SublevelRunBound { eps_log: LevelFn, max_run: LevelCount },
    /// For every level `m`, `u^{(m)} ≥ ε_m` along `along(m, ·)` (all indices when absent).
    /// `uniform`: the sequences for different levels are tails of a single one.
    BoundedBelow { along: Option<Seq2Fn>, uniform: bool, eps_log: LevelFn },
    /// For every level `m`, intervals `intervals(m, n)` of unbounded length with `u^{(m)} > ε_m`.
    HighIntervals { eps_log: LevelFn, intervals: LevelRunFn },
    /// `j ↦ (l, k)` bijectively with `u^{(low_level)}_j ≤ low_bound(k)` and
    /// `u^{(m)}_j ≤ column_bound(m, l)` whenever `m > k`.
    ColumnSplit { coords: CoordFn, low_level: usize, low_bound: LevelFn, column_bound: Bound2 },
    Summable { from_level: usize, tail: TailBound },
    /// Every level diverges in `ℓ_p`: `u^{(m)}` is nonincreasing from `monotone_from` and
    /// `at_power_of_two(m, K) = log u^{(m)}_{2^K}` extends beyond machine indices.
    Divergent { monotone_from: usize, at_power_of_two: Bound2 },
    /// `u^{(m+offset, k)}_j ≤ C_{m,k} u^{(m, grade(m,k))}_{j+1}` with `log C = log_c(m, k)`.
    ContinuityBound { level_offset: usize, grade: Seq2Fn, log_c: Bound2 },
    /// `v^{(m+1)}_j / v^{(m)}_j ≤ bound(j)` with `Σ_j bound(j) ≤ sum_bound`.
    NuclearRatio { log_bound: LevelFn, sum_bound: f64 },
    /// `v^{(m+1)}_j / v^{(m)}_j ≥ c / j` for all `m, j`.
    NuclearDivergent { log_c: f64 },
}

impl Hint {
    /// Short stable label used in certificates.
    pub fn label(&self) -> String {
        match self {
            Hint::DecreasingInLevel => "decreasing-in-level".into(),
            Hint::IncreasingInGrade => "increasing-in-grade".into(),
            Hint::TailMonotone { level, from } => format!("tail-monotone(level={level}, from={from})"),
            Hint::LimitZero { level, .. } => format!("limit-zero(level={level})"),
            Hint::ZeroAlong { level, seq, .. } => format!("zero-along(level={level}, j={})", seq.desc),
            Hint::ThickZero { level, runs, .. } => format!("thick-zero(level={level}, runs={})", runs.desc),
            Hint::DyadicSublevel { level, shift } => format!("dyadic-sublevel(level={level}, shift={shift})"),
            Hint::SublevelRunBound { eps_log, max_run } => {
                format!("sublevel-run-bound(eps={}, max-run={})", eps_log.desc, max_run.desc)
            }
            Hint::BoundedBelow { along, uniform, eps_log } => format!(
                "bounded-below(along={}, uniform={uniform}, eps={})",
                along.as_ref().map_or("all", |a| a.desc.as_str()),
                eps_log.desc
            ),
            Hint::HighIntervals { eps_log, intervals } => {
                format!("high-intervals(eps={}, intervals={})", eps_log.desc, intervals.desc)
            }
            Hint::ColumnSplit { coords, low_level, .. } => {
                format!("column-split(coords={}, low-level={low_level})", coords.desc)
            }
            Hint::Summable { from_level, tail } => match tail {
                TailBound::Ratio { log_q, .. } => format!("summable(from-level={from_level}, ratio={})", log_q.desc),
                TailBound::PowerLaw { s, .. } => format!("summable(from-level={from_level}, power-law={})", s.desc),
            },
            Hint::Divergent { monotone_from, .. } => format!("divergent(monotone-from={monotone_from})"),
            Hint::ContinuityBound { level_offset, grade, log_c } => {
                format!("continuity-bound(n=m+{level_offset}, l={}, log-c={})", grade.desc, log_c.desc)
            }
            Hint::NuclearRatio { log_bound, sum_bound } => {
                format!("nuclear-ratio(bound={}, sum<={sum_bound})", log_bound.desc)
            }
            Hint::NuclearDivergent { log_c } => format!("nuclear-divergent(log-c={log_c})"),
        }
    }

    /// Whether conjugation by an arbitrary weight and symbol preserves the hint.
    pub fn survives_transport(&self) -> bool {
        matches!(self, Hint::DecreasingInLevel | Hint::IncreasingInGrade)
    }

    /// Spot-checks the hint on probe points of `window`.
    pub fn check(&self, f: &WeightFamily, window: Window, p: Exponent) -> Result<()> {
        check_hint(self, f, window, p)
    }
}

const TOL: f64 = 1e-9;

/// `a ≤ b` on the extended reals, with a relative tolerance.
pub(crate) fn le(a: f64, b: f64) -> bool {
    if b == f64::INFINITY || a == f64::NEG_INFINITY {
        return true;
    }
    if a == f64::INFINITY {
        return false;
    }
    a <= b + TOL * (1.0 + b.abs())
}

/// `a < b` on the extended reals, strict (no tolerance).
pub(crate) fn lt(a: f64, b: f64) -> bool {
    a < b
}

const SEQ_CAP: usize = 4096;

fn reject(hint: &Hint, at: String) -> Error {
    Error::HintRejected { hint: hint.label(), at }
}

fn grades(f: &WeightFamily, window: Window) -> usize {
    if f.is_graded() {
        window.grades.max(1)
    } else {
        1
    }
}

fn check_hint(h: &Hint, f: &WeightFamily, w: Window, p: Exponent) -> Result<()> {
    let probes = probe_indices(w.n);
    let levels = w.levels.max(1);
    let ks = grades(f, w);
    let u = |m: usize, k: usize, j: usize| f.log_weight(m, k, j);
    match h {
        Hint::DecreasingInLevel => {
            for m in 1..levels {
                for k in 1..=ks {
                    for &j in &probes {
                        if !le(u(m + 1, k, j), u(m, k, j)) {
                            return Err(reject(h, format!("(m={m}, k={k}, j={j})")));
                        }
                    }
                }
            }
        }
        Hint::IncreasingInGrade => {
            for m in 1..=levels {
                for k in 1..ks {
                    for &j in &probes {
                        if !le(u(m, k, j), u(m, k + 1, j)) {
                            return Err(reject(h, format!("(m={m}, k={k}, j={j})")));
                        }
                    }
                }
            }
        }
        Hint::TailMonotone { level, from } => {
            for k in 1..=ks {
                for &j in probes.iter().filter(|&&j| j >= *from && j < w.n) {
                    if !le(u(*level, k, j + 1), u(*level, k, j)) {
                        return Err(reject(h, format!("(k={k}, j={j})")));
                    }
                }
            }
        }
        Hint::LimitZero { level, beyond } => {
            if let Some(beyond) = beyond {
                for k in 1..=ks {
                    for t in 1..=20u32 {
                        let eps = -(t as f64) * std::f64::consts::LN_2;
                        let j0 = beyond(k, eps).max(1);
                        for j in j0..(j0 + 64).min(w.n.max(j0 + 1)) {
                            if !lt(u(*level, k, j), eps) {
                                return Err(reject(h, format!("(k={k}, t={t}, j={j})")));
                            }
                        }
                    }
                }
            } else {
                // without a threshold, require decay of block maxima on the window
                let tail = (w.n / 2).max(1)..=w.n;
                let head = 1..=(w.n / 16).max(1);
                for k in 1..=ks {
                    let max_tail = tail.clone().map(|j| u(*level, k, j)).fold(f64::NEG_INFINITY, f64::max);
                    let max_head = head.clone().map(|j| u(*level, k, j)).fold(f64::NEG_INFINITY, f64::max);
                    if !(max_tail < max_head) {
                        return Err(reject(h, format!("(k={k}): tail maximum does not drop below head maximum")));
                    }
                }
            }
        }
        Hint::ZeroAlong { level, seq, bound } => {
            for k in 1..=ks {
                for n in 1..=SEQ_CAP {
                    let j = seq(n);
                    if j > w.n {
                        break;
                    }
                    if !le(u(*level, k, j), bound(k, n)) {
                        return Err(reject(h, format!("(k={k}, n={n}, j={j})")));
                    }
                }
            }
        }
        Hint::ThickZero { level, runs, bound } => {
            for k in 1..=ks {
                for n in 1..=SEQ_CAP {
                    let (a, b) = runs(n);
                    if b > w.n {
                        break;
                    }
                    for j in a..=b {
                        if !le(u(*level, k, j), bound(k, n)) {
                            return Err(reject(h, format!("(k={k}, run={n}, j={j})")));
                        }
                    }
                }
            }
        }
        Hint::DyadicSublevel { level, shift } => {
            for k in 1..=ks {
                for t in 1..=40u32 {
                    let step = match 1usize.checked_shl(t + shift) {
                        Some(s) if s <= w.n => s,
                        _ => break,
                    };
                    let eps = -(t as f64) * std::f64::consts::LN_2;
                    for j in (step..=w.n).step_by(step).take(SEQ_CAP) {
                        if !lt(u(*level, k, j), eps) {
                            return Err(reject(h, format!("(k={k}, t={t}, j={j})")));
                        }
                    }
                }
            }
        }
        Hint::SublevelRunBound { eps_log, max_run } => {
            let n = w.n.min(1 << 14);
            for m in 1..=levels {
                let eps = eps_log(m);
                let mut run = 0usize;
                for j in 1..=n {
                    if lt(u(m, 1, j), eps) {
                        run += 1;
                        if run > max_run(m) {
                            return Err(reject(h, format!("(m={m}, j={j}): run exceeds {}", max_run(m))));
                        }
                    } else {
                        run = 0;
                    }
                }
            }
        }
        Hint::BoundedBelow { along, eps_log, .. } => {
            for m in 1..=levels {
                let eps = eps_log(m);
                let idx: Vec<usize> = match along {
                    Some(a) => (1..=SEQ_CAP).map(|n| a(m, n)).take_while(|&j| j <= w.n).collect(),
                    None => probes.clone(),
                };
                for k in 1..=ks {
                    for &j in &idx {
                        if !le(eps, u(m, k, j)) {
                            return Err(reject(h, format!("(m={m}, k={k}, j={j})")));
                        }
                    }
                }
            }
        }
        Hint::HighIntervals { eps_log, intervals } => {
            for m in 1..=levels {
                let eps = eps_log(m);
                for n in 1..=SEQ_CAP {
                    let (a, b) = intervals(m, n);
                    if b > w.n {
                        break;
                    }
                    for j in a..=b {
                        if !(u(m, 1, j) > eps) {
                            return Err(reject(h, format!("(m={m}, interval={n}, j={j})")));
                        }
                    }
                }
            }
        }
        Hint::ColumnSplit { coords, low_level, low_bound, column_bound } => {
            for &j in &probes {
                let (l, k) = coords(j);
                if !le(u(*low_level, 1, j), low_bound(k)) {
                    return Err(reject(h, format!("(j={j}, column={k})")));
                }
                for m in (k + 1)..=levels {
                    if !le(u(m, 1, j), column_bound(m, l)) {
                        return Err(reject(h, format!("(m={m}, j={j}, l={l})")));
                    }
                }
            }
        }
        Hint::Summable { from_level, tail } => {
            let Exponent::Finite(p) = p else { return Ok(()) };
            for m in *from_level..=levels.max(*from_level) {
                match tail {
                    TailBound::Ratio { from, log_q } => {
                        for &j in probes.iter().filter(|&&j| j >= *from && j < w.n) {
                            let q = log_q(m, p, j);
                            let step = p * (u(m, 1, j + 1) - u(m, 1, j));
                            if !(q < 0.0) || !le(step, q) || !le(log_q(m, p, j + 1), q) {
                                return Err(reject(h, format!("(m={m}, j={j})")));
                            }
                        }
                    }
                    TailBound::PowerLaw { log_c, s } => {
                        for &j in &probes {
                            if !le(u(m, 1, j), log_c(m) - s(m) * (j as f64).ln()) {
                                return Err(reject(h, format!("(m={m}, j={j})")));
                            }
                        }
                    }
                }
            }
        }
        Hint::Divergent { monotone_from, at_power_of_two } => {
            for m in 1..=levels {
                for &j in probes.iter().filter(|&&j| j >= *monotone_from && j < w.n) {
                    if !le(u(m, 1, j + 1), u(m, 1, j)) {
                        return Err(reject(h, format!("(m={m}, j={j}): not monotone")));
                    }
                }
                for kk in 0..usize::BITS as usize {
                    let j = 1usize << kk;
                    if j > w.n {
                        break;
                    }
                    let (a, b) = (at_power_of_two(m, kk), u(m, 1, j));
                    if (a - b).abs() > TOL * (1.0 + b.abs()) {
                        return Err(reject(h, format!("(m={m}, 2^{kk}): extension {a} differs from {b}")));
                    }
                }
            }
        }
        Hint::ContinuityBound { level_offset, grade, log_c } => {
            for m in 1..=levels {
                for k in 1..=ks {
                    let l = grade(m, k);
                    let c = log_c(m, k);
                    for &j in probes.iter().filter(|&&j| j < w.n) {
                        if !le(u(m + level_offset, k, j), c + u(m, l, j + 1)) {
                            return Err(reject(h, format!("(m={m}, k={k}, j={j})")));
                        }
                    }
                }
            }
        }
        Hint::NuclearRatio { log_bound, .. } => {
            for m in 1..=levels {
                for &j in &probes {
                    if !le(u(m + 1, 1, j) - u(m, 1, j), log_bound(j)) {
                        return Err(reject(h, format!("(m={m}, j={j})")));
                    }
                }
            }
        }
        Hint::NuclearDivergent { log_c } => {
            for m in 1..=levels {
                for &j in &probes {
                    if !le(log_c - (j as f64).ln(), u(m + 1, 1, j) - u(m, 1, j)) {
                        return Err(reject(h, format!("(m={m}, j={j})")));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Checks every hint of `f`, returning the first rejection.
pub fn check_all(f: &WeightFamily, hints: &[Hint], window: Window, p: Exponent) -> Result<()> {
    hints.iter().try_for_each(|h| h.check(f, window, p))
}
