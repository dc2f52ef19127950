use std::f64::consts::LN_2;

use super::Model;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::hints::{le, Hint, TailBound};
use crate::sets::{longest_run, syndetic_scan, IndexWindowSet};
use crate::verdict::{Certificate, SeriesCertificate, Selection, Verdict};
use crate::weight::LogSum;

/// Cap on listed intervals and indices per level.
const LIST_CAP: usize = 64;

fn cert(model: &Model, hint: Option<&Hint>, label: &str) -> Certificate {
    Certificate {
        window: Some(model.window()),
        hints: hint.map(|h| vec![h.label()]).unwrap_or_default(),
        label: Some(label.into()),
        ..Default::default()
    }
}

fn log_eps(t: u32) -> f64 {
    -(t as f64) * LN_2
}

fn reject(hint: &Hint, at: String) -> Error {
    Error::HintRejected { hint: hint.label(), at }
}

/// `j_t`: the first candidate with `max_k log u^{(level,k)}_j < -t ln 2`, for `t = 1, 2, …`.
pub(crate) fn thresholds(model: &Model, level: usize, candidates: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut out = Vec::new();
    let mut t = 1u32;
    let n = model.n();
    for j in candidates.into_iter().take_while(|&j| j <= n) {
        let u = model.u_all_grades(level, j);
        while t <= model.bounds.eps_floor && u < log_eps(t) {
            out.push(j);
            t += 1;
        }
        if t > model.bounds.eps_floor {
            break;
        }
    }
    out
}

fn sublevel(model: &Model, m: usize, k: Option<usize>, log_eps: f64, hi: usize) -> IndexWindowSet {
    let members = (1..=hi).filter(|&j| match k {
        Some(k) => model.u(m, k, j) < log_eps,
        None => model.u_all_grades(m, j) < log_eps,
    });
    IndexWindowSet::new(1, hi, members).expect("window starts at 1")
}

/// `sup_{j ≤ hi} (log u^{(n,k)}_j − log u^{(m,l)}_{j+1})` on the extended reals.
pub(crate) fn continuity_sup(model: &Model, (m, k, n, l): (usize, usize, usize, usize), hi: usize) -> f64 {
    let lhs = model.row(n, k);
    let rhs = model.row(m, l);
    let mut sup = f64::NEG_INFINITY;
    for j in 1..=hi.min(model.n()) {
        let (a, b) = (lhs[j], rhs[j + 1]);
        if a == f64::INFINITY && b == f64::INFINITY || b == f64::INFINITY {
            continue;
        }
        sup = sup.max(a - b);
    }
    sup
}

pub fn check_continuity(model: &Model) -> Result<Verdict> {
    let levels = model.levels();
    let grades = model.grades();
    if let Some(h @ Hint::ContinuityBound { level_offset, grade, log_c }) =
        model.hints().iter().find(|h| matches!(h, Hint::ContinuityBound { .. }))
    {
        let mut c = cert(model, Some(h), "continuity-bound");
        for m in 1..=levels {
            for k in 1..=grades {
                let (n, l, lc) = (m + level_offset, grade(m, k), log_c(m, k));
                let sup = continuity_sup(model, (m, k, n, l), model.n());
                if !le(sup, lc) {
                    return Err(reject(h, format!("(m={m}, k={k}): window sup {sup} exceeds {lc}")));
                }
                c.selections.push(Selection { m, k, n, l, log_c: lc });
            }
        }
        return Ok(Verdict::holds(c));
    }
    let mut c = cert(model, None, "window-sup");
    let n = model.n();
    for m in 1..=levels {
        for k in 1..=grades {
            let mut found = None;
            'search: for nn in m..=levels + 1 {
                for l in k..=grades {
                    let full = continuity_sup(model, (m, k, nn, l), n);
                    let half = continuity_sup(model, (m, k, nn, l), n / 2);
                    if full.is_finite() && full - half <= 0.01 || full == f64::NEG_INFINITY {
                        found = Some(Selection { m, k, n: nn, l, log_c: full.max(0.0) });
                        break 'search;
                    }
                }
            }
            match found {
                Some(s) => c.selections.push(s),
                None => {
                    return Ok(Verdict::undecided(format!("no bounded level/grade selection for (m={m}, k={k})"))
                        .with_window(model.window()))
                }
            }
        }
    }
    Ok(Verdict::empirical(c))
}

pub fn check_transitive(model: &Model) -> Result<Verdict> {
    let n = model.n();
    for h in model.hints() {
        let (level, label, cands): (usize, &str, Box<dyn Iterator<Item = usize>>) = match h {
            Hint::LimitZero { level, .. } => (*level, "limit-zero", Box::new(1..=n)),
            Hint::ZeroAlong { level, seq, .. } => (*level, "zero-along", Box::new((1..).map(|i| (**seq)(i)))),
            Hint::ThickZero { level, runs, .. } => (
                *level,
                "thick-zero",
                Box::new((1..).flat_map(|i| {
                    let (a, b) = runs(i);
                    a..=b
                })),
            ),
            Hint::DyadicSublevel { level, shift } => {
                let s = *shift;
                (*level, "dyadic-sublevel", Box::new((1..60u32).map(move |t| 1usize << (t + s).min(62))))
            }
            _ => continue,
        };
        let mut c = cert(model, Some(h), label);
        c.level = Some(level);
        c.witness_indices = thresholds(model, level, cands);
        return Ok(Verdict::holds(c));
    }
    if let Some(v) = bounded_below_everywhere(model, "bounded-below") {
        return Ok(v);
    }
    // empirical: block minima of the transported weights keep decreasing
    for m in 1..=model.levels() {
        let w = thresholds(model, m, 1..=n);
        if w.len() >= 8 {
            let mut c = cert(model, None, "window-thresholds");
            c.level = Some(m);
            c.witness_indices = w;
            return Ok(Verdict::empirical(c));
        }
    }
    Ok(Verdict::undecided("transported weights stay above 2^-8 on the window").with_window(model.window()))
}

fn bounded_below_everywhere(model: &Model, label: &str) -> Option<Verdict> {
    let h = model.hints().iter().find(|h| matches!(h, Hint::BoundedBelow { along: None, .. }))?;
    let Hint::BoundedBelow { eps_log, .. } = h else { unreachable!() };
    let mut c = cert(model, Some(h), label);
    c.level_bounds = (1..=model.levels()).map(|m| (m, eps_log(m))).collect();
    Some(Verdict::fails(c))
}

pub fn check_hypercyclic(model: &Model) -> Result<Verdict> {
    let n = model.n();
    for h in model.hints() {
        match h {
            Hint::LimitZero { level, .. } => {
                let mut c = cert(model, Some(h), "limit-zero");
                c.level = Some(*level);
                c.witness_indices = thresholds(model, *level, 1..=n);
                return Ok(Verdict::holds(c));
            }
            Hint::ThickZero { level, runs, bound } => {
                let mut c = cert(model, Some(h), "thick-zero");
                c.level = Some(*level);
                for i in 1.. {
                    let (a, b) = runs(i);
                    if b > n || c.intervals.len() >= LIST_CAP * 4 {
                        break;
                    }
                    let bd = (1..=model.grades()).map(|k| bound(k, i)).fold(f64::NEG_INFINITY, f64::max);
                    c.intervals.push((*level, a, b));
                    c.interval_bounds.push(bd);
                }
                return Ok(Verdict::holds(c));
            }
            _ => {}
        }
    }
    for h in model.hints() {
        if let Hint::SublevelRunBound { eps_log, max_run } = h {
            let mut c = cert(model, Some(h), "sublevel-run-bound");
            let hi = n.min(1 << 14);
            for m in 1..=model.levels() {
                let eps = eps_log(m);
                let (run, at) = longest_run(&sublevel(model, m, Some(1), eps, hi));
                if run > max_run(m) {
                    return Err(reject(h, format!("(m={m}, start={at:?}): run {run}")));
                }
                c.run_bounds.push((m, run));
                c.level_bounds.push((m, eps));
            }
            return Ok(Verdict::fails(c));
        }
    }
    if let Some(v) = bounded_below_everywhere(model, "bounded-below") {
        return Ok(v);
    }
    // empirical: longest sublevel runs grow with the window
    for m in 1..=model.levels() {
        let mut c = cert(model, None, "window-runs");
        c.level = Some(m);
        let growing = (1..=8u32).all(|t| {
            let runs: Vec<usize> =
                [n / 4, n / 2, n].iter().map(|&hi| longest_run(&sublevel(model, m, None, log_eps(t), hi)).0).collect();
            c.run_bounds.push((m, runs[2]));
            runs[0] < runs[1] && runs[1] < runs[2]
        });
        if growing {
            return Ok(Verdict::empirical(c));
        }
    }
    Ok(Verdict::undecided("sublevel runs do not grow across windows").with_window(model.window()))
}

pub fn check_mixing(model: &Model) -> Result<Verdict> {
    if model.graded() {
        return Ok(Verdict::undecided("mixing is not decided for graded spaces").with_window(model.window()));
    }
    let n = model.n();
    for h in model.hints() {
        match h {
            Hint::LimitZero { level, .. } => {
                let mut c = cert(model, Some(h), "limit-zero");
                c.level = Some(*level);
                c.witness_indices = thresholds(model, *level, 1..=n);
                return Ok(Verdict::holds(c));
            }
            Hint::ColumnSplit { coords, low_level, low_bound, column_bound } => {
                let mut c = cert(model, Some(h), "column-split");
                c.level = Some(*low_level);
                for j in 1..=n {
                    let (l, k) = coords(j);
                    if !le(model.u(*low_level, 1, j), low_bound(k)) {
                        return Err(reject(h, format!("(j={j}, column={k})")));
                    }
                    for m in (k + 1)..=model.levels() {
                        if !le(model.u(m, 1, j), column_bound(m, l)) {
                            return Err(reject(h, format!("(m={m}, j={j}, l={l})")));
                        }
                    }
                }
                c.level_bounds = (1..=model.levels()).map(|k| (k, low_bound(k))).collect();
                return Ok(Verdict::holds(c));
            }
            _ => {}
        }
    }
    for h in model.hints() {
        if let Hint::BoundedBelow { along, uniform, eps_log } = h {
            if along.is_some() && !uniform {
                continue;
            }
            let mut c = cert(model, Some(h), "bounded-below");
            for m in 1..=model.levels() {
                let eps = eps_log(m);
                c.level_bounds.push((m, eps));
                let idx: Vec<usize> = match along {
                    Some(a) => (1..).map(|i| a(m, i)).take_while(|&j| j <= n).take(16).collect(),
                    None => (1..=16).collect(),
                };
                for j in idx {
                    if !le(eps, model.u(m, 1, j)) {
                        return Err(reject(h, format!("(m={m}, j={j})")));
                    }
                    c.intervals.push((m, j, j));
                }
            }
            return Ok(Verdict::fails(c));
        }
    }
    // empirical: liminf along probe subsequences
    let probes: Vec<(String, Vec<usize>)> = std::iter::once(("2^t".to_string(), (0..63).map(|t| 1usize << t).collect()))
        .chain([2usize, 3, 5, 7].into_iter().map(|d| (format!("{d}i"), (1..=n / d).map(|i| d * i).collect())))
        .chain([2usize, 3].into_iter().map(|d| (format!("{d}i+1"), (0..n / d).map(|i| d * i + 1).collect())))
        .collect();
    for m in 1..=model.levels() {
        let ok = probes.iter().all(|(_, seq)| {
            let within: Vec<usize> = seq.iter().copied().filter(|&j| j <= n).collect();
            let tail = &within[within.len() / 2..];
            tail.iter().map(|&j| model.u(m, 1, j)).fold(f64::INFINITY, f64::min) < log_eps(8)
        });
        if ok {
            let mut c = cert(model, None, "probe-subsequences");
            c.level = Some(m);
            return Ok(Verdict::empirical(c).with_note(format!(
                "probes: {}",
                probes.iter().map(|p| p.0.as_str()).collect::<Vec<_>>().join(", ")
            )));
        }
    }
    Ok(Verdict::undecided("some probe subsequence stays above 2^-8").with_window(model.window()))
}

fn partial_sums(model: &Model, m: usize, p: f64, terms: usize) -> Vec<f64> {
    let mut acc = LogSum::default();
    (1..=terms)
        .map(|j| {
            acc.push(p * model.u(m, 1, j));
            acc.value()
        })
        .collect()
}

/// `log` of a bound for `Σ_{j > J} (u^{(m)}_j)^p`.
pub(crate) fn tail_bound(model: &Model, tail: &TailBound, m: usize, p: f64, terms: usize) -> Option<f64> {
    match tail {
        TailBound::Ratio { log_q, .. } => {
            let lq = log_q(m, p, terms);
            (lq < 0.0).then(|| p * model.u(m, 1, terms) + lq - (-lq.exp()).ln_1p())
        }
        TailBound::PowerLaw { log_c, s } => {
            let sp = s(m) * p;
            (sp > 1.0).then(|| p * log_c(m) + (1.0 - sp) * (terms as f64).ln() - (sp - 1.0).ln())
        }
    }
}

/// `log Σ_{k=K0+1}^{K} 2^{k-1} a_{2^k}`, stopping once it reaches `target`.
pub(crate) fn condensation(
    at_power_of_two: &crate::hints::Bound2,
    m: usize,
    p: f64,
    monotone_from: usize,
    target: f64,
) -> (f64, u32) {
    let k0 = usize::BITS - monotone_from.max(1).leading_zeros();
    let mut acc = LogSum::default();
    let mut k = k0 + 1;
    while k <= 4096 {
        acc.push((k - 1) as f64 * LN_2 + p * at_power_of_two(m, k as usize));
        if acc.value() >= target {
            break;
        }
        k += 1;
    }
    (acc.value(), k.min(4096))
}

/// Divergence target `log 1000`.
pub const DIVERGENCE_TARGET: f64 = 6.907_755_278_982_137;

pub fn check_chaotic(model: &Model) -> Result<Verdict> {
    if model.graded() {
        return Ok(Verdict::undecided("chaos is not decided for graded spaces").with_window(model.window()));
    }
    let n = model.n();
    let p = match model.p {
        Exponent::C0 => {
            for h in model.hints() {
                match h {
                    Hint::LimitZero { level, .. } => {
                        let mut c = cert(model, Some(h), "limit-zero");
                        c.level = Some(*level);
                        c.witness_indices = thresholds(model, *level, 1..=n);
                        return Ok(Verdict::holds(c));
                    }
                    Hint::BoundedBelow { eps_log, .. } => {
                        let mut c = cert(model, Some(h), "bounded-below");
                        c.level_bounds = (1..=model.levels()).map(|m| (m, eps_log(m))).collect();
                        return Ok(Verdict::fails(c));
                    }
                    _ => {}
                }
            }
            return Ok(Verdict::undecided("no decay hint for the c0 case").with_window(model.window()));
        }
        Exponent::Finite(p) => p,
    };
    for h in model.hints() {
        if let Hint::Summable { from_level, tail } = h {
            let terms = match tail {
                TailBound::Ratio { from, .. } => model.bounds.series_terms.max(*from),
                TailBound::PowerLaw { .. } => model.bounds.series_terms,
            };
            let mut c = cert(model, Some(h), "summable");
            c.level = Some(*from_level);
            for m in *from_level..=model.levels().max(*from_level) {
                let Some(tb) = tail_bound(model, tail, m, p, terms) else { break };
                c.series.push(SeriesCertificate {
                    level: m,
                    p,
                    kind: match tail {
                        TailBound::Ratio { .. } => "ratio".into(),
                        TailBound::PowerLaw { .. } => "power-law".into(),
                    },
                    log_partial_sums: partial_sums(model, m, p, terms),
                    log_tail_bound: Some(tb),
                    log_lower_bound: None,
                    dyadic_exponent: None,
                });
            }
            if !c.series.is_empty() {
                return Ok(Verdict::holds(c));
            }
        }
    }
    for h in model.hints() {
        match h {
            Hint::Divergent { monotone_from, at_power_of_two } => {
                let mut c = cert(model, Some(h), "condensation");
                for m in 1..=model.levels() {
                    let (lb, k) = condensation(at_power_of_two, m, p, *monotone_from, DIVERGENCE_TARGET);
                    if lb < DIVERGENCE_TARGET {
                        return Ok(Verdict::undecided(format!("condensation sum at level {m} stays below 1000"))
                            .with_window(model.window()));
                    }
                    c.series.push(SeriesCertificate {
                        level: m,
                        p,
                        kind: "condensation".into(),
                        log_partial_sums: Vec::new(),
                        log_tail_bound: None,
                        log_lower_bound: Some(lb),
                        dyadic_exponent: Some(k),
                    });
                }
                return Ok(Verdict::fails(c));
            }
            Hint::BoundedBelow { eps_log, .. } => {
                let mut c = cert(model, Some(h), "bounded-below");
                c.level_bounds = (1..=model.levels()).map(|m| (m, eps_log(m))).collect();
                return Ok(Verdict::fails(c));
            }
            _ => {}
        }
    }
    // empirical: partial sums stabilize between n/2 and n
    for m in 1..=model.levels() {
        let s = partial_sums(model, m, p, n);
        if s[n - 1] - s[n / 2 - 1] < 1e-6 {
            let mut c = cert(model, None, "partial-sums");
            c.level = Some(m);
            c.series.push(SeriesCertificate {
                level: m,
                p,
                kind: "window".into(),
                log_partial_sums: vec![s[n / 2 - 1], s[n - 1]],
                log_tail_bound: None,
                log_lower_bound: None,
                dyadic_exponent: None,
            });
            return Ok(Verdict::empirical(c));
        }
    }
    Ok(Verdict::undecided("partial sums still growing at the window edge").with_window(model.window()))
}

/// Gap profile `(t, g)` of `{u^{(level)} < 2^{-t}}` while the set is nonempty on the window.
pub(crate) fn gap_profile(model: &Model, level: usize, max_t: u32) -> Vec<(u32, usize)> {
    let n = model.n();
    let row = model.row(level, 1);
    let mut out = Vec::new();
    for t in 1..=max_t {
        let members = (1..=n).filter(|&j| row[j] < log_eps(t));
        let set = IndexWindowSet::new(1, n, members).expect("window starts at 1");
        match syndetic_scan(&set) {
            Some(s) if !s.tail_inconclusive() => out.push((t, s.bound)),
            _ => break,
        }
    }
    out
}

pub fn check_ergodic_sufficient(model: &Model) -> Result<Verdict> {
    if model.graded() {
        return Ok(Verdict::undecided("ergodicity is not decided for graded spaces").with_window(model.window()));
    }
    let n = model.n();
    for h in model.hints() {
        match h {
            Hint::DyadicSublevel { level, shift } => {
                let mut c = cert(model, Some(h), "dyadic-sublevel");
                c.level = Some(*level);
                c.gaps = gap_profile(model, *level, model.bounds.eps_floor);
                for &(t, g) in &c.gaps {
                    if g >= 1usize << (t + shift).min(62) {
                        return Err(reject(h, format!("(t={t}): gap {g}")));
                    }
                }
                return Ok(Verdict::holds(c));
            }
            Hint::LimitZero { level, .. } => {
                let mut c = cert(model, Some(h), "cofinite");
                c.level = Some(*level);
                c.gaps = gap_profile(model, *level, model.bounds.eps_floor);
                return Ok(Verdict::holds(c));
            }
            _ => {}
        }
    }
    for h in model.hints() {
        if let Hint::HighIntervals { eps_log, intervals } = h {
            let mut c = cert(model, Some(h), "sufficient-condition");
            for m in 1..=model.levels() {
                let eps = eps_log(m);
                c.level_bounds.push((m, eps));
                for i in 1..=LIST_CAP {
                    let (a, b) = intervals(m, i);
                    if b > n {
                        break;
                    }
                    c.intervals.push((m, a, b));
                }
            }
            return Ok(Verdict::fails(c).with_note("refutes the sufficient condition only"));
        }
    }
    if let Some(v) = bounded_below_everywhere(model, "sufficient-condition") {
        return Ok(v.with_note("refutes the sufficient condition only"));
    }
    // empirical: gap bounds stable between n/2 and n
    for m in 1..=model.levels() {
        let row = model.row(m, 1);
        let stable = (1..=model.bounds.eps_floor.min(12)).all(|t| {
            let g = |hi: usize| {
                let set = IndexWindowSet::new(1, hi, (1..=hi).filter(|&j| row[j] < log_eps(t))).expect("window");
                syndetic_scan(&set).filter(|s| !s.growing_gaps && !s.tail_inconclusive()).map(|s| s.bound)
            };
            matches!((g(n / 2), g(n)), (Some(a), Some(b)) if b <= a)
        });
        if stable {
            let mut c = cert(model, None, "window-gaps");
            c.level = Some(m);
            c.gaps = gap_profile(model, m, 12);
            return Ok(Verdict::empirical(c));
        }
    }
    Ok(Verdict::undecided("sublevel gaps not stable across windows").with_window(model.window()))
}
