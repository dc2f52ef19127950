use std::f64::consts::LN_2;

use super::checks::{condensation, continuity_sup, gap_profile, tail_bound};
use super::{Model, Property, Report, SpaceSpec};
use crate::error::{Error, Result};
use crate::hints::{le, Hint};
use crate::sets::{longest_run, IndexWindowSet};
use crate::verdict::{Certificate, Status};
use crate::weight::LogSum;

fn fail(p: Property, what: impl Into<String>) -> Error {
    Error::Precondition(format!("{p} certificate does not replay: {}", what.into()))
}

/// Re-verifies every certified verdict of `report` from its certificate data alone.
pub fn recheck(report: &Report, spec: &SpaceSpec) -> Result<()> {
    let model = spec.model()?;
    for (&prop, v) in &report.verdicts {
        if !v.status.is_certified() {
            continue;
        }
        recheck_one(&model, prop, v.status, &v.certificate)?;
    }
    Ok(())
}

fn recheck_one(model: &Model, prop: Property, status: Status, c: &Certificate) -> Result<()> {
    let n = c.window.map_or(model.n(), |w| w.n.min(model.n()));
    for s in &c.selections {
        let sup = continuity_sup(model, (s.m, s.k, s.n, s.l), n);
        if !le(sup, s.log_c) {
            return Err(fail(prop, format!("selection {s:?} has sup {sup}")));
        }
    }
    if let Some(level) = c.level {
        for (t, &j) in c.witness_indices.iter().enumerate() {
            if !(model.u_all_grades(level, j) < -((t + 1) as f64) * LN_2) {
                return Err(fail(prop, format!("threshold witness j={j} for t={}", t + 1)));
            }
        }
    }
    if !c.interval_bounds.is_empty() {
        if c.interval_bounds.len() != c.intervals.len() {
            return Err(fail(prop, "interval bounds misaligned"));
        }
        for (&(m, a, b), &bd) in c.intervals.iter().zip(&c.interval_bounds) {
            if let Some(j) = (a..=b).find(|&j| !le(model.u_all_grades(m, j), bd)) {
                return Err(fail(prop, format!("interval ({a},{b}) exceeds its bound at {j}")));
            }
        }
        let first = c.interval_bounds.first().copied().unwrap_or(0.0);
        let last = c.interval_bounds.last().copied().unwrap_or(0.0);
        if c.interval_bounds.len() > 1 && last >= first {
            return Err(fail(prop, "interval bounds do not decrease"));
        }
    } else if status == Status::CertifiedFails {
        // intervals on which the weights stay above the level bound
        for &(m, a, b) in &c.intervals {
            let eps = lookup(&c.level_bounds, m).ok_or_else(|| fail(prop, format!("no bound for level {m}")))?;
            let high = |j: usize| {
                if a == b {
                    le(eps, model.u(m, 1, j))
                } else {
                    model.u(m, 1, j) > eps
                }
            };
            if let Some(j) = (a..=b).find(|&j| !high(j)) {
                return Err(fail(prop, format!("index {j} of ({a},{b}) at level {m} below the bound")));
            }
        }
    }
    if !c.run_bounds.is_empty() && status == Status::CertifiedFails {
        let hi = n.min(1 << 14);
        for &(m, run) in &c.run_bounds {
            let eps = lookup(&c.level_bounds, m).ok_or_else(|| fail(prop, format!("no bound for level {m}")))?;
            let set = IndexWindowSet::new(1, hi, (1..=hi).filter(|&j| model.u(m, 1, j) < eps)).expect("window");
            let measured = longest_run(&set).0;
            if measured != run {
                return Err(fail(prop, format!("level {m}: run {measured} recorded as {run}")));
            }
        }
    }
    if !c.gaps.is_empty() {
        let level = c.level.ok_or_else(|| fail(prop, "gaps without a level"))?;
        let max_t = c.gaps.last().map_or(0, |g| g.0);
        let measured = gap_profile(model, level, max_t);
        if measured[..c.gaps.len().min(measured.len())] != c.gaps[..] {
            return Err(fail(prop, "gap profile differs"));
        }
    }
    for s in &c.series {
        match s.kind.as_str() {
            "ratio" | "power-law" => {
                let mut acc = LogSum::default();
                for (j, &ps) in s.log_partial_sums.iter().enumerate() {
                    acc.push(s.p * model.u(s.level, 1, j + 1));
                    if (acc.value() - ps).abs() > 1e-9 * (1.0 + ps.abs()) {
                        return Err(fail(prop, format!("partial sum {} at level {}", j + 1, s.level)));
                    }
                }
                let tail = model.hints().iter().find_map(|h| match h {
                    Hint::Summable { tail, .. } => Some(tail),
                    _ => None,
                });
                let expected = tail.and_then(|t| tail_bound(model, t, s.level, s.p, s.log_partial_sums.len()));
                if expected.is_none() || !le(expected.unwrap(), s.log_tail_bound.unwrap_or(f64::NEG_INFINITY)) {
                    return Err(fail(prop, format!("tail bound at level {}", s.level)));
                }
            }
            "condensation" => {
                let (mf, at) = model
                    .hints()
                    .iter()
                    .find_map(|h| match h {
                        Hint::Divergent { monotone_from, at_power_of_two } => Some((*monotone_from, at_power_of_two)),
                        _ => None,
                    })
                    .ok_or_else(|| fail(prop, "condensation without a divergence hint"))?;
                let claimed = s.log_lower_bound.unwrap_or(f64::INFINITY);
                let (lb, _) = condensation(at, s.level, s.p, mf, claimed);
                if !le(claimed, lb) {
                    return Err(fail(prop, format!("condensation bound at level {}", s.level)));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn lookup(bounds: &[(usize, f64)], m: usize) -> Option<f64> {
    bounds.iter().find(|b| b.0 == m).map(|b| b.1)
}
