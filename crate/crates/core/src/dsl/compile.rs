use std::collections::HashMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::ast::*;
use super::eval::{is_rational, EvalError, Evaluator, Mode};
use super::Diagnostic;
use crate::classifier::SpaceSpec;
use crate::conjugacy::WeightSequence;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::family::{probe_indices, IndexKind, WeightFamily};
use crate::hints::{bound2, check_all, level_count, level_fn, seq2_fn, Hint, TailBound};
use crate::symbol::{snake_symbol, Symbol};
use crate::verdict::Window;

pub const SYMBOL_BUILTINS: &[&str] = &["successor", "snake"];

/// Probe window for positivity and hint sampling.
pub const PROBE_WINDOW: Window = Window { levels: 8, grades: 8, n: (1 << 20) + 1 };

pub struct HintKey {
    pub name: &'static str,
    pub required: bool,
    /// Constant integer argument with this default; `None` marks an expression in `m`.
    pub default: Option<u64>,
}

pub struct HintSchema {
    pub name: &'static str,
    pub keys: &'static [HintKey],
}

const fn int_key(name: &'static str, default: u64) -> HintKey {
    HintKey { name, required: false, default: Some(default) }
}

const fn fn_key(name: &'static str) -> HintKey {
    HintKey { name, required: true, default: None }
}

pub const HINTS: &[HintSchema] = &[
    HintSchema { name: "bounded_below", keys: &[fn_key("eps")] },
    HintSchema { name: "decreasing_level", keys: &[] },
    HintSchema { name: "dyadic_sublevel", keys: &[int_key("level", 1), int_key("shift", 0)] },
    HintSchema { name: "increasing_grade", keys: &[] },
    HintSchema { name: "limit_zero", keys: &[int_key("level", 1)] },
    HintSchema { name: "power_bound", keys: &[fn_key("c"), fn_key("s"), int_key("from_level", 1)] },
    HintSchema { name: "shift_bound", keys: &[fn_key("c"), int_key("offset", 1)] },
    HintSchema { name: "sublevel_run_bound", keys: &[fn_key("eps"), fn_key("max_run")] },
    HintSchema { name: "tail_decreasing", keys: &[int_key("level", 1), int_key("from", 1)] },
];

pub fn hint_schema(name: &str) -> Option<&'static HintSchema> {
    HINTS.iter().find(|h| h.name == name)
}

fn diag(at: At, msg: impl Into<String>) -> Error {
    Error::Parse(Diagnostic::new(at.span(), msg))
}

fn eval_err(e: EvalError) -> Error {
    Error::Parse(e.diagnostic())
}

/// Builds a [`SpaceSpec`] from a parsed spec, sampling positivity and declared hints on the probe set.
pub fn compile(ast: &SpecAst) -> Result<SpaceSpec> {
    let mut family = None;
    let mut weights = None;
    let mut symbol = None;
    for d in &ast.decls {
        match d {
            Decl::Family(f) => {
                if family.replace(f).is_some() {
                    return Err(diag(f.at, "only one family per spec"));
                }
            }
            Decl::Weights(w) => {
                if weights.replace(w).is_some() {
                    return Err(diag(w.at, "only one weights declaration per spec"));
                }
            }
            Decl::Symbol(s) => {
                if symbol.replace(s).is_some() {
                    return Err(diag(s.at, "only one symbol declaration per spec"));
                }
            }
        }
    }
    let Some(fam) = family else {
        let at = ast.decls.first().map(|d| match d {
            Decl::Family(f) => f.at,
            Decl::Weights(w) => w.at,
            Decl::Symbol(s) => s.at,
        });
        return Err(diag(at.unwrap_or_default(), "a spec needs a family declaration"));
    };

    let psi = symbol.map(compile_symbol).transpose()?;
    let index_kind = psi.as_ref().map_or(IndexKind::Linear, Symbol::index_kind);
    let p = match &fam.p {
        None => Exponent::Finite(2.0),
        Some(PValue::C0) => Exponent::C0,
        Some(PValue::Finite(r)) => Exponent::finite(r.to_f64().unwrap_or(f64::INFINITY)).map_err(|e| diag(fam.at, e.to_string()))?,
    };

    let family = compile_family(fam, index_kind)?;
    let mut spec = SpaceSpec::plain(fam.name.clone(), family, p);
    if let Some(w) = weights {
        spec = spec.with_weights(compile_weights(w)?);
    }
    if let Some(psi) = psi {
        spec = spec.with_symbol(psi);
    }
    if let Some(l) = &fam.lambda {
        spec = spec.with_lambda(l.clone());
    }
    spec.validate()?;
    Ok(spec)
}

fn compile_family(fam: &FamilyDecl, index_kind: IndexKind) -> Result<WeightFamily> {
    let body = Arc::new(fam.body.clone());
    let graded = body.mentions(Var::K);
    let float = Arc::new(Evaluator::new(body.clone(), Mode::Float));
    let grades = if graded { PROBE_WINDOW.grades } else { 1 };
    let probes = probe_indices(PROBE_WINDOW.n);
    for m in 1..=PROBE_WINDOW.levels {
        for k in 1..=grades {
            for &j in &probes {
                float.eval_log(m, k, j).map_err(eval_err)?;
            }
        }
    }
    let f = float.clone();
    let mut family = WeightFamily::from_log_fn(fam.name.clone(), index_kind, graded, move |m, k, j| {
        f.eval_log(m, k, j).unwrap_or(f64::NAN)
    });
    if is_rational(&body) {
        let exact = Evaluator::new(body.clone(), Mode::Exact);
        family = family.with_exact(move |m, k, j| exact.eval_exact(m, k, j).ok());
    }
    let hints = fam.hints.iter().map(compile_hint).collect::<Result<Vec<_>>>()?;
    check_all(&family, &hints, PROBE_WINDOW, Exponent::Finite(2.0))?;
    Ok(family.with_hints(hints))
}

fn const_arg(h: &HintDecl, key: &HintKey) -> Result<usize> {
    let Some((_, e)) = h.args.iter().find(|(k, _)| k == key.name) else {
        return Ok(key.default.unwrap_or(0) as usize);
    };
    let bad = || diag(e.at, format!("`{}` must be a nonnegative integer constant", key.name));
    if e.mentions(Var::M) {
        return Err(bad());
    }
    let v = Evaluator::new(Arc::new(e.clone()), Mode::Exact).eval_exact(1, 1, 1).map_err(eval_err)?;
    if !v.is_integer() || v.is_negative() {
        return Err(bad());
    }
    v.to_integer().to_usize().ok_or_else(bad)
}

/// `m ↦ log f(m)` for a positive expression in `m`, checked on levels up to the probe window.
type LevelArg<T> = Arc<dyn Fn(usize) -> T + Send + Sync>;

fn level_arg(h: &HintDecl, key: &str) -> Result<(String, LevelArg<f64>)> {
    let (_, e) = h.args.iter().find(|(k, _)| k == key).expect("required arguments checked by the parser");
    let ev = Arc::new(Evaluator::new(Arc::new(e.clone()), Mode::Float));
    for m in 1..=PROBE_WINDOW.levels {
        ev.eval_log(m, 1, 1).map_err(|err| diag(e.at, format!("`{key}`: {}", err.message)))?;
    }
    let desc = super::format::format_expr(e);
    Ok((desc, Arc::new(move |m| ev.eval_log(m, 1, 1).unwrap_or(f64::NAN))))
}

/// An argument in `m` that must be a nonnegative integer at every probed level.
fn count_arg(h: &HintDecl, key: &str) -> Result<(String, LevelArg<usize>)> {
    let (_, e) = h.args.iter().find(|(k, _)| k == key).expect("required arguments checked by the parser");
    let ev = Arc::new(Evaluator::new(Arc::new(e.clone()), Mode::Exact));
    let count = |m: usize| ev.eval_exact(m, 1, 1).ok().filter(|r| r.is_integer() && !r.is_negative()).and_then(|r| r.to_integer().to_usize());
    for m in 1..=PROBE_WINDOW.levels {
        count(m).ok_or_else(|| diag(e.at, format!("`{key}` is not a nonnegative integer at m={m}")))?;
    }
    let desc = super::format::format_expr(e);
    let f = ev.clone();
    Ok((desc, Arc::new(move |m| f.eval_exact(m, 1, 1).ok().and_then(|r| r.to_integer().to_usize()).unwrap_or(0))))
}

fn compile_hint(h: &HintDecl) -> Result<Hint> {
    let schema = hint_schema(&h.name).ok_or_else(|| diag(h.at, format!("unknown hint `{}`", h.name)))?;
    let ints: HashMap<&str, usize> =
        schema.keys.iter().filter(|k| k.default.is_some()).map(|k| const_arg(h, k).map(|v| (k.name, v))).collect::<Result<_>>()?;
    let level = || {
        let l = ints["level"];
        if l == 0 {
            Err(diag(h.at, "levels start at 1"))
        } else {
            Ok(l)
        }
    };
    Ok(match h.name.as_str() {
        "decreasing_level" => Hint::DecreasingInLevel,
        "increasing_grade" => Hint::IncreasingInGrade,
        "limit_zero" => Hint::LimitZero { level: level()?, beyond: None },
        "tail_decreasing" => Hint::TailMonotone { level: level()?, from: ints["from"].max(1) },
        "dyadic_sublevel" => Hint::DyadicSublevel { level: level()?, shift: ints["shift"] as u32 },
        "bounded_below" => {
            let (d, eps) = level_arg(h, "eps")?;
            Hint::BoundedBelow { along: None, uniform: true, eps_log: level_fn(&format!("log({d})"), move |m| eps(m)) }
        }
        "power_bound" => {
            let (dc, c) = level_arg(h, "c")?;
            let (ds, s) = level_arg(h, "s")?;
            Hint::Summable {
                from_level: ints["from_level"].max(1),
                tail: TailBound::PowerLaw {
                    log_c: level_fn(&format!("log({dc})"), move |m| c(m)),
                    s: level_fn(&ds, move |m| s(m).exp()),
                },
            }
        }
        "shift_bound" => {
            let (dc, c) = level_arg(h, "c")?;
            Hint::ContinuityBound {
                level_offset: ints["offset"],
                grade: seq2_fn("k", |_, k| k),
                log_c: bound2(&format!("log({dc})"), move |m, _| c(m)),
            }
        }
        "sublevel_run_bound" => {
            let (d, eps) = level_arg(h, "eps")?;
            let (dr, run) = count_arg(h, "max_run")?;
            Hint::SublevelRunBound { eps_log: level_fn(&format!("log({d})"), move |m| eps(m)), max_run: level_count(&dr, move |m| run(m)) }
        }
        other => return Err(diag(h.at, format!("unknown hint `{other}`"))),
    })
}

fn compile_weights(w: &WeightsDecl) -> Result<WeightSequence> {
    let body = Arc::new(w.body.clone());
    let float = Evaluator::new(body.clone(), Mode::Float);
    for j in probe_indices(PROBE_WINDOW.n) {
        let v = float.eval(1, 1, j).map_err(eval_err)?;
        if v.is_zero() {
            return Err(diag(w.body.at, format!("zero weight at probe j={j}")));
        }
    }
    if is_rational(&body) {
        let exact = Evaluator::new(body, Mode::Exact);
        Ok(WeightSequence::from_exact(w.name.clone(), move |j| exact.eval_exact(1, 1, j).unwrap_or_else(|_| BigRational::zero())))
    } else {
        Ok(WeightSequence::from_log(w.name.clone(), move |j| float.eval(1, 1, j).map(|v| v.slog().1).unwrap_or(f64::NAN)))
    }
}

fn compile_symbol(s: &SymbolDecl) -> Result<Symbol> {
    let arg_int = |i: usize, default: usize| -> Result<usize> {
        match s.args.get(i) {
            None => Ok(default),
            Some(r) if r.is_integer() && r.is_positive() => {
                r.to_integer().to_usize().ok_or_else(|| diag(s.at, "argument out of range"))
            }
            Some(_) => Err(diag(s.at, format!("`{}` takes positive integer arguments", s.builtin))),
        }
    };
    match s.builtin.as_str() {
        "successor" => {
            if !s.args.is_empty() {
                return Err(diag(s.at, "`successor` takes no arguments"));
            }
            Ok(Symbol::successor())
        }
        "snake" => {
            if s.args.len() > 1 {
                return Err(diag(s.at, "`snake` takes at most one argument"));
            }
            let e = arg_int(0, 2)? as u32;
            snake_symbol(move |k| k.saturating_pow(e)).map_err(|err| diag(s.at, err.to_string()))
        }
        other => Err(diag(s.at, format!("unknown symbol builtin `{other}`"))),
    }
}
