//! Built-in example spaces with recorded expected verdicts.

pub mod families;
mod search;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::classifier::{classify_report, Bounds, Expectations, Expected, Report, SpaceSpec};
use crate::conjugacy::WeightSequence;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::family::WeightFamily;
use crate::hints::{le, Hint};
use crate::scalar::{ln_abs_ratio, parse_ratio};
use crate::symbol::snake_symbol;
use crate::verdict::{Certificate, SeriesCertificate, Verdict};
use crate::weight::LogSum;
use crate::Rational;

pub use families::{Alpha, BlockSchedule, SnakeGrading};
pub use search::{search_nuclear_ergodic, SearchHit, SearchSummary};

/// A gallery listing row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub params: &'static str,
    pub note: &'static str,
}

pub const ENTRIES: &[GalleryEntry] = &[
    GalleryEntry {
        name: "power-series-dual",
        params: "alpha in {j, log, loglog}, default j",
        note: "dual of a power series space of infinite type, weights e^{-m alpha_j}",
    },
    GalleryEntry { name: "s-prime", params: "", note: "slowly increasing sequences, weights j^{-m}" },
    GalleryEntry { name: "annihilation", params: "", note: "weight w_j = sqrt(j) on s', the Hermite model of the annihilation operator" },
    GalleryEntry { name: "prop4-1", params: "", note: "dyadic min-recursion: ergodic sufficient condition holds, not hypercyclic" },
    GalleryEntry { name: "prop4-2", params: "", note: "nuclear step space: transitive, not hypercyclic" },
    GalleryEntry { name: "prop4-3", params: "", note: "block bijection: mixing, ergodic sufficient condition fails" },
    GalleryEntry { name: "snake-lp", params: "lambda with |lambda| > 1, default 2", note: "snake shift on the direct sum of l_p" },
    GalleryEntry { name: "snake-s", params: "lambda with |lambda| > 1, default 2", note: "snake shift on the direct sum of s" },
    GalleryEntry { name: "constant", params: "", note: "v = 1 at every level" },
];

/// Names with their canonical parameters, one per expectation record.
pub fn canonical_names() -> Vec<String> {
    let mut out: Vec<String> = ["j", "log", "loglog"].iter().map(|a| format!("power-series-dual({a})")).collect();
    out.extend(ENTRIES.iter().filter(|e| e.name != "power-series-dual").map(|e| e.name.to_string()));
    out
}

fn split_name(name: &str) -> Result<(&str, Option<&str>)> {
    let name = name.trim();
    match name.find('(') {
        None => Ok((name, None)),
        Some(i) if name.ends_with(')') => Ok((&name[..i], Some(name[i + 1..name.len() - 1].trim()))),
        Some(_) => Err(Error::Config(format!("malformed entry name `{name}`"))),
    }
}

/// The space behind `name` (optionally `name(param)`) with its default exponent.
pub fn builtin(name: &str) -> Result<SpaceSpec> {
    let (base, _) = split_name(name)?;
    let p = if base.starts_with("snake") { Exponent::Finite(1.0) } else { Exponent::Finite(2.0) };
    builtin_with_p(name, p)
}

pub fn builtin_with_p(name: &str, p: Exponent) -> Result<SpaceSpec> {
    let (base, param) = split_name(name)?;
    let pf = match p {
        Exponent::Finite(p) => Some(p),
        Exponent::C0 => None,
    };
    let no_param = |spec: SpaceSpec| match param {
        Some(x) if !x.is_empty() => Err(Error::Config(format!("entry `{base}` takes no parameter, got `{x}`"))),
        _ => Ok(spec),
    };
    let spec = match base {
        "power-series-dual" => {
            let alpha: Alpha = param.unwrap_or("j").parse()?;
            SpaceSpec::plain(format!("power-series-dual({alpha})"), families::power_series_family(alpha), p)
                .with_hints(families::power_series_hints(alpha, pf))
        }
        "s-prime" => no_param(
            SpaceSpec::plain("s-prime", families::s_prime_family(), p).with_hints(families::s_prime_hints(pf)),
        )?,
        "annihilation" => no_param(
            SpaceSpec::plain("annihilation", families::s_prime_family(), p)
                .with_weights(WeightSequence::sqrt_index())
                .with_hints(families::annihilation_hints()),
        )?,
        "prop4-1" => no_param(SpaceSpec::plain("prop4-1", families::prop41_family(), p).with_hints(families::prop41_hints()))?,
        "prop4-2" => no_param(SpaceSpec::plain("prop4-2", families::prop42_family(), p).with_hints(families::prop42_hints()))?,
        "prop4-3" => no_param(SpaceSpec::plain("prop4-3", families::prop43_family(), p).with_hints(families::prop43_hints()))?,
        "snake-lp" | "snake-s" => {
            let lambda = match param {
                Some(x) => parse_ratio(x).ok_or_else(|| Error::Config(format!("invalid lambda `{x}`")))?,
                None => Rational::from_integer(2.into()),
            };
            if lambda.abs() <= Rational::one() {
                return Err(Error::Config(format!("snake entries need |lambda| > 1, got {lambda}")));
            }
            let g = if base == "snake-lp" { SnakeGrading::Lp } else { SnakeGrading::S };
            let psi = snake_symbol(families::snake_growth)?;
            let hints = families::snake_hints(g, &psi, ln_abs_ratio(&lambda));
            SpaceSpec::plain(base, families::snake_family(g), p)
                .with_symbol(psi)
                .with_lambda(lambda)
                .with_hints(hints)
        }
        "constant" => no_param(
            SpaceSpec::plain("constant", families::constant_family(), p).with_hints(families::constant_hints()),
        )?,
        other => return Err(Error::UnknownEntry(other.to_string())),
    };
    let key = expectation_key(&spec.name);
    Ok(match expectations(&key) {
        Some(e) => spec.with_expectations(e.verdicts.clone()),
        None => spec,
    })
}

fn expectation_key(name: &str) -> String {
    match split_name(name) {
        Ok((base, _)) if base.starts_with("snake") => base.to_string(),
        _ => name.to_string(),
    }
}

/// Expected verdicts of one entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryExpectations {
    pub verdicts: Expectations,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nuclearity: Option<Expected>,
}

#[derive(Debug, Deserialize)]
struct Fixture {
    schema: u32,
    entries: BTreeMap<String, EntryExpectations>,
}

const FIXTURE: &str = include_str!("../../fixtures/expectations.json");

fn fixture() -> &'static BTreeMap<String, EntryExpectations> {
    static F: OnceLock<BTreeMap<String, EntryExpectations>> = OnceLock::new();
    F.get_or_init(|| {
        let f: Fixture = serde_json::from_str(FIXTURE).expect("expectation fixture parses");
        assert_eq!(f.schema, 1, "expectation fixture schema");
        f.entries
    })
}

/// Recorded expectations for a canonical entry name.
pub fn expectations(name: &str) -> Option<&'static EntryExpectations> {
    fixture().get(&expectation_key(name))
}

/// `Σ_j v^{(m+1)}_j / v^{(m)}_j < ∞` for every level, from ratio hints of `f`.
pub fn nuclearity_ratio_test(f: &WeightFamily, bounds: &Bounds) -> Verdict {
    let w = bounds.window;
    let ratio = |m: usize, j: usize| f.log_weight(m + 1, 1, j) - f.log_weight(m, 1, j);
    let mut c = Certificate { window: Some(w), ..Default::default() };
    for h in f.hints() {
        match h {
            Hint::NuclearRatio { log_bound, sum_bound } => {
                c.hints.push(h.label());
                c.label = Some("nuclear-ratio".into());
                for m in 1..=w.levels {
                    let mut acc = LogSum::default();
                    for j in 1..=w.n {
                        let r = ratio(m, j);
                        if !le(r, log_bound(j)) {
                            return Verdict::undecided(format!("ratio hint contradicted at (m={m}, j={j})")).with_window(w);
                        }
                        acc.push(r);
                    }
                    if acc.value() > sum_bound.ln() + 1e-12 {
                        return Verdict::undecided(format!("ratio sum at level {m} exceeds {sum_bound}")).with_window(w);
                    }
                    c.series.push(SeriesCertificate {
                        level: m,
                        p: 1.0,
                        kind: "nuclear-ratio".into(),
                        log_partial_sums: vec![acc.value()],
                        log_tail_bound: Some(sum_bound.ln()),
                        log_lower_bound: None,
                        dyadic_exponent: None,
                    });
                }
                return Verdict::holds(c);
            }
            Hint::NuclearDivergent { log_c } => {
                c.hints.push(h.label());
                c.label = Some("harmonic-comparison".into());
                for m in 1..=w.levels {
                    let mut acc = LogSum::default();
                    for j in 1..=w.n {
                        let r = ratio(m, j);
                        if !le(log_c - (j as f64).ln(), r) {
                            return Verdict::undecided(format!("ratio lower bound contradicted at (m={m}, j={j})"))
                                .with_window(w);
                        }
                        acc.push(r);
                    }
                    c.series.push(SeriesCertificate {
                        level: m,
                        p: 1.0,
                        kind: "harmonic-comparison".into(),
                        log_partial_sums: vec![acc.value()],
                        log_tail_bound: None,
                        log_lower_bound: Some(acc.value()),
                        dyadic_exponent: None,
                    });
                }
                return Verdict::fails(c);
            }
            _ => {}
        }
    }
    Verdict::undecided("no ratio hint").with_window(w)
}

/// Outcome of comparing an entry against its recorded expectations.
#[derive(Clone, Debug, Serialize)]
pub struct ExpectationRun {
    pub name: String,
    pub report: Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nuclearity: Option<Verdict>,
    pub mismatches: Vec<String>,
}

impl ExpectationRun {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.report.lattice_consistent
    }
}

pub fn run_expectations(name: &str) -> Result<ExpectationRun> {
    run_spec_expectations(builtin(name)?)
}

pub fn run_spec_expectations(spec: SpaceSpec) -> Result<ExpectationRun> {
    let report = classify_report(&spec)?;
    let mut mismatches = report.mismatches.clone();
    let expected = expectations(&spec.name);
    let nuclearity = match expected.and_then(|e| e.nuclearity) {
        Some(e) => {
            let v = nuclearity_ratio_test(&spec.family, &spec.bounds);
            if !e.matches(v.status) {
                mismatches.push(format!("nuclearity: expected {e:?}, got {}", v.status));
            }
            Some(v)
        }
        None => None,
    };
    if expected.is_none() {
        mismatches.push(format!("no recorded expectations for `{}`", spec.name));
    }
    Ok(ExpectationRun { name: spec.name.clone(), report, nuclearity, mismatches })
}


/// `.kws` source of gallery entries that have a closed form in the DSL.
pub fn kws_source(name: &str) -> Option<&'static str> {
    match name {
        "s-prime" => Some(include_str!("../../fixtures/dsl/sprime.kws")),
        "prop4-1" => Some(include_str!("../../fixtures/dsl/p41.kws")),
        "prop4-2" => Some(include_str!("../../fixtures/dsl/p42.kws")),
        _ => None,
    }
}
