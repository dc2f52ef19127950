//! Weight-level decision procedures for the dynamics of `B_{w,ψ}`.

pub(crate) mod checks;
mod recheck;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::conjugacy::{conjugate_family, WeightSequence};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::family::WeightFamily;
use crate::hints::{check_all, Hint};
use crate::symbol::Symbol;
use crate::verdict::{Status, Verdict, Window};
use crate::Rational;

pub use checks::{
    check_chaotic, check_continuity, check_ergodic_sufficient, check_hypercyclic, check_mixing, check_transitive,
};
pub use recheck::recheck;

/// Scan limits shared by all checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub window: Window,
    /// ε-grid `2^{-t}` for `t = 1..=eps_floor`.
    pub eps_floor: u32,
    pub series_terms: usize,
    pub truncation: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { window: Window::default(), eps_floor: 40, series_terms: 200, truncation: 4096 }
    }
}

/// The properties decided by [`classify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Continuity,
    Transitive,
    Hypercyclic,
    Mixing,
    Chaotic,
    ErgodicSufficient,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Continuity,
        Property::Transitive,
        Property::Hypercyclic,
        Property::Mixing,
        Property::Chaotic,
        Property::ErgodicSufficient,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::Continuity => "continuity",
            Property::Transitive => "transitive",
            Property::Hypercyclic => "hypercyclic",
            Property::Mixing => "mixing",
            Property::Chaotic => "chaotic",
            Property::ErgodicSufficient => "ergodic-sufficient",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Property {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown property `{s}`")))
    }
}

/// Recorded outcome a gallery entry must reproduce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expected {
    Holds,
    Fails,
}

impl Expected {
    pub fn matches(self, status: Status) -> bool {
        match self {
            Expected::Holds => status == Status::CertifiedHolds,
            Expected::Fails => status == Status::CertifiedFails,
        }
    }
}

pub type Expectations = BTreeMap<Property, Expected>;

/// `λ B_{w,ψ}` acting on `k_p(V)`.
#[derive(Clone, Debug)]
pub struct SpaceSpec {
    pub name: String,
    pub family: WeightFamily,
    pub p: Exponent,
    pub w: WeightSequence,
    pub psi: Symbol,
    pub lambda: Rational,
    /// Hints about the transported weights `u`.
    pub hints: Vec<Hint>,
    pub bounds: Bounds,
    pub expectations: Option<Expectations>,
}

impl SpaceSpec {
    /// The plain backward shift on `k_p(V)`.
    pub fn plain(name: impl Into<String>, family: WeightFamily, p: Exponent) -> Self {
        SpaceSpec {
            name: name.into(),
            family,
            p,
            w: WeightSequence::unit(),
            psi: Symbol::successor(),
            lambda: Rational::one(),
            hints: Vec::new(),
            bounds: Bounds::default(),
            expectations: None,
        }
    }

    pub fn with_weights(mut self, w: WeightSequence) -> Self {
        self.w = w;
        self
    }

    pub fn with_symbol(mut self, psi: Symbol) -> Self {
        self.psi = psi;
        self
    }

    pub fn with_lambda(mut self, lambda: Rational) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_hints<I: IntoIterator<Item = Hint>>(mut self, hints: I) -> Self {
        self.hints.extend(hints);
        self
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.bounds.window = window;
        self
    }

    pub fn with_expectations(mut self, e: Expectations) -> Self {
        self.expectations = Some(e);
        self
    }

    /// The effective weight sequence `λ w`.
    pub fn effective_weights(&self) -> Result<WeightSequence> {
        self.w.scaled(&self.lambda)
    }

    pub fn validate(&self) -> Result<()> {
        self.p.validate()?;
        let w = self.bounds.window;
        if w.levels == 0 || w.grades == 0 || w.n < 16 {
            return Err(Error::Config(format!("window {w:?} too small")));
        }
        if self.family.index_kind() != self.psi.index_kind() {
            return Err(Error::Config("family and symbol index layouts differ".into()));
        }
        Ok(())
    }

    /// Transported family with all hints about it.
    pub fn transported(&self) -> Result<WeightFamily> {
        let f = conjugate_family(&self.family, &self.effective_weights()?, &self.psi, self.bounds.window.n + 2)?;
        Ok(f.with_hints(self.hints.iter().cloned()))
    }

    /// The same space written as the plain shift on the transported weights.
    pub fn to_plain(&self) -> Result<SpaceSpec> {
        let f = self.transported()?;
        let mut s = SpaceSpec::plain(format!("{}@plain", self.name), f, self.p);
        s.bounds = self.bounds;
        s.expectations = self.expectations.clone();
        Ok(s)
    }

    pub fn model(&self) -> Result<Model> {
        self.validate()?;
        Model::new(self.transported()?, self.p, self.bounds, Some(self.psi.clone()))
    }
}

type Row = Arc<Vec<f64>>;

/// The transported family with cached rows `j ↦ log u^{(m,k)}_j` on `[1, n+1]`.
pub struct Model {
    pub family: WeightFamily,
    pub p: Exponent,
    pub bounds: Bounds,
    pub symbol: Option<Symbol>,
    rows: Mutex<HashMap<(usize, usize), Row>>,
}

impl Model {
    pub fn new(family: WeightFamily, p: Exponent, bounds: Bounds, symbol: Option<Symbol>) -> Result<Self> {
        Ok(Model { family, p, bounds, symbol, rows: Mutex::new(HashMap::new()) })
    }

    pub fn window(&self) -> Window {
        self.bounds.window
    }

    pub fn n(&self) -> usize {
        self.bounds.window.n
    }

    pub fn levels(&self) -> usize {
        self.bounds.window.levels
    }

    pub fn grades(&self) -> usize {
        if self.family.is_graded() {
            self.bounds.window.grades
        } else {
            1
        }
    }

    pub fn graded(&self) -> bool {
        self.family.is_graded()
    }

    pub fn hints(&self) -> &[Hint] {
        self.family.hints()
    }

    pub fn row(&self, m: usize, k: usize) -> Row {
        let k = if self.graded() { k } else { 1 };
        if let Some(r) = self.rows.lock().expect("row cache").get(&(m, k)) {
            return r.clone();
        }
        let n = self.n();
        let mut v = Vec::with_capacity(n + 2);
        v.push(f64::NAN);
        v.extend((1..=n + 1).map(|j| self.family.log_weight(m, k, j)));
        let row = Arc::new(v);
        self.rows.lock().expect("row cache").insert((m, k), row.clone());
        row
    }

    /// `log u^{(m,k)}_j`.
    pub fn u(&self, m: usize, k: usize, j: usize) -> f64 {
        if j <= self.n() + 1 {
            self.row(m, k)[j]
        } else {
            self.family.log_weight(m, k, j)
        }
    }

    /// `max_{k ≤ K} log u^{(m,k)}_j`: small only if small for every grade.
    pub fn u_all_grades(&self, m: usize, j: usize) -> f64 {
        (1..=self.grades()).map(|k| self.u(m, k, j)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn check_hints(&self) -> Result<()> {
        check_all(&self.family, self.family.hints(), self.window(), self.p)
    }
}

/// Verdicts for every property plus consistency bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub space: String,
    pub p: String,
    pub window: Window,
    pub verdicts: BTreeMap<Property, Verdict>,
    pub lattice_consistent: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lattice_violations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectations_matched: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<String>,
    pub hints: Vec<String>,
}

pub const REPORT_SCHEMA: u32 = 1;

impl Report {
    pub fn verdict(&self, p: Property) -> &Verdict {
        &self.verdicts[&p]
    }

    pub fn status(&self, p: Property) -> Status {
        self.verdicts[&p].status
    }

    pub fn has_undecided(&self) -> bool {
        self.verdicts.values().any(|v| v.status == Status::Undecided)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Markdown rendering of the JSON document.
    pub fn to_markdown(&self) -> String {
        let doc: serde_json::Value = serde_json::from_str(&self.to_json()).expect("valid json");
        let mut out = format!("# {}\n\n", doc["space"].as_str().unwrap_or(""));
        out.push_str(&format!("- p: {}\n", doc["p"].as_str().unwrap_or("")));
        out.push_str(&format!("- window: {}\n", doc["window"]));
        out.push_str(&format!("- lattice consistent: {}\n", doc["lattice_consistent"]));
        if let Some(m) = doc.get("expectations_matched") {
            out.push_str(&format!("- expectations matched: {m}\n"));
        }
        out.push_str("\n| property | status | certificate |\n|---|---|---|\n");
        if let Some(vs) = doc["verdicts"].as_object() {
            for (name, v) in vs {
                let mut cert = v["certificate"].to_string();
                if cert.len() > 120 {
                    cert.truncate(117);
                    cert.push_str("...");
                }
                out.push_str(&format!(
                    "| {name} | {} | `{}` |\n",
                    v["status"].as_str().unwrap_or(""),
                    cert.replace('|', "\\|")
                ));
            }
        }
        for key in ["lattice_violations", "mismatches", "hints"] {
            if let Some(items) = doc.get(key).and_then(|x| x.as_array()) {
                out.push_str(&format!("\n## {key}\n\n"));
                for it in items {
                    out.push_str(&format!("- {}\n", it.as_str().unwrap_or("")));
                }
            }
        }
        out
    }
}

/// Pairs `(a, b)` with `a ⇒ b`.
const IMPLICATIONS: [(Property, Property); 7] = [
    (Property::Chaotic, Property::Mixing),
    (Property::Chaotic, Property::Hypercyclic),
    (Property::Chaotic, Property::Transitive),
    (Property::Mixing, Property::Hypercyclic),
    (Property::Mixing, Property::Transitive),
    (Property::Hypercyclic, Property::Transitive),
    (Property::ErgodicSufficient, Property::Transitive),
];

/// Certified pairs contradicting an implication.
pub fn lattice_violations(verdicts: &BTreeMap<Property, Verdict>) -> Vec<String> {
    IMPLICATIONS
        .iter()
        .filter(|(a, b)| {
            verdicts.get(a).map(|v| v.status) == Some(Status::CertifiedHolds)
                && verdicts.get(b).map(|v| v.status) == Some(Status::CertifiedFails)
        })
        .map(|(a, b)| format!("{a} certified but {b} refuted"))
        .collect()
}

/// Runs every check; the report records lattice and expectation outcomes.
pub fn classify_report(spec: &SpaceSpec) -> Result<Report> {
    let model = spec.model()?;
    model.check_hints()?;
    let mut verdicts = BTreeMap::new();
    verdicts.insert(Property::Continuity, check_continuity(&model)?);
    verdicts.insert(Property::Transitive, check_transitive(&model)?);
    verdicts.insert(Property::Hypercyclic, check_hypercyclic(&model)?);
    verdicts.insert(Property::Mixing, check_mixing(&model)?);
    verdicts.insert(Property::Chaotic, check_chaotic(&model)?);
    verdicts.insert(Property::ErgodicSufficient, check_ergodic_sufficient(&model)?);
    let violations = lattice_violations(&verdicts);
    let mismatches: Vec<String> = spec
        .expectations
        .iter()
        .flat_map(|e| e.iter())
        .filter(|(p, e)| !e.matches(verdicts[p].status))
        .map(|(p, e)| format!("{p}: expected {e:?}, got {}", verdicts[p].status))
        .collect();
    Ok(Report {
        schema: REPORT_SCHEMA,
        space: spec.name.clone(),
        p: spec.p.to_string(),
        window: spec.bounds.window,
        verdicts,
        lattice_consistent: violations.is_empty(),
        lattice_violations: violations,
        expectations_matched: spec.expectations.as_ref().map(|_| mismatches.is_empty()),
        mismatches,
        hints: model.hints().iter().map(Hint::label).collect(),
    })
}

/// [`classify_report`], failing on an inconsistent lattice.
pub fn classify(spec: &SpaceSpec) -> Result<Report> {
    let r = classify_report(spec)?;
    if !r.lattice_consistent {
        return Err(Error::LatticeViolation(r.lattice_violations.join("; ")));
    }
    Ok(r)
}
