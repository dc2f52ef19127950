//! Search over seeded DSL families for a nuclear space where the ergodic
//! sufficient condition holds and hypercyclicity fails.

use serde::Serialize;

use super::nuclearity_ratio_test;
use crate::classifier::{classify_report, Property};
use crate::dsl::{compile, format, random::random_family};
use crate::error::Result;
use crate::verdict::{Status, Window};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchHit {
    pub seed: u64,
    pub source: String,
    pub nuclear: Status,
    pub ergodic_sufficient: Status,
    pub hypercyclic: Status,
}

impl SearchHit {
    /// All three statuses certified in the sought direction.
    pub fn is_candidate(&self) -> bool {
        self.nuclear == Status::CertifiedHolds
            && self.ergodic_sufficient == Status::CertifiedHolds
            && self.hypercyclic == Status::CertifiedFails
    }

    /// Ergodic condition not refuted and hypercyclicity not established.
    pub fn is_near(&self) -> bool {
        self.ergodic_sufficient.is_positive() && !self.hypercyclic.is_positive()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SearchSummary {
    pub examined: usize,
    pub candidates: Vec<SearchHit>,
    pub near: Vec<SearchHit>,
}

/// Classifies `random_family(seed)` for each seed on `window`.
pub fn search_nuclear_ergodic(seeds: impl IntoIterator<Item = u64>, window: Window) -> Result<SearchSummary> {
    let mut out = SearchSummary::default();
    for seed in seeds {
        let ast = random_family(seed);
        let spec = compile(&ast)?.with_window(window);
        let report = classify_report(&spec)?;
        let hit = SearchHit {
            seed,
            source: format(&ast),
            nuclear: nuclearity_ratio_test(&spec.family, &spec.bounds).status,
            ergodic_sufficient: report.status(Property::ErgodicSufficient),
            hypercyclic: report.status(Property::Hypercyclic),
        };
        out.examined += 1;
        if hit.is_candidate() {
            out.candidates.push(hit);
        } else if hit.is_near() {
            out.near.push(hit);
        }
    }
    Ok(out)
}
