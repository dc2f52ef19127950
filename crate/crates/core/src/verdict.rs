use std::fmt;

use serde::{Deserialize, Serialize};

/// Four-valued outcome of a decision procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    CertifiedHolds,
    CertifiedFails,
    EmpiricallySupported,
    Undecided,
}

impl Status {
    pub fn is_certified(self) -> bool {
        matches!(self, Status::CertifiedHolds | Status::CertifiedFails)
    }

    /// Holds, certified or on the window.
    pub fn is_positive(self) -> bool {
        matches!(self, Status::CertifiedHolds | Status::EmpiricallySupported)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::CertifiedHolds => "certified-holds",
            Status::CertifiedFails => "certified-fails",
            Status::EmpiricallySupported => "empirically-supported",
            Status::Undecided => "undecided",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scan bounds: levels `m ≤ levels`, grades `k ≤ grades`, indices `j ≤ n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub levels: usize,
    pub grades: usize,
    pub n: usize,
}

impl Window {
    pub fn new(levels: usize, grades: usize, n: usize) -> Self {
        Window { levels, grades, n }
    }
}

impl Default for Window {
    fn default() -> Self {
        Window { levels: 8, grades: 8, n: 1 << 16 }
    }
}

/// Level/grade choice `(m, k) ↦ (n, l)` with constant `log C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub l: usize,
    pub log_c: f64,
}

/// Partial-sum evidence for `Σ_j (u_j)^p` at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesCertificate {
    pub level: usize,
    pub p: f64,
    pub kind: String,
    /// `log Σ_{j ≤ i}` for `i = 1..=terms` (convergent case).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub log_partial_sums: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_tail_bound: Option<f64>,
    /// Divergent case: `log` of a lower bound for `Σ_{j ≤ 2^K}` and the `K` used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_lower_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dyadic_exponent: Option<u32>,
}

impl SeriesCertificate {
    pub fn log_partial_sum(&self) -> Option<f64> {
        self.log_partial_sums.last().copied()
    }
}

/// Replayable payload attached to a verdict.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub selections: Vec<Selection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness_indices: Vec<usize>,
    /// `(m, k, j)` of a shape violation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_triple: Option<(usize, usize, usize)>,
    /// `(level, start, end)` index intervals.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<(usize, usize, usize)>,
    /// Log bounds aligned with `intervals`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interval_bounds: Vec<f64>,
    /// `(level, log ε_level)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub level_bounds: Vec<(usize, f64)>,
    /// `(t, g)`: the sublevel set for `ε = 2^{-t}` is `g`-syndetic.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gaps: Vec<(u32, usize)>,
    /// `(level, longest run)` observed in the window.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub run_bounds: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesCertificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hints: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<Coverage>,
}

/// Prefix evidence for a symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    /// All flat indices `≤ orbit` occur among the first `N` orbit points.
    pub orbit: usize,
    /// All non-root flat indices `≤ preimage` have a preimage `≤ N`.
    pub preimage: usize,
    /// Complete anti-diagonals covered (planar symbols).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonals: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub certificate: Certificate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn new(status: Status, certificate: Certificate) -> Self {
        Verdict { status, certificate, note: None }
    }

    pub fn holds(certificate: Certificate) -> Self {
        Self::new(Status::CertifiedHolds, certificate)
    }

    pub fn fails(certificate: Certificate) -> Self {
        Self::new(Status::CertifiedFails, certificate)
    }

    pub fn empirical(certificate: Certificate) -> Self {
        Self::new(Status::EmpiricallySupported, certificate)
    }

    pub fn undecided(note: impl Into<String>) -> Self {
        Verdict { status: Status::Undecided, certificate: Certificate::default(), note: Some(note.into()) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.certificate.window = Some(window);
        self
    }
}
