use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::WeightFamily;

type Generator = Arc<dyn Fn(usize) -> bool + Send + Sync>;

/// Members of a subset of `ℕ` inside the window `[lo, hi]`.
#[derive(Clone)]
pub struct IndexWindowSet {
    lo: usize,
    hi: usize,
    members: Vec<usize>,
    generator: Option<Generator>,
}

impl fmt::Debug for IndexWindowSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndexWindowSet")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("len", &self.members.len())
            .field("generator", &self.generator.is_some())
            .finish()
    }
}

impl IndexWindowSet {
    /// Members are sorted, deduplicated and clipped to `[lo, hi]`.
    pub fn new(lo: usize, hi: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(Error::Domain(format!("invalid window [{lo}, {hi}]")));
        }
        let mut members: Vec<usize> = members.into_iter().filter(|j| (lo..=hi).contains(j)).collect();
        members.sort_unstable();
        members.dedup();
        Ok(IndexWindowSet { lo, hi, members, generator: None })
    }

    /// `{j ∈ [lo, hi] : pred(j)}` with `pred` kept as generator.
    pub fn from_predicate<P>(lo: usize, hi: usize, pred: P) -> Result<Self>
    where
        P: Fn(usize) -> bool + Send + Sync + 'static,
    {
        let mut s = Self::new(lo, hi, (lo..=hi).filter(|&j| pred(j)))?;
        s.generator = Some(Arc::new(pred));
        Ok(s)
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn window_len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, j: usize) -> bool {
        match &self.generator {
            Some(g) if !(self.lo..=self.hi).contains(&j) => g(j),
            _ => self.members.binary_search(&j).is_ok(),
        }
    }

    pub fn has_generator(&self) -> bool {
        self.generator.is_some()
    }

    /// Same set on the larger window `[lo, hi]`, recomputed from the generator.
    pub fn rewindow(&self, hi: usize) -> Option<Self> {
        let g = self.generator.clone()?;
        let mut s = Self::new(self.lo, hi, (self.lo..=hi).filter(|&j| g(j))).ok()?;
        s.generator = Some(g);
        Some(s)
    }

    /// Adds members (the generator, no longer describing the set, is dropped).
    pub fn with_members(&self, extra: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(self.lo, self.hi, self.members.iter().copied().chain(extra))
            .expect("window already validated");
        s.generator = None;
        s
    }
}

/// Result of scanning a window for bounded gaps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndeticScan {
    /// Least `m` such that each `j` in `[lo, last member]` has a member in `[j, j+m]`.
    pub bound: usize,
    /// Indices after the last member; inconclusive when larger than `bound`.
    pub tail: usize,
    /// Gap maxima over the last three full dyadic blocks strictly increase.
    pub growing_gaps: bool,
}

impl SyndeticScan {
    pub fn tail_inconclusive(&self) -> bool {
        self.tail > self.bound
    }
}

/// Gap scan of `A`; `None` for an empty set.
pub fn syndetic_scan(a: &IndexWindowSet) -> Option<SyndeticScan> {
    let first = *a.members.first()?;
    let last = *a.members.last()?;
    let mut bound = first - a.lo;
    // max gap per dyadic block [2^b, 2^{b+1}) of its left endpoint
    let mut block_max: Vec<(u32, usize)> = Vec::new();
    for w in a.members.windows(2) {
        let g = w[1] - w[0];
        bound = bound.max(g - 1);
        let b = usize::BITS - 1 - w[0].leading_zeros();
        match block_max.last_mut() {
            Some((bb, mx)) if *bb == b => *mx = (*mx).max(g),
            _ => block_max.push((b, g)),
        }
    }
    let full: Vec<usize> = block_max
        .iter()
        .filter(|(b, _)| {
            let start = 1usize << b;
            start >= a.lo && start.saturating_mul(2) - 1 <= last
        })
        .map(|&(_, g)| g)
        .collect();
    let growing_gaps = full.len() >= 3 && full[full.len() - 3..].windows(2).all(|w| w[1] > w[0]);
    Some(SyndeticScan { bound, tail: a.hi - last, growing_gaps })
}

/// The least `m` making `A` `m`-syndetic on the window, or `None` when `A` is
/// empty or its gaps grow across dyadic scales.
pub fn syndetic_bound(a: &IndexWindowSet) -> Option<usize> {
    syndetic_scan(a).filter(|s| !s.growing_gaps).map(|s| s.bound)
}

/// Longest block of consecutive members `(length, start)`.
pub fn longest_run(a: &IndexWindowSet) -> (usize, Option<usize>) {
    let mut best = (0, None);
    let mut i = 0;
    let ms = &a.members;
    while i < ms.len() {
        let start = ms[i];
        let mut e = i;
        while e + 1 < ms.len() && ms[e + 1] == ms[e] + 1 {
            e += 1;
        }
        let len = e - i + 1;
        if len > best.0 {
            best = (len, Some(start));
        }
        i = e + 1;
    }
    best
}

/// All maximal runs `(start, length)` in increasing order.
pub fn runs(a: &IndexWindowSet) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let ms = &a.members;
    let mut i = 0;
    while i < ms.len() {
        let mut e = i;
        while e + 1 < ms.len() && ms[e + 1] == ms[e] + 1 {
            e += 1;
        }
        out.push((ms[i], e - i + 1));
        i = e + 1;
    }
    out
}

/// Largest `n` such that some length-`n` interval `J` of the window has `A ∩ J`
/// meeting every length-`(m+1)` subinterval of `J`.
pub fn piecewise_syndetic_profile(a: &IndexWindowSet, m: usize) -> usize {
    let trivial = m.min(a.window_len());
    let ms = &a.members;
    let mut best = trivial;
    let mut i = 0;
    while i < ms.len() {
        let mut e = i;
        while e + 1 < ms.len() && ms[e + 1] - ms[e] <= m + 1 {
            e += 1;
        }
        let start = ms[i].saturating_sub(m).max(a.lo);
        let end = (ms[e] + m).min(a.hi);
        best = best.max(end - start + 1);
        i = e + 1;
    }
    best
}

/// `{j ∈ [lo, hi] : v^{(m,k)}_j < ε}` with the family evaluator as generator.
pub fn sublevel_set(f: &WeightFamily, m: usize, k: usize, log_eps: f64, lo: usize, hi: usize) -> Result<IndexWindowSet> {
    if log_eps.is_nan() || log_eps == f64::NEG_INFINITY {
        return Err(Error::Domain("threshold ε must be positive".into()));
    }
    let f = f.clone();
    IndexWindowSet::from_predicate(lo, hi, move |j| f.log_weight(m, k, j) < log_eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(hi: usize, pred: impl Fn(usize) -> bool + Send + Sync + 'static) -> IndexWindowSet {
        IndexWindowSet::from_predicate(1, hi, pred).unwrap()
    }

    #[test]
    fn evens_are_one_syndetic() {
        assert_eq!(syndetic_bound(&set(100, |j| j % 2 == 0)), Some(1));
        assert_eq!(syndetic_bound(&set(100, |_| true)), Some(0));
    }

    #[test]
    fn squares_have_growing_gaps() {
        let sq = set(10_000, |j| {
            let r = (j as f64).sqrt() as usize;
            r * r == j || (r + 1) * (r + 1) == j
        });
        assert_eq!(syndetic_bound(&sq), None);
        assert_eq!(syndetic_bound(&IndexWindowSet::new(1, 10, []).unwrap()), None);
    }

    #[test]
    fn run_lengths() {
        let thick = set(10_000, |j| (1..=100usize).any(|p| j > p * p && j <= p * p + p));
        assert!(longest_run(&thick).0 >= 99);
        assert_eq!(longest_run(&set(100, |j| j % 2 == 1)).0, 1);
        assert_eq!(longest_run(&set(50, |_| true)), (50, Some(1)));
        assert_eq!(longest_run(&IndexWindowSet::new(1, 5, []).unwrap()), (0, None));
    }

    #[test]
    fn profiles() {
        let all = set(300, |_| true);
        assert_eq!(piecewise_syndetic_profile(&all, 3), 300);
        let sq = set(10_000, |j| {
            let r = (j as f64).sqrt() as usize;
            r * r == j
        });
        assert!(piecewise_syndetic_profile(&sq, 5) <= 20);
    }
}
