use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::family::{pair, unpair, IndexKind};
use crate::verdict::{Certificate, Coverage, Verdict};

type Map = Arc<dyn Fn(usize) -> usize + Send + Sync>;
type InverseMap = Arc<dyn Fn(usize) -> Option<usize> + Send + Sync>;
/// Growth sequence `k ↦ n(k)` of a snake symbol.
pub type Growth = Arc<dyn Fn(usize) -> usize + Send + Sync>;

pub const DEFAULT_ENUMERATION_LIMIT: usize = 1 << 22;

#[derive(Default)]
struct OrbitCache {
    seq: Vec<usize>,
    pos: HashMap<usize, usize>,
    broken: Option<Error>,
}

/// A map `ψ` of flat indices into `ℕ∖{1}` whose root orbit should enumerate `ℕ`.
///
/// Planar symbols act on flattened indices (see [`pair`]); the root is `1` in both layouts.
#[derive(Clone)]
pub struct Symbol {
    name: String,
    forward: Map,
    inverse: Option<InverseMap>,
    index_kind: IndexKind,
    expansive: bool,
    limit: usize,
    growth: Option<Growth>,
    cache: Arc<Mutex<OrbitCache>>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("index_kind", &self.index_kind)
            .field("inverse", &self.inverse.is_some())
            .finish()
    }
}

pub const ROOT: usize = 1;

impl Symbol {
    pub fn from_fn<F>(name: impl Into<String>, index_kind: IndexKind, forward: F) -> Self
    where
        F: Fn(usize) -> usize + Send + Sync + 'static,
    {
        Symbol {
            name: name.into(),
            forward: Arc::new(forward),
            inverse: None,
            index_kind,
            expansive: false,
            limit: DEFAULT_ENUMERATION_LIMIT,
            growth: None,
            cache: Arc::new(Mutex::new(OrbitCache::default())),
        }
    }

    /// `ψ(j) = j + 1`, giving the plain backward shift.
    pub fn successor() -> Self {
        Symbol::from_fn("successor", IndexKind::Linear, |j| j + 1)
            .with_inverse(|j| (j > 1).then(|| j - 1))
            .expansive()
    }

    /// `inverse(j)` is the preimage of `j`, `None` for the root.
    pub fn with_inverse<F>(mut self, inverse: F) -> Self
    where
        F: Fn(usize) -> Option<usize> + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    /// Declares `ψ(j) ≥ j`, so preimages of `t` lie in `[1, t]`.
    pub fn expansive(mut self) -> Self {
        self.expansive = true;
        self
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit.max(1);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn index_kind(&self) -> IndexKind {
        self.index_kind
    }

    pub fn is_successor(&self) -> bool {
        self.name == "successor"
    }

    pub fn growth(&self) -> Option<&Growth> {
        self.growth.as_ref()
    }

    pub fn apply(&self, j: usize) -> usize {
        (self.forward)(j)
    }

    pub fn invert(&self, j: usize) -> Option<Option<usize>> {
        self.inverse.as_ref().map(|inv| inv(j))
    }

    fn extend_to(&self, cache: &mut OrbitCache, len: usize) -> Result<()> {
        if let Some(e) = &cache.broken {
            if cache.seq.len() < len {
                return Err(e.clone());
            }
        }
        if cache.seq.is_empty() {
            cache.seq.push(ROOT);
            cache.pos.insert(ROOT, 1);
        }
        while cache.seq.len() < len {
            let step = cache.seq.len();
            if step >= self.limit {
                return Err(Error::EnumerationExhausted { index: len, limit: self.limit });
            }
            let next = (self.forward)(*cache.seq.last().expect("nonempty"));
            if next == 0 || cache.pos.contains_key(&next) {
                let e = Error::SymbolCollision { step, value: next };
                cache.broken = Some(e.clone());
                return Err(e);
            }
            cache.seq.push(next);
            cache.pos.insert(next, cache.seq.len());
        }
        Ok(())
    }

    /// `χ(p)` for `p ≥ 1`: `χ(1) = root`, `χ(p+1) = ψ(χ(p))`.
    pub fn chi(&self, p: usize) -> Result<usize> {
        if p == 0 {
            return Err(Error::Domain("orbit positions start at 1".into()));
        }
        let mut cache = self.cache.lock().expect("orbit cache poisoned");
        self.extend_to(&mut cache, p)?;
        Ok(cache.seq[p - 1])
    }

    /// The first `n` orbit points `χ(1..=n)`.
    pub fn orbit_enumeration(&self, n: usize) -> Result<Vec<usize>> {
        let mut cache = self.cache.lock().expect("orbit cache poisoned");
        self.extend_to(&mut cache, n)?;
        Ok(cache.seq[..n].to_vec())
    }

    /// Orbit position `p` with `χ(p) = j`.
    pub fn position(&self, j: usize) -> Result<usize> {
        if j == 0 {
            return Err(Error::Domain("indices start at 1".into()));
        }
        let mut cache = self.cache.lock().expect("orbit cache poisoned");
        if let Some(&p) = cache.pos.get(&j) {
            return Ok(p);
        }
        let mut len = cache.seq.len().max(1);
        loop {
            len = (len * 2).min(self.limit);
            match self.extend_to(&mut cache, len) {
                Ok(()) => {}
                Err(Error::EnumerationExhausted { limit, .. }) => {
                    return Err(Error::EnumerationExhausted { index: j, limit })
                }
                Err(e) => return Err(e),
            }
            if let Some(&p) = cache.pos.get(&j) {
                return Ok(p);
            }
            if len >= self.limit {
                return Err(Error::EnumerationExhausted { index: j, limit: self.limit });
            }
        }
    }
}

/// `k` with `n(k) ≤ j < n(k+1)`, for increasing `n` with `n(1) = 1`.
fn growth_block(n: &Growth, j: usize) -> usize {
    let (mut lo, mut hi) = (1usize, 2usize);
    while n(hi) <= j {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if n(mid) <= j {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn snake_step(n: &Growth, i: usize, j: usize) -> (usize, usize) {
    if i == 1 {
        if j == 1 {
            return (2, 1);
        }
        let k = growth_block(n, j);
        if n(k) == j {
            // j = n(k) = n((k-1)+1)
            return (2, 2 * (k - 1));
        }
        return (1, j + 1);
    }
    if i == 2 && j % 2 == 1 {
        return (1, n(j.div_ceil(2)) + 1);
    }
    if j == 1 && i % 2 == 1 {
        return (i + 1, 1);
    }
    if (i + j).is_multiple_of(2) {
        (i + 1, j - 1)
    } else {
        (i - 1, j + 1)
    }
}

fn snake_preimage(n: &Growth, i: usize, j: usize) -> Option<(usize, usize)> {
    if (i, j) == (1, 1) {
        return None;
    }
    let mut cands = vec![(i + 1, j.saturating_sub(1)), (i.saturating_sub(1), j + 1), (1, j.saturating_sub(1)), (i.saturating_sub(1), 1)];
    if i == 2 && j.is_multiple_of(2) {
        cands.push((1, n(j / 2 + 1)));
    }
    if i == 1 && j >= 2 {
        let k = growth_block(n, j - 1);
        if n(k) + 1 == j {
            cands.push((2, 2 * k - 1));
        }
    }
    cands.into_iter().find(|&(a, b)| a >= 1 && b >= 1 && snake_step(n, a, b) == (i, j))
}

/// Planar snake symbol for a growth sequence `n` with `n(1) = 1`, `n(k) ≤ 3k²`
/// and nondecreasing, unbounded differences (checked on a prefix).
pub fn snake_symbol<F>(n: F) -> Result<Symbol>
where
    F: Fn(usize) -> usize + Send + Sync + 'static,
{
    const PREFIX: usize = 64;
    let n: Growth = Arc::new(n);
    if n(1) != 1 {
        return Err(Error::Config(format!("snake growth must start at n(1) = 1, got {}", n(1))));
    }
    let mut prev_diff = 0;
    for k in 1..PREFIX {
        let (a, b) = (n(k), n(k + 1));
        if b <= a {
            return Err(Error::Config(format!("snake growth not increasing at k = {k}")));
        }
        if a > 3 * k * k {
            return Err(Error::Config(format!("snake growth n({k}) = {a} exceeds 3k^2")));
        }
        let d = b - a;
        if d < prev_diff {
            return Err(Error::Config(format!("snake growth differences decrease at k = {k}")));
        }
        prev_diff = d;
    }
    if n(PREFIX + 1) - n(PREFIX) <= n(2) - n(1) {
        return Err(Error::Config("snake growth differences do not grow on the checked prefix".into()));
    }
    let fw = n.clone();
    let inv = n.clone();
    let mut s = Symbol::from_fn("snake", IndexKind::Planar, move |flat| {
        let (i, j) = unpair(flat);
        let (a, b) = snake_step(&fw, i, j);
        pair(a, b)
    })
    .with_inverse(move |flat| {
        let (i, j) = unpair(flat);
        snake_preimage(&inv, i, j).map(|(a, b)| pair(a, b))
    });
    s.growth = Some(n);
    Ok(s)
}

/// Snake symbol with the default growth `n(k) = k²`.
pub fn snake_squares() -> Symbol {
    snake_symbol(|k| k * k).expect("k^2 satisfies the growth contract")
}

/// Prefix checks: root avoidance, injectivity, preimages and orbit coverage.
///
/// Never returns `CertifiedHolds`: coverage of all of `ℕ` is not a finite fact.
pub fn verify_symbol(psi: &Symbol, n: usize) -> Verdict {
    let n = n.max(1);
    let fail = |label: String, witness: Vec<usize>| {
        Verdict::fails(Certificate { witness_indices: witness, label: Some(label), ..Certificate::default() })
    };
    let mut seen: HashMap<usize, usize> = HashMap::with_capacity(n);
    for j in 1..=n {
        let t = psi.apply(j);
        if t == ROOT || t == 0 {
            return fail(format!("psi({j}) is the root"), vec![j]);
        }
        if let Some(&other) = seen.get(&t) {
            return fail(format!("psi({other}) = psi({j}) = {t}"), vec![other, j, t]);
        }
        seen.insert(t, j);
    }
    let mut preimage = 1;
    while preimage < n && seen.contains_key(&(preimage + 1)) {
        preimage += 1;
    }
    let missing = preimage + 1;
    if missing <= n {
        let refuted = if psi.expansive {
            true
        } else if let Some(Some(inv)) = psi.invert(missing) {
            psi.apply(inv) != missing
        } else {
            psi.invert(missing) == Some(None)
        };
        if refuted {
            return fail(format!("index {missing} has no preimage"), vec![missing]);
        }
    }
    if let Some(inv) = &psi.inverse {
        for t in 2..=n.min(1 << 14) {
            match inv(t) {
                Some(s) if psi.apply(s) == t => {}
                _ => return fail(format!("supplied inverse is wrong at {t}"), vec![t]),
            }
        }
    }
    let orbit = match psi.orbit_enumeration(n) {
        Ok(o) => o,
        Err(Error::SymbolCollision { step, value }) => {
            return fail(format!("orbit revisits {value} at step {step}"), vec![value]);
        }
        Err(e) => return Verdict::undecided(e.to_string()),
    };
    let mut covered = vec![false; n + 2];
    for &x in &orbit {
        if x <= n + 1 {
            covered[x] = true;
        }
    }
    let coverage = covered.iter().skip(1).take_while(|&&c| c).count();
    let diagonals = (psi.index_kind == IndexKind::Planar).then(|| {
        let mut d = 0;
        while (d + 1) * (d + 2) / 2 <= coverage {
            d += 1;
        }
        d
    });
    Verdict::empirical(Certificate {
        coverage: Some(Coverage { orbit: coverage, preimage, diagonals }),
        label: Some(format!("prefix N = {n}")),
        ..Certificate::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar_orbit(s: &Symbol, len: usize) -> Vec<(usize, usize)> {
        s.orbit_enumeration(len).unwrap().into_iter().map(unpair).collect()
    }

    #[test]
    fn snake_prefix() {
        let s = snake_squares();
        assert_eq!(
            planar_orbit(&s, 11),
            vec![(1, 1), (2, 1), (1, 2), (1, 3), (1, 4), (2, 2), (3, 1), (4, 1), (3, 2), (2, 3), (1, 5)]
        );
    }

    #[test]
    fn cycle_collides() {
        let s = Symbol::from_fn("cycle", IndexKind::Linear, |j| match j {
            1 => 2,
            2 => 3,
            _ => 2,
        });
        assert_eq!(s.orbit_enumeration(5), Err(Error::SymbolCollision { step: 3, value: 2 }));
    }

    #[test]
    fn growth_contract() {
        assert!(snake_symbol(|k| k * k + 1).is_err());
        assert!(snake_symbol(|k| 4 * k * k - 3).is_err());
        assert!(snake_symbol(|k| k).is_err());
    }
}
