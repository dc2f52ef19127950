//! Weight families of the built-in spaces, with the hints that certify them.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Pow};

use crate::error::{Error, Result};
use crate::family::{unpair, IndexKind, WeightFamily};
use crate::hints::{
    bound2, coord_fn, level_count, level_fn, level_run_fn, ratio_fn, run_fn, seq2_fn, seq_fn, Hint, TailBound,
};
use crate::symbol::Symbol;
use crate::Rational;

fn rat(n: BigInt, d: BigInt) -> Rational {
    Rational::new(n, d)
}

fn pow2(e: usize) -> BigInt {
    BigInt::one() << e
}

/// `ν₂(j)`.
pub fn nu2(j: usize) -> u32 {
    j.trailing_zeros()
}

/// `n(j) = ⌈log₂ j⌉`, the dyadic block of `j = 2^{n} − r`.
pub fn dyadic_block(j: usize) -> u32 {
    if j <= 1 {
        0
    } else {
        usize::BITS - (j - 1).leading_zeros()
    }
}

/// `j ↦ j^{-m}`.
pub fn s_prime_family() -> WeightFamily {
    WeightFamily::linear("s'", |m, j| -(m as f64) * (j as f64).ln())
        .with_exact(|m, _k, j| Some(rat(BigInt::one(), BigInt::from(j).pow(m as u32))))
        .with_hints([Hint::DecreasingInLevel, Hint::NuclearDivergent { log_c: 0.0 }])
}

/// `v ≡ 1`.
pub fn constant_family() -> WeightFamily {
    WeightFamily::linear("constant", |_, _| 0.0)
        .with_exact(|_, _, _| Some(Rational::one()))
        .with_hints([Hint::DecreasingInLevel, Hint::NuclearDivergent { log_c: 0.0 }])
}

/// Exponent sequences `α` of power series spaces of infinite type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alpha {
    /// `α_j = j`.
    Linear,
    /// `α_j = log j`, giving `s'`.
    Log,
    /// `α_j = log log (j + 2)`.
    LogLog,
}

impl Alpha {
    pub fn eval(self, j: usize) -> f64 {
        let x = j as f64;
        match self {
            Alpha::Linear => x,
            Alpha::Log => x.ln(),
            Alpha::LogLog => (x + 2.0).ln().ln(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Alpha::Linear => "j",
            Alpha::Log => "log",
            Alpha::LogLog => "loglog",
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Alpha {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "j" | "linear" => Ok(Alpha::Linear),
            "log" | "log j" => Ok(Alpha::Log),
            "loglog" | "log log" => Ok(Alpha::LogLog),
            other => Err(Error::Config(format!("unknown exponent sequence `{other}` (expected j, log, loglog)"))),
        }
    }
}

/// `v^{(m)}_j = e^{-m α_j}`.
pub fn power_series_family(alpha: Alpha) -> WeightFamily {
    let f = WeightFamily::linear(format!("power-series-dual({alpha})"), move |m, j| -(m as f64) * alpha.eval(j))
        .with_hint(Hint::DecreasingInLevel);
    if alpha == Alpha::Log {
        f.with_exact(|m, _k, j| Some(rat(BigInt::one(), BigInt::from(j).pow(m as u32))))
    } else {
        f
    }
}

/// Hints about the plain shift on `e^{-m α_j}` for exponent `p`.
pub fn power_series_hints(alpha: Alpha, p: Option<f64>) -> Vec<Hint> {
    let mut hints = Vec::new();
    match alpha {
        Alpha::Linear => {
            hints.push(Hint::LimitZero {
                level: 1,
                beyond: Some(crate::hints::threshold_fn("ceil(-log eps) + 1", |_, le| (-le * (1.0 + 1e-9)).ceil().max(0.0) as usize + 1)),
            });
            hints.push(Hint::ContinuityBound {
                level_offset: 1,
                grade: seq2_fn("k", |_, k| k),
                log_c: bound2("m", |m, _| m as f64),
            });
            hints.push(Hint::Summable {
                from_level: 1,
                tail: TailBound::Ratio { from: 1, log_q: ratio_fn("-p m", |m, p, _| -p * m as f64) },
            });
        }
        Alpha::Log => {
            hints.push(Hint::LimitZero {
                level: 1,
                beyond: Some(crate::hints::threshold_fn("exp(-log eps) + 1", |_, le| {
                    let x = (-le).exp() * (1.0 + 1e-9);
                    if x < 1e15 {
                        x.floor() as usize + 1
                    } else {
                        usize::MAX / 2
                    }
                })),
            });
            hints.push(Hint::ContinuityBound {
                level_offset: 1,
                grade: seq2_fn("k", |_, k| k),
                log_c: bound2("m ln 2", |m, _| m as f64 * LN_2),
            });
            let from_level = p.map_or(1, |p| (1.0 / p).floor() as usize + 1);
            hints.push(Hint::Summable {
                from_level,
                tail: TailBound::PowerLaw { log_c: level_fn("0", |_| 0.0), s: level_fn("m", |m| m as f64) },
            });
        }
        Alpha::LogLog => {
            hints.push(Hint::LimitZero { level: 1, beyond: None });
            let r = ((4f64).ln() / (3f64).ln()).ln();
            hints.push(Hint::ContinuityBound {
                level_offset: 1,
                grade: seq2_fn("k", |_, k| k),
                log_c: bound2("m ln(ln 4 / ln 3)", move |m, _| m as f64 * r),
            });
            hints.push(Hint::Divergent {
                monotone_from: 1,
                at_power_of_two: bound2("-m ln ln(2^K + 2)", |m, kk| {
                    let ln = if kk < 60 {
                        (((1u64 << kk) + 2) as f64).ln()
                    } else {
                        kk as f64 * LN_2
                    };
                    -(m as f64) * ln.ln()
                }),
            });
        }
    }
    hints
}

/// `log v^{(1)}_j = -(ν₂(j)+1) ln 2`, closed under `v^{(m+1)}_j = min(v^{(m)}_j, v^{(m)}_{j+1})`.
pub fn prop41_log(m: usize, j: usize) -> f64 {
    let t = (0..m).map(|i| nu2(j + i)).max().unwrap_or(0);
    -((t + 1) as f64) * LN_2
}

pub fn prop41_exact(m: usize, j: usize) -> Rational {
    let t = (0..m).map(|i| nu2(j + i)).max().unwrap_or(0);
    rat(BigInt::one(), pow2(t as usize + 1))
}

pub fn prop41_family() -> WeightFamily {
    WeightFamily::linear("prop4-1", prop41_log)
        .with_exact(|m, _k, j| Some(prop41_exact(m, j)))
        .with_hint(Hint::DecreasingInLevel)
}

pub fn prop41_hints() -> Vec<Hint> {
    vec![
        Hint::ContinuityBound { level_offset: 1, grade: seq2_fn("k", |_, k| k), log_c: bound2("0", |_, _| 0.0) },
        Hint::DyadicSublevel { level: 1, shift: 0 },
        Hint::SublevelRunBound {
            eps_log: level_fn("-(m+2) ln 2", |m| -((m + 2) as f64) * LN_2),
            max_run: level_count("2m", |m| 2 * m),
        },
        Hint::BoundedBelow {
            along: Some(seq2_fn("2^(n + bitlen(m)) + 1", |m, n| {
                (1usize << (n + (usize::BITS - m.leading_zeros()) as usize).min(62)) + 1
            })),
            uniform: true,
            eps_log: level_fn("-ln(4m)", |m| -((4 * m) as f64).ln()),
        },
    ]
}

/// `log v^{(m)}_j` with `j = 2^{n} − r`: `1/(2^n j^{2m})` when `r < m`, else `2^j / j^{2m}`; `v_1 := v_2`.
pub fn prop42_log(m: usize, j: usize) -> f64 {
    let j = j.max(2);
    let n = dyadic_block(j) as usize;
    let r = (1usize << n) - j;
    let base = -2.0 * m as f64 * (j as f64).ln();
    if r < m {
        base - n as f64 * LN_2
    } else {
        base + j as f64 * LN_2
    }
}

pub fn prop42_exact(m: usize, j: usize) -> Rational {
    let j = j.max(2);
    let n = dyadic_block(j) as usize;
    let r = (1usize << n) - j;
    let den = BigInt::from(j).pow(2 * m as u32);
    if r < m {
        rat(BigInt::one(), pow2(n) * den)
    } else {
        rat(pow2(j), den)
    }
}

pub fn prop42_family() -> WeightFamily {
    WeightFamily::linear("prop4-2", prop42_log).with_exact(|m, _k, j| Some(prop42_exact(m, j))).with_hints([
        Hint::DecreasingInLevel,
        Hint::NuclearRatio {
            log_bound: level_fn("-2 ln j", |j| -2.0 * (j as f64).ln()),
            sum_bound: std::f64::consts::PI * std::f64::consts::PI / 6.0,
        },
    ])
}

/// `log ε_m` below the minimum `e^{2m}(ln 2 / 2m)^{2m}` of `2^j / j^{2m}`.
pub fn prop42_eps_log(m: usize) -> f64 {
    let m = m as f64;
    2.0 * m * (1.0 - (2.0 * m / LN_2).ln()) - 1.0
}

fn bitlen(m: usize) -> usize {
    (usize::BITS - m.leading_zeros()) as usize
}

pub fn prop42_hints() -> Vec<Hint> {
    vec![
        Hint::ContinuityBound {
            level_offset: 1,
            grade: seq2_fn("k", |_, k| k),
            log_c: bound2("(m+1) ln 4", |m, _| (m + 1) as f64 * 2.0 * LN_2),
        },
        Hint::ZeroAlong { level: 1, seq: seq_fn("2^n", |n| 1usize << n.min(62)), bound: bound2("-3n ln 2", |_, n| -3.0 * n as f64 * LN_2) },
        Hint::SublevelRunBound { eps_log: level_fn("2m(1 - ln(2m/ln 2)) - 1", prop42_eps_log), max_run: level_count("2m", |m| 2 * m) },
        Hint::BoundedBelow {
            along: Some(seq2_fn("3 * 2^(n + bitlen(m))", |m, n| 3 * (1usize << (n + bitlen(m)).min(60)))),
            uniform: true,
            eps_log: level_fn("2m(1 - ln(2m/ln 2)) - 1", prop42_eps_log),
        },
        Hint::HighIntervals {
            eps_log: level_fn("2m(1 - ln(2m/ln 2)) - 1", prop42_eps_log),
            intervals: level_run_fn("[2^(n-1)+1, 2^n - m], n = i + bitlen(m) + 1", |m, i| {
                let n = (i + bitlen(m) + 1).min(62);
                ((1usize << (n - 1)) + 1, (1usize << n) - m)
            }),
        },
    ]
}

const ROUNDS: usize = 64;

/// Block bijection `φ: ℕ² → ℕ`: round `t` fills `[2^{t-1}, 2^t − 1]` with consecutive
/// rows of column `c(t)`, where `c = 1; 1,2; 1,2,3; …`.
#[derive(Clone, Debug)]
pub struct BlockSchedule {
    col: [usize; ROUNDS],
    before: [usize; ROUNDS],
}

impl Default for BlockSchedule {
    fn default() -> Self {
        Self::new()
    }
}

impl BlockSchedule {
    pub fn new() -> Self {
        let mut col = [0; ROUNDS];
        let mut before = [0; ROUNDS];
        let mut filled = vec![0usize; ROUNDS + 1];
        let (mut row, mut c) = (1, 1);
        for t in 1..ROUNDS {
            col[t] = c;
            before[t] = filled[c];
            filled[c] = filled[c].saturating_add(1usize << (t - 1));
            if c == row {
                row += 1;
                c = 1;
            } else {
                c += 1;
            }
        }
        BlockSchedule { col, before }
    }

    /// Column of round `t`.
    pub fn column_of_round(&self, t: usize) -> usize {
        self.col[t]
    }

    /// The `n`-th round (`n ≥ 1`) allotted to column `k`.
    pub fn round_of(&self, k: usize, n: usize) -> Option<usize> {
        (1..ROUNDS).filter(|&t| self.col[t] == k).nth(n - 1)
    }

    /// Index interval `[2^{t-1}, 2^t − 1]` of round `t`.
    pub fn round_interval(t: usize) -> (usize, usize) {
        (1usize << (t - 1), (1usize << t) - 1)
    }

    /// `φ^{-1}(j) = (l, k)`.
    pub fn coords(&self, j: usize) -> (usize, usize) {
        let t = (usize::BITS - j.leading_zeros()) as usize;
        (self.before[t] + (j - (1usize << (t - 1))) + 1, self.col[t])
    }

    /// `φ(l, k)`.
    pub fn index(&self, l: usize, k: usize) -> Option<usize> {
        (1..ROUNDS).find_map(|t| {
            let len = 1usize << (t - 1);
            (self.col[t] == k && l > self.before[t] && l <= self.before[t] + len).then(|| len + (l - self.before[t] - 1))
        })
    }
}

/// `log v̂^{(m)}_j`.
fn prop43_hat(s: &BlockSchedule, m: usize, j: usize) -> f64 {
    if m == 1 {
        return 0.0;
    }
    let (l, k) = s.coords(j);
    if k < m {
        -(m as f64) * ((m * l) as f64).ln()
    } else {
        -(k as f64) * (m as f64).ln()
    }
}

fn prop43_hat_exact(s: &BlockSchedule, m: usize, j: usize) -> Rational {
    if m == 1 {
        return Rational::one();
    }
    let (l, k) = s.coords(j);
    if k < m {
        rat(BigInt::one(), BigInt::from(m * l).pow(m as u32))
    } else {
        rat(BigInt::one(), BigInt::from(m).pow(k as u32))
    }
}

/// `v^{(m)}_j = min_{a ≤ m, i ≤ m−a} v̂^{(a)}_{j+i}`, the closed form of the min-recursion.
pub fn prop43_log(s: &BlockSchedule, m: usize, j: usize) -> f64 {
    (1..=m)
        .flat_map(|a| (0..=m - a).map(move |i| (a, i)))
        .map(|(a, i)| prop43_hat(s, a, j + i))
        .fold(f64::INFINITY, f64::min)
}

pub fn prop43_exact(s: &BlockSchedule, m: usize, j: usize) -> Rational {
    (1..=m)
        .flat_map(|a| (0..=m - a).map(move |i| (a, i)))
        .map(|(a, i)| prop43_hat_exact(s, a, j + i))
        .min()
        .expect("m >= 1")
}

pub fn prop43_family() -> WeightFamily {
    let s = Arc::new(BlockSchedule::new());
    let se = s.clone();
    WeightFamily::linear("prop4-3", move |m, j| prop43_log(&s, m, j))
        .with_exact(move |m, _k, j| Some(prop43_exact(&se, m, j)))
        .with_hint(Hint::DecreasingInLevel)
}

/// `log(m^{-m}/2)`.
pub fn prop43_eps_log(m: usize) -> f64 {
    -(m as f64) * (m as f64).ln() - LN_2
}

pub fn prop43_hints() -> Vec<Hint> {
    let s = Arc::new(BlockSchedule::new());
    let (s1, s2, s3, s4, s5) = (s.clone(), s.clone(), s.clone(), s.clone(), s.clone());
    vec![
        Hint::ContinuityBound { level_offset: 1, grade: seq2_fn("k", |_, k| k), log_c: bound2("0", |_, _| 0.0) },
        Hint::ThickZero {
            level: 2,
            runs: run_fn("n-th column-1 round", move |n| {
                s1.round_of(1, n).map_or((usize::MAX - 1, usize::MAX), BlockSchedule::round_interval)
            }),
            bound: bound2("-2 ln(2 l_n)", move |_, n| match s2.round_of(1, n) {
                Some(t) => -2.0 * ((2 * (s2.coords(1usize << (t - 1)).0)) as f64).ln(),
                None => f64::NEG_INFINITY,
            }),
        },
        Hint::ColumnSplit {
            coords: coord_fn("phi^-1", move |j| s3.coords(j)),
            low_level: 2,
            low_bound: level_fn("-k ln 2", |k| -(k as f64) * LN_2),
            column_bound: bound2("-m ln(m l)", |m, l| -(m as f64) * ((m * l) as f64).ln()),
        },
        Hint::BoundedBelow {
            along: Some(seq2_fn("start of the n-th column-m round", move |m, n| {
                s4.round_of(m, n).map_or(usize::MAX, |t| 1usize << (t - 1))
            })),
            uniform: false,
            eps_log: level_fn("-m ln m - ln 2", prop43_eps_log),
        },
        Hint::HighIntervals {
            eps_log: level_fn("-m ln m - ln 2", prop43_eps_log),
            intervals: level_run_fn("n-th column-m round trimmed by m-1", move |m, n| match s5.round_of(m, n) {
                Some(t) => {
                    let (a, b) = BlockSchedule::round_interval(t);
                    (a, b - (m - 1))
                }
                None => (usize::MAX - 1, usize::MAX),
            }),
        },
    ]
}

/// Growth of the snake symbols used by the gallery.
pub fn snake_growth(k: usize) -> usize {
    k * k
}

/// Direct-sum gradings on `ℕ×ℕ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnakeGrading {
    /// `v^{(n,k)}_{i,j} = 1` for `i ≤ n`.
    Lp,
    /// `v^{(n,k)}_{i,j} = j^k` for `i ≤ n`.
    S,
}

pub fn snake_family(g: SnakeGrading) -> WeightFamily {
    let name = match g {
        SnakeGrading::Lp => "snake-lp",
        SnakeGrading::S => "snake-s",
    };
    WeightFamily::from_log_fn(name, IndexKind::Planar, true, move |n, k, flat| {
        let (i, j) = unpair(flat);
        match (i > n, g) {
            (true, _) => f64::INFINITY,
            (false, SnakeGrading::Lp) => 0.0,
            (false, SnakeGrading::S) => k as f64 * (j as f64).ln(),
        }
    })
    .with_exact(move |n, k, flat| {
        let (i, j) = unpair(flat);
        match (i > n, g) {
            (true, _) => None,
            (false, SnakeGrading::Lp) => Some(Rational::one()),
            (false, SnakeGrading::S) => Some(Rational::from_integer(BigInt::from(j).pow(k as u32))),
        }
    })
    .with_hints([Hint::DecreasingInLevel, Hint::IncreasingInGrade])
}

/// Orbit positions `(j_K, l_K)` of the row-1 run `(1, n(K)+1) … (1, n(K+1))`.
pub fn snake_row_run(psi: &Symbol, big_k: usize) -> Option<(usize, usize)> {
    let start = crate::family::pair(1, snake_growth(big_k) + 1);
    let a = psi.position(start).ok()?;
    Some((a, a + snake_growth(big_k + 1) - snake_growth(big_k) - 1))
}

/// Hints for `λ B_ψ` on the snake gradings, in transported coordinates.
pub fn snake_hints(g: SnakeGrading, psi: &Symbol, log_lambda: f64) -> Vec<Hint> {
    let (grade, log_c) = match g {
        SnakeGrading::Lp => (seq2_fn("k", |_, k| k), bound2("ln|lambda|", move |_, _| log_lambda)),
        SnakeGrading::S => (
            seq2_fn("max(k^3, 2k)", |_, k| (k * k * k).max(2 * k)),
            bound2("ln|lambda| + k ln 2", move |_, k| log_lambda + k as f64 * LN_2),
        ),
    };
    let (p1, p2) = (psi.clone(), psi.clone());
    vec![
        Hint::ContinuityBound { level_offset: 1, grade, log_c },
        Hint::ThickZero {
            level: 1,
            runs: run_fn("row-1 run K", move |kk| snake_row_run(&p1, kk).unwrap_or((usize::MAX - 1, usize::MAX))),
            bound: bound2("k ln n(K+1) - j_K ln|lambda|", move |k, kk| {
                let Some((a, _)) = snake_row_run(&p2, kk) else { return f64::NEG_INFINITY };
                let top = match g {
                    SnakeGrading::Lp => 0.0,
                    SnakeGrading::S => k as f64 * (snake_growth(kk + 1) as f64).ln(),
                };
                top - a as f64 * log_lambda
            }),
        },
    ]
}

/// `w_j = √j` transported to `s'`: `log u^{(m)}_j = −m ln j − ½ ln j!`.
pub fn annihilation_hints() -> Vec<Hint> {
    vec![
        Hint::LimitZero { level: 1, beyond: None },
        Hint::ContinuityBound {
            level_offset: 1,
            grade: seq2_fn("k", |_, k| k),
            log_c: bound2("(m + 1/2) ln 2", |m, _| (m as f64 + 0.5) * LN_2),
        },
        Hint::Summable {
            from_level: 1,
            tail: TailBound::Ratio { from: 1, log_q: ratio_fn("-(p/2) ln(j+1)", |_, p, j| -(p / 2.0) * ((j + 1) as f64).ln()) },
        },
    ]
}

pub fn s_prime_hints(p: Option<f64>) -> Vec<Hint> {
    power_series_hints(Alpha::Log, p)
}

pub fn constant_hints() -> Vec<Hint> {
    vec![
        Hint::ContinuityBound { level_offset: 0, grade: seq2_fn("k", |_, k| k), log_c: bound2("0", |_, _| 0.0) },
        Hint::BoundedBelow { along: None, uniform: true, eps_log: level_fn("0", |_| 0.0) },
    ]
}
