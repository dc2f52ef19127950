use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ast::*;
use super::Diagnostic;
use crate::scalar::ln_abs_ratio;

/// Exact values wider than this many bits fall back to log-magnitudes in float mode.
const MAX_BITS: u64 = 2048;

/// A real number: exact rational, or sign and `log |x|`.
#[derive(Clone, Debug, PartialEq)]
pub enum Num {
    Exact(BigRational),
    Approx { neg: bool, log: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Exact while cheap, log-magnitude otherwise.
    Float,
    /// Exact only; any inexact step is an error.
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalError {
    pub at: At,
    pub message: String,
}

impl EvalError {
    fn new(at: At, message: impl Into<String>) -> Self {
        EvalError { at, message: message.into() }
    }

    pub fn diagnostic(&self) -> Diagnostic {
        Diagnostic::new(self.at.span(), self.message.clone())
    }
}

type EResult<T> = Result<T, EvalError>;

fn int(n: i64) -> Num {
    Num::Exact(BigRational::from_integer(n.into()))
}

impl Num {
    pub fn from_f64(v: f64) -> Num {
        Num::Approx { neg: v < 0.0, log: v.abs().ln() }
    }

    fn zero() -> Num {
        int(0)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Num::Exact(r) => r.is_zero(),
            Num::Approx { log, .. } => *log == f64::NEG_INFINITY,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Num::Exact(r) => r.is_negative(),
            Num::Approx { neg, log } => *neg && *log > f64::NEG_INFINITY,
        }
    }

    /// `(negative, log |x|)`.
    pub fn slog(&self) -> (bool, f64) {
        match self {
            Num::Exact(r) if r.is_zero() => (false, f64::NEG_INFINITY),
            Num::Exact(r) => (r.is_negative(), ln_abs_ratio(r)),
            Num::Approx { neg, log } => (*neg && *log > f64::NEG_INFINITY, *log),
        }
    }

    pub fn to_f64(&self) -> f64 {
        let (neg, log) = self.slog();
        let v = log.exp();
        if neg {
            -v
        } else {
            v
        }
    }

    /// `log x` for positive `x`.
    pub fn ln(&self) -> Option<f64> {
        let (neg, log) = self.slog();
        (!neg && log > f64::NEG_INFINITY && !log.is_nan()).then_some(log)
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Num::Exact(r) => Some(r),
            Num::Approx { .. } => None,
        }
    }

    fn integer(&self) -> Option<BigInt> {
        self.exact().filter(|r| r.is_integer()).map(|r| r.to_integer())
    }
}

fn bits(r: &BigRational) -> u64 {
    r.numer().bits() + r.denom().bits()
}

fn cap(mode: Mode, r: BigRational) -> Num {
    if mode == Mode::Float && bits(&r) > MAX_BITS {
        let (neg, log) = (r.is_negative(), ln_abs_ratio(&r));
        Num::Approx { neg, log }
    } else {
        Num::Exact(r)
    }
}

/// Arithmetic on word-sized rationals, avoiding big-integer normalization.
fn small_int_op(op: BinOp, x: &BigRational, y: &BigRational) -> Option<Num> {
    let word = |r: &BigRational| {
        (r.numer().bits() <= 62 && r.denom().bits() <= 62)
            .then(|| Ratio::new_raw(r.numer().to_i64().unwrap() as i128, r.denom().to_i64().unwrap() as i128))
    };
    let (a, b) = (word(x)?, word(y)?);
    let v = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div if !b.is_zero() => a / b,
        _ => return None,
    };
    Some(Num::Exact(BigRational::new_raw(BigInt::from(*v.numer()), BigInt::from(*v.denom()))))
}

fn slog_add(a: (bool, f64), b: (bool, f64)) -> Num {
    let ((na, la), (nb, lb)) = (a, b);
    if la == f64::NEG_INFINITY {
        return Num::Approx { neg: nb, log: lb };
    }
    if lb == f64::NEG_INFINITY {
        return Num::Approx { neg: na, log: la };
    }
    let (hi, lo) = if la >= lb { (a, b) } else { (b, a) };
    if na == nb {
        Num::Approx { neg: na, log: hi.1 + (lo.1 - hi.1).exp().ln_1p() }
    } else if la == lb {
        Num::zero()
    } else {
        Num::Approx { neg: hi.0, log: hi.1 + (-(lo.1 - hi.1).exp()).ln_1p() }
    }
}

pub fn compare(a: &Num, b: &Num) -> Ordering {
    if let (Num::Exact(x), Num::Exact(y)) = (a, b) {
        return x.cmp(y);
    }
    let ((na, la), (nb, lb)) = (a.slog(), b.slog());
    let za = la == f64::NEG_INFINITY;
    let zb = lb == f64::NEG_INFINITY;
    let sa = if za { 0 } else if na { -1 } else { 1 };
    let sb = if zb { 0 } else if nb { -1 } else { 1 };
    match sa.cmp(&sb) {
        Ordering::Equal if sa == 0 => Ordering::Equal,
        Ordering::Equal if sa > 0 => la.partial_cmp(&lb).unwrap_or(Ordering::Equal),
        Ordering::Equal => lb.partial_cmp(&la).unwrap_or(Ordering::Equal),
        o => o,
    }
}

/// `ln n!`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 256 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = n as f64 + 1.0;
    // Stirling series for ln Γ(x)
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

/// `log2 q` when `q` is an integral power of two.
fn exact_log2(q: &BigRational) -> Option<i64> {
    let pow2 = |n: &BigInt| (n.is_positive() && (n & (n - BigInt::one())).is_zero()).then(|| n.bits() as i64 - 1);
    if !q.is_positive() {
        return None;
    }
    if q.denom().is_one() {
        pow2(q.numer())
    } else if q.numer().is_one() {
        pow2(q.denom()).map(|e| -e)
    } else {
        None
    }
}

/// `⌊log2 q⌋` for positive rational `q`.
fn floor_log2(q: &BigRational) -> i64 {
    let (n, d) = (q.numer(), q.denom());
    let mut e = n.bits() as i64 - d.bits() as i64;
    let holds = |e: i64| -> bool {
        // 2^e <= n/d
        if e >= 0 {
            (d << e as usize) <= *n
        } else {
            *d <= (n << (-e) as usize)
        }
    };
    while !holds(e) {
        e -= 1;
    }
    while holds(e + 1) {
        e += 1;
    }
    e
}

fn exact_sqrt(q: &BigRational) -> Option<BigRational> {
    let (n, d) = (q.numer().sqrt(), q.denom().sqrt());
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}

type Memo = HashMap<(usize, usize, usize), Num>;

/// Evaluator for a family body or a weight expression, memoizing `prev` levels.
pub struct Evaluator {
    body: Arc<Expr>,
    mode: Mode,
    memo: Option<Mutex<Memo>>,
}

impl Evaluator {
    pub fn new(body: Arc<Expr>, mode: Mode) -> Self {
        let memo = body.uses_prev().then(|| Mutex::new(HashMap::new()));
        Evaluator { body, mode, memo }
    }

    pub fn eval(&self, m: usize, k: usize, j: usize) -> EResult<Num> {
        if let Some(memo) = &self.memo {
            if let Some(v) = memo.lock().expect("memo lock").get(&(m, k, j)) {
                return Ok(v.clone());
            }
            let v = self.expr(&self.body, m, k, j)?;
            memo.lock().expect("memo lock").insert((m, k, j), v.clone());
            return Ok(v);
        }
        self.expr(&self.body, m, k, j)
    }

    /// `log v` for a positive value.
    pub fn eval_log(&self, m: usize, k: usize, j: usize) -> EResult<f64> {
        let v = self.eval(m, k, j)?;
        v.ln().ok_or_else(|| EvalError::new(self.body.at, format!("non-positive value at probe (m={m}, k={k}, j={j})")))
    }

    pub fn eval_exact(&self, m: usize, k: usize, j: usize) -> EResult<BigRational> {
        match self.eval(m, k, j)? {
            Num::Exact(r) => Ok(r),
            Num::Approx { .. } => Err(EvalError::new(self.body.at, "value is not rational")),
        }
    }

    fn inexact(&self, at: At, what: &str) -> EResult<()> {
        if self.mode == Mode::Exact {
            Err(EvalError::new(at, format!("{what} is not exact in rational mode")))
        } else {
            Ok(())
        }
    }

    fn expr(&self, e: &Expr, m: usize, k: usize, j: usize) -> EResult<Num> {
        let at = e.at;
        Ok(match &e.kind {
            ExprKind::Num(r) => Num::Exact(r.clone()),
            ExprKind::Var(v) => int(match v {
                Var::M => m,
                Var::K => k,
                Var::J => j,
            } as i64),
            ExprKind::Prev(off) => {
                if m <= 1 {
                    return Err(EvalError::new(at, "recursion without base level: `prev` reached at level 1"));
                }
                self.eval(m - 1, k, j + *off as usize)?
            }
            ExprKind::Neg(x) => match self.expr(x, m, k, j)? {
                Num::Exact(r) => Num::Exact(-r),
                Num::Approx { neg, log } => Num::Approx { neg: !neg, log },
            },
            ExprKind::Bin(op, l, r) => {
                let a = self.expr(l, m, k, j)?;
                let b = self.expr(r, m, k, j)?;
                self.binary(*op, a, b, at)?
            }
            ExprKind::Call(f, args) => self.call(*f, args, m, k, j, at)?,
            ExprKind::Cases(arms, d) => {
                for (p, x) in arms {
                    if self.pred(p, m, k, j)? {
                        return self.expr(x, m, k, j);
                    }
                }
                self.expr(d, m, k, j)?
            }
        })
    }

    fn pred(&self, p: &Pred, m: usize, k: usize, j: usize) -> EResult<bool> {
        Ok(match p {
            Pred::Cmp(op, l, r) => {
                let o = compare(&self.expr(l, m, k, j)?, &self.expr(r, m, k, j)?);
                match op {
                    CmpOp::Eq => o == Ordering::Equal,
                    CmpOp::Ne => o != Ordering::Equal,
                    CmpOp::Lt => o == Ordering::Less,
                    CmpOp::Le => o != Ordering::Greater,
                    CmpOp::Gt => o == Ordering::Greater,
                    CmpOp::Ge => o != Ordering::Less,
                }
            }
            Pred::And(a, b) => self.pred(a, m, k, j)? && self.pred(b, m, k, j)?,
            Pred::Or(a, b) => self.pred(a, m, k, j)? || self.pred(b, m, k, j)?,
            Pred::Not(a) => !self.pred(a, m, k, j)?,
        })
    }

    fn binary(&self, op: BinOp, a: Num, b: Num, at: At) -> EResult<Num> {
        let mode = self.mode;
        if let (Num::Exact(x), Num::Exact(y)) = (&a, &b) {
            if let Some(v) = small_int_op(op, x, y) {
                return Ok(v);
            }
            match op {
                BinOp::Add => return Ok(cap(mode, x + y)),
                BinOp::Sub => return Ok(cap(mode, x - y)),
                BinOp::Mul => return Ok(cap(mode, x * y)),
                BinOp::Div if y.is_zero() => return Err(EvalError::new(at, "division by zero")),
                BinOp::Div => return Ok(cap(mode, x / y)),
                _ => {}
            }
        }
        match op {
            BinOp::Add | BinOp::Sub => {
                self.inexact(at, "arithmetic on an irrational value")?;
                let (nb, lb) = b.slog();
                Ok(slog_add(a.slog(), (nb ^ (op == BinOp::Sub), lb)))
            }
            BinOp::Mul | BinOp::Div => {
                self.inexact(at, "arithmetic on an irrational value")?;
                if b.is_zero() && op == BinOp::Div {
                    return Err(EvalError::new(at, "division by zero"));
                }
                if a.is_zero() || b.is_zero() {
                    return Ok(Num::zero());
                }
                let ((na, la), (nb, lb)) = (a.slog(), b.slog());
                Ok(Num::Approx { neg: na ^ nb, log: if op == BinOp::Mul { la + lb } else { la - lb } })
            }
            BinOp::Mod => match (a.integer(), b.integer()) {
                (Some(x), Some(y)) if y.is_positive() => Ok(Num::Exact(BigRational::from_integer(x.mod_floor(&y)))),
                _ => Err(EvalError::new(at, "`%` needs integer operands and a positive modulus")),
            },
            BinOp::Pow => self.pow(a, b, at),
        }
    }

    fn pow(&self, a: Num, b: Num, at: At) -> EResult<Num> {
        if let Some(e) = b.integer().and_then(|e| e.to_i64()) {
            if a.is_zero() {
                return match e.cmp(&0) {
                    Ordering::Greater => Ok(Num::zero()),
                    Ordering::Equal => Ok(int(1)),
                    Ordering::Less => Err(EvalError::new(at, "zero raised to a negative power")),
                };
            }
            if let Num::Exact(x) = &a {
                let est = e.unsigned_abs().saturating_mul(bits(x));
                if self.mode == Mode::Exact || est <= MAX_BITS {
                    let Ok(e32) = i32::try_from(e) else {
                        return Err(EvalError::new(at, "exponent too large for exact evaluation"));
                    };
                    return Ok(Num::Exact(x.pow(e32)));
                }
            }
            let (neg, log) = a.slog();
            return Ok(Num::Approx { neg: neg && e % 2 != 0, log: e as f64 * log });
        }
        if a.is_negative() {
            return Err(EvalError::new(at, "negative base with a non-integer exponent"));
        }
        if a.is_zero() {
            return if b.is_negative() || b.is_zero() {
                Err(EvalError::new(at, "zero raised to a non-positive power"))
            } else {
                Ok(Num::zero())
            };
        }
        if a.exact().is_some_and(|x| x.is_one()) {
            return Ok(int(1));
        }
        self.inexact(at, "a non-integer power")?;
        Ok(Num::Approx { neg: false, log: b.to_f64() * a.slog().1 })
    }

    fn call(&self, f: Func, args: &[Expr], m: usize, k: usize, j: usize, at: At) -> EResult<Num> {
        if matches!(f, Func::Ceil | Func::Floor) {
            if let ExprKind::Call(Func::Log2, inner) = &args[0].kind {
                if let Num::Exact(q) = self.expr(&inner[0], m, k, j)? {
                    if !q.is_positive() {
                        return Err(EvalError::new(args[0].at, "log2 of a non-positive value"));
                    }
                    let fl = floor_log2(&q);
                    let exact = exact_log2(&q).is_some();
                    return Ok(int(if f == Func::Floor || exact { fl } else { fl + 1 }));
                }
            }
        }
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.expr(a, m, k, j)?);
        }
        if f.variadic() {
            let want = if f == Func::Min { Ordering::Less } else { Ordering::Greater };
            let mut best = vals.swap_remove(0);
            for v in vals {
                if compare(&v, &best) == want {
                    best = v;
                }
            }
            return Ok(best);
        }
        let x = vals.pop().expect("arity checked by the parser");
        let positive = |what: &str| -> EResult<()> {
            if x.is_negative() || x.is_zero() {
                Err(EvalError::new(at, format!("{what} of a non-positive value")))
            } else {
                Ok(())
            }
        };
        let pos_int = |what: &str| -> EResult<BigInt> {
            x.integer()
                .filter(|n| n.is_positive())
                .ok_or_else(|| EvalError::new(at, format!("{what} needs a positive integer")))
        };
        Ok(match f {
            Func::Exp => {
                if x.is_zero() {
                    return Ok(int(1));
                }
                self.inexact(at, "exp")?;
                Num::Approx { neg: false, log: x.to_f64() }
            }
            Func::Log | Func::Log2 => {
                positive(f.name())?;
                let l = x.slog().1;
                if let Some(e) = x.exact().and_then(|q| if f == Func::Log2 { exact_log2(q) } else { q.is_one().then_some(0) }) {
                    return Ok(int(e));
                }
                self.inexact(at, f.name())?;
                Num::from_f64(if f == Func::Log2 { l / LN_2 } else { l })
            }
            Func::Sqrt => {
                if x.is_negative() {
                    return Err(EvalError::new(at, "sqrt of a negative value"));
                }
                if let Some(r) = x.exact().and_then(exact_sqrt) {
                    return Ok(Num::Exact(r));
                }
                self.inexact(at, "sqrt")?;
                let (_, l) = x.slog();
                Num::Approx { neg: false, log: l / 2.0 }
            }
            Func::LogFactorial => {
                let n = x
                    .integer()
                    .filter(|n| !n.is_negative())
                    .and_then(|n| n.to_u64())
                    .ok_or_else(|| EvalError::new(at, "logfactorial needs a nonnegative integer"))?;
                if n <= 1 {
                    return Ok(int(0));
                }
                self.inexact(at, "logfactorial")?;
                Num::from_f64(ln_factorial(n))
            }
            Func::Nu2 => {
                let n = pos_int("nu2")?;
                int(n.trailing_zeros().unwrap_or(0) as i64)
            }
            Func::OddPart => {
                let n = pos_int("oddpart")?;
                let t = n.trailing_zeros().unwrap_or(0);
                Num::Exact(BigRational::from_integer(n >> t as usize))
            }
            Func::Ceil | Func::Floor => match &x {
                Num::Exact(r) => Num::Exact(BigRational::from_integer(if f == Func::Ceil { r.ceil() } else { r.floor() }.to_integer())),
                Num::Approx { .. } => {
                    let v = x.to_f64();
                    let v = if f == Func::Ceil { v.ceil() } else { v.floor() };
                    if !v.is_finite() || v.abs() > 9.0e15 {
                        return Err(EvalError::new(at, "rounding overflow"));
                    }
                    int(v as i64)
                }
            },
            Func::Min | Func::Max => unreachable!("variadic handled above"),
        })
    }
}

/// Whether every step of `e` stays rational: no transcendental calls outside `ceil/floor(log2(·))`,
/// and powers only with integer exponents.
pub fn is_rational(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Num(_) | ExprKind::Var(_) | ExprKind::Prev(_) => true,
        ExprKind::Neg(x) => is_rational(x),
        ExprKind::Bin(BinOp::Pow, l, r) => is_rational(l) && is_rational(r) && is_integer(r),
        ExprKind::Bin(_, l, r) => is_rational(l) && is_rational(r),
        ExprKind::Call(f, args) => match f {
            Func::Exp | Func::Log | Func::Log2 | Func::Sqrt | Func::LogFactorial => false,
            Func::Ceil | Func::Floor => match &args[0].kind {
                ExprKind::Call(Func::Log2, inner) => is_rational(&inner[0]),
                _ => is_rational(&args[0]),
            },
            _ => args.iter().all(is_rational),
        },
        ExprKind::Cases(arms, d) => arms.iter().all(|(p, x)| pred_rational(p) && is_rational(x)) && is_rational(d),
    }
}

fn pred_rational(p: &Pred) -> bool {
    match p {
        Pred::Cmp(_, l, r) => is_rational(l) && is_rational(r),
        Pred::And(a, b) | Pred::Or(a, b) => pred_rational(a) && pred_rational(b),
        Pred::Not(a) => pred_rational(a),
    }
}

/// Whether `e` is integer-valued wherever it is defined.
pub fn is_integer(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Num(r) => r.is_integer(),
        ExprKind::Var(_) => true,
        ExprKind::Prev(_) => false,
        ExprKind::Neg(x) => is_integer(x),
        ExprKind::Bin(BinOp::Add | BinOp::Sub | BinOp::Mul, l, r) => is_integer(l) && is_integer(r),
        ExprKind::Bin(BinOp::Mod, ..) => true,
        ExprKind::Bin(..) => false,
        ExprKind::Call(f, args) => match f {
            Func::Nu2 | Func::OddPart => true,
            Func::Ceil | Func::Floor => true,
            Func::Min | Func::Max => args.iter().all(is_integer),
            _ => false,
        },
        ExprKind::Cases(arms, d) => arms.iter().all(|(_, x)| is_integer(x)) && is_integer(d),
    }
}
