use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::ast::*;

const ATOM: u8 = 5;
const UNARY: u8 = 3;

/// Canonical text of a spec; `parse(format(ast)) == ast`.
pub fn format(ast: &SpecAst) -> String {
    let mut out = String::new();
    for (i, d) in ast.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match d {
            Decl::Family(f) => {
                out.push_str(&format!("family {} {{\n", f.name));
                if let Some(p) = &f.p {
                    let t = match p {
                        PValue::C0 => "c0".to_string(),
                        PValue::Finite(r) => rational(r),
                    };
                    out.push_str(&format!("  p = {t}\n"));
                }
                if let Some(l) = &f.lambda {
                    out.push_str(&format!("  lambda = {}\n", rational(l)));
                }
                out.push_str(&format!("  v(m,k,j) = {}\n", format_expr(&f.body)));
                if !f.hints.is_empty() {
                    let hs: Vec<String> = f.hints.iter().map(hint).collect();
                    out.push_str(&format!("  hints {{ {} }}\n", hs.join(", ")));
                }
                out.push_str("}\n");
            }
            Decl::Weights(w) => out.push_str(&format!("weights {} = {}\n", w.name, format_expr(&w.body))),
            Decl::Symbol(s) => {
                let args: Vec<String> = s.args.iter().map(rational).collect();
                out.push_str(&format!("symbol {} = {}({})\n", s.name, s.builtin, args.join(", ")));
            }
        }
    }
    out
}

fn hint(h: &HintDecl) -> String {
    if h.args.is_empty() {
        return h.name.clone();
    }
    let args: Vec<String> = h.args.iter().map(|(k, e)| format!("{k} = {}", format_expr(e))).collect();
    format!("{}({})", h.name, args.join(", "))
}

/// Sorts hints by their canonical text.
pub fn sort_hints(hints: &mut [HintDecl]) {
    hints.sort_by_cached_key(hint);
}

/// Signed rational as a literal: integer, finite decimal, or `n/d`.
pub fn rational(r: &BigRational) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let a = r.abs();
    match decimal(&a) {
        Some(s) => format!("{sign}{s}"),
        None => format!("{sign}{}/{}", a.numer(), a.denom()),
    }
}

/// Finite decimal expansion of a nonnegative rational, if one exists.
fn decimal(r: &BigRational) -> Option<String> {
    if r.is_integer() {
        return Some(r.numer().to_string());
    }
    let mut d = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut a, mut b) = (0usize, 0usize);
    while d.is_even() {
        d /= &two;
        a += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        b += 1;
    }
    if d != BigInt::from(1) {
        return None;
    }
    let scale = a.max(b);
    let scaled = r * BigRational::from_integer(num_traits::pow(BigInt::from(10), scale));
    let digits = format!("{:0>width$}", scaled.to_integer().to_string(), width = scale + 1);
    let (int, frac) = digits.split_at(digits.len() - scale);
    Some(format!("{int}.{frac}"))
}

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Num(_) | ExprKind::Var(_) | ExprKind::Call(..) | ExprKind::Prev(_) => ATOM,
        ExprKind::Neg(_) => UNARY,
        ExprKind::Bin(op, ..) => op.precedence(),
        ExprKind::Cases(..) => 0,
    }
}

fn wrap(e: &Expr, parens: bool) -> String {
    let s = format_expr(e);
    if parens {
        format!("({s})")
    } else {
        s
    }
}

/// Canonical text of an expression with minimal parentheses.
pub fn format_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Num(r) => decimal(r).unwrap_or_else(|| format!("({}/{})", r.numer(), r.denom())),
        ExprKind::Var(v) => v.name().to_string(),
        ExprKind::Prev(o) => format!("prev({o})"),
        ExprKind::Neg(x) => format!("-{}", wrap(x, prec(x) < UNARY)),
        ExprKind::Bin(BinOp::Pow, l, r) => format!("{}^{}", wrap(l, prec(l) <= BinOp::Pow.precedence()), wrap(r, prec(r) < ATOM)),
        ExprKind::Bin(op, l, r) => {
            let p = op.precedence();
            format!("{} {} {}", wrap(l, prec(l) < p), op.symbol(), wrap(r, prec(r) <= p))
        }
        ExprKind::Call(f, args) => {
            let a: Vec<String> = args.iter().map(format_expr).collect();
            format!("{}({})", f.name(), a.join(", "))
        }
        ExprKind::Cases(arms, d) => {
            let mut s = String::new();
            for (p, x) in arms {
                s.push_str(&format!("when {} -> {}; ", format_pred(p), wrap(x, prec(x) == 0)));
            }
            s.push_str(&wrap(d, prec(d) == 0));
            s
        }
    }
}

fn pred_prec(p: &Pred) -> u8 {
    match p {
        Pred::Or(..) => 1,
        Pred::And(..) => 2,
        Pred::Not(_) => 3,
        Pred::Cmp(..) => 4,
    }
}

fn wrap_pred(p: &Pred, parens: bool) -> String {
    let s = format_pred(p);
    if parens {
        format!("({s})")
    } else {
        s
    }
}

pub fn format_pred(p: &Pred) -> String {
    match p {
        Pred::Cmp(op, l, r) => format!("{} {} {}", wrap(l, prec(l) == 0), op.symbol(), wrap(r, prec(r) == 0)),
        Pred::Or(a, b) => format!("{} || {}", wrap_pred(a, pred_prec(a) < 1), wrap_pred(b, pred_prec(b) <= 1)),
        Pred::And(a, b) => format!("{} && {}", wrap_pred(a, pred_prec(a) < 2), wrap_pred(b, pred_prec(b) <= 2)),
        Pred::Not(x) => format!("!{}", wrap_pred(x, pred_prec(x) < 3)),
    }
}
