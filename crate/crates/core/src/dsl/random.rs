//! Seeded generators of well-formed specs.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ast::*;

const LITERALS: [(i64, i64); 7] = [(1, 1), (2, 1), (3, 1), (1, 2), (3, 2), (5, 4), (10, 1)];

fn literal(rng: &mut impl Rng) -> Expr {
    let (n, d) = LITERALS[rng.gen_range(0..LITERALS.len())];
    Expr::new(ExprKind::Num(BigRational::new(n.into(), d.into())))
}

fn var(rng: &mut impl Rng) -> Expr {
    Expr::var([Var::M, Var::K, Var::J][rng.gen_range(0..3)])
}

/// Any well-formed expression; evaluation may fail.
pub fn any_expr(rng: &mut impl Rng, depth: u32) -> Expr {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => literal(rng),
            1 => var(rng),
            _ => Expr::new(ExprKind::Prev(rng.gen_range(0..3))),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..6) {
        0 => Expr::neg(any_expr(rng, d)),
        1 | 2 => {
            let ops = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod, BinOp::Pow];
            Expr::bin(ops[rng.gen_range(0..ops.len())], any_expr(rng, d), any_expr(rng, d))
        }
        3 => {
            let f = Func::ALL[rng.gen_range(0..Func::ALL.len())];
            let n = if f.variadic() { rng.gen_range(1..4) } else { 1 };
            Expr::call(f, (0..n).map(|_| any_expr(rng, d)).collect())
        }
        4 => {
            let arms = (0..rng.gen_range(1..3)).map(|_| (any_pred(rng, d), any_expr(rng, d))).collect();
            Expr::new(ExprKind::Cases(arms, Box::new(any_expr(rng, d))))
        }
        _ => any_expr(rng, 0),
    }
}

fn any_pred(rng: &mut impl Rng, depth: u32) -> Pred {
    let d = depth.saturating_sub(1);
    match rng.gen_range(0..if depth == 0 { 1 } else { 4 }) {
        0 => {
            let ops = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
            Pred::Cmp(ops[rng.gen_range(0..ops.len())], Box::new(any_expr(rng, d)), Box::new(any_expr(rng, d)))
        }
        1 => Pred::And(Box::new(any_pred(rng, d)), Box::new(any_pred(rng, d))),
        2 => Pred::Or(Box::new(any_pred(rng, d)), Box::new(any_pred(rng, d))),
        _ => Pred::Not(Box::new(any_pred(rng, d))),
    }
}

/// Integer-valued expression in `m` and `j` of modest size.
fn small_int(rng: &mut impl Rng) -> Expr {
    match rng.gen_range(0..5) {
        0 => Expr::var(Var::M),
        1 => Expr::call(Func::Nu2, vec![Expr::var(Var::J)]),
        2 => Expr::bin(BinOp::Mod, Expr::var(Var::J), Expr::num(rng.gen_range(2..5))),
        3 => Expr::call(Func::Ceil, vec![Expr::call(Func::Log2, vec![Expr::var(Var::J)])]),
        _ => Expr::num(rng.gen_range(1..4)),
    }
}

/// Expression positive at every `m, j ≥ 1`.
pub fn positive_expr(rng: &mut impl Rng, depth: u32) -> Expr {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => literal(rng),
            1 => Expr::var(Var::J),
            _ => Expr::var(Var::M),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => Expr::bin(BinOp::Mul, positive_expr(rng, d), positive_expr(rng, d)),
        1 => Expr::bin(BinOp::Div, positive_expr(rng, d), positive_expr(rng, d)),
        2 => Expr::bin(BinOp::Add, positive_expr(rng, d), positive_expr(rng, d)),
        3 => {
            let e = small_int(rng);
            let e = if rng.gen_bool(0.6) { Expr::neg(e) } else { e };
            Expr::bin(BinOp::Pow, positive_expr(rng, d), e)
        }
        4 => Expr::call(if rng.gen_bool(0.5) { Func::Min } else { Func::Max }, vec![positive_expr(rng, d), positive_expr(rng, d)]),
        5 => {
            let pred = Pred::Cmp(CmpOp::Eq, Box::new(Expr::bin(BinOp::Mod, Expr::var(Var::J), Expr::num(rng.gen_range(2..4)))), Box::new(Expr::num(0)));
            Expr::new(ExprKind::Cases(vec![(pred, positive_expr(rng, d))], Box::new(positive_expr(rng, d))))
        }
        6 => Expr::call(Func::Exp, vec![Expr::neg(Expr::bin(BinOp::Mul, Expr::var(Var::M), Expr::call(Func::Sqrt, vec![Expr::var(Var::J)])))]),
        _ => positive_expr(rng, 0),
    }
}

/// A random spec whose family is positive everywhere; compiles without hints.
pub fn random_family(seed: u64) -> SpecAst {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let body = positive_expr(&mut rng, 3);
    let p = match rng.gen_range(0..3) {
        0 => None,
        1 => Some(PValue::Finite(BigRational::from_integer(1.into()))),
        _ => Some(PValue::C0),
    };
    SpecAst {
        decls: vec![Decl::Family(FamilyDecl { name: format!("random{seed}"), p, lambda: None, body, hints: vec![], at: At::default() })],
    }
}

/// A random well-formed spec for round-trip testing.
pub fn random_spec(seed: u64) -> SpecAst {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let body = any_expr(&mut rng, 4);
    let mut hints: Vec<HintDecl> = (0..rng.gen_range(0..3))
        .map(|_| {
            let s = &super::HINTS[rng.gen_range(0..super::HINTS.len())];
            let mut args = Vec::new();
            for k in s.keys {
                if !(k.required || rng.gen_bool(0.5)) {
                    continue;
                }
                let e = match k.default {
                    Some(_) => Expr::num(rng.gen_range(0..4)),
                    None => Expr::bin(BinOp::Add, Expr::var(Var::M), literal(&mut rng)),
                };
                args.push((k.name.to_string(), e));
            }
            HintDecl { name: s.name.to_string(), args, at: At::default() }
        })
        .collect();
    super::format::sort_hints(&mut hints);
    let mut decls = vec![Decl::Family(FamilyDecl {
        name: format!("f{seed}"),
        p: rng.gen_bool(0.5).then(|| PValue::Finite(BigRational::new(rng.gen_range(2..9).into(), 2.into()))),
        lambda: rng.gen_bool(0.5).then(|| BigRational::new(rng.gen_range(-5..=5i64).max(1).into(), rng.gen_range(1..4i64).into())),
        body,
        hints,
        at: At::default(),
    })];
    if rng.gen_bool(0.3) {
        let w = Expr::bin(BinOp::Add, Expr::var(Var::J), literal(&mut rng));
        decls.push(Decl::Weights(WeightsDecl { name: "w".into(), body: w, at: At::default() }));
    }
    if rng.gen_bool(0.3) {
        decls.push(Decl::Symbol(SymbolDecl { name: "psi".into(), builtin: "successor".into(), args: vec![], at: At::default() }));
    }
    SpecAst { decls }
}
