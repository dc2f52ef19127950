use std::fmt;

use num_rational::BigRational;

use super::Span;

/// Source location that never takes part in equality, so ASTs compare structurally.
#[derive(Clone, Copy, Debug, Default)]
pub struct At(pub Option<Span>);

impl PartialEq for At {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl At {
    pub fn span(self) -> Span {
        self.0.unwrap_or(Span { line: 1, col: 1, len: 0 })
    }
}

impl From<Span> for At {
    fn from(s: Span) -> Self {
        At(Some(s))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecAst {
    pub decls: Vec<Decl>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Family(FamilyDecl),
    Weights(WeightsDecl),
    Symbol(SymbolDecl),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PValue {
    Finite(BigRational),
    C0,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyDecl {
    pub name: String,
    pub p: Option<PValue>,
    pub lambda: Option<BigRational>,
    pub body: Expr,
    /// Kept in canonical order.
    pub hints: Vec<HintDecl>,
    pub at: At,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightsDecl {
    pub name: String,
    pub body: Expr,
    pub at: At,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolDecl {
    pub name: String,
    pub builtin: String,
    pub args: Vec<BigRational>,
    pub at: At,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HintDecl {
    pub name: String,
    pub args: Vec<(String, Expr)>,
    pub at: At,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    M,
    K,
    J,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::M => "m",
            Var::K => "k",
            Var::J => "j",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Pow => "^",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Log2,
    Sqrt,
    LogFactorial,
    Nu2,
    OddPart,
    Ceil,
    Floor,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 11] = [
        Func::Exp,
        Func::Log,
        Func::Log2,
        Func::Sqrt,
        Func::LogFactorial,
        Func::Nu2,
        Func::OddPart,
        Func::Ceil,
        Func::Floor,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Log2 => "log2",
            Func::Sqrt => "sqrt",
            Func::LogFactorial => "logfactorial",
            Func::Nu2 => "nu2",
            Func::OddPart => "oddpart",
            Func::Ceil => "ceil",
            Func::Floor => "floor",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn variadic(self) -> bool {
        matches!(self, Func::Min | Func::Max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pred {
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    /// Nonnegative literal, exact.
    Num(BigRational),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    /// `v^{(m-1,k)}_{j+offset}`.
    Prev(u64),
    /// `when p1 -> e1; when p2 -> e2; default`.
    Cases(Vec<(Pred, Expr)>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub at: At,
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr { kind, at: At::default() }
    }

    pub fn with_at(kind: ExprKind, at: At) -> Self {
        Expr { kind, at }
    }

    pub fn num(n: i64) -> Self {
        Expr::new(ExprKind::Num(BigRational::from_integer(n.into())))
    }

    pub fn var(v: Var) -> Self {
        Expr::new(ExprKind::Var(v))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Self {
        Expr::new(ExprKind::Bin(op, Box::new(l), Box::new(r)))
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Self {
        Expr::new(ExprKind::Call(f, args))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Self {
        Expr::new(ExprKind::Neg(Box::new(e)))
    }

    /// Visits this node and all subexpressions, including those in predicates.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Num(_) | ExprKind::Var(_) | ExprKind::Prev(_) => {}
            ExprKind::Neg(e) => e.walk(f),
            ExprKind::Bin(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            ExprKind::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            ExprKind::Cases(arms, d) => {
                for (p, e) in arms {
                    p.walk(f);
                    e.walk(f);
                }
                d.walk(f);
            }
        }
    }

    pub fn mentions(&self, v: Var) -> bool {
        let mut hit = false;
        self.walk(&mut |e| hit |= matches!(e.kind, ExprKind::Var(w) if w == v));
        hit
    }

    pub fn uses_prev(&self) -> bool {
        let mut hit = false;
        self.walk(&mut |e| hit |= matches!(e.kind, ExprKind::Prev(_)));
        hit
    }
}

impl Pred {
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        match self {
            Pred::Cmp(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            Pred::And(a, b) | Pred::Or(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Pred::Not(p) => p.walk(f),
        }
    }
}

impl fmt::Display for SpecAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::format::format(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::format::format_expr(self))
    }
}
