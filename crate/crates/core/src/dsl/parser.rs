use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::ast::*;
use super::compile::{hint_schema, SYMBOL_BUILTINS};
use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, Span};

/// Where an expression appears; decides which names resolve.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Family,
    Weights,
    Hint,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    ctx: Ctx,
}

type PResult<T> = Result<T, Diagnostic>;

/// Parses a `.kws` source text.
pub fn parse(src: &str) -> PResult<SpecAst> {
    let mut p = Parser { toks: lex(src)?, pos: 0, ctx: Ctx::Family };
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        decls.push(p.decl()?);
    }
    if decls.is_empty() {
        return Err(Diagnostic::new(p.span(), "expected at least one declaration"));
    }
    Ok(SpecAst { decls })
}

/// Parses a single expression over `m`, `k`, `j` (as in a family body).
pub fn parse_expr(src: &str) -> PResult<Expr> {
    let mut p = Parser { toks: lex(src)?, pos: 0, ctx: Ctx::Family };
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

/// Exact value of a decimal literal such as `12`, `0.25` or `1e-3`.
pub fn decimal_value(text: &str) -> Option<BigRational> {
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int}{frac}");
    if digits.is_empty() {
        return None;
    }
    let n: BigInt = digits.parse().ok()?;
    let scale = exp - frac.len() as i64;
    if scale.unsigned_abs() > 4096 {
        return None;
    }
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    /// Span from `start` through the last consumed token.
    fn from(&self, start: Span) -> At {
        let end = self.toks[self.pos.saturating_sub(1)].span;
        if end.line == start.line && end.col + end.len >= start.col {
            Span { len: end.col + end.len - start.col, ..start }.into()
        } else {
            start.into()
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, want: &str) -> Diagnostic {
        Diagnostic::new(self.span(), format!("expected {want}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, t: Tok) -> PResult<Span> {
        if *self.peek() == t {
            Ok(self.bump().span)
        } else {
            let want = if t == Tok::Eof { "end of input".to_string() } else { format!("`{}`", t.symbol()) };
            Err(self.unexpected(&want))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.unexpected(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.bump().span),
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn decl(&mut self) -> PResult<Decl> {
        let (kw, span) = self.ident("`family`, `weights` or `symbol`")?;
        match kw.as_str() {
            "family" => self.family(span).map(Decl::Family),
            "weights" => {
                let (name, _) = self.ident("a weights name")?;
                self.expect(Tok::Assign)?;
                self.ctx = Ctx::Weights;
                let body = self.expr()?;
                self.ctx = Ctx::Family;
                Ok(Decl::Weights(WeightsDecl { name, body, at: span.into() }))
            }
            "symbol" => {
                let (name, _) = self.ident("a symbol name")?;
                self.expect(Tok::Assign)?;
                let (builtin, bspan) = self.ident("a builtin symbol")?;
                if !SYMBOL_BUILTINS.contains(&builtin.as_str()) {
                    return Err(Diagnostic::new(
                        bspan,
                        format!("unknown symbol builtin `{builtin}` (known: {})", SYMBOL_BUILTINS.join(", ")),
                    ));
                }
                self.expect(Tok::LParen)?;
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.signed_rational()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.signed_rational()?);
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(Decl::Symbol(SymbolDecl { name, builtin, args, at: span.into() }))
            }
            _ => Err(Diagnostic::new(span, format!("expected `family`, `weights` or `symbol`, found identifier `{kw}`"))),
        }
    }

    fn family(&mut self, span: Span) -> PResult<FamilyDecl> {
        let (name, _) = self.ident("a family name")?;
        self.expect(Tok::LBrace)?;
        let mut p = None;
        if self.at_keyword("p") {
            self.bump();
            self.expect(Tok::Assign)?;
            p = Some(if self.at_keyword("c0") {
                self.bump();
                PValue::C0
            } else {
                let s = self.span();
                let r = self.signed_rational()?;
                if r < BigRational::from_integer(1.into()) {
                    return Err(Diagnostic::new(s, "exponent p must be at least 1 (or c0)"));
                }
                PValue::Finite(r)
            });
        }
        let mut lambda = None;
        if self.at_keyword("lambda") {
            self.bump();
            self.expect(Tok::Assign)?;
            let s = self.span();
            let r = self.signed_rational()?;
            if r.is_zero() {
                return Err(Diagnostic::new(s, "lambda must be nonzero"));
            }
            lambda = Some(r);
        }
        self.keyword("v")?;
        self.expect(Tok::LParen)?;
        for (i, v) in ["m", "k", "j"].into_iter().enumerate() {
            if i > 0 {
                self.expect(Tok::Comma)?;
            }
            self.keyword(v)?;
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Assign)?;
        self.ctx = Ctx::Family;
        let body = self.expr()?;
        let mut hints = Vec::new();
        if self.at_keyword("hints") {
            self.bump();
            self.expect(Tok::LBrace)?;
            hints.push(self.hint()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                hints.push(self.hint()?);
            }
            self.expect(Tok::RBrace)?;
        }
        self.expect(Tok::RBrace)?;
        super::format::sort_hints(&mut hints);
        Ok(FamilyDecl { name, p, lambda, body, hints, at: span.into() })
    }

    fn hint(&mut self) -> PResult<HintDecl> {
        let (name, span) = self.ident("a hint name")?;
        let Some(schema) = hint_schema(&name) else {
            return Err(Diagnostic::new(span, format!("unknown hint `{name}`")));
        };
        let mut args: Vec<(String, Expr)> = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            self.ctx = Ctx::Hint;
            loop {
                let (key, kspan) = self.ident("a hint argument name")?;
                if !schema.keys.iter().any(|k| k.name == key) {
                    return Err(Diagnostic::new(kspan, format!("hint `{name}` has no argument `{key}`")));
                }
                if args.iter().any(|(k, _)| *k == key) {
                    return Err(Diagnostic::new(kspan, format!("argument `{key}` given twice")));
                }
                self.expect(Tok::Assign)?;
                args.push((key, self.arith()?));
                if *self.peek() == Tok::Comma {
                    self.bump();
                    continue;
                }
                break;
            }
            self.ctx = Ctx::Family;
            self.expect(Tok::RParen)?;
        }
        if let Some(k) = schema.keys.iter().find(|k| k.required && !args.iter().any(|(a, _)| a == k.name)) {
            return Err(Diagnostic::new(span, format!("hint `{name}` needs argument `{}`", k.name)));
        }
        args.sort_by_key(|(k, _)| schema.keys.iter().position(|s| s.name == k));
        Ok(HintDecl { name, args, at: span.into() })
    }

    fn signed_rational(&mut self) -> PResult<BigRational> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let mut r = self.number()?.0;
        if *self.peek() == Tok::Slash {
            self.bump();
            let (d, s) = self.number()?;
            if d.is_zero() {
                return Err(Diagnostic::new(s, "division by zero"));
            }
            r /= d;
        }
        Ok(if neg { -r } else { r })
    }

    fn number(&mut self) -> PResult<(BigRational, Span)> {
        match self.peek().clone() {
            Tok::Number(text) => {
                let span = self.bump().span;
                decimal_value(&text)
                    .map(|v| (v, span))
                    .ok_or_else(|| Diagnostic::new(span, format!("malformed number `{text}`")))
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        if self.at_keyword("when") {
            let start = self.span();
            let mut arms = Vec::new();
            while self.at_keyword("when") {
                self.bump();
                let pred = self.pred()?;
                self.expect(Tok::Arrow)?;
                let e = self.arith()?;
                self.expect(Tok::Semi)?;
                arms.push((pred, e));
            }
            let d = self.arith()?;
            return Ok(Expr::with_at(ExprKind::Cases(arms, Box::new(d)), self.from(start)));
        }
        self.arith()
    }

    fn pred(&mut self) -> PResult<Pred> {
        let mut l = self.pred_and()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            let r = self.pred_and()?;
            l = Pred::Or(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn pred_and(&mut self) -> PResult<Pred> {
        let mut l = self.pred_not()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            let r = self.pred_not()?;
            l = Pred::And(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn pred_not(&mut self) -> PResult<Pred> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Pred::Not(Box::new(self.pred_not()?)));
        }
        if *self.peek() == Tok::LParen {
            let save = self.pos;
            self.bump();
            if let Ok(p) = self.pred() {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(p);
                }
            }
            self.pos = save;
        }
        let l = self.arith()?;
        let op = match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::NotEq => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let r = self.arith()?;
        Ok(Pred::Cmp(op, Box::new(l), Box::new(r)))
    }

    fn arith(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut l = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(l),
            };
            self.bump();
            let r = self.term()?;
            l = Expr::with_at(ExprKind::Bin(op, Box::new(l), Box::new(r)), self.from(start));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut l = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => return Ok(l),
            };
            self.bump();
            let r = self.unary()?;
            l = Expr::with_at(ExprKind::Bin(op, Box::new(l), Box::new(r)), self.from(start));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            let start = self.bump().span;
            let e = self.unary()?;
            return Ok(Expr::with_at(ExprKind::Neg(Box::new(e)), self.from(start)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let start = self.span();
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::with_at(ExprKind::Bin(BinOp::Pow, Box::new(base), Box::new(exp)), self.from(start)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(_) => {
                let (v, s) = self.number()?;
                Ok(Expr::with_at(ExprKind::Num(v), s.into()))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "m" | "k" | "j" => {
                        let v = match name.as_str() {
                            "m" => Var::M,
                            "k" => Var::K,
                            _ => Var::J,
                        };
                        let allowed = match self.ctx {
                            Ctx::Family => true,
                            Ctx::Weights => v == Var::J,
                            Ctx::Hint => v == Var::M,
                        };
                        if !allowed {
                            return Err(Diagnostic::new(span, format!("`{name}` is not available {}", self.ctx_desc())));
                        }
                        Ok(Expr::with_at(ExprKind::Var(v), span.into()))
                    }
                    "prev" => {
                        if self.ctx != Ctx::Family {
                            return Err(Diagnostic::new(span, format!("`prev` is not available {}", self.ctx_desc())));
                        }
                        self.expect(Tok::LParen)?;
                        let s = self.span();
                        let neg = *self.peek() == Tok::Minus;
                        let (v, _) = if neg {
                            self.bump();
                            self.number()?
                        } else {
                            self.number()?
                        };
                        let off = (!neg && v.is_integer() && !v.is_negative()).then(|| v.to_integer().to_u64()).flatten();
                        let Some(off) = off else {
                            return Err(Diagnostic::new(s, "prev offset must be a nonnegative integer literal"));
                        };
                        self.expect(Tok::RParen)?;
                        Ok(Expr::with_at(ExprKind::Prev(off), self.from(span)))
                    }
                    _ => {
                        let Some(f) = Func::from_name(&name) else {
                            return Err(Diagnostic::new(span, format!("unknown identifier `{name}`")));
                        };
                        self.expect(Tok::LParen)?;
                        let mut args = vec![self.expr()?];
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.expr()?);
                        }
                        let close = self.expect(Tok::RParen)?;
                        if !f.variadic() && args.len() != 1 {
                            let len = if close.line == span.line { close.col + 1 - span.col } else { name.len() };
                            let sp = Span { len, ..span };
                            return Err(Diagnostic::new(sp, format!("`{name}` takes one argument, got {}", args.len())));
                        }
                        Ok(Expr::with_at(ExprKind::Call(f, args), self.from(span)))
                    }
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn ctx_desc(&self) -> &'static str {
        match self.ctx {
            Ctx::Family => "in a family body",
            Ctx::Weights => "in a weights expression (only `j`)",
            Ctx::Hint => "in a hint argument (only `m`)",
        }
    }
}
