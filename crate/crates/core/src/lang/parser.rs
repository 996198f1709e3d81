use crate::syntax::{AggKind, Quantifier, Span};

use super::ast::{BinOp, Expr, ExprKind, RawBinder, RawSentence, RawSetExpr};
use super::lexer::{lex, Tok, Token};
use super::{ErrorKind, LangError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawValue {
    Ident(String),
    Int(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawItem {
    pub tuple: Vec<RawValue>,
    pub target: Option<RawValue>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawRhs {
    Set(Vec<RawItem>),
    Scalar(RawValue),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawEntry {
    pub name: String,
    pub rhs: RawRhs,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawDecl {
    Type {
        name: String,
        range: Option<(i64, i64)>,
    },
    Symbol {
        name: String,
        args: Vec<String>,
        result: Option<String>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawProblem {
    pub decls: Vec<(RawDecl, Span)>,
    pub sentences: Vec<RawSentence>,
    pub entries: Vec<RawEntry>,
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

const PREC_EQUIV: u8 = 1;
const PREC_IMPLIES: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_NOT: u8 = 5;
const PREC_CMP: u8 = 6;
const PREC_ADD: u8 = 7;
const PREC_MUL: u8 = 8;
const PREC_NEG: u8 = 9;

fn binop(t: &Tok) -> Option<(BinOp, u8)> {
    Some(match t {
        Tok::Equiv => (BinOp::Equiv, PREC_EQUIV),
        Tok::Implies => (BinOp::Implies, PREC_IMPLIES),
        Tok::Or => (BinOp::Or, PREC_OR),
        Tok::And => (BinOp::And, PREC_AND),
        Tok::Eq => (BinOp::Eq, PREC_CMP),
        Tok::Ne => (BinOp::Ne, PREC_CMP),
        Tok::Lt => (BinOp::Lt, PREC_CMP),
        Tok::Le => (BinOp::Le, PREC_CMP),
        Tok::Gt => (BinOp::Gt, PREC_CMP),
        Tok::Ge => (BinOp::Ge, PREC_CMP),
        Tok::Plus => (BinOp::Add, PREC_ADD),
        Tok::Minus => (BinOp::Sub, PREC_ADD),
        Tok::Star => (BinOp::Mul, PREC_MUL),
        _ => return None,
    })
}

fn agg_kind(name: &str) -> Option<AggKind> {
    Some(match name {
        "sum" => AggKind::Sum,
        "card" => AggKind::Card,
        "min" => AggKind::Min,
        "max" => AggKind::Max,
        "prod" => AggKind::Prod,
        _ => return None,
    })
}

impl Parser {
    pub fn new(src: &str) -> Result<Parser, LangError> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, what: &str) -> Result<T, LangError> {
        Err(LangError {
            kind: ErrorKind::Syntax,
            span: self.span(),
            message: format!("expected {what}, found {}", self.peek().describe()),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<Span, LangError> {
        if self.peek() == &t {
            Ok(self.bump().span)
        } else {
            self.error(&t.describe())
        }
    }

    fn ident(&mut self) -> Result<(String, Span), LangError> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => self.error("identifier"),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_eof(&mut self) -> Result<(), LangError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    fn int(&mut self) -> Result<i64, LangError> {
        let neg = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => self.error("integer"),
        }
    }

    /// `vocabulary {..} theory {..} structure {..}`; each block optional,
    /// in that order.
    pub fn problem(&mut self) -> Result<RawProblem, LangError> {
        let mut p = RawProblem::default();
        if self.keyword("vocabulary") {
            self.expect(Tok::LBrace)?;
            while !self.eat(&Tok::RBrace) {
                p.decls.push(self.decl()?);
            }
        }
        if self.keyword("theory") {
            self.expect(Tok::LBrace)?;
            while !self.eat(&Tok::RBrace) {
                p.sentences.push(self.sentence()?);
            }
        }
        if self.keyword("structure") {
            p.entries = self.structure_body()?;
        }
        self.expect_eof()?;
        Ok(p)
    }

    /// `structure { .. }` standing alone.
    pub fn structure_block(&mut self) -> Result<Vec<RawEntry>, LangError> {
        if !self.keyword("structure") {
            return self.error("`structure`");
        }
        let e = self.structure_body()?;
        self.expect_eof()?;
        Ok(e)
    }

    fn structure_body(&mut self) -> Result<Vec<RawEntry>, LangError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            out.push(self.entry()?);
            while self.eat(&Tok::Semi) || self.eat(&Tok::Dot) {}
        }
        Ok(out)
    }

    /// `;` or `.`, optional only before the closing brace.
    fn terminator(&mut self) -> Result<(), LangError> {
        if self.eat(&Tok::Semi) || self.eat(&Tok::Dot) || self.peek() == &Tok::RBrace {
            Ok(())
        } else {
            self.error("`.` or `;`")
        }
    }

    fn decl(&mut self) -> Result<(RawDecl, Span), LangError> {
        let span = self.span();
        if self.keyword("type") {
            let (name, _) = self.ident()?;
            let range = if self.eat(&Tok::LBracket) {
                let lo = self.int()?;
                self.expect(Tok::DotDot)?;
                let hi = self.int()?;
                self.expect(Tok::RBracket)?;
                Some((lo, hi))
            } else {
                None
            };
            self.terminator()?;
            return Ok((RawDecl::Type { name, range }, span));
        }
        let (name, _) = self.ident()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                args.push(self.ident()?.0);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        let result = if self.eat(&Tok::Colon) { Some(self.ident()?.0) } else { None };
        self.terminator()?;
        Ok((RawDecl::Symbol { name, args, result }, span))
    }

    pub fn sentence(&mut self) -> Result<RawSentence, LangError> {
        let span = self.span();
        let label = match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(l), Tok::Colon) => {
                let l = l.clone();
                self.bump();
                self.bump();
                Some(l)
            }
            _ => None,
        };
        let body = self.expr(0)?;
        self.expect(Tok::Dot)?;
        Ok(RawSentence { label, body, span })
    }

    pub fn expr(&mut self, min: u8) -> Result<Expr, LangError> {
        let mut lhs = self.prefix()?;
        while let Some((op, prec)) = binop(self.peek()) {
            if prec < min {
                break;
            }
            self.bump();
            let next = if op == BinOp::Implies { prec } else { prec + 1 };
            let rhs = self.expr(next)?;
            let span = lhs.span;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
            if prec == PREC_CMP && matches!(binop(self.peek()), Some((_, PREC_CMP))) {
                return self.error("a connective (comparisons do not chain)");
            }
        }
        Ok(lhs)
    }

    fn binders(&mut self, end: &[Tok]) -> Result<Vec<RawBinder>, LangError> {
        let mut out = Vec::new();
        loop {
            let (name, span) = self.ident()?;
            let ty = if self.eat(&Tok::LBracket) {
                let t = self.ident()?.0;
                self.expect(Tok::RBracket)?;
                Some(t)
            } else {
                None
            };
            out.push(RawBinder { name, ty, span });
            self.eat(&Tok::Comma);
            if end.contains(self.peek()) {
                return Ok(out);
            }
        }
    }

    fn prefix(&mut self) -> Result<Expr, LangError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                let e = self.expr(PREC_NOT)?;
                Ok(Expr::new(ExprKind::Not(Box::new(e)), span))
            }
            Tok::Minus => {
                self.bump();
                let e = self.expr(PREC_NEG)?;
                Ok(Expr::new(ExprKind::Neg(Box::new(e)), span))
            }
            Tok::Bang | Tok::Question => {
                let q = if self.bump().tok == Tok::Bang {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                let bs = self.binders(&[Tok::Colon])?;
                self.expect(Tok::Colon)?;
                let body = self.expr(0)?;
                Ok(Expr::new(ExprKind::Quant(q, bs, Box::new(body)), span))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(0)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(n), span))
            }
            Tok::Ident(name) => {
                self.bump();
                if let (Some(kind), Tok::LBrace) = (agg_kind(&name), self.peek()) {
                    self.bump();
                    return self.aggregate(kind, span);
                }
                match name.as_str() {
                    "true" => return Ok(Expr::new(ExprKind::Bool(true), span)),
                    "false" => return Ok(Expr::new(ExprKind::Bool(false), span)),
                    _ => {}
                }
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr(0)?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                    return Ok(Expr::new(ExprKind::App(name, args), span));
                }
                Ok(Expr::new(ExprKind::Ident(name), span))
            }
            _ => self.error("a formula or term"),
        }
    }

    /// After `agg{`: `(x̄, w) | φ }` or, for card, `x̄ | φ }`.
    fn aggregate(&mut self, kind: AggKind, span: Span) -> Result<Expr, LangError> {
        let (binders, weight) = if self.eat(&Tok::LParen) {
            let mut bs = Vec::new();
            let mut weight = None;
            loop {
                // a binder is an identifier followed by `,`, `)` or `[`
                let is_binder = matches!(self.peek(), Tok::Ident(_))
                    && matches!(self.peek_at(1), Tok::Comma | Tok::RParen | Tok::LBracket);
                let last = kind != AggKind::Card && self.tuple_last();
                if is_binder && !last {
                    let (name, bspan) = self.ident()?;
                    let ty = if self.eat(&Tok::LBracket) {
                        let t = self.ident()?.0;
                        self.expect(Tok::RBracket)?;
                        Some(t)
                    } else {
                        None
                    };
                    bs.push(RawBinder { name, ty, span: bspan });
                } else if kind != AggKind::Card && !bs.is_empty() {
                    weight = Some(Box::new(self.expr(0)?));
                    self.expect(Tok::RParen)?;
                    break;
                } else {
                    return self.error("a variable");
                }
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
            (bs, weight)
        } else {
            (self.binders(&[Tok::Or])?, None)
        };
        if kind != AggKind::Card && weight.is_none() {
            return self.error(&format!("a weight term in `{}`", kind.name()));
        }
        self.expect(Tok::Or)?;
        let cond = self.expr(0)?;
        self.expect(Tok::RBrace)?;
        Ok(Expr::new(
            ExprKind::Agg {
                kind,
                binders,
                weight,
                cond: Box::new(cond),
            },
            span,
        ))
    }

    /// True if the tuple element starting here is the last one before `)`.
    fn tuple_last(&self) -> bool {
        let mut depth = 0i32;
        let mut k = 0;
        loop {
            match self.peek_at(k) {
                Tok::LParen | Tok::LBrace | Tok::LBracket => depth += 1,
                Tok::RParen | Tok::RBrace | Tok::RBracket if depth > 0 => depth -= 1,
                Tok::RParen => return true,
                Tok::Comma if depth == 0 => return false,
                Tok::Eof => return true,
                _ => {}
            }
            k += 1;
        }
    }

    /// `{ x y | φ }`.
    pub fn set_expr(&mut self) -> Result<RawSetExpr, LangError> {
        self.expect(Tok::LBrace)?;
        let binders = if self.eat(&Tok::LParen) {
            let b = self.binders(&[Tok::RParen])?;
            self.expect(Tok::RParen)?;
            b
        } else {
            self.binders(&[Tok::Or])?
        };
        self.expect(Tok::Or)?;
        let body = self.expr(0)?;
        self.expect(Tok::RBrace)?;
        self.expect_eof()?;
        Ok(RawSetExpr { binders, body })
    }

    fn entry(&mut self) -> Result<RawEntry, LangError> {
        let (name, span) = self.ident()?;
        self.expect(Tok::Eq)?;
        if !self.eat(&Tok::LBrace) {
            let v = self.value()?;
            return Ok(RawEntry {
                name,
                rhs: RawRhs::Scalar(v),
                span,
            });
        }
        let mut items = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let ispan = self.span();
            let tuple = if self.eat(&Tok::LParen) {
                let mut t = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        t.push(self.value()?);
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                }
                t
            } else {
                vec![self.value()?]
            };
            let target = if self.eat(&Tok::Arrow) { Some(self.value()?) } else { None };
            items.push(RawItem {
                tuple,
                target,
                span: ispan,
            });
            if !self.eat(&Tok::Semi) && self.peek() != &Tok::RBrace {
                return self.error("`;` or `}`");
            }
        }
        Ok(RawEntry {
            name,
            rhs: RawRhs::Set(items),
            span,
        })
    }

    pub fn value(&mut self) -> Result<RawValue, LangError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(RawValue::Ident(s))
            }
            Tok::Int(_) | Tok::Minus => Ok(RawValue::Int(self.int()?)),
            _ => self.error("a domain element"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_expr(s: &str) -> Expr {
        let mut p = Parser::new(s).unwrap();
        let e = p.expr(0).unwrap();
        p.expect_eof().unwrap();
        e
    }

    fn shape(e: &Expr) -> String {
        match &e.kind {
            ExprKind::Ident(s) => s.clone(),
            ExprKind::Int(n) => n.to_string(),
            ExprKind::Bool(b) => b.to_string(),
            ExprKind::App(f, a) => format!("{f}({})", a.iter().map(shape).collect::<Vec<_>>().join(",")),
            ExprKind::Not(x) => format!("~{}", shape(x)),
            ExprKind::Neg(x) => format!("-{}", shape(x)),
            ExprKind::Binary(op, a, b) => format!("({} {:?} {})", shape(a), op, shape(b)),
            ExprKind::Quant(q, bs, b) => format!("{:?}{}.{}", q, bs.len(), shape(b)),
            ExprKind::Agg { kind, binders, weight, cond } => format!(
                "{}[{}; {}; {}]",
                kind.name(),
                binders.iter().map(|b| b.name.clone()).collect::<Vec<_>>().join(","),
                weight.as_ref().map(|w| shape(w)).unwrap_or_default(),
                shape(cond)
            ),
        }
    }

    #[test]
    fn precedence() {
        assert_eq!(shape(&parse_expr("a & b | c => d")), "(((a And b) Or c) Implies d)");
        assert_eq!(shape(&parse_expr("a => b => c")), "(a Implies (b Implies c))");
        assert_eq!(shape(&parse_expr("~ x + 1 = y * 2")), "~((x Add 1) Eq (y Mul 2))");
        assert_eq!(shape(&parse_expr("- x - 1 < 3")), "((-x Sub 1) Lt 3)");
        assert_eq!(shape(&parse_expr("!x[T]: P(x) | Q")), "Forall1.(P(x) Or Q)");
        assert!(Parser::new("a < b < c").unwrap().expr(0).is_err());
    }

    #[test]
    fn aggregates() {
        assert_eq!(
            shape(&parse_expr("Cost = sum{(s, PriceOf(s)) | Install(s)}")),
            "(Cost Eq sum[s; PriceOf(s); Install(s)])"
        );
        assert_eq!(shape(&parse_expr("card{x y | P(x,y)}")), "card[x,y; ; P(x,y)]");
        assert_eq!(shape(&parse_expr("card{(x, y[T]) | P(x,y)}")), "card[x,y; ; P(x,y)]");
        assert_eq!(shape(&parse_expr("max{(x, y, x) | P(x,y)}")), "max[x,y; x; P(x,y)]");
        assert_eq!(shape(&parse_expr("sum{(x, x * 2) | true}")), "sum[x; (x Mul 2); true]");
        assert!(Parser::new("sum{x | P(x)}").unwrap().expr(0).is_err());
    }

    #[test]
    fn structure_entries() {
        let mut p = Parser::new("structure { t = {a; b} P = {(a,b)->T; (b,a)->F} C = 3 F = {a->-2;} }").unwrap();
        let e = p.structure_block().unwrap();
        assert_eq!(e.len(), 4);
        assert_eq!(e[2].rhs, RawRhs::Scalar(RawValue::Int(3)));
        match &e[3].rhs {
            RawRhs::Set(items) => assert_eq!(items[0].target, Some(RawValue::Int(-2))),
            _ => panic!(),
        }
    }
}
