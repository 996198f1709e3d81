//! Untyped syntax as the parser produces it.

use crate::syntax::{AggKind, Quantifier, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Equiv,
    Implies,
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawBinder {
    pub name: String,
    pub ty: Option<String>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Ident(String),
    Int(i64),
    Bool(bool),
    App(String, Vec<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Quant(Quantifier, Vec<RawBinder>, Box<Expr>),
    Agg {
        kind: AggKind,
        binders: Vec<RawBinder>,
        weight: Option<Box<Expr>>,
        cond: Box<Expr>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawSentence {
    pub label: Option<String>,
    pub body: Expr,
    pub span: Span,
}

/// `{x y | φ}` as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawSetExpr {
    pub binders: Vec<RawBinder>,
    pub body: Expr,
}
