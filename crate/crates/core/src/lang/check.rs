use std::collections::HashSet;

use crate::element::DomainElement;
use crate::structure::PartialStructure;
use crate::syntax::{Aggregate, ArithOp, Binder, CmpOp, Formula, Sentence, SetExpr, Span, Term, Theory, VarId};
use crate::vocabulary::{SymbolKind, TypeId, Vocabulary, INT};

use super::ast::{BinOp, Expr, ExprKind, RawBinder, RawSentence, RawSetExpr};
use super::{ErrorKind, LangError};

/// Resolves names against a vocabulary and the domains of a structure.
pub(crate) struct Checker<'a> {
    voc: &'a Vocabulary,
    s: &'a PartialStructure,
    scope: Vec<(String, VarId, TypeId)>,
    next_var: usize,
}

type R<T> = Result<T, LangError>;

fn err<T>(span: Span, message: impl Into<String>) -> R<T> {
    Err(LangError {
        kind: ErrorKind::Type,
        span,
        message: message.into(),
    })
}

impl<'a> Checker<'a> {
    pub(crate) fn new(s: &'a PartialStructure) -> Checker<'a> {
        Checker {
            voc: s.vocabulary(),
            s,
            scope: Vec::new(),
            next_var: 0,
        }
    }

    fn reset(&mut self) {
        self.scope.clear();
        self.next_var = 0;
    }

    pub(crate) fn theory(&mut self, raw: &[RawSentence]) -> Result<Theory, Vec<LangError>> {
        let mut errors = Vec::new();
        let mut sentences = Vec::new();
        let mut seen = HashSet::new();
        for (i, rs) in raw.iter().enumerate() {
            let id = rs.label.clone().unwrap_or_else(|| format!("s{}", i + 1));
            if !seen.insert(id.clone()) {
                errors.push(LangError {
                    kind: ErrorKind::Type,
                    span: rs.span,
                    message: format!("duplicate sentence label `{id}`"),
                });
                continue;
            }
            self.reset();
            match self.formula(&rs.body) {
                Ok(formula) => sentences.push(Sentence {
                    id,
                    formula,
                    num_vars: self.next_var,
                    span: rs.span,
                }),
                Err(e) => errors.push(e),
            }
        }
        if errors.is_empty() {
            Ok(Theory::new(sentences))
        } else {
            Err(errors)
        }
    }

    pub(crate) fn set_expr(&mut self, raw: &RawSetExpr) -> R<SetExpr> {
        self.reset();
        let binders = self.bind(&raw.binders, &raw.body)?;
        let formula = self.formula(&raw.body);
        self.unbind(binders.len());
        Ok(SetExpr {
            binders,
            formula: formula?,
            num_vars: self.next_var,
        })
    }

    /// A closed term; returns it with the number of variable slots used.
    pub(crate) fn closed_term(&mut self, e: &Expr) -> R<(Term, TypeId, usize)> {
        self.reset();
        let (t, ty) = self.term(e, None)?;
        Ok((t, ty, self.next_var))
    }

    fn lookup(&self, name: &str) -> Option<(VarId, TypeId)> {
        self.scope.iter().rev().find(|(n, _, _)| n == name).map(|&(_, v, t)| (v, t))
    }

    fn bind(&mut self, raw: &[RawBinder], body: &Expr) -> R<Vec<Binder>> {
        let mut out = Vec::with_capacity(raw.len());
        for (i, b) in raw.iter().enumerate() {
            if raw[..i].iter().any(|o| o.name == b.name) {
                return err(b.span, format!("variable `{}` bound twice", b.name));
            }
            let ty = match &b.ty {
                Some(t) => match self.voc.type_id(t) {
                    Some(t) => t,
                    None => return err(b.span, format!("unknown type `{t}`")),
                },
                None => match self.infer(&b.name, body) {
                    Some(t) => t,
                    None => return err(b.span, format!("cannot infer the type of `{}`", b.name)),
                },
            };
            out.push(Binder {
                var: VarId(self.next_var),
                ty,
                name: b.name.clone(),
            });
            self.next_var += 1;
        }
        for b in &out {
            self.scope.push((b.name.clone(), b.var, b.ty));
        }
        Ok(out)
    }

    fn unbind(&mut self, n: usize) {
        let len = self.scope.len();
        self.scope.truncate(len - n);
    }

    /// Types of domain elements named `name`, excluding integers.
    fn element_types(&self, name: &str) -> Vec<TypeId> {
        let e = DomainElement::constant(name);
        self.voc
            .types()
            .map(|(t, _)| t)
            .filter(|&t| t != INT && self.s.domain(t).position(&e).is_some())
            .collect()
    }

    /// First type the body forces on a free occurrence of `name`.
    fn infer(&self, name: &str, e: &Expr) -> Option<TypeId> {
        let is_var = |x: &Expr| matches!(&x.kind, ExprKind::Ident(n) if n == name);
        match &e.kind {
            ExprKind::App(f, args) => {
                if let Some(sym) = self.voc.symbol_id(f) {
                    let decl = self.voc.symbol(sym);
                    for (a, t) in args.iter().zip(&decl.args) {
                        if is_var(a) {
                            return Some(*t);
                        }
                    }
                }
                args.iter().find_map(|a| self.infer(name, a))
            }
            ExprKind::Binary(op, a, b) => {
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
                        if is_var(a) || is_var(b) =>
                    {
                        return Some(INT)
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if is_var(a) {
                            if let Some(t) = self.shallow_type(b) {
                                return Some(t);
                            }
                        }
                        if is_var(b) {
                            if let Some(t) = self.shallow_type(a) {
                                return Some(t);
                            }
                        }
                    }
                    _ => {}
                }
                self.infer(name, a).or_else(|| self.infer(name, b))
            }
            ExprKind::Not(x) => self.infer(name, x),
            ExprKind::Neg(x) => {
                if is_var(x) {
                    Some(INT)
                } else {
                    self.infer(name, x)
                }
            }
            ExprKind::Quant(_, bs, body) => {
                if bs.iter().any(|b| b.name == name) {
                    None
                } else {
                    self.infer(name, body)
                }
            }
            ExprKind::Agg {
                binders, weight, cond, ..
            } => {
                if binders.iter().any(|b| b.name == name) {
                    return None;
                }
                if let Some(w) = weight {
                    if is_var(w) {
                        return Some(INT);
                    }
                    if let Some(t) = self.infer(name, w) {
                        return Some(t);
                    }
                }
                self.infer(name, cond)
            }
            ExprKind::Ident(_) | ExprKind::Int(_) | ExprKind::Bool(_) => None,
        }
    }

    /// Type of a term that is evident without checking it.
    fn shallow_type(&self, e: &Expr) -> Option<TypeId> {
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Neg(_) | ExprKind::Agg { .. } => Some(INT),
            ExprKind::Binary(BinOp::Add | BinOp::Sub | BinOp::Mul, _, _) => Some(INT),
            ExprKind::App(f, _) => self.voc.symbol_id(f).and_then(|s| self.voc.symbol(s).result()),
            ExprKind::Ident(n) => {
                if let Some((_, t)) = self.lookup(n) {
                    return Some(t);
                }
                if let Some(s) = self.voc.symbol_id(n) {
                    return self.voc.symbol(s).result();
                }
                match self.element_types(n).as_slice() {
                    [t] => Some(*t),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    pub(crate) fn formula(&mut self, e: &Expr) -> R<Formula> {
        Ok(match &e.kind {
            ExprKind::Bool(b) => Formula::Const(*b),
            ExprKind::Not(x) => Formula::Not(Box::new(self.formula(x)?)),
            ExprKind::Binary(op, a, b) => match op {
                BinOp::And | BinOp::Or => {
                    let mut parts = Vec::new();
                    self.flatten(*op, a, &mut parts)?;
                    self.flatten(*op, b, &mut parts)?;
                    if *op == BinOp::And {
                        Formula::And(parts)
                    } else {
                        Formula::Or(parts)
                    }
                }
                BinOp::Implies => Formula::Implies(Box::new(self.formula(a)?), Box::new(self.formula(b)?)),
                BinOp::Equiv => Formula::Equiv(Box::new(self.formula(a)?), Box::new(self.formula(b)?)),
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => self.comparison(*op, a, b, e.span)?,
                BinOp::Add | BinOp::Sub | BinOp::Mul => return err(e.span, "expected a formula, found an integer term"),
            },
            ExprKind::Quant(q, bs, body) => {
                let binders = self.bind(bs, body)?;
                let n = binders.len();
                let f = self.formula(body);
                self.unbind(n);
                Formula::Quant(*q, binders, Box::new(f?))
            }
            ExprKind::App(name, args) => {
                let Some(sym) = self.voc.symbol_id(name) else {
                    return err(e.span, format!("unknown predicate `{name}`"));
                };
                let decl = self.voc.symbol(sym);
                if !decl.is_predicate() {
                    return err(e.span, format!("`{name}` is a function, expected a formula"));
                }
                let arg_types = decl.args.clone();
                Formula::Atom(sym, self.args(name, &arg_types, args, e.span)?)
            }
            ExprKind::Ident(name) => {
                if self.lookup(name).is_some() {
                    return err(e.span, format!("variable `{name}` used as a formula"));
                }
                match self.voc.symbol_id(name) {
                    Some(sym) if self.voc.symbol(sym).is_predicate() => {
                        let n = self.voc.symbol(sym).arity();
                        if n != 0 {
                            return err(e.span, format!("arity mismatch: `{name}` takes {n} arguments, got 0"));
                        }
                        Formula::Atom(sym, Vec::new())
                    }
                    Some(_) => return err(e.span, format!("`{name}` is a function, expected a formula")),
                    None => return err(e.span, format!("unbound variable or unknown symbol `{name}`")),
                }
            }
            ExprKind::Int(_) | ExprKind::Neg(_) | ExprKind::Agg { .. } => {
                return err(e.span, "expected a formula, found an integer term")
            }
        })
    }

    fn flatten(&mut self, op: BinOp, e: &Expr, out: &mut Vec<Formula>) -> R<()> {
        match &e.kind {
            ExprKind::Binary(o, a, b) if *o == op => {
                self.flatten(op, a, out)?;
                self.flatten(op, b, out)
            }
            _ => {
                out.push(self.formula(e)?);
                Ok(())
            }
        }
    }

    fn args(&mut self, name: &str, types: &[TypeId], args: &[Expr], span: Span) -> R<Vec<Term>> {
        if types.len() != args.len() {
            return err(
                span,
                format!("arity mismatch: `{name}` takes {} arguments, got {}", types.len(), args.len()),
            );
        }
        types
            .iter()
            .zip(args)
            .map(|(t, a)| self.term(a, Some(*t)).map(|(x, _)| x))
            .collect()
    }

    fn is_bare_constant(&self, e: &Expr) -> bool {
        matches!(&e.kind, ExprKind::Ident(n) if self.lookup(n).is_none() && self.voc.symbol_id(n).is_none())
    }

    fn comparison(&mut self, op: BinOp, a: &Expr, b: &Expr, span: Span) -> R<Formula> {
        let cmp = match op {
            BinOp::Eq => CmpOp::Eq,
            BinOp::Ne => CmpOp::Ne,
            BinOp::Lt => CmpOp::Lt,
            BinOp::Le => CmpOp::Le,
            BinOp::Gt => CmpOp::Gt,
            _ => CmpOp::Ge,
        };
        let ((ta, ty_a), (tb, ty_b)) = if cmp.is_order() {
            (self.term(a, Some(INT))?, self.term(b, Some(INT))?)
        } else if self.is_bare_constant(a) && !self.is_bare_constant(b) {
            let (tb, ty) = self.term(b, None)?;
            (self.term(a, Some(ty))?, (tb, ty))
        } else {
            let (ta, ty) = self.term(a, None)?;
            ((ta, ty), self.term(b, Some(ty))?)
        };
        if ty_a != ty_b {
            return err(span, "type mismatch in comparison");
        }
        Ok(Formula::Cmp(cmp, ta, tb))
    }

    fn expect_type(&self, got: TypeId, expected: Option<TypeId>, span: Span) -> R<()> {
        match expected {
            Some(t) if t != got => {
                if t == INT || got == INT {
                    if t == INT {
                        err(span, format!("comparison of non-integers: expected int, found {}", self.voc.type_name(got)))
                    } else {
                        err(span, format!("type mismatch: expected {}, found int", self.voc.type_name(t)))
                    }
                } else {
                    err(
                        span,
                        format!(
                            "type mismatch: expected {}, found {}",
                            self.voc.type_name(t),
                            self.voc.type_name(got)
                        ),
                    )
                }
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn term(&mut self, e: &Expr, expected: Option<TypeId>) -> R<(Term, TypeId)> {
        let (term, ty) = match &e.kind {
            ExprKind::Ident(name) => {
                if let Some((v, t)) = self.lookup(name) {
                    (Term::Var(v), t)
                } else if let Some(sym) = self.voc.symbol_id(name) {
                    let decl = self.voc.symbol(sym);
                    match decl.kind {
                        SymbolKind::Predicate => return err(e.span, format!("`{name}` is a predicate, expected a term")),
                        SymbolKind::Function(t) => {
                            if decl.arity() != 0 {
                                return err(
                                    e.span,
                                    format!("arity mismatch: `{name}` takes {} arguments, got 0", decl.arity()),
                                );
                            }
                            (Term::App(sym, Vec::new()), t)
                        }
                    }
                } else {
                    let types = self.element_types(name);
                    let t = match expected {
                        Some(t) if types.contains(&t) => t,
                        Some(t) if !types.is_empty() => {
                            return err(
                                e.span,
                                format!("type mismatch: `{name}` is not an element of {}", self.voc.type_name(t)),
                            )
                        }
                        None if types.len() == 1 => types[0],
                        None if types.len() > 1 => return err(e.span, format!("ambiguous constant `{name}`")),
                        _ => return err(e.span, format!("unbound variable or unknown symbol `{name}`")),
                    };
                    (Term::Elem(DomainElement::constant(name.clone())), t)
                }
            }
            ExprKind::Int(n) => (Term::Elem(DomainElement::Int(*n)), INT),
            ExprKind::App(name, args) => {
                let Some(sym) = self.voc.symbol_id(name) else {
                    return err(e.span, format!("unknown function `{name}`"));
                };
                let decl = self.voc.symbol(sym);
                let Some(result) = decl.result() else {
                    return err(e.span, format!("`{name}` is a predicate, expected a term"));
                };
                let arg_types = decl.args.clone();
                (Term::App(sym, self.args(name, &arg_types, args, e.span)?), result)
            }
            ExprKind::Neg(x) => (Term::Neg(Box::new(self.term(x, Some(INT))?.0)), INT),
            ExprKind::Binary(op @ (BinOp::Add | BinOp::Sub | BinOp::Mul), a, b) => {
                let op = match op {
                    BinOp::Add => ArithOp::Add,
                    BinOp::Sub => ArithOp::Sub,
                    _ => ArithOp::Mul,
                };
                let x = self.term(a, Some(INT))?.0;
                let y = self.term(b, Some(INT))?.0;
                (Term::Arith(op, Box::new(x), Box::new(y)), INT)
            }
            ExprKind::Agg {
                kind,
                binders,
                weight,
                cond,
            } => {
                let probe = Expr::new(
                    ExprKind::Binary(
                        BinOp::And,
                        cond.clone(),
                        // `w + 0` lets a bare variable weight infer as int
                        Box::new(match weight {
                            Some(w) => Expr::new(
                                ExprKind::Binary(BinOp::Add, w.clone(), Box::new(Expr::new(ExprKind::Int(0), e.span))),
                                e.span,
                            ),
                            None => Expr::new(ExprKind::Bool(true), e.span),
                        }),
                    ),
                    e.span,
                );
                let bs = self.bind(binders, &probe)?;
                let n = bs.len();
                let checked = (|| -> R<(Formula, Option<Term>)> {
                    let c = self.formula(cond)?;
                    let w = match weight {
                        Some(w) => Some(self.term(w, Some(INT))?.0),
                        None => None,
                    };
                    Ok((c, w))
                })();
                self.unbind(n);
                let (cond, weight) = checked?;
                (
                    Term::Agg(Box::new(Aggregate {
                        kind: *kind,
                        binders: bs,
                        weight,
                        cond,
                    })),
                    INT,
                )
            }
            ExprKind::Bool(_) | ExprKind::Not(_) | ExprKind::Quant(..) | ExprKind::Binary(..) => {
                return err(e.span, "expected a term, found a formula")
            }
        };
        self.expect_type(ty, expected, e.span)?;
        Ok((term, ty))
    }
}
