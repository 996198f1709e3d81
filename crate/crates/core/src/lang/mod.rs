//! Text syntax: `vocabulary { .. } theory { .. } structure { .. }`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::element::DomainElement;
use crate::structure::{Assignment, DomainTerm, PartialStructure, StructureError};
use crate::syntax::{SetExpr, Span, Term, Theory};
use crate::vocabulary::{Vocabulary, INT};

pub mod ast;
mod check;
mod io;
mod lexer;
mod parser;

pub use io::serialize_structure;

use parser::{Parser, RawDecl, RawValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    Syntax,
    Vocabulary,
    Type,
    Structure,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Vocabulary => "vocabulary error",
            ErrorKind::Type => "type error",
            ErrorKind::Structure => "structure error",
        })
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{span}: {kind}: {message}")]
pub struct LangError {
    pub kind: ErrorKind,
    pub span: Span,
    pub message: String,
}

impl LangError {
    fn structure(span: Span, e: StructureError) -> LangError {
        LangError {
            kind: ErrorKind::Structure,
            span,
            message: e.to_string(),
        }
    }
}

/// Joins a list of errors one per line.
pub fn format_errors(errors: &[LangError]) -> String {
    errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n")
}

/// A parsed specification whose theory has not been typechecked yet.
#[derive(Clone, Debug)]
pub struct Problem {
    pub vocabulary: Arc<Vocabulary>,
    pub sentences: Vec<ast::RawSentence>,
    pub structure: PartialStructure,
}

#[derive(Clone, Debug)]
pub struct TypedProblem {
    pub vocabulary: Arc<Vocabulary>,
    pub theory: Theory,
    pub structure: PartialStructure,
}

pub fn parse(text: &str) -> Result<Problem, LangError> {
    let raw = Parser::new(text)?.problem()?;
    let vocabulary = Arc::new(build_vocabulary(&raw.decls)?);
    let structure = io::build_structure(&vocabulary, &raw.entries)?;
    Ok(Problem {
        vocabulary,
        sentences: raw.sentences,
        structure,
    })
}

pub fn typecheck(p: &Problem) -> Result<TypedProblem, Vec<LangError>> {
    let theory = check::Checker::new(&p.structure).theory(&p.sentences)?;
    Ok(TypedProblem {
        vocabulary: p.vocabulary.clone(),
        theory,
        structure: p.structure.clone(),
    })
}

/// `parse` followed by `typecheck`.
pub fn load(text: &str) -> Result<TypedProblem, Vec<LangError>> {
    let p = parse(text).map_err(|e| vec![e])?;
    typecheck(&p)
}

fn build_vocabulary(decls: &[(RawDecl, Span)]) -> Result<Vocabulary, LangError> {
    let mut v = Vocabulary::new();
    let verr = |span: Span, e: crate::vocabulary::VocabularyError| LangError {
        kind: ErrorKind::Vocabulary,
        span,
        message: e.to_string(),
    };
    for (d, span) in decls {
        if let RawDecl::Type { name, range } = d {
            match (name.as_str(), range) {
                ("int", Some((lo, hi))) => v.set_int_range(*lo, *hi).map_err(|e| verr(*span, e))?,
                ("int", None) => {
                    return Err(LangError {
                        kind: ErrorKind::Vocabulary,
                        span: *span,
                        message: "the integer type needs a range, as in `type int[0..100]`".into(),
                    })
                }
                (_, Some(_)) => {
                    return Err(LangError {
                        kind: ErrorKind::Vocabulary,
                        span: *span,
                        message: format!("only `int` takes a range, not `{name}`"),
                    })
                }
                (_, None) => {
                    v.add_type(name).map_err(|e| verr(*span, e))?;
                }
            }
        }
    }
    for (d, span) in decls {
        if let RawDecl::Symbol { name, args, result } = d {
            let ty = |n: &String| {
                v.type_id(n)
                    .ok_or_else(|| verr(*span, crate::vocabulary::VocabularyError::UnknownType(n.clone())))
            };
            let args = args.iter().map(ty).collect::<Result<Vec<_>, _>>()?;
            match result {
                Some(r) => {
                    let r = ty(r)?;
                    v.add_function(name, &args, r).map_err(|e| verr(*span, e))?;
                }
                None => {
                    v.add_predicate(name, &args).map_err(|e| verr(*span, e))?;
                }
            }
        }
    }
    Ok(v)
}

/// Reads a standalone `structure { .. }` block over `vocabulary`.
pub fn parse_structure(text: &str, vocabulary: &Arc<Vocabulary>) -> Result<PartialStructure, LangError> {
    let entries = Parser::new(text)?.structure_block()?;
    io::build_structure(vocabulary, &entries)
}

/// Typechecks `{x̄ | φ}` against the vocabulary and domains of `s`.
pub fn parse_query(text: &str, s: &PartialStructure) -> Result<SetExpr, LangError> {
    let raw = Parser::new(text)?.set_expr()?;
    check::Checker::new(s).set_expr(&raw)
}

/// Reads one closed formula, e.g. for ad hoc checks.
pub fn parse_formula(text: &str, s: &PartialStructure) -> Result<crate::syntax::Sentence, LangError> {
    let mut p = Parser::new(text)?;
    let body = p.expr(0)?;
    p.expect_eof()?;
    let raw = ast::RawSentence {
        label: None,
        span: body.span,
        body,
    };
    check::Checker::new(s)
        .theory(std::slice::from_ref(&raw))
        .map(|mut t| t.sentences.remove(0))
        .map_err(|mut e| e.remove(0))
}

/// An integer term to optimise, such as `Cost` or `sum{(s, PriceOf(s)) | Install(s)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub term: Term,
    /// Variable slots the term's aggregates use.
    pub num_vars: usize,
}

pub fn parse_objective(text: &str, s: &PartialStructure) -> Result<Objective, LangError> {
    let mut p = Parser::new(text)?;
    let e = p.expr(0)?;
    p.expect_eof()?;
    let (term, ty, num_vars) = check::Checker::new(s).closed_term(&e)?;
    if ty != INT {
        return Err(LangError {
            kind: ErrorKind::Type,
            span: e.span,
            message: format!("objective `{text}` is not an integer term"),
        });
    }
    Ok(Objective { term, num_vars })
}

pub(crate) fn element(v: &RawValue) -> DomainElement {
    match v {
        RawValue::Int(n) => DomainElement::Int(*n),
        RawValue::Ident(s) => DomainElement::constant(s.clone()),
    }
}

pub(crate) fn truth(v: &RawValue) -> Option<bool> {
    match v {
        RawValue::Ident(s) => match s.as_str() {
            "T" | "true" => Some(true),
            "F" | "false" => Some(false),
            _ => None,
        },
        RawValue::Int(_) => None,
    }
}

/// Reads a domain term such as `Install(Windows)` or `Cost`.
pub fn parse_term(text: &str, s: &PartialStructure) -> Result<DomainTerm, LangError> {
    let mut p = Parser::new(text)?;
    let span = Span { line: 1, column: 1 };
    let e = p.expr(0)?;
    p.expect_eof()?;
    let (name, args) = match &e.kind {
        ast::ExprKind::Ident(n) => (n.clone(), Vec::new()),
        ast::ExprKind::App(n, a) => {
            let mut vals = Vec::new();
            for x in a {
                vals.push(match &x.kind {
                    ast::ExprKind::Ident(i) => RawValue::Ident(i.clone()),
                    ast::ExprKind::Int(n) => RawValue::Int(*n),
                    ast::ExprKind::Neg(inner) => match inner.kind {
                        ast::ExprKind::Int(n) => RawValue::Int(-n),
                        _ => return Err(term_error(x.span, text)),
                    },
                    _ => return Err(term_error(x.span, text)),
                });
            }
            (n.clone(), vals)
        }
        _ => return Err(term_error(e.span, text)),
    };
    let voc = s.vocabulary();
    let sym = voc.symbol_id(&name).ok_or_else(|| LangError {
        kind: ErrorKind::Structure,
        span,
        message: format!("unknown symbol `{name}`"),
    })?;
    let decl = voc.symbol(sym);
    if decl.arity() != args.len() {
        return Err(LangError::structure(
            span,
            StructureError::ArityMismatch {
                symbol: name,
                expected: decl.arity(),
                got: args.len(),
            },
        ));
    }
    let args: Vec<DomainElement> = args.iter().map(element).collect();
    s.row_index(sym, &args).map_err(|e| LangError::structure(span, e))?;
    Ok(DomainTerm::new(sym, args))
}

fn term_error(span: Span, text: &str) -> LangError {
    LangError {
        kind: ErrorKind::Syntax,
        span,
        message: format!("`{text}` is not a domain term"),
    }
}

/// Reads a value for `term`: `true`/`false` for predicate atoms, an element
/// of the result type otherwise.
pub fn parse_value(text: &str, term: &DomainTerm, s: &PartialStructure) -> Result<DomainElement, LangError> {
    let span = Span { line: 1, column: 1 };
    let mut p = Parser::new(text)?;
    let v = p.value()?;
    p.expect_eof()?;
    let decl = s.vocabulary().symbol(term.symbol);
    let e = match decl.result() {
        None => DomainElement::Bool(truth(&v).ok_or_else(|| LangError {
            kind: ErrorKind::Structure,
            span,
            message: format!("expected true or false, found `{text}`"),
        })?),
        Some(_) => element(&v),
    };
    s.value_truth(term, &e).map_err(|e| LangError::structure(span, e))?;
    Ok(e)
}

/// `Term=value`, or a bare predicate atom meaning `=true`.
pub fn parse_assignment(text: &str, s: &PartialStructure) -> Result<Assignment, LangError> {
    let (t, v) = match text.split_once('=') {
        Some((t, v)) => (t.trim(), Some(v.trim())),
        None => (text.trim(), None),
    };
    let term = parse_term(t, s)?;
    let value = match v {
        Some(v) => parse_value(v, &term, s)?,
        None if s.vocabulary().symbol(term.symbol).is_predicate() => DomainElement::Bool(true),
        None => {
            return Err(LangError {
                kind: ErrorKind::Syntax,
                span: Span { line: 1, column: 1 },
                message: format!("`{text}` needs a value, as in `{t}=..`"),
            })
        }
    };
    Ok(Assignment::new(term, value))
}
