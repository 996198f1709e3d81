//! Typed abstract syntax: what the typechecker produces and every inference
//! consumes. Symbols are resolved to ids, constants to domain elements, and
//! variables to per-sentence slots.

use std::fmt;

use crate::element::DomainElement;
use crate::structure::PartialStructure;
use crate::vocabulary::{SymbolId, SymbolKind, TypeId, Vocabulary};

/// Index of a variable slot in an evaluation environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binder {
    pub var: VarId,
    pub ty: TypeId,
    pub name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds<T: Ord>(self, a: &T, b: &T) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn is_order(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "~=",
            CmpOp::Lt => "<",
            CmpOp::Le => "=<",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AggKind {
    Card,
    Sum,
    Prod,
    Min,
    Max,
}

impl AggKind {
    pub fn name(self) -> &'static str {
        match self {
            AggKind::Card => "card",
            AggKind::Sum => "sum",
            AggKind::Prod => "prod",
            AggKind::Min => "min",
            AggKind::Max => "max",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

/// `Agg{(x̄, w) | φ}`; `card` has no weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Aggregate {
    pub kind: AggKind,
    pub binders: Vec<Binder>,
    pub weight: Option<Term>,
    pub cond: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(VarId),
    Elem(DomainElement),
    App(SymbolId, Vec<Term>),
    Arith(ArithOp, Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Agg(Box<Aggregate>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Const(bool),
    Atom(SymbolId, Vec<Term>),
    Cmp(CmpOp, Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Quant(Quantifier, Vec<Binder>, Box<Formula>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// A closed, typed sentence with a stable identifier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    /// The label, or `s<n>` for the n-th (1-based) unlabeled sentence slot.
    pub id: String,
    pub formula: Formula,
    /// Number of variable slots the sentence uses.
    pub num_vars: usize,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Theory {
    pub sentences: Vec<Sentence>,
}

impl Theory {
    pub fn new(sentences: Vec<Sentence>) -> Theory {
        Theory { sentences }
    }

    pub fn sentence(&self, id: &str) -> Option<&Sentence> {
        self.sentences.iter().find(|s| s.id == id)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// `{x̄ | φ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetExpr {
    pub binders: Vec<Binder>,
    pub formula: Formula,
    pub num_vars: usize,
}

impl PartialStructure {
    /// One literal sentence per known entry: `P(d̄)`, `~P(d̄)`, `F(d̄) = e`
    /// or `F(d̄) ~= e`. All false entries of a function row are listed even
    /// when the row has a true value.
    pub fn associated_theory(&self) -> Theory {
        let voc = self.vocabulary();
        let mut sentences = Vec::new();
        for (sym, decl) in voc.symbols() {
            for row in 0..self.rows(sym) {
                let args: Vec<DomainElement> = self.row_args(sym, row);
                let term = crate::structure::DomainTerm::new(sym, args.clone());
                let arg_terms = || args.iter().cloned().map(Term::Elem).collect::<Vec<_>>();
                match decl.kind {
                    SymbolKind::Predicate => {
                        if let Some(b) = self.entry(sym, row, 0).as_bool() {
                            let atom = Formula::Atom(sym, arg_terms());
                            let formula = if b { atom } else { Formula::Not(Box::new(atom)) };
                            sentences.push(Sentence {
                                id: format!("data:{}", self.display_term(&term)),
                                formula,
                                num_vars: 0,
                                span: Span::default(),
                            });
                        }
                    }
                    SymbolKind::Function(r) => {
                        for (i, e) in self.domain(r).elements().iter().enumerate() {
                            if let Some(b) = self.entry(sym, row, i).as_bool() {
                                let op = if b { CmpOp::Eq } else { CmpOp::Ne };
                                sentences.push(Sentence {
                                    id: format!("data:{}={}", self.display_term(&term), e),
                                    formula: Formula::Cmp(op, Term::App(sym, arg_terms()), Term::Elem(e.clone())),
                                    num_vars: 0,
                                    span: Span::default(),
                                });
                            }
                        }
                    }
                }
            }
        }
        Theory::new(sentences)
    }
}

fn collect_names(phi: &Formula, out: &mut Vec<(VarId, String)>) {
    fn term(t: &Term, out: &mut Vec<(VarId, String)>) {
        match t {
            Term::App(_, args) => args.iter().for_each(|a| term(a, out)),
            Term::Arith(_, a, b) => {
                term(a, out);
                term(b, out);
            }
            Term::Neg(a) => term(a, out),
            Term::Agg(agg) => {
                out.extend(agg.binders.iter().map(|b| (b.var, b.name.clone())));
                if let Some(w) = &agg.weight {
                    term(w, out);
                }
                collect_names(&agg.cond, out);
            }
            Term::Var(_) | Term::Elem(_) => {}
        }
    }
    match phi {
        Formula::Const(_) => {}
        Formula::Atom(_, args) => args.iter().for_each(|a| term(a, out)),
        Formula::Cmp(_, a, b) => {
            term(a, out);
            term(b, out);
        }
        Formula::Not(g) => collect_names(g, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| collect_names(g, out)),
        Formula::Implies(a, b) | Formula::Equiv(a, b) => {
            collect_names(a, out);
            collect_names(b, out);
        }
        Formula::Quant(_, bs, body) => {
            out.extend(bs.iter().map(|b| (b.var, b.name.clone())));
            collect_names(body, out);
        }
    }
}

/// Renders a formula in concrete syntax.
pub fn pretty_formula(phi: &Formula, vocabulary: &Vocabulary) -> String {
    struct P<'a>(&'a Formula, &'a Vocabulary, Vec<(VarId, String)>);
    impl fmt::Display for P<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let names = |v: VarId| {
                self.2
                    .iter()
                    .find(|(id, _)| *id == v)
                    .map(|(_, n)| n.clone())
                    .unwrap_or_else(|| format!("v{}", v.0))
            };
            write_formula(f, self.0, self.1, &names)
        }
    }
    let mut names = Vec::new();
    collect_names(phi, &mut names);
    P(phi, vocabulary, names).to_string()
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, voc: &Vocabulary, names: &dyn Fn(VarId) -> String) -> fmt::Result {
    match t {
        Term::Var(v) => f.write_str(&names(*v)),
        Term::Elem(e) => write!(f, "{e}"),
        Term::App(s, args) => {
            f.write_str(&voc.symbol(*s).name)?;
            if !args.is_empty() {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write_term(f, a, voc, names)?;
                }
                f.write_str(")")?;
            }
            Ok(())
        }
        Term::Arith(op, a, b) => {
            f.write_str("(")?;
            write_term(f, a, voc, names)?;
            f.write_str(match op {
                ArithOp::Add => " + ",
                ArithOp::Sub => " - ",
                ArithOp::Mul => " * ",
            })?;
            write_term(f, b, voc, names)?;
            f.write_str(")")
        }
        Term::Neg(a) => {
            f.write_str("-")?;
            write_term(f, a, voc, names)
        }
        Term::Agg(agg) => {
            write!(f, "{}{{", agg.kind.name())?;
            let vars: Vec<String> = agg.binders.iter().map(|b| b.name.clone()).collect();
            match &agg.weight {
                Some(w) => {
                    write!(f, "({}, ", vars.join(", "))?;
                    write_term(f, w, voc, names)?;
                    f.write_str(")")?;
                }
                None => f.write_str(&vars.join(", "))?,
            }
            f.write_str(" | ")?;
            write_formula(f, &agg.cond, voc, names)?;
            f.write_str("}")
        }
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, phi: &Formula, voc: &Vocabulary, names: &dyn Fn(VarId) -> String) -> fmt::Result {
    let join = |f: &mut fmt::Formatter<'_>, fs: &[Formula], op: &str| -> fmt::Result {
        f.write_str("(")?;
        for (i, g) in fs.iter().enumerate() {
            if i > 0 {
                f.write_str(op)?;
            }
            write_formula(f, g, voc, names)?;
        }
        f.write_str(")")
    };
    match phi {
        Formula::Const(b) => write!(f, "{b}"),
        Formula::Atom(s, args) => write_term(f, &Term::App(*s, args.clone()), voc, names),
        Formula::Cmp(op, a, b) => {
            write_term(f, a, voc, names)?;
            write!(f, " {} ", op.symbol())?;
            write_term(f, b, voc, names)
        }
        Formula::Not(g) => {
            f.write_str("~")?;
            write_formula(f, g, voc, names)
        }
        Formula::And(fs) => join(f, fs, " & "),
        Formula::Or(fs) => join(f, fs, " | "),
        Formula::Implies(a, b) => join(f, &[(**a).clone(), (**b).clone()], " => "),
        Formula::Equiv(a, b) => join(f, &[(**a).clone(), (**b).clone()], " <=> "),
        Formula::Quant(q, bs, body) => {
            f.write_str(match q {
                Quantifier::Forall => "!",
                Quantifier::Exists => "?",
            })?;
            for (i, b) in bs.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}[{}]", b.name, voc.type_name(b.ty))?;
            }
            f.write_str(": ")?;
            write_formula(f, body, voc, names)
        }
    }
}

