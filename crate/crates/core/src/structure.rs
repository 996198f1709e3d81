//! Three-valued partial structures over a finite-domain vocabulary.
//!
//! Every table is stored densely over the cross product of its argument
//! domains; function tables additionally range over the result domain, so a
//! function row holds one truth value per candidate result ("value atom").

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::element::{DomainElement, TruthValue};
use crate::vocabulary::{SymbolId, SymbolKind, TypeId, Vocabulary, INT};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("incomparable structures")]
    IncomparableStructures,
    #[error("conflicting assignment: {0}")]
    ConflictingAssignment(String),
    #[error("unknown term `{0}`")]
    UnknownTerm(String),
    #[error("`{element}` is not an element of type `{ty}`")]
    UnknownElement { element: String, ty: String },
    #[error("`{value}` is not a possible value of `{term}`")]
    BadValue { term: String, value: String },
    #[error("type `{0}` has no domain")]
    MissingDomain(String),
    #[error("type `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("duplicate element `{element}` in type `{ty}`")]
    DuplicateElement { element: String, ty: String },
    #[error("functionally inconsistent: every value of `{0}` is false")]
    FunctionallyInconsistent(String),
    #[error("`{symbol}` expects {expected} arguments, got {got}")]
    ArityMismatch { symbol: String, expected: usize, got: usize },
    #[error("different vocabularies")]
    VocabularyMismatch,
}

/// The finite domain of one type.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Domain {
    elements: Vec<DomainElement>,
    index: HashMap<DomainElement, usize>,
}

impl Domain {
    fn new(elements: Vec<DomainElement>) -> Result<Domain, DomainElement> {
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(e.clone());
            }
        }
        Ok(Domain { elements, index })
    }

    pub fn elements(&self) -> &[DomainElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, e: &DomainElement) -> Option<usize> {
        self.index.get(e).copied()
    }
}

/// A symbol applied to domain elements: a domain atom `P(d̄)` or a domain
/// term `F(d̄)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DomainTerm {
    pub symbol: SymbolId,
    pub args: Vec<DomainElement>,
}

impl DomainTerm {
    pub fn new(symbol: SymbolId, args: Vec<DomainElement>) -> DomainTerm {
        DomainTerm { symbol, args }
    }

    pub fn display<'a>(&'a self, vocabulary: &'a Vocabulary) -> TermDisplay<'a> {
        TermDisplay {
            term: self,
            vocabulary,
        }
    }
}

pub struct TermDisplay<'a> {
    term: &'a DomainTerm,
    vocabulary: &'a Vocabulary,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.vocabulary.symbol(self.term.symbol).name)?;
        if !self.term.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.term.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A choice `term = value`. For predicate atoms the value is a truth value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub term: DomainTerm,
    pub value: DomainElement,
}

impl Assignment {
    pub fn new(term: DomainTerm, value: impl Into<DomainElement>) -> Assignment {
        Assignment {
            term,
            value: value.into(),
        }
    }

    pub fn display<'a>(&'a self, vocabulary: &'a Vocabulary) -> String {
        format!("{}={}", self.term.display(vocabulary), self.value)
    }
}

/// The configuration parameters: domain terms with at least one unknown
/// value atom.
pub type ParameterSet = BTreeSet<DomainTerm>;

/// One known value atom: `term = value` is `truth`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub term: DomainTerm,
    pub value: DomainElement,
    pub truth: bool,
}

impl Fact {
    pub fn new(term: DomainTerm, value: impl Into<DomainElement>, truth: bool) -> Fact {
        Fact {
            term,
            value: value.into(),
            truth,
        }
    }

    /// `Install(Windows)=true`, `Requester=Manager` or `Requester~=Manager`.
    pub fn display(&self, vocabulary: &Vocabulary) -> String {
        let op = if self.truth { "=" } else { "~=" };
        format!("{}{}{}", self.term.display(vocabulary), op, self.value)
    }
}

impl From<Assignment> for Fact {
    fn from(a: Assignment) -> Fact {
        Fact::new(a.term, a.value, true)
    }
}

/// A partial structure: finite domains plus a three-valued table per symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialStructure {
    vocabulary: Arc<Vocabulary>,
    domains: Vec<Domain>,
    tables: Vec<Vec<TruthValue>>,
}

impl PartialStructure {
    /// Builds a fully unknown structure. The integer domain comes from the
    /// declared range; every other type in use needs a domain here.
    pub fn new(
        vocabulary: Arc<Vocabulary>,
        domains: Vec<(TypeId, Vec<DomainElement>)>,
    ) -> Result<PartialStructure, StructureError> {
        let mut doms: Vec<Option<Domain>> = vec![None; vocabulary.num_types()];
        if let Some((lo, hi)) = vocabulary.int_range() {
            let d = Domain::new((lo..=hi).map(DomainElement::Int).collect()).expect("distinct ints");
            doms[INT.0] = Some(d);
        }
        for (t, elements) in domains {
            let ty = vocabulary.type_name(t).to_string();
            if t == INT {
                if elements.iter().any(|e| e.as_int().is_none()) {
                    return Err(StructureError::UnknownElement {
                        element: format!("{:?}", elements),
                        ty,
                    });
                }
            } else if let Some(e) = elements.iter().find(|e| !matches!(e, DomainElement::Const(_))) {
                return Err(StructureError::UnknownElement {
                    element: e.to_string(),
                    ty,
                });
            }
            let d = Domain::new(elements).map_err(|e| StructureError::DuplicateElement {
                element: e.to_string(),
                ty: ty.clone(),
            })?;
            doms[t.0] = Some(d);
        }
        let mut domains = Vec::with_capacity(doms.len());
        for (i, d) in doms.into_iter().enumerate() {
            let t = TypeId(i);
            match d {
                Some(d) if d.is_empty() && vocabulary.type_in_use(t) => {
                    return Err(StructureError::EmptyDomain(vocabulary.type_name(t).to_string()))
                }
                Some(d) => domains.push(d),
                None if vocabulary.type_in_use(t) => {
                    return Err(StructureError::MissingDomain(vocabulary.type_name(t).to_string()))
                }
                None => domains.push(Domain::default()),
            }
        }
        let mut s = PartialStructure {
            vocabulary,
            domains,
            tables: Vec::new(),
        };
        s.tables = s
            .vocabulary
            .symbols()
            .map(|(id, _)| vec![TruthValue::Unknown; s.rows(id) * s.width(id)])
            .collect();
        Ok(s)
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocabulary
    }

    pub fn domain(&self, t: TypeId) -> &Domain {
        &self.domains[t.0]
    }

    pub fn same_domains(&self, other: &PartialStructure) -> bool {
        *self.vocabulary == *other.vocabulary && self.domains == other.domains
    }

    /// Number of argument tuples of a symbol.
    pub fn rows(&self, sym: SymbolId) -> usize {
        self.vocabulary
            .symbol(sym)
            .args
            .iter()
            .map(|t| self.domains[t.0].len())
            .product()
    }

    /// Number of value atoms per row: the result domain size, or 1 for
    /// predicates.
    pub fn width(&self, sym: SymbolId) -> usize {
        match self.vocabulary.symbol(sym).kind {
            SymbolKind::Predicate => 1,
            SymbolKind::Function(r) => self.domains[r.0].len(),
        }
    }

    pub fn row_index(&self, sym: SymbolId, args: &[DomainElement]) -> Result<usize, StructureError> {
        if sym.0 >= self.vocabulary.num_symbols() {
            return Err(StructureError::UnknownTerm(format!("symbol #{}", sym.0)));
        }
        let decl = self.vocabulary.symbol(sym);
        if decl.args.len() != args.len() {
            return Err(StructureError::ArityMismatch {
                symbol: decl.name.clone(),
                expected: decl.args.len(),
                got: args.len(),
            });
        }
        let mut row = 0;
        for (t, a) in decl.args.iter().zip(args) {
            let d = &self.domains[t.0];
            let i = d.position(a).ok_or_else(|| StructureError::UnknownElement {
                element: a.to_string(),
                ty: self.vocabulary.type_name(*t).to_string(),
            })?;
            row = row * d.len() + i;
        }
        Ok(row)
    }

    pub fn row_args(&self, sym: SymbolId, mut row: usize) -> Vec<DomainElement> {
        let decl = self.vocabulary.symbol(sym);
        let mut args = vec![DomainElement::Bool(false); decl.args.len()];
        for (i, t) in decl.args.iter().enumerate().rev() {
            let d = &self.domains[t.0];
            args[i] = d.elements[row % d.len()].clone();
            row /= d.len();
        }
        args
    }

    /// Candidate values of a term: the result domain, or `{true, false}` for
    /// a predicate atom.
    pub fn result_values(&self, sym: SymbolId) -> Vec<DomainElement> {
        match self.vocabulary.symbol(sym).kind {
            SymbolKind::Predicate => vec![DomainElement::Bool(true), DomainElement::Bool(false)],
            SymbolKind::Function(r) => self.domains[r.0].elements.clone(),
        }
    }

    /// Raw table entry: the atom for predicates (`value` ignored), the value
    /// atom `F(d̄)=e` for functions.
    pub fn entry(&self, sym: SymbolId, row: usize, value: usize) -> TruthValue {
        self.tables[sym.0][row * self.width(sym) + value]
    }

    pub fn row(&self, sym: SymbolId, row: usize) -> &[TruthValue] {
        let w = self.width(sym);
        &self.tables[sym.0][row * w..(row + 1) * w]
    }

    pub fn display_term(&self, t: &DomainTerm) -> String {
        t.display(&self.vocabulary).to_string()
    }

    pub(crate) fn value_position(&self, term: &DomainTerm, value: &DomainElement) -> Result<usize, StructureError> {
        match self.vocabulary.symbol(term.symbol).kind {
            SymbolKind::Predicate => match value {
                DomainElement::Bool(_) => Ok(0),
                _ => Err(self.bad_value(term, value)),
            },
            SymbolKind::Function(r) => self.domains[r.0]
                .position(value)
                .ok_or_else(|| self.bad_value(term, value)),
        }
    }

    fn bad_value(&self, term: &DomainTerm, value: &DomainElement) -> StructureError {
        StructureError::BadValue {
            term: self.display_term(term),
            value: value.to_string(),
        }
    }

    /// Truth of the value atom `term = value`.
    pub fn value_truth(&self, term: &DomainTerm, value: &DomainElement) -> Result<TruthValue, StructureError> {
        let row = self.row_index(term.symbol, &term.args)?;
        let pos = self.value_position(term, value)?;
        let t = self.entry(term.symbol, row, pos);
        Ok(match value {
            DomainElement::Bool(false) if self.vocabulary.symbol(term.symbol).is_predicate() => t.negate(),
            _ => t,
        })
    }

    /// The value of `term` if the structure determines it.
    pub fn term_value(&self, term: &DomainTerm) -> Result<Option<DomainElement>, StructureError> {
        let row = self.row_index(term.symbol, &term.args)?;
        Ok(self.row_value(term.symbol, row))
    }

    pub(crate) fn row_value(&self, sym: SymbolId, row: usize) -> Option<DomainElement> {
        let entries = self.row(sym, row);
        match self.vocabulary.symbol(sym).kind {
            SymbolKind::Predicate => entries[0].as_bool().map(DomainElement::Bool),
            SymbolKind::Function(r) => {
                if let Some(i) = entries.iter().position(|&t| t == TruthValue::True) {
                    return Some(self.domains[r.0].elements[i].clone());
                }
                // a single non-false value is forced
                let mut open = entries.iter().enumerate().filter(|(_, &t)| t != TruthValue::False);
                match (open.next(), open.next()) {
                    (Some((i, _)), None) => Some(self.domains[r.0].elements[i].clone()),
                    _ => None,
                }
            }
        }
    }

    /// True if some value atom of `term` is unknown.
    pub fn is_open(&self, term: &DomainTerm) -> Result<bool, StructureError> {
        let row = self.row_index(term.symbol, &term.args)?;
        Ok(self.row_is_open(term.symbol, row))
    }

    pub(crate) fn row_is_open(&self, sym: SymbolId, row: usize) -> bool {
        self.row(sym, row).contains(&TruthValue::Unknown)
    }

    /// Every domain term, in symbol then row order.
    pub fn terms(&self) -> impl Iterator<Item = DomainTerm> + '_ {
        self.vocabulary.symbols().flat_map(move |(sym, _)| {
            (0..self.rows(sym)).map(move |row| DomainTerm::new(sym, self.row_args(sym, row)))
        })
    }

    pub fn is_total(&self) -> bool {
        self.tables.iter().all(|t| !t.contains(&TruthValue::Unknown))
    }

    /// Sets one value atom, keeping rows functionally consistent: a true
    /// value falsifies the rest of its row, and the last open value of a row
    /// cannot be falsified.
    pub fn set_value(&mut self, term: &DomainTerm, value: &DomainElement, truth: TruthValue) -> Result<(), StructureError> {
        let row = self.row_index(term.symbol, &term.args)?;
        let pos = self.value_position(term, value)?;
        let w = self.width(term.symbol);
        let sym = term.symbol;
        if self.vocabulary.symbol(sym).is_predicate() {
            let truth = if value == &DomainElement::Bool(false) {
                truth.negate()
            } else {
                truth
            };
            self.tables[sym.0][row] = truth;
            return Ok(());
        }
        let base = row * w;
        match truth {
            TruthValue::Unknown => self.tables[sym.0][base + pos] = TruthValue::Unknown,
            TruthValue::True => {
                for i in 0..w {
                    self.tables[sym.0][base + i] = if i == pos {
                        TruthValue::True
                    } else {
                        TruthValue::False
                    };
                }
            }
            TruthValue::False => {
                let others_false = (0..w).all(|i| i == pos || self.tables[sym.0][base + i] == TruthValue::False);
                if others_false {
                    return Err(StructureError::FunctionallyInconsistent(self.display_term(term)));
                }
                self.tables[sym.0][base + pos] = TruthValue::False;
            }
        }
        Ok(())
    }

    /// `self ∪ {term = value}`.
    pub fn extend(&self, a: &Assignment) -> Result<PartialStructure, StructureError> {
        let current = self.value_truth(&a.term, &a.value)?;
        let row = self.row_index(a.term.symbol, &a.term.args)?;
        let other_true = !self.vocabulary.symbol(a.term.symbol).is_predicate()
            && self
                .row(a.term.symbol, row)
                .iter()
                .enumerate()
                .any(|(i, &t)| t == TruthValue::True && Some(i) != self.value_position(&a.term, &a.value).ok());
        if current == TruthValue::False || other_true {
            return Err(StructureError::ConflictingAssignment(a.display(&self.vocabulary)));
        }
        let mut s = self.clone();
        s.set_value(&a.term, &a.value, TruthValue::True)?;
        Ok(s)
    }

    /// Makes every value atom of `term` unknown.
    pub fn erase(&self, term: &DomainTerm) -> Result<PartialStructure, StructureError> {
        let row = self
            .row_index(term.symbol, &term.args)
            .map_err(|_| StructureError::UnknownTerm(self.display_term_lossy(term)))?;
        let mut s = self.clone();
        let w = self.width(term.symbol);
        for e in &mut s.tables[term.symbol.0][row * w..(row + 1) * w] {
            *e = TruthValue::Unknown;
        }
        Ok(s)
    }

    fn display_term_lossy(&self, term: &DomainTerm) -> String {
        if term.symbol.0 < self.vocabulary.num_symbols() {
            self.display_term(term)
        } else {
            format!("{:?}", term)
        }
    }

    /// The precision order `self ≤_p other`.
    pub fn precision_leq(&self, other: &PartialStructure) -> Result<bool, StructureError> {
        if !self.same_domains(other) {
            return Err(StructureError::IncomparableStructures);
        }
        Ok(self
            .tables
            .iter()
            .zip(&other.tables)
            .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.precision_leq(*y))))
    }

    /// All domain terms with at least one unknown value atom.
    pub fn open_terms_universe(&self) -> ParameterSet {
        let mut set = ParameterSet::new();
        for (sym, _) in self.vocabulary.symbols() {
            for row in 0..self.rows(sym) {
                if self.row_is_open(sym, row) {
                    set.insert(DomainTerm::new(sym, self.row_args(sym, row)));
                }
            }
        }
        set
    }

    /// Checks the per-row functional consistency criterion.
    pub fn check_functional_consistency(&self) -> Result<(), StructureError> {
        for (sym, decl) in self.vocabulary.symbols() {
            if decl.is_predicate() {
                continue;
            }
            for row in 0..self.rows(sym) {
                let entries = self.row(sym, row);
                let trues = entries.iter().filter(|&&t| t == TruthValue::True).count();
                let all_false = entries.iter().all(|&t| t == TruthValue::False);
                if trues > 1 || all_false {
                    let term = DomainTerm::new(sym, self.row_args(sym, row));
                    return Err(StructureError::FunctionallyInconsistent(self.display_term(&term)));
                }
            }
        }
        Ok(())
    }

    /// Entries that are true or false; function rows with a true value list
    /// only that value.
    pub fn known_entries(&self) -> Vec<Fact> {
        let mut out = Vec::new();
        for (sym, decl) in self.vocabulary.symbols() {
            for row in 0..self.rows(sym) {
                let entries = self.row(sym, row);
                let term = || DomainTerm::new(sym, self.row_args(sym, row));
                match decl.kind {
                    SymbolKind::Predicate => {
                        if let Some(b) = entries[0].as_bool() {
                            out.push(Fact::new(term(), true, b));
                        }
                    }
                    SymbolKind::Function(r) => {
                        let dom = &self.domains[r.0].elements;
                        if let Some(i) = entries.iter().position(|&t| t == TruthValue::True) {
                            out.push(Fact::new(term(), dom[i].clone(), true));
                        } else {
                            for (i, &t) in entries.iter().enumerate() {
                                if t == TruthValue::False {
                                    out.push(Fact::new(term(), dom[i].clone(), false));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
