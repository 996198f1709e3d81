//! Grounding a theory over a partial structure to CNF.
//!
//! Terms that the structure already determines are folded in as constants;
//! only open terms (the parameters) get propositional variables. Each
//! parameter row carries an exactly-one constraint over its value atoms.
//! Formulas are flattened into a small and/or tree with constant folding and
//! then clausified with fully defined auxiliary variables.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::sync::Arc;

use kbconf_sat::{Lit, Var};
use thiserror::Error;

use crate::element::{DomainElement, TruthValue};
use crate::eval::{arith, empty_aggregate_value, fold_aggregate, for_each_binding, Env, EvalError};
use crate::structure::{DomainTerm, Fact, PartialStructure};
use crate::syntax::{AggKind, Aggregate, CmpOp, Formula, Quantifier, Term, Theory};
use crate::vocabulary::SymbolId;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GroundError {
    #[error("unsupported aggregate: {0}")]
    UnsupportedAggregate(String),
    #[error("integer range overflow: {0}")]
    Overflow(String),
    #[error("{0}")]
    Eval(EvalError),
    #[error("unmapped atom {0}")]
    Unmapped(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<EvalError> for GroundError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::RangeExceeded(m) => GroundError::Overflow(m),
            other => GroundError::Eval(other),
        }
    }
}

/// A literal that may have been folded to a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GLit {
    Const(bool),
    Lit(Lit),
}

impl std::ops::Not for GLit {
    type Output = GLit;
    fn not(self) -> GLit {
        match self {
            GLit::Const(b) => GLit::Const(!b),
            GLit::Lit(l) => GLit::Lit(!l),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum GF {
    Const(bool),
    Lit(Lit),
    And(Vec<GF>),
    Or(Vec<GF>),
}

impl From<GLit> for GF {
    fn from(g: GLit) -> GF {
        match g {
            GLit::Const(b) => GF::Const(b),
            GLit::Lit(l) => GF::Lit(l),
        }
    }
}

fn gf_junction(is_and: bool, parts: Vec<GF>) -> GF {
    let mut out = Vec::with_capacity(parts.len());
    for p in parts {
        match p {
            GF::Const(b) if b == is_and => {}
            GF::Const(_) => return GF::Const(!is_and),
            GF::And(xs) if is_and => out.extend(xs),
            GF::Or(xs) if !is_and => out.extend(xs),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => GF::Const(is_and),
        1 => out.pop().unwrap(),
        _ if is_and => GF::And(out),
        _ => GF::Or(out),
    }
}

fn gf_and(parts: Vec<GF>) -> GF {
    gf_junction(true, parts)
}

fn gf_or(parts: Vec<GF>) -> GF {
    gf_junction(false, parts)
}

fn gf_not(g: GF) -> GF {
    match g {
        GF::Const(b) => GF::Const(!b),
        GF::Lit(l) => GF::Lit(!l),
        GF::And(xs) => GF::Or(xs.into_iter().map(gf_not).collect()),
        GF::Or(xs) => GF::And(xs.into_iter().map(gf_not).collect()),
    }
}

/// Possible values of a ground term, each with the condition under which
/// the term takes it. Conditions are pairwise exclusive and exhaustive in
/// every model.
pub type Rep = Vec<(DomainElement, GLit)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClauseSource {
    /// Belongs to the unit with this index.
    Unit(usize),
    /// Defines an auxiliary variable; satisfiable for any inputs.
    Definition,
    /// Exactly-one over a parameter's value atoms.
    Functional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnitKind {
    /// A sentence, or one instance of a universally quantified sentence.
    Sentence,
    /// A false value atom of a partially known parameter.
    Data,
}

/// A group of clauses that explanations include or drop together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unit {
    /// `budget`, `prereq[Office,Windows]` or `data:Cost~=5`.
    pub id: String,
    /// The sentence label for sentence units.
    pub sentence: Option<String>,
    pub kind: UnitKind,
    pub fact: Option<Fact>,
    pub clauses: Vec<usize>,
}

/// A domain term left open by the base structure, with one literal per
/// result value. Predicates use `x` for `true` and `¬x` for `false`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parameter {
    pub term: DomainTerm,
    pub row: usize,
    pub values: Vec<DomainElement>,
    pub lits: Vec<Lit>,
}

impl Parameter {
    pub fn lit(&self, value: &DomainElement) -> Option<Lit> {
        self.values.iter().position(|v| v == value).map(|i| self.lits[i])
    }

    pub fn is_predicate(&self) -> bool {
        self.values.len() == 2 && self.lits[1] == !self.lits[0]
    }

    /// The value atoms that own a variable.
    pub fn atoms(&self) -> &[Lit] {
        if self.is_predicate() {
            &self.lits[..1]
        } else {
            &self.lits
        }
    }
}

const PAIRWISE_LIMIT: usize = 6;
const DIRECT_ORDER_LIMIT: usize = 64;

#[derive(Clone, Debug)]
pub struct GroundProblem {
    structure: Arc<PartialStructure>,
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    sources: Vec<ClauseSource>,
    units: Vec<Unit>,
    parameters: Vec<Parameter>,
    param_index: HashMap<DomainTerm, usize>,
    // parameter index of each parameter var
    var_param: HashMap<Var, usize>,
    cache: HashMap<(bool, Vec<Lit>), Lit>,
    true_lit: Lit,
}

/// Grounds `theory` over `s`.
pub fn ground(theory: &Theory, s: &PartialStructure) -> Result<GroundProblem, GroundError> {
    let mut g = GroundProblem::empty(s);
    for sentence in &theory.sentences {
        let mut env = Env::new(sentence.num_vars);
        let mut binders = Vec::new();
        let mut body = &sentence.formula;
        while let Formula::Quant(Quantifier::Forall, bs, inner) = body {
            binders.extend(bs.iter().cloned());
            body = inner;
        }
        if binders.is_empty() {
            let gf = g.formula(body, &mut env)?;
            g.assert_unit(&sentence.id, &sentence.id, gf);
            continue;
        }
        let s = g.structure.clone();
        let mut err = None;
        for_each_binding(&s, &binders, &mut env, |env| {
            let result = g.formula(body, env).map(|gf| {
                let args: Vec<String> = binders.iter().map(|b| env.get(b.var).unwrap().to_string()).collect();
                let id = format!("{}[{}]", sentence.id, args.join(","));
                g.assert_unit(&id, &sentence.id, gf);
            });
            result.err().map(|e| err = Some(e))
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(g)
}

impl GroundProblem {
    fn empty(s: &PartialStructure) -> GroundProblem {
        let mut g = GroundProblem {
            structure: Arc::new(s.clone()),
            num_vars: 1,
            clauses: Vec::new(),
            sources: Vec::new(),
            units: Vec::new(),
            parameters: Vec::new(),
            param_index: HashMap::new(),
            var_param: HashMap::new(),
            cache: HashMap::new(),
            true_lit: Var::from_index(0).positive(),
        };
        let t = g.true_lit;
        g.push_clause(vec![t], ClauseSource::Definition);
        let voc = s.vocabulary().clone();
        for (sym, decl) in voc.symbols() {
            let values = s.result_values(sym);
            for row in 0..s.rows(sym) {
                if !s.row_is_open(sym, row) {
                    continue;
                }
                let term = DomainTerm::new(sym, s.row_args(sym, row));
                let idx = g.parameters.len();
                let lits: Vec<Lit> = if decl.is_predicate() {
                    let x = g.fresh();
                    g.var_param.insert(x.var(), idx);
                    vec![x, !x]
                } else {
                    (0..values.len())
                        .map(|_| {
                            let x = g.fresh();
                            g.var_param.insert(x.var(), idx);
                            x
                        })
                        .collect()
                };
                g.param_index.insert(term.clone(), idx);
                g.parameters.push(Parameter {
                    term,
                    row,
                    values: values.clone(),
                    lits,
                });
                if !decl.is_predicate() {
                    g.exactly_one(idx);
                }
            }
        }
        for idx in 0..g.parameters.len() {
            let p = g.parameters[idx].clone();
            if p.is_predicate() {
                continue;
            }
            for (i, v) in p.values.iter().enumerate() {
                if s.entry(p.term.symbol, p.row, i) == TruthValue::False {
                    let fact = Fact::new(p.term.clone(), v.clone(), false);
                    let unit = g.units.len();
                    let c = g.push_clause(vec![!p.lits[i]], ClauseSource::Unit(unit));
                    g.units.push(Unit {
                        id: format!("data:{}", fact.display(s.vocabulary())),
                        sentence: None,
                        kind: UnitKind::Data,
                        fact: Some(fact),
                        clauses: vec![c],
                    });
                }
            }
        }
        g
    }

    fn exactly_one(&mut self, idx: usize) {
        let xs = self.parameters[idx].lits.clone();
        self.push_clause(xs.clone(), ClauseSource::Functional);
        if xs.len() <= PAIRWISE_LIMIT {
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    self.push_clause(vec![!xs[i], !xs[j]], ClauseSource::Functional);
                }
            }
            return;
        }
        // sequential counter: s_i means some x_j with j <= i is true
        let mut prev = self.fresh();
        self.push_clause(vec![!xs[0], prev], ClauseSource::Functional);
        for &x in &xs[1..xs.len() - 1] {
            let cur = self.fresh();
            self.push_clause(vec![!x, cur], ClauseSource::Functional);
            self.push_clause(vec![!prev, cur], ClauseSource::Functional);
            self.push_clause(vec![!x, !prev], ClauseSource::Functional);
            prev = cur;
        }
        self.push_clause(vec![!xs[xs.len() - 1], !prev], ClauseSource::Functional);
    }

    /// A variable no clause of the problem mentions yet.
    pub fn new_var(&mut self) -> Var {
        self.fresh().var()
    }

    /// Adds a clause that explanations treat as background.
    pub fn add_definition(&mut self, c: Vec<Lit>) -> usize {
        self.push_clause(c, ClauseSource::Definition)
    }

    fn fresh(&mut self) -> Lit {
        let v = Var::from_index(self.num_vars);
        self.num_vars += 1;
        v.positive()
    }

    fn push_clause(&mut self, c: Vec<Lit>, src: ClauseSource) -> usize {
        self.clauses.push(c);
        self.sources.push(src);
        self.clauses.len() - 1
    }

    pub fn structure(&self) -> &PartialStructure {
        &self.structure
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn provenance(&self, clause: usize) -> ClauseSource {
        self.sources[clause]
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    pub fn parameter(&self, term: &DomainTerm) -> Option<&Parameter> {
        self.param_index.get(term).map(|&i| &self.parameters[i])
    }

    pub fn parameter_index(&self, term: &DomainTerm) -> Option<usize> {
        self.param_index.get(term).copied()
    }

    /// The parameter owning variable `v`, if `v` is not auxiliary.
    pub fn parameter_of(&self, v: Var) -> Option<&Parameter> {
        self.var_param.get(&v).map(|&i| &self.parameters[i])
    }

    /// Clauses that explanations never drop.
    pub fn is_background_clause(&self, clause: usize) -> bool {
        !matches!(self.sources[clause], ClauseSource::Unit(_))
    }

    /// Literal for `term = value` being `truth`.
    pub fn encode_fact(&self, f: &Fact) -> Result<Lit, GroundError> {
        let unmapped = || GroundError::Unmapped(f.display(self.structure.vocabulary()));
        let p = self.parameter(&f.term).ok_or_else(unmapped)?;
        let l = p.lit(&f.value).ok_or_else(unmapped)?;
        Ok(if f.truth { l } else { !l })
    }

    pub fn encode_assignment(&self, a: &crate::structure::Assignment) -> Result<Lit, GroundError> {
        self.encode_fact(&Fact::new(a.term.clone(), a.value.clone(), true))
    }

    /// The total structure a model of the clauses describes.
    pub fn decode_model(&self, model: &[bool]) -> Result<PartialStructure, GroundError> {
        let mut s = (*self.structure).clone();
        let holds = |l: Lit| model.get(l.var().index()).map(|&b| b != l.is_negated()).unwrap_or(false);
        for p in &self.parameters {
            let chosen: Vec<usize> = (0..p.values.len()).filter(|&i| holds(p.lits[i])).collect();
            if chosen.len() != 1 {
                return Err(GroundError::Internal(format!(
                    "{} has {} values in the model",
                    s.display_term(&p.term),
                    chosen.len()
                )));
            }
            s.set_value(&p.term, &p.values[chosen[0]], TruthValue::True)
                .map_err(|e| GroundError::Internal(e.to_string()))?;
        }
        Ok(s)
    }

    /// Grounds an extra term, adding whatever definitions it needs, and
    /// returns its possible values.
    pub fn observe(&mut self, t: &Term, num_vars: usize) -> Result<Rep, GroundError> {
        let mut env = Env::new(num_vars);
        self.term(t, &mut env)
    }

    /// Grounds an extra closed formula to a single literal.
    pub fn observe_formula(&mut self, f: &Formula, num_vars: usize) -> Result<GLit, GroundError> {
        let mut env = Env::new(num_vars);
        let gf = self.formula(f, &mut env)?;
        Ok(self.lit_of(gf))
    }

    fn assert_unit(&mut self, id: &str, sentence: &str, gf: GF) {
        let unit = self.units.len();
        let mut clauses = Vec::new();
        let parts = match gf {
            GF::Const(true) => return,
            GF::And(xs) => xs,
            other => vec![other],
        };
        for p in parts {
            let clause = match p {
                GF::Const(true) => continue,
                GF::Const(false) => vec![!self.true_lit],
                GF::Lit(l) => vec![l],
                GF::Or(xs) => {
                    let mut c: Vec<Lit> = Vec::with_capacity(xs.len());
                    let mut satisfied = false;
                    for x in xs {
                        match self.lit_of(x) {
                            GLit::Const(true) => satisfied = true,
                            GLit::Const(false) => {}
                            GLit::Lit(l) => c.push(l),
                        }
                    }
                    if satisfied {
                        continue;
                    }
                    if c.is_empty() {
                        c.push(!self.true_lit);
                    }
                    c
                }
                inner @ GF::And(_) => match self.lit_of(inner) {
                    GLit::Lit(l) => vec![l],
                    GLit::Const(b) => {
                        if b {
                            continue;
                        }
                        vec![!self.true_lit]
                    }
                },
            };
            clauses.push(self.push_clause(clause, ClauseSource::Unit(unit)));
        }
        if clauses.is_empty() {
            return;
        }
        self.units.push(Unit {
            id: id.to_string(),
            sentence: Some(sentence.to_string()),
            kind: UnitKind::Sentence,
            fact: None,
            clauses,
        });
    }

    /// A literal equivalent to `gf`, introducing a defined auxiliary
    /// variable for compound formulas.
    fn lit_of(&mut self, gf: GF) -> GLit {
        let (is_and, parts) = match gf {
            GF::Const(b) => return GLit::Const(b),
            GF::Lit(l) => return GLit::Lit(l),
            GF::And(xs) => (true, xs),
            GF::Or(xs) => (false, xs),
        };
        let mut lits = Vec::with_capacity(parts.len());
        for p in parts {
            match self.lit_of(p) {
                GLit::Const(b) if b == is_and => {}
                GLit::Const(_) => return GLit::Const(!is_and),
                GLit::Lit(l) => lits.push(l),
            }
        }
        lits.sort();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return GLit::Const(!is_and);
        }
        match lits.len() {
            0 => return GLit::Const(is_and),
            1 => return GLit::Lit(lits[0]),
            _ => {}
        }
        let key = (is_and, lits);
        if let Some(&x) = self.cache.get(&key) {
            return GLit::Lit(x);
        }
        let x = self.fresh();
        let lits = &key.1;
        // and: x -> c_i, (all c_i) -> x; or is the dual
        let (head, body) = if is_and { (x, false) } else { (!x, true) };
        for &c in lits {
            let c = if body { !c } else { c };
            self.push_clause(vec![!head, c], ClauseSource::Definition);
        }
        let mut big: Vec<Lit> = lits.iter().map(|&c| if body { c } else { !c }).collect();
        big.push(head);
        self.push_clause(big, ClauseSource::Definition);
        self.cache.insert(key, x);
        GLit::Lit(x)
    }

    fn formula(&mut self, f: &Formula, env: &mut Env) -> Result<GF, GroundError> {
        Ok(match f {
            Formula::Const(b) => GF::Const(*b),
            Formula::Atom(sym, args) => {
                let reps = self.terms(args, env)?;
                let mut cases = Vec::new();
                for (tuple, cond) in combinations(&reps) {
                    let atom = self.atom(*sym, &tuple)?;
                    cases.push(gf_and(vec![cond, atom]));
                }
                gf_or(cases)
            }
            Formula::Cmp(op, a, b) => {
                let ra = self.term(a, env)?;
                let rb = self.term(b, env)?;
                self.compare(*op, &ra, &rb)?
            }
            Formula::Not(g) => gf_not(self.formula(g, env)?),
            Formula::And(fs) | Formula::Or(fs) => {
                let is_and = matches!(f, Formula::And(_));
                let mut parts = Vec::with_capacity(fs.len());
                for g in fs {
                    let x = self.formula(g, env)?;
                    if x == GF::Const(!is_and) {
                        return Ok(x);
                    }
                    parts.push(x);
                }
                gf_junction(is_and, parts)
            }
            Formula::Implies(a, b) => {
                let x = self.formula(a, env)?;
                if x == GF::Const(false) {
                    return Ok(GF::Const(true));
                }
                gf_or(vec![gf_not(x), self.formula(b, env)?])
            }
            Formula::Equiv(a, b) => {
                let x = self.formula(a, env)?;
                let y = self.formula(b, env)?;
                let (x, y) = (self.lit_of(x), self.lit_of(y));
                match (x, y) {
                    (GLit::Const(p), other) | (other, GLit::Const(p)) => {
                        let g = GF::from(other);
                        if p {
                            g
                        } else {
                            gf_not(g)
                        }
                    }
                    _ => gf_and(vec![
                        gf_or(vec![GF::from(!x), GF::from(y)]),
                        gf_or(vec![GF::from(x), GF::from(!y)]),
                    ]),
                }
            }
            Formula::Quant(q, binders, body) => {
                let is_and = *q == Quantifier::Forall;
                let s = self.structure.clone();
                let mut parts = Vec::new();
                let mut err = None;
                let mut short = false;
                for_each_binding(&s, binders, env, |env| match self.formula(body, env) {
                    Err(e) => {
                        err = Some(e);
                        Some(())
                    }
                    Ok(GF::Const(b)) if b != is_and => {
                        short = true;
                        Some(())
                    }
                    Ok(x) => {
                        parts.push(x);
                        None
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                if short {
                    GF::Const(!is_and)
                } else {
                    gf_junction(is_and, parts)
                }
            }
        })
    }

    fn atom(&mut self, sym: SymbolId, tuple: &[DomainElement]) -> Result<GF, GroundError> {
        let s = &self.structure;
        let row = s.row_index(sym, tuple).map_err(|e| GroundError::Internal(e.to_string()))?;
        if !s.row_is_open(sym, row) {
            return Ok(GF::Const(s.entry(sym, row, 0) == TruthValue::True));
        }
        let term = DomainTerm::new(sym, tuple.to_vec());
        let p = &self.parameters[self.param_index[&term]];
        Ok(GF::Lit(p.lits[0]))
    }

    fn terms(&mut self, ts: &[Term], env: &mut Env) -> Result<Vec<Rep>, GroundError> {
        ts.iter().map(|t| self.term(t, env)).collect()
    }

    fn finish(&mut self, cases: BTreeMap<DomainElement, Vec<GF>>) -> Rep {
        let mut out = Vec::with_capacity(cases.len());
        for (v, conds) in cases {
            match self.lit_of(gf_or(conds)) {
                GLit::Const(false) => {}
                g => out.push((v, g)),
            }
        }
        out
    }

    fn term(&mut self, t: &Term, env: &mut Env) -> Result<Rep, GroundError> {
        Ok(match t {
            Term::Var(v) => {
                let e = env.get(*v).cloned().ok_or(EvalError::UnboundVariable(*v))?;
                vec![(e, GLit::Const(true))]
            }
            Term::Elem(e) => vec![(e.clone(), GLit::Const(true))],
            Term::App(sym, args) => {
                let reps = self.terms(args, env)?;
                let mut cases: BTreeMap<DomainElement, Vec<GF>> = BTreeMap::new();
                for (tuple, cond) in combinations(&reps) {
                    let s = &self.structure;
                    let row = s.row_index(*sym, &tuple).map_err(|e| GroundError::Internal(e.to_string()))?;
                    if !s.row_is_open(*sym, row) {
                        let v = s.row_value(*sym, row).expect("closed row has a value");
                        cases.entry(v).or_default().push(cond);
                        continue;
                    }
                    let p = &self.parameters[self.param_index[&DomainTerm::new(*sym, tuple)]];
                    for (v, &l) in p.values.iter().zip(&p.lits) {
                        cases.entry(v.clone()).or_default().push(gf_and(vec![cond.clone(), GF::Lit(l)]));
                    }
                }
                self.finish(cases)
            }
            Term::Arith(op, a, b) => {
                let ra = self.term(a, env)?;
                let rb = self.term(b, env)?;
                let mut cases: BTreeMap<DomainElement, Vec<GF>> = BTreeMap::new();
                for (va, ga) in &ra {
                    for (vb, gb) in &rb {
                        let (x, y) = (int(va)?, int(vb)?);
                        let v = arith(*op, x, y)?;
                        cases
                            .entry(DomainElement::Int(v))
                            .or_default()
                            .push(gf_and(vec![GF::from(*ga), GF::from(*gb)]));
                    }
                }
                self.finish(cases)
            }
            Term::Neg(a) => {
                let ra = self.term(a, env)?;
                let mut out = Vec::with_capacity(ra.len());
                for (v, g) in ra {
                    let n = int(&v)?.checked_neg().ok_or_else(|| GroundError::Overflow("negation".into()))?;
                    out.push((DomainElement::Int(n), g));
                }
                out.sort();
                out
            }
            Term::Agg(agg) => self.aggregate(agg, env)?,
        })
    }

    /// Running-total chain over the aggregate's instances.
    fn aggregate(&mut self, agg: &Aggregate, env: &mut Env) -> Result<Rep, GroundError> {
        if agg.kind == AggKind::Prod {
            return Err(GroundError::UnsupportedAggregate("prod is not supported".into()));
        }
        let s = self.structure.clone();
        let mut items: Vec<(GLit, i64)> = Vec::new();
        let mut err = None;
        for_each_binding(&s, &agg.binders, env, |env| {
            let step = (|| -> Result<(), GroundError> {
                let c = self.formula(&agg.cond, env)?;
                let c = self.lit_of(c);
                if c == GLit::Const(false) {
                    return Ok(());
                }
                let w = match &agg.weight {
                    None => 1,
                    Some(w) => match self.term(w, env)?.as_slice() {
                        [(v, GLit::Const(true))] => int(v)?,
                        _ => {
                            return Err(GroundError::UnsupportedAggregate(format!(
                                "the weight of a {} must be determined by the structure",
                                agg.kind.name()
                            )))
                        }
                    },
                };
                items.push((c, w));
                Ok(())
            })();
            step.err().map(|e| err = Some(e))
        });
        if let Some(e) = err {
            return Err(e);
        }
        let start = match agg.kind {
            AggKind::Min | AggKind::Max => None,
            _ => Some(0),
        };
        let mut states: BTreeMap<Option<i64>, GLit> = BTreeMap::from([(start, GLit::Const(true))]);
        for (c, w) in items {
            let mut next: BTreeMap<Option<i64>, Vec<GF>> = BTreeMap::new();
            for (&st, &g) in &states {
                let taken = Some(fold_aggregate(agg.kind, st, w)?);
                if c == GLit::Const(true) {
                    next.entry(taken).or_default().push(GF::from(g));
                } else {
                    next.entry(st).or_default().push(gf_and(vec![GF::from(g), GF::from(!c)]));
                    next.entry(taken).or_default().push(gf_and(vec![GF::from(g), GF::from(c)]));
                }
            }
            states = BTreeMap::new();
            for (st, conds) in next {
                match self.lit_of(gf_or(conds)) {
                    GLit::Const(false) => {}
                    g => {
                        states.insert(st, g);
                    }
                }
            }
        }
        let mut cases: BTreeMap<DomainElement, Vec<GF>> = BTreeMap::new();
        for (st, g) in states {
            let v = match st {
                Some(v) => v,
                None => empty_aggregate_value(&s, agg.kind)?,
            };
            cases.entry(DomainElement::Int(v)).or_default().push(GF::from(g));
        }
        Ok(self.finish(cases))
    }

    fn compare(&mut self, op: CmpOp, a: &Rep, b: &Rep) -> Result<GF, GroundError> {
        match op {
            CmpOp::Eq | CmpOp::Ne => {
                let index: HashMap<&DomainElement, GLit> = b.iter().map(|(v, g)| (v, *g)).collect();
                let mut cases = Vec::new();
                for (v, ga) in a {
                    if let Some(gb) = index.get(v) {
                        cases.push(gf_and(vec![GF::from(*ga), GF::from(*gb)]));
                    }
                }
                let eq = gf_or(cases);
                Ok(if op == CmpOp::Eq { eq } else { gf_not(eq) })
            }
            CmpOp::Lt => self.less(a, b, true),
            CmpOp::Le => self.less(a, b, false),
            CmpOp::Gt => self.less(b, a, true),
            CmpOp::Ge => self.less(b, a, false),
        }
    }

    /// `a < b`, or `a =< b` when not strict.
    fn less(&mut self, a: &Rep, b: &Rep, strict: bool) -> Result<GF, GroundError> {
        let holds = |x: i64, y: i64| if strict { x < y } else { x <= y };
        let mut xs: Vec<(i64, GLit)> = a.iter().map(|(v, g)| Ok((int(v)?, *g))).collect::<Result<_, GroundError>>()?;
        let ys: Vec<(i64, GLit)> = b.iter().map(|(v, g)| Ok((int(v)?, *g))).collect::<Result<_, GroundError>>()?;
        if xs.len() == 1 || ys.len() == 1 || xs.len() * ys.len() <= DIRECT_ORDER_LIMIT {
            let mut cases = Vec::new();
            for &(x, gx) in &xs {
                for &(y, gy) in &ys {
                    if holds(x, y) {
                        cases.push(gf_and(vec![GF::from(gx), GF::from(gy)]));
                    }
                }
            }
            return Ok(gf_or(cases));
        }
        // prefix[k]: a takes one of its k smallest values
        xs.sort();
        let mut prefix = vec![GLit::Const(false)];
        for &(_, g) in &xs {
            let last = *prefix.last().unwrap();
            let p = self.lit_of(gf_or(vec![GF::from(last), GF::from(g)]));
            prefix.push(p);
        }
        let mut cases = Vec::new();
        for &(y, gy) in &ys {
            let k = xs.partition_point(|&(x, _)| holds(x, y));
            cases.push(gf_and(vec![GF::from(gy), GF::from(prefix[k])]));
        }
        Ok(gf_or(cases))
    }

    /// DIMACS CNF with `c sentence <id>` before each unit's clauses.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        let write_clause = |out: &mut String, c: &[Lit]| {
            for l in c {
                let _ = write!(out, "{} ", l.to_dimacs());
            }
            out.push_str("0\n");
        };
        out.push_str("c background\n");
        for (i, c) in self.clauses.iter().enumerate() {
            if self.is_background_clause(i) {
                write_clause(&mut out, c);
            }
        }
        for u in &self.units {
            let _ = writeln!(out, "c sentence {}", u.id);
            for &i in &u.clauses {
                write_clause(&mut out, &self.clauses[i]);
            }
        }
        out
    }
}

fn int(v: &DomainElement) -> Result<i64, GroundError> {
    v.as_int()
        .ok_or_else(|| GroundError::Eval(EvalError::Type(format!("{v} is not an integer"))))
}

/// Every choice of one value per argument, with the conjoined condition.
fn combinations(reps: &[Rep]) -> Vec<(Vec<DomainElement>, GF)> {
    let mut out = vec![(Vec::with_capacity(reps.len()), GF::Const(true))];
    for r in reps {
        let mut next = Vec::with_capacity(out.len() * r.len());
        for (tuple, cond) in &out {
            for (v, g) in r {
                let mut t = tuple.clone();
                t.push(v.clone());
                next.push((t, gf_and(vec![cond.clone(), GF::from(*g)])));
            }
        }
        out = next;
    }
    out
}
