//! Interactive configuration on top of a fixed knowledge base: open terms,
//! consistent values, consequences, explanations and backtracking.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use kbconf_sat::{Lit, SatOutcome, Solver, SolverConfig, Var};
use thiserror::Error;

use crate::element::{DomainElement, TruthValue};
use crate::ground::{ground, ClauseSource, GroundError, GroundProblem, UnitKind};
use crate::infer::{Engine, InferError, PropagationResult};
use crate::lang::TypedProblem;
use crate::structure::{Assignment, DomainTerm, Fact, ParameterSet, PartialStructure, StructureError};
use crate::syntax::{Term, Theory};
use crate::vocabulary::Vocabulary;

/// Most candidates the exhaustive minimum-core search accepts.
pub const MINIMUM_CORE_LIMIT: usize = 24;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("state is consistent")]
    StateConsistent,
    #[error("background inconsistent")]
    BackgroundInconsistent,
    #[error("instance too large for minimum core ({0} candidates)")]
    TooLarge(usize),
    #[error("term not open: {0}")]
    NotOpen(String),
    #[error("value conflicts with base data")]
    BaseDataConflict,
    #[error("data entries are not retractable: {0}")]
    NotRetractable(String),
    #[error("term not user-chosen: {0}")]
    NotChosen(String),
    #[error("unknown background sentence `{0}`")]
    UnknownBackground(String),
}

impl From<GroundError> for ConfigError {
    fn from(e: GroundError) -> Self {
        ConfigError::Infer(InferError::Ground(e))
    }
}

/// `(Σ, T, S0)` with the grounding of `T` over `S0`.
#[derive(Clone, Debug)]
pub struct KnowledgeBase {
    theory: Theory,
    base: PartialStructure,
    problem: Arc<GroundProblem>,
}

impl KnowledgeBase {
    pub fn new(theory: Theory, base: PartialStructure) -> Result<KnowledgeBase, ConfigError> {
        let problem = Arc::new(ground(&theory, &base)?);
        Ok(KnowledgeBase { theory, base, problem })
    }

    pub fn from_problem(p: TypedProblem) -> Result<KnowledgeBase, ConfigError> {
        KnowledgeBase::new(p.theory, p.structure)
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        self.base.vocabulary()
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn base(&self) -> &PartialStructure {
        &self.base
    }

    pub fn problem(&self) -> &Arc<GroundProblem> {
        &self.problem
    }

    /// `L_S0`: the terms the base structure leaves open.
    pub fn parameters(&self) -> ParameterSet {
        self.base.open_terms_universe()
    }

    /// The base structure extended by `choices` in order.
    pub fn apply_choices(&self, choices: &[Assignment]) -> Result<PartialStructure, ConfigError> {
        let mut s = self.base.clone();
        for c in choices {
            s = s.extend(c)?;
        }
        Ok(s)
    }
}

/// `C+` and `C−` of a hypothetical choice.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConsequenceSet {
    /// `(q, c)` with `q = c` forced.
    pub positive: Vec<Assignment>,
    /// `(q, c)` with `q = c` ruled out.
    pub negative: Vec<Assignment>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FactOrigin {
    /// Partial information in the base structure.
    Base,
    /// Information the current state adds to the base.
    State,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplainedFact {
    pub fact: Fact,
    pub origin: FactOrigin,
}

/// An unsatisfiable selection of sentences and facts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Explanation {
    /// Unit ids: a sentence label, or `label[args]` for one instance of a
    /// universally quantified sentence.
    pub sentences: Vec<String>,
    pub data: Vec<ExplainedFact>,
    /// The background the explanation assumes.
    pub background: Vec<String>,
}

impl Explanation {
    pub fn len(&self) -> usize {
        self.sentences.len() + self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// What to undo so that a blocked value becomes available.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Backtrack {
    pub retract: Vec<Assignment>,
    /// The conflict sets among the choices found on the way.
    pub conflicts: Vec<Vec<Assignment>>,
}

#[derive(Clone, Debug)]
enum Candidate {
    Unit(usize),
    Fact(Fact, FactOrigin),
}

/// Runs configuration tasks against one knowledge base.
#[derive(Clone, Debug)]
pub struct Configurator<'a> {
    kb: &'a KnowledgeBase,
    seed: u64,
    deadline: Option<Instant>,
}

impl<'a> Configurator<'a> {
    pub fn new(kb: &'a KnowledgeBase) -> Configurator<'a> {
        Configurator {
            kb,
            seed: 0,
            deadline: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn kb(&self) -> &KnowledgeBase {
        self.kb
    }

    pub fn engine(&self) -> Engine {
        let mut e = Engine::new(self.kb.problem.clone(), self.seed);
        e.set_deadline(self.deadline);
        e
    }

    fn solver(&self) -> Solver {
        let mut s = Solver::with_config(SolverConfig {
            seed: self.seed,
            ..SolverConfig::default()
        });
        s.set_deadline(self.deadline);
        s
    }

    pub fn propagate(&self, s: &PartialStructure) -> Result<PropagationResult, ConfigError> {
        Ok(self.engine().propagate(s)?)
    }

    pub fn get_open_terms(&self, s: &PartialStructure) -> Result<ParameterSet, ConfigError> {
        let r = self.propagate(s)?;
        Ok(self
            .kb
            .parameters()
            .into_iter()
            .filter(|t| r.structure.is_open(t).unwrap_or(false))
            .collect())
    }

    /// Values of `term` in some model extending `s`, in domain order.
    pub fn get_consistent_values(&self, s: &PartialStructure, term: &DomainTerm) -> Result<Vec<DomainElement>, ConfigError> {
        let problem = &self.kb.problem;
        let p = problem
            .parameter(term)
            .filter(|_| s.is_open(term).unwrap_or(false))
            .ok_or_else(|| ConfigError::NotOpen(display(self.kb, term)))?;
        let mut engine = self.engine();
        let assumptions = engine.assumptions(s)?;
        let holds = |m: &[bool], l: Lit| m[l.var().index()] != l.is_negated();
        let mut realized = vec![false; p.values.len()];
        let note = |m: &[bool], realized: &mut Vec<bool>| {
            for (i, &l) in p.lits.iter().enumerate() {
                if holds(m, l) {
                    realized[i] = true;
                }
            }
        };
        match engine.solve(&assumptions)? {
            SatOutcome::Unsat(_) => return Err(InferError::Inconsistent.into()),
            SatOutcome::Sat(m) => note(&m, &mut realized),
        }
        let mut probe = assumptions.clone();
        for i in 0..p.values.len() {
            if realized[i] || s.value_truth(term, &p.values[i])? == TruthValue::False {
                continue;
            }
            probe.push(p.lits[i]);
            if let SatOutcome::Sat(m) = engine.solve(&probe)? {
                note(&m, &mut realized);
            }
            probe.pop();
        }
        Ok(p.values.iter().zip(&realized).filter(|(_, &r)| r).map(|(v, _)| v.clone()).collect())
    }

    /// Entries decided by `Propagate(T, S ∪ {term = value})` that are
    /// unknown in `s`, over parameters other than `term`.
    pub fn consequences(&self, s: &PartialStructure, term: &DomainTerm, value: &DomainElement) -> Result<ConsequenceSet, ConfigError> {
        let hyp = s
            .extend(&Assignment::new(term.clone(), value.clone()))
            .map_err(|_| ConfigError::Infer(InferError::Inconsistent))?;
        let r = self.propagate(&hyp)?;
        let mut out = ConsequenceSet::default();
        for f in r.new_entries {
            if &f.term == term || s.value_truth(&f.term, &f.value)? != TruthValue::Unknown {
                continue;
            }
            if let DomainElement::Bool(_) = f.value {
                // a predicate atom being b is the value b holding and !b not
                out.positive.push(Assignment::new(f.term.clone(), f.truth));
                out.negative.push(Assignment::new(f.term, !f.truth));
            } else if f.truth {
                out.positive.push(Assignment::new(f.term, f.value));
            } else {
                out.negative.push(Assignment::new(f.term, f.value));
            }
        }
        Ok(out)
    }

    /// Whether some model extends `s ∪ {term = value}`.
    pub fn check_consistency(&self, s: &PartialStructure, term: &DomainTerm, value: &DomainElement) -> Result<bool, ConfigError> {
        let hyp = match s.extend(&Assignment::new(term.clone(), value.clone())) {
            Ok(h) => h,
            Err(StructureError::ConflictingAssignment(_)) => return Ok(false),
            Err(e) => return Err(e.into()),
        };
        Ok(self.engine().is_consistent(&hyp)?)
    }

    /// A model extending `s`, the cheapest one if an objective is given.
    pub fn autocomplete(&self, s: &PartialStructure, objective: Option<(&Term, usize)>) -> Result<Option<PartialStructure>, ConfigError> {
        let mut e = self.engine();
        Ok(match objective {
            None => e.model_expand(s)?,
            Some((t, n)) => e.minimize(s, t, n)?.map(|(m, _)| m),
        })
    }

    pub fn minimize(&self, s: &PartialStructure, objective: &Term, num_vars: usize) -> Result<Option<(PartialStructure, i64)>, ConfigError> {
        Ok(self.engine().minimize(s, objective, num_vars)?)
    }

    /// Facts `s` adds to the base: one per decided predicate atom, per true
    /// function value, or per false value of a row without a true one.
    fn state_facts(&self, s: &PartialStructure) -> Result<Vec<Fact>, ConfigError> {
        if !s.same_domains(&self.kb.base) {
            return Err(StructureError::IncomparableStructures.into());
        }
        let mut out = Vec::new();
        for f in s.known_entries() {
            let base = self.kb.base.value_truth(&f.term, &f.value)?;
            if base == TruthValue::from_bool(f.truth) {
                continue;
            }
            if base.is_known() || self.kb.problem.parameter(&f.term).is_none() {
                return Err(InferError::BaseConflict(display(self.kb, &f.term)).into());
            }
            out.push(f);
        }
        Ok(out)
    }

    fn is_background(&self, unit: usize, background: &[String]) -> bool {
        let u = &self.kb.problem.units()[unit];
        background.iter().any(|b| *b == u.id || u.sentence.as_deref() == Some(b.as_str()))
    }

    fn check_background(&self, background: &[String]) -> Result<(), ConfigError> {
        let units = self.kb.problem.units();
        for b in background {
            let known = units.iter().any(|u| *b == u.id || u.sentence.as_deref() == Some(b.as_str()))
                || self.kb.theory.sentence(b).is_some();
            if !known {
                return Err(ConfigError::UnknownBackground(b.clone()));
            }
        }
        Ok(())
    }

    /// Explanation candidates in tie-breaking order: sentence units by id,
    /// base data units, then state facts.
    fn candidates(
        &self,
        s: &PartialStructure,
        background: &[String],
        facts_only: bool,
        order: &[Assignment],
    ) -> Result<Vec<Candidate>, ConfigError> {
        let units = self.kb.problem.units();
        let mut sentence_units: Vec<usize> = (0..units.len())
            .filter(|&u| units[u].kind == UnitKind::Sentence && !facts_only && !self.is_background(u, background))
            .collect();
        sentence_units.sort_by(|&a, &b| units[a].id.cmp(&units[b].id));
        let mut out: Vec<Candidate> = sentence_units.into_iter().map(Candidate::Unit).collect();
        out.extend(
            (0..units.len())
                .filter(|&u| units[u].kind == UnitKind::Data && !self.is_background(u, background))
                .map(Candidate::Unit),
        );
        let mut facts = self.state_facts(s)?;
        facts.sort_by_key(|f| order.iter().position(|c| c.term == f.term).unwrap_or(order.len()));
        out.extend(facts.into_iter().map(|f| Candidate::Fact(f, FactOrigin::State)));
        Ok(out)
    }

    /// A solver over the ground problem where each candidate is switched on
    /// by one assumption literal.
    fn selector_solver(&self, candidates: &[Candidate]) -> Result<(Solver, Vec<Lit>), ConfigError> {
        let problem = &self.kb.problem;
        let mut solver = self.solver();
        solver.ensure_vars(problem.num_vars());
        let mut selector_of_unit = vec![None; problem.units().len()];
        let mut selectors = Vec::with_capacity(candidates.len());
        for c in candidates {
            selectors.push(match c {
                Candidate::Unit(u) => {
                    let l = solver.new_var().positive();
                    selector_of_unit[*u] = Some(l);
                    l
                }
                Candidate::Fact(f, _) => problem.encode_fact(f)?,
            });
        }
        for (i, c) in problem.clauses().iter().enumerate() {
            match problem.provenance(i) {
                ClauseSource::Unit(u) => match selector_of_unit[u] {
                    Some(sel) => {
                        let mut guarded = c.clone();
                        guarded.push(!sel);
                        solver.add_clause(&guarded);
                    }
                    None => {
                        solver.add_clause(c);
                    }
                },
                _ => {
                    solver.add_clause(c);
                }
            }
        }
        Ok((solver, selectors))
    }

    fn solve(&self, solver: &mut Solver, assumptions: &[Lit]) -> Result<SatOutcome, ConfigError> {
        solver.solve(assumptions).map_err(|_| ConfigError::Infer(InferError::Timeout))
    }

    /// Deletion-based shrinking of an unsatisfiable candidate selection,
    /// seeded by the solver's core. Returns candidate indices.
    fn shrink(&self, solver: &mut Solver, selectors: &[Lit], fixed: &[Lit], start: Vec<usize>) -> Result<Vec<usize>, ConfigError> {
        let assume = |set: &[usize]| -> Vec<Lit> { fixed.iter().copied().chain(set.iter().map(|&i| selectors[i])).collect() };
        let restrict = |set: &[usize], core: &[Lit]| -> Vec<usize> {
            let core: BTreeSet<Lit> = core.iter().copied().collect();
            set.iter().copied().filter(|&i| core.contains(&selectors[i])).collect()
        };
        let mut set = match self.solve(solver, &assume(&start))? {
            SatOutcome::Sat(_) => return Err(ConfigError::StateConsistent),
            SatOutcome::Unsat(core) => restrict(&start, &core),
        };
        let order = set.clone();
        for c in order {
            if !set.contains(&c) {
                continue;
            }
            let trial: Vec<usize> = set.iter().copied().filter(|&i| i != c).collect();
            if let SatOutcome::Unsat(core) = self.solve(solver, &assume(&trial))? {
                set = restrict(&trial, &core);
            }
        }
        Ok(set)
    }

    fn explanation(&self, candidates: &[Candidate], chosen: &[usize], background: &[String]) -> Explanation {
        let units = self.kb.problem.units();
        let mut e = Explanation {
            background: background.to_vec(),
            ..Explanation::default()
        };
        for &i in chosen {
            match &candidates[i] {
                Candidate::Unit(u) => {
                    let unit = &units[*u];
                    match (&unit.kind, &unit.fact) {
                        (UnitKind::Data, Some(f)) => e.data.push(ExplainedFact {
                            fact: f.clone(),
                            origin: FactOrigin::Base,
                        }),
                        _ => e.sentences.push(unit.id.clone()),
                    }
                }
                Candidate::Fact(f, origin) => e.data.push(ExplainedFact {
                    fact: f.clone(),
                    origin: *origin,
                }),
            }
        }
        e
    }

    fn prepare(
        &self,
        s: &PartialStructure,
        background: &[String],
        facts_only: bool,
        order: &[Assignment],
    ) -> Result<(Vec<Candidate>, Solver, Vec<Lit>), ConfigError> {
        self.check_background(background)?;
        let candidates = self.candidates(s, background, facts_only, order)?;
        let (mut solver, selectors) = self.selector_solver(&candidates)?;
        if let SatOutcome::Unsat(_) = self.solve(&mut solver, &[])? {
            return Err(ConfigError::BackgroundInconsistent);
        }
        Ok((candidates, solver, selectors))
    }

    /// One subset-minimal unsatisfiable selection of sentence instances and
    /// facts, on top of `background`.
    pub fn minimal_unsat_theory(&self, s: &PartialStructure, background: &[String]) -> Result<Explanation, ConfigError> {
        self.minimal_unsat_ordered(s, background, &[])
    }

    /// [`Self::minimal_unsat_theory`] for the state `choices` build, with
    /// ties among facts broken by choice order.
    pub fn explain_choices(&self, choices: &[Assignment], background: &[String]) -> Result<Explanation, ConfigError> {
        self.minimal_unsat_ordered(&self.kb.apply_choices(choices)?, background, choices)
    }

    pub fn explain_choices_minimum(&self, choices: &[Assignment], background: &[String]) -> Result<Explanation, ConfigError> {
        self.minimum_unsat_ordered(&self.kb.apply_choices(choices)?, background, choices)
    }

    fn minimal_unsat_ordered(&self, s: &PartialStructure, background: &[String], order: &[Assignment]) -> Result<Explanation, ConfigError> {
        let (candidates, mut solver, selectors) = self.prepare(s, background, false, order)?;
        let all: Vec<usize> = (0..candidates.len()).collect();
        let chosen = self.shrink(&mut solver, &selectors, &[], all)?;
        Ok(self.explanation(&candidates, &chosen, background))
    }

    /// Up to `limit` distinct subset-minimal explanations. Explored
    /// selections are blocked in a second solver over the candidates, so
    /// the enumeration is complete when fewer than `limit` come back.
    pub fn minimal_unsat_theories(&self, s: &PartialStructure, background: &[String], limit: usize) -> Result<Vec<Explanation>, ConfigError> {
        let (candidates, mut solver, selectors) = self.prepare(s, background, false, &[])?;
        let n = candidates.len();
        let all: Vec<usize> = (0..n).collect();
        let sel = |set: &[usize]| -> Vec<Lit> { set.iter().map(|&i| selectors[i]).collect() };
        if self.solve(&mut solver, &sel(&all))?.is_sat() {
            return Err(ConfigError::StateConsistent);
        }
        let mut map = Solver::with_seed(self.seed);
        map.ensure_vars(n);
        let pick = |i: usize| Var::from_index(i).positive();
        let mut out = Vec::new();
        while out.len() < limit {
            for i in 0..n {
                map.set_polarity(Var::from_index(i), true);
            }
            let seed: Vec<usize> = match map.solve(&[]).map_err(|_| ConfigError::Infer(InferError::Timeout))? {
                SatOutcome::Unsat(_) => break,
                SatOutcome::Sat(m) => all.iter().copied().filter(|&i| m[i]).collect(),
            };
            if self.solve(&mut solver, &sel(&seed))?.is_sat() {
                // grow to a maximal satisfiable selection, then demand
                // something outside it
                let mut grown = seed;
                for i in 0..n {
                    if grown.contains(&i) {
                        continue;
                    }
                    grown.push(i);
                    if !self.solve(&mut solver, &sel(&grown))?.is_sat() {
                        grown.pop();
                    }
                }
                let block: Vec<Lit> = all.iter().copied().filter(|i| !grown.contains(i)).map(pick).collect();
                map.add_clause(&block);
            } else {
                let mut mus = self.shrink(&mut solver, &selectors, &[], seed)?;
                mus.sort_unstable();
                let block: Vec<Lit> = mus.iter().map(|&i| !pick(i)).collect();
                map.add_clause(&block);
                out.push(self.explanation(&candidates, &mus, background));
            }
        }
        Ok(out)
    }

    /// An unsatisfiable selection of least cardinality, by exhaustive search
    /// over subsets of increasing size.
    pub fn minimum_unsat_theory(&self, s: &PartialStructure, background: &[String]) -> Result<Explanation, ConfigError> {
        self.minimum_unsat_ordered(s, background, &[])
    }

    fn minimum_unsat_ordered(&self, s: &PartialStructure, background: &[String], order: &[Assignment]) -> Result<Explanation, ConfigError> {
        let (candidates, mut solver, selectors) = self.prepare(s, background, false, order)?;
        if candidates.len() > MINIMUM_CORE_LIMIT {
            return Err(ConfigError::TooLarge(candidates.len()));
        }
        let all: Vec<usize> = (0..candidates.len()).collect();
        let upper = self.shrink(&mut solver, &selectors, &[], all)?;
        for k in 0..upper.len() {
            for subset in Combinations::new(candidates.len(), k) {
                let a: Vec<Lit> = subset.iter().map(|&i| selectors[i]).collect();
                if !self.solve(&mut solver, &a)?.is_sat() {
                    return Ok(self.explanation(&candidates, &subset, background));
                }
            }
        }
        Ok(self.explanation(&candidates, &upper, background))
    }

    /// A minimal set of entries of `s` with no model extension, returned as
    /// a structure over the base's interpreted data.
    pub fn unsat_substructure(&self, s: &PartialStructure) -> Result<(PartialStructure, Explanation), ConfigError> {
        let background: Vec<String> = self.kb.theory.sentences.iter().map(|x| x.id.clone()).collect();
        let mut out = self.kb.base.clone();
        for p in self.kb.problem.parameters() {
            out = out.erase(&p.term)?;
        }
        let explanation = match self.prepare(s, &background, true, &[]) {
            Err(ConfigError::BackgroundInconsistent) => Explanation {
                background,
                ..Explanation::default()
            },
            Err(e) => return Err(e),
            Ok((candidates, mut solver, selectors)) => {
                let all: Vec<usize> = (0..candidates.len()).collect();
                let chosen = self.shrink(&mut solver, &selectors, &[], all)?;
                self.explanation(&candidates, &chosen, &background)
            }
        };
        for f in &explanation.data {
            out.set_value(&f.fact.term, &f.fact.value, TruthValue::from_bool(f.fact.truth))?;
        }
        Ok((out, explanation))
    }

    /// A smallest set of choices whose retraction makes `term = value`
    /// consistent. Ties go to the set that is first in choice order.
    pub fn backtrack_suggest(&self, choices: &[Assignment], term: &DomainTerm, value: &DomainElement) -> Result<Backtrack, ConfigError> {
        let problem = &self.kb.problem;
        let target = Fact::new(term.clone(), value.clone(), true);
        let hyp = match problem.encode_fact(&target) {
            Ok(l) => l,
            Err(_) => {
                return match self.kb.base.value_truth(term, value) {
                    Ok(TruthValue::True) => Ok(Backtrack {
                        retract: Vec::new(),
                        conflicts: Vec::new(),
                    }),
                    _ => Err(ConfigError::BaseDataConflict),
                };
            }
        };
        let mut lits: Vec<Option<Lit>> = Vec::with_capacity(choices.len());
        for c in choices {
            lits.push(match problem.encode_assignment(c) {
                Ok(l) => Some(l),
                Err(_) => match self.kb.base.value_truth(&c.term, &c.value)? {
                    TruthValue::True => None,
                    _ => return Err(InferError::BaseConflict(display(self.kb, &c.term)).into()),
                },
            });
        }
        let mut solver = self.solver();
        solver.ensure_vars(problem.num_vars());
        for c in problem.clauses() {
            solver.add_clause(c);
        }
        if !self.solve(&mut solver, &[hyp])?.is_sat() {
            return Err(ConfigError::BaseDataConflict);
        }
        // choices with a literal, as indices into `choices`
        let movable: Vec<usize> = (0..choices.len()).filter(|&i| lits[i].is_some()).collect();
        let sel: Vec<Lit> = (0..choices.len()).map(|i| lits[i].unwrap_or(hyp)).collect();
        let mut conflicts: Vec<Vec<usize>> = Vec::new();
        loop {
            let hitting = min_hitting_set(&conflicts);
            let keep: Vec<usize> = movable.iter().copied().filter(|i| !hitting.contains(i)).collect();
            let assume: Vec<Lit> = std::iter::once(hyp).chain(keep.iter().map(|&i| sel[i])).collect();
            match self.solve(&mut solver, &assume)? {
                SatOutcome::Sat(_) => {
                    return Ok(Backtrack {
                        retract: hitting.iter().map(|&i| choices[i].clone()).collect(),
                        conflicts: conflicts
                            .iter()
                            .map(|c| c.iter().map(|&i| choices[i].clone()).collect())
                            .collect(),
                    })
                }
                SatOutcome::Unsat(_) => {
                    let conflict = self.shrink(&mut solver, &sel, &[hyp], keep)?;
                    if conflict.is_empty() {
                        return Err(ConfigError::BaseDataConflict);
                    }
                    conflicts.push(conflict);
                }
            }
        }
    }

    /// Removes the choice for `term` and rebuilds the state from the base.
    pub fn retract(&self, choices: &[Assignment], term: &DomainTerm) -> Result<(PartialStructure, Vec<Assignment>), ConfigError> {
        if !choices.iter().any(|c| &c.term == term) {
            return Err(if self.kb.problem.parameter(term).is_none() {
                ConfigError::NotRetractable(display(self.kb, term))
            } else {
                ConfigError::NotChosen(display(self.kb, term))
            });
        }
        let rest: Vec<Assignment> = choices.iter().filter(|c| &c.term != term).cloned().collect();
        Ok((self.kb.apply_choices(&rest)?, rest))
    }
}

fn display(kb: &KnowledgeBase, t: &DomainTerm) -> String {
    kb.base.display_term(t)
}

/// Lexicographically first minimum hitting set, as sorted indices.
fn min_hitting_set(sets: &[Vec<usize>]) -> Vec<usize> {
    let universe: Vec<usize> = sets.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    for k in 0..=universe.len() {
        for pick in Combinations::new(universe.len(), k) {
            let chosen: Vec<usize> = pick.iter().map(|&i| universe[i]).collect();
            if sets.iter().all(|s| s.iter().any(|x| chosen.contains(x))) {
                return chosen;
            }
        }
    }
    universe
}

/// k-subsets of `0..n` in lexicographic order.
struct Combinations {
    n: usize,
    next: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Combinations {
        Combinations {
            n,
            next: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let k = cur.len();
        let mut succ = cur.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if succ[i] < self.n - k + i {
                succ[i] += 1;
                for j in i + 1..k {
                    succ[j] = succ[j - 1] + 1;
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(cur)
    }
}
