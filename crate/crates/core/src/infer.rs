//! Model expansion, model checking, optimisation and exact propagation.

use std::sync::Arc;
use std::time::Instant;

use kbconf_sat::{Lit, SatOutcome, Solver, SolverConfig};
use thiserror::Error;

use crate::element::{DomainElement, TruthValue};
use crate::eval::{eval_sentence, EvalError};
use crate::ground::{ground, GLit, GroundError, GroundProblem};
use crate::structure::{DomainTerm, Fact, PartialStructure, StructureError};
use crate::syntax::{Term, Theory};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum InferError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("inconsistent state")]
    Inconsistent,
    #[error("structure not total")]
    NotTotal,
    #[error("objective is not an integer term")]
    NotInteger,
    #[error("{0} conflicts with base data")]
    BaseConflict(String),
    #[error("timeout")]
    Timeout,
}

/// `Propagate(T, S)` together with what it added to `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropagationResult {
    pub structure: PartialStructure,
    /// Value atoms unknown in the input and decided in the result.
    pub new_entries: Vec<Fact>,
}

/// A solver loaded with a ground problem, answering queries about
/// structures that extend the problem's base structure.
pub struct Engine {
    problem: Arc<GroundProblem>,
    solver: Solver,
    synced: usize,
    deadline: Option<Instant>,
}

impl Engine {
    pub fn new(problem: Arc<GroundProblem>, seed: u64) -> Engine {
        let config = SolverConfig {
            seed,
            ..SolverConfig::default()
        };
        let mut e = Engine {
            problem,
            solver: Solver::with_config(config),
            synced: 0,
            deadline: None,
        };
        e.sync();
        e
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
        self.solver.set_deadline(deadline);
    }

    pub fn problem(&self) -> &GroundProblem {
        &self.problem
    }

    fn sync(&mut self) {
        self.solver.ensure_vars(self.problem.num_vars());
        let clauses = self.problem.clauses();
        for c in &clauses[self.synced..] {
            self.solver.add_clause(c);
        }
        self.synced = clauses.len();
    }

    fn problem_mut(&mut self) -> &mut GroundProblem {
        Arc::make_mut(&mut self.problem)
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SatOutcome, InferError> {
        self.solver.solve(assumptions).map_err(|_| InferError::Timeout)
    }

    /// Literals stating what `s` knows about the parameters. Interpreted
    /// terms must agree with the base structure.
    pub fn assumptions(&self, s: &PartialStructure) -> Result<Vec<Lit>, InferError> {
        let base = self.problem.structure();
        if !s.same_domains(base) {
            return Err(InferError::Structure(StructureError::IncomparableStructures));
        }
        let voc = base.vocabulary();
        for (sym, _) in voc.symbols() {
            for row in 0..base.rows(sym) {
                if !base.row_is_open(sym, row) && base.row(sym, row) != s.row(sym, row) {
                    let t = DomainTerm::new(sym, base.row_args(sym, row));
                    return Err(InferError::BaseConflict(base.display_term(&t)));
                }
            }
        }
        let mut out = Vec::new();
        for p in self.problem.parameters() {
            let row = s.row(p.term.symbol, p.row);
            if p.is_predicate() {
                if let Some(b) = row[0].as_bool() {
                    out.push(if b { p.lits[0] } else { !p.lits[0] });
                }
                continue;
            }
            if let Some(i) = row.iter().position(|&t| t == TruthValue::True) {
                out.push(p.lits[i]);
                continue;
            }
            for (i, &t) in row.iter().enumerate() {
                if t == TruthValue::False {
                    out.push(!p.lits[i]);
                }
            }
        }
        Ok(out)
    }

    /// Some total model of the theory extending `s`, if there is one.
    pub fn model_expand(&mut self, s: &PartialStructure) -> Result<Option<PartialStructure>, InferError> {
        let a = self.assumptions(s)?;
        match self.solve(&a)? {
            SatOutcome::Sat(m) => Ok(Some(self.problem.decode_model(&m)?)),
            SatOutcome::Unsat(_) => Ok(None),
        }
    }

    pub fn is_consistent(&mut self, s: &PartialStructure) -> Result<bool, InferError> {
        let a = self.assumptions(s)?;
        Ok(self.solve(&a)?.is_sat())
    }

    /// A model extending `s` with the least value of `objective`, and that
    /// value.
    pub fn minimize(
        &mut self,
        s: &PartialStructure,
        objective: &Term,
        num_vars: usize,
    ) -> Result<Option<(PartialStructure, i64)>, InferError> {
        let rep = self.problem_mut().observe(objective, num_vars)?;
        let mut values: Vec<(i64, GLit)> = Vec::with_capacity(rep.len());
        for (v, g) in rep {
            values.push((v.as_int().ok_or(InferError::NotInteger)?, g));
        }
        values.sort();
        self.sync();
        let mut assumptions = self.assumptions(s)?;
        let value_of = |m: &[bool]| -> Option<i64> {
            values.iter().find_map(|&(v, g)| match g {
                GLit::Const(true) => Some(v),
                GLit::Lit(l) if m[l.var().index()] != l.is_negated() => Some(v),
                _ => None,
            })
        };
        let mut best = match self.solve(&assumptions)? {
            SatOutcome::Unsat(_) => return Ok(None),
            SatOutcome::Sat(m) => {
                let v = value_of(&m).ok_or_else(|| GroundError::Internal("objective has no value".into()))?;
                (m, v)
            }
        };
        loop {
            let better: Vec<Lit> = values
                .iter()
                .filter(|(v, _)| *v < best.1)
                .filter_map(|(_, g)| match g {
                    GLit::Lit(l) => Some(*l),
                    _ => None,
                })
                .collect();
            if better.is_empty() {
                break;
            }
            // guard -> objective below the incumbent
            let guard = self.problem_mut().new_var().positive();
            let mut clause = better;
            clause.push(!guard);
            self.problem_mut().add_definition(clause);
            self.sync();
            assumptions.push(guard);
            match self.solve(&assumptions)? {
                SatOutcome::Unsat(_) => break,
                SatOutcome::Sat(m) => {
                    let v = value_of(&m).ok_or_else(|| GroundError::Internal("objective has no value".into()))?;
                    best = (m, v);
                }
            }
            assumptions.pop();
        }
        Ok(Some((self.problem.decode_model(&best.0)?, best.1)))
    }

    /// The most precise structure below every model extending `s`.
    pub fn propagate(&mut self, s: &PartialStructure) -> Result<PropagationResult, InferError> {
        let assumptions = self.assumptions(s)?;
        let model = match self.solve(&assumptions)? {
            SatOutcome::Unsat(_) => return Err(InferError::Inconsistent),
            SatOutcome::Sat(m) => m,
        };
        let value = |m: &[bool], l: Lit| m[l.var().index()] != l.is_negated();
        // (parameter, value index, literal, value in every model so far)
        let mut candidates: Vec<(usize, usize, Lit, bool)> = Vec::new();
        for (pi, p) in self.problem.parameters().iter().enumerate() {
            let row = s.row(p.term.symbol, p.row);
            for (i, &l) in p.atoms().iter().enumerate() {
                if row[i] == TruthValue::Unknown {
                    candidates.push((pi, i, l, value(&model, l)));
                }
            }
        }
        // ask for a model flipping at least one remaining candidate until
        // none exists
        while !candidates.is_empty() {
            let act = self.problem_mut().new_var().positive();
            let mut clause: Vec<Lit> = candidates.iter().map(|&(_, _, l, b)| if b { !l } else { l }).collect();
            clause.push(!act);
            self.problem_mut().add_definition(clause);
            self.sync();
            for &(_, _, l, b) in &candidates {
                self.solver.set_polarity(l.var(), l.is_negated() == b);
            }
            let mut probe = assumptions.clone();
            probe.push(act);
            let outcome = self.solve(&probe)?;
            self.problem_mut().add_definition(vec![!act]);
            self.sync();
            match outcome {
                SatOutcome::Unsat(_) => break,
                SatOutcome::Sat(m) => candidates.retain(|&(_, _, l, b)| value(&m, l) == b),
            }
        }
        let mut out = s.clone();
        let mut new_entries = Vec::new();
        for &(pi, i, _, b) in &candidates {
            let p = &self.problem.parameters()[pi];
            let value = if p.is_predicate() {
                DomainElement::Bool(true)
            } else {
                p.values[i].clone()
            };
            new_entries.push(Fact::new(p.term.clone(), value, b));
        }
        // trues first, so a row's false entries never exhaust it
        new_entries.sort_by_key(|f| !f.truth);
        for f in &new_entries {
            if out.value_truth(&f.term, &f.value)? == TruthValue::Unknown {
                out.set_value(&f.term, &f.value, TruthValue::from_bool(f.truth))?;
            }
        }
        new_entries.sort();
        Ok(PropagationResult {
            structure: out,
            new_entries,
        })
    }
}

/// `S ⊨ T` for a total structure.
pub fn modelcheck(theory: &Theory, s: &PartialStructure) -> Result<bool, InferError> {
    if !s.is_total() {
        return Err(InferError::NotTotal);
    }
    for sentence in &theory.sentences {
        if eval_sentence(s, sentence)? != TruthValue::True {
            return Ok(false);
        }
    }
    Ok(true)
}

fn engine(theory: &Theory, s: &PartialStructure, seed: u64) -> Result<Engine, InferError> {
    Ok(Engine::new(Arc::new(ground(theory, s)?), seed))
}

/// A total model of `theory` extending `s`, or `None`.
pub fn model_expand(theory: &Theory, s: &PartialStructure, seed: u64) -> Result<Option<PartialStructure>, InferError> {
    engine(theory, s, seed)?.model_expand(s)
}

pub fn propagate(theory: &Theory, s: &PartialStructure) -> Result<PropagationResult, InferError> {
    engine(theory, s, 0)?.propagate(s)
}

/// A model minimising `objective`; `num_vars` is the number of variable
/// slots the objective term uses (0 for a ground term).
pub fn minimize(
    theory: &Theory,
    s: &PartialStructure,
    objective: &Term,
    num_vars: usize,
    seed: u64,
) -> Result<Option<(PartialStructure, i64)>, InferError> {
    engine(theory, s, seed)?.minimize(s, objective, num_vars)
}
