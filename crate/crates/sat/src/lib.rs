//! A small conflict-driven clause-learning SAT solver.
//!
//! The solver is built for many short incremental calls: clauses can be added
//! between calls, each call takes a list of assumption literals, and an
//! unsatisfiable call reports the subset of assumptions it needed.

mod heap;
mod lit;
mod solver;

pub use lit::{Lit, Var};
pub use solver::{Interrupted, SatOutcome, Solver, SolverConfig, Stats};

/// Checks a valuation against a clause list.
pub fn satisfies(clauses: &[Vec<Lit>], model: &[bool]) -> bool {
    clauses
        .iter()
        .all(|c| c.iter().any(|l| model[l.var().index()] == l.is_positive()))
}
