//! Knowledge-base configuration: partial structures over a typed vocabulary,
//! a first-order theory language, grounding to CNF and the inference tasks
//! an interactive configurator needs.

pub mod configure;
pub mod element;
pub mod lang;
pub mod eval;
pub mod ground;
pub mod infer;
pub mod structure;
pub mod syntax;
mod util;
pub mod vocabulary;

pub use configure::{Backtrack, ConfigError, ConsequenceSet, Configurator, Explanation, KnowledgeBase};
pub use element::{DomainElement, TruthValue};
pub use infer::{modelcheck, Engine, InferError, PropagationResult};
pub use eval::{eval_formula, eval_sentence, eval_term, query, Env, EvalError};
pub use structure::{Assignment, Domain, DomainTerm, Fact, ParameterSet, PartialStructure, StructureError};
pub use syntax::{pretty_formula, Formula, Sentence, SetExpr, Term, Theory};
pub use vocabulary::{SymbolId, TypeId, Vocabulary, VocabularyError, INT};
