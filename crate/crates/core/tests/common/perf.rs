//! A scripted interactive session on a large synthetic instance.

use std::time::{Duration, Instant};

use kbconf::configure::Configurator;
use kbconf::{Assignment, KnowledgeBase};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::synthetic;

#[derive(Debug)]
pub struct Session {
    pub parameters: usize,
    /// Ground sentence instances.
    pub constraints: usize,
    pub clauses: usize,
    pub steps: Vec<Duration>,
}

impl Session {
    pub fn median(&self) -> Duration {
        let mut s = self.steps.clone();
        s.sort();
        s[s.len() / 2]
    }

    pub fn max(&self) -> Duration {
        self.steps.iter().copied().max().unwrap_or_default()
    }
}

/// Twenty steps of: choose a value, propagate, list open terms, fetch the
/// values of the next term to ask about.
pub fn run(components: usize, seed: u64) -> Session {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = synthetic(&mut rng, components);
    let kb = KnowledgeBase::from_problem(kbconf::lang::load(&src).unwrap()).unwrap();
    let c = Configurator::new(&kb).with_seed(seed);
    let mut choices: Vec<Assignment> = Vec::new();
    let open: Vec<_> = kb.parameters().into_iter().collect();
    let mut next = open.choose(&mut rng).unwrap().clone();
    let mut values = c.get_consistent_values(kb.base(), &next).unwrap();
    let mut steps = Vec::new();
    for _ in 0..20 {
        let start = Instant::now();
        choices.push(Assignment::new(next.clone(), values.choose(&mut rng).unwrap().clone()));
        let s = kb.apply_choices(&choices).unwrap();
        let propagated = c.propagate(&s).unwrap();
        let open: Vec<_> = c.get_open_terms(&propagated.structure).unwrap().into_iter().collect();
        next = open.choose(&mut rng).expect("open terms remain").clone();
        values = c.get_consistent_values(&propagated.structure, &next).unwrap();
        steps.push(start.elapsed());
    }
    Session {
        parameters: kb.parameters().len(),
        constraints: kb.problem().units().iter().filter(|u| u.sentence.is_some()).count(),
        clauses: kb.problem().clauses().len(),
        steps,
    }
}
