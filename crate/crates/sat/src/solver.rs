use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::heap::VarHeap;
use crate::lit::{Lit, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum LBool {
    True,
    False,
    Undef,
}

impl LBool {
    #[inline]
    fn of(b: bool) -> LBool {
        if b {
            LBool::True
        } else {
            LBool::False
        }
    }
}

type CRef = u32;

#[derive(Clone, Debug)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Clone, Copy, Debug)]
struct Watcher {
    cref: CRef,
    blocker: Lit,
}

/// Result of a call to [`Solver::solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    /// Satisfiable; the valuation is total over all variables, indexed by
    /// [`Var::index`].
    Sat(Vec<bool>),
    /// Unsatisfiable under the assumptions. The core is a subset of the
    /// assumptions that is already unsatisfiable together with the clauses.
    /// An empty core means the clause database itself is unsatisfiable.
    Unsat(Vec<Lit>),
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat(_))
    }

    pub fn model(&self) -> Option<&[bool]> {
        match self {
            SatOutcome::Sat(m) => Some(m),
            SatOutcome::Unsat(_) => None,
        }
    }

    pub fn core(&self) -> Option<&[Lit]> {
        match self {
            SatOutcome::Sat(_) => None,
            SatOutcome::Unsat(c) => Some(c),
        }
    }
}

/// Returned when a solve was stopped through the interrupt flag or deadline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interrupted;

impl std::fmt::Display for Interrupted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("solver interrupted")
    }
}

impl std::error::Error for Interrupted {}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub seed: u64,
    pub restart_base: u64,
    pub var_decay: f64,
    pub clause_decay: f64,
    /// Re-check every unsat core with a fresh solver.
    pub verify_cores: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            restart_base: 100,
            var_decay: 0.95,
            clause_decay: 0.999,
            verify_cores: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
}

/// Conflict-driven clause-learning solver.
///
/// Two watched literals, VSIDS with phase saving, Luby restarts and learnt
/// clause reduction. Assumptions are decided first, one per decision level,
/// and a failed assumption is analysed back to the subset of assumptions it
/// depends on.
#[derive(Clone)]
pub struct Solver {
    config: SolverConfig,
    clauses: Vec<Clause>,
    learnts: Vec<CRef>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    polarity: Vec<bool>,
    activity: Vec<f64>,
    seen: Vec<bool>,
    heap: VarHeap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    var_inc: f64,
    clause_inc: f64,
    max_learnts: f64,
    ok: bool,
    original: Vec<Vec<Lit>>,
    interrupt: Option<Arc<AtomicBool>>,
    deadline: Option<Instant>,
    rng: ChaCha8Rng,
    stats: Stats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

impl Solver {
    pub fn new() -> Solver {
        Solver::with_config(SolverConfig::default())
    }

    pub fn with_seed(seed: u64) -> Solver {
        Solver::with_config(SolverConfig {
            seed,
            ..SolverConfig::default()
        })
    }

    pub fn with_config(config: SolverConfig) -> Solver {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Solver {
            config,
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            polarity: Vec::new(),
            activity: Vec::new(),
            seen: Vec::new(),
            heap: VarHeap::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            var_inc: 1.0,
            clause_inc: 1.0,
            max_learnts: 0.0,
            ok: true,
            original: Vec::new(),
            interrupt: None,
            deadline: None,
            rng,
            stats: Stats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    /// False once the clause database is known to be unsatisfiable.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn set_interrupt(&mut self, flag: Arc<AtomicBool>) {
        self.interrupt = Some(flag);
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.assigns.len() as u32;
        self.assigns.push(LBool::Undef);
        self.level.push(0);
        self.reason.push(None);
        self.polarity.push(false);
        // small seeded jitter decides the initial branching order
        let jitter = self.rng.gen::<f64>() * 1e-6;
        self.activity.push(jitter);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.insert(v, &self.activity);
        Var(v)
    }

    /// The value the next decision on `v` tries first.
    pub fn set_polarity(&mut self, v: Var, value: bool) {
        self.polarity[v.index()] = value;
    }

    /// Makes sure variables `0..n` exist.
    pub fn ensure_vars(&mut self, n: usize) {
        while self.num_vars() < n {
            self.new_var();
        }
    }

    #[inline]
    fn value(&self, lit: Lit) -> LBool {
        lit_value(&self.assigns, lit)
    }

    #[inline]
    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause permanently. Returns false when the database became
    /// unsatisfiable (an empty clause, or a conflict among unit clauses).
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if let Some(max) = lits.iter().map(|l| l.var().index()).max() {
            self.ensure_vars(max + 1);
        }
        if self.config.verify_cores {
            self.original.push(lits.to_vec());
        }
        if !self.ok {
            return false;
        }
        self.cancel_until(0);

        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        for w in c.windows(2) {
            if w[0] == !w[1] {
                return true;
            }
        }
        if c.iter().any(|&l| self.value(l) == LBool::True) {
            return true;
        }
        c.retain(|&l| self.value(l) != LBool::False);

        match c.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(c, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> CRef {
        let cref = self.clauses.len() as CRef;
        let (a, b) = (lits[0], lits[1]);
        self.watches[(!a).code()].push(Watcher { cref, blocker: b });
        self.watches[(!b).code()].push(Watcher { cref, blocker: a });
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    #[inline]
    fn enqueue(&mut self, lit: Lit, reason: Option<CRef>) {
        let v = lit.var().index();
        debug_assert_eq!(self.assigns[v], LBool::Undef);
        self.assigns[v] = LBool::of(lit.is_positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var().index();
            self.assigns[v] = LBool::Undef;
            self.reason[v] = None;
            self.polarity[v] = lit.is_positive();
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    /// Unit propagation. Returns the conflicting clause if any.
    fn propagate(&mut self) -> Option<CRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if lit_value(&self.assigns, w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let clause = &mut self.clauses[w.cref as usize];
                if clause.deleted {
                    continue;
                }
                let lits = &mut clause.lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let nw = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if first != w.blocker && lit_value(&self.assigns, first) == LBool::True {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    if lit_value(&self.assigns, lits[k]) != LBool::False {
                        lits.swap(1, k);
                        self.watches[(!lits[1]).code()].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if lit_value(&self.assigns, first) == LBool::False {
                    conflict = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, cref: CRef) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.clause_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: CRef) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit::from_dimacs(1)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();

        loop {
            self.bump_clause(confl);
            let lits = self.clauses[confl as usize].lits.clone();
            let start = if p.is_some() { 1 } else { 0 };
            for &q in &lits[start..] {
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            self.seen[lit.var().index()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var().index()].expect("implied literal has a reason");
            // keep the implied literal at position 0 of its reason
            let c = &mut self.clauses[confl as usize].lits;
            if c[0] != lit {
                let pos = c.iter().position(|&x| x == lit).unwrap();
                c.swap(0, pos);
            }
        }
        learnt[0] = !p.unwrap();

        // local minimisation: drop literals implied by the rest
        let mut keep = vec![learnt[0]];
        for &l in &learnt[1..] {
            let v = l.var().index();
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.clauses[r as usize].lits.iter().all(|&x| {
                    let xv = x.var().index();
                    xv == v || self.seen[xv] || self.level[xv] == 0
                }),
            };
            if !redundant {
                keep.push(l);
            }
        }
        for &l in &learnt {
            self.seen[l.var().index()] = false;
        }
        let mut learnt = keep;

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()]
        };
        (learnt, bt)
    }

    /// Collects the assumptions responsible for `failed` (an assumption that
    /// is currently false).
    fn analyze_final(&mut self, failed: Lit) -> Vec<Lit> {
        let mut core = vec![failed];
        let v = failed.var().index();
        if self.level[v] == 0 {
            return core;
        }
        self.seen[v] = true;
        let start = self.trail_lim[0];
        for i in (start..self.trail.len()).rev() {
            let x = self.trail[i];
            let xv = x.var().index();
            if !self.seen[xv] {
                continue;
            }
            match self.reason[xv] {
                None => {
                    // decisions below the assumption prefix are assumptions
                    if x != failed {
                        core.push(x);
                    }
                }
                Some(r) => {
                    for &q in &self.clauses[r as usize].lits[1..] {
                        if self.level[q.var().index()] > 0 {
                            self.seen[q.var().index()] = true;
                        }
                    }
                }
            }
            self.seen[xv] = false;
        }
        self.seen[v] = false;
        core
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize] == LBool::Undef {
                return Some(Var(v).lit(self.polarity[v as usize]));
            }
        }
        None
    }

    fn locked(&self, cref: CRef) -> bool {
        let first = self.clauses[cref as usize].lits[0];
        let v = first.var().index();
        self.value(first) == LBool::True && self.reason[v] == Some(cref)
    }

    fn reduce_db(&mut self) {
        let mut ls = std::mem::take(&mut self.learnts);
        ls.retain(|&c| !self.clauses[c as usize].deleted);
        ls.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            ca.activity
                .partial_cmp(&cb.activity)
                .unwrap()
                .then(a.cmp(&b))
        });
        let half = ls.len() / 2;
        let mut kept = Vec::with_capacity(ls.len());
        for (i, &c) in ls.iter().enumerate() {
            let small = self.clauses[c as usize].lits.len() <= 2;
            if i < half && !small && !self.locked(c) {
                let cl = &mut self.clauses[c as usize];
                cl.deleted = true;
                cl.lits = Vec::new();
            } else {
                kept.push(c);
            }
        }
        self.learnts = kept;
        let clauses = &self.clauses;
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.cref as usize].deleted);
        }
    }

    fn should_stop(&self) -> bool {
        if let Some(flag) = &self.interrupt {
            if flag.load(Ordering::Relaxed) {
                return true;
            }
        }
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                return true;
            }
        }
        false
    }

    /// Solves under the given assumptions.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SatOutcome, Interrupted> {
        self.stats.solves += 1;
        if self.should_stop() {
            return Err(Interrupted);
        }
        if let Some(max) = assumptions.iter().map(|l| l.var().index()).max() {
            self.ensure_vars(max + 1);
        }
        let outcome = self.solve_inner(assumptions);
        self.cancel_until(0);
        let outcome = outcome?;
        match &outcome {
            SatOutcome::Sat(model) => {
                debug_assert!(self
                    .original
                    .iter()
                    .all(|c| c.iter().any(|l| model[l.var().index()] == l.is_positive())));
            }
            SatOutcome::Unsat(core) => {
                if self.config.verify_cores {
                    self.verify_core(core);
                }
            }
        }
        Ok(outcome)
    }

    fn verify_core(&self, core: &[Lit]) {
        let mut check = Solver::with_config(SolverConfig {
            verify_cores: false,
            ..self.config.clone()
        });
        check.ensure_vars(self.num_vars());
        for c in &self.original {
            check.add_clause(c);
        }
        let again = check.solve(core).expect("verification solve is never interrupted");
        assert!(!again.is_sat(), "unsat core {core:?} does not re-verify");
    }

    fn solve_inner(&mut self, assumptions: &[Lit]) -> Result<SatOutcome, Interrupted> {
        if !self.ok {
            return Ok(SatOutcome::Unsat(Vec::new()));
        }
        self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        let mut restart = 0u32;
        loop {
            let budget = luby(2.0, restart) * self.config.restart_base as f64;
            if let Some(outcome) = self.search(budget as u64, assumptions)? {
                return Ok(outcome);
            }
            restart += 1;
            self.stats.restarts += 1;
        }
    }

    fn search(
        &mut self,
        budget: u64,
        assumptions: &[Lit],
    ) -> Result<Option<SatOutcome>, Interrupted> {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Ok(Some(SatOutcome::Unsat(Vec::new())));
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref);
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= self.config.var_decay;
                self.clause_inc /= self.config.clause_decay;
                if conflicts.is_multiple_of(64) && self.should_stop() {
                    return Err(Interrupted);
                }
            } else {
                if conflicts >= budget {
                    self.cancel_until(0);
                    if self.should_stop() {
                        return Err(Interrupted);
                    }
                    return Ok(None);
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }

                let mut next = None;
                while (self.decision_level() as usize) < assumptions.len() {
                    let a = assumptions[self.decision_level() as usize];
                    match self.value(a) {
                        LBool::True => self.new_decision_level(),
                        LBool::False => {
                            let core = self.analyze_final(a);
                            return Ok(Some(SatOutcome::Unsat(core)));
                        }
                        LBool::Undef => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(a) => a,
                    None => match self.pick_branch() {
                        Some(l) => {
                            self.stats.decisions += 1;
                            l
                        }
                        None => {
                            let model = self.assigns.iter().map(|&a| a == LBool::True).collect();
                            return Ok(Some(SatOutcome::Sat(model)));
                        }
                    },
                };
                self.new_decision_level();
                self.enqueue(next, None);
            }
        }
    }
}

#[inline]
fn lit_value(assigns: &[LBool], lit: Lit) -> LBool {
    match assigns[lit.var().index()] {
        LBool::Undef => LBool::Undef,
        LBool::True => LBool::of(lit.is_positive()),
        LBool::False => LBool::of(lit.is_negated()),
    }
}

/// Luby restart sequence (1, 1, 2, 1, 1, 2, 4, ...) scaled by powers of `y`.
fn luby(y: f64, mut x: u32) -> f64 {
    let mut size = 1u32;
    let mut seq = 0i32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(v: &[i32]) -> Vec<Lit> {
        v.iter().map(|&d| Lit::from_dimacs(d)).collect()
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<f64> = (0..15).map(|i| luby(2.0, i)).collect();
        assert_eq!(
            seq,
            vec![1., 1., 2., 1., 1., 2., 4., 1., 1., 2., 1., 1., 2., 4., 8.]
        );
    }

    #[test]
    fn core_of_failed_assumptions() {
        let mut s = Solver::new();
        s.add_clause(&lits(&[1, 2]));
        let out = s.solve(&lits(&[-1, -2])).unwrap();
        let core = out.core().unwrap().to_vec();
        assert!(!core.is_empty());
        assert!(core.iter().all(|l| lits(&[-1, -2]).contains(l)));
    }

    #[test]
    fn irrelevant_assumption_left_out_of_core() {
        let mut s = Solver::new();
        s.add_clause(&lits(&[1, 2]));
        s.add_clause(&lits(&[-1, -2]));
        s.add_clause(&lits(&[-3, 1]));
        s.add_clause(&lits(&[-4, 2]));
        let out = s.solve(&lits(&[5, 3, 4])).unwrap();
        let mut core = out.core().unwrap().to_vec();
        core.sort();
        assert_eq!(core, lits(&[3, 4]));
    }

    #[test]
    fn contradictory_assumptions() {
        let mut s = Solver::new();
        s.ensure_vars(1);
        let out = s.solve(&lits(&[1, -1])).unwrap();
        let mut core = out.core().unwrap().to_vec();
        core.sort();
        assert_eq!(core, lits(&[1, -1]));
    }

    #[test]
    fn empty_clause_is_permanent() {
        let mut s = Solver::new();
        assert!(!s.add_clause(&[]));
        assert!(!s.is_ok());
        assert_eq!(s.solve(&[]).unwrap(), SatOutcome::Unsat(vec![]));
    }

    #[test]
    fn unit_then_solve() {
        let mut s = Solver::new();
        s.add_clause(&lits(&[1, 2, 3]));
        s.add_clause(&lits(&[2]));
        for _ in 0..3 {
            let m = s.solve(&[]).unwrap();
            assert!(m.model().unwrap()[1]);
        }
        // re-adding is a no-op
        s.add_clause(&lits(&[2]));
        assert!(s.solve(&lits(&[-1, -3])).unwrap().is_sat());
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 4 pigeons, 3 holes
        let var = |p: i32, h: i32| p * 3 + h + 1;
        let mut s = Solver::new();
        for p in 0..4 {
            s.add_clause(&lits(&[var(p, 0), var(p, 1), var(p, 2)]));
        }
        for h in 0..3 {
            for p in 0..4 {
                for q in p + 1..4 {
                    s.add_clause(&lits(&[-var(p, h), -var(q, h)]));
                }
            }
        }
        assert_eq!(s.solve(&[]).unwrap(), SatOutcome::Unsat(vec![]));
    }

    #[test]
    fn interrupt_flag_stops_search() {
        let flag = Arc::new(AtomicBool::new(true));
        let var = |p: i32, h: i32| p * 8 + h + 1;
        let mut s = Solver::new();
        for p in 0..9 {
            s.add_clause(&(0..8).map(|h| Lit::from_dimacs(var(p, h))).collect::<Vec<_>>());
        }
        for h in 0..8 {
            for p in 0..9 {
                for q in p + 1..9 {
                    s.add_clause(&lits(&[-var(p, h), -var(q, h)]));
                }
            }
        }
        s.set_interrupt(flag);
        assert_eq!(s.solve(&[]), Err(Interrupted));
    }
}
