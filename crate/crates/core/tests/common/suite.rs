//! Random instances checked operation by operation against brute force.

use std::collections::BTreeSet;

use kbconf::configure::{ConfigError, Configurator};
use kbconf::{infer, lang, Assignment, DomainElement, DomainTerm, InferError, KnowledgeBase, PartialStructure, TruthValue};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

#[derive(Debug, Default)]
pub struct Report {
    pub instances: usize,
    pub consistent: usize,
    pub inconsistent: usize,
    pub propagations: usize,
    pub expansions: usize,
    pub minimizations: usize,
    pub value_sets: usize,
    pub consequences: usize,
    pub explanations: usize,
    pub minimum_explanations: usize,
    pub substructures: usize,
    pub backtracks: usize,
    pub enumerations: usize,
}

fn values_of(kb: &KnowledgeBase, t: &DomainTerm) -> Vec<DomainElement> {
    if kb.vocabulary().symbol(t.symbol).is_predicate() {
        vec![DomainElement::Bool(false), DomainElement::Bool(true)]
    } else {
        kb.base().result_values(t.symbol)
    }
}

fn agrees(m: &PartialStructure, a: &Assignment) -> bool {
    m.value_truth(&a.term, &a.value).unwrap() == TruthValue::True
}

macro_rules! ensure {
    ($cond:expr, $src:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!("{}\n--- instance ---\n{}", format!($($msg)+), $src));
        }
    };
}

/// Runs `n` random instances; returns the first disagreement.
pub fn run(n: usize, seed: u64) -> Result<Report, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Report::default();
    for i in 0..n {
        let inst = random_instance(&mut rng);
        let k = rng.gen_range(0..=3);
        let extra = random_choices(&mut rng, &inst.kb, k);
        check_instance(&inst, &extra, i as u64, &mut rng, &mut r)?;
        r.instances += 1;
    }
    Ok(r)
}

fn check_instance(inst: &RandomInstance, choices: &[Assignment], seed: u64, rng: &mut ChaCha8Rng, r: &mut Report) -> Result<(), String> {
    let kb = &inst.kb;
    let src = format!("{}choices: {:?}", inst.source, choices.iter().map(|a| a.display(kb.vocabulary())).collect::<Vec<_>>());
    let src = src.as_str();
    let c = Configurator::new(kb).with_seed(seed);
    let s = kb.apply_choices(choices).unwrap();
    let ms = models(kb.theory(), &s);

    // model expansion
    let expanded = c.autocomplete(&s, None).map_err(|e| format!("{e}\n{src}"))?;
    match &expanded {
        None => ensure!(ms.is_empty(), src, "expansion found no model, brute force has {}", ms.len()),
        Some(m) => {
            ensure!(!ms.is_empty(), src, "expansion found a model of an unsatisfiable instance");
            ensure!(m.is_total() && s.precision_leq(m).unwrap(), src, "expansion does not extend the state");
            ensure!(infer::modelcheck(kb.theory(), m).unwrap(), src, "expansion fails modelcheck");
        }
    }
    r.expansions += 1;

    // propagation and open terms
    if ms.is_empty() {
        r.inconsistent += 1;
        ensure!(
            c.propagate(&s).err() == Some(ConfigError::Infer(InferError::Inconsistent)),
            src,
            "propagate accepted an inconsistent state"
        );
        check_explanations(kb, &c, &s, choices, src, r)?;
        return Ok(());
    }
    r.consistent += 1;
    let meet = intersection(&s, &ms);
    let p = c.propagate(&s).map_err(|e| format!("{e}\n{src}"))?;
    ensure!(p.structure == meet, src, "propagate differs from the model intersection");
    r.propagations += 1;
    let open = c.get_open_terms(&s).unwrap();
    let expected: BTreeSet<DomainTerm> = kb.parameters().into_iter().filter(|t| meet.is_open(t).unwrap()).collect();
    ensure!(open == expected, src, "open terms differ");

    // consistent values and consistency checks
    for t in &open {
        let got: BTreeSet<DomainElement> = c.get_consistent_values(&s, t).unwrap().into_iter().collect();
        let want = projection(&ms, t);
        ensure!(got == want, src, "values of {} differ: {:?} vs {:?}", show(kb, t), got, want);
        for v in values_of(kb, t) {
            let ok = c.check_consistency(&s, t, &v).unwrap();
            ensure!(ok == want.contains(&v), src, "check_consistency({}={v}) = {ok}", show(kb, t));
        }
        r.value_sets += 1;
    }

    // optimisation
    type Eval<'a> = Box<dyn Fn(&PartialStructure) -> i64 + 'a>;
    let (objective, eval): (&str, Eval) = if kb.parameters().contains(&term(kb, "C")) {
        ("C", Box::new(|m: &PartialStructure| m.term_value(&term(kb, "C")).unwrap().unwrap().as_int().unwrap()))
    } else {
        (
            "sum{(x[a], W(x)) | P(x)}",
            Box::new(|m: &PartialStructure| {
                m.domain(kb.vocabulary().type_id("a").unwrap())
                    .elements()
                    .iter()
                    .filter(|e| m.term_value(&DomainTerm::new(kb.vocabulary().symbol_id("P").unwrap(), vec![(*e).clone()])).unwrap() == Some(DomainElement::Bool(true)))
                    .map(|e| m.term_value(&DomainTerm::new(kb.vocabulary().symbol_id("W").unwrap(), vec![e.clone()])).unwrap().unwrap().as_int().unwrap())
                    .sum()
            }),
        )
    };
    let obj = lang::parse_objective(objective, kb.base()).unwrap();
    let (best, value) = c.minimize(&s, &obj.term, obj.num_vars).unwrap().expect("satisfiable");
    let brute = ms.iter().map(&eval).min().unwrap();
    ensure!(value == brute, src, "minimum of {objective}: {value} vs {brute}");
    ensure!(ms.contains(&best) && eval(&best) == brute, src, "minimizer is not an optimal model");
    r.minimizations += 1;

    // consequences of one consistent hypothesis
    if let Some(t) = open.iter().collect::<Vec<_>>().choose(rng) {
        let v = projection(&ms, t).into_iter().collect::<Vec<_>>().choose(rng).unwrap().clone();
        let a = Assignment::new((*t).clone(), v.clone());
        let cons = c.consequences(&s, t, &v).unwrap();
        let hyp = s.extend(&a).unwrap();
        let hm: Vec<PartialStructure> = ms.iter().filter(|m| agrees(m, &a)).cloned().collect();
        let hmeet = intersection(&hyp, &hm);
        for q in kb.parameters() {
            if &q == *t {
                continue;
            }
            for w in values_of(kb, &q) {
                if s.value_truth(&q, &w).unwrap() != TruthValue::Unknown {
                    continue;
                }
                let x = Assignment::new(q.clone(), w.clone());
                let truth = hmeet.value_truth(&q, &w).unwrap();
                ensure!(cons.positive.contains(&x) == (truth == TruthValue::True), src, "C+ membership of {}", x.display(kb.vocabulary()));
                ensure!(cons.negative.contains(&x) == (truth == TruthValue::False), src, "C- membership of {}", x.display(kb.vocabulary()));
            }
        }
        r.consequences += 1;
    }

    check_backtrack(kb, &c, rng, src, r)
}

fn check_explanations(
    kb: &KnowledgeBase,
    c: &Configurator,
    s: &PartialStructure,
    choices: &[Assignment],
    src: &str,
    r: &mut Report,
) -> Result<(), String> {
    let oracle = ExplanationOracle::new(kb);
    let e = c.minimal_unsat_theory(s, &[]).map_err(|e| format!("{e}\n{src}"))?;
    oracle.verify(&e).map_err(|m| format!("minimal explanation: {m}\n{src}"))?;
    let e = c.explain_choices(choices, &[]).map_err(|e| format!("{e}\n{src}"))?;
    oracle.verify(&e).map_err(|m| format!("choice explanation: {m}\n{src}"))?;
    r.explanations += 2;

    let universe = oracle.universe(s);
    if universe.len() <= 20 {
        let e = c.minimum_unsat_theory(s, &[]).map_err(|e| format!("{e}\n{src}"))?;
        oracle.verify(&e).map_err(|m| format!("minimum explanation: {m}\n{src}"))?;
        let want = oracle.minimum(&universe, &[]);
        ensure!(want == Some(e.len()), src, "minimum explanation has {} elements, brute force {:?}", e.len(), want);
        r.minimum_explanations += 1;
    }
    if universe.len() <= 14 {
        let found = c.minimal_unsat_theories(s, &[], usize::MAX).map_err(|e| format!("{e}\n{src}"))?;
        let got: BTreeSet<u64> = found.iter().map(|e| ExplanationOracle::mask(&universe, e)).collect();
        ensure!(got.len() == found.len(), src, "explanation enumerated twice");
        ensure!(got == oracle.all_minimal(&universe, &[]), src, "enumeration differs from the brute-force set");
        if let Some(first) = found.first() {
            let capped = c.minimal_unsat_theories(s, &[], 1).map_err(|e| format!("{e}\n{src}"))?;
            ensure!(capped.len() == 1 && capped[0] == *first, src, "limit not honoured");
        }
        r.enumerations += 1;
    }

    let all: Vec<String> = kb.theory().sentences.iter().map(|x| x.id.clone()).collect();
    let theory_sat = !models(kb.theory(), &frame(kb)).is_empty();
    match c.unsat_substructure(s) {
        Ok((sub, e)) => {
            ensure!(sub.precision_leq(s).unwrap(), src, "substructure is not below the state");
            ensure!(models(kb.theory(), &sub).is_empty(), src, "substructure has a model");
            if theory_sat {
                oracle.verify(&e).map_err(|m| format!("substructure: {m}\n{src}"))?;
                ensure!(e.background == all, src, "substructure background");
            } else {
                ensure!(e.data.is_empty(), src, "unsatisfiable theory needs no data");
            }
            r.substructures += 1;
        }
        Err(e) => return Err(format!("unsat_substructure: {e}\n{src}")),
    }
    if theory_sat {
        let e = c.minimal_unsat_theory(s, &all).map_err(|e| format!("{e}\n{src}"))?;
        ensure!(e.sentences.is_empty(), src, "background sentences in the explanation");
        oracle.verify(&e).map_err(|m| format!("background explanation: {m}\n{src}"))?;
        r.explanations += 1;
    } else {
        ensure!(
            c.minimal_unsat_theory(s, &all).err() == Some(ConfigError::BackgroundInconsistent),
            src,
            "inconsistent background accepted"
        );
    }
    Ok(())
}

/// Builds up to ten consistent choices, then asks to backtrack for a
/// value they rule out.
fn check_backtrack(kb: &KnowledgeBase, c: &Configurator, rng: &mut ChaCha8Rng, src: &str, r: &mut Report) -> Result<(), String> {
    let all = models(kb.theory(), kb.base());
    if all.is_empty() {
        return Ok(());
    }
    let params: Vec<DomainTerm> = kb.parameters().into_iter().collect();
    // choices taken from one model, so they are jointly consistent
    let witness = all.choose(rng).unwrap();
    let mut choices: Vec<Assignment> = params
        .iter()
        .map(|t| Assignment::new(t.clone(), witness.term_value(t).unwrap().unwrap()))
        .collect();
    choices.shuffle(rng);
    choices.truncate(rng.gen_range(1..=10.min(params.len())));
    let s = kb.apply_choices(&choices).unwrap();
    let mut targets = Vec::new();
    for t in &params {
        for v in values_of(kb, t) {
            let a = Assignment::new(t.clone(), v.clone());
            if !c.check_consistency(&s, t, &v).unwrap() {
                targets.push(a);
            }
        }
    }
    let Some(target) = targets.choose(rng) else { return Ok(()) };
    let got = c.backtrack_suggest(&choices, &target.term, &target.value);
    if !all.iter().any(|m| agrees(m, target)) {
        ensure!(got.err() == Some(ConfigError::BaseDataConflict), src, "backtrack to an impossible value");
        return Ok(());
    }
    let got = got.map_err(|e| format!("{e}\n{src}"))?;
    let feasible = |retract: u64| {
        all.iter().any(|m| {
            agrees(m, target) && choices.iter().enumerate().all(|(i, a)| retract & (1 << i) != 0 || agrees(m, a))
        })
    };
    let mut best = None;
    for k in 0..=choices.len() {
        if for_each_subset(choices.len(), k, &mut |set| feasible(set)) {
            best = Some(k);
            break;
        }
    }
    let mask = got
        .retract
        .iter()
        .map(|a| choices.iter().position(|c| c == a).unwrap())
        .fold(0u64, |m, i| m | (1 << i));
    ensure!(feasible(mask), src, "retracting {:?} does not free the value", got.retract);
    ensure!(Some(got.retract.len()) == best, src, "retract set of {} choices, minimum {:?}", got.retract.len(), best);
    let rest: Vec<Assignment> = choices.iter().filter(|a| !got.retract.contains(a)).cloned().collect();
    let s2 = kb.apply_choices(&rest).unwrap();
    ensure!(c.check_consistency(&s2, &target.term, &target.value).unwrap(), src, "value still inconsistent");
    for conflict in &got.conflicts {
        let cs = kb.apply_choices(conflict).unwrap().extend(target).ok();
        ensure!(
            cs.is_none_or(|x| models(kb.theory(), &x).is_empty()),
            src,
            "conflict set is consistent with the value"
        );
    }
    r.backtracks += 1;
    Ok(())
}
