mod common;

use std::collections::BTreeSet;

use common::*;
use kbconf::ground::{ground, ClauseSource, GroundError, UnitKind};
use kbconf::{lang, DomainElement, Engine, KnowledgeBase, PartialStructure};
use kbconf_sat::{Lit, SatOutcome, Solver};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lit(kb: &KnowledgeBase, t: &str) -> Lit {
    kb.problem().parameter(&term(kb, t)).unwrap().lits[0]
}

fn unit_clauses(kb: &KnowledgeBase, id: &str) -> Vec<BTreeSet<Lit>> {
    let g = kb.problem();
    let u = g.units().iter().find(|u| u.id == id).unwrap_or_else(|| panic!("no unit {id}"));
    u.clauses.iter().map(|&c| g.clauses()[c].iter().copied().collect()).collect()
}

#[test]
fn software_clauses() {
    let kb = software();
    let (win, linux, office, db) = (
        lit(&kb, "Install(Windows)"),
        lit(&kb, "Install(Linux)"),
        lit(&kb, "Install(Office)"),
        lit(&kb, "Install(DualBoot)"),
    );
    assert_eq!(unit_clauses(&kb, "needos"), vec![BTreeSet::from([win, linux])]);
    assert_eq!(unit_clauses(&kb, "dual"), vec![BTreeSet::from([!win, !linux, db])]);
    assert_eq!(unit_clauses(&kb, "prereq[Office,Windows]"), vec![BTreeSet::from([!office, win])]);
    let ids: Vec<&str> = kb.problem().units().iter().map(|u| u.id.as_str()).collect();
    assert_eq!(ids, ["prereq[LaTeX,Linux]", "prereq[Office,Windows]", "costdef", "budget", "needos", "dual"]);
}

#[test]
fn requester_is_exactly_one() {
    let kb = software();
    let g = kb.problem();
    let p = g.parameter(&term(&kb, "Requester")).unwrap();
    let (a, b) = (p.lits[0], p.lits[1]);
    let functional: Vec<BTreeSet<Lit>> = (0..g.clauses().len())
        .filter(|&i| g.provenance(i) == ClauseSource::Functional)
        .map(|i| g.clauses()[i].iter().copied().collect())
        .filter(|c: &BTreeSet<Lit>| c.iter().all(|l| l.var() == a.var() || l.var() == b.var()))
        .collect();
    assert_eq!(functional, vec![BTreeSet::from([a, b]), BTreeSet::from([!a, !b])]);
}

#[test]
fn golden_size_and_determinism() {
    let kb = software();
    let g = kb.problem();
    assert_eq!((g.num_vars(), g.clauses().len()), (694, 1464));
    let again = ground(kb.theory(), kb.base()).unwrap();
    assert_eq!(again.clauses(), g.clauses());
    let dimacs = g.to_dimacs();
    assert_eq!(dimacs, again.to_dimacs());
    assert!(dimacs.starts_with("p cnf 694 1464\n"));
    assert!(dimacs.contains("c sentence needos\n"));
    assert_eq!(kb.problem().parameters().len(), 7);
}

#[test]
fn decode_and_encode() {
    let kb = software();
    let s = state(
        &kb,
        &[
            "Requester=Secretary",
            "Install(Windows)=true",
            "Install(Office)=true",
            "Install(Linux)=false",
            "Install(LaTeX)=false",
            "Install(DualBoot)=false",
            "Cost=90",
        ],
    );
    assert!(s.is_total());
    assert!(satisfies(kb.theory(), &s));
    let e = Engine::new(kb.problem().clone(), 0);
    let assumptions = e.assumptions(&s).unwrap();
    let mut solver = Solver::new();
    solver.ensure_vars(kb.problem().num_vars());
    for c in kb.problem().clauses() {
        solver.add_clause(c);
    }
    let model = match solver.solve(&assumptions).unwrap() {
        SatOutcome::Sat(m) => m,
        SatOutcome::Unsat(_) => panic!("the cost 90 structure is a model"),
    };
    assert_eq!(kb.problem().decode_model(&model).unwrap(), s);

    let p = kb.problem().parameter(&term(&kb, "Requester")).unwrap();
    let mut broken = model.clone();
    broken[p.lits[0].var().index()] = true;
    broken[p.lits[1].var().index()] = true;
    assert!(kb.problem().decode_model(&broken).is_err());

    let printer = common::kb(PRINTER);
    let s2 = state(&printer, &["PrinterConnection(P2,USB)=true", "PrinterConnection(P1,LAN)=false", "NeedsSwitch=false"]);
    assert!(s2.is_total());
    let e = Engine::new(printer.problem().clone(), 0);
    let mut solver = Solver::new();
    solver.ensure_vars(printer.problem().num_vars());
    for c in printer.problem().clauses() {
        solver.add_clause(c);
    }
    let m = solver.solve(&e.assumptions(&s2).unwrap()).unwrap();
    assert_eq!(printer.problem().decode_model(m.model().unwrap()).unwrap(), s2);
}

/// Every model of the ground problem, projected on the parameters.
fn sat_models(kb: &KnowledgeBase) -> BTreeSet<Vec<DomainElement>> {
    let g = kb.problem();
    let mut solver = Solver::new();
    solver.ensure_vars(g.num_vars());
    for c in g.clauses() {
        solver.add_clause(c);
    }
    let vars: Vec<Lit> = g.parameters().iter().flat_map(|p| p.atoms().iter().copied()).collect();
    let mut out = BTreeSet::new();
    while let SatOutcome::Sat(m) = solver.solve(&[]).unwrap() {
        let decoded = g.decode_model(&m).unwrap();
        assert!(out.insert(signature(kb, &decoded)), "model repeated");
        let block: Vec<Lit> = vars.iter().map(|&l| if m[l.var().index()] != l.is_negated() { !l } else { l }).collect();
        if block.is_empty() || !solver.add_clause(&block) {
            break;
        }
    }
    out
}

fn signature(kb: &KnowledgeBase, m: &PartialStructure) -> Vec<DomainElement> {
    kb.parameters().iter().map(|t| m.term_value(t).unwrap().unwrap()).collect()
}

#[test]
fn models_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..150 {
        let inst = random_instance(&mut rng);
        let kb = &inst.kb;
        let brute: BTreeSet<Vec<DomainElement>> = models(kb.theory(), kb.base()).iter().map(|m| signature(kb, m)).collect();
        assert_eq!(sat_models(kb), brute, "{}", inst.source);
    }
}

#[test]
fn each_unit_encodes_its_instance() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..60 {
        let inst = random_instance(&mut rng);
        let kb = &inst.kb;
        let g = kb.problem();
        let instances = Instances::new(kb.theory(), kb.base());
        let e = Engine::new(g.clone(), 0);
        let totals = completions(&frame(kb));
        for (ui, unit) in g.units().iter().enumerate() {
            if unit.kind != UnitKind::Sentence {
                continue;
            }
            let mut solver = Solver::new();
            solver.ensure_vars(g.num_vars());
            for (i, c) in g.clauses().iter().enumerate() {
                match g.provenance(i) {
                    ClauseSource::Unit(u) if u != ui => {}
                    _ => {
                        solver.add_clause(c);
                    }
                }
            }
            for m in totals.iter().step_by(totals.len() / 48 + 1) {
                let sat = solver.solve(&e.assumptions(m).unwrap()).unwrap().is_sat();
                assert_eq!(sat, instances.holds(kb.theory(), &unit.id, m), "{} in\n{}", unit.id, inst.source);
            }
        }
    }
}

#[test]
fn folded_instances_need_no_clauses() {
    let kb = common::kb(
        "vocabulary { type t; P(t). Q(t). } theory { r: !x: P(x) => Q(x). } structure { t = {a; b} P = {a} }",
    );
    let ids: Vec<&str> = kb.problem().units().iter().map(|u| u.id.as_str()).collect();
    assert_eq!(ids, ["r[a]"]);
    assert_eq!(kb.parameters().len(), 2);
}

#[test]
fn products_are_rejected() {
    let p = lang::load("vocabulary { type int[0..3]; C:int. } theory { prod{(x[int], x) | x < C} = 2. } structure { }")
        .unwrap();
    assert!(matches!(ground(&p.theory, &p.structure), Err(GroundError::UnsupportedAggregate(_))));
}
