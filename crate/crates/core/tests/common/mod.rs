//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use kbconf::configure::Explanation;
use kbconf::lang;
use kbconf::syntax::{Formula, Quantifier, VarId};
use kbconf::{
    eval_formula, eval_sentence, Assignment, DomainElement, DomainTerm, Env, Fact, KnowledgeBase, PartialStructure, Theory,
    TruthValue,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub mod perf;
pub mod suite;

pub const SOFTWARE: &str = include_str!("../../../../presets/software.kb");
pub const PRINTER: &str = include_str!("../../../../presets/printer.kb");

pub fn kb(text: &str) -> KnowledgeBase {
    let p = lang::load(text).unwrap_or_else(|e| panic!("{}\n{}", lang::format_errors(&e), text));
    KnowledgeBase::from_problem(p).unwrap()
}

pub fn software() -> KnowledgeBase {
    kb(SOFTWARE)
}

pub fn term(kb: &KnowledgeBase, text: &str) -> DomainTerm {
    lang::parse_term(text, kb.base()).unwrap()
}

pub fn value(kb: &KnowledgeBase, t: &DomainTerm, text: &str) -> DomainElement {
    lang::parse_value(text, t, kb.base()).unwrap()
}

pub fn choices(kb: &KnowledgeBase, items: &[&str]) -> Vec<Assignment> {
    items.iter().map(|c| lang::parse_assignment(c, kb.base()).unwrap()).collect()
}

pub fn state(kb: &KnowledgeBase, items: &[&str]) -> PartialStructure {
    kb.apply_choices(&choices(kb, items)).unwrap()
}

pub fn show(kb: &KnowledgeBase, t: &DomainTerm) -> String {
    kb.base().display_term(t)
}

pub fn show_all<'a>(kb: &KnowledgeBase, ts: impl IntoIterator<Item = &'a DomainTerm>) -> BTreeSet<String> {
    ts.into_iter().map(|t| show(kb, t)).collect()
}

// ---- brute force ----

/// Values each open term of `s` may still take.
fn open_rows(s: &PartialStructure) -> Vec<(DomainTerm, Vec<DomainElement>)> {
    let mut out = Vec::new();
    for t in s.terms() {
        if !s.is_open(&t).unwrap() {
            continue;
        }
        let decl = s.vocabulary().symbol(t.symbol);
        let candidates: Vec<DomainElement> = if decl.is_predicate() {
            vec![DomainElement::Bool(false), DomainElement::Bool(true)]
        } else {
            s.result_values(t.symbol)
        };
        let vals = candidates
            .into_iter()
            .filter(|v| s.value_truth(&t, v).unwrap() != TruthValue::False)
            .collect();
        out.push((t, vals));
    }
    out
}

/// Every total structure above `s`.
pub fn completions(s: &PartialStructure) -> Vec<PartialStructure> {
    let rows = open_rows(s);
    let sizes: Vec<usize> = rows.iter().map(|(_, v)| v.len()).collect();
    product(&sizes)
        .into_iter()
        .map(|idx| {
            let mut m = s.clone();
            for ((t, vals), i) in rows.iter().zip(idx) {
                m.set_value(t, &vals[i], TruthValue::True).unwrap();
            }
            m
        })
        .collect()
}

/// Every index tuple below `sizes`, last position fastest.
pub fn product(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |i| {
                    let mut t = prefix.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn satisfies(theory: &Theory, m: &PartialStructure) -> bool {
    theory.sentences.iter().all(|s| eval_sentence(m, s).unwrap() == TruthValue::True)
}

pub fn models(theory: &Theory, s: &PartialStructure) -> Vec<PartialStructure> {
    completions(s).into_iter().filter(|m| satisfies(theory, m)).collect()
}

/// `s` refined by every entry all `models` agree on.
pub fn intersection(s: &PartialStructure, models: &[PartialStructure]) -> PartialStructure {
    let mut out = s.clone();
    let first = &models[0];
    for (t, _) in open_rows(s) {
        let decl = s.vocabulary().symbol(t.symbol);
        let atoms: Vec<DomainElement> = if decl.is_predicate() {
            vec![DomainElement::Bool(true)]
        } else {
            s.result_values(t.symbol)
        };
        let mut decided = Vec::new();
        for v in atoms {
            if s.value_truth(&t, &v).unwrap() != TruthValue::Unknown {
                continue;
            }
            let x = first.value_truth(&t, &v).unwrap();
            if models.iter().all(|m| m.value_truth(&t, &v).unwrap() == x) {
                decided.push((v, x));
            }
        }
        decided.sort_by_key(|(_, x)| *x != TruthValue::True);
        for (v, x) in decided {
            if out.value_truth(&t, &v).unwrap() == TruthValue::Unknown {
                out.set_value(&t, &v, x).unwrap();
            }
        }
    }
    out
}

pub fn projection(models: &[PartialStructure], t: &DomainTerm) -> BTreeSet<DomainElement> {
    models.iter().map(|m| m.term_value(t).unwrap().unwrap()).collect()
}

pub fn fact_holds(m: &PartialStructure, f: &Fact) -> bool {
    m.value_truth(&f.term, &f.value).unwrap() == TruthValue::from_bool(f.truth)
}

/// `base` with every open row forgotten: the interpreted data only.
pub fn frame(kb: &KnowledgeBase) -> PartialStructure {
    let mut s = kb.base().clone();
    for t in kb.parameters() {
        s = s.erase(&t).unwrap();
    }
    s
}

/// Ground instances of the sentences, named like explanation units.
pub struct Instances {
    map: HashMap<String, (usize, Vec<(VarId, DomainElement)>)>,
}

impl Instances {
    pub fn new(theory: &Theory, s: &PartialStructure) -> Instances {
        let mut map = HashMap::new();
        for (k, sentence) in theory.sentences.iter().enumerate() {
            let mut binders = Vec::new();
            let mut body = &sentence.formula;
            while let Formula::Quant(Quantifier::Forall, bs, inner) = body {
                binders.extend(bs.iter().cloned());
                body = inner;
            }
            if binders.is_empty() {
                map.insert(sentence.id.clone(), (k, Vec::new()));
                continue;
            }
            let sizes: Vec<usize> = binders.iter().map(|b| s.domain(b.ty).len()).collect();
            for idx in product(&sizes) {
                let binding: Vec<(VarId, DomainElement)> = binders
                    .iter()
                    .zip(&idx)
                    .map(|(b, &i)| (b.var, s.domain(b.ty).elements()[i].clone()))
                    .collect();
                let names: Vec<String> = binding.iter().map(|(_, e)| e.to_string()).collect();
                map.insert(format!("{}[{}]", sentence.id, names.join(",")), (k, binding));
            }
        }
        Instances { map }
    }

    pub fn contains(&self, id: &str) -> bool {
        self.map.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    pub fn holds(&self, theory: &Theory, id: &str, m: &PartialStructure) -> bool {
        let (k, binding) = self.map.get(id).unwrap_or_else(|| panic!("no instance {id}"));
        let sentence = &theory.sentences[*k];
        let mut body = &sentence.formula;
        while let Formula::Quant(Quantifier::Forall, _, inner) = body {
            body = inner;
        }
        let mut env = Env::new(sentence.num_vars);
        for (v, e) in binding {
            env.bind(*v, e.clone());
        }
        eval_formula(m, body, &mut env).unwrap() == TruthValue::True
    }
}

/// An explanation element: a sentence instance or a fact.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Instance(String),
    Fact(Fact),
}

/// Brute-force satisfiability of sets of explanation elements.
pub struct ExplanationOracle<'a> {
    kb: &'a KnowledgeBase,
    instances: Instances,
    totals: Vec<PartialStructure>,
}

impl<'a> ExplanationOracle<'a> {
    pub fn new(kb: &'a KnowledgeBase) -> ExplanationOracle<'a> {
        let f = frame(kb);
        ExplanationOracle {
            kb,
            instances: Instances::new(kb.theory(), kb.base()),
            totals: completions(&f),
        }
    }

    pub fn instances(&self) -> &Instances {
        &self.instances
    }

    pub fn holds(&self, e: &Element, m: &PartialStructure) -> bool {
        match e {
            Element::Instance(id) => self.instances.holds(self.kb.theory(), id, m),
            Element::Fact(f) => fact_holds(m, f),
        }
    }

    fn background_holds(&self, background: &[String], m: &PartialStructure) -> bool {
        background.iter().all(|b| match self.kb.theory().sentence(b) {
            Some(s) => eval_sentence(m, s).unwrap() == TruthValue::True,
            None => self.instances.holds(self.kb.theory(), b, m),
        })
    }

    /// For every candidate world satisfying the background, the set of
    /// `elements` (as a bit mask) it violates.
    pub fn violations(&self, elements: &[Element], background: &[String]) -> Vec<u64> {
        assert!(elements.len() <= 64);
        let mut out: Vec<u64> = self
            .totals
            .iter()
            .filter(|m| self.background_holds(background, m))
            .map(|m| {
                elements
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| !self.holds(e, m))
                    .fold(0u64, |acc, (i, _)| acc | (1 << i))
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn elements(e: &Explanation) -> Vec<Element> {
        e.sentences
            .iter()
            .map(|s| Element::Instance(s.clone()))
            .chain(e.data.iter().map(|f| Element::Fact(f.fact.clone())))
            .collect()
    }

    /// Unsatisfiable over the background, and satisfiable after dropping
    /// any single element.
    pub fn verify(&self, e: &Explanation) -> Result<(), String> {
        let elements = Self::elements(e);
        for el in &elements {
            if let Element::Instance(id) = el {
                if !self.instances.contains(id) {
                    return Err(format!("unknown instance {id}"));
                }
            }
        }
        let masks = self.violations(&elements, &e.background);
        if masks.contains(&0) {
            return Err(format!("explanation is satisfiable: {elements:?}"));
        }
        for (i, el) in elements.iter().enumerate() {
            if !masks.contains(&(1 << i)) {
                return Err(format!("{el:?} is redundant"));
            }
        }
        Ok(())
    }

    /// Size of a smallest unsatisfiable subset of `universe`.
    pub fn minimum(&self, universe: &[Element], background: &[String]) -> Option<usize> {
        let masks = self.violations(universe, background);
        let n = universe.len();
        for k in 0..=n {
            let mut found = false;
            for_each_subset(n, k, &mut |set: u64| {
                if masks.iter().all(|m| m & set != 0) {
                    found = true;
                }
                found
            });
            if found {
                return Some(k);
            }
        }
        None
    }

    /// Every subset-minimal unsatisfiable subset of `universe`, as masks.
    pub fn all_minimal(&self, universe: &[Element], background: &[String]) -> BTreeSet<u64> {
        let masks = self.violations(universe, background);
        let unsat = |set: u64| masks.iter().all(|m| m & set != 0);
        (0u64..1 << universe.len())
            .filter(|&set| unsat(set) && (0..universe.len()).all(|i| set & (1 << i) == 0 || !unsat(set & !(1 << i))))
            .collect()
    }

    /// `e` as a mask over `universe`.
    pub fn mask(universe: &[Element], e: &Explanation) -> u64 {
        Self::elements(e)
            .iter()
            .map(|el| universe.iter().position(|u| u == el).expect("element outside the universe"))
            .fold(0, |acc, i| acc | (1 << i))
    }

    /// All candidates an explanation may draw from in state `s`: sentence
    /// instances, false atoms of partially known parameters, and what `s`
    /// adds to the base.
    pub fn universe(&self, s: &PartialStructure) -> Vec<Element> {
        let mut out: Vec<Element> = self.instances.ids().cloned().map(Element::Instance).collect();
        let base = self.kb.base();
        let params = self.kb.parameters();
        for f in base.known_entries() {
            if params.contains(&f.term) {
                out.push(Element::Fact(f));
            }
        }
        for f in s.known_entries() {
            if base.value_truth(&f.term, &f.value).unwrap() != TruthValue::from_bool(f.truth) {
                out.push(Element::Fact(f));
            }
        }
        out.sort();
        out
    }
}

/// Calls `f` on every `k`-subset of `0..n` as a bit mask until it returns
/// true.
pub fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(u64) -> bool) -> bool {
    fn go(start: usize, n: usize, k: usize, acc: u64, f: &mut dyn FnMut(u64) -> bool) -> bool {
        if k == 0 {
            return f(acc);
        }
        for i in start..n {
            if n - i < k {
                break;
            }
            if go(i + 1, n, k - 1, acc | (1 << i), f) {
                return true;
            }
        }
        false
    }
    go(0, n, k, 0, f)
}

// ---- random instances ----

pub struct RandomInstance {
    pub source: String,
    pub kb: KnowledgeBase,
    /// Upper bound of the declared integer range.
    pub hi: i64,
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    na: usize,
    hi: i64,
    vars: Vec<(String, char)>,
    fresh: usize,
}

impl<'r, R: Rng> Gen<'r, R> {
    fn var(&mut self, ty: char) -> String {
        self.fresh += 1;
        let name = format!("{ty}{}", self.fresh);
        self.vars.push((name.clone(), ty));
        name
    }

    fn ta(&mut self) -> String {
        let vs: Vec<&String> = self.vars.iter().filter(|(_, t)| *t == 'x').map(|(n, _)| n).collect();
        if !vs.is_empty() && self.rng.gen_bool(0.7) {
            return vs.choose(self.rng).unwrap().to_string();
        }
        format!("a{}", self.rng.gen_range(1..=self.na))
    }

    fn tb(&mut self) -> String {
        let vs: Vec<&String> = self.vars.iter().filter(|(_, t)| *t == 'y').map(|(n, _)| n).collect();
        if !vs.is_empty() && self.rng.gen_bool(0.5) {
            return vs.choose(self.rng).unwrap().to_string();
        }
        match self.rng.gen_range(0..4) {
            0 => "G".into(),
            1 => format!("H({})", self.ta()),
            k => format!("b{}", k - 1),
        }
    }

    fn int(&mut self, depth: usize) -> String {
        match self.rng.gen_range(0..if depth > 0 { 7 } else { 3 }) {
            0 => "C".into(),
            1 => format!("W({})", self.ta()),
            2 => self.rng.gen_range(0..=self.hi).to_string(),
            3 => format!("({} + {})", self.int(depth - 1), self.int(depth - 1)),
            4 => {
                let kind = ["sum", "min", "max"].choose(self.rng).unwrap();
                let v = self.var('x');
                let cond = self.formula(depth.min(1));
                self.vars.pop();
                format!("{kind}{{({v}[a], W({v})) | {cond}}}")
            }
            _ => {
                let v = self.var('x');
                let cond = self.formula(depth.min(1));
                self.vars.pop();
                format!("card{{{v}[a] | {cond}}}")
            }
        }
    }

    fn atom(&mut self, depth: usize) -> String {
        match self.rng.gen_range(0..7) {
            0 => format!("P({})", self.ta()),
            1 => "Q".into(),
            2 => format!("R({}, {})", self.ta(), self.tb()),
            3 => format!("G = {}", self.tb()),
            4 => format!("H({}) = {}", self.ta(), self.tb()),
            _ => {
                let op = ["=", "~=", "<", "=<", ">", ">="].choose(self.rng).unwrap();
                format!("{} {op} {}", self.int(depth), self.int(depth))
            }
        }
    }

    fn formula(&mut self, depth: usize) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.atom(depth.min(1));
        }
        match self.rng.gen_range(0..7) {
            0 => format!("~{}", self.formula(depth - 1)),
            1 => format!("({} & {})", self.formula(depth - 1), self.formula(depth - 1)),
            2 => format!("({} | {})", self.formula(depth - 1), self.formula(depth - 1)),
            3 => format!("({} => {})", self.formula(depth - 1), self.formula(depth - 1)),
            4 => format!("({} <=> {})", self.formula(depth - 1), self.formula(depth - 1)),
            5 => {
                let v = self.var('x');
                let body = self.formula(depth - 1);
                self.vars.pop();
                format!("(!{v}[a]: {body})")
            }
            _ => {
                let v = self.var('y');
                let body = self.formula(depth - 1);
                self.vars.pop();
                format!("(?{v}[b]: {body})")
            }
        }
    }
}

/// Most open value atoms a random instance has.
pub const MAX_ATOMS: usize = 12;

/// A small random problem: at most [`MAX_ATOMS`] open value atoms, the
/// rest of the vocabulary interpreted by random data.
pub fn random_instance<R: Rng>(rng: &mut R) -> RandomInstance {
    let na = rng.gen_range(2..=3);
    let hi: i64 = if rng.gen_bool(0.5) { rng.gen_range(1..=3) } else { rng.gen_range(8..=31) };
    let mut g = Gen {
        rng,
        na,
        hi,
        vars: Vec::new(),
        fresh: 0,
    };
    let mut src = String::new();
    writeln!(src, "vocabulary {{ type a; type b; type int[0..{hi}];").unwrap();
    writeln!(src, "  P(a). Q. R(a,b). G:b. H(a):b. C:int. W(a):int. }}").unwrap();
    src.push_str("theory {\n");
    for k in 0..g.rng.gen_range(1..=3) {
        let depth = g.rng.gen_range(1..=3);
        // a top-level universal, so that explanations see instances
        let f = if g.rng.gen_bool(0.3) {
            let v = g.var('x');
            let body = g.formula(depth);
            g.vars.pop();
            format!("!{v}[a]: {body}")
        } else {
            g.formula(depth)
        };
        writeln!(src, "  u{}: {f}.", k + 1).unwrap();
    }
    src.push_str("}\nstructure {\n");
    let elems: Vec<String> = (1..=na).map(|i| format!("a{i}")).collect();
    writeln!(src, "  a = {{{}}}\n  b = {{b1; b2}}\n}}", elems.join("; ")).unwrap();
    let rng = g.rng;

    let p = lang::load(&src).unwrap_or_else(|e| panic!("{}\n{src}", lang::format_errors(&e)));
    let mut base = p.structure.clone();
    let voc = base.vocabulary().clone();
    let mut symbols: Vec<_> = voc.symbols().map(|(id, d)| (id, d.name.clone())).collect();
    symbols.shuffle(rng);
    let mut budget = 0;
    for (sym, name) in symbols {
        let rows: Vec<DomainTerm> = base.terms().filter(|t| t.symbol == sym).collect();
        let is_pred = voc.symbol(sym).is_predicate();
        let values: Vec<DomainElement> = if is_pred {
            vec![DomainElement::Bool(true), DomainElement::Bool(false)]
        } else {
            base.result_values(sym)
        };
        let atoms = rows.len() * if is_pred { 1 } else { values.len() };
        if name != "W" && budget + atoms <= MAX_ATOMS && rng.gen_bool(0.8) {
            budget += atoms;
            for t in &rows {
                if rng.gen_bool(0.2) {
                    let v = values.choose(rng).unwrap();
                    let truth = if is_pred { TruthValue::True } else { TruthValue::False };
                    base.set_value(t, v, truth).unwrap();
                }
            }
        } else {
            for t in &rows {
                let v = values.choose(rng).unwrap();
                base.set_value(t, v, TruthValue::True).unwrap();
            }
        }
    }
    let kb = KnowledgeBase::new(p.theory, base).unwrap();
    RandomInstance { source: src, kb, hi }
}

/// Up to `n` random choices over the parameters, each consistent with the
/// earlier ones as data (not necessarily with the theory).
pub fn random_choices<R: Rng>(rng: &mut R, kb: &KnowledgeBase, n: usize) -> Vec<Assignment> {
    let params: Vec<DomainTerm> = kb.parameters().into_iter().collect();
    let mut s = kb.base().clone();
    let mut out = Vec::new();
    for _ in 0..n {
        let Some(t) = params.choose(rng) else { break };
        if out.iter().any(|a: &Assignment| &a.term == t) {
            continue;
        }
        let values: Vec<DomainElement> = if s.vocabulary().symbol(t.symbol).is_predicate() {
            vec![DomainElement::Bool(true), DomainElement::Bool(false)]
        } else {
            s.result_values(t.symbol)
        };
        let a = Assignment::new(t.clone(), values.choose(rng).unwrap().clone());
        if let Ok(next) = s.extend(&a) {
            s = next;
            out.push(a);
        }
    }
    out
}

// ---- synthetic large instances ----

/// A component-selection problem with `2 * components` parameters.
pub fn synthetic<R: Rng>(rng: &mut R, components: usize) -> String {
    let groups = components.div_ceil(10);
    let mut src = String::new();
    src.push_str("vocabulary { type comp; type group; type opt; type int[0..100];\n");
    src.push_str("  Select(comp). Requires(comp,comp). Excludes(comp,comp). In(comp,group).\n");
    src.push_str("  Choice(comp):opt. Default(comp):opt. Banned(comp):opt. Price(comp):int. Cap(group):int. }\n");
    src.push_str("theory {\n");
    src.push_str("  req:   !x[comp] y[comp]: Select(x) & Requires(x,y) => Select(y).\n");
    src.push_str("  excl:  !x[comp] y[comp]: Excludes(x,y) => ~(Select(x) & Select(y)).\n");
    src.push_str("  idle:  !x[comp]: ~Select(x) => Choice(x) = Default(x).\n");
    src.push_str("  match: !x[comp] y[comp]: Requires(x,y) & Select(x) => Choice(x) = Choice(y) | Choice(y) = o1.\n");
    src.push_str("  cap:   !g[group]: sum{(x[comp], Price(x)) | Select(x) & In(x,g)} =< Cap(g).\n");
    src.push_str("  ban:   !x[comp]: Select(x) => Choice(x) ~= Banned(x).\n}\n");
    src.push_str("structure {\n");
    let comps: Vec<String> = (0..components).map(|i| format!("c{i}")).collect();
    writeln!(src, "  comp = {{{}}}", comps.join("; ")).unwrap();
    let gs: Vec<String> = (0..groups).map(|i| format!("g{i}")).collect();
    writeln!(src, "  group = {{{}}}", gs.join("; ")).unwrap();
    src.push_str("  opt = {o1; o2; o3; o4}\n");
    let mut req = Vec::new();
    let mut excl = Vec::new();
    for i in 0..components {
        // sparse and acyclic: components only require later neighbours
        for _ in 0..2 {
            if i + 1 < components && rng.gen_bool(0.6) {
                let j = rng.gen_range(i + 1..components.min(i + 6));
                req.push(format!("(c{i},c{j})"));
            }
        }
        if i + 1 < components && rng.gen_bool(0.3) {
            let j = rng.gen_range(i + 1..components.min(i + 11));
            excl.push(format!("(c{i},c{j})"));
        }
    }
    req.sort();
    req.dedup();
    excl.sort();
    excl.dedup();
    writeln!(src, "  Requires = {{{}}}", req.join("; ")).unwrap();
    writeln!(src, "  Excludes = {{{}}}", excl.join("; ")).unwrap();
    let inn: Vec<String> = (0..components).map(|i| format!("(c{i},g{})", i / 10)).collect();
    writeln!(src, "  In = {{{}}}", inn.join("; ")).unwrap();
    let price: Vec<String> = (0..components).map(|i| format!("c{i}->{}", rng.gen_range(1..=9))).collect();
    writeln!(src, "  Price = {{{}}}", price.join("; ")).unwrap();
    let def: Vec<String> = (0..components).map(|i| format!("c{i}->o{}", rng.gen_range(1..=4))).collect();
    writeln!(src, "  Default = {{{}}}", def.join("; ")).unwrap();
    let ban: Vec<String> = (0..components).map(|i| format!("c{i}->o{}", rng.gen_range(2..=4))).collect();
    writeln!(src, "  Banned = {{{}}}", ban.join("; ")).unwrap();
    let cap: Vec<String> = (0..groups).map(|g| format!("g{g}->{}", rng.gen_range(25..=45))).collect();
    writeln!(src, "  Cap = {{{}}}\n}}", cap.join("; ")).unwrap();
    src
}
