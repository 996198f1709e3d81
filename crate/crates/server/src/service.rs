//! Request dispatch. Every request rebuilds its session from the problem
//! and the choice list; nothing but parsed problems outlives a request.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use kbconf::configure::{ExplainedFact, FactOrigin};
use kbconf::lang::{self, LangError};
use kbconf::{
    eval_sentence, Assignment, ConfigError, Configurator, DomainElement, DomainTerm, Explanation, Fact, InferError,
    KnowledgeBase, PartialStructure, TruthValue,
};
use serde_json::{json, Value};

use crate::api::{Choice, ErrorBody, Location, Op, PresetInfo, ProblemRef, Request, Response, Status};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

const CACHE_LIMIT: usize = 64;

const BUILTIN: [(&str, &str); 3] = [
    ("software", include_str!("../../../presets/software.kb")),
    ("printer", include_str!("../../../presets/printer.kb")),
    ("unsat", include_str!("../../../presets/unsat.kb")),
];

struct Preset {
    description: String,
    kb: Arc<KnowledgeBase>,
}

/// A failed request: a message plus source locations when there are any.
#[derive(Debug)]
struct Failure(ErrorBody);

impl Failure {
    fn new(message: impl Into<String>) -> Failure {
        Failure(ErrorBody {
            message: message.into(),
            locations: Vec::new(),
        })
    }

    fn lang(context: &str, errors: &[LangError]) -> Failure {
        Failure(ErrorBody {
            message: format!("{context}: {}", lang::format_errors(errors)),
            locations: errors
                .iter()
                .map(|e| Location {
                    line: e.span.line,
                    column: e.span.column,
                    message: format!("{}: {}", e.kind, e.message),
                })
                .collect(),
        })
    }
}

enum Outcome {
    Ok(Value),
    Unsat(Value),
}

pub struct Service {
    presets: BTreeMap<String, Preset>,
    sources: RwLock<HashMap<u64, Arc<KnowledgeBase>>>,
    timeout: Duration,
}

impl Default for Service {
    fn default() -> Self {
        Service::new()
    }
}

impl Service {
    /// A service without presets.
    pub fn new() -> Service {
        Service {
            presets: BTreeMap::new(),
            sources: RwLock::new(HashMap::new()),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    /// The presets shipped with the repository.
    pub fn with_builtin_presets() -> Service {
        let mut s = Service::new();
        for (name, text) in BUILTIN {
            s.add_preset(name, text).expect("builtin preset");
        }
        s
    }

    /// Every `*.kb` file of `dir`, named by its stem.
    pub fn from_dir(dir: &Path) -> Result<Service, String> {
        let mut s = Service::new();
        let entries = std::fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        for entry in entries {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.extension().and_then(|x| x.to_str()) != Some("kb") {
                continue;
            }
            let name = path.file_stem().and_then(|x| x.to_str()).unwrap_or_default().to_string();
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            s.add_preset(&name, &text).map_err(|e| format!("{}: {e}", path.display()))?;
        }
        Ok(s)
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Service {
        self.timeout = timeout;
        self
    }

    pub fn add_preset(&mut self, name: &str, text: &str) -> Result<(), String> {
        let kb = build(text).map_err(|f| f.0.message)?;
        let description = text
            .lines()
            .next()
            .and_then(|l| l.trim().strip_prefix("//"))
            .map(|l| l.trim().to_string())
            .unwrap_or_default();
        self.presets.insert(
            name.to_string(),
            Preset {
                description,
                kb: Arc::new(kb),
            },
        );
        Ok(())
    }

    pub fn presets(&self) -> Vec<PresetInfo> {
        self.presets
            .iter()
            .map(|(name, p)| PresetInfo {
                name: name.clone(),
                description: p.description.clone(),
                parameters: p.kb.parameters().len(),
            })
            .collect()
    }

    /// Parses a JSON request body and handles it.
    pub fn handle_json(&self, body: &str) -> Response {
        match serde_json::from_str::<Request>(body) {
            Ok(req) => self.handle(&req),
            Err(e) => malformed(&e),
        }
    }

    pub fn handle(&self, req: &Request) -> Response {
        let start = Instant::now();
        let (status, payload, error) = match self.dispatch(req, start) {
            Ok(Outcome::Ok(p)) => (Status::Ok, p, None),
            Ok(Outcome::Unsat(p)) => (Status::Unsat, p, None),
            Err(Failure(e)) => (Status::Error, Value::Null, Some(e)),
        };
        Response {
            status,
            payload,
            error,
            ms: start.elapsed().as_millis() as u64,
        }
    }

    fn knowledge_base(&self, problem: &ProblemRef) -> Result<Arc<KnowledgeBase>, Failure> {
        match problem {
            ProblemRef::Preset(name) => self
                .presets
                .get(name)
                .map(|p| p.kb.clone())
                .ok_or_else(|| Failure::new(format!("unknown preset `{name}`"))),
            ProblemRef::Source(text) => {
                let key = hash(text);
                if let Some(kb) = self.sources.read().unwrap().get(&key) {
                    return Ok(kb.clone());
                }
                let kb = Arc::new(build(text)?);
                let mut cache = self.sources.write().unwrap();
                if cache.len() >= CACHE_LIMIT {
                    cache.clear();
                }
                cache.insert(key, kb.clone());
                Ok(kb)
            }
        }
    }

    fn dispatch(&self, req: &Request, start: Instant) -> Result<Outcome, Failure> {
        let kb = self.knowledge_base(&req.problem)?;
        let seed = req.seed.unwrap_or_else(|| {
            let mut unseeded = req.clone();
            unseeded.timeout_ms = None;
            hash(&serde_json::to_string(&unseeded).unwrap_or_default())
        });
        let timeout = req.timeout_ms.map(Duration::from_millis).unwrap_or(self.timeout);
        let c = Configurator::new(&kb).with_seed(seed).with_deadline(Some(start + timeout));
        let choices = req
            .choices
            .iter()
            .enumerate()
            .map(|(i, ch)| assignment(&kb, ch).map_err(|e| Failure::lang(&format!("choice {}", i + 1), &[e])))
            .collect::<Result<Vec<_>, _>>()?;
        let s = kb.apply_choices(&choices).map_err(|e| Failure::new(e.to_string()))?;
        let session = Session { kb: &kb, c: &c, choices: &choices, s: &s };
        session.run(req)
    }
}

/// The response to a body that is not a request.
pub fn malformed(e: &serde_json::Error) -> Response {
    Response {
        status: Status::Error,
        payload: Value::Null,
        error: Some(ErrorBody {
            message: format!("malformed request: {e}"),
            locations: vec![Location {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }],
        }),
        ms: 0,
    }
}

fn hash(text: &str) -> u64 {
    let mut h = DefaultHasher::new();
    text.hash(&mut h);
    h.finish()
}

fn build(text: &str) -> Result<KnowledgeBase, Failure> {
    let p = lang::load(text).map_err(|e| Failure::lang("problem", &e))?;
    KnowledgeBase::from_problem(p).map_err(|e| Failure::new(e.to_string()))
}

fn assignment(kb: &KnowledgeBase, ch: &Choice) -> Result<Assignment, LangError> {
    let term = lang::parse_term(&ch.term, kb.base())?;
    let value = lang::parse_value(&ch.value, &term, kb.base())?;
    Ok(Assignment::new(term, value))
}

struct Session<'a> {
    kb: &'a KnowledgeBase,
    c: &'a Configurator<'a>,
    choices: &'a [Assignment],
    s: &'a PartialStructure,
}

impl Session<'_> {
    fn show(&self, t: &DomainTerm) -> String {
        self.kb.base().display_term(t)
    }

    fn assignment_json(&self, a: &Assignment) -> Value {
        json!({"term": self.show(&a.term), "value": a.value.to_string()})
    }

    fn fact_json(&self, f: &Fact) -> Value {
        json!({"term": self.show(&f.term), "value": f.value.to_string(), "truth": f.truth})
    }

    fn explanation_json(&self, e: &Explanation) -> Value {
        let facts: Vec<Value> = e
            .data
            .iter()
            .map(|ExplainedFact { fact, origin }| {
                let mut v = self.fact_json(fact);
                v["origin"] = json!(match origin {
                    FactOrigin::Base => "base",
                    FactOrigin::State => "state",
                });
                v
            })
            .collect();
        json!({"sentences": e.sentences, "facts": facts, "background": e.background})
    }

    fn model_json(&self, m: &PartialStructure) -> Value {
        let rows: Vec<Value> = self
            .kb
            .parameters()
            .iter()
            .filter_map(|t| {
                let v = m.term_value(t).ok().flatten()?;
                Some(json!({"term": self.show(t), "value": v.to_string()}))
            })
            .collect();
        Value::Array(rows)
    }

    fn target(&self, req: &Request) -> Result<(DomainTerm, DomainElement), Failure> {
        let term = req.args.term.as_deref().ok_or_else(|| Failure::new("missing args.term"))?;
        let value = req.args.value.as_deref().ok_or_else(|| Failure::new("missing args.value"))?;
        let a = assignment(self.kb, &Choice::new(term, value)).map_err(|e| Failure::lang("args", &[e]))?;
        Ok((a.term, a.value))
    }

    fn term(&self, req: &Request) -> Result<DomainTerm, Failure> {
        let term = req.args.term.as_deref().ok_or_else(|| Failure::new("missing args.term"))?;
        lang::parse_term(term, self.kb.base()).map_err(|e| Failure::lang("args.term", &[e]))
    }

    /// An explanation for the choices, extended by `extra` when they are
    /// consistent on their own.
    fn unsat(&self, extra: Option<Assignment>) -> Result<Outcome, Failure> {
        let mut e = self.c.explain_choices(self.choices, &[]);
        if let (Err(ConfigError::StateConsistent), Some(a)) = (&e, extra) {
            let mut all = self.choices.to_vec();
            all.push(a);
            e = self.c.explain_choices(&all, &[]);
        }
        match e {
            Ok(e) => Ok(Outcome::Unsat(json!({"explanation": self.explanation_json(&e)}))),
            Err(ConfigError::BackgroundInconsistent) => Ok(Outcome::Unsat(json!({"explanation": null}))),
            Err(e) => Err(fail(e)),
        }
    }

    /// Maps an inconsistency to an explained `unsat`, anything else to an
    /// error.
    fn or_unsat<T>(&self, r: Result<T, ConfigError>, extra: Option<Assignment>, ok: impl FnOnce(T) -> Value) -> Result<Outcome, Failure> {
        match r {
            Ok(v) => Ok(Outcome::Ok(ok(v))),
            Err(ConfigError::Infer(InferError::Inconsistent)) => self.unsat(extra),
            Err(e) => Err(fail(e)),
        }
    }

    fn run(&self, req: &Request) -> Result<Outcome, Failure> {
        let (c, s) = (self.c, self.s);
        match req.op {
            Op::OpenTerms => self.or_unsat(c.get_open_terms(s), None, |open| {
                json!({"terms": open.iter().map(|t| self.show(t)).collect::<Vec<_>>()})
            }),
            Op::Values => {
                let t = self.term(req)?;
                self.or_unsat(c.get_consistent_values(s, &t), None, |vs| {
                    json!({"term": self.show(&t), "values": vs.iter().map(|v| v.to_string()).collect::<Vec<_>>()})
                })
            }
            Op::Consequences => {
                let (t, v) = self.target(req)?;
                let hyp = Assignment::new(t.clone(), v.clone());
                self.or_unsat(c.consequences(s, &t, &v), Some(hyp), |cs| {
                    json!({
                        "positive": cs.positive.iter().map(|a| self.assignment_json(a)).collect::<Vec<_>>(),
                        "negative": cs.negative.iter().map(|a| self.assignment_json(a)).collect::<Vec<_>>(),
                    })
                })
            }
            Op::Check => match (&req.args.term, &req.args.value) {
                (None, None) => match c.autocomplete(s, None).map_err(fail)? {
                    Some(_) => Ok(Outcome::Ok(json!({"consistent": true}))),
                    None => self.unsat(None),
                },
                _ => {
                    let (t, v) = self.target(req)?;
                    let ok = c.check_consistency(s, &t, &v).map_err(fail)?;
                    Ok(Outcome::Ok(json!({"consistent": ok})))
                }
            },
            Op::Modelcheck => {
                if !s.is_total() {
                    let missing: Vec<String> = self
                        .kb
                        .parameters()
                        .iter()
                        .filter(|t| s.is_open(t).unwrap_or(true))
                        .map(|t| self.show(t))
                        .collect();
                    return Err(Failure::new(format!("structure not total: {} open", missing.join(", "))));
                }
                let violated: Vec<&str> = self
                    .kb
                    .theory()
                    .sentences
                    .iter()
                    .filter(|x| !matches!(eval_sentence(s, x), Ok(TruthValue::True)))
                    .map(|x| x.id.as_str())
                    .collect();
                let payload = json!({"model": violated.is_empty(), "violated": violated});
                Ok(if violated.is_empty() {
                    Outcome::Ok(payload)
                } else {
                    Outcome::Unsat(payload)
                })
            }
            Op::Expand => match c.autocomplete(s, None).map_err(fail)? {
                Some(m) => Ok(Outcome::Ok(json!({"model": self.model_json(&m)}))),
                None => self.unsat(None),
            },
            Op::Minimize => {
                let text = req.args.objective.as_deref().ok_or_else(|| Failure::new("missing args.objective"))?;
                let obj = lang::parse_objective(text, self.kb.base()).map_err(|e| Failure::lang("args.objective", &[e]))?;
                match c.minimize(s, &obj.term, obj.num_vars).map_err(fail)? {
                    Some((m, v)) => Ok(Outcome::Ok(json!({"model": self.model_json(&m), "objective": text, "value": v}))),
                    None => self.unsat(None),
                }
            }
            Op::Propagate => self.or_unsat(c.propagate(s), None, |r| {
                let open: Vec<String> = self
                    .kb
                    .parameters()
                    .iter()
                    .filter(|t| r.structure.is_open(t).unwrap_or(false))
                    .map(|t| self.show(t))
                    .collect();
                let mut remaining = serde_json::Map::new();
                for t in self.kb.parameters().iter().filter(|t| r.structure.is_open(t).unwrap_or(false)) {
                    if self.kb.vocabulary().symbol(t.symbol).is_predicate() {
                        continue;
                    }
                    let values: Vec<String> = r
                        .structure
                        .result_values(t.symbol)
                        .into_iter()
                        .filter(|v| r.structure.value_truth(t, v).map(|x| x != TruthValue::False).unwrap_or(false))
                        .map(|v| v.to_string())
                        .collect();
                    remaining.insert(self.show(t), json!(values));
                }
                json!({
                    "entries": r.new_entries.iter().map(|f| self.fact_json(f)).collect::<Vec<_>>(),
                    "open_terms": open,
                    "remaining": remaining,
                })
            }),
            Op::Explain => self.explain(req),
            Op::Backtrack => {
                let (t, v) = self.target(req)?;
                let b = c.backtrack_suggest(self.choices, &t, &v).map_err(fail)?;
                Ok(Outcome::Ok(json!({
                    "retract": b.retract.iter().map(|a| self.assignment_json(a)).collect::<Vec<_>>(),
                    "conflicts": b
                        .conflicts
                        .iter()
                        .map(|set| set.iter().map(|a| self.assignment_json(a)).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                })))
            }
        }
    }

    fn explain(&self, req: &Request) -> Result<Outcome, Failure> {
        let bg = &req.args.background;
        let found = match req.args.limit {
            Some(limit) => self.c.minimal_unsat_theories(self.s, bg, limit),
            None if req.args.minimum => self.c.explain_choices_minimum(self.choices, bg).map(|e| vec![e]),
            None => self.c.explain_choices(self.choices, bg).map(|e| vec![e]),
        };
        match found {
            Ok(es) => {
                let list: Vec<Value> = es.iter().map(|e| self.explanation_json(e)).collect();
                Ok(Outcome::Unsat(match req.args.limit {
                    Some(_) => json!({ "explanations": list }),
                    None => json!({ "explanation": list[0] }),
                }))
            }
            Err(ConfigError::StateConsistent) => Ok(Outcome::Ok(json!({"explanation": null}))),
            Err(e) => Err(fail(e)),
        }
    }
}

fn fail(e: ConfigError) -> Failure {
    match e {
        ConfigError::Infer(InferError::Timeout) => Failure::new("timeout"),
        e => Failure::new(e.to_string()),
    }
}
