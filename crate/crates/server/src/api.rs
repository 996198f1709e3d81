//! Wire types of `POST /api/v1/infer`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemRef {
    Preset(String),
    Source(String),
}

/// `term = value` in the concrete syntax, e.g. `Install(Windows)` and `true`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Choice {
    pub term: String,
    pub value: String,
}

impl Choice {
    pub fn new(term: impl Into<String>, value: impl Into<String>) -> Choice {
        Choice {
            term: term.into(),
            value: value.into(),
        }
    }

    /// Reads `TERM=VALUE`; a bare term means `=true`.
    pub fn parse(text: &str) -> Choice {
        match text.split_once('=') {
            Some((t, v)) => Choice::new(t.trim(), v.trim()),
            None => Choice::new(text.trim(), "true"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    OpenTerms,
    Values,
    Consequences,
    Check,
    Modelcheck,
    Expand,
    Minimize,
    Propagate,
    Explain,
    Backtrack,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct Args {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    /// Sentence labels or instance ids assumed blameless.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub background: Vec<String>,
    /// Least-cardinality explanation instead of a subset-minimal one.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub minimum: bool,
    /// Enumerate up to this many explanations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Request {
    pub problem: ProblemRef,
    #[serde(default)]
    pub choices: Vec<Choice>,
    pub op: Op,
    #[serde(default)]
    pub args: Args,
    /// Defaults to a hash of the rest of the request.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
}

impl Request {
    pub fn new(problem: ProblemRef, op: Op) -> Request {
        Request {
            problem,
            choices: Vec::new(),
            op,
            args: Args::default(),
            seed: None,
            timeout_ms: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Unsat,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub locations: Vec<Location>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub status: Status,
    #[serde(default)]
    pub payload: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
    pub ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresetInfo {
    pub name: String,
    pub description: String,
    pub parameters: usize,
}
