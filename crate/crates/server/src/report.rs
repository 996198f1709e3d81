//! Plain-text rendering of responses for the command line.

use std::fmt::Write;

use serde_json::Value;

use crate::api::{Response, Status};

fn assignment(v: &Value) -> String {
    let term = v["term"].as_str().unwrap_or_default();
    let value = v["value"].as_str().unwrap_or_default();
    match v.get("truth").and_then(Value::as_bool) {
        Some(false) => format!("{term}~={value}"),
        _ => format!("{term}={value}"),
    }
}

fn list(v: &Value) -> Vec<String> {
    v.as_array()
        .map(|xs| {
            xs.iter()
                .map(|x| match x {
                    Value::String(s) => s.clone(),
                    Value::Object(_) => assignment(x),
                    other => other.to_string(),
                })
                .collect()
        })
        .unwrap_or_default()
}

fn explanation(out: &mut String, e: &Value) {
    if e.is_null() {
        let _ = writeln!(out, "no conflict");
        return;
    }
    let _ = writeln!(out, "conflict between:");
    for s in list(&e["sentences"]) {
        let _ = writeln!(out, "  sentence {s}");
    }
    for f in e["facts"].as_array().into_iter().flatten() {
        let origin = f["origin"].as_str().unwrap_or_default();
        let _ = writeln!(out, "  {} ({origin})", assignment(f));
    }
}

/// One line per term: its value when forced, else the values ruled out.
fn derived(entries: &[Value], remaining: &Value) -> Vec<String> {
    let mut terms: Vec<(&str, Option<&str>, Vec<&str>)> = Vec::new();
    for e in entries {
        let term = e["term"].as_str().unwrap_or_default();
        let value = e["value"].as_str().unwrap_or_default();
        let i = match terms.iter().position(|(t, _, _)| *t == term) {
            Some(i) => i,
            None => {
                terms.push((term, None, Vec::new()));
                terms.len() - 1
            }
        };
        if e["truth"].as_bool() == Some(true) {
            terms[i].1 = Some(value);
        } else {
            terms[i].2.push(value);
        }
    }
    terms
        .into_iter()
        .map(|(t, forced, out)| match forced {
            Some(v) => format!("{t}={v}"),
            None if out.len() == 1 => format!("{t}~={}", out[0]),
            None => match remaining.get(t) {
                Some(left) => format!("{t} in {{{}}}", list(left).join(", ")),
                None => format!("{t} not in {{{}}}", out.join(", ")),
            },
        })
        .collect()
}

/// What a person reads: the status line followed by the payload.
pub fn render(r: &Response) -> String {
    let mut out = String::new();
    let status = match r.status {
        Status::Ok => "ok",
        Status::Unsat => "unsat",
        Status::Error => "error",
    };
    let _ = writeln!(out, "status: {status} ({} ms)", r.ms);
    if let Some(e) = &r.error {
        let _ = writeln!(out, "{}", e.message);
        return out;
    }
    let p = &r.payload;
    if let Some(m) = p.get("model").filter(|m| m.is_array()) {
        for row in list(m) {
            let _ = writeln!(out, "  {row}");
        }
    }
    if let (Some(o), Some(v)) = (p.get("objective"), p.get("value")) {
        let _ = writeln!(out, "{} = {v}", o.as_str().unwrap_or_default());
    }
    if let Some(m) = p.get("model").and_then(Value::as_bool) {
        let _ = writeln!(out, "model: {m}");
        let violated = list(&p["violated"]);
        if !violated.is_empty() {
            let _ = writeln!(out, "violated: {}", violated.join(", "));
        }
    }
    if let Some(c) = p.get("consistent") {
        let _ = writeln!(out, "consistent: {c}");
    }
    if let Some(es) = p.get("entries").and_then(Value::as_array) {
        let _ = writeln!(out, "derived:");
        for line in derived(es, &p["remaining"]) {
            let _ = writeln!(out, "  {line}");
        }
        let _ = writeln!(out, "open: {}", list(&p["open_terms"]).join(", "));
    }
    if let Some(ts) = p.get("terms") {
        let _ = writeln!(out, "open: {}", list(ts).join(", "));
    }
    if let Some(e) = p.get("explanation") {
        explanation(&mut out, e);
    }
    for e in p.get("explanations").and_then(Value::as_array).into_iter().flatten() {
        explanation(&mut out, e);
    }
    out
}
