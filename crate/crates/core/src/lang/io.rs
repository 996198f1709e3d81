use std::collections::HashSet;
use std::fmt::Write;
use std::sync::Arc;

use crate::element::{DomainElement, TruthValue};
use crate::structure::{DomainTerm, PartialStructure};
use crate::syntax::Span;
use crate::vocabulary::{SymbolKind, Vocabulary, INT};

use super::parser::{RawEntry, RawItem, RawRhs, RawValue};
use super::{element, truth, ErrorKind, LangError};

fn serr(span: Span, message: impl Into<String>) -> LangError {
    LangError {
        kind: ErrorKind::Structure,
        span,
        message: message.into(),
    }
}

pub(crate) fn build_structure(voc: &Arc<Vocabulary>, entries: &[RawEntry]) -> Result<PartialStructure, LangError> {
    let mut domains = Vec::new();
    let mut seen = HashSet::new();
    for e in entries {
        if !seen.insert(e.name.as_str()) {
            return Err(serr(e.span, format!("`{}` is interpreted twice", e.name)));
        }
        let Some(t) = voc.type_id(&e.name) else { continue };
        if t == INT {
            return Err(serr(e.span, "the integer domain comes from its declared range"));
        }
        let RawRhs::Set(items) = &e.rhs else {
            return Err(serr(e.span, format!("domain of `{}` must be a set", e.name)));
        };
        let mut elems = Vec::new();
        for it in items {
            match (it.tuple.as_slice(), &it.target) {
                ([RawValue::Ident(x)], None) => elems.push(DomainElement::constant(x.clone())),
                _ => return Err(serr(it.span, "domain elements must be identifiers")),
            }
        }
        domains.push((t, elems));
    }
    let span = entries.first().map(|e| e.span).unwrap_or_default();
    let mut s = PartialStructure::new(voc.clone(), domains).map_err(|e| LangError::structure(span, e))?;
    for e in entries {
        if voc.type_id(&e.name).is_some() {
            continue;
        }
        let Some(sym) = voc.symbol_id(&e.name) else {
            return Err(serr(e.span, format!("unknown symbol `{}`", e.name)));
        };
        let decl = voc.symbol(sym).clone();
        let n = decl.arity();
        match (&e.rhs, decl.kind) {
            (RawRhs::Scalar(v), SymbolKind::Predicate) if n == 0 => {
                let b = truth(v).ok_or_else(|| serr(e.span, "expected T or F"))?;
                set(&mut s, &DomainTerm::new(sym, vec![]), &DomainElement::Bool(true), b, e.span)?;
            }
            (RawRhs::Scalar(v), SymbolKind::Function(_)) if n == 0 => {
                set(&mut s, &DomainTerm::new(sym, vec![]), &element(v), true, e.span)?;
            }
            (RawRhs::Scalar(_), _) => {
                return Err(serr(e.span, format!("`{}` takes arguments; use a set of entries", e.name)))
            }
            (RawRhs::Set(items), SymbolKind::Predicate) => {
                let shorthand = items.iter().all(|i| i.target.is_none());
                if shorthand {
                    for row in 0..s.rows(sym) {
                        let t = DomainTerm::new(sym, s.row_args(sym, row));
                        s.set_value(&t, &DomainElement::Bool(true), TruthValue::False)
                            .map_err(|x| LangError::structure(e.span, x))?;
                    }
                }
                for it in items {
                    let term = item_term(sym, &it.tuple, n, it)?;
                    let b = match &it.target {
                        None if shorthand => true,
                        None => return Err(serr(it.span, "mixing `tuple` and `tuple->T/F` entries")),
                        Some(v) => truth(v).ok_or_else(|| serr(it.span, "expected T or F"))?,
                    };
                    if shorthand {
                        s.set_value(&term, &DomainElement::Bool(true), TruthValue::True)
                            .map_err(|x| LangError::structure(it.span, x))?;
                    } else {
                        set(&mut s, &term, &DomainElement::Bool(true), b, it.span)?;
                    }
                }
            }
            (RawRhs::Set(items), SymbolKind::Function(_)) => {
                for it in items {
                    let Some(target) = &it.target else {
                        return Err(serr(it.span, "function entries need `->`"));
                    };
                    if it.tuple.len() == n {
                        let term = item_term(sym, &it.tuple, n, it)?;
                        set(&mut s, &term, &element(target), true, it.span)?;
                    } else if it.tuple.len() == n + 1 {
                        let term = item_term(sym, &it.tuple[..n], n, it)?;
                        let b = truth(target).ok_or_else(|| serr(it.span, "expected T or F"))?;
                        set(&mut s, &term, &element(&it.tuple[n]), b, it.span)?;
                    } else {
                        return Err(serr(
                            it.span,
                            format!("`{}` entries take {} or {} elements", e.name, n, n + 1),
                        ));
                    }
                }
            }
        }
    }
    Ok(s)
}

fn item_term(sym: crate::vocabulary::SymbolId, tuple: &[RawValue], n: usize, it: &RawItem) -> Result<DomainTerm, LangError> {
    if tuple.len() != n {
        return Err(serr(it.span, format!("expected {n} arguments, got {}", tuple.len())));
    }
    Ok(DomainTerm::new(sym, tuple.iter().map(element).collect()))
}

/// Sets one value atom, rejecting contradictions with earlier entries.
fn set(s: &mut PartialStructure, term: &DomainTerm, value: &DomainElement, b: bool, span: Span) -> Result<(), LangError> {
    let current = s.value_truth(term, value).map_err(|e| LangError::structure(span, e))?;
    let want = TruthValue::from_bool(b);
    if current.is_known() && current != want {
        return Err(serr(span, format!("conflicting entry for {}", s.display_term(term))));
    }
    s.set_value(term, value, want).map_err(|e| LangError::structure(span, e))
}

fn tuple(args: &[DomainElement]) -> String {
    let inner = args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
    if args.len() == 1 {
        inner
    } else {
        format!("({inner})")
    }
}

/// Writes a `structure { .. }` block that [`super::parse_structure`] reads
/// back to an identical structure. Unknown entries are omitted.
pub fn serialize_structure(s: &PartialStructure) -> String {
    let voc = s.vocabulary();
    let mut out = String::from("structure {\n");
    for (t, decl) in voc.types() {
        if t == INT || s.domain(t).is_empty() {
            continue;
        }
        let elems: Vec<String> = s.domain(t).elements().iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "  {} = {{{}}}", decl.name, elems.join("; "));
    }
    for (sym, decl) in voc.symbols() {
        let mut items = Vec::new();
        let mut scalar = None;
        for row in 0..s.rows(sym) {
            let args = s.row_args(sym, row);
            match decl.kind {
                SymbolKind::Predicate => {
                    if let Some(b) = s.entry(sym, row, 0).as_bool() {
                        if args.is_empty() {
                            scalar = Some(if b { "T" } else { "F" }.to_string());
                        } else {
                            items.push(format!("{}->{}", tuple(&args), if b { "T" } else { "F" }));
                        }
                    }
                }
                SymbolKind::Function(_) => {
                    let values = s.result_values(sym);
                    let r = s.row(sym, row);
                    if let Some(i) = r.iter().position(|t| *t == TruthValue::True) {
                        if args.is_empty() {
                            scalar = Some(values[i].to_string());
                        } else {
                            items.push(format!("{}->{}", tuple(&args), values[i]));
                        }
                        continue;
                    }
                    for (v, t) in values.iter().zip(r) {
                        if *t == TruthValue::False {
                            let mut full = args.clone();
                            full.push(v.clone());
                            items.push(format!("({})->F", full.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")));
                        }
                    }
                }
            }
        }
        if let Some(v) = scalar {
            let _ = writeln!(out, "  {} = {}", decl.name, v);
        } else if !items.is_empty() {
            let _ = writeln!(out, "  {} = {{{}}}", decl.name, items.join("; "));
        }
    }
    out.push('}');
    out.push('\n');
    out
}
