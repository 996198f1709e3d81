//! Kleene evaluation of typed formulas and terms in a partial structure.

use thiserror::Error;

use crate::element::{DomainElement, TruthValue};
use crate::structure::PartialStructure;
use crate::syntax::{AggKind, Aggregate, ArithOp, Binder, CmpOp, Formula, Quantifier, SetExpr, Term, VarId};
use crate::util::Tuples;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable #{}", .0 .0)]
    UnboundVariable(VarId),
    #[error("type error: {0}")]
    Type(String),
    #[error("range exceeded: {0}")]
    RangeExceeded(String),
}

/// Variable bindings, indexed by [`VarId`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env(Vec<Option<DomainElement>>);

impl Env {
    pub fn new(slots: usize) -> Env {
        Env(vec![None; slots])
    }

    pub fn bind(&mut self, v: VarId, e: DomainElement) {
        if self.0.len() <= v.0 {
            self.0.resize(v.0 + 1, None);
        }
        self.0[v.0] = Some(e);
    }

    pub fn unbind(&mut self, v: VarId) {
        if let Some(slot) = self.0.get_mut(v.0) {
            *slot = None;
        }
    }

    pub fn get(&self, v: VarId) -> Option<&DomainElement> {
        self.0.get(v.0).and_then(|e| e.as_ref())
    }
}

/// Runs `f` once per binding of `binders`, stopping early when it returns
/// `Some`.
pub(crate) fn for_each_binding<R>(
    s: &PartialStructure,
    binders: &[Binder],
    env: &mut Env,
    mut f: impl FnMut(&mut Env) -> Option<R>,
) -> Option<R> {
    let sizes: Vec<usize> = binders.iter().map(|b| s.domain(b.ty).len()).collect();
    let mut result = None;
    for idx in Tuples::new(sizes) {
        for (b, &i) in binders.iter().zip(&idx) {
            env.bind(b.var, s.domain(b.ty).elements()[i].clone());
        }
        if let Some(r) = f(env) {
            result = Some(r);
            break;
        }
    }
    for b in binders {
        env.unbind(b.var);
    }
    result
}

/// Three-valued truth of `f` in `s`.
pub fn eval_formula(s: &PartialStructure, f: &Formula, env: &mut Env) -> Result<TruthValue, EvalError> {
    use TruthValue::*;
    Ok(match f {
        Formula::Const(b) => TruthValue::from_bool(*b),
        Formula::Atom(sym, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                match term_value(s, a, env)? {
                    Some(v) => vals.push(v),
                    None => return Ok(Unknown),
                }
            }
            match s.row_index(*sym, &vals) {
                Ok(row) => s.entry(*sym, row, 0),
                Err(e) => return Err(EvalError::Type(e.to_string())),
            }
        }
        Formula::Cmp(op, a, b) => eval_cmp(s, *op, a, b, env)?,
        Formula::Not(g) => eval_formula(s, g, env)?.negate(),
        Formula::And(fs) => {
            let mut acc = True;
            for g in fs {
                acc = acc.and(eval_formula(s, g, env)?);
                if acc == False {
                    break;
                }
            }
            acc
        }
        Formula::Or(fs) => {
            let mut acc = False;
            for g in fs {
                acc = acc.or(eval_formula(s, g, env)?);
                if acc == True {
                    break;
                }
            }
            acc
        }
        Formula::Implies(a, b) => eval_formula(s, a, env)?.negate().or(eval_formula(s, b, env)?),
        Formula::Equiv(a, b) => {
            let (x, y) = (eval_formula(s, a, env)?, eval_formula(s, b, env)?);
            match (x.as_bool(), y.as_bool()) {
                (Some(p), Some(q)) => TruthValue::from_bool(p == q),
                _ => Unknown,
            }
        }
        Formula::Quant(q, binders, body) => {
            let (stop, start) = match q {
                Quantifier::Forall => (False, True),
                Quantifier::Exists => (True, False),
            };
            let mut acc = start;
            let mut err = None;
            for_each_binding(s, binders, env, |env| match eval_formula(s, body, env) {
                Err(e) => {
                    err = Some(e);
                    Some(())
                }
                Ok(v) if v == stop => {
                    acc = stop;
                    Some(())
                }
                Ok(Unknown) => {
                    acc = Unknown;
                    None
                }
                Ok(_) => None,
            });
            if let Some(e) = err {
                return Err(e);
            }
            acc
        }
    })
}

fn eval_cmp(s: &PartialStructure, op: CmpOp, a: &Term, b: &Term, env: &mut Env) -> Result<TruthValue, EvalError> {
    let va = term_value(s, a, env)?;
    let vb = term_value(s, b, env)?;
    match (&va, &vb) {
        (Some(x), Some(y)) => {
            if op.is_order() {
                match (x.as_int(), y.as_int()) {
                    (Some(p), Some(q)) => Ok(TruthValue::from_bool(op.holds(&p, &q))),
                    _ => Err(EvalError::Type(format!("cannot order {x} and {y}"))),
                }
            } else {
                Ok(TruthValue::from_bool(op.holds(x, y)))
            }
        }
        _ if op.is_order() => Ok(TruthValue::Unknown),
        (None, Some(y)) => value_atom(s, op, a, y, env),
        (Some(x), None) => value_atom(s, op, b, x, env),
        (None, None) => Ok(TruthValue::Unknown),
    }
}

/// `F(d̄) = e` with known arguments reads the table entry directly.
fn value_atom(s: &PartialStructure, op: CmpOp, t: &Term, e: &DomainElement, env: &mut Env) -> Result<TruthValue, EvalError> {
    let Term::App(sym, args) = t else {
        return Ok(TruthValue::Unknown);
    };
    let mut vals = Vec::with_capacity(args.len());
    for a in args {
        match term_value(s, a, env)? {
            Some(v) => vals.push(v),
            None => return Ok(TruthValue::Unknown),
        }
    }
    let term = crate::structure::DomainTerm::new(*sym, vals);
    let truth = match s.value_truth(&term, e) {
        Ok(t) => t,
        // not in the result domain: never equal
        Err(_) => TruthValue::False,
    };
    Ok(if op == CmpOp::Eq { truth } else { truth.negate() })
}

/// Value of `t`, or `None` when the structure does not determine it. The
/// integer range of the vocabulary is enforced on the result.
pub fn eval_term(s: &PartialStructure, t: &Term, env: &mut Env) -> Result<Option<DomainElement>, EvalError> {
    let v = term_value(s, t, env)?;
    if let (Some(DomainElement::Int(n)), Some((lo, hi))) = (&v, s.vocabulary().int_range()) {
        if *n < lo || *n > hi {
            return Err(EvalError::RangeExceeded(format!("{n} is outside {lo}..{hi}")));
        }
    }
    Ok(v)
}

/// Unbounded-range evaluation used inside formulas.
pub(crate) fn term_value(s: &PartialStructure, t: &Term, env: &mut Env) -> Result<Option<DomainElement>, EvalError> {
    Ok(match t {
        Term::Var(v) => Some(env.get(*v).cloned().ok_or(EvalError::UnboundVariable(*v))?),
        Term::Elem(e) => Some(e.clone()),
        Term::App(sym, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                match term_value(s, a, env)? {
                    Some(v) => vals.push(v),
                    None => return Ok(None),
                }
            }
            let row = s.row_index(*sym, &vals).map_err(|e| EvalError::Type(e.to_string()))?;
            s.row_value(*sym, row)
        }
        Term::Arith(op, a, b) => {
            let (Some(x), Some(y)) = (term_value(s, a, env)?, term_value(s, b, env)?) else {
                return Ok(None);
            };
            let (x, y) = (int_of(&x)?, int_of(&y)?);
            Some(DomainElement::Int(arith(*op, x, y)?))
        }
        Term::Neg(a) => match term_value(s, a, env)? {
            None => None,
            Some(x) => Some(DomainElement::Int(
                int_of(&x)?
                    .checked_neg()
                    .ok_or_else(|| EvalError::RangeExceeded("negation overflow".into()))?,
            )),
        },
        Term::Agg(agg) => eval_aggregate(s, agg, env)?.map(DomainElement::Int),
    })
}

fn int_of(e: &DomainElement) -> Result<i64, EvalError> {
    e.as_int().ok_or_else(|| EvalError::Type(format!("{e} is not an integer")))
}

pub(crate) fn arith(op: ArithOp, x: i64, y: i64) -> Result<i64, EvalError> {
    match op {
        ArithOp::Add => x.checked_add(y),
        ArithOp::Sub => x.checked_sub(y),
        ArithOp::Mul => x.checked_mul(y),
    }
    .ok_or_else(|| EvalError::RangeExceeded(format!("overflow in {x} {op:?} {y}")))
}

/// Value of `min`/`max` over an empty set: the upper, respectively lower,
/// bound of the integer range.
pub(crate) fn empty_aggregate_value(s: &PartialStructure, kind: AggKind) -> Result<i64, EvalError> {
    match kind {
        AggKind::Sum | AggKind::Card => Ok(0),
        AggKind::Prod => Ok(1),
        AggKind::Min | AggKind::Max => {
            let (lo, hi) = s
                .vocabulary()
                .int_range()
                .ok_or_else(|| EvalError::Type("min/max need a declared int range".into()))?;
            Ok(if kind == AggKind::Min { hi } else { lo })
        }
    }
}

pub(crate) fn fold_aggregate(kind: AggKind, acc: Option<i64>, w: i64) -> Result<i64, EvalError> {
    let overflow = || EvalError::RangeExceeded("aggregate overflow".into());
    Ok(match (kind, acc) {
        (_, None) => match kind {
            AggKind::Card => 1,
            _ => w,
        },
        (AggKind::Card, Some(a)) => a.checked_add(1).ok_or_else(overflow)?,
        (AggKind::Sum, Some(a)) => a.checked_add(w).ok_or_else(overflow)?,
        (AggKind::Prod, Some(a)) => a.checked_mul(w).ok_or_else(overflow)?,
        (AggKind::Min, Some(a)) => a.min(w),
        (AggKind::Max, Some(a)) => a.max(w),
    })
}

/// Unknown as soon as any condition or selected weight is unknown.
fn eval_aggregate(s: &PartialStructure, agg: &Aggregate, env: &mut Env) -> Result<Option<i64>, EvalError> {
    let mut acc: Option<i64> = None;
    let mut unknown = false;
    let mut err = None;
    for_each_binding(s, &agg.binders, env, |env| {
        let step = (|| -> Result<bool, EvalError> {
            match eval_formula(s, &agg.cond, env)? {
                TruthValue::Unknown => Ok(false),
                TruthValue::False => Ok(true),
                TruthValue::True => {
                    let w = match &agg.weight {
                        None => 1,
                        Some(w) => match term_value(s, w, env)? {
                            None => return Ok(false),
                            Some(v) => int_of(&v)?,
                        },
                    };
                    acc = Some(fold_aggregate(agg.kind, acc, w)?);
                    Ok(true)
                }
            }
        })();
        match step {
            Ok(true) => None,
            Ok(false) => {
                unknown = true;
                Some(())
            }
            Err(e) => {
                err = Some(e);
                Some(())
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    if unknown {
        return Ok(None);
    }
    Ok(Some(match acc {
        Some(a) => a,
        None => empty_aggregate_value(s, agg.kind)?,
    }))
}

/// Tuples for which the set expression's formula is true (not unknown).
pub fn query(s: &PartialStructure, e: &SetExpr) -> Result<Vec<Vec<DomainElement>>, EvalError> {
    let mut env = Env::new(e.num_vars);
    let mut out = Vec::new();
    let mut err = None;
    for_each_binding(s, &e.binders, &mut env, |env| match eval_formula(s, &e.formula, env) {
        Ok(TruthValue::True) => {
            out.push(e.binders.iter().map(|b| env.get(b.var).cloned().unwrap()).collect());
            None
        }
        Ok(_) => None,
        Err(x) => {
            err = Some(x);
            Some(())
        }
    });
    match err {
        Some(x) => Err(x),
        None => Ok(out),
    }
}

/// Truth of a closed sentence.
pub fn eval_sentence(s: &PartialStructure, sentence: &crate::syntax::Sentence) -> Result<TruthValue, EvalError> {
    let mut env = Env::new(sentence.num_vars);
    eval_formula(s, &sentence.formula, &mut env)
}
