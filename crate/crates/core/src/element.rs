use std::fmt;

/// A value a term can take: a named constant, a bounded integer, or a truth
/// value (the result domain of a predicate atom).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainElement {
    Bool(bool),
    Int(i64),
    Const(String),
}

impl DomainElement {
    pub fn constant(name: impl Into<String>) -> DomainElement {
        DomainElement::Const(name.into())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            DomainElement::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            DomainElement::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for DomainElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainElement::Bool(b) => write!(f, "{b}"),
            DomainElement::Int(n) => write!(f, "{n}"),
            DomainElement::Const(c) => f.write_str(c),
        }
    }
}

impl From<i64> for DomainElement {
    fn from(n: i64) -> Self {
        DomainElement::Int(n)
    }
}

impl From<bool> for DomainElement {
    fn from(b: bool) -> Self {
        DomainElement::Bool(b)
    }
}

impl From<&str> for DomainElement {
    fn from(s: &str) -> Self {
        DomainElement::Const(s.to_string())
    }
}

/// Three-valued truth. The precision order has `Unknown` below both `True`
/// and `False`; those two are incomparable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TruthValue {
    True,
    False,
    Unknown,
}

impl TruthValue {
    pub fn from_bool(b: bool) -> TruthValue {
        if b {
            TruthValue::True
        } else {
            TruthValue::False
        }
    }

    pub fn is_known(self) -> bool {
        self != TruthValue::Unknown
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            TruthValue::True => Some(true),
            TruthValue::False => Some(false),
            TruthValue::Unknown => None,
        }
    }

    /// `self ≤_p other`.
    pub fn precision_leq(self, other: TruthValue) -> bool {
        self == TruthValue::Unknown || self == other
    }

    pub fn negate(self) -> TruthValue {
        match self {
            TruthValue::True => TruthValue::False,
            TruthValue::False => TruthValue::True,
            TruthValue::Unknown => TruthValue::Unknown,
        }
    }

    pub fn and(self, other: TruthValue) -> TruthValue {
        use TruthValue::*;
        match (self, other) {
            (False, _) | (_, False) => False,
            (True, True) => True,
            _ => Unknown,
        }
    }

    pub fn or(self, other: TruthValue) -> TruthValue {
        self.negate().and(other.negate()).negate()
    }
}

impl From<bool> for TruthValue {
    fn from(b: bool) -> Self {
        TruthValue::from_bool(b)
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruthValue::True => "T",
            TruthValue::False => "F",
            TruthValue::Unknown => "U",
        })
    }
}
