use std::fmt;
use std::ops::Not;

/// A propositional variable. Variables are numbered from zero internally and
/// from one in DIMACS notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub(crate) u32);

impl Var {
    pub fn from_index(index: usize) -> Var {
        Var(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// One-based DIMACS number of this variable.
    pub fn to_dimacs(self) -> i32 {
        self.0 as i32 + 1
    }

    pub fn positive(self) -> Lit {
        Lit(self.0 << 1)
    }

    pub fn negative(self) -> Lit {
        Lit((self.0 << 1) | 1)
    }

    pub fn lit(self, positive: bool) -> Lit {
        if positive {
            self.positive()
        } else {
            self.negative()
        }
    }
}

/// A literal: a variable or its negation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    /// Builds a literal from DIMACS notation (`3` is x3, `-3` its negation).
    ///
    /// Panics on `0`.
    pub fn from_dimacs(lit: i32) -> Lit {
        assert!(lit != 0, "0 is not a literal");
        let var = Var(lit.unsigned_abs() - 1);
        var.lit(lit > 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var().to_dimacs();
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_positive(self) -> bool {
        !self.is_negated()
    }

    #[inline]
    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}
