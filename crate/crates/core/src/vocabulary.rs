use std::collections::HashMap;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub usize);

/// The built-in integer type. Always present, always `TypeId(0)`.
pub const INT: TypeId = TypeId(0);
pub const INT_NAME: &str = "int";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    /// Inclusive bounds; only the integer type has one.
    pub range: Option<(i64, i64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Predicate,
    Function(TypeId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolDecl {
    pub name: String,
    pub args: Vec<TypeId>,
    pub kind: SymbolKind,
}

impl SymbolDecl {
    pub fn is_predicate(&self) -> bool {
        self.kind == SymbolKind::Predicate
    }

    pub fn result(&self) -> Option<TypeId> {
        match self.kind {
            SymbolKind::Predicate => None,
            SymbolKind::Function(t) => Some(t),
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum VocabularyError {
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("duplicate type `{0}`")]
    DuplicateType(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("empty integer range {0}..{1}")]
    EmptyRange(i64, i64),
}

/// Type, predicate and function symbols with their signatures.
///
/// Predicates and functions share one namespace so that a name in a formula
/// resolves to exactly one symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    types: Vec<TypeDecl>,
    symbols: Vec<SymbolDecl>,
    type_index: HashMap<String, TypeId>,
    symbol_index: HashMap<String, SymbolId>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::new()
    }
}

impl Vocabulary {
    pub fn new() -> Vocabulary {
        let mut v = Vocabulary {
            types: Vec::new(),
            symbols: Vec::new(),
            type_index: HashMap::new(),
            symbol_index: HashMap::new(),
        };
        v.types.push(TypeDecl {
            name: INT_NAME.to_string(),
            range: None,
        });
        v.type_index.insert(INT_NAME.to_string(), INT);
        v
    }

    pub fn add_type(&mut self, name: &str) -> Result<TypeId, VocabularyError> {
        if self.type_index.contains_key(name) {
            return Err(VocabularyError::DuplicateType(name.to_string()));
        }
        let id = TypeId(self.types.len());
        self.types.push(TypeDecl {
            name: name.to_string(),
            range: None,
        });
        self.type_index.insert(name.to_string(), id);
        Ok(id)
    }

    /// Restricts the built-in integer type to `lo..=hi`.
    pub fn set_int_range(&mut self, lo: i64, hi: i64) -> Result<(), VocabularyError> {
        if lo > hi {
            return Err(VocabularyError::EmptyRange(lo, hi));
        }
        self.types[INT.0].range = Some((lo, hi));
        Ok(())
    }

    pub fn int_range(&self) -> Option<(i64, i64)> {
        self.types[INT.0].range
    }

    pub fn add_predicate(&mut self, name: &str, args: &[TypeId]) -> Result<SymbolId, VocabularyError> {
        self.add_symbol(name, args, SymbolKind::Predicate)
    }

    pub fn add_function(
        &mut self,
        name: &str,
        args: &[TypeId],
        result: TypeId,
    ) -> Result<SymbolId, VocabularyError> {
        self.add_symbol(name, args, SymbolKind::Function(result))
    }

    fn add_symbol(&mut self, name: &str, args: &[TypeId], kind: SymbolKind) -> Result<SymbolId, VocabularyError> {
        if self.symbol_index.contains_key(name) {
            return Err(VocabularyError::DuplicateSymbol(name.to_string()));
        }
        let mentioned = args.iter().chain(match &kind {
            SymbolKind::Function(t) => Some(t),
            SymbolKind::Predicate => None,
        });
        for t in mentioned {
            if t.0 >= self.types.len() {
                return Err(VocabularyError::UnknownType(format!("#{}", t.0)));
            }
        }
        let id = SymbolId(self.symbols.len());
        self.symbols.push(SymbolDecl {
            name: name.to_string(),
            args: args.to_vec(),
            kind,
        });
        self.symbol_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.type_index.get(name).copied()
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.symbol_index.get(name).copied()
    }

    pub fn type_decl(&self, t: TypeId) -> &TypeDecl {
        &self.types[t.0]
    }

    pub fn type_name(&self, t: TypeId) -> &str {
        &self.types[t.0].name
    }

    pub fn symbol(&self, s: SymbolId) -> &SymbolDecl {
        &self.symbols[s.0]
    }

    pub fn types(&self) -> impl Iterator<Item = (TypeId, &TypeDecl)> {
        self.types.iter().enumerate().map(|(i, t)| (TypeId(i), t))
    }

    pub fn symbols(&self) -> impl Iterator<Item = (SymbolId, &SymbolDecl)> {
        self.symbols.iter().enumerate().map(|(i, s)| (SymbolId(i), s))
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    /// True if some symbol signature mentions `t`.
    pub fn type_in_use(&self, t: TypeId) -> bool {
        self.symbols
            .iter()
            .any(|s| s.args.contains(&t) || s.result() == Some(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_is_builtin() {
        let v = Vocabulary::new();
        assert_eq!(v.type_id("int"), Some(INT));
        assert_eq!(v.int_range(), None);
    }

    #[test]
    fn duplicates_rejected() {
        let mut v = Vocabulary::new();
        let sw = v.add_type("software").unwrap();
        assert_eq!(
            v.add_type("software"),
            Err(VocabularyError::DuplicateType("software".into()))
        );
        v.add_predicate("Install", &[sw]).unwrap();
        assert_eq!(
            v.add_function("Install", &[sw], INT),
            Err(VocabularyError::DuplicateSymbol("Install".into()))
        );
        assert!(matches!(
            v.add_predicate("P", &[TypeId(9)]),
            Err(VocabularyError::UnknownType(_))
        ));
    }
}
