use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::ProbError;

/// A finite, ordered set of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, symbols: Vec<String>) -> Result<Self, ProbError> {
        let name = name.into();
        if symbols.is_empty() {
            return Err(ProbError::EmptyAlphabet { name });
        }
        let mut seen = HashSet::with_capacity(symbols.len());
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(ProbError::DuplicateLabel { name, label: s.clone() });
            }
        }
        Ok(Self { name, symbols })
    }

    /// Alphabet `{0, 1, ..., size-1}` with decimal labels.
    pub fn indexed(name: impl Into<String>, size: usize) -> Result<Self, ProbError> {
        Self::new(name, (0..size).map(|i| i.to_string()).collect())
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self::indexed(name, 2).expect("two distinct labels")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self { name: name.into(), symbols: self.symbols.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_duplicates() {
        assert!(matches!(Alphabet::new("x", vec![]), Err(ProbError::EmptyAlphabet { .. })));
        let dup = Alphabet::new("x", vec!["a".into(), "b".into(), "a".into()]);
        assert!(matches!(dup, Err(ProbError::DuplicateLabel { .. })));
    }

    #[test]
    fn lookup() {
        let a = Alphabet::new("y", vec!["lo".into(), "hi".into()]).unwrap();
        assert_eq!(a.size(), 2);
        assert_eq!(a.index_of("hi"), Some(1));
        assert_eq!(a.index_of("mid"), None);
    }
}
