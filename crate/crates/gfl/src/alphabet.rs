//! Ranked alphabets of edge labels.
//!
//! Every edge of a graph carries a symbol from a ranked alphabet; the rank of
//! the symbol fixes how many nodes the edge attaches to. The reserved binary
//! symbol `_` stands for "unlabeled" and is used by corpora of plain digraphs.

use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Name of the reserved binary "invisible" label used for unlabeled graphs.
pub const INVISIBLE_LABEL: &str = "_";

/// An interned edge label. Resolve its name and rank through the [`Alphabet`]
/// that issued it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub(crate) u32);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A finite set of symbols, each with a fixed rank.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    ranks: Vec<usize>,
    index: HashMap<String, Symbol>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("symbol `{0}` is declared twice")]
    Duplicate(String),
    #[error("the invisible label `_` is binary, it cannot have rank {0}")]
    InvisibleRank(usize),
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The alphabet of unlabeled graphs: just the binary symbol `_`.
    pub fn unlabeled() -> Self {
        let mut a = Self::new();
        a.declare(INVISIBLE_LABEL, 2).expect("fresh alphabet");
        a
    }

    pub fn declare(&mut self, name: &str, rank: usize) -> Result<Symbol, AlphabetError> {
        if self.index.contains_key(name) {
            return Err(AlphabetError::Duplicate(name.to_owned()));
        }
        if name == INVISIBLE_LABEL && rank != 2 {
            return Err(AlphabetError::InvisibleRank(rank));
        }
        let sym = Symbol(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.ranks.push(rank);
        self.index.insert(name.to_owned(), sym);
        Ok(sym)
    }

    pub fn get(&self, name: &str) -> Option<Symbol> {
        self.index.get(name).copied()
    }

    pub fn rank(&self, sym: Symbol) -> usize {
        self.ranks[sym.index()]
    }

    pub fn name(&self, sym: Symbol) -> &str {
        &self.names[sym.index()]
    }

    pub fn invisible(&self) -> Option<Symbol> {
        self.get(INVISIBLE_LABEL)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.names.len() as u32).map(Symbol)
    }

    /// True if every symbol of `other` exists here with the same rank.
    pub fn contains_all(&self, other: &Alphabet) -> bool {
        other
            .symbols()
            .all(|s| self.get(other.name(s)).is_some_and(|t| self.rank(t) == other.rank(s)))
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for s in self.symbols() {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            write!(f, "{}/{}", self.name(s), self.rank(s))?;
        }
        Ok(())
    }
}
