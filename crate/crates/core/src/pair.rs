//! Word pairs and the families of alternates built around them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LraError, Result};

/// An ordered pair of lowercase words, `a:b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WordPair {
    a: String,
    b: String,
}

impl WordPair {
    /// Builds a pair, lowercasing both members.
    ///
    /// Members must be nonempty, free of whitespace and `:`, and distinct.
    pub fn new(a: &str, b: &str) -> Result<Self> {
        let a = a.trim().to_lowercase();
        let b = b.trim().to_lowercase();
        let bad = |w: &str| w.is_empty() || w.chars().any(|c| c.is_whitespace() || c == ':');
        if bad(&a) || bad(&b) || a == b {
            return Err(LraError::InvalidPair(format!("{a}:{b}")));
        }
        Ok(WordPair { a, b })
    }

    pub fn first(&self) -> &str {
        &self.a
    }

    pub fn second(&self) -> &str {
        &self.b
    }

    /// `b:a`.
    pub fn reversed(&self) -> WordPair {
        WordPair {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    /// The orientation used as a shared key for a pair and its reverse.
    pub fn canonical(&self) -> (WordPair, Direction) {
        if self.a <= self.b {
            (self.clone(), Direction::Forward)
        } else {
            (self.reversed(), Direction::Reverse)
        }
    }
}

impl fmt::Display for WordPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.a, self.b)
    }
}

impl FromStr for WordPair {
    type Err = LraError;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(':').ok_or_else(|| LraError::InvalidPair(s.to_string()))?;
        WordPair::new(a, b)
    }
}

/// Parses a pair list: one `a:b` per line, `#` comments and blank lines
/// ignored. Anything after the first whitespace-separated field is ignored.
pub fn parse_pair_list(text: &str, source_name: &str) -> Result<Vec<WordPair>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(n, l)| {
            let field = l.split_whitespace().next().unwrap_or("");
            field
                .parse()
                .map_err(|_| LraError::parse(source_name, n, format!("expected `word:word`, got `{field}`")))
        })
        .collect()
}

pub fn load_pair_list(path: &std::path::Path) -> Result<Vec<WordPair>> {
    let text = std::fs::read_to_string(path).map_err(|e| LraError::io(path, e))?;
    parse_pair_list(&text, &path.display().to_string())
}

/// Which member of a pair comes first in a phrase or pattern.
///
/// `Forward` is `word1 P word2`, `Reverse` is `word2 P word1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }

    /// Composes two orientations: flipping twice is the identity.
    pub fn compose(self, other: Direction) -> Direction {
        if self == other {
            Direction::Forward
        } else {
            Direction::Reverse
        }
    }
}

/// An alternate pair together with the evidence that selected it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternate {
    pub pair: WordPair,
    /// Thesaurus similarity of the substituted word to the word it replaced.
    pub similarity: f64,
    /// Co-occurrence frequency of the alternate in the corpus.
    pub frequency: u64,
}

/// An original pair plus the alternates that survived filtering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFamily {
    pub original: WordPair,
    pub original_frequency: u64,
    pub alternates: Vec<Alternate>,
}

impl PairFamily {
    pub fn singleton(original: WordPair) -> Self {
        PairFamily {
            original,
            original_frequency: 0,
            alternates: Vec::new(),
        }
    }

    /// The original first, then alternates in rank order.
    pub fn versions(&self) -> impl Iterator<Item = &WordPair> {
        std::iter::once(&self.original).chain(self.alternates.iter().map(|a| &a.pair))
    }

    pub fn len(&self) -> usize {
        1 + self.alternates.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same family with every member reversed, order preserved.
    pub fn reversed(&self) -> PairFamily {
        PairFamily {
            original: self.original.reversed(),
            original_frequency: self.original_frequency,
            alternates: self
                .alternates
                .iter()
                .map(|a| Alternate {
                    pair: a.pair.reversed(),
                    ..a.clone()
                })
                .collect(),
        }
    }
}
