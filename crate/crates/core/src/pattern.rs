//! Intervening-word patterns with one-word wildcards.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LraError, Result};
use crate::pair::Direction;

/// One position of a pattern.
///
/// `Wildcard` sorts before any literal, so derived ordering on a slot
/// sequence equals lexicographic ordering of the rendered pattern text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    Wildcard,
    Word(String),
}

/// The words between the two members of a pair, some replaced by `*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    slots: Vec<Slot>,
}

impl Pattern {
    pub fn new(slots: Vec<Slot>) -> Result<Self> {
        if slots.is_empty() {
            return Err(LraError::InvalidParameter("a pattern needs at least one slot".into()));
        }
        Ok(Pattern { slots })
    }

    /// A pattern with every slot literal.
    pub fn literal<S: AsRef<str>>(words: &[S]) -> Result<Self> {
        Pattern::new(words.iter().map(|w| Slot::Word(w.as_ref().to_string())).collect())
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// A wildcard matches exactly one word.
    pub fn matches<S: AsRef<str>>(&self, words: &[S]) -> bool {
        self.slots.len() == words.len()
            && self.slots.iter().zip(words).all(|(slot, w)| match slot {
                Slot::Wildcard => true,
                Slot::Word(lit) => lit == w.as_ref(),
            })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, slot) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match slot {
                Slot::Wildcard => f.write_str("*")?,
                Slot::Word(w) => f.write_str(w)?,
            }
        }
        Ok(())
    }
}

impl FromStr for Pattern {
    type Err = LraError;

    fn from_str(s: &str) -> Result<Self> {
        Pattern::new(
            s.split_whitespace()
                .map(|t| {
                    if t == "*" {
                        Slot::Wildcard
                    } else {
                        Slot::Word(t.to_string())
                    }
                })
                .collect(),
        )
    }
}

/// A pattern bound to an order of the pair members: one matrix column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirectedPattern {
    pub pattern: Pattern,
    pub direction: Direction,
}

impl fmt::Display for DirectedPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::Forward => write!(f, "word1 {} word2", self.pattern),
            Direction::Reverse => write!(f, "word2 {} word1", self.pattern),
        }
    }
}

/// All `2^n` patterns obtained by replacing any subset of the `n`
/// intervening words with wildcards, in mask order (bit `i` set means
/// slot `i` is a wildcard).
pub fn generate_patterns<S: AsRef<str>>(intervening: &[S]) -> Vec<Pattern> {
    let n = intervening.len();
    assert!(n > 0 && n < 32, "intervening word count out of range: {n}");
    (0u32..(1 << n))
        .map(|mask| Pattern {
            slots: intervening
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    if mask & (1 << i) != 0 {
                        Slot::Wildcard
                    } else {
                        Slot::Word(w.as_ref().to_string())
                    }
                })
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use proptest::prelude::*;

    use super::*;

    #[test]
    fn phrase_lengths_give_power_of_two_patterns() {
        assert_eq!(generate_patterns(&["in"]).len(), 2);
        assert_eq!(generate_patterns(&["of", "spray"]).len(), 4);
        assert_eq!(generate_patterns(&["being", "about", "two"]).len(), 8);
    }

    #[test]
    fn wildcard_arity() {
        let one: Pattern = "*".parse().unwrap();
        let two: Pattern = "* *".parse().unwrap();
        assert!(one.matches(&["of"]));
        assert!(!two.matches(&["of"]));
        assert!("of *".parse::<Pattern>().unwrap().matches(&["of", "milk"]));
    }

    #[test]
    fn ordering_is_text_order() {
        let mut pats: Vec<Pattern> = ["of", "* of", "of *", "in", "* *", "of the"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        pats.sort();
        let text: Vec<String> = pats.iter().map(|p| p.to_string()).collect();
        let mut expected = text.clone();
        expected.sort();
        assert_eq!(text, expected);
    }

    #[test]
    fn display_round_trips() {
        let p: Pattern = "of * the".parse().unwrap();
        assert_eq!(p.to_string(), "of * the");
        assert!("".parse::<Pattern>().is_err());
    }

    proptest! {
        #[test]
        fn generated_patterns_are_distinct_and_match(words in proptest::collection::vec("[a-z]{1,6}", 1..=3)) {
            let pats = generate_patterns(&words);
            let distinct: HashSet<_> = pats.iter().collect();
            prop_assert_eq!(distinct.len(), 1 << words.len());
            prop_assert!(pats.iter().all(|p| p.matches(&words)));
        }
    }
}
