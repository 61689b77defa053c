//! A pregenerated word-similarity thesaurus.
//!
//! File format, one entry per line:
//!
//! ```text
//! # comment
//! quart<TAB>pint:0.210,gallon:0.159,liter:0.122
//! ```
//!
//! A head word may carry a part-of-speech suffix (`quart/N`). Entries for
//! the same word under different tags are merged, keeping the best score
//! of each neighbour.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{LraError, Result};

/// A neighbour as it appeared in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbour {
    /// Raw spelling from the file, before lowercasing.
    pub raw: String,
    pub word: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThesaurusEntry {
    pub word: String,
    /// Sorted by non-increasing score; ties keep file order.
    pub neighbours: Vec<Neighbour>,
}

#[derive(Debug, Clone, Default)]
pub struct Thesaurus {
    entries: HashMap<String, ThesaurusEntry>,
    content_id: String,
}

/// True for words that make poor substitutes: hyphenated, three characters
/// or fewer, containing non-alphabetic characters or whitespace, or
/// capitalized.
pub fn is_unusual(word: &str) -> bool {
    word.contains('-')
        || word.chars().count() <= 3
        || word.chars().any(|c| !c.is_alphabetic())
        || word.chars().next().is_some_and(char::is_uppercase)
}

impl Thesaurus {
    pub fn load(path: &Path) -> Result<Thesaurus> {
        let text = fs::read_to_string(path).map_err(|e| LraError::io(path, e))?;
        Thesaurus::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Thesaurus> {
        let mut entries: HashMap<String, ThesaurusEntry> = HashMap::new();
        let mut seen_heads: HashMap<(String, Option<String>), usize> = HashMap::new();

        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |msg: String| LraError::parse(source_name, lineno, msg);
            let (head, rest) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `headword<TAB>neighbour:score,...`".into()))?;
            let head = head.trim();
            let (word, tag) = match head.rsplit_once('/') {
                Some((w, t)) if !t.is_empty() => (w, Some(t.to_string())),
                _ => (head, None),
            };
            if word.is_empty() {
                return Err(err("empty head word".into()));
            }
            let word = word.to_lowercase();
            if let Some(prev) = seen_heads.insert((word.clone(), tag.clone()), lineno) {
                return Err(err(format!("duplicate head word `{head}` (first seen on line {prev})")));
            }

            let mut neighbours = Vec::new();
            for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (raw, score) = item
                    .rsplit_once(':')
                    .ok_or_else(|| err(format!("expected `neighbour:score`, got `{item}`")))?;
                let score: f64 = score
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad score in `{item}`")))?;
                if !(score > 0.0 && score <= 1.0) {
                    return Err(err(format!("score {score} outside (0, 1]")));
                }
                let raw = raw.trim().to_string();
                let lower = raw.to_lowercase();
                if lower == word || raw.is_empty() {
                    continue;
                }
                neighbours.push(Neighbour {
                    raw,
                    word: lower,
                    score,
                });
            }
            if neighbours.windows(2).any(|w| w[0].score < w[1].score) {
                log::warn!("{source_name}:{lineno}: neighbours of `{word}` not sorted by score; re-sorting");
            }

            match entries.entry(word.clone()) {
                Entry::Vacant(slot) => {
                    slot.insert(ThesaurusEntry { word, neighbours });
                }
                Entry::Occupied(mut slot) => {
                    slot.get_mut().neighbours.extend(neighbours);
                }
            }
        }

        for entry in entries.values_mut() {
            entry.neighbours = normalize(std::mem::take(&mut entry.neighbours));
        }

        let content_id = hex::encode(Sha256::digest(text.as_bytes()));
        Ok(Thesaurus { entries, content_id })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, word: &str) -> Option<&ThesaurusEntry> {
        self.entries.get(word)
    }

    /// The first `num_sim` neighbours that are not unusual.
    pub fn top_similar(&self, word: &str, num_sim: usize) -> Vec<(String, f64)> {
        self.entries
            .get(word)
            .map(|e| {
                e.neighbours
                    .iter()
                    .filter(|n| !is_unusual(&n.raw))
                    .take(num_sim)
                    .map(|n| (n.word.clone(), n.score))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Score of `other` in the neighbour list of `word`, either direction.
    pub fn similarity(&self, word: &str, other: &str) -> Option<f64> {
        let lookup = |h: &str, n: &str| {
            self.entries
                .get(h)
                .and_then(|e| e.neighbours.iter().find(|x| x.word == n).map(|x| x.score))
        };
        match (lookup(word, other), lookup(other, word)) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        }
    }

    /// SHA-256 of the source text.
    pub fn content_id(&self) -> &str {
        &self.content_id
    }
}

/// Merges duplicate neighbours by max score and sorts by descending score,
/// leaving tied scores in first-seen order.
fn normalize(list: Vec<Neighbour>) -> Vec<Neighbour> {
    let mut merged: Vec<Neighbour> = Vec::with_capacity(list.len());
    let mut pos: HashMap<String, usize> = HashMap::new();
    for n in list {
        match pos.get(&n.word) {
            Some(&i) => {
                if n.score > merged[i].score {
                    merged[i].score = n.score;
                }
            }
            None => {
                pos.insert(n.word.clone(), merged.len());
                merged.push(n);
            }
        }
    }
    merged.sort_by(|a, b| b.score.total_cmp(&a.score));
    merged
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Similarity lists for quart and volume.
    pub(crate) const QUART_VOLUME: &str = "\
# word<TAB>neighbour:score,...
quart\tpint:0.210,gallon:0.159,liter:0.122,squirt:0.084,pail:0.084,vial:0.084,pumping:0.073,ounce:0.071,spoonful:0.070,tablespoon:0.069
volume\tturnover:0.229,output:0.225,export:0.206,value:0.203,import:0.186,revenue:0.185,sale:0.169,investment:0.161,earnings:0.156,profit:0.156
";

    #[test]
    fn loads_quart_entry() {
        let t = Thesaurus::parse("quart\tpint:0.210,gallon:0.159,liter:0.122\n", "t").unwrap();
        let e = t.entry("quart").unwrap();
        assert_eq!(e.neighbours.len(), 3);
        assert_eq!(e.neighbours[0].word, "pint");
        assert_eq!(e.neighbours[2].score, 0.122);
    }

    #[test]
    fn top_similar_quart() {
        let t = Thesaurus::parse(QUART_VOLUME, "t").unwrap();
        let words: Vec<String> = t.top_similar("quart", 10).into_iter().map(|(w, _)| w).collect();
        assert_eq!(
            words,
            [
                "pint",
                "gallon",
                "liter",
                "squirt",
                "pail",
                "vial",
                "pumping",
                "ounce",
                "spoonful",
                "tablespoon"
            ]
        );
        let two: Vec<String> = t.top_similar("quart", 2).into_iter().map(|(w, _)| w).collect();
        assert_eq!(two, ["pint", "gallon"]);
        assert!(t.top_similar("zzz", 10).is_empty());
    }

    #[test]
    fn empty_file() {
        let t = Thesaurus::parse("", "t").unwrap();
        assert!(t.is_empty());
        assert!(t.top_similar("quart", 10).is_empty());
    }

    #[test]
    fn unsorted_scores_are_resorted() {
        let t = Thesaurus::parse("quart\tliter:0.122,pint:0.210\n", "t").unwrap();
        let scores: Vec<f64> = t.top_similar("quart", 5).into_iter().map(|(_, s)| s).collect();
        assert_eq!(scores, [0.210, 0.122]);
    }

    #[test]
    fn unusual_words() {
        assert!(is_unusual("ice"));
        assert!(!is_unusual("gallon"));
        assert!(is_unusual("new york"));
        assert!(is_unusual("half-pint"));
        assert!(is_unusual("pint2"));
        assert!(is_unusual("Boston"));
    }

    #[test]
    fn unusual_neighbours_are_skipped() {
        let t = Thesaurus::parse("quart\tcup:0.5,Litre:0.4,half-pint:0.3,gallon:0.2,new york:0.1\n", "t").unwrap();
        let words: Vec<String> = t.top_similar("quart", 10).into_iter().map(|(w, _)| w).collect();
        assert_eq!(words, ["gallon"]);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = Thesaurus::parse("# c\nquart pint:0.2\n", "lin.txt").unwrap_err();
        assert!(err.to_string().starts_with("lin.txt:2:"), "{err}");
        let err = Thesaurus::parse("quart\tpint=0.2\n", "lin.txt").unwrap_err();
        assert!(err.to_string().starts_with("lin.txt:1:"));
        let err = Thesaurus::parse("quart\tpint:1.5\n", "lin.txt").unwrap_err();
        assert!(err.to_string().contains("outside"));
    }

    #[test]
    fn duplicate_head_is_an_error_but_pos_sections_merge() {
        assert!(Thesaurus::parse("quart\tpint:0.2\nquart\tcup:0.1\n", "t").is_err());
        let t = Thesaurus::parse("quart/N\tpint:0.2,gallon:0.1\nquart/V\tgallon:0.3\n", "t").unwrap();
        let list = t.top_similar("quart", 5);
        assert_eq!(list, vec![("gallon".to_string(), 0.3), ("pint".to_string(), 0.2)]);
    }

    #[test]
    fn head_word_never_its_own_neighbour() {
        let t = Thesaurus::parse("quart\tquart:0.9,pint:0.2\n", "t").unwrap();
        assert_eq!(t.top_similar("quart", 5).len(), 1);
    }

    #[test]
    fn symmetric_similarity_lookup() {
        let t = Thesaurus::parse(QUART_VOLUME, "t").unwrap();
        assert_eq!(t.similarity("quart", "gallon"), Some(0.159));
        assert_eq!(t.similarity("gallon", "quart"), Some(0.159));
        assert_eq!(t.similarity("gallon", "mile"), None);
    }

    #[test]
    fn determinism() {
        let a = Thesaurus::parse(QUART_VOLUME, "t").unwrap();
        let b = Thesaurus::parse(QUART_VOLUME, "t").unwrap();
        assert_eq!(a.top_similar("volume", 10), b.top_similar("volume", 10));
        assert_eq!(a.content_id(), b.content_id());
    }
}
