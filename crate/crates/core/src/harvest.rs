//! Phrase collection for every pair and selection of the most widely
//! shared patterns.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::corpus::{Corpus, PhraseMatch};
use crate::pair::{Direction, WordPair};
use crate::pattern::{generate_patterns, DirectedPattern, Pattern};

/// Phrases of many pairs, stored once per unordered pair.
#[derive(Debug, Clone, Default)]
pub struct PhraseTable {
    max_phrase: usize,
    phrases: HashMap<WordPair, Vec<PhraseMatch>>,
}

impl PhraseTable {
    /// Enumerates phrases for every distinct pair, in parallel.
    pub fn collect<'a>(corpus: &Corpus, pairs: impl IntoIterator<Item = &'a WordPair>, max_phrase: usize) -> Self {
        let mut keys: Vec<WordPair> = pairs.into_iter().map(|p| p.canonical().0).collect();
        keys.sort();
        keys.dedup();
        let phrases = keys
            .into_par_iter()
            .map(|k| {
                let found = corpus.enumerate_phrases(&k, max_phrase);
                (k, found)
            })
            .collect();
        PhraseTable { max_phrase, phrases }
    }

    pub fn max_phrase(&self) -> usize {
        self.max_phrase
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Phrases of `pair`, each with its direction relative to `pair`.
    /// Empty if the pair was never collected.
    pub fn phrases<'s>(&'s self, pair: &WordPair) -> impl Iterator<Item = (Direction, &'s PhraseMatch)> + 's {
        let (key, orientation) = pair.canonical();
        self.phrases
            .get(&key)
            .into_iter()
            .flatten()
            .map(move |m| (m.direction.compose(orientation), m))
    }
}

/// Patterns selected for the matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Harvest<P> {
    /// Selected patterns, best first.
    pub patterns: Vec<P>,
    /// Number of pairs supporting each selected pattern.
    pub support: Vec<usize>,
    /// Distinct patterns seen before truncation.
    pub available: usize,
}

fn rank<P: Ord + Clone + std::hash::Hash + Send>(counts: HashMap<P, usize>, limit: usize) -> Harvest<P> {
    let available = counts.len();
    let mut ranked: Vec<(P, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(limit);
    if available < limit {
        log::warn!("only {available} distinct patterns available, {limit} requested");
    }
    let (patterns, support) = ranked.into_iter().unzip();
    Harvest {
        patterns,
        support,
        available,
    }
}

fn count_support<P, F>(pairs: &[WordPair], table: &PhraseTable, extract: F) -> HashMap<P, usize>
where
    P: Eq + std::hash::Hash + Send,
    F: Fn(Direction, &PhraseMatch) -> Vec<P> + Sync,
{
    let mut distinct: Vec<&WordPair> = pairs.iter().collect();
    distinct.sort();
    distinct.dedup();
    distinct
        .par_iter()
        .map(|p| {
            let mut seen = HashSet::new();
            for (dir, m) in table.phrases(p) {
                seen.extend(extract(dir, m));
            }
            seen
        })
        .fold(HashMap::new, |mut acc, seen| {
            for pat in seen {
                *acc.entry(pat).or_insert(0) += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        })
}

/// Scores each undirected pattern by the number of pairs with at least
/// one matching phrase and keeps the best `num_patterns`, ties broken by
/// pattern text.
pub fn harvest_patterns(pairs: &[WordPair], table: &PhraseTable, num_patterns: usize) -> Harvest<Pattern> {
    let counts = count_support(pairs, table, |_, m| generate_patterns(&m.intervening));
    rank(counts, num_patterns)
}

/// Like [`harvest_patterns`] but `word1 P word2` and `word2 P word1` are
/// scored separately, relative to the pair as given.
pub fn harvest_directed_patterns(
    pairs: &[WordPair],
    table: &PhraseTable,
    num_columns: usize,
) -> Harvest<DirectedPattern> {
    let counts = count_support(pairs, table, |dir, m| {
        generate_patterns(&m.intervening)
            .into_iter()
            .map(|pattern| DirectedPattern {
                pattern,
                direction: dir,
            })
            .collect()
    });
    rank(counts, num_columns)
}
