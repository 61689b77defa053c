//! Alternate pairs: substitute thesaurus neighbours for one member of a
//! pair, then keep the alternates that co-occur most often in the corpus.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::pair::{Alternate, PairFamily, WordPair};
use crate::thesaurus::Thesaurus;

/// A candidate alternate before frequency filtering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub pair: WordPair,
    pub similarity: f64,
}

/// `a′:b` for each of the top `num_sim` neighbours of `a`, then `a:b′`
/// for those of `b`. Duplicates and invalid pairs are dropped.
pub fn find_alternates(pair: &WordPair, thesaurus: &Thesaurus, num_sim: usize) -> Vec<Candidate> {
    let (a, b) = (pair.first(), pair.second());
    let left = thesaurus
        .top_similar(a, num_sim)
        .into_iter()
        .filter_map(|(w, s)| WordPair::new(&w, b).ok().map(|p| (p, s)));
    let right = thesaurus
        .top_similar(b, num_sim)
        .into_iter()
        .filter_map(|(w, s)| WordPair::new(a, &w).ok().map(|p| (p, s)));
    let mut out: Vec<Candidate> = Vec::new();
    for (p, similarity) in left.chain(right) {
        if &p != pair && !out.iter().any(|c| c.pair == p) {
            out.push(Candidate { pair: p, similarity });
        }
    }
    out
}

/// Ranks candidates by frequency (descending), then thesaurus similarity
/// (descending), then pair text, and keeps the first `num_filter`.
pub fn filter_alternates_by(
    original: &WordPair,
    candidates: &[Candidate],
    frequency: impl Fn(&WordPair) -> u64,
    num_filter: usize,
) -> PairFamily {
    let mut ranked: Vec<Alternate> = candidates
        .iter()
        .map(|c| Alternate {
            pair: c.pair.clone(),
            similarity: c.similarity,
            frequency: frequency(&c.pair),
        })
        .collect();
    ranked.sort_by(|x, y| {
        y.frequency
            .cmp(&x.frequency)
            .then_with(|| y.similarity.partial_cmp(&x.similarity).unwrap_or(Ordering::Equal))
            .then_with(|| x.pair.cmp(&y.pair))
    });
    ranked.truncate(num_filter);
    PairFamily {
        original: original.clone(),
        original_frequency: frequency(original),
        alternates: ranked,
    }
}

/// [`filter_alternates_by`] with frequencies from the corpus.
pub fn filter_alternates(
    original: &WordPair,
    candidates: &[Candidate],
    corpus: &Corpus,
    max_phrase: usize,
    num_filter: usize,
) -> PairFamily {
    filter_alternates_by(
        original,
        candidates,
        |p| corpus.cooccurrence_frequency(p, max_phrase),
        num_filter,
    )
}
