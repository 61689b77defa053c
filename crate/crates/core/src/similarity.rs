//! Comparing two pair families: the cosine of every version combination,
//! and their average over the combinations at least as good as the
//! original.

use serde::{Deserialize, Serialize};

use crate::pair::{PairFamily, WordPair};
use crate::projection::ProjectedSpace;

/// Anything that scores how similar the relations of two pairs are.
/// `None` means the comparison cannot be made (the question is skipped).
pub trait RelationalMeasure: Sync {
    fn similarity(&self, p1: &WordPair, p2: &WordPair) -> Option<f64>;
}

impl<F> RelationalMeasure for F
where
    F: Fn(&WordPair, &WordPair) -> Option<f64> + Sync,
{
    fn similarity(&self, p1: &WordPair, p2: &WordPair) -> Option<f64> {
        self(p1, p2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    pub left: WordPair,
    pub right: WordPair,
    pub cosine: f64,
    pub is_original: bool,
}

/// How the combination cosines are averaged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlternateMode {
    /// Only cosines at least as large as the original cosine.
    #[default]
    Better,
    /// Every combination.
    All,
}

/// Cosines for every pair of versions that both have a nonzero row.
/// Returns `None` (skip) when one family has no usable version at all.
pub fn evaluate_combinations(fam1: &PairFamily, fam2: &PairFamily, space: &ProjectedSpace) -> Option<Vec<Combination>> {
    let left: Vec<&WordPair> = fam1.versions().filter(|p| space.has_vector(p)).collect();
    let right: Vec<&WordPair> = fam2.versions().filter(|p| space.has_vector(p)).collect();
    if left.is_empty() || right.is_empty() {
        return None;
    }
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in &left {
        for r in &right {
            if let Some(cosine) = space.cosine(l, r) {
                out.push(Combination {
                    left: (*l).clone(),
                    right: (*r).clone(),
                    cosine,
                    is_original: *l == &fam1.original && *r == &fam2.original,
                });
            }
        }
    }
    Some(out)
}

/// The original combination's cosine, if it was computed.
pub fn original_cosine(combinations: &[Combination]) -> Option<f64> {
    combinations.iter().find(|c| c.is_original).map(|c| c.cosine)
}

/// Mean of the cosines selected by `mode`. Without an original cosine
/// every combination is averaged. `None` for an empty set.
pub fn relational_similarity(combinations: &[Combination], mode: AlternateMode) -> Option<f64> {
    let floor = match mode {
        AlternateMode::Better => original_cosine(combinations),
        AlternateMode::All => None,
    };
    let chosen: Vec<f64> = combinations
        .iter()
        .map(|c| c.cosine)
        .filter(|&c| floor.is_none_or(|f| c >= f))
        .collect();
    if chosen.is_empty() {
        return None;
    }
    Some(chosen.iter().sum::<f64>() / chosen.len() as f64)
}
