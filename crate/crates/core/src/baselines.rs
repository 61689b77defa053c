//! Comparators: a vector space model over fixed joining terms, an
//! attributional analogy score, and co-occurrence frequency guessing.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{LraError, Result};
use crate::linalg::cosine;
use crate::pair::{Direction, WordPair};
use crate::pattern::{DirectedPattern, Pattern};
use crate::similarity::RelationalMeasure;
use crate::thesaurus::Thesaurus;

const DEFAULT_TERMS: &str = include_str!("../data/joining_terms.txt");

/// Connectives placed between the two words of a pair, one or two words each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoiningTerms {
    terms: Vec<Pattern>,
}

impl JoiningTerms {
    /// Parses one term per line; `#` comments and blank lines are ignored.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut terms: Vec<Pattern> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let words: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
            if words.len() > 2 {
                return Err(LraError::parse(
                    source_name,
                    i + 1,
                    format!("term `{line}` has more than two words"),
                ));
            }
            let term = Pattern::literal(&words).map_err(|e| LraError::parse(source_name, i + 1, e.to_string()))?;
            if terms.contains(&term) {
                return Err(LraError::parse(source_name, i + 1, format!("duplicate term `{line}`")));
            }
            terms.push(term);
        }
        if terms.is_empty() {
            return Err(LraError::parse(source_name, 0, "no joining terms"));
        }
        Ok(JoiningTerms { terms })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LraError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn terms(&self) -> &[Pattern] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Default for JoiningTerms {
    fn default() -> Self {
        JoiningTerms::parse(DEFAULT_TERMS, "joining_terms.txt").expect("bundled joining terms are valid")
    }
}

/// `log(count + 1)` for `X t Y` then `Y t X`, for each term `t` in order.
pub fn vsm_vector(pair: &WordPair, terms: &JoiningTerms, corpus: &Corpus) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * terms.len());
    for t in terms.terms() {
        for direction in [Direction::Forward, Direction::Reverse] {
            let pattern = DirectedPattern {
                pattern: t.clone(),
                direction,
            };
            let count = corpus.pattern_frequency(pair, &pattern, t.len() + 2);
            out.push((count as f64).ln_1p());
        }
    }
    out
}

/// Cosine of joining-term vectors; `None` if either vector is zero.
pub struct VsmMeasure<'a> {
    corpus: &'a Corpus,
    terms: JoiningTerms,
}

impl<'a> VsmMeasure<'a> {
    pub fn new(corpus: &'a Corpus, terms: JoiningTerms) -> Self {
        VsmMeasure { corpus, terms }
    }

    pub fn vector(&self, pair: &WordPair) -> Vec<f64> {
        vsm_vector(pair, &self.terms, self.corpus)
    }
}

impl RelationalMeasure for VsmMeasure<'_> {
    fn similarity(&self, p1: &WordPair, p2: &WordPair) -> Option<f64> {
        cosine(&self.vector(p1), &self.vector(p2)).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributionalScore {
    pub score: f64,
    /// Set when either word similarity was unavailable and counted as 0.
    pub missing: bool,
}

/// `(sim_a(A, C) + sim_a(B, D)) / 2`.
pub fn attributional_analogy_score(
    ab: &WordPair,
    cd: &WordPair,
    sim_a: impl Fn(&str, &str) -> Option<f64>,
) -> AttributionalScore {
    let left = sim_a(ab.first(), cd.first());
    let right = sim_a(ab.second(), cd.second());
    AttributionalScore {
        score: 0.5 * (left.unwrap_or(0.0) + right.unwrap_or(0.0)),
        missing: left.is_none() || right.is_none(),
    }
}

/// Thesaurus similarity, with identical words scoring 1.
pub fn thesaurus_similarity(thesaurus: &Thesaurus) -> impl Fn(&str, &str) -> Option<f64> + Sync + '_ {
    move |w1, w2| {
        if w1 == w2 {
            Some(1.0)
        } else {
            thesaurus.similarity(w1, w2)
        }
    }
}

/// The attributional score as a measure over pairs.
pub struct AttributionalMeasure<F> {
    sim_a: F,
}

impl<F: Fn(&str, &str) -> Option<f64> + Sync> AttributionalMeasure<F> {
    pub fn new(sim_a: F) -> Self {
        AttributionalMeasure { sim_a }
    }
}

impl<F: Fn(&str, &str) -> Option<f64> + Sync> RelationalMeasure for AttributionalMeasure<F> {
    fn similarity(&self, p1: &WordPair, p2: &WordPair) -> Option<f64> {
        Some(attributional_analogy_score(p1, p2, &self.sim_a).score)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyMode {
    Highest,
    Lowest,
}

/// Index of the highest (or lowest) frequency; ties go to the first.
/// `None` for an empty list.
pub fn guess_by_frequency(frequencies: &[u64], mode: FrequencyMode) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &f) in frequencies.iter().enumerate() {
        let better = match (best, mode) {
            (None, _) => true,
            (Some(b), FrequencyMode::Highest) => f > frequencies[b],
            (Some(b), FrequencyMode::Lowest) => f < frequencies[b],
        };
        if better {
            best = Some(i);
        }
    }
    best
}

/// Picks a choice by its co-occurrence frequency in the corpus.
pub fn frequency_guess(choices: &[WordPair], corpus: &Corpus, max_phrase: usize, mode: FrequencyMode) -> Option<usize> {
    let freqs: Vec<u64> = choices
        .iter()
        .map(|c| corpus.cooccurrence_frequency(c, max_phrase))
        .collect();
    guess_by_frequency(&freqs, mode)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::corpus::TokenizerConfig;

    fn pair(s: &str) -> WordPair {
        s.parse().unwrap()
    }

    #[test]
    fn default_list_has_64_terms() {
        let terms = JoiningTerms::default();
        assert_eq!(terms.len(), 64);
        assert_eq!(terms.terms()[0].to_string(), "of");
        let corpus = Corpus::from_texts(Vec::<&str>::new(), &TokenizerConfig::default());
        let v = vsm_vector(&pair("x:y"), &terms, &corpus);
        assert_eq!(v.len(), 128);
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn term_list_errors() {
        assert!(JoiningTerms::parse("of\nof\n", "t").is_err());
        assert!(JoiningTerms::parse("# nothing\n", "t").is_err());
        let err = JoiningTerms::parse("of\na b c\n", "terms.txt").unwrap_err().to_string();
        assert!(err.starts_with("terms.txt:2:"), "{err}");
    }

    #[test]
    fn vector_counts_phrases() {
        let terms = JoiningTerms::parse("of\nof the\nin\n", "t").unwrap();
        let corpus = Corpus::from_texts(
            ["cup of tea. cup of the tea. tea in cup. tea in cups. cup of tea"],
            &TokenizerConfig::default(),
        );
        let v = vsm_vector(&pair("cup:tea"), &terms, &corpus);
        let expected = [3f64.ln(), 0.0, 2f64.ln(), 0.0, 0.0, 3f64.ln()];
        for (a, b) in v.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn vsm_similarity() {
        let corpus = Corpus::from_texts(["cup of tea. glass of milk. red and blue"], &TokenizerConfig::default());
        let vsm = VsmMeasure::new(&corpus, JoiningTerms::default());
        assert_abs_diff_eq!(
            vsm.similarity(&pair("cup:tea"), &pair("cup:tea")).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            vsm.similarity(&pair("cup:tea"), &pair("glass:milk")).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(vsm.similarity(&pair("cup:tea"), &pair("red:blue")), Some(0.0));
        assert_eq!(vsm.similarity(&pair("cup:tea"), &pair("dog:cat")), None);
    }

    #[test]
    fn attributional_formula() {
        let one = |_: &str, _: &str| Some(1.0);
        assert_eq!(attributional_analogy_score(&pair("a:b"), &pair("c:d"), one).score, 1.0);
        let table = |x: &str, _: &str| Some(if x == "a" { 0.4 } else { 0.2 });
        assert_abs_diff_eq!(
            attributional_analogy_score(&pair("a:b"), &pair("c:d"), table).score,
            0.3,
            epsilon = 1e-15
        );
        let none = |_: &str, _: &str| None;
        let s = attributional_analogy_score(&pair("a:b"), &pair("c:d"), none);
        assert_eq!((s.score, s.missing), (0.0, true));
        let t = Thesaurus::parse("quart\tpint:0.21\nvolume\tcapacity:0.3\n", "t").unwrap();
        let s = attributional_analogy_score(&pair("quart:volume"), &pair("pint:capacity"), thesaurus_similarity(&t));
        assert_abs_diff_eq!(s.score, 0.255, epsilon = 1e-12);
        assert!(!s.missing);
    }

    #[test]
    fn frequency_guessing() {
        let f = [5, 9, 1, 1, 1];
        assert_eq!(guess_by_frequency(&f, FrequencyMode::Highest), Some(1));
        assert_eq!(guess_by_frequency(&f, FrequencyMode::Lowest), Some(2));
        assert_eq!(guess_by_frequency(&[], FrequencyMode::Lowest), None);
        let corpus = Corpus::from_texts(["a of b. c of d. c in d"], &TokenizerConfig::default());
        let choices = [pair("a:b"), pair("c:d"), pair("e:f")];
        assert_eq!(frequency_guess(&choices, &corpus, 5, FrequencyMode::Highest), Some(1));
        assert_eq!(frequency_guess(&choices, &corpus, 5, FrequencyMode::Lowest), Some(2));
    }

    proptest! {
        #[test]
        fn vsm_vectors_are_monotone(extra in 0usize..5, base in 1usize..5) {
            let text = |n: usize| vec!["cup of tea"; n].join(". ");
            let terms = JoiningTerms::parse("of\n", "t").unwrap();
            let small = Corpus::from_texts([text(base)], &TokenizerConfig::default());
            let large = Corpus::from_texts([text(base + extra)], &TokenizerConfig::default());
            let a = vsm_vector(&pair("cup:tea"), &terms, &small);
            let b = vsm_vector(&pair("cup:tea"), &terms, &large);
            prop_assert!(a.iter().zip(&b).all(|(x, y)| *x >= 0.0 && x <= y));
        }

        #[test]
        fn attributional_is_symmetric_in_its_terms(x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let f = |a: &str, _: &str| Some(if a == "a" { x } else { y });
            let g = |a: &str, _: &str| Some(if a == "a" { y } else { x });
            let s1 = attributional_analogy_score(&pair("a:b"), &pair("c:d"), f).score;
            let s2 = attributional_analogy_score(&pair("a:b"), &pair("c:d"), g).score;
            prop_assert!((s1 - s2).abs() < 1e-15);
        }
    }
}
