//! A generator of corpora with planted relations, for end-to-end tests.
//!
//! Each relation has a handful of connecting phrases. Every word pair is
//! written into sentences with phrases of its relation, so the correct
//! answer of each generated analogy question is known. Some original pairs
//! never co-occur; only their thesaurus synonyms carry the relation, which
//! is what alternates are for. Pairs also appear with joining words that
//! say nothing about the relation.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LraError, Result};
use crate::eval::nm::{format_examples, NounModifierExample};
use crate::eval::sat::{format_questions, AnalogyQuestion};
use crate::pair::WordPair;

/// A planted relation: its class label and its connecting phrases, each
/// at most three words so that it fits the default phrase length.
pub struct Relation {
    pub label: &'static str,
    /// Phrases for `A P B`.
    pub forward: &'static [&'static str],
    /// Phrases for `B P A`.
    pub reverse: &'static [&'static str],
}

pub const RELATIONS: [Relation; 5] = [
    Relation {
        label: "part",
        forward: &["is part of", "fits inside the", "belongs to the"],
        reverse: &["consists partly of", "holds one"],
    },
    Relation {
        label: "cs",
        forward: &["often leads to", "can bring about", "causes the"],
        reverse: &["results from", "is brought by"],
    },
    Relation {
        label: "loc",
        forward: &["is found in", "lives near the", "is located at"],
        reverse: &["is home to", "houses many"],
    },
    Relation {
        label: "mat",
        forward: &["is made of", "is carved from", "is built out of"],
        reverse: &["is used in", "goes into making"],
    },
    Relation {
        label: "tat",
        forward: &["happens during", "takes place every", "occurs at"],
        reverse: &["is time for", "brings the"],
    },
];

const NOISE: [&str; 6] = ["and", "or", "with", "of the", "for", "near"];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub questions: usize,
    pub noun_modifiers: usize,
    /// Chance that an original pair never co-occurs.
    pub sparse_fraction: f64,
    /// Relation sentences per pair version, inclusive range.
    pub sentences: (usize, usize),
    /// Chance that a relation sentence uses another relation's phrase.
    pub confusion: f64,
    /// Joining-word sentences per pair version.
    pub noise_sentences: usize,
    /// True synonyms per word (they co-occur with the partner word).
    pub synonyms: usize,
    /// Unrelated thesaurus neighbours per word.
    pub distractors: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            questions: 40,
            noun_modifiers: 0,
            sparse_fraction: 0.3,
            sentences: (3, 6),
            confusion: 0.1,
            noise_sentences: 2,
            synonyms: 3,
            distractors: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSuite {
    pub documents: Vec<String>,
    pub thesaurus: String,
    pub questions: Vec<AnalogyQuestion>,
    pub noun_modifiers: Vec<NounModifierExample>,
    /// Relation index of every generated original pair.
    pub relations: Vec<(WordPair, usize)>,
}

impl SyntheticSuite {
    /// Writes `corpus/doc_NN.txt`, `thesaurus.txt`, `sat.txt` and `nm.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let corpus = dir.join("corpus");
        fs::create_dir_all(&corpus).map_err(|e| LraError::io(&corpus, e))?;
        let mut files: Vec<(std::path::PathBuf, String)> = self
            .documents
            .iter()
            .enumerate()
            .map(|(i, d)| (corpus.join(format!("doc_{i:02}.txt")), d.clone()))
            .collect();
        files.push((dir.join("thesaurus.txt"), self.thesaurus.clone()));
        files.push((dir.join("sat.txt"), format_questions(&self.questions)));
        files.push((dir.join("nm.csv"), format_examples(&self.noun_modifiers)));
        for (path, text) in files {
            fs::write(&path, text).map_err(|e| LraError::io(&path, e))?;
        }
        Ok(())
    }
}

struct Generator {
    rng: ChaCha8Rng,
    cfg: SynthConfig,
    used: HashSet<String>,
    sentences: Vec<String>,
    thesaurus: Vec<String>,
    relations: Vec<(WordPair, usize)>,
}

impl Generator {
    /// A fresh pseudo-word of three consonant-vowel syllables. Every word
    /// ends in a vowel, so no word is another word plus an ignored suffix.
    fn word(&mut self) -> String {
        const C: &[u8] = b"bdfgklmnprstvz";
        const V: &[u8] = b"aeiou";
        loop {
            let w: String = (0..3)
                .flat_map(|_| [C[self.rng.gen_range(0..C.len())], V[self.rng.gen_range(0..V.len())]])
                .map(char::from)
                .collect();
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn phrase(&mut self, relation: usize, a: &str, b: &str) -> String {
        let r = if self.rng.gen_bool(self.cfg.confusion) {
            self.rng.gen_range(0..RELATIONS.len())
        } else {
            relation
        };
        let rel = &RELATIONS[r];
        if self.rng.gen_bool(0.7) {
            let p = rel.forward[self.rng.gen_range(0..rel.forward.len())];
            format!("{a} {p} {b}")
        } else {
            let p = rel.reverse[self.rng.gen_range(0..rel.reverse.len())];
            format!("{b} {p} {a}")
        }
    }

    fn write_version(&mut self, relation: usize, a: &str, b: &str) {
        let (lo, hi) = self.cfg.sentences;
        for _ in 0..self.rng.gen_range(lo..=hi) {
            let s = self.phrase(relation, a, b);
            self.sentences.push(s);
        }
        for _ in 0..self.cfg.noise_sentences {
            let t = NOISE[self.rng.gen_range(0..NOISE.len())];
            let s = if self.rng.gen_bool(0.5) {
                format!("{a} {t} {b}")
            } else {
                format!("{b} {t} {a}")
            };
            self.sentences.push(s);
        }
    }

    /// Thesaurus line for `word`: true synonyms mixed with distractors,
    /// scores descending.
    fn entry(&mut self, word: &str, synonyms: &[String]) {
        let mut neighbours: Vec<String> = synonyms.to_vec();
        for _ in 0..self.cfg.distractors {
            let w = self.word();
            neighbours.push(w);
        }
        neighbours.shuffle(&mut self.rng);
        let mut scores: Vec<f64> = (0..neighbours.len()).map(|_| self.rng.gen_range(0.05..0.30)).collect();
        scores.sort_by(|a, b| b.total_cmp(a));
        let list: Vec<String> = neighbours
            .iter()
            .zip(&scores)
            .map(|(w, s)| format!("{w}:{s:.3}"))
            .collect();
        self.thesaurus.push(format!("{word}\t{}", list.join(",")));
    }

    /// A new pair of the relation with its synonyms and sentences.
    fn pair(&mut self, relation: usize) -> WordPair {
        let (a, b) = (self.word(), self.word());
        let syn_a: Vec<String> = (0..self.cfg.synonyms).map(|_| self.word()).collect();
        let syn_b: Vec<String> = (0..self.cfg.synonyms).map(|_| self.word()).collect();
        if !self.rng.gen_bool(self.cfg.sparse_fraction) {
            self.write_version(relation, &a, &b);
        }
        for s in &syn_a {
            self.write_version(relation, s, &b);
        }
        for s in &syn_b {
            self.write_version(relation, &a, s);
        }
        self.entry(&a, &syn_a);
        self.entry(&b, &syn_b);
        let pair = WordPair::new(&a, &b).expect("generated words are distinct");
        self.relations.push((pair.clone(), relation));
        pair
    }
}

/// Generates a corpus, thesaurus, analogy questions and noun-modifier
/// examples. The same config always gives the same suite.
pub fn generate(cfg: &SynthConfig) -> SyntheticSuite {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        cfg: cfg.clone(),
        used: HashSet::new(),
        sentences: Vec::new(),
        thesaurus: Vec::new(),
        relations: Vec::new(),
    };
    let mut questions = Vec::new();
    for _ in 0..cfg.questions {
        let relation = g.rng.gen_range(0..RELATIONS.len());
        let stem = g.pair(relation);
        let correct = g.pair(relation);
        let mut choices: Vec<WordPair> = (0..RELATIONS.len())
            .filter(|&r| r != relation)
            .map(|r| g.pair(r))
            .collect();
        let answer = g.rng.gen_range(0..5);
        choices.insert(answer, correct);
        questions.push(AnalogyQuestion::new(stem, choices, answer).expect("five choices"));
    }
    let mut noun_modifiers = Vec::new();
    for i in 0..cfg.noun_modifiers {
        let relation = i % RELATIONS.len();
        let pair = g.pair(relation);
        let ex = NounModifierExample::new(pair.first(), pair.second(), RELATIONS[relation].label).expect("known label");
        noun_modifiers.push(ex);
    }
    noun_modifiers.shuffle(&mut g.rng);

    let mut sentences = std::mem::take(&mut g.sentences);
    sentences.shuffle(&mut g.rng);
    let per_doc = 200;
    let documents = sentences.chunks(per_doc).map(|c| c.join(". ") + ".\n").collect();
    SyntheticSuite {
        documents,
        thesaurus: g.thesaurus.join("\n") + "\n",
        questions,
        noun_modifiers,
        relations: g.relations,
    }
}
