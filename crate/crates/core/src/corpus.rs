//! Corpus ingestion and exact-count phrase queries.
//!
//! Text is split into documents, documents into sentence segments, and
//! segments into lowercase alphabetic tokens. A phrase is a window inside a
//! single segment that starts with one member of a word pair, ends with the
//! other, and has at least one word in between. Pair members are matched
//! ignoring a fixed set of suffixes; intervening words are matched exactly.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::error::{LraError, Result};
use crate::pair::{Direction, WordPair};
use crate::pattern::DirectedPattern;

/// Suffixes ignored when matching a pair member against a corpus token.
pub const IGNORED_SUFFIXES: [&str; 7] = ["s", "es", "ed", "ing", "ly", "er", "ers"];

const BOUNDARY: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    /// Treat each nonempty line of a file as its own document.
    pub line_documents: bool,
    /// End a segment at `.`, `!` and `?` so that phrases never cross sentences.
    pub sentence_boundaries: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            line_documents: false,
            sentence_boundaries: true,
        }
    }
}

/// Splits text into segments of lowercase alphabetic tokens.
///
/// Any non-alphabetic character separates tokens; sentence terminators
/// additionally close the current segment when enabled.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<Vec<String>> {
    let mut segments = Vec::new();
    let mut segment: Vec<String> = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphabetic() {
            word.extend(c.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            segment.push(std::mem::take(&mut word));
        }
        if config.sentence_boundaries && matches!(c, '.' | '!' | '?') && !segment.is_empty() {
            segments.push(std::mem::take(&mut segment));
        }
    }
    if !word.is_empty() {
        segment.push(word);
    }
    if !segment.is_empty() {
        segments.push(segment);
    }
    segments
}

/// One distinct phrase realization of a pair, with its occurrence count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhraseMatch {
    /// Surface form of the first word as it appears in the corpus.
    pub first: String,
    pub intervening: Vec<String>,
    pub last: String,
    /// `Forward` when the queried pair's first member opens the phrase.
    pub direction: Direction,
    pub count: u64,
}

impl PhraseMatch {
    /// Total words including both pair members.
    pub fn len(&self) -> usize {
        self.intervening.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// An immutable positional index over a tokenized corpus.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    /// Token ids of every segment, separated by `BOUNDARY`.
    tokens: Vec<u32>,
    documents: Vec<Range<usize>>,
    postings: Vec<Vec<u32>>,
    token_count: usize,
}

#[derive(Serialize, Deserialize)]
struct StoredCorpus {
    vocab: Vec<String>,
    tokens: Vec<u32>,
    documents: Vec<(usize, usize)>,
}

/// Accumulates documents and freezes them into a [`Corpus`].
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    config: TokenizerConfig,
    corpus: Corpus,
}

impl CorpusBuilder {
    pub fn new(config: TokenizerConfig) -> Self {
        CorpusBuilder {
            config,
            corpus: Corpus::default(),
        }
    }

    pub fn add_text(&mut self, text: &str) {
        if self.config.line_documents {
            for line in text.lines() {
                self.add_document(line);
            }
        } else {
            self.add_document(text);
        }
    }

    fn add_document(&mut self, text: &str) {
        let segments = tokenize(text, &self.config);
        if segments.is_empty() {
            return;
        }
        let c = &mut self.corpus;
        let start = c.tokens.len();
        for seg in segments {
            for tok in seg {
                let id = match c.ids.get(&tok) {
                    Some(&id) => id,
                    None => {
                        let id = c.vocab.len() as u32;
                        c.ids.insert(tok.clone(), id);
                        c.vocab.push(tok);
                        id
                    }
                };
                c.tokens.push(id);
                c.token_count += 1;
            }
            c.tokens.push(BOUNDARY);
        }
        c.documents.push(start..c.tokens.len());
    }

    pub fn finish(mut self) -> Corpus {
        self.corpus.rebuild_postings();
        self.corpus
    }
}

impl Corpus {
    /// Builds a corpus from in-memory texts, one document per text.
    pub fn from_texts<I, S>(texts: I, config: &TokenizerConfig) -> Corpus
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut builder = CorpusBuilder::new(config.clone());
        for t in texts {
            builder.add_text(t.as_ref());
        }
        builder.finish()
    }

    /// Reads files and directories (recursively, in sorted path order).
    /// Each file is one document unless `line_documents` is set.
    pub fn ingest<P: AsRef<Path>>(sources: &[P], config: &TokenizerConfig) -> Result<Corpus> {
        let mut builder = CorpusBuilder::new(config.clone());
        for file in source_files(sources)? {
            let text = fs::read_to_string(&file).map_err(|e| LraError::io(&file, e))?;
            builder.add_text(&text);
        }
        Ok(builder.finish())
    }

    fn rebuild_postings(&mut self) {
        let mut postings = vec![Vec::new(); self.vocab.len()];
        for (pos, &id) in self.tokens.iter().enumerate() {
            if id != BOUNDARY {
                postings[id as usize].push(pos as u32);
            }
        }
        self.postings = postings;
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    pub fn document_count(&self) -> usize {
        self.documents.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocab.len()
    }

    /// The tokens of document `index`, segment boundaries dropped.
    pub fn document_tokens(&self, index: usize) -> Vec<&str> {
        self.tokens[self.documents[index].clone()]
            .iter()
            .filter(|&&id| id != BOUNDARY)
            .map(|&id| self.vocab[id as usize].as_str())
            .collect()
    }

    /// Occurrences of an exact token.
    pub fn term_frequency(&self, token: &str) -> usize {
        self.ids.get(token).map_or(0, |&id| self.postings[id as usize].len())
    }

    /// Ids of every vocabulary token that matches `word` up to an ignored suffix.
    fn variant_ids(&self, word: &str) -> Vec<u32> {
        let mut ids: Vec<u32> = std::iter::once(word.to_string())
            .chain(IGNORED_SUFFIXES.iter().map(|s| format!("{word}{s}")))
            .filter_map(|w| self.ids.get(&w).copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    fn scan(&self, pair: &WordPair, max_phrase: usize, mut visit: impl FnMut(usize, usize, Direction)) {
        if max_phrase < 3 {
            return;
        }
        let a = self.variant_ids(pair.first());
        let b = self.variant_ids(pair.second());
        if a.is_empty() || b.is_empty() {
            return;
        }
        self.scan_from(&a, &b, max_phrase, Direction::Forward, &mut visit);
        self.scan_from(&b, &a, max_phrase, Direction::Reverse, &mut visit);
    }

    fn scan_from(
        &self,
        starts: &[u32],
        ends: &[u32],
        max_phrase: usize,
        direction: Direction,
        visit: &mut impl FnMut(usize, usize, Direction),
    ) {
        for &id in starts {
            for &p in &self.postings[id as usize] {
                let p = p as usize;
                let last = (p + max_phrase - 1).min(self.tokens.len() - 1);
                for q in p + 1..=last {
                    let t = self.tokens[q];
                    if t == BOUNDARY {
                        break;
                    }
                    if q >= p + 2 && ends.contains(&t) {
                        visit(p, q, direction);
                    }
                }
            }
        }
    }

    /// Number of phrase occurrences joining the pair members in either order.
    pub fn cooccurrence_frequency(&self, pair: &WordPair, max_phrase: usize) -> u64 {
        let mut n = 0;
        self.scan(pair, max_phrase, |_, _, _| n += 1);
        n
    }

    /// Every distinct phrase realization of the pair, in lexicographic order.
    pub fn enumerate_phrases(&self, pair: &WordPair, max_phrase: usize) -> Vec<PhraseMatch> {
        let mut found: BTreeMap<(u32, Vec<u32>, u32, Direction), u64> = BTreeMap::new();
        self.scan(pair, max_phrase, |p, q, dir| {
            let key = (self.tokens[p], self.tokens[p + 1..q].to_vec(), self.tokens[q], dir);
            *found.entry(key).or_default() += 1;
        });
        let word = |id: u32| self.vocab[id as usize].clone();
        let mut out: Vec<PhraseMatch> = found
            .into_iter()
            .map(|((f, mid, l, direction), count)| PhraseMatch {
                first: word(f),
                intervening: mid.into_iter().map(word).collect(),
                last: word(l),
                direction,
                count,
            })
            .collect();
        out.sort();
        out
    }

    /// Occurrences of phrases of the pair that match a directed pattern.
    pub fn pattern_frequency(&self, pair: &WordPair, pattern: &DirectedPattern, max_phrase: usize) -> u64 {
        if pattern.pattern.len() + 2 > max_phrase {
            return 0;
        }
        let mut n = 0;
        self.scan(pair, max_phrase, |p, q, dir| {
            if dir == pattern.direction
                && q - p - 1 == pattern.pattern.len()
                && pattern.pattern.matches(
                    &self.tokens[p + 1..q]
                        .iter()
                        .map(|&id| self.vocab[id as usize].as_str())
                        .collect::<Vec<_>>(),
                )
            {
                n += 1;
            }
        });
        n
    }

    /// SHA-256 over the token stream; identifies the corpus in cache keys.
    pub fn content_id(&self) -> String {
        let mut hasher = Sha256::new();
        for doc in &self.documents {
            for &id in &self.tokens[doc.clone()] {
                if id == BOUNDARY {
                    hasher.update(b"|");
                } else {
                    hasher.update(self.vocab[id as usize].as_bytes());
                    hasher.update(b" ");
                }
            }
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let stored = StoredCorpus {
            vocab: self.vocab.clone(),
            tokens: self.tokens.clone(),
            documents: self.documents.iter().map(|r| (r.start, r.end)).collect(),
        };
        let json = serde_json::to_vec(&stored)?;
        crate::cache::write_atomic(path, &json)
    }

    pub fn load(path: &Path) -> Result<Corpus> {
        let bytes = fs::read(path).map_err(|e| LraError::io(path, e))?;
        let stored: StoredCorpus = serde_json::from_slice(&bytes)?;
        let bad = |message: &str| LraError::Cache {
            path: path.to_path_buf(),
            message: message.to_string(),
        };
        if stored
            .tokens
            .iter()
            .any(|&t| t != BOUNDARY && t as usize >= stored.vocab.len())
        {
            return Err(bad("token id outside vocabulary"));
        }
        if stored.documents.iter().any(|&(s, e)| s > e || e > stored.tokens.len()) {
            return Err(bad("document range outside token stream"));
        }
        let ids = stored
            .vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        let token_count = stored.tokens.iter().filter(|&&t| t != BOUNDARY).count();
        let mut corpus = Corpus {
            vocab: stored.vocab,
            ids,
            tokens: stored.tokens,
            documents: stored.documents.into_iter().map(|(s, e)| s..e).collect(),
            postings: Vec::new(),
            token_count,
        };
        corpus.rebuild_postings();
        Ok(corpus)
    }
}

/// The files [`Corpus::ingest`] reads, in the order it reads them.
pub fn source_files<P: AsRef<Path>>(sources: &[P]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for source in sources {
        files.extend(collect_files(source.as_ref())?);
    }
    Ok(files)
}

fn collect_files(source: &Path) -> Result<Vec<PathBuf>> {
    let meta = fs::metadata(source).map_err(|e| LraError::io(source, e))?;
    if meta.is_file() {
        return Ok(vec![source.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(source).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(source).to_path_buf();
            LraError::io(path, e.into())
        })?;
        if entry.file_type().is_file() {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}
