//! Staged, content-addressed artifact cache.
//!
//! Each stage's key hashes the keys of the stages it reads plus its own
//! parameters, so changing one parameter recomputes only the stages
//! downstream of it. Artifacts are written under a temporary name and
//! renamed into place, which keeps a crashed run from leaving a partial
//! artifact behind a valid key.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use log::{info, warn};
use lra::cache::{content_key, write_atomic};
use lra::corpus::{source_files, Corpus, TokenizerConfig};
use lra::matrix::PairPatternMatrix;
use lra::pair::WordPair;
use lra::pipeline::{build_families, build_space, build_weighted_matrix, FamilySet, LraModel, MatrixStats};
use lra::projection::ProjectedSpace;
use lra::thesaurus::Thesaurus;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// Bumped whenever an artifact format or an algorithm changes meaning.
const FORMAT: &str = "lra-cache-2";

/// How one stage was satisfied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageInfo {
    pub name: String,
    pub key: String,
    pub cached: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: Option<PathBuf>,
}

impl Store {
    pub fn open(root: PathBuf) -> Self {
        Store { root: Some(root) }
    }

    /// A store that never reads or writes anything.
    pub fn disabled() -> Self {
        Store { root: None }
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    fn path(&self, stage: &str, key: &str) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(stage).join(key))
    }
}

/// The corpus and its cache key.
pub struct Indexed {
    pub corpus: Corpus,
    pub key: String,
}

/// A model plus the weighted matrix it was built from.
pub struct Built {
    pub model: LraModel,
    pub matrix: PairPatternMatrix,
    pub matrix_key: String,
    pub stats: MatrixStats,
}

/// Runs the pipeline stages against a store, recording what happened.
pub struct Stages<'a> {
    cfg: &'a RunConfig,
    store: Store,
    pub log: Vec<StageInfo>,
}

fn hash_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(content_key(&[bytes]))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

impl<'a> Stages<'a> {
    pub fn new(cfg: &'a RunConfig, store: Store) -> Self {
        Stages {
            cfg,
            store,
            log: Vec::new(),
        }
    }

    fn record(&mut self, name: &str, key: &str, cached: bool, start: Instant) {
        let seconds = start.elapsed().as_secs_f64();
        info!(
            "{name}: {} in {seconds:.3}s",
            if cached { "cache hit" } else { "computed" }
        );
        self.log.push(StageInfo {
            name: name.to_string(),
            key: key.to_string(),
            cached,
            seconds,
        });
    }

    fn tokenizer(&self) -> TokenizerConfig {
        TokenizerConfig {
            line_documents: self.cfg.corpus.line_documents,
            sentence_boundaries: self.cfg.corpus.sentence_boundaries,
        }
    }

    /// Stage 0: the corpus index, keyed by file contents and tokenizer
    /// settings (not by file names, so moving a corpus keeps its cache).
    pub fn corpus(&mut self) -> Result<Indexed> {
        let start = Instant::now();
        let files = source_files(&self.cfg.corpus.paths)?;
        let tokenizer = self.tokenizer();
        let mut parts = vec![FORMAT.to_string(), "index".into(), json(&tokenizer)];
        for f in &files {
            parts.push(hash_file(f)?);
        }
        let key = content_key(&parts);
        let path = self.store.path("index", &format!("{key}.json"));
        if let Some(p) = path.as_ref().filter(|p| p.exists()) {
            match Corpus::load(p) {
                Ok(corpus) => {
                    self.record("index", &key, true, start);
                    return Ok(Indexed { corpus, key });
                }
                Err(e) => warn!("ignoring unreadable cache entry: {e}"),
            }
        }
        let corpus = Corpus::ingest(&files, &tokenizer)?;
        if let Some(p) = &path {
            corpus.save(p)?;
        }
        self.record("index", &key, false, start);
        Ok(Indexed { corpus, key })
    }

    /// The thesaurus, when the variant uses synonyms.
    pub fn thesaurus(&self) -> Result<Option<Thesaurus>> {
        match (&self.cfg.inputs.thesaurus, self.cfg.variant.synonyms) {
            (Some(path), true) => Ok(Some(Thesaurus::load(path)?)),
            _ => Ok(None),
        }
    }

    /// Stage 1: alternates and their filtering.
    pub fn families(
        &mut self,
        index: &Indexed,
        thesaurus: Option<&Thesaurus>,
        pairs: &[WordPair],
    ) -> Result<(FamilySet, String)> {
        let start = Instant::now();
        let p = &self.cfg.params;
        let pair_list: Vec<String> = pairs.iter().map(|p| p.to_string()).collect();
        let key = content_key(&[
            FORMAT,
            "families",
            &index.key,
            thesaurus.map_or("none", |t| t.content_id()),
            &json(&(p.num_sim, p.max_phrase, p.num_filter)),
            &pair_list.join("\n"),
        ]);
        let path = self.store.path("families", &format!("{key}.json"));
        if let Some(cached) = path
            .as_ref()
            .filter(|p| p.exists())
            .and_then(|p| read_json::<FamilySet>(p))
        {
            self.record("families", &key, true, start);
            return Ok((cached, key));
        }
        let families = build_families(&index.corpus, thesaurus, pairs, p);
        if let Some(path) = &path {
            write_atomic(path, json(&families).as_bytes())?;
        }
        self.record("families", &key, false, start);
        Ok((families, key))
    }

    /// Stage 2: patterns, the sparse matrix and its weighting.
    pub fn matrix(
        &mut self,
        index: &Indexed,
        families: &FamilySet,
        families_key: &str,
    ) -> Result<(PairPatternMatrix, MatrixStats, String)> {
        let start = Instant::now();
        let p = &self.cfg.params;
        let key = content_key(&[
            FORMAT,
            "matrix",
            families_key,
            &json(&(p.max_phrase, p.num_patterns, self.cfg.variant.symmetry)),
        ]);
        let dir = self.store.path("matrix", &key);
        if let Some(dir) = dir.as_ref().filter(|d| d.exists()) {
            let loaded = PairPatternMatrix::load(dir).map_err(anyhow::Error::from).and_then(|m| {
                Ok((
                    m,
                    read_json::<MatrixStats>(&dir.join("stats.json")).context("missing stats")?,
                ))
            });
            match loaded {
                Ok((m, mut stats)) => {
                    stats.timings.clear();
                    self.record("matrix", &key, true, start);
                    return Ok((m, stats, key));
                }
                Err(e) => {
                    warn!("discarding unreadable cache entry {}: {e:#}", dir.display());
                    let _ = fs::remove_dir_all(dir);
                }
            }
        }
        let (matrix, stats) = build_weighted_matrix(&index.corpus, families, p, self.cfg.variant.symmetry)?;
        if let Some(dir) = &dir {
            write_dir_atomic(dir, |tmp| {
                matrix.save(tmp)?;
                write_atomic(&tmp.join("stats.json"), json(&stats).as_bytes())?;
                Ok(())
            })?;
        }
        self.record("matrix", &key, false, start);
        Ok((matrix, stats, key))
    }

    /// Stage 3: the projected space for the configured variant.
    pub fn space(&mut self, matrix: &PairPatternMatrix, matrix_key: &str) -> Result<(ProjectedSpace, String)> {
        let start = Instant::now();
        let v = &self.cfg.variant;
        let key = content_key(&[
            FORMAT,
            "space",
            matrix_key,
            &json(&(v.svd, v.top_n, self.cfg.params.k)),
            &json(&self.cfg.svd),
        ]);
        let path = self.store.path("space", &format!("{key}.json"));
        if let Some(p) = path.as_ref().filter(|p| p.exists()) {
            match ProjectedSpace::load(p, matrix) {
                Ok(space) => {
                    self.record("space", &key, true, start);
                    return Ok((space, key));
                }
                Err(e) => warn!("ignoring unreadable cache entry: {e}"),
            }
        }
        let space = build_space(matrix, &self.cfg.params, v, &self.cfg.svd.options())?;
        if let Some(p) = &path {
            space.save(p)?;
        }
        self.record("space", &key, false, start);
        Ok((space, key))
    }

    /// Every stage, for the given pairs.
    pub fn model(&mut self, index: &Indexed, pairs: &[WordPair]) -> Result<Built> {
        let thesaurus = self.thesaurus()?;
        let (families, fkey) = self.families(index, thesaurus.as_ref(), pairs)?;
        let (matrix, stats, mkey) = self.matrix(index, &families, &fkey)?;
        let (space, _) = self.space(&matrix, &mkey)?;
        Ok(Built {
            model: LraModel::from_parts(families, space, self.cfg.variant.alternates),
            matrix,
            matrix_key: mkey,
            stats,
        })
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Option<T> {
    let bytes = fs::read(path).ok()?;
    match serde_json::from_slice(&bytes) {
        Ok(v) => Some(v),
        Err(e) => {
            warn!("ignoring unreadable cache entry {}: {e}", path.display());
            None
        }
    }
}

/// Fills a temporary sibling directory, then renames it to `dir`. If
/// another process got there first, its copy is kept.
fn write_dir_atomic(dir: &Path, fill: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let parent = dir.parent().context("cache directory has no parent")?;
    fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    let tmp = parent.join(format!(
        ".{}.tmp{}",
        dir.file_name().and_then(|n| n.to_str()).unwrap_or("stage"),
        std::process::id()
    ));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).with_context(|| format!("cannot clear {}", tmp.display()))?;
    }
    fs::create_dir_all(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
    if let Err(e) = fill(&tmp) {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    if dir.exists() {
        fs::remove_dir_all(&tmp).ok();
        return Ok(());
    }
    fs::rename(&tmp, dir).with_context(|| format!("cannot move cache entry into {}", dir.display()))
}
