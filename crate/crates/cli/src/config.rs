//! Run configuration: a TOML file with one table per concern, overridable
//! from the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lra::linalg::SvdOptions;
use lra::pipeline::{LraParams, Variant};
use lra::LraError;
use serde::{Deserialize, Serialize};

/// Environment variable that overrides the cache directory.
pub const CACHE_ENV: &str = "LRA_CACHE_DIR";

const DEFAULT_CACHE: &str = ".lra-cache";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    /// Files or directories, read recursively in sorted order.
    pub paths: Vec<PathBuf>,
    pub line_documents: bool,
    pub sentence_boundaries: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            paths: Vec::new(),
            line_documents: false,
            sentence_boundaries: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputsConfig {
    pub thesaurus: Option<PathBuf>,
    /// Extra pairs to include in the matrix, one `a:b` per line.
    pub pairs: Option<PathBuf>,
    pub sat: Option<PathBuf>,
    pub noun_modifiers: Option<PathBuf>,
    /// Joining terms for the vector space baseline; a built-in list otherwise.
    pub joining_terms: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvdConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvdConfig {
    fn default() -> Self {
        let o = SvdOptions::default();
        SvdConfig {
            tol: o.tol,
            max_iter: o.max_iter,
            seed: o.seed,
        }
    }
}

impl SvdConfig {
    pub fn options(&self) -> SvdOptions {
        SvdOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NounModifierConfig {
    /// Rank neighbours with original pairs only, then rescore this many
    /// with the full measure. Zero means exhaustive search.
    pub shortlist: usize,
}

impl Default for NounModifierConfig {
    fn default() -> Self {
        NounModifierConfig { shortlist: 30 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub cache_dir: Option<PathBuf>,
    /// Report path prefix; `.txt` and `.json` are appended.
    pub report: Option<PathBuf>,
    /// Seed for randomized baselines and synthetic data.
    pub seed: u64,
    /// Worker threads; 0 uses every available CPU.
    pub workers: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: CorpusConfig,
    pub inputs: InputsConfig,
    pub params: LraParams,
    pub variant: Variant,
    pub svd: SvdConfig,
    pub noun_modifiers: NounModifierConfig,
    pub run: RunSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.corpus.paths.iter_mut().for_each(fix);
        let i = &mut self.inputs;
        for p in [
            &mut i.thesaurus,
            &mut i.pairs,
            &mut i.sat,
            &mut i.noun_modifiers,
            &mut i.joining_terms,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        for p in [&mut self.run.cache_dir, &mut self.run.report].into_iter().flatten() {
            fix(p);
        }
    }

    /// Cache directory: the environment variable, then the config, then a
    /// default relative to the working directory.
    pub fn cache_dir(&self) -> PathBuf {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self
                .run
                .cache_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.variant.validate()?;
        if self.svd.tol <= 0.0 || self.svd.max_iter == 0 {
            bail!(LraError::Config("svd tol and max_iter must be positive".into()));
        }
        Ok(())
    }

    /// Checks that the corpus and the named inputs exist before any work
    /// starts.
    pub fn require(&self, inputs: &[Input]) -> Result<()> {
        self.validate()?;
        for input in inputs {
            let paths: Vec<&PathBuf> = match input {
                Input::Corpus => {
                    if self.corpus.paths.is_empty() {
                        bail!(LraError::Config("no corpus paths configured".into()));
                    }
                    self.corpus.paths.iter().collect()
                }
                Input::Thesaurus => match &self.inputs.thesaurus {
                    Some(p) => vec![p],
                    None if !self.variant.synonyms => vec![],
                    None => bail!(LraError::Config(
                        "a thesaurus is required unless synonyms are disabled".into()
                    )),
                },
                Input::Sat => vec![self
                    .inputs
                    .sat
                    .as_ref()
                    .ok_or_else(|| missing("no analogy question file configured"))?],
                Input::NounModifiers => vec![self
                    .inputs
                    .noun_modifiers
                    .as_ref()
                    .ok_or_else(|| missing("no noun-modifier file configured"))?],
            };
            for p in paths {
                if !p.exists() {
                    bail!(LraError::Io {
                        path: p.clone(),
                        source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
                    });
                }
            }
        }
        Ok(())
    }
}

fn missing(what: &str) -> LraError {
    LraError::Config(what.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Input {
    Corpus,
    Thesaurus,
    Sat,
    NounModifiers,
}
