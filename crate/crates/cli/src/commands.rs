//! Subcommands and the flags that override the config file.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use lra::baselines::{
    frequency_guess, thesaurus_similarity, AttributionalMeasure, FrequencyMode, JoiningTerms, VsmMeasure,
};
use lra::eval::nm::{
    agreement, classify, load_examples, nearest_neighbours, nearest_neighbours_two_stage, Classification,
};
use lra::eval::sat::{finish, letter, load_questions, solve_all, Answer, SatRun};
use lra::eval::{majority_baseline, question_pairs, EvalReport, NounModifierExample, Scheme};
use lra::linalg::SvdDiagnostics;
use lra::pair::{load_pair_list, PairFamily, WordPair};
use lra::pipeline::{original_only, LraParams, MatrixStats, Variant};
use lra::projection::ProjectedSpace;
use lra::similarity::AlternateMode;
use lra::synth::{generate, SynthConfig};
use lra::thesaurus::Thesaurus;
use lra::LraError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Input, RunConfig};
use crate::report::{emit, emit_extra, eval_text, pairing_text, sat_text, stages_text, PairingLog};
use crate::store::{Built, Indexed, Stages, Store};

#[derive(Debug, Parser)]
#[command(name = "lra", version, about = "Latent relational analysis of word pairs")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(short, long, global = true, env = "LRA_CONFIG")]
    pub config: Option<PathBuf>,

    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Corpus file or directory (repeatable); replaces the configured list.
    #[arg(long, global = true)]
    pub corpus: Vec<PathBuf>,
    /// Treat each line of a corpus file as a document.
    #[arg(long, global = true)]
    pub line_documents: bool,
    /// Thesaurus file of weighted neighbour lists.
    #[arg(long, global = true)]
    pub thesaurus: Option<PathBuf>,
    /// Extra word pairs to place in the matrix, one `a:b` per line.
    #[arg(long, global = true)]
    pub pairs: Option<PathBuf>,
    /// Analogy questions file.
    #[arg(long, global = true)]
    pub sat: Option<PathBuf>,
    /// Labeled noun-modifier pairs (CSV).
    #[arg(long = "noun-modifiers", alias = "nm", global = true)]
    pub noun_modifiers: Option<PathBuf>,
    /// Joining terms for the VSM baseline, one per line.
    #[arg(long, global = true)]
    pub joining_terms: Option<PathBuf>,

    /// Thesaurus neighbours tried per pair member.
    #[arg(long, global = true)]
    pub num_sim: Option<usize>,
    /// Longest phrase, counting both pair members.
    #[arg(long, global = true)]
    pub max_phrase: Option<usize>,
    /// Alternates kept per pair.
    #[arg(long, global = true)]
    pub num_filter: Option<usize>,
    /// Patterns kept for the matrix columns.
    #[arg(long, global = true)]
    pub num_patterns: Option<usize>,
    /// Number of singular values kept.
    #[arg(short = 'k', long = "k", global = true)]
    pub k: Option<usize>,

    /// Compare rows of the weighted matrix directly.
    #[arg(long, global = true)]
    pub no_svd: bool,
    /// Use only the original pairs, without alternates.
    #[arg(long, global = true)]
    pub no_synonyms: bool,
    /// One row per pair as given, no reversed rows.
    #[arg(long, global = true)]
    pub no_symmetry: bool,
    /// Which combination cosines are averaged.
    #[arg(long, global = true, value_enum)]
    pub alternates: Option<Alternates>,
    /// Keep only the N largest values of each reconstructed row.
    #[arg(long, global = true)]
    pub top_n: Option<usize>,

    /// Relative convergence tolerance of the SVD.
    #[arg(long, global = true)]
    pub svd_tol: Option<f64>,
    /// SVD step budget per singular triplet.
    #[arg(long, global = true)]
    pub svd_max_iter: Option<usize>,
    /// Seed for the SVD start vectors.
    #[arg(long, global = true)]
    pub svd_seed: Option<u64>,
    /// Stage-one neighbour count for classification; 0 searches exhaustively.
    #[arg(long, global = true)]
    pub shortlist: Option<usize>,

    /// Artifact cache directory; overrides LRA_CACHE_DIR and the config.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Do not read or write cached artifacts.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Report path prefix; `.txt` and `.json` are appended.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Seed for generated suites and the random baseline.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every CPU.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Alternates {
    Better,
    All,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if !self.corpus.is_empty() {
            cfg.corpus.paths = self.corpus.clone();
        }
        cfg.corpus.line_documents |= self.line_documents;
        let i = &mut cfg.inputs;
        for (flag, slot) in [
            (&self.thesaurus, &mut i.thesaurus),
            (&self.pairs, &mut i.pairs),
            (&self.sat, &mut i.sat),
            (&self.noun_modifiers, &mut i.noun_modifiers),
            (&self.joining_terms, &mut i.joining_terms),
        ] {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        let p = &mut cfg.params;
        p.num_sim = self.num_sim.unwrap_or(p.num_sim);
        p.max_phrase = self.max_phrase.unwrap_or(p.max_phrase);
        p.num_filter = self.num_filter.unwrap_or(p.num_filter);
        p.num_patterns = self.num_patterns.unwrap_or(p.num_patterns);
        p.k = self.k.unwrap_or(p.k);
        let v = &mut cfg.variant;
        v.svd &= !self.no_svd;
        v.synonyms &= !self.no_synonyms;
        v.symmetry &= !self.no_symmetry;
        if let Some(a) = self.alternates {
            v.alternates = match a {
                Alternates::Better => AlternateMode::Better,
                Alternates::All => AlternateMode::All,
            };
        }
        if self.top_n.is_some() {
            v.top_n = self.top_n;
        }
        cfg.svd.tol = self.svd_tol.unwrap_or(cfg.svd.tol);
        cfg.svd.max_iter = self.svd_max_iter.unwrap_or(cfg.svd.max_iter);
        cfg.svd.seed = self.svd_seed.unwrap_or(cfg.svd.seed);
        cfg.noun_modifiers.shortlist = self.shortlist.unwrap_or(cfg.noun_modifiers.shortlist);
        if self.cache_dir.is_some() {
            cfg.run.cache_dir.clone_from(&self.cache_dir);
        }
        if self.report.is_some() {
            cfg.run.report.clone_from(&self.report);
        }
        cfg.run.seed = self.seed.unwrap_or(cfg.run.seed);
        cfg.run.workers = self.workers.unwrap_or(cfg.run.workers);
    }
}

/// Which configured inputs supply the pairs of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// The pair list, the questions and the noun-modifier examples.
    All,
    /// The pair list and the questions.
    Sat,
    /// The pair list and the noun-modifier examples.
    Nm,
    /// The pair list alone.
    Pairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Cosines of joining-term frequency vectors.
    Vsm,
    /// The choice whose words co-occur most often.
    Highest,
    /// The choice whose words co-occur least often.
    Lowest,
    /// A uniformly random choice.
    Random,
    /// Word-by-word thesaurus similarity.
    Attributional,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize the corpus and cache the index.
    Index {
        /// Also write the index to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and cache the weighted matrix and its projection.
    Build {
        #[arg(long, value_enum, default_value_t = Task::All)]
        task: Task,
    },
    /// Answer analogy questions.
    SolveSat {
        /// Where to write the per-pairing cosine log; defaults to
        /// `<report>.pairings.txt` when a report prefix is set.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Leave-one-out nearest neighbour classification of noun-modifier pairs.
    ClassifyNm {
        /// Predict the most frequent class only; needs no corpus.
        #[arg(long)]
        majority: bool,
        /// Also run the exhaustive search and report agreement with it.
        #[arg(long)]
        check: bool,
    },
    /// Compare the full model with its ablations on the questions.
    Ablate {
        /// Add the no-symmetry and all-alternates variants.
        #[arg(long)]
        extended: bool,
    },
    /// Answer the questions with a baseline instead of the model.
    BaselineVsm {
        #[arg(long, value_enum, default_value_t = Strategy::Vsm)]
        strategy: Strategy,
    },
    /// Show the patterns with the largest weights for a pair.
    Inspect {
        pair: WordPair,
        #[arg(long, default_value_t = 20)]
        top: usize,
        #[arg(long, value_enum, default_value_t = Task::All)]
        task: Task,
    },
    /// Write a generated corpus, thesaurus, questions and labeled pairs.
    Synth {
        out: PathBuf,
        /// Number of analogy questions.
        #[arg(long, default_value_t = 40)]
        question_count: usize,
        /// Number of labeled noun-modifier pairs.
        #[arg(long, default_value_t = 60)]
        example_count: usize,
    },
}

/// Loads the config, applies flags and runs the command.
pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    cfg.validate()?;
    if cfg.run.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.workers)
            .build_global()
        {
            warn!("worker count not applied: {e}");
        }
    }
    let store = if cli.overrides.no_cache {
        Store::disabled()
    } else {
        Store::open(cli.overrides.cache_dir.clone().unwrap_or_else(|| cfg.cache_dir()))
    };
    let session = Session { cfg, store };
    match cli.command {
        Command::Index { out } => session.index(out),
        Command::Build { task } => session.build(task),
        Command::SolveSat { log } => session.solve_sat(log),
        Command::ClassifyNm { majority, check } => session.classify_nm(majority, check),
        Command::Ablate { extended } => session.ablate(extended),
        Command::BaselineVsm { strategy } => session.baseline(strategy),
        Command::Inspect { pair, top, task } => session.inspect(&pair, top, task),
        Command::Synth {
            out,
            question_count,
            example_count,
        } => session.synth(out, question_count, example_count),
    }
}

struct Session {
    cfg: RunConfig,
    store: Store,
}

#[derive(Debug, Serialize)]
struct CorpusSummary {
    tokens: usize,
    documents: usize,
    vocabulary: usize,
}

impl CorpusSummary {
    fn of(index: &Indexed) -> Self {
        CorpusSummary {
            tokens: index.corpus.token_count(),
            documents: index.corpus.document_count(),
            vocabulary: index.corpus.vocabulary_size(),
        }
    }
}

#[derive(Debug, Serialize)]
struct IndexReport {
    key: String,
    corpus: CorpusSummary,
}

#[derive(Debug, Serialize)]
struct SpaceSummary {
    projection: &'static str,
    requested_k: Option<usize>,
    k: usize,
    rank_limited: bool,
    leading_singular_values: Vec<f64>,
    zero_rows: usize,
    diagnostics: Option<SvdDiagnostics>,
}

impl SpaceSummary {
    fn of(space: &ProjectedSpace, variant: &Variant) -> Self {
        SpaceSummary {
            projection: match (variant.svd, variant.top_n) {
                (false, _) => "none",
                (true, None) => "svd",
                (true, Some(_)) => "svd-top-n",
            },
            requested_k: space.requested_k(),
            k: space.k(),
            rank_limited: space.rank_limited(),
            leading_singular_values: space.sigma().iter().take(10).copied().collect(),
            zero_rows: space.zero_rows(),
            diagnostics: space.diagnostics().cloned(),
        }
    }
}

#[derive(Debug, Serialize)]
struct BuildReport {
    task: Task,
    variant: String,
    params: LraParams,
    corpus: CorpusSummary,
    pairs: usize,
    families: usize,
    alternates: usize,
    matrix: MatrixStats,
    space: SpaceSummary,
}

#[derive(Debug, Serialize)]
struct SatReport {
    variant: String,
    params: LraParams,
    run: SatRun,
}

#[derive(Debug, Serialize)]
struct SearchInfo {
    mode: &'static str,
    shortlist: Option<usize>,
    stage_one: Option<&'static str>,
    stage_two: String,
    /// Fraction of examples whose neighbour matches the exhaustive search.
    agreement: Option<f64>,
}

#[derive(Debug, Serialize)]
struct NmReport {
    examples: usize,
    search: Option<SearchInfo>,
    thirty: Classification,
    five: Classification,
    majority_thirty: EvalReport,
    majority_five: EvalReport,
}

#[derive(Debug, Serialize)]
struct AblationRow {
    label: String,
    report: EvalReport,
}

#[derive(Debug, Serialize)]
struct BaselineReport {
    strategy: Strategy,
    run: SatRun,
}

#[derive(Debug, Serialize)]
struct PatternWeight {
    pattern: String,
    weight: f64,
}

#[derive(Debug, Serialize)]
struct InspectReport {
    pair: WordPair,
    family: PairFamily,
    weighted: Vec<PatternWeight>,
    reconstructed: Option<Vec<PatternWeight>>,
}

fn dedup(pairs: Vec<WordPair>) -> Vec<WordPair> {
    let mut seen = HashSet::new();
    pairs.into_iter().filter(|p| seen.insert(p.clone())).collect()
}

fn top_weights(
    values: impl Iterator<Item = (usize, f64)>,
    columns: &[lra::pattern::DirectedPattern],
    n: usize,
) -> Vec<PatternWeight> {
    let mut v: Vec<(usize, f64)> = values.filter(|e| e.1 != 0.0).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v.truncate(n);
    v.into_iter()
        .map(|(j, weight)| PatternWeight {
            pattern: columns[j].to_string(),
            weight,
        })
        .collect()
}

fn table_row(label: &str, r: &EvalReport) -> String {
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.1}"));
    format!(
        "{label:<28} {:>7} {:>9} {:>7} {:>6} {:>6.1} {:>6}\n",
        r.correct,
        r.incorrect,
        r.skipped,
        fmt(r.precision),
        r.recall,
        fmt(r.f)
    )
}

fn table_header() -> String {
    format!(
        "{:<28} {:>7} {:>9} {:>7} {:>6} {:>6} {:>6}\n",
        "variant", "correct", "incorrect", "skipped", "P", "R", "F"
    )
}

impl Session {
    fn report_prefix(&self) -> Option<&std::path::Path> {
        self.cfg.run.report.as_deref()
    }

    /// Stage log to stderr and, with a report prefix, to a timings file.
    fn finish_stages(&self, stages: &Stages, timings: &[(String, f64)]) -> Result<()> {
        let text = stages_text(&stages.log, timings);
        eprint!("{text}");
        emit_extra(self.report_prefix(), ".timings.txt", &text)?;
        Ok(())
    }

    fn task_pairs(&self, task: Task) -> Result<Vec<WordPair>> {
        let inputs = &self.cfg.inputs;
        let mut pairs = Vec::new();
        if let Some(p) = &inputs.pairs {
            pairs.extend(load_pair_list(p)?);
        }
        if matches!(task, Task::All | Task::Sat) {
            if let Some(p) = &inputs.sat {
                pairs.extend(question_pairs(&load_questions(p)?));
            }
        }
        if matches!(task, Task::All | Task::Nm) {
            if let Some(p) = &inputs.noun_modifiers {
                pairs.extend(load_examples(p)?.iter().map(NounModifierExample::pair));
            }
        }
        let pairs = dedup(pairs);
        if pairs.is_empty() {
            anyhow::bail!(LraError::Config(
                "no word pairs: configure a pair list, questions or noun-modifier examples".into()
            ));
        }
        Ok(pairs)
    }

    fn model_inputs(&self) -> Vec<Input> {
        vec![Input::Corpus, Input::Thesaurus]
    }

    fn index(&self, out: Option<PathBuf>) -> Result<()> {
        self.cfg.require(&[Input::Corpus])?;
        let mut stages = Stages::new(&self.cfg, self.store.clone());
        let index = stages.corpus()?;
        if let Some(out) = &out {
            index.corpus.save(out)?;
        }
        let report = IndexReport {
            key: index.key.clone(),
            corpus: CorpusSummary::of(&index),
        };
        let text = format!(
            "indexed {} tokens in {} documents, {} distinct words\nkey {}\n",
            report.corpus.tokens, report.corpus.documents, report.corpus.vocabulary, report.key
        );
        emit(self.report_prefix(), &text, &report)?;
        self.finish_stages(&stages, &[])
    }

    fn build(&self, task: Task) -> Result<()> {
        self.cfg.require(&self.model_inputs())?;
        let pairs = self.task_pairs(task)?;
        let mut stages = Stages::new(&self.cfg, self.store.clone());
        let index = stages.corpus()?;
        let Built { model, mut stats, .. } = stages.model(&index, &pairs)?;
        let timings = std::mem::take(&mut stats.timings);
        let families = model.families();
        let report = BuildReport {
            task,
            variant: self.cfg.variant.label(),
            params: self.cfg.params,
            corpus: CorpusSummary::of(&index),
            pairs: pairs.len(),
            families: families.len(),
            alternates: families.families().iter().map(|f| f.alternates.len()).sum(),
            matrix: stats,
            space: SpaceSummary::of(model.space(), &self.cfg.variant),
        };
        let m = &report.matrix;
        let s = &report.space;
        let mut text = format!("build: variant {}\n", report.variant);
        let _ = writeln!(
            text,
            "corpus: {} tokens, {} documents",
            report.corpus.tokens, report.corpus.documents
        );
        let _ = writeln!(
            text,
            "pairs: {} input, {} families, {} alternates kept, {} matrix pairs",
            report.pairs, report.families, report.alternates, m.family_members
        );
        let _ = writeln!(
            text,
            "patterns: {} available, {} kept",
            m.patterns_available, m.patterns_kept
        );
        let _ = writeln!(
            text,
            "matrix: {} rows x {} columns, {} nonzeros, density {:.4}% ({} zero rows dropped of {})",
            m.rows,
            m.columns,
            m.nonzeros,
            100.0 * m.density,
            m.dropped_rows,
            m.rows_before_drop
        );
        let _ = writeln!(
            text,
            "projection: {}, k {} of {} requested{}",
            s.projection,
            s.k,
            s.requested_k.map_or("none".to_string(), |k| k.to_string()),
            if s.rank_limited { " (limited by rank)" } else { "" }
        );
        emit(self.report_prefix(), &text, &report)?;
        self.finish_stages(&stages, &timings)
    }

    fn solve_sat(&self, log: Option<PathBuf>) -> Result<()> {
        let mut inputs = self.model_inputs();
        inputs.push(Input::Sat);
        self.cfg.require(&inputs)?;
        let sat = self.cfg.inputs.sat.as_ref().expect("checked above");
        let questions = load_questions(sat)?;
        let pairs = self.task_pairs(Task::Sat)?;
        let mut stages = Stages::new(&self.cfg, self.store.clone());
        let index = stages.corpus()?;
        let built = stages.model(&index, &pairs)?;
        let run = solve_all(&questions, &built.model);
        let report = SatReport {
            variant: self.cfg.variant.label(),
            params: self.cfg.params,
            run,
        };
        let text = sat_text(&format!("analogy questions: variant {}", report.variant), &report.run);
        emit(self.report_prefix(), &text, &report)?;

        let entries: Vec<PairingLog> = questions
            .iter()
            .enumerate()
            .flat_map(|(i, q)| {
                let model = &built.model;
                q.choices.iter().enumerate().map(move |(c, choice)| PairingLog {
                    question: i + 1,
                    choice: letter(c),
                    similarity: lra::similarity::RelationalMeasure::similarity(model, &q.stem, choice),
                    combinations: model.combinations(&q.stem, choice).unwrap_or_default(),
                })
            })
            .collect();
        let log_text = pairing_text(&entries);
        match log {
            Some(path) => lra::cache::write_atomic(&path, log_text.as_bytes())?,
            None => {
                emit_extra(self.report_prefix(), ".pairings.txt", &log_text)?;
            }
        }
        self.finish_stages(&stages, &built.stats.timings)
    }

    fn classify_nm(&self, majority: bool, check: bool) -> Result<()> {
        let mut inputs = vec![Input::NounModifiers];
        if !majority {
            inputs.extend(self.model_inputs());
        }
        self.cfg.require(&inputs)?;
        let path = self.cfg.inputs.noun_modifiers.as_ref().expect("checked above");
        let examples = load_examples(path)?;
        if examples.len() < 2 {
            anyhow::bail!(LraError::InvalidParameter(
                "classification needs at least two examples".into()
            ));
        }
        let majority_thirty = majority_baseline(&examples, Scheme::Thirty);
        let majority_five = majority_baseline(&examples, Scheme::Five);

        let mut stages = Stages::new(&self.cfg, self.store.clone());
        let (thirty, five, search, timings) = if majority {
            (majority_thirty.clone(), majority_five.clone(), None, Vec::new())
        } else {
            let pairs = self.task_pairs(Task::Nm)?;
            let index = stages.corpus()?;
            let built = stages.model(&index, &pairs)?;
            let model = &built.model;
            let shortlist = self.cfg.noun_modifiers.shortlist;
            let exhaustive = shortlist == 0 || shortlist + 1 >= examples.len();
            let (neighbours, search) = if exhaustive {
                let n = nearest_neighbours(&examples, model);
                let info = SearchInfo {
                    mode: "exhaustive",
                    shortlist: None,
                    stage_one: None,
                    stage_two: self.cfg.variant.label(),
                    agreement: None,
                };
                (n, info)
            } else {
                let cheap = original_only(model);
                let n = nearest_neighbours_two_stage(&examples, &cheap, model, shortlist);
                let agreement = check.then(|| agreement(&n, &nearest_neighbours(&examples, model)));
                let info = SearchInfo {
                    mode: "two-stage",
                    shortlist: Some(shortlist),
                    stage_one: Some("original pairs only"),
                    stage_two: self.cfg.variant.label(),
                    agreement,
                };
                (n, info)
            };
            (
                classify(&examples, &neighbours, Scheme::Thirty),
                classify(&examples, &neighbours, Scheme::Five),
                Some(search),
                built.stats.timings.clone(),
            )
        };
        let report = NmReport {
            examples: examples.len(),
            search,
            thirty,
            five,
            majority_thirty: majority_thirty.report,
            majority_five: majority_five.report,
        };
        let mut text = format!("noun-modifier classification: {} examples\n", report.examples);
        match &report.search {
            None => text.push_str("predictor: majority class\n"),
            Some(s) => {
                let _ = write!(text, "neighbour search: {}", s.mode);
                if let (Some(n), Some(one)) = (s.shortlist, s.stage_one) {
                    let _ = write!(text, ", stage one {one} keeps {n}, stage two variant {}", s.stage_two);
                } else {
                    let _ = write!(text, ", variant {}", s.stage_two);
                }
                if let Some(a) = s.agreement {
                    let _ = write!(text, ", agreement with exhaustive search {:.1}%", 100.0 * a);
                }
                text.push('\n');
            }
        }
        let _ = write!(text, "\n30 classes\n{}", eval_text(&report.thirty.report));
        let _ = write!(text, "\n5 classes\n{}", eval_text(&report.five.report));
        let _ = writeln!(
            text,
            "\nmajority baseline: accuracy {:.1} (30 classes), {:.1} (5 classes)",
            report.majority_thirty.accuracy(),
            report.majority_five.accuracy()
        );
        emit(self.report_prefix(), &text, &report)?;
        if majority {
            Ok(())
        } else {
            self.finish_stages(&stages, &timings)
        }
    }

    fn ablate(&self, extended: bool) -> Result<()> {
        let mut inputs = self.model_inputs();
        inputs.push(Input::Sat);
        self.cfg.require(&inputs)?;
        let questions = load_questions(self.cfg.inputs.sat.as_ref().expect("checked above"))?;
        let pairs = self.task_pairs(Task::Sat)?;
        let base = Variant {
            top_n: None,
            ..self.cfg.variant
        };
        let mut variants = vec![
            base,
            Variant { svd: false, ..base },
            Variant {
                synonyms: false,
                ..base
            },
            Variant {
                svd: false,
                synonyms: false,
                ..base
            },
        ];
        if extended {
            variants.push(Variant {
                symmetry: false,
                ..base
            });
            variants.push(Variant {
                alternates: AlternateMode::All,
                ..base
            });
        }
        let mut stages = Stages::new(&self.cfg, self.store.clone());
        let index = stages.corpus()?;
        let mut log = std::mem::take(&mut stages.log);
        let mut rows = Vec::new();
        for variant in variants {
            let cfg = RunConfig {
                variant,
                ..self.cfg.clone()
            };
            info!("variant {}", variant.label());
            let mut st = Stages::new(&cfg, self.store.clone());
            let built = st.model(&index, &pairs)?;
            log.append(&mut st.log);
            rows.push(AblationRow {
                label: variant.label(),
                report: solve_all(&questions, &built.model).report,
            });
        }
        let terms = self.joining_terms()?;
        let vsm = VsmMeasure::new(&index.corpus, terms);
        rows.push(AblationRow {
            label: "vsm baseline".into(),
            report: solve_all(&questions, &vsm).report,
        });

        let mut text = format!("ablation over {} questions\n", questions.len());
        text.push_str(&table_header());
        for r in &rows {
            text.push_str(&table_row(&r.label, &r.report));
        }
        emit(self.report_prefix(), &text, &rows)?;
        stages.log = log;
        self.finish_stages(&stages, &[])
    }

    fn joining_terms(&self) -> Result<JoiningTerms> {
        Ok(match &self.cfg.inputs.joining_terms {
            Some(p) => JoiningTerms::load(p)?,
            None => JoiningTerms::default(),
        })
    }

    fn baseline(&self, strategy: Strategy) -> Result<()> {
        let mut inputs = vec![Input::Sat];
        if strategy != Strategy::Random && strategy != Strategy::Attributional {
            inputs.push(Input::Corpus);
        }
        self.cfg.require(&inputs)?;
        let questions = load_questions(self.cfg.inputs.sat.as_ref().expect("checked above"))?;
        let mut stages = Stages::new(&self.cfg, self.store.clone());
        let run = match strategy {
            Strategy::Vsm => {
                let index = stages.corpus()?;
                solve_all(&questions, &VsmMeasure::new(&index.corpus, self.joining_terms()?))
            }
            Strategy::Highest | Strategy::Lowest => {
                let index = stages.corpus()?;
                let mode = if strategy == Strategy::Highest {
                    FrequencyMode::Highest
                } else {
                    FrequencyMode::Lowest
                };
                let answers = questions
                    .iter()
                    .map(|q| Answer {
                        guess: frequency_guess(&q.choices, &index.corpus, self.cfg.params.max_phrase, mode),
                        scores: vec![None; q.choices.len()],
                        tie: false,
                    })
                    .collect();
                finish(&questions, answers)
            }
            Strategy::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.run.seed);
                let answers = questions
                    .iter()
                    .map(|q| Answer {
                        guess: Some(rng.gen_range(0..q.choices.len())),
                        scores: vec![None; q.choices.len()],
                        tie: false,
                    })
                    .collect();
                finish(&questions, answers)
            }
            Strategy::Attributional => {
                let path = self
                    .cfg
                    .inputs
                    .thesaurus
                    .as_ref()
                    .ok_or_else(|| LraError::Config("the attributional baseline needs a thesaurus".into()))?;
                let thesaurus = Thesaurus::load(path)?;
                let measure = AttributionalMeasure::new(thesaurus_similarity(&thesaurus));
                solve_all(&questions, &measure)
            }
        };
        let report = BaselineReport { strategy, run };
        let title = format!("baseline: {}", format!("{strategy:?}").to_lowercase());
        emit(self.report_prefix(), &sat_text(&title, &report.run), &report)?;
        if stages.log.is_empty() {
            Ok(())
        } else {
            self.finish_stages(&stages, &[])
        }
    }

    fn inspect(&self, pair: &WordPair, top: usize, task: Task) -> Result<()> {
        self.cfg.require(&self.model_inputs())?;
        let mut pairs = self.task_pairs(task).or_else(|e| match e.downcast_ref::<LraError>() {
            Some(LraError::Config(_)) => Ok(Vec::new()),
            _ => Err(e),
        })?;
        if !pairs.contains(pair) && !pairs.contains(&pair.reversed()) {
            pairs.push(pair.clone());
        }
        let mut stages = Stages::new(&self.cfg, self.store.clone());
        let index = stages.corpus()?;
        let built = stages.model(&index, &pairs)?;
        let matrix = &built.matrix;
        let family = built.model.families().family(pair);
        let Some(row) = matrix.row_of(pair) else {
            anyhow::bail!(LraError::InvalidParameter(format!(
                "{pair} has no pattern counts in this corpus, so it has no matrix row"
            )));
        };
        let weighted = top_weights(matrix.cells().row(row), matrix.columns(), top);
        let reconstructed = if self.cfg.variant.svd {
            let recon = ProjectedSpace::reconstruct_rows(matrix, self.cfg.params.k, &self.cfg.svd.options(), &[row])
                .context("cannot reconstruct the row")?;
            Some(top_weights(recon[0].iter().copied().enumerate(), matrix.columns(), top))
        } else {
            None
        };
        let report = InspectReport {
            pair: pair.clone(),
            family,
            weighted,
            reconstructed,
        };
        let mut text = format!("{}\nalternates:", report.pair);
        if report.family.alternates.is_empty() {
            text.push_str(" none");
        }
        for a in &report.family.alternates {
            let _ = write!(text, " {} ({})", a.pair, a.frequency);
        }
        text.push_str("\n\nlargest weights in the weighted matrix\n");
        for w in &report.weighted {
            let _ = writeln!(text, "  {:>10.4}  {}", w.weight, w.pattern);
        }
        if let Some(r) = &report.reconstructed {
            let _ = writeln!(
                text,
                "\nlargest values of the rank-{} reconstruction",
                built.model.space().k()
            );
            for w in r {
                let _ = writeln!(text, "  {:>10.4}  {}", w.weight, w.pattern);
            }
        }
        emit(self.report_prefix(), &text, &report)?;
        self.finish_stages(&stages, &built.stats.timings)
    }

    fn synth(&self, out: PathBuf, questions: usize, noun_modifiers: usize) -> Result<()> {
        let cfg = SynthConfig {
            seed: self.cfg.run.seed,
            questions,
            noun_modifiers,
            ..SynthConfig::default()
        };
        let suite = generate(&cfg);
        suite.write_to(&out)?;
        let mut run = RunConfig::default();
        run.corpus.paths = vec!["corpus".into()];
        run.inputs.thesaurus = Some("thesaurus.txt".into());
        run.inputs.sat = Some("sat.txt".into());
        run.inputs.noun_modifiers = Some("nm.csv".into());
        run.run.seed = cfg.seed;
        lra::cache::write_atomic(&out.join("lra.toml"), run.to_toml()?.as_bytes())?;
        println!(
            "wrote {} documents, {} questions and {} labeled pairs to {}",
            suite.documents.len(),
            suite.questions.len(),
            suite.noun_modifiers.len(),
            out.display()
        );
        Ok(())
    }
}
