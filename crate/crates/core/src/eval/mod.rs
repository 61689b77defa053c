//! Evaluation: analogy questions, noun-modifier classification and the
//! ablation runner.

pub mod metrics;
pub mod nm;
pub mod sat;

pub use metrics::{score_run, ClassMetrics, EvalReport, MacroMetrics, Outcome};
pub use nm::{collapse_class, knn_classify, majority_baseline, NounModifierExample, RelationGroup, Scheme};
pub use sat::{parse_questions, solve_all, solve_question, AnalogyQuestion, SatRun};

use crate::corpus::Corpus;
use crate::error::Result;
use crate::linalg::SvdOptions;
use crate::pair::WordPair;
use crate::pipeline::{LraModel, LraParams, MatrixStats, Variant};
use crate::thesaurus::Thesaurus;

/// Every distinct pair mentioned by the questions, in order of appearance.
pub fn question_pairs(questions: &[AnalogyQuestion]) -> Vec<WordPair> {
    let mut seen = std::collections::HashSet::new();
    questions
        .iter()
        .flat_map(|q| q.pairs())
        .filter(|p| seen.insert((*p).clone()))
        .cloned()
        .collect()
}

/// Builds the model for one variant over the questions' pairs and
/// answers the questions with it.
pub fn run_ablation(
    corpus: &Corpus,
    thesaurus: Option<&Thesaurus>,
    questions: &[AnalogyQuestion],
    params: &LraParams,
    variant: &Variant,
    opts: &SvdOptions,
) -> Result<(SatRun, MatrixStats)> {
    let pairs = question_pairs(questions);
    let (model, stats) = LraModel::build(corpus, thesaurus, &pairs, params, variant, opts)?;
    Ok((solve_all(questions, &model), stats))
}
