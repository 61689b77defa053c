//! The whole pipeline on generated corpora with known relations.

use lra::corpus::{Corpus, TokenizerConfig};
use lra::eval::{question_pairs, run_ablation};
use lra::linalg::SvdOptions;
use lra::pair::WordPair;
use lra::pipeline::{LraModel, LraParams, Variant};
use lra::similarity::RelationalMeasure;
use lra::synth::{generate, SynthConfig, SyntheticSuite};
use lra::thesaurus::Thesaurus;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn inputs(suite: &SyntheticSuite) -> (Corpus, Thesaurus) {
    let tokenizer = TokenizerConfig {
        line_documents: false,
        sentence_boundaries: true,
    };
    let corpus = Corpus::from_texts(&suite.documents, &tokenizer);
    let thesaurus = Thesaurus::parse(&suite.thesaurus, "thesaurus").unwrap();
    (corpus, thesaurus)
}

fn suite(seed: u64) -> SyntheticSuite {
    generate(&SynthConfig {
        seed,
        ..SynthConfig::default()
    })
}

#[test]
fn similarity_is_symmetric_under_reversal() {
    let suite = suite(21);
    let (corpus, thesaurus) = inputs(&suite);
    let pairs = question_pairs(&suite.questions);
    let (model, _) = LraModel::build(
        &corpus,
        Some(&thesaurus),
        &pairs,
        &LraParams::default(),
        &Variant::default(),
        &SvdOptions::default(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut compared = 0;
    for _ in 0..400 {
        let a = pairs.choose(&mut rng).unwrap();
        let b = pairs.choose(&mut rng).unwrap();
        let forward = model.similarity(a, b);
        let backward = model.similarity(&a.reversed(), &b.reversed());
        assert_eq!(forward.map(f64::to_bits), backward.map(f64::to_bits), "{a} {b}");
        compared += forward.is_some() as usize;
    }
    assert!(compared >= 100, "only {compared} comparable draws");
}

#[test]
fn full_families_give_sixteen_cosines() {
    let suite = suite(22);
    let (corpus, thesaurus) = inputs(&suite);
    let pairs = question_pairs(&suite.questions);
    let (model, _) = LraModel::build(
        &corpus,
        Some(&thesaurus),
        &pairs,
        &LraParams::default(),
        &Variant::default(),
        &SvdOptions::default(),
    )
    .unwrap();
    let full: Vec<&WordPair> = pairs
        .iter()
        .filter(|p| {
            let family = model.families().family(p);
            family.len() == 4 && family.versions().all(|v| model.space().has_vector(v))
        })
        .collect();
    assert!(full.len() >= 10, "only {} full families", full.len());
    for w in full.windows(2) {
        let combos = model.combinations(w[0], w[1]).unwrap();
        assert_eq!(combos.len(), 16);
        assert_eq!(combos.iter().filter(|c| c.is_original).count(), 1);
    }
}

#[test]
fn planted_analogies_are_answered() {
    let suite = suite(23);
    let (corpus, thesaurus) = inputs(&suite);
    let (run, stats) = run_ablation(
        &corpus,
        Some(&thesaurus),
        &suite.questions,
        &LraParams::default(),
        &Variant::default(),
        &SvdOptions::default(),
    )
    .unwrap();
    assert_eq!(run.report.total(), 40);
    assert!(run.report.recall >= 90.0, "{}", run.report.summary());
    assert!(stats.density > 0.0 && stats.density <= 1.0);
}

#[test]
fn synonyms_rescue_pairs_that_never_meet() {
    let suite = suite(24);
    let (corpus, thesaurus) = inputs(&suite);
    let params = LraParams::default();
    let opts = SvdOptions::default();
    let full = run_ablation(
        &corpus,
        Some(&thesaurus),
        &suite.questions,
        &params,
        &Variant::default(),
        &opts,
    )
    .unwrap()
    .0;
    let bare = Variant {
        synonyms: false,
        ..Variant::default()
    };
    let without = run_ablation(&corpus, Some(&thesaurus), &suite.questions, &params, &bare, &opts)
        .unwrap()
        .0;
    assert!(without.report.skipped > 0);
    assert_eq!(full.report.skipped, 0);
    assert!(full.report.recall > without.report.recall);
}
