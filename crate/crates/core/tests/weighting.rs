use std::collections::HashSet;

use lra::linalg::SparseMatrix;
use lra::matrix::{entropy_weights, Layout, PairPatternMatrix};
use lra::pair::{Direction, WordPair};
use lra::pattern::{generate_patterns, DirectedPattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Column weight straight from the definition, on a dense column.
fn oracle_weight(column: &[f64]) -> f64 {
    let m = column.len() as f64;
    let total: f64 = column.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &x in column {
        if x > 0.0 {
            let p = x / total;
            h -= p * p.ln();
        }
    }
    1.0 - h / m.ln()
}

fn column_matrix(column: &[f64]) -> SparseMatrix {
    let t = column
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| (i, 0, v))
        .collect();
    SparseMatrix::from_triplets(column.len(), 1, t)
}

#[test]
fn entropy_weights_match_the_definition_on_random_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let m = rng.gen_range(2..40);
        let density = rng.gen_range(0.05..1.0);
        let column: Vec<f64> = (0..m)
            .map(|_| {
                if rng.gen_bool(density) {
                    rng.gen_range(1..500) as f64
                } else {
                    0.0
                }
            })
            .collect();
        let w = entropy_weights(&column_matrix(&column)).unwrap()[0];
        assert!((0.0..=1.0).contains(&w), "{w} for {column:?}");
        assert!((w - oracle_weight(&column)).abs() <= 1e-12, "{column:?}");
    }
}

#[test]
fn uniform_columns_weigh_zero_and_spikes_weigh_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let m = rng.gen_range(2..60);
        let v = rng.gen_range(1..100) as f64;
        let w = entropy_weights(&column_matrix(&vec![v; m])).unwrap()[0];
        assert!(w.abs() <= 1e-12, "uniform {m}x{v}: {w}");
        let mut spike = vec![0.0; m];
        spike[rng.gen_range(0..m)] = v;
        assert_eq!(entropy_weights(&column_matrix(&spike)).unwrap()[0], 1.0);
    }
}

#[test]
fn weights_come_from_raw_counts_before_the_log() {
    // Raw (1, 9) and log-transformed (ln 2, ln 10) give different entropies.
    let rows = vec![WordPair::new("a", "b").unwrap(), WordPair::new("c", "d").unwrap()];
    let cols = vec![DirectedPattern {
        pattern: "of".parse().unwrap(),
        direction: Direction::Forward,
    }];
    let cells = SparseMatrix::from_triplets(2, 1, vec![(0, 0, 1.0), (1, 0, 9.0)]);
    let (weighted, weights) = PairPatternMatrix::new(rows, cols, cells, Layout::Directed)
        .apply_log_entropy()
        .unwrap();
    let raw = oracle_weight(&[1.0, 9.0]);
    let logged = oracle_weight(&[2f64.ln(), 10f64.ln()]);
    assert!((weights[0] - raw).abs() <= 1e-12);
    assert!((weights[0] - logged).abs() > 1e-3);
    assert!((weighted.cells().get(0, 0) - raw * 2f64.ln()).abs() <= 1e-12);
    assert!((weighted.cells().get(1, 0) - raw * 10f64.ln()).abs() <= 1e-12);
}

#[test]
fn phrases_of_three_to_five_words_give_two_to_eight_patterns() {
    let vocab = ["of", "the", "in", "a", "for", "with", "of", "at"];
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..500 {
        let len = rng.gen_range(3..=5);
        let inner: Vec<&str> = (0..len - 2).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect();
        let patterns = generate_patterns(&inner);
        let distinct: HashSet<String> = patterns.iter().map(|p| p.to_string()).collect();
        assert_eq!(distinct.len(), 1 << (len - 2), "{inner:?}");
        // each pattern matches the phrase it came from
        assert!(patterns.iter().all(|p| p.matches(&inner)));
    }
}
