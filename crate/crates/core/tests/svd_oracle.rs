mod support;

use lra::linalg::{row_cosine_consistency_check, truncated_svd, SparseMatrix, SvdOptions};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracle::{dense_cosine, jacobi_svd, oracle_row};

fn random_sparse(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> SparseMatrix {
    let m = rng.gen_range(1..=max_rows);
    let n = rng.gen_range(1..=max_cols);
    let density = rng.gen_range(0.05..0.5);
    let mut t = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.gen_bool(density) {
                t.push((i, j, rng.gen_range(0.0..5.0f64).ln_1p()));
            }
        }
    }
    if t.is_empty() {
        t.push((0, 0, 1.0));
    }
    SparseMatrix::from_triplets(m, n, t)
}

fn orthonormality(q: &DMatrix<f64>) -> f64 {
    (q.transpose() * q - DMatrix::identity(q.ncols(), q.ncols())).amax()
}

#[test]
fn matches_jacobi_oracle_on_random_sparse_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..50 {
        let x = random_sparse(&mut rng, 60, 40);
        let dense = x.to_dense();
        let oracle = jacobi_svd(&dense);
        let full = x.rows().min(x.cols());
        let svd = truncated_svd(&x, full, &SvdOptions::default()).unwrap();

        for (t, s) in oracle.sigma.iter().enumerate() {
            let got = svd.sigma.get(t).copied().unwrap_or(0.0);
            assert!((got - s).abs() <= 1e-6, "case {case}: sigma[{t}] {got} vs {s}");
        }
        assert!(orthonormality(&svd.u) <= 1e-8, "case {case}");
        assert!(orthonormality(&svd.v) <= 1e-8, "case {case}");
        assert!((svd.reconstruct(svd.k()) - &dense).norm() <= 1e-8, "case {case}");

        for i in 0..x.rows() {
            for j in i + 1..x.rows() {
                let want = dense_cosine(&oracle_row(&oracle, i), &oracle_row(&oracle, j));
                let got = dense_cosine(&svd.scaled_row(i), &svd.scaled_row(j));
                if let (Some(w), Some(g)) = (want, got) {
                    assert!((w - g).abs() <= 1e-6, "case {case}: rows {i},{j}");
                }
            }
        }
        assert!(!row_cosine_consistency_check(&x, &svd).lossy, "case {case}");

        let mut prev = f64::INFINITY;
        for k in 1..=svd.k() {
            let err = (svd.reconstruct(k) - &dense).norm();
            assert!(err <= prev + 1e-12, "case {case}: error rose at k={k}");
            prev = err;
        }
    }
}

#[test]
fn partial_decomposition_matches_leading_oracle_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let x = random_sparse(&mut rng, 50, 40);
        let oracle = jacobi_svd(&x.to_dense());
        let k = 3.min(x.rows().min(x.cols()));
        let svd = truncated_svd(&x, k, &SvdOptions::default()).unwrap();
        for t in 0..svd.k() {
            assert!((svd.sigma[t] - oracle.sigma[t]).abs() <= 1e-6);
        }
    }
}

#[test]
fn oracle_reconstructs_its_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random_sparse(&mut rng, 12, 9).to_dense();
    let o = jacobi_svd(&x);
    let mut us = o.u.clone();
    for t in 0..o.sigma.len() {
        us.column_mut(t).scale_mut(o.sigma[t]);
    }
    assert!((us * o.v.transpose() - x).norm() < 1e-10);
}
