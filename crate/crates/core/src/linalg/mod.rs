//! Sparse storage, the cosine kernel and truncated SVD.

mod sparse;
mod svd;

pub use sparse::SparseMatrix;
pub use svd::{row_cosine_consistency_check, truncated_svd, ConsistencyReport, SvdDiagnostics, SvdOptions, SvdResult};

use crate::error::{LraError, Result};

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// `u·v / (‖u‖ ‖v‖)`; errors on a zero-norm input.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    assert_eq!(u.len(), v.len(), "cosine of vectors with different lengths");
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(LraError::ZeroVector);
    }
    Ok(dot(u, v) / (nu * nv))
}

/// Cosine between two sparse rows given as column-sorted `(col, value)` lists.
pub fn sparse_cosine(u: &[(usize, f64)], v: &[(usize, f64)]) -> Result<f64> {
    let nu = u.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
    let nv = v.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(LraError::ZeroVector);
    }
    let (mut i, mut j, mut d) = (0, 0, 0.0);
    while i < u.len() && j < v.len() {
        match u[i].0.cmp(&v[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                d += u[i].1 * v[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(d / (nu * nv))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn cosine_examples() {
        assert_abs_diff_eq!(cosine(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        // 1 / sqrt(2) by hand: 0.70710678...
        assert_abs_diff_eq!(
            cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(LraError::ZeroVector)));
    }

    #[test]
    fn sparse_cosine_matches_dense() {
        let u = [(0, 1.0), (3, 2.0)];
        let v = [(1, 5.0), (3, 1.0)];
        let dense = cosine(&[1.0, 0.0, 0.0, 2.0], &[0.0, 5.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(sparse_cosine(&u, &v).unwrap(), dense, epsilon = 1e-15);
        assert!(sparse_cosine(&[], &v).is_err());
    }

    proptest! {
        #[test]
        fn cosine_is_bounded(u in proptest::collection::vec(-10.0f64..10.0, 5), v in proptest::collection::vec(-10.0f64..10.0, 5)) {
            if let Ok(c) = cosine(&u, &v) {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&c));
            }
        }
    }
}
