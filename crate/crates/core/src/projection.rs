//! Row vectors in which relational cosines are measured: rows of `U_k Σ_k`,
//! the weighted matrix itself, or truncated reconstructions.
//!
//! For the symmetric layout the SVD is computed blockwise. Rotating each
//! row mate pair and each column mate pair by 45 degrees turns the matrix
//! into `diag(S, A)` where `S[r, q] = x[2r, 2q] + x[2r, 2q + 1]` and
//! `A[r, q] = x[2r, 2q] - x[2r, 2q + 1]`. The factors of `X` follow from
//! the factors of `S` and `A`, and the row of `B:A` is the row of `A:B`
//! with the `A`-components negated, exactly. Cosines between `A:B, C:D`
//! and between `B:A, D:C` are then sums of the same floating-point
//! products in the same order.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::write_atomic;
use crate::error::{LraError, Result};
use crate::linalg::{dot, norm, sparse_cosine, truncated_svd, SparseMatrix, SvdDiagnostics, SvdOptions};
use crate::matrix::{Layout, PairPatternMatrix};
use crate::pair::WordPair;

#[derive(Debug, Clone, PartialEq)]
enum Vectors {
    Dense { dim: usize, data: Vec<f64> },
    Sparse(Vec<Vec<(usize, f64)>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSpace {
    rows: Vec<WordPair>,
    row_index: HashMap<WordPair, usize>,
    vectors: Vectors,
    zero: Vec<bool>,
    sigma: Vec<f64>,
    requested_k: Option<usize>,
    rank_limited: bool,
    diagnostics: Option<SvdDiagnostics>,
}

/// `U Σ` and `V` of the whole matrix, in its own row and column order.
struct Factors {
    us: DMatrix<f64>,
    v: DMatrix<f64>,
    sigma: Vec<f64>,
    diagnostics: SvdDiagnostics,
}

fn check_mates(matrix: &PairPatternMatrix) {
    let rows = matrix.rows();
    assert!(rows.len().is_multiple_of(2), "symmetric matrix with an odd row count");
    for r in (0..rows.len()).step_by(2) {
        assert_eq!(rows[r].reversed(), rows[r + 1], "row {r} is not followed by its mate");
    }
}

fn blocks(x: &SparseMatrix) -> (SparseMatrix, SparseMatrix) {
    let (h, w) = (x.rows() / 2, x.cols() / 2);
    let mut s = Vec::new();
    let mut a = Vec::new();
    for r in 0..h {
        let mut row: HashMap<usize, (f64, f64)> = HashMap::new();
        for (j, v) in x.row(2 * r) {
            let e = row.entry(j / 2).or_insert((0.0, 0.0));
            if j % 2 == 0 {
                e.0 = v;
            } else {
                e.1 = v;
            }
        }
        let mut qs: Vec<_> = row.into_iter().collect();
        qs.sort_by_key(|e| e.0);
        for (q, (f, b)) in qs {
            s.push((r, q, f + b));
            a.push((r, q, f - b));
        }
    }
    (
        SparseMatrix::from_triplets(h, w, s),
        SparseMatrix::from_triplets(h, w, a),
    )
}

fn merge_diag(a: &mut SvdDiagnostics, b: &SvdDiagnostics) {
    a.lanczos_steps += b.lanczos_steps;
    a.restarts += b.restarts;
    a.max_residual = a.max_residual.max(b.max_residual);
    a.transposed |= b.transposed;
}

fn factor(matrix: &PairPatternMatrix, k: usize, opts: &SvdOptions) -> Result<Factors> {
    let x = matrix.cells();
    if k == 0 {
        return Err(LraError::InvalidParameter("svd rank k must be at least 1".into()));
    }
    if x.nnz() == 0 {
        return Err(LraError::EmptyMatrix);
    }
    if matrix.layout() == Layout::Directed {
        let svd = truncated_svd(x, k, opts)?;
        let mut us = svd.u.clone();
        for t in 0..svd.k() {
            us.column_mut(t).scale_mut(svd.sigma[t]);
        }
        return Ok(Factors {
            us,
            v: svd.v,
            sigma: svd.sigma,
            diagnostics: svd.diagnostics,
        });
    }

    check_mates(matrix);
    let (s, a) = blocks(x);
    let mut diagnostics = SvdDiagnostics::default();
    // (sigma, is_anti, block result, column within block)
    let mut parts = Vec::new();
    let mut results = Vec::new();
    for (anti, block) in [(false, &s), (true, &a)] {
        if block.nnz() == 0 {
            continue;
        }
        let svd = truncated_svd(block, k, opts)?;
        merge_diag(&mut diagnostics, &svd.diagnostics);
        let idx = results.len();
        for t in 0..svd.k() {
            parts.push((svd.sigma[t], anti, idx, t));
        }
        results.push(svd);
    }
    // stable sort keeps S triplets ahead of equal A triplets
    parts.sort_by(|p, q| q.0.total_cmp(&p.0));
    parts.truncate(k);

    let half = std::f64::consts::FRAC_1_SQRT_2;
    let (m, n) = (x.rows(), x.cols());
    let mut us = DMatrix::zeros(m, parts.len());
    let mut v = DMatrix::zeros(n, parts.len());
    for (t, &(sigma, anti, idx, c)) in parts.iter().enumerate() {
        let svd = &results[idx];
        for r in 0..m / 2 {
            let e = sigma * svd.u[(r, c)] * half;
            us[(2 * r, t)] = e;
            us[(2 * r + 1, t)] = if anti { -e } else { e };
        }
        for q in 0..n / 2 {
            let e = svd.v[(q, c)] * half;
            v[(2 * q, t)] = e;
            v[(2 * q + 1, t)] = if anti { -e } else { e };
        }
    }
    Ok(Factors {
        us,
        v,
        sigma: parts.iter().map(|p| p.0).collect(),
        diagnostics,
    })
}

/// Rotates column mates `(f, r)` to `(f + r, f - r)`; for a row mate the
/// second coordinate is negated exactly.
fn rotate(row: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len() + 1);
    let mut i = 0;
    while i < row.len() {
        let q = row[i].0 / 2;
        let (mut f, mut b) = (0.0, 0.0);
        while i < row.len() && row[i].0 / 2 == q {
            if row[i].0.is_multiple_of(2) {
                f = row[i].1;
            } else {
                b = row[i].1;
            }
            i += 1;
        }
        for (j, val) in [(2 * q, f + b), (2 * q + 1, f - b)] {
            if val != 0.0 {
                out.push((j, val));
            }
        }
    }
    out
}

/// Keeps every entry at least as large as the `n`-th largest value.
/// Values tied at the boundary are all kept, so the result does not
/// depend on column order.
fn keep_largest(row: &[f64], n: usize) -> Vec<(usize, f64)> {
    if n == 0 {
        return Vec::new();
    }
    let mut sorted: Vec<f64> = row.to_vec();
    let threshold = if n >= sorted.len() {
        f64::NEG_INFINITY
    } else {
        sorted.sort_by(|a, b| b.total_cmp(a));
        sorted[n - 1]
    };
    row.iter()
        .enumerate()
        .filter(|&(_, &v)| v >= threshold && v != 0.0)
        .map(|(j, &v)| (j, v))
        .collect()
}

impl ProjectedSpace {
    fn from_parts(
        matrix: &PairPatternMatrix,
        vectors: Vectors,
        sigma: Vec<f64>,
        requested_k: Option<usize>,
        diagnostics: Option<SvdDiagnostics>,
    ) -> Self {
        let rows = matrix.rows().to_vec();
        let zero = match &vectors {
            Vectors::Dense { dim, data } => (0..rows.len())
                .map(|i| data[i * dim..(i + 1) * dim].iter().all(|&v| v == 0.0))
                .collect(),
            Vectors::Sparse(rs) => rs.iter().map(|r| r.iter().all(|e| e.1 == 0.0)).collect(),
        };
        let rank_limited = requested_k.is_some_and(|k| sigma.len() < k);
        if rank_limited {
            log::info!(
                "requested k = {}, matrix supports only {}",
                requested_k.unwrap_or(0),
                sigma.len()
            );
        }
        ProjectedSpace {
            row_index: rows.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect(),
            rows,
            vectors,
            zero,
            sigma,
            requested_k,
            rank_limited,
            diagnostics,
        }
    }

    /// Rows of `U_k Σ_k`.
    pub fn project(matrix: &PairPatternMatrix, k: usize, opts: &SvdOptions) -> Result<Self> {
        let f = factor(matrix, k, opts)?;
        let dim = f.us.ncols();
        let m = f.us.nrows();
        let data = (0..m)
            .flat_map(|i| (0..dim).map(move |t| (i, t)))
            .map(|(i, t)| f.us[(i, t)])
            .collect();
        Ok(Self::from_parts(
            matrix,
            Vectors::Dense { dim, data },
            f.sigma,
            Some(k),
            Some(f.diagnostics),
        ))
    }

    /// The weighted matrix rows themselves (no SVD). In the symmetric
    /// layout the rows are stored rotated, which leaves cosines unchanged.
    pub fn unprojected(matrix: &PairPatternMatrix) -> Self {
        let x = matrix.cells();
        let symmetric = matrix.layout() == Layout::Symmetric;
        let rows: Vec<Vec<(usize, f64)>> = (0..x.rows())
            .into_par_iter()
            .map(|i| {
                let row: Vec<(usize, f64)> = x.row(i).collect();
                if symmetric {
                    rotate(&row)
                } else {
                    row
                }
            })
            .collect();
        Self::from_parts(matrix, Vectors::Sparse(rows), Vec::new(), None, None)
    }

    /// Rows of `U_k Σ_k V_kᵀ`, each reduced to its `n` largest values.
    pub fn project_top_n(matrix: &PairPatternMatrix, k: usize, n: usize, opts: &SvdOptions) -> Result<Self> {
        let f = factor(matrix, k, opts)?;
        let symmetric = matrix.layout() == Layout::Symmetric;
        let vt = f.v.transpose();
        let rows: Vec<Vec<(usize, f64)>> = (0..f.us.nrows())
            .into_par_iter()
            .map(|i| {
                let recon = f.us.row(i) * &vt;
                let kept = keep_largest(recon.as_slice(), n);
                if symmetric {
                    rotate(&kept)
                } else {
                    kept
                }
            })
            .collect();
        Ok(Self::from_parts(
            matrix,
            Vectors::Sparse(rows),
            f.sigma,
            Some(k),
            Some(f.diagnostics),
        ))
    }

    /// Full rows of `U_k Σ_k V_kᵀ` for the given matrix rows, in column
    /// order of the matrix. Used to see which patterns dominate a pair.
    pub fn reconstruct_rows(
        matrix: &PairPatternMatrix,
        k: usize,
        opts: &SvdOptions,
        rows: &[usize],
    ) -> Result<Vec<Vec<f64>>> {
        let f = factor(matrix, k, opts)?;
        let vt = f.v.transpose();
        rows.iter()
            .map(|&i| {
                if i >= f.us.nrows() {
                    return Err(LraError::InvalidParameter(format!("row {i} out of range")));
                }
                Ok((f.us.row(i) * &vt).as_slice().to_vec())
            })
            .collect()
    }

    pub fn rows(&self) -> &[WordPair] {
        &self.rows
    }

    pub fn row_of(&self, pair: &WordPair) -> Option<usize> {
        self.row_index.get(pair).copied()
    }

    /// True when the pair has a row with at least one nonzero component.
    pub fn has_vector(&self, pair: &WordPair) -> bool {
        self.row_of(pair).is_some_and(|i| !self.zero[i])
    }

    pub fn zero_rows(&self) -> usize {
        self.zero.iter().filter(|&&z| z).count()
    }

    /// Singular values actually used (empty without SVD).
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Effective number of dimensions kept by the SVD.
    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn requested_k(&self) -> Option<usize> {
        self.requested_k
    }

    pub fn rank_limited(&self) -> bool {
        self.rank_limited
    }

    pub fn diagnostics(&self) -> Option<&SvdDiagnostics> {
        self.diagnostics.as_ref()
    }

    /// Dense vector of a pair (sparse storage is expanded).
    pub fn vector(&self, pair: &WordPair) -> Option<Vec<f64>> {
        let i = self.row_of(pair)?;
        Some(match &self.vectors {
            Vectors::Dense { dim, data } => data[i * dim..(i + 1) * dim].to_vec(),
            Vectors::Sparse(rs) => {
                let dim = rs.iter().flat_map(|r| r.last().map(|e| e.0 + 1)).max().unwrap_or(0);
                let mut out = vec![0.0; dim];
                for &(j, v) in &rs[i] {
                    out[j] = v;
                }
                out
            }
        })
    }

    /// Cosine of two pairs' rows; `None` if either is missing or zero.
    pub fn cosine(&self, p1: &WordPair, p2: &WordPair) -> Option<f64> {
        let (i, j) = (self.row_of(p1)?, self.row_of(p2)?);
        if self.zero[i] || self.zero[j] {
            return None;
        }
        match &self.vectors {
            Vectors::Dense { dim, data } => {
                let (u, v) = (&data[i * dim..(i + 1) * dim], &data[j * dim..(j + 1) * dim]);
                Some(dot(u, v) / (norm(u) * norm(v)))
            }
            Vectors::Sparse(rs) => sparse_cosine(&rs[i], &rs[j]).ok(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
        let stored = StoredSpace {
            rows: self.rows.iter().map(|p| p.to_string()).collect(),
            sigma: bits(&self.sigma),
            requested_k: self.requested_k,
            diagnostics: self
                .diagnostics
                .as_ref()
                .map(|d| (d.lanczos_steps, d.restarts, d.max_residual.to_bits(), d.transposed)),
            dense: match &self.vectors {
                Vectors::Dense { dim, data } => Some((*dim, bits(data))),
                Vectors::Sparse(_) => None,
            },
            sparse: match &self.vectors {
                Vectors::Sparse(rs) => rs
                    .iter()
                    .map(|r| r.iter().map(|&(j, v)| (j, v.to_bits())).collect())
                    .collect(),
                Vectors::Dense { .. } => Vec::new(),
            },
        };
        write_atomic(path, &serde_json::to_vec(&stored)?)
    }

    pub fn load(path: &Path, matrix: &PairPatternMatrix) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| LraError::io(path, e))?;
        let s: StoredSpace = serde_json::from_slice(&bytes)?;
        let names: Vec<String> = matrix.rows().iter().map(|p| p.to_string()).collect();
        if names != s.rows {
            return Err(LraError::Cache {
                path: path.to_path_buf(),
                message: "row order differs from the matrix".into(),
            });
        }
        let floats = |v: Vec<u64>| v.into_iter().map(f64::from_bits).collect::<Vec<f64>>();
        let vectors = match s.dense {
            Some((dim, data)) => Vectors::Dense {
                dim,
                data: floats(data),
            },
            None => Vectors::Sparse(
                s.sparse
                    .into_iter()
                    .map(|r| r.into_iter().map(|(j, v)| (j, f64::from_bits(v))).collect())
                    .collect(),
            ),
        };
        let diagnostics = s
            .diagnostics
            .map(|(lanczos_steps, restarts, res, transposed)| SvdDiagnostics {
                lanczos_steps,
                restarts,
                max_residual: f64::from_bits(res),
                transposed,
            });
        Ok(Self::from_parts(
            matrix,
            vectors,
            floats(s.sigma),
            s.requested_k,
            diagnostics,
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct StoredSpace {
    rows: Vec<String>,
    sigma: Vec<u64>,
    requested_k: Option<usize>,
    diagnostics: Option<(usize, usize, u64, bool)>,
    dense: Option<(usize, Vec<u64>)>,
    sparse: Vec<Vec<(usize, u64)>>,
}
