//! Truncated SVD by Golub-Kahan-Lanczos bidiagonalization with full
//! reorthogonalization.
//!
//! The operator is arranged so that it has at least as many rows as
//! columns; then the right Lanczos basis can grow to span the whole column
//! space and an exhausted run is an exact decomposition. Breakdowns
//! (a Krylov space closing early) restart from a fresh random vector
//! orthogonal to the current basis, which also recovers repeated singular
//! values. The small bidiagonal problem is solved densely.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{cosine, dot, norm, SparseMatrix};
use crate::error::{LraError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdOptions {
    /// Ritz residual bound, relative to the largest singular value.
    pub tol: f64,
    /// Lanczos step budget per requested triplet.
    pub max_iter: usize,
    /// Seed of the random starting vectors.
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            tol: 1e-10,
            max_iter: 1000,
            seed: 0x1a7e_5eed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SvdDiagnostics {
    pub lanczos_steps: usize,
    pub restarts: usize,
    /// Largest Ritz residual among the returned triplets.
    pub max_residual: f64,
    pub transposed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// `m × k`, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Non-increasing, positive.
    pub sigma: Vec<f64>,
    /// `n × k`, orthonormal columns.
    pub v: DMatrix<f64>,
    /// Set when fewer triplets than requested exist (k above the rank).
    pub rank_limited: bool,
    pub diagnostics: SvdDiagnostics,
}

impl SvdResult {
    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    /// Row `i` of `U Σ`.
    pub fn scaled_row(&self, i: usize) -> Vec<f64> {
        (0..self.k()).map(|t| self.u[(i, t)] * self.sigma[t]).collect()
    }

    /// `U_j Σ_j V_jᵀ` using the leading `j` triplets.
    pub fn reconstruct(&self, j: usize) -> DMatrix<f64> {
        let j = j.min(self.k());
        let mut us = self.u.columns(0, j).into_owned();
        for t in 0..j {
            us.column_mut(t).scale_mut(self.sigma[t]);
        }
        us * self.v.columns(0, j).transpose()
    }
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

const CHUNK: usize = 1024;

/// Two passes of classical Gram-Schmidt against an orthonormal basis.
fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    if basis.is_empty() {
        return;
    }
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.par_iter().map(|q| dot(q, w)).collect();
        w.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            let off = ci * CHUNK;
            for (q, &c) in basis.iter().zip(&coeffs) {
                axpy(-c, &q[off..off + chunk.len()], chunk);
            }
        });
    }
}

struct Lanczos<'a> {
    op: &'a SparseMatrix,
    us: Vec<Vec<f64>>,
    vs: Vec<Vec<f64>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    pending: Option<Vec<f64>>,
    rng: ChaCha8Rng,
    scale: f64,
    restarts: usize,
}

impl<'a> Lanczos<'a> {
    fn new(op: &'a SparseMatrix, seed: u64) -> Self {
        let mut l = Lanczos {
            op,
            us: Vec::new(),
            vs: Vec::new(),
            alphas: Vec::new(),
            betas: Vec::new(),
            pending: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            scale: 0.0,
            restarts: 0,
        };
        l.pending = l.fresh(op.cols(), false);
        l
    }

    fn breakdown_tol(&self) -> f64 {
        self.scale * 16.0 * f64::EPSILON * (self.op.rows() as f64).sqrt()
    }

    /// A random unit vector orthogonal to the left (`left = true`) or right basis.
    fn fresh(&mut self, dim: usize, left: bool) -> Option<Vec<f64>> {
        for _ in 0..3 {
            let mut w: Vec<f64> = (0..dim).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
            reorthogonalize(&mut w, if left { &self.us } else { &self.vs });
            let nw = norm(&w);
            if nw > 1e-8 {
                w.iter_mut().for_each(|x| *x /= nw);
                return Some(w);
            }
        }
        None
    }

    fn steps(&self) -> usize {
        self.alphas.len()
    }

    fn exhausted(&self) -> bool {
        self.pending.is_none()
    }

    /// Coupling between the last step and the next right vector.
    fn residual_beta(&self) -> f64 {
        if self.betas.len() == self.alphas.len() {
            *self.betas.last().unwrap_or(&0.0)
        } else {
            0.0
        }
    }

    fn step(&mut self) {
        let Some(v) = self.pending.take() else {
            return;
        };
        let j = self.vs.len();
        let mut w = self.op.mul_vec(&v);
        self.vs.push(v);
        if j > 0 {
            axpy(-self.betas[j - 1], &self.us[j - 1], &mut w);
        }
        reorthogonalize(&mut w, &self.us);
        let mut alpha = norm(&w);
        self.scale = self.scale.max(alpha);
        if alpha <= self.breakdown_tol() {
            alpha = 0.0;
            match self.fresh(self.op.rows(), true) {
                Some(u) => w = u,
                None => {
                    // no room left in the row space; stop here
                    self.alphas.push(0.0);
                    self.us.push(vec![0.0; self.op.rows()]);
                    return;
                }
            }
        } else {
            w.iter_mut().for_each(|x| *x /= alpha);
        }
        self.us.push(w);
        self.alphas.push(alpha);

        if self.vs.len() == self.op.cols() {
            return;
        }
        let mut z = self.op.tmul_vec(&self.us[j]);
        axpy(-alpha, &self.vs[j], &mut z);
        reorthogonalize(&mut z, &self.vs);
        let mut beta = norm(&z);
        self.scale = self.scale.max(beta);
        if beta <= self.breakdown_tol() {
            beta = 0.0;
            self.restarts += 1;
            self.pending = self.fresh(self.op.cols(), false);
        } else {
            z.iter_mut().for_each(|x| *x /= beta);
            self.pending = Some(z);
        }
        self.betas.push(beta);
    }

    fn bidiagonal(&self) -> DMatrix<f64> {
        let l = self.steps();
        let mut b = DMatrix::zeros(l, l);
        for i in 0..l {
            b[(i, i)] = self.alphas[i];
            if i + 1 < l {
                b[(i, i + 1)] = self.betas[i];
            }
        }
        b
    }
}

struct Ritz {
    sigma: Vec<f64>,
    left: DMatrix<f64>,
    right: DMatrix<f64>,
    residual: Vec<f64>,
}

fn ritz(lz: &Lanczos<'_>) -> Ritz {
    let b = lz.bidiagonal();
    let l = b.nrows();
    let svd = b.svd(true, true);
    let (p, qt) = (svd.u.expect("left vectors"), svd.v_t.expect("right vectors"));
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&x, &y| {
        svd.singular_values[y]
            .total_cmp(&svd.singular_values[x])
            .then(x.cmp(&y))
    });
    let beta = lz.residual_beta().abs();
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = DMatrix::from_fn(l, l, |r, c| p[(r, order[c])]);
    let right = DMatrix::from_fn(l, l, |r, c| qt[(order[c], r)]);
    let residual = (0..l).map(|c| beta * left[(l - 1, c)].abs()).collect();
    Ritz {
        sigma,
        left,
        right,
        residual,
    }
}

/// `basis · coeffs[:, :k]` with the basis given as column vectors.
fn combine(basis: &[Vec<f64>], coeffs: &DMatrix<f64>, k: usize, dim: usize) -> DMatrix<f64> {
    let cols: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|t| {
            let mut out = vec![0.0; dim];
            for (i, q) in basis.iter().enumerate() {
                axpy(coeffs[(i, t)], q, &mut out);
            }
            out
        })
        .collect();
    DMatrix::from_fn(dim, k, |r, c| cols[c][r])
}

/// Top-`k` singular triplets of a sparse matrix.
///
/// If the matrix has rank below `k`, only rank-many triplets are returned
/// and `rank_limited` is set. Each left singular vector is signed so that
/// its largest-magnitude component (first on ties) is positive.
pub fn truncated_svd(x: &SparseMatrix, k: usize, opts: &SvdOptions) -> Result<SvdResult> {
    if k == 0 {
        return Err(LraError::InvalidParameter("svd rank k must be at least 1".into()));
    }
    if x.nnz() == 0 {
        return Err(LraError::EmptyMatrix);
    }
    let transposed = x.rows() < x.cols();
    let owned;
    let op = if transposed {
        owned = x.transpose();
        &owned
    } else {
        x
    };
    let p_max = op.cols();
    let k_req = k.min(p_max);
    let budget = opts.max_iter.saturating_mul(k_req).min(p_max);
    let extend = (k_req / 2).max(10);

    let mut lz = Lanczos::new(op, opts.seed);
    let mut target = (k_req + extend).min(budget);
    let (r, k_eff) = loop {
        while lz.steps() < target && !lz.exhausted() {
            lz.step();
        }
        let r = ritz(&lz);
        let smax = r.sigma.first().copied().unwrap_or(0.0);
        let rank_tol = smax * 16.0 * f64::EPSILON * op.rows() as f64;
        let nonzero = r.sigma.iter().take_while(|&&s| s > rank_tol).count();
        let k_eff = k_req.min(nonzero);
        let worst = r.residual[..k_eff].iter().copied().fold(0.0, f64::max);
        let complete = lz.exhausted() || lz.steps() >= p_max;
        let converged = worst <= opts.tol * smax && (nonzero >= k_req || complete);
        if converged || complete {
            break (r, k_eff);
        }
        if lz.steps() >= budget {
            return Err(LraError::SvdNonConvergence {
                steps: lz.steps(),
                residual: worst / smax.max(f64::MIN_POSITIVE),
                tolerance: opts.tol,
            });
        }
        target = (lz.steps() + extend).min(budget);
    };

    let (m, n) = (op.rows(), op.cols());
    let mut u = combine(&lz.us, &r.left, k_eff, m);
    let mut v = combine(&lz.vs, &r.right, k_eff, n);
    if transposed {
        std::mem::swap(&mut u, &mut v);
    }
    for t in 0..k_eff {
        let mut best = 0;
        for i in 0..u.nrows() {
            if u[(i, t)].abs() > u[(best, t)].abs() {
                best = i;
            }
        }
        if u[(best, t)] < 0.0 {
            u.column_mut(t).neg_mut();
            v.column_mut(t).neg_mut();
        }
    }
    let max_residual = r.residual[..k_eff].iter().copied().fold(0.0, f64::max);
    Ok(SvdResult {
        u,
        sigma: r.sigma[..k_eff].to_vec(),
        v,
        rank_limited: k > k_eff,
        diagnostics: SvdDiagnostics {
            lanczos_steps: lz.steps(),
            restarts: lz.restarts,
            max_residual,
            transposed,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub pairs_checked: usize,
    pub max_deviation: f64,
    /// Deviation above 1e-6, expected when `k` is below the rank.
    pub lossy: bool,
}

/// Compares row cosines of `X` with row cosines of `U Σ`.
///
/// Checks every row pair when `X` has at most 200 rows, otherwise a seeded
/// sample of 20 000 pairs. Zero rows are skipped.
pub fn row_cosine_consistency_check(x: &SparseMatrix, svd: &SvdResult) -> ConsistencyReport {
    let m = x.rows();
    let pairs: Vec<(usize, usize)> = if m <= 200 {
        (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        (0..20_000)
            .map(|_| (rng.gen_range(0..m), rng.gen_range(0..m)))
            .filter(|(i, j)| i != j)
            .collect()
    };
    let rows: Vec<Vec<(usize, f64)>> = (0..m).map(|i| x.row(i).collect()).collect();
    let mut checked = 0;
    let mut max_deviation: f64 = 0.0;
    for (i, j) in pairs {
        let Ok(cx) = super::sparse_cosine(&rows[i], &rows[j]) else {
            continue;
        };
        let cu = cosine(&svd.scaled_row(i), &svd.scaled_row(j)).unwrap_or(0.0);
        max_deviation = max_deviation.max((cx - cu).abs());
        checked += 1;
    }
    ConsistencyReport {
        pairs_checked: checked,
        max_deviation,
        lossy: max_deviation > 1e-6,
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn orthonormality_residual(q: &DMatrix<f64>) -> f64 {
        let g = q.transpose() * q;
        (g - DMatrix::identity(q.ncols(), q.ncols())).amax()
    }

    #[test]
    fn diagonal() {
        let x = SparseMatrix::from_triplets(3, 3, vec![(0, 0, 3.0), (1, 1, 2.0), (2, 2, 1.0)]);
        let svd = truncated_svd(&x, 2, &SvdOptions::default()).unwrap();
        assert_abs_diff_eq!(svd.sigma[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(svd.sigma[1], 2.0, epsilon = 1e-12);
        assert!(!svd.rank_limited);
    }

    #[test]
    fn repeated_singular_values() {
        let x = SparseMatrix::from_triplets(4, 4, (0..4).map(|i| (i, i, 2.0)).collect());
        let svd = truncated_svd(&x, 4, &SvdOptions::default()).unwrap();
        assert_eq!(svd.sigma.len(), 4);
        for s in &svd.sigma {
            assert_abs_diff_eq!(*s, 2.0, epsilon = 1e-12);
        }
        assert!(orthonormality_residual(&svd.u) < 1e-8);
    }

    #[test]
    fn rank_one_outer_product() {
        let u = [1.0, 2.0, 0.5, 3.0];
        let v = [0.2, 1.0, 4.0];
        let mut t = Vec::new();
        for (i, a) in u.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                t.push((i, j, a * b));
            }
        }
        let x = SparseMatrix::from_triplets(4, 3, t);
        let svd = truncated_svd(&x, 3, &SvdOptions::default()).unwrap();
        assert_eq!(svd.k(), 1);
        assert!(svd.rank_limited);
        assert_abs_diff_eq!(svd.sigma[0], norm(&u) * norm(&v), epsilon = 1e-8);
        for i in 0..4 {
            for j in 0..4 {
                let c = cosine(&svd.scaled_row(i), &svd.scaled_row(j)).unwrap();
                assert_abs_diff_eq!(c, 1.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn wide_matrix_is_transposed_internally() {
        let x = SparseMatrix::from_triplets(2, 5, vec![(0, 0, 1.0), (0, 3, 2.0), (1, 4, 5.0), (1, 1, 1.0)]);
        let svd = truncated_svd(&x, 2, &SvdOptions::default()).unwrap();
        assert!(svd.diagnostics.transposed);
        assert_eq!(svd.u.shape(), (2, 2));
        assert_eq!(svd.v.shape(), (5, 2));
        let err = (svd.reconstruct(2) - x.to_dense()).norm();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn sign_convention() {
        let x = SparseMatrix::from_triplets(3, 2, vec![(0, 0, -1.0), (1, 0, -3.0), (2, 1, 2.0)]);
        let svd = truncated_svd(&x, 2, &SvdOptions::default()).unwrap();
        for t in 0..svd.k() {
            let col = svd.u.column(t);
            let big = col
                .iter()
                .copied()
                .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn errors() {
        let x = SparseMatrix::zeros(3, 3);
        assert!(matches!(
            truncated_svd(&x, 1, &SvdOptions::default()),
            Err(LraError::EmptyMatrix)
        ));
        let x = SparseMatrix::from_triplets(1, 1, vec![(0, 0, 1.0)]);
        assert!(truncated_svd(&x, 0, &SvdOptions::default()).is_err());
    }

    #[test]
    fn step_budget_is_enforced() {
        // an ill-separated spectrum needs more than one step per triplet
        let t: Vec<_> = (0..30)
            .flat_map(|i| (0..30).map(move |j| (i, j, ((i * 7 + j * 13) % 11) as f64 + if i == j { 0.5 } else { 0.0 })))
            .collect();
        let x = SparseMatrix::from_triplets(30, 30, t);
        let opts = SvdOptions {
            max_iter: 1,
            tol: 1e-14,
            ..SvdOptions::default()
        };
        assert!(matches!(
            truncated_svd(&x, 3, &opts),
            Err(LraError::SvdNonConvergence { .. })
        ));
    }

    #[test]
    fn one_by_one_consistency() {
        let x = SparseMatrix::from_triplets(1, 1, vec![(0, 0, 2.5)]);
        let svd = truncated_svd(&x, 1, &SvdOptions::default()).unwrap();
        let report = row_cosine_consistency_check(&x, &svd);
        assert_eq!(report.max_deviation, 0.0);
        assert!(!report.lossy);
    }

    #[test]
    fn truncation_is_flagged_lossy() {
        let x = SparseMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 1.0), (1, 1, 1.0), (2, 2, 0.9), (0, 1, 0.1), (2, 0, 0.2)],
        );
        let full = truncated_svd(&x, 3, &SvdOptions::default()).unwrap();
        assert!(!row_cosine_consistency_check(&x, &full).lossy);
        let cut = truncated_svd(&x, 1, &SvdOptions::default()).unwrap();
        assert!(row_cosine_consistency_check(&x, &cut).lossy);
    }
}
