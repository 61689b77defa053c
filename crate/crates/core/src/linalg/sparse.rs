use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{LraError, Result};

/// A sparse matrix kept in both row-major and column-major compressed form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    col_values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from coordinate triplets. Duplicate coordinates are summed;
    /// entries that end up exactly zero are dropped.
    ///
    /// Panics if a coordinate is out of bounds.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        for &(r, c, _) in &triplets {
            assert!(r < rows && c < cols, "entry ({r}, {c}) outside {rows}x{cols}");
        }
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != 0.0);

        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for &(r, c, v) in &merged {
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }

        let mut col_ptr = vec![0; cols + 1];
        for &(_, c, _) in &merged {
            col_ptr[c + 1] += 1;
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut next = col_ptr.clone();
        let mut row_idx = vec![0; merged.len()];
        let mut col_values = vec![0.0; merged.len()];
        for &(r, c, v) in &merged {
            row_idx[next[c]] = r;
            col_values[next[c]] = v;
            next[c] += 1;
        }

        SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
            col_ptr,
            row_idx,
            col_values,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix::from_triplets(rows, cols, Vec::new())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Fraction of cells that are nonzero.
    pub fn density(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            0.0
        } else {
            self.nnz() as f64 / (self.rows as f64 * self.cols as f64)
        }
    }

    /// `(column, value)` entries of row `i`, in column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    /// `(row, value)` entries of column `j`, in row order.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.col_values[r].iter().copied())
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    /// All entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .into_par_iter()
            .with_min_len(256)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `y = Aᵀ x`.
    pub fn tmul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols)
            .into_par_iter()
            .with_min_len(256)
            .map(|j| self.column(j).map(|(i, v)| v * x[i]).sum())
            .collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            row_ptr: self.col_ptr.clone(),
            col_idx: self.row_idx.clone(),
            values: self.col_values.clone(),
            col_ptr: self.row_ptr.clone(),
            row_idx: self.col_idx.clone(),
            col_values: self.values.clone(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    /// Maps every stored value, dropping results that are exactly zero.
    pub fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64) -> SparseMatrix {
        let triplets = self.triplets().map(|(i, j, v)| (i, j, f(i, j, v))).collect();
        SparseMatrix::from_triplets(self.rows, self.cols, triplets)
    }

    /// Coordinate text format: a header line `rows cols nnz`, then one
    /// `row col value` line per entry in row-major order. Values are written
    /// in shortest round-trip form so reading back is bit-exact.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::with_capacity(32 * (self.nnz() + 1));
        let _ = writeln!(out, "{} {} {}", self.rows, self.cols, self.nnz());
        for (i, j, v) in self.triplets() {
            let _ = writeln!(out, "{i} {j} {v:?}");
        }
        out
    }

    pub fn from_coordinate_text(text: &str, source_name: &str) -> Result<SparseMatrix> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| LraError::parse(source_name, 1, "missing header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| LraError::parse(source_name, 1, "header must be `rows cols nnz`"))?;
        let [rows, cols, nnz] = dims[..] else {
            return Err(LraError::parse(source_name, 1, "header must be `rows cols nnz`"));
        };
        let mut triplets = Vec::with_capacity(nnz);
        for (idx, line) in lines {
            let err = || LraError::parse(source_name, idx + 1, format!("bad entry `{line}`"));
            let mut parts = line.split_whitespace();
            let (Some(r), Some(c), Some(v), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(err());
            };
            let r: usize = r.parse().map_err(|_| err())?;
            let c: usize = c.parse().map_err(|_| err())?;
            let v: f64 = v.parse().map_err(|_| err())?;
            if r >= rows || c >= cols {
                return Err(err());
            }
            triplets.push((r, c, v));
        }
        if triplets.len() != nnz {
            return Err(LraError::parse(
                source_name,
                1,
                format!("header declares {nnz} entries, found {}", triplets.len()),
            ));
        }
        Ok(SparseMatrix::from_triplets(rows, cols, triplets))
    }

    pub fn write_coordinate(&self, path: &Path) -> Result<()> {
        crate::cache::write_atomic(path, self.to_coordinate_text().as_bytes())
    }

    pub fn read_coordinate(path: &Path) -> Result<SparseMatrix> {
        let text = fs::read_to_string(path).map_err(|e| LraError::io(path, e))?;
        SparseMatrix::from_coordinate_text(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(0, 1, 1.0), (1, 2, 4.0), (0, 1, 2.0), (1, 0, 0.0)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.column(2).collect::<Vec<_>>(), vec![(1, 4.0)]);
    }

    #[test]
    fn products_match_dense() {
        let m = SparseMatrix::from_triplets(3, 2, vec![(0, 0, 1.0), (1, 1, 2.0), (2, 0, 3.0), (2, 1, -1.0)]);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![1.0, 2.0, 2.0]);
        assert_eq!(m.tmul_vec(&[1.0, 1.0, 1.0]), vec![4.0, 1.0]);
        assert_eq!(m.transpose().to_dense(), m.to_dense().transpose());
    }

    #[test]
    fn malformed_coordinate_text() {
        assert!(SparseMatrix::from_coordinate_text("", "x").is_err());
        assert!(SparseMatrix::from_coordinate_text("2 2 1\n0 5 1.0\n", "x").is_err());
        assert!(SparseMatrix::from_coordinate_text("2 2 2\n0 0 1.0\n", "x").is_err());
    }

    proptest! {
        #[test]
        fn coordinate_round_trip_is_bit_exact(
            entries in proptest::collection::vec((0usize..7, 0usize..5, proptest::num::f64::NORMAL), 0..30)
        ) {
            let m = SparseMatrix::from_triplets(7, 5, entries);
            let back = SparseMatrix::from_coordinate_text(&m.to_coordinate_text(), "x").unwrap();
            let bits = |m: &SparseMatrix| m.triplets().map(|(i, j, v)| (i, j, v.to_bits())).collect::<Vec<_>>();
            prop_assert_eq!(bits(&m), bits(&back));
        }
    }
}
