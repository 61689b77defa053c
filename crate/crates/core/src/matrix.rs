//! The pair-pattern frequency matrix and its log-entropy weighting.
//!
//! In the symmetric layout, rows come in mates (`2r` is `A:B`, `2r + 1` is
//! `B:A`) and columns come in mates (`2q` is `word1 P word2`, `2q + 1` is
//! `word2 P word1`). Row `2r + 1` is row `2r` with every column mate
//! swapped, so any quantity invariant under a column permutation is equal
//! for `A:B` versus `C:D` and `B:A` versus `D:C`.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::write_atomic;
use crate::error::{LraError, Result};
use crate::harvest::PhraseTable;
use crate::linalg::SparseMatrix;
use crate::pair::{Direction, PairFamily, WordPair};
use crate::pattern::{generate_patterns, DirectedPattern, Pattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    /// Both orders of every pair, both directions of every pattern.
    Symmetric,
    /// One row per pair as given, directed patterns as columns.
    Directed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairPatternMatrix {
    rows: Vec<WordPair>,
    row_index: HashMap<WordPair, usize>,
    columns: Vec<DirectedPattern>,
    cells: SparseMatrix,
    layout: Layout,
}

#[derive(Serialize, Deserialize)]
struct MatrixMeta {
    layout: Layout,
    rows: Vec<String>,
    columns: Vec<(Direction, String)>,
}

/// Distinct family members in family order.
fn distinct_members(families: &[PairFamily]) -> Vec<WordPair> {
    let mut seen = std::collections::HashSet::new();
    families
        .iter()
        .flat_map(|f| f.versions())
        .filter(|p| seen.insert((*p).clone()))
        .cloned()
        .collect()
}

/// Builds the symmetric raw-frequency matrix. Cell `(A:B, word1 P word2)`
/// counts phrases `A P B`; a pair listed in both orders gets one row mate.
pub fn build_matrix(families: &[PairFamily], patterns: &[Pattern], table: &PhraseTable) -> PairPatternMatrix {
    let mut reps: Vec<WordPair> = Vec::new();
    let mut covered = std::collections::HashSet::new();
    for p in distinct_members(families) {
        if !covered.contains(&p) {
            covered.insert(p.reversed());
            covered.insert(p.clone());
            reps.push(p);
        }
    }
    let pattern_index: HashMap<&Pattern, usize> = patterns.iter().enumerate().map(|(i, p)| (p, i)).collect();

    let per_row: Vec<Vec<(usize, usize, f64)>> = reps
        .par_iter()
        .enumerate()
        .map(|(r, pair)| {
            let mut acc: HashMap<usize, f64> = HashMap::new();
            for (dir, m) in table.phrases(pair) {
                for pat in generate_patterns(&m.intervening) {
                    if let Some(&q) = pattern_index.get(&pat) {
                        let col = 2 * q + usize::from(dir == Direction::Reverse);
                        *acc.entry(col).or_insert(0.0) += m.count as f64;
                    }
                }
            }
            let mut cells: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * acc.len());
            for (col, v) in acc {
                cells.push((2 * r, col, v));
                cells.push((2 * r + 1, col ^ 1, v));
            }
            cells
        })
        .collect();

    let rows: Vec<WordPair> = reps.iter().flat_map(|p| [p.clone(), p.reversed()]).collect();
    let columns: Vec<DirectedPattern> = patterns
        .iter()
        .flat_map(|p| {
            [Direction::Forward, Direction::Reverse].map(|direction| DirectedPattern {
                pattern: p.clone(),
                direction,
            })
        })
        .collect();
    let cells = SparseMatrix::from_triplets(rows.len(), columns.len(), per_row.into_iter().flatten().collect());
    PairPatternMatrix::new(rows, columns, cells, Layout::Symmetric)
}

/// Builds the directed matrix: one row per distinct family member as
/// given, one column per directed pattern.
pub fn build_directed_matrix(
    families: &[PairFamily],
    patterns: &[DirectedPattern],
    table: &PhraseTable,
) -> PairPatternMatrix {
    let rows = distinct_members(families);
    let index: HashMap<&DirectedPattern, usize> = patterns.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let per_row: Vec<Vec<(usize, usize, f64)>> = rows
        .par_iter()
        .enumerate()
        .map(|(r, pair)| {
            let mut out = Vec::new();
            for (direction, m) in table.phrases(pair) {
                for pattern in generate_patterns(&m.intervening) {
                    if let Some(&c) = index.get(&DirectedPattern { pattern, direction }) {
                        out.push((r, c, m.count as f64));
                    }
                }
            }
            out
        })
        .collect();
    let cells = SparseMatrix::from_triplets(rows.len(), patterns.len(), per_row.into_iter().flatten().collect());
    PairPatternMatrix::new(rows, patterns.to_vec(), cells, Layout::Directed)
}

/// Column weights `w_j = 1 - H_j / ln m`, where `H_j` is the entropy of
/// column `j` normalized to a probability vector. All-zero columns weigh 0.
pub fn entropy_weights(cells: &SparseMatrix) -> Result<Vec<f64>> {
    let m = cells.rows();
    if m < 2 {
        return Err(LraError::TooFewRows(m));
    }
    let log_m = (m as f64).ln();
    Ok((0..cells.cols())
        .map(|j| {
            let total: f64 = cells.column(j).map(|(_, v)| v).sum();
            if total <= 0.0 {
                return 0.0;
            }
            let h: f64 = cells
                .column(j)
                .filter(|&(_, v)| v > 0.0)
                .map(|(_, v)| {
                    let p = v / total;
                    -p * p.ln()
                })
                .sum();
            (1.0 - h / log_m).clamp(0.0, 1.0)
        })
        .collect())
}

impl PairPatternMatrix {
    pub fn new(rows: Vec<WordPair>, columns: Vec<DirectedPattern>, cells: SparseMatrix, layout: Layout) -> Self {
        assert_eq!(rows.len(), cells.rows());
        assert_eq!(columns.len(), cells.cols());
        let row_index = rows.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        PairPatternMatrix {
            rows,
            row_index,
            columns,
            cells,
            layout,
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn cells(&self) -> &SparseMatrix {
        &self.cells
    }

    pub fn rows(&self) -> &[WordPair] {
        &self.rows
    }

    pub fn columns(&self) -> &[DirectedPattern] {
        &self.columns
    }

    pub fn row_of(&self, pair: &WordPair) -> Option<usize> {
        self.row_index.get(pair).copied()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    /// Drops rows with no nonzero cell. In the symmetric layout mates are
    /// zero together, so the mate structure survives.
    pub fn drop_zero_rows(&self) -> (PairPatternMatrix, Vec<WordPair>) {
        let keep: Vec<usize> = (0..self.rows.len()).filter(|&i| self.cells.row_nnz(i) > 0).collect();
        let dropped = (0..self.rows.len())
            .filter(|&i| self.cells.row_nnz(i) == 0)
            .map(|i| self.rows[i].clone())
            .collect();
        let mut triplets = Vec::with_capacity(self.cells.nnz());
        for (new, &old) in keep.iter().enumerate() {
            triplets.extend(self.cells.row(old).map(|(j, v)| (new, j, v)));
        }
        let cells = SparseMatrix::from_triplets(keep.len(), self.columns.len(), triplets);
        let rows = keep.iter().map(|&i| self.rows[i].clone()).collect();
        (
            PairPatternMatrix::new(rows, self.columns.clone(), cells, self.layout),
            dropped,
        )
    }

    /// Replaces every cell `x` with `w_j ln(x + 1)`; weights are computed
    /// from the raw frequencies.
    pub fn apply_log_entropy(&self) -> Result<(PairPatternMatrix, Vec<f64>)> {
        let weights = entropy_weights(&self.cells)?;
        let cells = self.cells.map_values(|_, j, x| weights[j] * x.ln_1p());
        Ok((
            PairPatternMatrix::new(self.rows.clone(), self.columns.clone(), cells, self.layout),
            weights,
        ))
    }

    /// Writes `matrix.coo` (coordinate format) and `index.json` (row and
    /// column maps) into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let meta = MatrixMeta {
            layout: self.layout,
            rows: self.rows.iter().map(|p| p.to_string()).collect(),
            columns: self
                .columns
                .iter()
                .map(|c| (c.direction, c.pattern.to_string()))
                .collect(),
        };
        self.cells.write_coordinate(&dir.join("matrix.coo"))?;
        write_atomic(&dir.join("index.json"), &serde_json::to_vec(&meta)?)
    }

    pub fn load(dir: &Path) -> Result<PairPatternMatrix> {
        let cells = SparseMatrix::read_coordinate(&dir.join("matrix.coo"))?;
        let path = dir.join("index.json");
        let bytes = fs::read(&path).map_err(|e| LraError::io(&path, e))?;
        let meta: MatrixMeta = serde_json::from_slice(&bytes)?;
        let bad = |message: String| LraError::Cache {
            path: path.clone(),
            message,
        };
        let rows = meta
            .rows
            .iter()
            .map(|s| s.parse::<WordPair>())
            .collect::<Result<Vec<_>>>()?;
        let columns = meta
            .columns
            .into_iter()
            .map(|(direction, p)| p.parse().map(|pattern| DirectedPattern { pattern, direction }))
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != cells.rows() || columns.len() != cells.cols() {
            return Err(bad(format!(
                "index has {}x{}, matrix has {}x{}",
                rows.len(),
                columns.len(),
                cells.rows(),
                cells.cols()
            )));
        }
        Ok(PairPatternMatrix::new(rows, columns, cells, meta.layout))
    }
}
