//! Accuracy matrix between ground-truth objects and proposals, and the
//! maximum-weight assignment over it.
//!
//! Each ground-truth row is matched to at most one proposal column and each
//! column is used at most once. When there are fewer proposals than objects
//! the leftover rows stay unmatched and contribute nothing. Among optimal
//! assignments the lexicographically smallest `(row, column)` sequence is
//! returned, with "unmatched" ordered after every real column.

use serde::Serialize;
use thiserror::Error;

use crate::mask::{MaskSequence, ObjectId};
use crate::pairwise::{AlignmentError, PairwiseScores};

/// Largest side the exhaustive oracle will enumerate.
pub const BRUTE_FORCE_CAP: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum AssignmentError {
    #[error("matrix has {len} values, expected {rows}x{cols}")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("score {value} at ({row}, {col}) is outside [0, 1]")]
    Score { row: usize, col: usize, value: f64 },
    #[error("brute force refuses {rows}x{cols}: cap is {cap}x{cap}")]
    TooLarge { rows: usize, cols: usize, cap: usize },
    #[error(transparent)]
    Alignment(#[from] AlignmentError),
}

/// L×N grid of pair scores, rows are ground-truth objects.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccuracyMatrix {
    row_ids: Vec<ObjectId>,
    col_ids: Vec<ObjectId>,
    values: Vec<f64>,
}

impl AccuracyMatrix {
    pub fn new(
        row_ids: Vec<ObjectId>,
        col_ids: Vec<ObjectId>,
        values: Vec<f64>,
    ) -> Result<Self, AssignmentError> {
        let (rows, cols) = (row_ids.len(), col_ids.len());
        if values.len() != rows * cols {
            return Err(AssignmentError::Shape {
                rows,
                cols,
                len: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(AssignmentError::Score {
                    row: i / cols.max(1),
                    col: i % cols.max(1),
                    value: v,
                });
            }
        }
        Ok(Self {
            row_ids,
            col_ids,
            values,
        })
    }

    /// Matrix with ids `1..=L` and `1..=N`, handy for tests.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, AssignmentError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(AssignmentError::Shape {
                rows: rows.len(),
                cols,
                len: bad.len(),
            });
        }
        Self::new(
            (1..=rows.len()).map(|i| i as ObjectId).collect(),
            (1..=cols).map(|i| i as ObjectId).collect(),
            rows.concat(),
        )
    }

    pub fn rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.col_ids.len()
    }

    pub fn row_ids(&self) -> &[ObjectId] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[ObjectId] {
        &self.col_ids
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols() + col]
    }

    /// Same matrix with columns reordered: new column `j` is old `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows() {
            values.extend(perm.iter().map(|&c| self.get(r, c)));
        }
        Self {
            row_ids: self.row_ids.clone(),
            col_ids: perm.iter().map(|&c| self.col_ids[c]).collect(),
            values,
        }
    }

    pub fn scale(&self, factor: f64) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|r| (0..self.cols()).map(|c| self.get(r, c) * factor).collect())
            .collect()
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        self.scale(1.0)
    }
}

/// Result of the matching: one entry per ground-truth row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assignment {
    /// `(gt id, proposal id)` per row, in row order.
    pub pairs: Vec<(ObjectId, Option<ObjectId>)>,
    /// Column index per row.
    pub columns: Vec<Option<usize>>,
    /// Sum of matched scores, accumulated in row order.
    pub objective: f64,
}

impl Assignment {
    fn from_columns(a: &AccuracyMatrix, columns: Vec<Option<usize>>) -> Self {
        let objective = objective_of(&a.to_rows(), &columns);
        let pairs = columns
            .iter()
            .enumerate()
            .map(|(r, c)| (a.row_ids[r], c.map(|c| a.col_ids[c])))
            .collect();
        Self {
            pairs,
            columns,
            objective,
        }
    }
}

/// Row-order sum; the single summation order used by every solver here so
/// equal pairings give bit-equal objectives.
fn objective_of(w: &[Vec<f64>], columns: &[Option<usize>]) -> f64 {
    columns
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| w[r][c]))
        .fold(0.0, |acc, v| acc + v)
}

/// Assigns `w` (rectangular, rows × cols) for maximum total weight with the
/// O(n³) shortest augmenting path method on a zero-padded square of negated
/// weights. Returns the column per row, `None` for padding.
fn hungarian(w: &[Vec<f64>], cols: usize) -> Vec<Option<usize>> {
    let rows = w.len();
    let n = rows.max(cols);
    if n == 0 {
        return Vec::new();
    }
    let cost = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols {
            -w[i][j]
        } else {
            0.0
        }
    };
    // 1-based potentials and matching, index 0 is the virtual root.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        col_owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut columns = vec![None; rows];
    for j in 1..=n {
        let i = col_owner[j];
        if i >= 1 && i <= rows && j <= cols {
            columns[i - 1] = Some(j - 1);
        }
    }
    columns
}

/// Rank of a column choice in tie-break order; unmatched sorts last.
fn rank(c: Option<usize>) -> usize {
    c.unwrap_or(usize::MAX)
}

/// Solves rows `from..` over the columns not in `taken`.
fn complete(w: &[Vec<f64>], cols: usize, from: usize, taken: &[bool]) -> Vec<Option<usize>> {
    let free: Vec<usize> = (0..cols).filter(|&c| !taken[c]).collect();
    let sub: Vec<Vec<f64>> = w[from..]
        .iter()
        .map(|row| free.iter().map(|&c| row[c]).collect())
        .collect();
    hungarian(&sub, free.len())
        .into_iter()
        .map(|c| c.map(|k| free[k]))
        .collect()
}

/// Maximum-weight assignment with deterministic tie-breaking.
pub fn solve_assignment(a: &AccuracyMatrix) -> Assignment {
    let (rows, cols) = (a.rows(), a.cols());
    let w = a.to_rows();
    let mut best = hungarian(&w, cols);
    let mut value = objective_of(&w, &best);

    // Walk rows in order and move each to the smallest column that still
    // admits an optimal completion.
    let mut taken = vec![false; cols];
    let mut fixed_sum = 0.0;
    for r in 0..rows {
        let current = rank(best[r]);
        let remaining_bound: f64 = w[r + 1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| !taken[*c])
                    .map(|(_, &v)| v)
                    .fold(0.0, f64::max)
            })
            .sum();
        let candidates: Vec<usize> = (0..cols).filter(|&c| !taken[c] && c < current).collect();
        for c in candidates {
            if fixed_sum + w[r][c] + remaining_bound + 1e-9 < value {
                continue;
            }
            taken[c] = true;
            let tail = complete(&w, cols, r + 1, &taken);
            taken[c] = false;
            let mut candidate = best[..r].to_vec();
            candidate.push(Some(c));
            candidate.extend(tail);
            let v = objective_of(&w, &candidate);
            if v >= value {
                best = candidate;
                value = v;
                break;
            }
        }
        if let Some(c) = best[r] {
            taken[c] = true;
            fixed_sum += w[r][c];
        }
    }
    Assignment::from_columns(a, best)
}

/// Exhaustive search over all injective partial maps. Test oracle; refuses
/// matrices larger than [`BRUTE_FORCE_CAP`] on either side.
pub fn brute_force_assignment(a: &AccuracyMatrix) -> Result<Assignment, AssignmentError> {
    let (rows, cols) = (a.rows(), a.cols());
    if rows > BRUTE_FORCE_CAP || cols > BRUTE_FORCE_CAP {
        return Err(AssignmentError::TooLarge {
            rows,
            cols,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let w = a.to_rows();
    let mut best: Option<(f64, Vec<Option<usize>>)> = None;
    let mut current = Vec::with_capacity(rows);
    let mut taken = vec![false; cols];
    enumerate(&w, cols, &mut current, &mut taken, &mut best);
    let (_, columns) = best.expect("at least the empty map");
    Ok(Assignment::from_columns(a, columns))
}

fn enumerate(
    w: &[Vec<f64>],
    cols: usize,
    current: &mut Vec<Option<usize>>,
    taken: &mut [bool],
    best: &mut Option<(f64, Vec<Option<usize>>)>,
) {
    if current.len() == w.len() {
        let v = objective_of(w, current);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            *best = Some((v, current.clone()));
        }
        return;
    }
    for c in 0..cols {
        if !taken[c] {
            taken[c] = true;
            current.push(Some(c));
            enumerate(w, cols, current, taken, best);
            current.pop();
            taken[c] = false;
        }
    }
    current.push(None);
    enumerate(w, cols, current, taken, best);
    current.pop();
}

/// Builds A over the evaluated frames: each entry is the mean of the pair's
/// frame-mean J and frame-mean F.
pub fn build_accuracy_matrix(
    gt: &MaskSequence,
    proposals: &MaskSequence,
    frames: &[usize],
    tolerance: f64,
) -> Result<(AccuracyMatrix, PairwiseScores), AssignmentError> {
    let scores = PairwiseScores::compute(gt, proposals, frames, tolerance)?;
    let matrix = matrix_from_scores(&scores);
    Ok((matrix, scores))
}

pub fn matrix_from_scores(scores: &PairwiseScores) -> AccuracyMatrix {
    let (l, n) = (scores.gt_ids().len(), scores.pred_ids().len());
    let mut values = Vec::with_capacity(l * n);
    for row in 0..l {
        for col in 0..n {
            values.push(scores.pair_score(row, Some(col)));
        }
    }
    AccuracyMatrix::new(scores.gt_ids().to_vec(), scores.pred_ids().to_vec(), values)
        .expect("scores are in [0, 1]")
}
