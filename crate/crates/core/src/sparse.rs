//! Compressed sparse column storage for the constraint matrix.

use serde::{Deserialize, Serialize};

use crate::Error;

/// A real matrix in compressed sparse column form.
///
/// Row indices inside each column are sorted and unique; explicit zeros are
/// never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CscMatrix {
            nrows,
            ncols,
            col_ptr: vec![0; ncols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicate entries
    /// are summed and entries that sum to exactly zero are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, Error> {
        let mut counts = vec![0usize; ncols];
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::Dimension(format!(
                    "triplet ({i}, {j}) outside a {nrows}x{ncols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Model(format!("non-finite coefficient at ({i}, {j})")));
            }
            counts[j] += 1;
        }
        let mut start = vec![0usize; ncols + 1];
        for j in 0..ncols {
            start[j + 1] = start[j] + counts[j];
        }
        let mut next = start.clone();
        let mut rows = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            rows[next[j]] = i;
            vals[next[j]] = v;
            next[j] += 1;
        }

        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for j in 0..ncols {
            scratch.clear();
            scratch.extend((start[j]..start[j + 1]).map(|p| (rows[p], vals[p])));
            scratch.sort_by_key(|&(i, _)| i);
            let mut k = 0;
            while k < scratch.len() {
                let i = scratch[k].0;
                let mut sum = 0.0;
                while k < scratch.len() && scratch[k].0 == i {
                    sum += scratch[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    row_idx.push(i);
                    values.push(sum);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(CscMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Builds a matrix from dense rows.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, Error> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Dimension("ragged dense rows".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&i, &a) in rows.iter().zip(vals) {
                y[i] += a * xj;
            }
        }
        y
    }

    /// `y = Aᵀ x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.nrows);
        (0..self.ncols)
            .map(|j| {
                let (rows, vals) = self.col(j);
                rows.iter().zip(vals).map(|(&i, &a)| a * x[i]).sum()
            })
            .collect()
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut counts = vec![0usize; self.nrows + 1];
        for &i in &self.row_idx {
            counts[i + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut row_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                row_idx[next[i]] = j;
                values[next[i]] = v;
                next[i] += 1;
            }
        }
        CscMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }

    /// Largest absolute entry, 0 for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut sums = vec![0.0; self.nrows];
        for (i, _, v) in self.triplets() {
            sums[i] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Number of stored entries per row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.nrows];
        for &i in &self.row_idx {
            counts[i] += 1;
        }
        counts
    }

    /// Keeps the listed rows and columns (in the given order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> CscMatrix {
        let mut row_map = vec![usize::MAX; self.nrows];
        for (new, &old) in rows.iter().enumerate() {
            row_map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_j, &j) in cols.iter().enumerate() {
            let (ri, vals) = self.col(j);
            for (&i, &v) in ri.iter().zip(vals) {
                if row_map[i] != usize::MAX {
                    triplets.push((row_map[i], new_j, v));
                }
            }
        }
        CscMatrix::from_triplets(rows.len(), cols.len(), &triplets)
            .expect("selection of a valid matrix is valid")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let a =
            CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0), (1, 1, -1.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.to_dense(), vec![vec![3.0, 0.0], vec![0.0, 0.0]]);
    }

    #[test]
    fn products_match_dense() {
        let d = vec![vec![1.0, 0.0, 2.0], vec![0.0, -3.0, 4.0]];
        let a = CscMatrix::from_dense(&d).unwrap();
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![3.0, 1.0]);
        assert_eq!(a.tr_mul_vec(&[1.0, 2.0]), vec![1.0, -6.0, 10.0]);
        assert_eq!(
            a.transpose().to_dense(),
            vec![vec![1.0, 0.0], vec![0.0, -3.0], vec![2.0, 4.0]]
        );
        assert_eq!(a.norm_inf(), 7.0);
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        assert!(CscMatrix::from_triplets(1, 1, &[(1, 0, 1.0)]).is_err());
    }
}
