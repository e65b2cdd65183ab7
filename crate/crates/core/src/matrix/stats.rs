use std::collections::BTreeMap;

use serde::Serialize;

use super::SparseMatrix;

/// Summary statistics of a matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixStats {
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    /// Largest row norm (sum of absolute values), `r`.
    pub max_row_norm: u64,
    /// Fraction of coefficients equal to `+1` or `-1`.
    pub pct_pm1: f64,
    pub mean_row_weight: f64,
    /// `(row weight, number of rows)` pairs, increasing weight.
    pub row_weight_histogram: Vec<(usize, usize)>,
    /// Nonzeros per column.
    #[serde(skip)]
    pub column_counts: Vec<usize>,
}

impl MatrixStats {
    /// Column counts summed over consecutive windows of `window` columns.
    pub fn column_profile(&self, window: usize) -> Vec<usize> {
        self.column_counts
            .chunks(window.max(1))
            .map(|c| c.iter().sum())
            .collect()
    }
}

/// Exact statistics of any format; ELL padding is not counted.
pub fn matrix_stats<M: SparseMatrix + ?Sized>(m: &M) -> MatrixStats {
    let mut row_norm = vec![0u64; m.n_rows()];
    let mut row_weight = vec![0usize; m.n_rows()];
    let mut column_counts = vec![0usize; m.n_cols()];
    let mut pm1 = 0usize;
    let mut nnz = 0usize;
    m.for_each_entry(&mut |r, c, v| {
        row_norm[r] += v.unsigned_abs() as u64;
        row_weight[r] += 1;
        column_counts[c] += 1;
        if v == 1 || v == -1 {
            pm1 += 1;
        }
        nnz += 1;
    });
    let mut hist = BTreeMap::new();
    for &w in &row_weight {
        *hist.entry(w).or_insert(0usize) += 1;
    }
    MatrixStats {
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        nnz,
        max_row_norm: row_norm.into_iter().max().unwrap_or(0),
        pct_pm1: if nnz == 0 { 0.0 } else { pm1 as f64 / nnz as f64 },
        mean_row_weight: if m.n_rows() == 0 {
            0.0
        } else {
            nnz as f64 / m.n_rows() as f64
        },
        row_weight_histogram: hist.into_iter().collect(),
        column_counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CsrMatrix;

    #[test]
    fn identity_stats() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1), (1, 1, 1)]).unwrap();
        let s = matrix_stats(&m);
        assert_eq!(s.max_row_norm, 1);
        assert_eq!(s.pct_pm1, 1.0);
        assert_eq!(s.row_weight_histogram, vec![(1, 2)]);
    }

    #[test]
    fn row_norm_of_mixed_row() {
        let m = CsrMatrix::from_triplets(1, 5, vec![(0, 0, 1), (0, 1, 1), (0, 2, -1), (0, 3, 3), (0, 4, -2)]).unwrap();
        let s = matrix_stats(&m);
        assert_eq!(s.max_row_norm, 8);
        assert!((s.pct_pm1 - 0.6).abs() < 1e-12);
    }
}
