use super::{canonical_triplets, CsrMatrix, RowOrdering, SparseMatrix};
use crate::Result;

/// Coordinate format: parallel `row_id`, `col_id`, `data` arrays sorted by
/// `(row, col)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CooMatrix {
    n_rows: usize,
    n_cols: usize,
    row_id: Vec<u32>,
    col_id: Vec<u32>,
    data: Vec<i32>,
}

impl CooMatrix {
    pub fn from_triplets(n_rows: usize, n_cols: usize, entries: Vec<(u32, u32, i32)>) -> Result<Self> {
        let entries = canonical_triplets(n_rows, n_cols, entries)?;
        Ok(Self::from_sorted_unchecked(n_rows, n_cols, &entries))
    }

    pub(crate) fn from_sorted_unchecked(n_rows: usize, n_cols: usize, entries: &[(u32, u32, i32)]) -> Self {
        CooMatrix {
            n_rows,
            n_cols,
            row_id: entries.iter().map(|e| e.0).collect(),
            col_id: entries.iter().map(|e| e.1).collect(),
            data: entries.iter().map(|e| e.2).collect(),
        }
    }

    pub fn row_id(&self) -> &[u32] {
        &self.row_id
    }

    pub fn col_id(&self) -> &[u32] {
        &self.col_id
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    /// Entry range `[start, end)` holding the given rows.
    pub fn entry_range(&self, rows: std::ops::Range<usize>) -> std::ops::Range<usize> {
        let lo = self.row_id.partition_point(|&r| (r as usize) < rows.start);
        let hi = self.row_id.partition_point(|&r| (r as usize) < rows.end);
        lo..hi
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut ptr = vec![0usize; self.n_rows + 1];
        for &r in &self.row_id {
            ptr[r as usize + 1] += 1;
        }
        for i in 0..self.n_rows {
            ptr[i + 1] += ptr[i];
        }
        CsrMatrix::from_parts_unchecked(
            self.n_rows,
            self.n_cols,
            ptr,
            self.col_id.clone(),
            self.data.clone(),
            RowOrdering::Column,
        )
    }
}

impl SparseMatrix for CooMatrix {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn nnz(&self) -> usize {
        self.data.len()
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, i32)) {
        for i in 0..self.data.len() {
            f(self.row_id[i] as usize, self.col_id[i] as usize, self.data[i]);
        }
    }

    fn triplets(&self) -> Vec<(u32, u32, i32)> {
        (0..self.data.len())
            .map(|i| (self.row_id[i], self.col_id[i], self.data[i]))
            .collect()
    }
}

/// COO to CSR.
pub fn coo_to_csr(m: &CooMatrix) -> CsrMatrix {
    m.to_csr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn validation() {
        assert!(matches!(
            CooMatrix::from_triplets(2, 2, vec![(0, 2, 1)]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            CooMatrix::from_triplets(2, 2, vec![(0, 1, 0)]),
            Err(Error::ZeroCoefficient(0))
        ));
        assert!(matches!(
            CooMatrix::from_triplets(2, 2, vec![(0, 1, 1), (0, 1, 2)]),
            Err(Error::Duplicate { .. })
        ));
        let m = CooMatrix::from_triplets(2, 3, vec![(1, 0, 4), (0, 2, -1), (0, 1, 3)]).unwrap();
        assert_eq!(m.row_id(), &[0, 0, 1]);
        assert_eq!(m.col_id(), &[1, 2, 0]);
    }

    #[test]
    fn empty_and_identity_to_csr() {
        let empty = CooMatrix::from_triplets(3, 3, vec![]).unwrap();
        assert_eq!(empty.to_csr().ptr(), &[0, 0, 0, 0]);
        let id = CooMatrix::from_triplets(2, 2, vec![(0, 0, 1), (1, 1, 1)]).unwrap();
        let csr = coo_to_csr(&id);
        assert_eq!(csr.ptr(), &[0, 1, 2]);
        assert_eq!(csr.id(), &[0, 1]);
        assert_eq!(csr.data(), &[1, 1]);
    }
}
