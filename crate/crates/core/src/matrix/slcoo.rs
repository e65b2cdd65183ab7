use super::{CsrMatrix, SparseMatrix};
use crate::{Error, Result};

/// Sliced COO: the rows are cut into horizontal slices of `slice_size` rows,
/// and the triplets of each slice are sorted by column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlcooMatrix {
    n_rows: usize,
    n_cols: usize,
    slice_size: usize,
    ptr_slice: Vec<usize>,
    row_id: Vec<u32>,
    col_id: Vec<u32>,
    data: Vec<i32>,
}

impl SlcooMatrix {
    pub fn slice_size(&self) -> usize {
        self.slice_size
    }

    pub fn n_slices(&self) -> usize {
        self.ptr_slice.len() - 1
    }

    pub fn ptr_slice(&self) -> &[usize] {
        &self.ptr_slice
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

    /// Rows covered by slice `s`.
    pub fn slice_rows(&self, s: usize) -> std::ops::Range<usize> {
        let start = s * self.slice_size;
        start..(start + self.slice_size).min(self.n_rows)
    }

    pub fn slice_entries(&self, s: usize) -> std::ops::Range<usize> {
        self.ptr_slice[s]..self.ptr_slice[s + 1]
    }
}

impl SparseMatrix for SlcooMatrix {
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
}

/// Slices `m` and sorts each slice by `(col, row)`.
pub fn csr_to_slcoo(m: &CsrMatrix, slice_size: usize) -> Result<SlcooMatrix> {
    if slice_size == 0 {
        return Err(Error::InvalidParameter("slice size must be >= 1".into()));
    }
    let n_rows = m.n_rows();
    let n_slices = n_rows.div_ceil(slice_size);
    let mut ptr_slice = Vec::with_capacity(n_slices + 1);
    let mut row_id = Vec::with_capacity(m.nnz());
    let mut col_id = Vec::with_capacity(m.nnz());
    let mut data = Vec::with_capacity(m.nnz());
    let mut slice: Vec<(u32, u32, i32)> = Vec::new();
    ptr_slice.push(0);
    for s in 0..n_slices {
        slice.clear();
        for r in s * slice_size..((s + 1) * slice_size).min(n_rows) {
            let (cols, vals) = m.row(r);
            slice.extend(cols.iter().zip(vals).map(|(&c, &v)| (c, r as u32, v)));
        }
        slice.sort_unstable_by_key(|&(c, r, _)| (c, r));
        for &(c, r, v) in &slice {
            row_id.push(r);
            col_id.push(c);
            data.push(v);
        }
        ptr_slice.push(data.len());
    }
    Ok(SlcooMatrix {
        n_rows,
        n_cols: m.n_cols(),
        slice_size,
        ptr_slice,
        row_id,
        col_id,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix {
        CsrMatrix::from_triplets(
            5,
            4,
            vec![
                (0, 3, 1),
                (0, 0, 2),
                (1, 1, -1),
                (2, 2, 5),
                (3, 0, 1),
                (4, 1, 1),
                (4, 3, -3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn unit_slices_match_row_order() {
        let m = sample();
        let s = csr_to_slcoo(&m, 1).unwrap();
        assert_eq!(s.n_slices(), 5);
        let rows: Vec<u32> = s.row_id().to_vec();
        assert_eq!(rows, vec![0, 0, 1, 2, 3, 4, 4]);
        let coo = m.to_coo();
        assert_eq!(s.col_id(), coo.col_id());
    }

    #[test]
    fn single_slice_is_column_sorted() {
        let m = sample();
        let s = csr_to_slcoo(&m, 10).unwrap();
        assert_eq!(s.n_slices(), 1);
        assert!(s.col_id().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(s.triplets(), m.triplets());
    }

    #[test]
    fn slice_invariants() {
        let m = sample();
        for size in [2, 3, 4] {
            let s = csr_to_slcoo(&m, size).unwrap();
            for k in 0..s.n_slices() {
                let rows = s.slice_rows(k);
                let e = s.slice_entries(k);
                assert!(s.row_id()[e.clone()].iter().all(|&r| rows.contains(&(r as usize))));
                assert!(s.col_id()[e].windows(2).all(|w| w[0] <= w[1]));
            }
            assert_eq!(s.triplets(), m.triplets());
        }
        assert!(csr_to_slcoo(&m, 0).is_err());
    }
}
