use super::{Category, CooMatrix, SparseMatrix};
use crate::{Error, Result};

/// Order of entries inside each CSR row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowOrdering {
    /// Increasing column index.
    Column,
    /// Category blocks `+1, -1, >1, <-1`, increasing column within a block.
    Category,
}

/// Compressed sparse row storage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    ptr: Vec<usize>,
    id: Vec<u32>,
    data: Vec<i32>,
    ordering: RowOrdering,
}

impl CsrMatrix {
    pub(crate) fn from_parts_unchecked(
        n_rows: usize,
        n_cols: usize,
        ptr: Vec<usize>,
        id: Vec<u32>,
        data: Vec<i32>,
        ordering: RowOrdering,
    ) -> Self {
        debug_assert_eq!(ptr.len(), n_rows + 1);
        debug_assert_eq!(*ptr.last().unwrap(), id.len());
        CsrMatrix {
            n_rows,
            n_cols,
            ptr,
            id,
            data,
            ordering,
        }
    }

    pub fn from_triplets(n_rows: usize, n_cols: usize, entries: Vec<(u32, u32, i32)>) -> Result<Self> {
        Ok(CooMatrix::from_triplets(n_rows, n_cols, entries)?.to_csr())
    }

    pub fn ptr(&self) -> &[usize] {
        &self.ptr
    }

    pub fn id(&self) -> &[u32] {
        &self.id
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    pub fn ordering(&self) -> RowOrdering {
        self.ordering
    }

    pub fn row_len(&self, row: usize) -> usize {
        self.ptr[row + 1] - self.ptr[row]
    }

    pub fn max_row_len(&self) -> usize {
        (0..self.n_rows).map(|r| self.row_len(r)).max().unwrap_or(0)
    }

    /// Column indices and values of one row, in storage order.
    pub fn row(&self, row: usize) -> (&[u32], &[i32]) {
        let range = self.ptr[row]..self.ptr[row + 1];
        (&self.id[range.clone()], &self.data[range])
    }

    /// Sum of absolute values of one row.
    pub fn row_norm(&self, row: usize) -> u64 {
        self.row(row).1.iter().map(|v| v.unsigned_abs() as u64).sum()
    }

    /// Largest row norm `r`.
    pub fn max_row_norm(&self) -> u64 {
        (0..self.n_rows).map(|r| self.row_norm(r)).max().unwrap_or(0)
    }

    pub fn to_coo(&self) -> CooMatrix {
        CooMatrix::from_sorted_unchecked(self.n_rows, self.n_cols, &self.triplets())
    }

    /// Copy with rows taken in the order `order[0], order[1], ...`.
    pub fn permute_rows(&self, order: &[usize]) -> CsrMatrix {
        let mut ptr = Vec::with_capacity(self.n_rows + 1);
        let mut id = Vec::with_capacity(self.id.len());
        let mut data = Vec::with_capacity(self.data.len());
        ptr.push(0);
        for &r in order {
            let (cols, vals) = self.row(r);
            id.extend_from_slice(cols);
            data.extend_from_slice(vals);
            ptr.push(id.len());
        }
        CsrMatrix::from_parts_unchecked(self.n_rows, self.n_cols, ptr, id, data, self.ordering)
    }
}

impl SparseMatrix for CsrMatrix {
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
        for r in 0..self.n_rows {
            for k in self.ptr[r]..self.ptr[r + 1] {
                f(r, self.id[k] as usize, self.data[k]);
            }
        }
    }
}

/// Stable per-row partition into the category blocks `+1, -1, >1, <-1`.
pub fn reorder_row_categories(m: &CsrMatrix) -> CsrMatrix {
    let mut id = Vec::with_capacity(m.id.len());
    let mut data = Vec::with_capacity(m.data.len());
    let mut scratch: Vec<(u32, i32)> = Vec::new();
    for r in 0..m.n_rows {
        let (cols, vals) = m.row(r);
        scratch.clear();
        scratch.extend(cols.iter().copied().zip(vals.iter().copied()));
        scratch.sort_by_key(|&(c, v)| (Category::of(v), c));
        for &(c, v) in &scratch {
            id.push(c);
            data.push(v);
        }
    }
    CsrMatrix::from_parts_unchecked(m.n_rows, m.n_cols, m.ptr.clone(), id, data, RowOrdering::Category)
}

/// Category-reordered CSR whose `data` stream replaces the `+1` and `-1`
/// blocks by their lengths. Per row: `[#(+1), #(-1), values > 1...,
/// values < -1...]`; the explicit values keep their sign, which is what
/// separates the last two blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedCsrMatrix {
    n_rows: usize,
    n_cols: usize,
    ptr: Vec<usize>,
    id: Vec<u32>,
    ptr_data: Vec<usize>,
    data: Vec<i32>,
}

/// One compressed row.
pub(crate) struct CompressedRow<'a> {
    pub cols: &'a [u32],
    pub plus_ones: usize,
    pub minus_ones: usize,
    /// Values `> 1` followed by values `< -1`.
    pub explicit: &'a [i32],
}

impl CompressedCsrMatrix {
    pub fn ptr(&self) -> &[usize] {
        &self.ptr
    }

    pub fn id(&self) -> &[u32] {
        &self.id
    }

    pub fn ptr_data(&self) -> &[usize] {
        &self.ptr_data
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    /// Compressed stream of one row.
    pub fn row_stream(&self, row: usize) -> &[i32] {
        &self.data[self.ptr_data[row]..self.ptr_data[row + 1]]
    }

    pub(crate) fn compressed_row(&self, row: usize) -> CompressedRow<'_> {
        let stream = self.row_stream(row);
        CompressedRow {
            cols: &self.id[self.ptr[row]..self.ptr[row + 1]],
            plus_ones: stream[0] as usize,
            minus_ones: stream[1] as usize,
            explicit: &stream[2..],
        }
    }

    /// Logical row as `(col, value)` pairs in category order.
    pub fn row_entries(&self, row: usize) -> Vec<(u32, i32)> {
        let cr = self.compressed_row(row);
        let values = std::iter::repeat_n(1, cr.plus_ones)
            .chain(std::iter::repeat_n(-1, cr.minus_ones))
            .chain(cr.explicit.iter().copied());
        cr.cols.iter().copied().zip(values).collect()
    }

    /// Back to category-ordered CSR.
    pub fn decompress(&self) -> CsrMatrix {
        let mut data = Vec::with_capacity(self.id.len());
        for r in 0..self.n_rows {
            data.extend(self.row_entries(r).into_iter().map(|(_, v)| v));
        }
        CsrMatrix::from_parts_unchecked(
            self.n_rows,
            self.n_cols,
            self.ptr.clone(),
            self.id.clone(),
            data,
            RowOrdering::Category,
        )
    }
}

impl SparseMatrix for CompressedCsrMatrix {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn nnz(&self) -> usize {
        self.id.len()
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, i32)) {
        for r in 0..self.n_rows {
            for (c, v) in self.row_entries(r) {
                f(r, c as usize, v);
            }
        }
    }
}

/// Compresses a category-reordered matrix; rejects any row whose entries are
/// not in category order.
pub fn compress_values(m: &CsrMatrix) -> Result<CompressedCsrMatrix> {
    let mut ptr_data = Vec::with_capacity(m.n_rows + 1);
    let mut data = Vec::new();
    ptr_data.push(0);
    for r in 0..m.n_rows {
        let (_, vals) = m.row(r);
        if vals.windows(2).any(|w| Category::of(w[0]) > Category::of(w[1])) {
            return Err(Error::NotCategoryOrdered(r));
        }
        let plus = vals.iter().filter(|&&v| v == 1).count();
        let minus = vals.iter().filter(|&&v| v == -1).count();
        data.push(plus as i32);
        data.push(minus as i32);
        data.extend(vals.iter().copied().filter(|v| v.unsigned_abs() > 1));
        ptr_data.push(data.len());
    }
    Ok(CompressedCsrMatrix {
        n_rows: m.n_rows,
        n_cols: m.n_cols,
        ptr: m.ptr.clone(),
        id: m.id.clone(),
        ptr_data,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_row(vals: &[i32]) -> CsrMatrix {
        let entries = vals.iter().enumerate().map(|(c, &v)| (0u32, c as u32, v)).collect();
        CsrMatrix::from_triplets(1, vals.len(), entries).unwrap()
    }

    #[test]
    fn reorder_example() {
        let m = one_row(&[-1, 3, 1, -2, 1]);
        let r = reorder_row_categories(&m);
        assert_eq!(r.data(), &[1, 1, -1, 3, -2]);
        assert_eq!(r.id(), &[2, 4, 0, 1, 3]);
        assert_eq!(r.ordering(), RowOrdering::Category);
        // already ordered: unchanged
        assert_eq!(reorder_row_categories(&r), r);
        assert_eq!(r.triplets(), m.triplets());
    }

    #[test]
    fn compress_examples() {
        let plus = one_row(&[1; 7]);
        let c = compress_values(&reorder_row_categories(&plus)).unwrap();
        assert_eq!(c.data(), &[7, 0]);

        let m = reorder_row_categories(&one_row(&[-1, 3, 1, -2, 1]));
        let c = compress_values(&m).unwrap();
        assert_eq!(c.data(), &[2, 1, 3, -2]);
        assert_eq!(c.ptr_data(), &[0, 4]);
        assert_eq!(c.decompress(), m);
    }

    #[test]
    fn compress_rejects_unordered() {
        let m = one_row(&[3, 1]);
        assert!(matches!(compress_values(&m), Err(Error::NotCategoryOrdered(0))));
    }

    #[test]
    fn row_norm() {
        let m = one_row(&[1, 1, -1, 3, -2]);
        assert_eq!(m.row_norm(0), 8);
        assert_eq!(m.max_row_norm(), 8);
    }
}
