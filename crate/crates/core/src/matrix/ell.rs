use super::{CooMatrix, CsrMatrix, RowOrdering, SparseMatrix};
use crate::{Error, Result};

/// Relative per-entry cost of the COO tail against one ELL slot: the tail
/// streams a row index, a column index and a value.
pub const TAIL_WEIGHT: usize = 3;

/// ELLPACK: every row padded to `width` slots; padding has value 0 and
/// column 0 and follows the real entries of its row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllMatrix {
    n_rows: usize,
    n_cols: usize,
    width: usize,
    id: Vec<u32>,
    data: Vec<i32>,
    ordering: RowOrdering,
    nnz: usize,
}

impl EllMatrix {
    /// Padded row width `K`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn id(&self) -> &[u32] {
        &self.id
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    /// Entry order inherited from the source CSR.
    pub fn ordering(&self) -> RowOrdering {
        self.ordering
    }

    /// Slots of one row, padding included.
    pub fn row(&self, row: usize) -> (&[u32], &[i32]) {
        let range = row * self.width..(row + 1) * self.width;
        (&self.id[range.clone()], &self.data[range])
    }

    /// Drops the padding.
    pub fn to_csr(&self) -> CsrMatrix {
        let mut ptr = Vec::with_capacity(self.n_rows + 1);
        let mut id = Vec::with_capacity(self.nnz);
        let mut data = Vec::with_capacity(self.nnz);
        ptr.push(0);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if v != 0 {
                    id.push(c);
                    data.push(v);
                }
            }
            ptr.push(id.len());
        }
        CsrMatrix::from_parts_unchecked(self.n_rows, self.n_cols, ptr, id, data, self.ordering)
    }

    fn build(m: &CsrMatrix, width: usize) -> EllMatrix {
        let mut id = vec![0u32; m.n_rows() * width];
        let mut data = vec![0i32; m.n_rows() * width];
        let mut nnz = 0;
        for r in 0..m.n_rows() {
            let (cols, vals) = m.row(r);
            let take = cols.len().min(width);
            id[r * width..r * width + take].copy_from_slice(&cols[..take]);
            data[r * width..r * width + take].copy_from_slice(&vals[..take]);
            nnz += take;
        }
        EllMatrix {
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            width,
            id,
            data,
            ordering: m.ordering(),
            nnz,
        }
    }
}

impl SparseMatrix for EllMatrix {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn nnz(&self) -> usize {
        self.nnz
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, i32)) {
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if v != 0 {
                    f(r, c as usize, v);
                }
            }
        }
    }
}

/// Pads `m` to width `k`; fails if any row is longer.
pub fn csr_to_ell(m: &CsrMatrix, k: usize) -> Result<EllMatrix> {
    if let Some(row) = (0..m.n_rows()).find(|&r| m.row_len(r) > k) {
        return Err(Error::RowOverflow {
            row,
            len: m.row_len(row),
            width: k,
        });
    }
    Ok(EllMatrix::build(m, k))
}

/// ELL part of width `K` plus a COO tail with whatever does not fit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridMatrix {
    ell: EllMatrix,
    tail: CooMatrix,
    /// `tail_ptr[r]..tail_ptr[r + 1]` are the tail entries of row `r`.
    tail_ptr: Vec<usize>,
    /// Tail entries in source row order (the COO part itself is
    /// `(row, col)`-sorted).
    tail_order: Vec<usize>,
}

impl HybridMatrix {
    pub fn ell_part(&self) -> &EllMatrix {
        &self.ell
    }

    pub fn coo_tail(&self) -> &CooMatrix {
        &self.tail
    }

    /// Tail entries of `row` as `(col, value)` in source order.
    pub(crate) fn tail_row(&self, row: usize) -> impl Iterator<Item = (u32, i32)> + Clone + '_ {
        self.tail_order[self.tail_ptr[row]..self.tail_ptr[row + 1]]
            .iter()
            .map(|&k| (self.tail.col_id()[k], self.tail.data()[k]))
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut ptr = Vec::with_capacity(self.ell.n_rows + 1);
        let mut id = Vec::new();
        let mut data = Vec::new();
        ptr.push(0);
        for r in 0..self.ell.n_rows {
            let (cols, vals) = self.ell.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if v != 0 {
                    id.push(c);
                    data.push(v);
                }
            }
            for (c, v) in self.tail_row(r) {
                id.push(c);
                data.push(v);
            }
            ptr.push(id.len());
        }
        CsrMatrix::from_parts_unchecked(self.ell.n_rows, self.ell.n_cols, ptr, id, data, self.ell.ordering)
    }
}

impl SparseMatrix for HybridMatrix {
    fn n_rows(&self) -> usize {
        self.ell.n_rows
    }

    fn n_cols(&self) -> usize {
        self.ell.n_cols
    }

    fn nnz(&self) -> usize {
        self.ell.nnz + self.tail.nnz()
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, i32)) {
        self.ell.for_each_entry(f);
        self.tail.for_each_entry(f);
    }
}

/// The first `min(K, len)` entries of each row go to ELL, the rest to COO.
pub fn split_hybrid(m: &CsrMatrix, k: usize) -> Result<HybridMatrix> {
    if k == 0 {
        return Err(Error::InvalidParameter("hybrid width K must be >= 1".into()));
    }
    let ell = EllMatrix::build(m, k);
    let mut tail_entries = Vec::new();
    let mut tail_ptr = Vec::with_capacity(m.n_rows() + 1);
    tail_ptr.push(0);
    for r in 0..m.n_rows() {
        let (cols, vals) = m.row(r);
        for (&c, &v) in cols.iter().zip(vals).skip(k) {
            tail_entries.push((r as u32, c, v));
        }
        tail_ptr.push(tail_entries.len());
    }
    // source-order position of every tail entry after sorting by (row, col)
    let mut order: Vec<usize> = (0..tail_entries.len()).collect();
    order.sort_by_key(|&i| (tail_entries[i].0, tail_entries[i].1));
    let mut tail_order = vec![0usize; order.len()];
    for (sorted_pos, &src) in order.iter().enumerate() {
        tail_order[src] = sorted_pos;
    }
    let sorted: Vec<_> = order.iter().map(|&i| tail_entries[i]).collect();
    let tail = CooMatrix::from_sorted_unchecked(m.n_rows(), m.n_cols(), &sorted);
    Ok(HybridMatrix {
        ell,
        tail,
        tail_ptr,
        tail_order,
    })
}

/// Width minimizing `N * K + TAIL_WEIGHT * tail_nnz(K)` over `1..=max_len`;
/// the smallest such `K` on ties.
pub fn choose_hybrid_k(m: &CsrMatrix) -> usize {
    let max_len = m.max_row_len();
    if max_len == 0 {
        return 1;
    }
    // rows_longer[k] = #rows with len > k
    let mut count = vec![0usize; max_len + 1];
    for r in 0..m.n_rows() {
        count[m.row_len(r)] += 1;
    }
    let mut best = (usize::MAX, 1);
    let mut tail: usize = (0..m.n_rows()).map(|r| m.row_len(r)).sum();
    let mut longer = m.n_rows();
    for k in 1..=max_len {
        // moving from k-1 to k removes one tail entry from every row longer than k-1
        longer -= count[k - 1];
        tail -= longer;
        let cost = m.n_rows() * k + TAIL_WEIGHT * tail;
        if cost < best.0 {
            best = (cost, k);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(lengths: &[usize]) -> CsrMatrix {
        let n_cols = lengths.iter().copied().max().unwrap_or(1).max(1);
        let mut e = Vec::new();
        for (r, &len) in lengths.iter().enumerate() {
            for c in 0..len {
                e.push((r as u32, c as u32, 1));
            }
        }
        CsrMatrix::from_triplets(lengths.len(), n_cols, e).unwrap()
    }

    #[test]
    fn ell_padding() {
        let diag = CsrMatrix::from_triplets(3, 3, (0..3).map(|i| (i, i, 2)).collect()).unwrap();
        let e = csr_to_ell(&diag, 1).unwrap();
        assert!(e.data().iter().all(|&v| v != 0));
        let m = rows(&[1, 3]);
        let e = csr_to_ell(&m, 3).unwrap();
        assert_eq!(e.data().iter().filter(|&&v| v == 0).count(), 2);
        assert_eq!(e.to_csr(), m);
        assert!(matches!(csr_to_ell(&m, 2), Err(Error::RowOverflow { row: 1, .. })));
    }

    #[test]
    fn hybrid_split() {
        let m = rows(&[1, 5, 0, 3]);
        let h = split_hybrid(&m, 8).unwrap();
        assert_eq!(h.coo_tail().nnz(), 0);
        let h = split_hybrid(&m, 1).unwrap();
        assert_eq!(h.ell_part().nnz(), 3);
        assert_eq!(h.coo_tail().nnz(), 6);
        assert_eq!(h.to_csr(), m);
        assert_eq!(h.triplets(), m.triplets());
        assert!(split_hybrid(&m, 0).is_err());
    }

    #[test]
    fn choose_k_examples() {
        assert_eq!(choose_hybrid_k(&rows(&[7; 10])), 7);
        let mut lengths = vec![1usize; 99];
        lengths.push(100);
        let m = rows(&lengths);
        // brute-force enumeration of the cost model
        let cost = |k: usize| {
            let tail: usize = lengths.iter().map(|&l| l.saturating_sub(k)).sum();
            lengths.len() * k + TAIL_WEIGHT * tail
        };
        let brute = (1..=100).min_by_key(|&k| (cost(k), k)).unwrap();
        assert_eq!(brute, 1);
        assert_eq!(choose_hybrid_k(&m), brute);
    }
}
