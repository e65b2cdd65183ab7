use super::{CsrMatrix, SparseMatrix};

/// Row order produced by [`permute_rows_balanced`]. Position `i` of the
/// permuted matrix holds source row `order[i]`; dealing positions round-robin
/// to `workers` partitions gives each partition about the same weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowPermutation {
    pub order: Vec<usize>,
    pub workers: usize,
}

impl RowPermutation {
    pub fn identity(n: usize, workers: usize) -> Self {
        RowPermutation {
            order: (0..n).collect(),
            workers: workers.max(1),
        }
    }

    /// Source rows dealt to worker `w`.
    pub fn partition(&self, w: usize) -> Vec<usize> {
        self.order.iter().copied().skip(w).step_by(self.workers).collect()
    }

    /// Maps an output computed on the permuted matrix back to source order.
    pub fn unpermute<T: Clone>(&self, permuted: &[T]) -> Vec<T> {
        let mut out = permuted.to_vec();
        for (pos, &src) in self.order.iter().enumerate() {
            out[src] = permuted[pos].clone();
        }
        out
    }
}

/// Longest-processing-time assignment of rows to `workers` partitions, each
/// capped at its number of round-robin slots, serialized so that dealing the
/// permuted rows round-robin reproduces the assignment.
///
/// Rows of equal length are left in source order; when every row has the same
/// length the identity permutation comes back.
pub fn permute_rows_balanced(m: &CsrMatrix, workers: usize) -> (CsrMatrix, RowPermutation) {
    let workers = workers.max(1);
    let n = m.n_rows();
    let lengths: Vec<usize> = (0..n).map(|r| m.row_len(r)).collect();
    if lengths.windows(2).all(|w| w[0] == w[1]) {
        let perm = RowPermutation::identity(n, workers);
        return (m.clone(), perm);
    }

    let slots: Vec<usize> = (0..workers).map(|w| (n + workers - 1 - w) / workers).collect();
    let mut by_len: Vec<usize> = (0..n).collect();
    by_len.sort_by_key(|&r| std::cmp::Reverse(lengths[r]));

    let mut load = vec![0usize; workers];
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); workers];
    for r in by_len {
        let w = (0..workers)
            .filter(|&w| assigned[w].len() < slots[w])
            .min_by_key(|&w| (load[w], w))
            .expect("slot counts cover every row");
        load[w] += lengths[r];
        assigned[w].push(r);
    }

    let mut order = vec![0usize; n];
    for (w, rows) in assigned.iter().enumerate() {
        for (i, &r) in rows.iter().enumerate() {
            order[w + i * workers] = r;
        }
    }
    let perm = RowPermutation { order, workers };
    (m.permute_rows(&perm.order), perm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(lengths: &[usize]) -> CsrMatrix {
        let n_cols = lengths.iter().copied().max().unwrap();
        let mut e = Vec::new();
        for (r, &len) in lengths.iter().enumerate() {
            for c in 0..len {
                e.push((r as u32, c as u32, 1));
            }
        }
        CsrMatrix::from_triplets(lengths.len(), n_cols, e).unwrap()
    }

    fn weights(m: &CsrMatrix, perm: &RowPermutation) -> Vec<usize> {
        (0..perm.workers)
            .map(|w| perm.partition(w).iter().map(|&r| m.row_len(r)).sum())
            .collect()
    }

    #[test]
    fn uniform_rows_keep_identity() {
        let m = rows(&[4; 9]);
        let (p, perm) = permute_rows_balanced(&m, 3);
        assert_eq!(perm.order, (0..9).collect::<Vec<_>>());
        assert_eq!(p, m);
    }

    #[test]
    fn two_heavy_rows_split() {
        let m = rows(&[10, 1, 1, 1, 1, 1, 1, 10]);
        let (p, perm) = permute_rows_balanced(&m, 2);
        assert_eq!(weights(&m, &perm), vec![13, 13]);
        assert_eq!(p.nnz(), m.nnz());
        let mut sorted = perm.order.clone();
        sorted.sort();
        assert_eq!(sorted, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn unpermute_restores_order() {
        let perm = RowPermutation {
            order: vec![2, 0, 1],
            workers: 2,
        };
        assert_eq!(perm.unpermute(&['c', 'a', 'b']), vec!['a', 'b', 'c']);
    }
}
