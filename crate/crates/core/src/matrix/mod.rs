//! Sparse matrix formats over signed 32-bit coefficients.
//!
//! All formats describe the same logical object, a set of `(row, col, value)`
//! triplets with nonzero values. Conversions go through [`CsrMatrix`].

mod balance;
mod coo;
mod csr;
mod ell;
mod gen;
mod io;
mod slcoo;
mod stats;

pub use balance::{permute_rows_balanced, RowPermutation};
pub use coo::{coo_to_csr, CooMatrix};
pub use csr::{compress_values, reorder_row_categories, CompressedCsrMatrix, CsrMatrix, RowOrdering};
pub use ell::{choose_hybrid_k, csr_to_ell, split_hybrid, EllMatrix, HybridMatrix, TAIL_WEIGHT};
pub use gen::{gen_ffs_like, plant_dependent_row, GeneratorParams};
pub use io::{load_matrix, read_matrix, store_matrix, write_matrix, FileEncoding, MAGIC, VERSION};
pub use slcoo::{csr_to_slcoo, SlcooMatrix};
pub use stats::{matrix_stats, MatrixStats};

/// Read access shared by every format.
pub trait SparseMatrix {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    /// Number of stored nonzeros (padding excluded).
    fn nnz(&self) -> usize;
    /// Visits every logical nonzero once, in storage order.
    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, i32));

    /// All logical nonzeros sorted by `(row, col)`.
    fn triplets(&self) -> Vec<(u32, u32, i32)> {
        let mut out = Vec::with_capacity(self.nnz());
        self.for_each_entry(&mut |r, c, v| out.push((r as u32, c as u32, v)));
        out.sort_unstable();
        out
    }
}

/// Coefficient class driving the accumulation order: `+1`, `-1`, `> 1`,
/// `< -1`, in that order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category {
    PlusOne = 0,
    MinusOne = 1,
    Positive = 2,
    Negative = 3,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::PlusOne,
        Category::MinusOne,
        Category::Positive,
        Category::Negative,
    ];

    #[inline(always)]
    pub fn of(value: i32) -> Category {
        match value {
            1 => Category::PlusOne,
            -1 => Category::MinusOne,
            v if v > 1 => Category::Positive,
            _ => Category::Negative,
        }
    }
}

/// Validates and sorts triplets: indices in range, no zeros, no duplicates,
/// magnitudes below `2^31`.
pub(crate) fn canonical_triplets(
    n_rows: usize,
    n_cols: usize,
    mut entries: Vec<(u32, u32, i32)>,
) -> crate::Result<Vec<(u32, u32, i32)>> {
    use crate::Error;
    for (i, &(r, c, v)) in entries.iter().enumerate() {
        if r as usize >= n_rows || c as usize >= n_cols {
            return Err(Error::IndexOutOfRange {
                entry: i,
                row: r as u64,
                col: c as u64,
                n_rows: n_rows as u64,
                n_cols: n_cols as u64,
            });
        }
        if v == 0 {
            return Err(Error::ZeroCoefficient(i));
        }
        if v == i32::MIN {
            return Err(Error::CoefficientOutOfRange {
                entry: i,
                value: v as i64,
            });
        }
    }
    entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
    for w in entries.windows(2) {
        if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
            return Err(Error::Duplicate {
                row: w[0].0 as u64,
                col: w[0].1 as u64,
            });
        }
    }
    Ok(entries)
}
