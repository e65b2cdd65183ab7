//! Per-format accumulation kernels.
//!
//! Every kernel produces, for each destination row and channel, the same
//! sequence of channel operations: the row's `+1` entries, then `-1`, then
//! `> 1`, then `< -1`, each block in column order. Formats whose storage is
//! not already in that order make one pass per category.

use std::ops::Range;

use crate::matrix::{
    Category, CompressedCsrMatrix, CooMatrix, CsrMatrix, EllMatrix, HybridMatrix, RowOrdering, SlcooMatrix,
    SparseMatrix,
};
use crate::rns::{ChannelArith, Modulus};

/// Matrix in the storage a plan executes.
#[derive(Clone, Debug)]
pub(crate) enum Prepared {
    Csr(CsrMatrix),
    Compressed(CompressedCsrMatrix),
    Coo { m: CooMatrix, row_ptr: Vec<usize> },
    Slcoo(SlcooMatrix),
    Ell(EllMatrix),
    Hybrid(HybridMatrix),
}

impl Prepared {
    pub fn coo(m: CooMatrix) -> Prepared {
        let row_ptr = (0..=m.n_rows()).map(|r| m.entry_range(0..r).end).collect();
        Prepared::Coo { m, row_ptr }
    }

    pub fn as_sparse(&self) -> &dyn SparseMatrix {
        match self {
            Prepared::Csr(m) => m,
            Prepared::Compressed(m) => m,
            Prepared::Coo { m, .. } => m,
            Prepared::Slcoo(m) => m,
            Prepared::Ell(m) => m,
            Prepared::Hybrid(m) => m,
        }
    }
}

/// Read-only inputs of one product, restricted to a channel range.
pub(crate) struct Ctx<'a> {
    pub moduli: &'a [Modulus],
    pub complement: &'a [u64],
    pub src: &'a [u64],
    pub width: usize,
    pub channels: Range<usize>,
}

impl Ctx<'_> {
    #[inline(always)]
    fn source(&self, col: u32) -> &[u64] {
        let base = col as usize * self.width;
        &self.src[base + self.channels.start..base + self.channels.end]
    }

    #[inline(always)]
    fn plus_one<A: ChannelArith>(&self, acc: &mut [u64], col: u32) {
        let y = self.source(col);
        let m = &self.moduli[self.channels.clone()];
        for ((a, &y), m) in acc.iter_mut().zip(y).zip(m) {
            *a = A::add(m, *a, y);
        }
    }

    #[inline(always)]
    fn minus_one<A: ChannelArith>(&self, acc: &mut [u64], col: u32) {
        let y = self.source(col);
        let m = &self.moduli[self.channels.clone()];
        let comp = &self.complement[self.channels.clone()];
        for (((a, &y), m), &c) in acc.iter_mut().zip(y).zip(m).zip(comp) {
            *a = A::add(m, *a, m.sub_mod(c, y));
        }
    }

    #[inline(always)]
    fn positive<A: ChannelArith>(&self, acc: &mut [u64], col: u32, lambda: u64) {
        let y = self.source(col);
        let m = &self.moduli[self.channels.clone()];
        for ((a, &y), m) in acc.iter_mut().zip(y).zip(m) {
            *a = A::addmul(m, *a, lambda, y);
        }
    }

    #[inline(always)]
    fn negative<A: ChannelArith>(&self, acc: &mut [u64], col: u32, lambda: u64) {
        let y = self.source(col);
        let m = &self.moduli[self.channels.clone()];
        let comp = &self.complement[self.channels.clone()];
        for (((a, &y), m), &c) in acc.iter_mut().zip(y).zip(m).zip(comp) {
            *a = A::addmul(m, *a, lambda, m.sub_mod(c, y));
        }
    }

    #[inline(always)]
    fn entry<A: ChannelArith>(&self, acc: &mut [u64], col: u32, value: i32) {
        match value {
            1 => self.plus_one::<A>(acc, col),
            -1 => self.minus_one::<A>(acc, col),
            v if v > 0 => self.positive::<A>(acc, col, v as u64),
            v => self.negative::<A>(acc, col, v.unsigned_abs() as u64),
        }
    }

    /// Accumulates one row's entries; `ordered` says they already come in
    /// category order.
    #[inline(always)]
    fn row<A: ChannelArith, I>(&self, acc: &mut [u64], entries: I, ordered: bool)
    where
        I: Iterator<Item = (u32, i32)> + Clone,
    {
        if ordered {
            for (c, v) in entries {
                self.entry::<A>(acc, c, v);
            }
        } else {
            for cat in Category::ALL {
                for (c, v) in entries.clone() {
                    if Category::of(v) == cat {
                        self.entry::<A>(acc, c, v);
                    }
                }
            }
        }
    }
}

/// Computes the listed rows into `out` (row-major, `channels.len()` values
/// per row). Not used for SLCOO.
pub(crate) fn eval_rows<A: ChannelArith>(
    m: &Prepared,
    ctx: &Ctx<'_>,
    rows: &mut dyn Iterator<Item = usize>,
    out: &mut Vec<u64>,
) {
    let ch = ctx.channels.len();
    for r in rows {
        let start = out.len();
        out.resize(start + ch, 0);
        let acc = &mut out[start..];
        match m {
            Prepared::Csr(m) => {
                let (cols, vals) = m.row(r);
                let entries = cols.iter().copied().zip(vals.iter().copied());
                ctx.row::<A, _>(acc, entries, m.ordering() == RowOrdering::Category);
            }
            Prepared::Compressed(m) => {
                let cr = m.compressed_row(r);
                let (plus, rest) = cr.cols.split_at(cr.plus_ones);
                let (minus, explicit_cols) = rest.split_at(cr.minus_ones);
                for &c in plus {
                    ctx.plus_one::<A>(acc, c);
                }
                for &c in minus {
                    ctx.minus_one::<A>(acc, c);
                }
                for (&c, &v) in explicit_cols.iter().zip(cr.explicit) {
                    ctx.entry::<A>(acc, c, v);
                }
            }
            Prepared::Coo { m, row_ptr } => {
                let range = row_ptr[r]..row_ptr[r + 1];
                let entries = m.col_id()[range.clone()]
                    .iter()
                    .copied()
                    .zip(m.data()[range].iter().copied());
                ctx.row::<A, _>(acc, entries, false);
            }
            Prepared::Ell(m) => {
                let (cols, vals) = m.row(r);
                let entries = cols.iter().copied().zip(vals.iter().copied()).filter(|e| e.1 != 0);
                ctx.row::<A, _>(acc, entries, m.ordering() == RowOrdering::Category);
            }
            Prepared::Hybrid(m) => {
                let ell = m.ell_part();
                let (cols, vals) = ell.row(r);
                let entries = cols
                    .iter()
                    .copied()
                    .zip(vals.iter().copied())
                    .filter(|e| e.1 != 0)
                    .chain(m.tail_row(r));
                ctx.row::<A, _>(acc, entries, ell.ordering() == RowOrdering::Category);
            }
            Prepared::Slcoo(_) => unreachable!("SLCOO is evaluated slice by slice"),
        }
    }
}

/// Computes every row of the given slices into `out`, row-major. Each slice
/// keeps a local accumulator per row and makes one pass per category over
/// its column-sorted triplets.
pub(crate) fn eval_slices<A: ChannelArith>(m: &SlcooMatrix, ctx: &Ctx<'_>, slices: Range<usize>, out: &mut Vec<u64>) {
    let ch = ctx.channels.len();
    for s in slices {
        let rows = m.slice_rows(s);
        let start = out.len();
        out.resize(start + rows.len() * ch, 0);
        let local = &mut out[start..];
        let entries = m.slice_entries(s);
        let row_id = &m.row_id()[entries.clone()];
        let col_id = &m.col_id()[entries.clone()];
        let data = &m.data()[entries];
        for cat in Category::ALL {
            for ((&r, &c), &v) in row_id.iter().zip(col_id).zip(data) {
                if Category::of(v) == cat {
                    let off = (r as usize - rows.start) * ch;
                    ctx.entry::<A>(&mut local[off..off + ch], c, v);
                }
            }
        }
    }
}
