//! Synthetic matrices shaped like function-field-sieve relation matrices: a
//! few very dense leading columns, column density decaying from there on,
//! row weights close to the mean, mostly `+-1` coefficients.
//!
//! The generator works column first. Per-column counts are fixed up front
//! from the density law (so the column profile is exactly non-increasing),
//! then each column draws its rows uniformly among rows that still have room
//! below their target weight.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CooMatrix, SparseMatrix};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorParams {
    /// Matrix dimension `N` (square).
    pub n: usize,
    pub mean_row_weight: usize,
    /// Probability that a coefficient is `+-1`.
    pub pct_pm1: f64,
    /// Largest magnitude of the other coefficients (drawn from `[2, max]`).
    pub max_coeff: u32,
    /// Width of the flat dense head.
    pub dense_cols: usize,
    /// Power-law exponent of the density after the head.
    pub decay: f64,
    pub seed: u64,
}

impl GeneratorParams {
    /// Defaults close to the production FFS matrices: 92.7% `+-1`, small
    /// other coefficients, a head of `N / 50` columns.
    pub fn ffs_like(n: usize, mean_row_weight: usize, seed: u64) -> Self {
        GeneratorParams {
            n,
            mean_row_weight,
            pct_pm1: 0.927,
            max_coeff: 16,
            dense_cols: (n / 50).max(1),
            decay: 0.75,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n < 2 {
            return bad(format!("N must be >= 2, got {}", self.n));
        }
        if self.mean_row_weight == 0 || self.mean_row_weight >= self.n {
            return bad(format!(
                "mean row weight must lie in [1, N), got {}",
                self.mean_row_weight
            ));
        }
        if !(0.0..=1.0).contains(&self.pct_pm1) {
            return bad(format!("pct_pm1 must lie in [0, 1], got {}", self.pct_pm1));
        }
        if self.max_coeff >= 1 << 31 {
            return bad("max_coeff must be below 2^31".into());
        }
        if self.pct_pm1 < 1.0 && self.max_coeff < 2 {
            return bad("max_coeff must be >= 2 unless every coefficient is +-1".into());
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return bad("decay must be finite and nonnegative".into());
        }
        Ok(())
    }
}

/// Deterministic FFS-like matrix for the given parameters.
pub fn gen_ffs_like(params: &GeneratorParams) -> Result<CooMatrix> {
    params.validate()?;
    let n = params.n;
    let w = params.mean_row_weight as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let lo = ((0.8 * w).ceil() as usize).clamp(1, n);
    let hi = ((1.2 * w).floor() as usize).clamp(lo, n);
    let mut capacity: Vec<usize> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    let total: usize = capacity.iter().sum();

    let counts = column_counts(n, total, params.dense_cols, params.decay);

    let mut active: Vec<u32> = (0..n as u32).collect();
    let mut entries: Vec<(u32, u32)> = Vec::with_capacity(total);
    for (col, &count) in counts.iter().enumerate() {
        let k = count.min(active.len());
        for i in 0..k {
            let j = rng.gen_range(i..active.len());
            active.swap(i, j);
        }
        for &row in &active[..k] {
            entries.push((row, col as u32));
            capacity[row as usize] -= 1;
        }
        for i in (0..k).rev() {
            if capacity[active[i] as usize] == 0 {
                active.swap_remove(i);
            }
        }
    }
    entries.sort_unstable();

    let triplets = entries
        .into_iter()
        .map(|(r, c)| {
            let negative = rng.gen_bool(0.5);
            let magnitude = if rng.gen_bool(params.pct_pm1) {
                1
            } else {
                rng.gen_range(2..=params.max_coeff as i32)
            };
            (r, c, if negative { -magnitude } else { magnitude })
        })
        .collect();
    CooMatrix::from_triplets(n, n, triplets)
}

/// Singular copy of `m`: one seed-chosen row is replaced by the sum of two
/// other seed-chosen rows.
pub fn plant_dependent_row(m: &CooMatrix, seed: u64) -> Result<CooMatrix> {
    let n = m.n_rows();
    if n < 3 {
        return Err(Error::InvalidParameter("need at least 3 rows".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let target = rng.gen_range(0..n) as u32;
    let a = loop {
        let a = rng.gen_range(0..n) as u32;
        if a != target {
            break a;
        }
    };
    let b = loop {
        let b = rng.gen_range(0..n) as u32;
        if b != target && b != a {
            break b;
        }
    };
    let mut combined = std::collections::BTreeMap::<u32, i64>::new();
    let mut entries = Vec::with_capacity(m.nnz());
    m.for_each_entry(&mut |r, c, v| {
        let r = r as u32;
        if r == a || r == b {
            *combined.entry(c as u32).or_insert(0) += v as i64;
        }
        if r != target {
            entries.push((r, c as u32, v));
        }
    });
    for (c, v) in combined {
        if v != 0 {
            let v = i32::try_from(v)
                .ok()
                .filter(|&v| v != i32::MIN)
                .ok_or(Error::CoefficientOutOfRange {
                    entry: entries.len(),
                    value: v,
                })?;
            entries.push((target, c, v));
        }
    }
    CooMatrix::from_triplets(n, m.n_cols(), entries)
}

/// Non-increasing per-column counts summing to `total` (each at most `n`),
/// proportional to a flat head of `head` columns followed by
/// `((c + 1) / head)^-decay`.
fn column_counts(n: usize, total: usize, head: usize, decay: f64) -> Vec<usize> {
    let head = head.clamp(1, n);
    let density: Vec<f64> = (0..n)
        .map(|c| {
            if c < head {
                1.0
            } else {
                ((c + 1) as f64 / head as f64).powf(-decay)
            }
        })
        .collect();

    // cap at n, redistributing the excess over the uncapped columns
    let mut expected = vec![0.0f64; n];
    let mut capped = vec![false; n];
    loop {
        let free_total = total as f64 - capped.iter().filter(|&&c| c).count() as f64 * n as f64;
        let free_mass: f64 = (0..n).filter(|&c| !capped[c]).map(|c| density[c]).sum();
        let mut changed = false;
        for c in 0..n {
            if capped[c] {
                expected[c] = n as f64;
            } else {
                expected[c] = free_total * density[c] / free_mass;
                if expected[c] > n as f64 {
                    capped[c] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    // largest-remainder rounding
    let mut counts: Vec<usize> = expected.iter().map(|&e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut remainders: Vec<(usize, f64)> = expected.iter().map(|e| e - e.floor()).enumerate().collect();
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for &(c, _) in remainders.iter().take(total.saturating_sub(assigned)) {
        counts[c] += 1;
    }
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matrix_stats;

    #[test]
    fn one_entry_per_row() {
        let mut p = GeneratorParams::ffs_like(10, 1, 3);
        p.pct_pm1 = 1.0;
        let m = gen_ffs_like(&p).unwrap();
        assert_eq!(m.nnz(), 10);
        let s = matrix_stats(&m);
        assert_eq!(s.row_weight_histogram, vec![(1, 10)]);
        assert_eq!(s.pct_pm1, 1.0);
    }

    #[test]
    fn deterministic() {
        let p = GeneratorParams::ffs_like(300, 20, 99);
        assert_eq!(gen_ffs_like(&p).unwrap(), gen_ffs_like(&p).unwrap());
        let mut q = p.clone();
        q.seed = 100;
        assert_ne!(gen_ffs_like(&p).unwrap(), gen_ffs_like(&q).unwrap());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gen_ffs_like(&GeneratorParams::ffs_like(10, 10, 0)).is_err());
        assert!(gen_ffs_like(&GeneratorParams::ffs_like(1, 1, 0)).is_err());
        let mut p = GeneratorParams::ffs_like(10, 2, 0);
        p.pct_pm1 = 1.5;
        assert!(gen_ffs_like(&p).is_err());
    }

    #[test]
    fn counts_are_monotone_and_exact() {
        let c = column_counts(1000, 100_000, 20, 0.75);
        assert_eq!(c.iter().sum::<usize>(), 100_000);
        assert!(c.windows(2).all(|w| w[0] >= w[1]));
        assert!(c[0] <= 1000);
    }
}
