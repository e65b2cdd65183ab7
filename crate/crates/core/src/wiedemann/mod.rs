//! Wiedemann kernel-vector solver: Krylov sequence, Berlekamp-Massey, Mksol,
//! verification and retries; plus block Krylov sequence generation.

mod bm;
mod krylov;

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{Num, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use bm::{berlekamp_massey, GeneratorPoly};
pub use krylov::{
    apply_canonical, block_krylov, block_sequence_length, krylov, mksol, mksol_partial, random_vector, BlockSequence,
    ScalarSequence,
};

use crate::matrix::SparseMatrix;
use crate::oracle::oracle_spmv_mod;
use crate::spmv::SpmvPlan;
use crate::{Error, Result};
use krylov::KrylovRun;

/// Default number of attempts before [`solve`] gives up.
pub const MAX_ATTEMPTS: usize = 5;

/// Krylov terms beyond `2N`.
pub const SEQUENCE_SLACK: usize = 16;

/// `true` iff `w` is nonzero modulo `l` and `A w = 0 mod l`, computed with
/// the big-integer oracle.
pub fn check_kernel<M: SparseMatrix + ?Sized>(a: &M, w: &[BigUint], ell: &BigUint) -> bool {
    if w.len() != a.n_cols() || w.iter().all(|x| (x % ell).is_zero()) {
        return false;
    }
    match oracle_spmv_mod(a, w, ell) {
        Ok(out) => out.iter().all(Zero::is_zero),
        Err(_) => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointConfig {
    pub path: PathBuf,
    /// Write every `interval` Krylov iterations.
    pub interval: usize,
    /// Stop with [`Error::Interrupted`] right after writing the checkpoint at
    /// this iteration.
    pub halt_after: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub seed: u64,
    pub max_attempts: usize,
    pub checkpoint: Option<CheckpointConfig>,
}

impl SolveOptions {
    pub fn new(seed: u64) -> Self {
        SolveOptions {
            seed,
            max_attempts: MAX_ATTEMPTS,
            checkpoint: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTimings {
    pub krylov_seconds: f64,
    pub lingen_seconds: f64,
    pub mksol_seconds: f64,
    pub check_seconds: f64,
    pub total_seconds: f64,
}

/// Outcome of [`solve`]. Everything except `timings` is deterministic for a
/// given matrix, basis and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub n: usize,
    pub nnz: usize,
    pub basis: String,
    pub seed: u64,
    /// Attempts used, the successful one included.
    pub attempts: usize,
    pub x_index: usize,
    pub sequence_length: usize,
    pub generator_degree: usize,
    pub valuation: usize,
    /// Matrix-vector products per phase, summed over attempts.
    pub krylov_products: usize,
    pub mksol_products: usize,
    pub search_products: usize,
    pub timings: SolveTimings,
}

/// Krylov state written to disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub basis: String,
    pub n: usize,
    pub nnz: usize,
    pub matrix_digest: String,
    pub seed: u64,
    pub attempt: usize,
    pub x_index: usize,
    pub sequence_length: usize,
    /// `i` such that `vector = A^i y`.
    pub iteration: usize,
    /// Canonical coordinates, lowercase hex.
    pub vector: Vec<String>,
    /// `a_0..a_i`, lowercase hex.
    pub sequence: Vec<String>,
    /// Krylov, Mksol and search products of earlier attempts.
    pub prior_products: [usize; 3],
}

impl Checkpoint {
    pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_string(self)? + "\n")?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// FNV-1a over the sorted triplets and dimensions.
pub fn matrix_digest<M: SparseMatrix + ?Sized>(m: &M) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(m.n_rows() as u64);
    eat(m.n_cols() as u64);
    for (r, c, v) in m.triplets() {
        eat(r as u64);
        eat(c as u64);
        eat(v as u32 as u64);
    }
    format!("{h:016x}")
}

fn to_hex(v: &[BigUint]) -> Vec<String> {
    v.iter().map(|x| x.to_str_radix(16)).collect()
}

fn from_hex(v: &[String]) -> Result<Vec<BigUint>> {
    v.iter()
        .map(|s| BigUint::from_str_radix(s, 16).map_err(|_| Error::Checkpoint(format!("bad hex `{s}`"))))
        .collect()
}

/// Random right-hand vector and a coordinate where it is nonzero, for one
/// attempt.
fn attempt_vectors(ell: &BigUint, n: usize, seed: u64, attempt: usize) -> (Vec<BigUint>, Option<usize>) {
    let y = random_vector(ell, n, seed, attempt as u64);
    let nonzero: Vec<usize> = (0..n).filter(|&i| !y[i].is_zero()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1u64 << 32) + attempt as u64);
    let x = (!nonzero.is_empty()).then(|| nonzero[rng.gen_range(0..nonzero.len())]);
    (y, x)
}

/// A kernel vector of the square matrix of `plan`, canonical modulo `l`,
/// verified by [`check_kernel`].
pub fn solve(plan: &SpmvPlan, options: &SolveOptions) -> Result<(Vec<BigUint>, SolveReport)> {
    run_solve(plan, options, None)
}

/// Continues a run interrupted after writing `checkpoint`; the result equals
/// that of the uninterrupted run.
pub fn resume(plan: &SpmvPlan, options: &SolveOptions, checkpoint: &Checkpoint) -> Result<(Vec<BigUint>, SolveReport)> {
    if checkpoint.basis != plan.basis().describe() {
        return Err(Error::Checkpoint("basis differs".into()));
    }
    if checkpoint.n != plan.n_rows() || checkpoint.matrix_digest != matrix_digest(plan.matrix()) {
        return Err(Error::Checkpoint("matrix differs".into()));
    }
    if checkpoint.seed != options.seed {
        return Err(Error::Checkpoint(format!(
            "seed {} differs from checkpoint seed {}",
            options.seed, checkpoint.seed
        )));
    }
    run_solve(plan, options, Some(checkpoint))
}

fn run_solve(
    plan: &SpmvPlan,
    options: &SolveOptions,
    from: Option<&Checkpoint>,
) -> Result<(Vec<BigUint>, SolveReport)> {
    let total = Instant::now();
    let n = plan.n_rows();
    if n != plan.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: plan.n_cols(),
        });
    }
    let basis = plan.basis();
    let ell = basis.ell();
    let length = 2 * n + SEQUENCE_SLACK;
    let digest = matrix_digest(plan.matrix());
    let mut report = SolveReport {
        n,
        nnz: plan.nnz(),
        basis: basis.describe(),
        seed: options.seed,
        attempts: 0,
        x_index: 0,
        sequence_length: length,
        generator_degree: 0,
        valuation: 0,
        krylov_products: 0,
        mksol_products: 0,
        search_products: 0,
        timings: SolveTimings::default(),
    };
    let first = from.map_or(0, |c| c.attempt);
    if let Some(c) = from {
        [report.krylov_products, report.mksol_products, report.search_products] = c.prior_products;
    }

    for attempt in first..options.max_attempts {
        report.attempts = attempt + 1;
        let (y, x) = attempt_vectors(ell, n, options.seed, attempt);
        let Some(x) = x else { continue };
        report.x_index = x;

        // Krylov
        let t = Instant::now();
        let mut run = match from.filter(|c| c.attempt == attempt) {
            Some(c) => {
                if c.x_index != x || c.sequence_length != length || c.sequence.len() != c.iteration + 1 {
                    return Err(Error::Checkpoint("inconsistent Krylov state".into()));
                }
                KrylovRun::resume(plan, x, &from_hex(&c.vector)?, from_hex(&c.sequence)?)?
            }
            None => KrylovRun::start(plan, x, &y)?,
        };
        let prior_products = [report.krylov_products, report.mksol_products, report.search_products];
        if let Some(cfg) = &options.checkpoint {
            if cfg.interval == 0 {
                return Err(Error::InvalidParameter("checkpoint interval must be >= 1".into()));
            }
            let mut hook = |run: &mut KrylovRun<'_>, i: usize| -> Result<()> {
                if !i.is_multiple_of(cfg.interval) {
                    return Ok(());
                }
                let vector = run.canonical_vector();
                Checkpoint {
                    basis: basis.describe(),
                    n,
                    nnz: plan.nnz(),
                    matrix_digest: digest.clone(),
                    seed: options.seed,
                    attempt,
                    x_index: x,
                    sequence_length: length,
                    iteration: i,
                    vector: to_hex(&vector),
                    sequence: to_hex(run.terms()),
                    prior_products,
                }
                .store(&cfg.path)?;
                if cfg.halt_after == Some(i) {
                    return Err(Error::Interrupted { iteration: i });
                }
                Ok(())
            };
            run.extend(length, &mut hook)?;
        } else {
            run.extend(length, &mut |_, _| Ok(()))?;
        }
        report.krylov_products += run.iteration();
        let seq = run.into_sequence();
        report.timings.krylov_seconds += t.elapsed().as_secs_f64();

        // Lingen
        let t = Instant::now();
        let f = berlekamp_massey(&seq.terms, ell)?;
        report.timings.lingen_seconds += t.elapsed().as_secs_f64();
        report.generator_degree = f.degree();
        report.valuation = f.valuation();
        if f.degree() == 0 {
            continue;
        }

        // Mksol on the part of F prime to X, then powers of A until zero
        let t = Instant::now();
        let v = f.valuation();
        let mut w = mksol_partial(plan, &f, &y, v)?;
        report.mksol_products += f.degree() - v;
        report.timings.mksol_seconds += t.elapsed().as_secs_f64();
        if w.iter().all(Zero::is_zero) {
            continue;
        }
        let t = Instant::now();
        let mut candidate = None;
        for _ in 0..=v {
            let next = apply_canonical(plan, &w)?;
            report.search_products += 1;
            if next.iter().all(Zero::is_zero) {
                candidate = Some(w);
                break;
            }
            w = next;
        }
        report.timings.mksol_seconds += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let found = candidate.filter(|w| check_kernel(plan.matrix(), w, ell));
        report.timings.check_seconds += t.elapsed().as_secs_f64();
        if let Some(w) = found {
            report.timings.total_seconds = total.elapsed().as_secs_f64();
            return Ok((w, report));
        }
    }
    Err(Error::NoKernelVector {
        attempts: options.max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gen_ffs_like, CooMatrix, GeneratorParams};
    use crate::oracle::oracle_iterate;
    use crate::rns::{Flavor, RnsBasis};
    use crate::spmv::SpmvOptions;

    fn ell217() -> BigUint {
        BigUint::parse_bytes(b"1400000000000000000000000000000000000000000000000000017", 16).unwrap()
    }

    fn plan_for(m: &CooMatrix) -> SpmvPlan {
        let r = m.to_csr().max_row_norm().max(2);
        let basis = RnsBasis::build(&ell217(), r, Flavor::Integer).unwrap();
        SpmvPlan::new(m, &basis, SpmvOptions::default()).unwrap()
    }

    fn identity(n: u32) -> CooMatrix {
        CooMatrix::from_triplets(n as usize, n as usize, (0..n).map(|i| (i, i, 1)).collect()).unwrap()
    }

    #[test]
    fn krylov_identity_and_zero() {
        let ell = ell217();
        let y = random_vector(&ell, 4, 1, 0);
        let plan = plan_for(&identity(4));
        let s = krylov(&plan, 2, &y, 6).unwrap();
        assert!(s.terms.iter().all(|a| a == &y[2]));

        let zero = CooMatrix::from_triplets(4, 4, vec![]).unwrap();
        let s = krylov(&plan_for(&zero), 1, &y, 5).unwrap();
        assert_eq!(s.terms[0], y[1]);
        assert!(s.terms[1..].iter().all(Zero::is_zero));
        assert!(krylov(&plan, 4, &y, 3).is_err());
    }

    #[test]
    fn krylov_matches_oracle() {
        let m = gen_ffs_like(&GeneratorParams::ffs_like(50, 6, 3)).unwrap();
        let plan = plan_for(&m);
        let ell = ell217();
        let y = random_vector(&ell, 50, 9, 0);
        let s = krylov(&plan, 7, &y, 40).unwrap();
        let mut v = y.clone();
        for a in &s.terms {
            assert_eq!(a, &v[7]);
            v = oracle_iterate(&m, &v, &ell, 1).unwrap();
        }
    }

    #[test]
    fn mksol_small_cases() {
        let ell = ell217();
        let plan = plan_for(&identity(5));
        let y = random_vector(&ell, 5, 2, 0);
        let one = GeneratorPoly {
            coeffs: vec![BigUint::from(1u32)],
        };
        assert_eq!(mksol(&plan, &one, &y).unwrap(), y);
        let x_minus_1 = GeneratorPoly {
            coeffs: vec![&ell - 1u32, BigUint::from(1u32)],
        };
        assert!(mksol(&plan, &x_minus_1, &y).unwrap().iter().all(Zero::is_zero));
    }

    #[test]
    fn check_kernel_cases() {
        let ell = ell217();
        // second row is twice the first: kernel vector (1, -1) of the columns sum
        let m = CooMatrix::from_triplets(2, 2, vec![(0, 0, 1), (0, 1, 1), (1, 0, 2), (1, 1, 2)]).unwrap();
        assert!(check_kernel(&m, &[BigUint::from(1u32), &ell - 1u32], &ell));
        assert!(!check_kernel(&m, &[BigUint::zero(), BigUint::zero()], &ell));
        assert!(!check_kernel(&m, &[BigUint::from(1u32), BigUint::from(1u32)], &ell));
    }

    #[test]
    fn solve_singular_and_regular() {
        let mut m = gen_ffs_like(&GeneratorParams::ffs_like(60, 6, 11)).unwrap();
        m = crate::matrix::plant_dependent_row(&m, 11).unwrap();
        let plan = plan_for(&m);
        let (w, report) = solve(&plan, &SolveOptions::new(5)).unwrap();
        assert!(check_kernel(&m, &w, &ell217()));
        let (w2, report2) = solve(&plan, &SolveOptions::new(5)).unwrap();
        assert_eq!(w, w2);
        assert_eq!(report.attempts, report2.attempts);

        let plan = plan_for(&identity(8));
        assert!(matches!(
            solve(&plan, &SolveOptions::new(1)),
            Err(Error::NoKernelVector { attempts: 5 })
        ));
    }

    #[test]
    fn checkpoint_resume_is_exact() {
        let m = crate::matrix::plant_dependent_row(&gen_ffs_like(&GeneratorParams::ffs_like(40, 5, 2)).unwrap(), 2)
            .unwrap();
        let plan = plan_for(&m);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        let (w, full) = solve(&plan, &SolveOptions::new(3)).unwrap();
        let mut opts = SolveOptions::new(3);
        opts.checkpoint = Some(CheckpointConfig {
            path: path.clone(),
            interval: 10,
            halt_after: Some(30),
        });
        assert!(matches!(solve(&plan, &opts), Err(Error::Interrupted { iteration: 30 })));
        let ck = Checkpoint::load(&path).unwrap();
        assert_eq!(ck.iteration, 30);
        opts.checkpoint.as_mut().unwrap().halt_after = None;
        let (w2, resumed) = resume(&plan, &opts, &ck).unwrap();
        assert_eq!(w, w2);
        let strip = |mut r: SolveReport| {
            r.timings = SolveTimings::default();
            r
        };
        assert_eq!(strip(resumed), strip(full));
    }

    #[test]
    fn block_consistency() {
        let m = gen_ffs_like(&GeneratorParams::ffs_like(40, 5, 8)).unwrap();
        let plan = plan_for(&m);
        let ell = ell217();
        let b = block_krylov(&plan, 1, 1, 4).unwrap();
        assert_eq!(b.terms.len(), block_sequence_length(40, 1, 1));
        let s = krylov(&plan, 0, &random_vector(&ell, 40, 4, 0), b.terms.len()).unwrap();
        assert!(b.terms.iter().zip(&s.terms).all(|(t, a)| &t[0][0] == a));
        assert!(block_krylov(&plan, 0, 1, 0).is_err());
        assert!(block_krylov(&plan, 1, 65, 0).is_err());
    }
}
