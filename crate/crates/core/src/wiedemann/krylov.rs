use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::GeneratorPoly;
use crate::rns::{random_elements, rns_add, RnsVector};
use crate::spmv::{Schedule, SpmvPlan};
use crate::{Error, Result};

/// Repeated products on one vector, reducing on the plan's schedule.
pub(crate) struct Walker<'a> {
    plan: &'a SpmvPlan,
    schedule: &'a Schedule,
    cur: RnsVector,
    phase: usize,
    pub iterations: usize,
}

impl<'a> Walker<'a> {
    /// Starts from canonical values.
    pub fn new(plan: &'a SpmvPlan, schedule: &'a Schedule, start: &[BigUint]) -> Result<Self> {
        Ok(Walker {
            plan,
            schedule,
            cur: RnsVector::from_ints(plan.basis(), start)?,
            phase: 0,
            iterations: 0,
        })
    }

    /// `v <- A v`.
    pub fn step(&mut self) -> Result<()> {
        let next = self.plan.apply(&self.cur, self.schedule.complement(self.phase))?;
        self.finish(next);
        Ok(())
    }

    /// `v <- A v + addend`, with `addend` canonical.
    pub fn step_add(&mut self, addend: &RnsVector) -> Result<()> {
        let basis = self.plan.basis();
        let mut next = self.plan.apply(&self.cur, self.schedule.complement(self.phase))?;
        let width = basis.len();
        for (acc, add) in next.as_raw_mut().chunks_mut(width).zip(addend.as_raw().chunks(width)) {
            for (j, (x, &y)) in acc.iter_mut().zip(add).enumerate() {
                *x = rns_add(basis, j, *x, y);
            }
        }
        self.finish(next);
        Ok(())
    }

    fn finish(&mut self, mut next: RnsVector) {
        let basis = self.plan.basis();
        self.iterations += 1;
        self.phase += 1;
        if self.phase == self.schedule.steps() {
            next.reduce(basis);
            self.phase = 0;
        } else {
            next.normalize(basis);
        }
        self.cur = next;
    }

    /// Coordinate `i` reduced to `[0, l)`.
    pub fn coordinate(&self, i: usize) -> BigUint {
        let basis = self.plan.basis();
        crate::rns::int_from_rns_slice(basis, self.cur.element(i)) % basis.ell()
    }

    /// Canonical values; also resets the schedule phase.
    pub fn canonical(&mut self) -> Vec<BigUint> {
        let basis = self.plan.basis();
        self.cur.canonicalize(basis);
        self.phase = 0;
        self.cur.to_ints(basis)
    }
}

/// Scalar sequence `a_i = (A^i y)[x]`, with where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarSequence {
    pub terms: Vec<BigUint>,
    pub x_index: usize,
}

/// The first `length` terms of `(A^i y)[x_index]`; `y` canonical.
pub fn krylov(plan: &SpmvPlan, x_index: usize, y: &[BigUint], length: usize) -> Result<ScalarSequence> {
    let mut run = KrylovRun::start(plan, x_index, y)?;
    run.extend(length, &mut |_, _| Ok(()))?;
    Ok(run.into_sequence())
}

/// Resumable Krylov computation.
pub(crate) struct KrylovRun<'a> {
    walker: Walker<'a>,
    x_index: usize,
    terms: Vec<BigUint>,
}

impl<'a> KrylovRun<'a> {
    pub fn start(plan: &'a SpmvPlan, x_index: usize, y: &[BigUint]) -> Result<Self> {
        Self::resume(plan, x_index, y, Vec::new())
    }

    /// Continues from `v = A^i y` given as canonical values, where `terms`
    /// holds `a_0..a_i` (empty at the start).
    pub fn resume(plan: &'a SpmvPlan, x_index: usize, v: &[BigUint], terms: Vec<BigUint>) -> Result<Self> {
        if x_index >= plan.n_rows() {
            return Err(Error::InvalidParameter(format!(
                "x index {x_index} out of range for N = {}",
                plan.n_rows()
            )));
        }
        if plan.n_rows() != plan.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: plan.n_rows(),
                actual: plan.n_cols(),
            });
        }
        if v.len() != plan.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: plan.n_cols(),
                actual: v.len(),
            });
        }
        let mut walker = Walker::new(plan, plan.schedule(), v)?;
        walker.iterations = terms.len().saturating_sub(1);
        let mut terms = terms;
        if terms.is_empty() {
            terms.push(&v[x_index] % plan.basis().ell());
        }
        Ok(KrylovRun { walker, x_index, terms })
    }

    /// Index `i` of the current vector `A^i y`.
    pub fn iteration(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn terms(&self) -> &[BigUint] {
        &self.terms
    }

    /// Canonical current vector.
    pub fn canonical_vector(&mut self) -> Vec<BigUint> {
        self.walker.canonical()
    }

    /// Grows the sequence to `length` terms, calling `hook(self, i)` after
    /// term `i` is appended.
    pub fn extend(
        &mut self,
        length: usize,
        hook: &mut dyn FnMut(&mut KrylovRun<'a>, usize) -> Result<()>,
    ) -> Result<()> {
        if length == 0 {
            return Err(Error::InvalidParameter("sequence length must be >= 1".into()));
        }
        while self.terms.len() < length {
            self.walker.step()?;
            let a = self.walker.coordinate(self.x_index);
            self.terms.push(a);
            let i = self.iteration();
            hook(self, i)?;
        }
        Ok(())
    }

    pub fn into_sequence(self) -> ScalarSequence {
        ScalarSequence {
            terms: self.terms,
            x_index: self.x_index,
        }
    }
}

/// `sum_i A^i F_i y mod l`, canonical.
pub fn mksol(plan: &SpmvPlan, f: &GeneratorPoly, y: &[BigUint]) -> Result<Vec<BigUint>> {
    mksol_partial(plan, f, y, 0)
}

/// Horner tail `w_t = sum_{i >= t} A^{i - t} F_i y mod l`, canonical.
pub fn mksol_partial(plan: &SpmvPlan, f: &GeneratorPoly, y: &[BigUint], t: usize) -> Result<Vec<BigUint>> {
    let basis = plan.basis();
    let ell = basis.ell();
    if y.len() != plan.n_cols() || plan.n_rows() != plan.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: plan.n_cols(),
            actual: y.len(),
        });
    }
    let d = f.degree();
    if t > d {
        return Ok(vec![BigUint::zero(); y.len()]);
    }
    let scaled = |c: &BigUint| -> Vec<BigUint> { y.iter().map(|v| v * c % ell).collect() };
    let schedule = Schedule::new(basis, plan.row_norm(), ell)?;
    let mut walker = Walker::new(plan, &schedule, &scaled(&f.coeffs[d]))?;
    for i in (t..d).rev() {
        let addend = RnsVector::from_ints(basis, &scaled(&f.coeffs[i]))?;
        walker.step_add(&addend)?;
    }
    Ok(walker.canonical())
}

/// `A w mod l`, canonical; `w` canonical.
pub fn apply_canonical(plan: &SpmvPlan, w: &[BigUint]) -> Result<Vec<BigUint>> {
    let mut walker = Walker::new(plan, plan.schedule(), w)?;
    walker.step()?;
    Ok(walker.canonical())
}

/// Sequence of `m x n_blk` matrices: cell `(u, v)` of term `t` is coordinate
/// `u` of `A^t y_v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSequence {
    pub m: usize,
    pub n_blk: usize,
    /// `terms[t][u][v]`.
    pub terms: Vec<Vec<Vec<BigUint>>>,
}

/// `ceil(N / n_blk) + ceil(N / m) + 16`.
pub fn block_sequence_length(n: usize, m: usize, n_blk: usize) -> usize {
    n.div_ceil(n_blk) + n.div_ceil(m) + 16
}

/// Right-hand vector `y_v` of [`block_krylov`]: ChaCha8 on `seed`, stream `v`.
pub fn random_vector(ell: &BigUint, n: usize, seed: u64, v: u64) -> Vec<BigUint> {
    random_elements(ell, n, seed, v)
}

/// Block Krylov sequence with `x_u = e_u` (`u < m`) and random `y_v`
/// (`v < n_blk`). Each column subsequence runs on its own thread with no
/// shared state besides the matrix and basis.
pub fn block_krylov(plan: &SpmvPlan, m: usize, n_blk: usize, seed: u64) -> Result<BlockSequence> {
    let n = plan.n_rows();
    if !(1..=64).contains(&m) || !(1..=64).contains(&n_blk) {
        return Err(Error::InvalidParameter(
            "blocking parameters must lie in [1, 64]".into(),
        ));
    }
    if m > n {
        return Err(Error::InvalidParameter(format!("m = {m} exceeds N = {n}")));
    }
    if plan.n_rows() != plan.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: plan.n_rows(),
            actual: plan.n_cols(),
        });
    }
    let length = block_sequence_length(n, m, n_blk);
    let ell = plan.basis().ell();
    let columns: Vec<Result<Vec<Vec<BigUint>>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n_blk)
            .map(|v| {
                scope.spawn(move || -> Result<Vec<Vec<BigUint>>> {
                    let y = random_vector(ell, n, seed, v as u64);
                    let mut walker = Walker::new(plan, plan.schedule(), &y)?;
                    let mut column = Vec::with_capacity(length);
                    for t in 0..length {
                        if t > 0 {
                            walker.step()?;
                        }
                        column.push((0..m).map(|u| walker.coordinate(u)).collect());
                    }
                    Ok(column)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("block worker panicked"))
            .collect()
    });
    let columns: Vec<Vec<Vec<BigUint>>> = columns.into_iter().collect::<Result<_>>()?;
    let terms = (0..length)
        .map(|t| {
            (0..m)
                .map(|u| (0..n_blk).map(|v| columns[v][t][u].clone()).collect())
                .collect()
        })
        .collect();
    Ok(BlockSequence { m, n_blk, terms })
}
