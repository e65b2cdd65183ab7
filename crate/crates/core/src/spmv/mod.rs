//! Exact SpMV over `Z/lZ` on RNS vectors, for every matrix format, and the
//! deferred-reduction iteration driver.
//!
//! Outputs are bit-identical across formats, optimization flags, worker
//! counts and partitioning strategies: each destination row always sees the
//! same sequence of channel operations, and workers own disjoint rows.

mod bench;
mod kernels;
mod schedule;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bench::{benchmark, ThroughputReport};
pub use schedule::{Schedule, MAX_UNREDUCED_STEPS};

use crate::matrix::{
    choose_hybrid_k, compress_values, csr_to_ell, csr_to_slcoo, permute_rows_balanced, reorder_row_categories,
    split_hybrid, CompressedCsrMatrix, CooMatrix, CsrMatrix, EllMatrix, HybridMatrix, SlcooMatrix, SparseMatrix,
};
use crate::rns::{int_from_rns, Flavor, FloatArith, IntegerArith, RnsBasis, RnsElement, RnsVector};
use crate::{Error, Result};
use kernels::{eval_rows, eval_slices, Ctx, Prepared};

/// Storage format a plan executes. Compressed CSR is [`Format::Csr`] with
/// [`SpmvOptions::use_compression`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csr,
    Coo,
    /// Sliced COO with the given slice size.
    Slcoo(usize),
    /// ELLPACK padded to the longest row.
    Ell,
    /// ELL of width `K` plus a COO tail; `None` picks `K` by cost model.
    Hybrid(Option<usize>),
}

impl Format {
    /// Every format as exercised by the equivalence tests.
    pub const ALL: [Format; 7] = [
        Format::Csr,
        Format::Coo,
        Format::Slcoo(2),
        Format::Slcoo(4),
        Format::Slcoo(8),
        Format::Ell,
        Format::Hybrid(None),
    ];
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Format::Csr => write!(f, "csr"),
            Format::Coo => write!(f, "coo"),
            Format::Slcoo(s) => write!(f, "slcoo:{s}"),
            Format::Ell => write!(f, "ell"),
            Format::Hybrid(None) => write!(f, "hybrid"),
            Format::Hybrid(Some(k)) => write!(f, "hybrid:{k}"),
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown format `{s}`"));
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a.parse::<usize>().map_err(|_| bad())?)),
            None => (s, None),
        };
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("csr", None) => Ok(Format::Csr),
            ("coo", None) => Ok(Format::Coo),
            ("slcoo", Some(size)) => Ok(Format::Slcoo(size)),
            ("slcoo", None) => Ok(Format::Slcoo(4)),
            ("ell", None) => Ok(Format::Ell),
            ("hybrid", k) => Ok(Format::Hybrid(k)),
            _ => Err(bad()),
        }
    }
}

/// How work is split among workers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partitioning {
    /// Each worker computes whole destination elements for its rows.
    #[default]
    Scalar,
    /// Each worker computes one residue channel for its rows.
    ResidueVector,
}

impl fmt::Display for Partitioning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Partitioning::Scalar => "scalar",
            Partitioning::ResidueVector => "residue-vector",
        })
    }
}

impl FromStr for Partitioning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(Partitioning::Scalar),
            "residue-vector" | "residue" => Ok(Partitioning::ResidueVector),
            _ => Err(Error::InvalidParameter(format!("unknown partitioning `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpmvOptions {
    pub format: Format,
    pub workers: usize,
    pub partitioning: Partitioning,
    /// Longest-processing-time row distribution (row formats only; SLCOO
    /// distributes whole slices).
    pub balance: bool,
    /// Compressed `+-1` value stream (CSR only).
    pub use_compression: bool,
    /// Category-ordered rows (CSR, ELL and hybrid storage).
    pub use_reordering: bool,
    /// Tracks the exact integer behind every element with big integers and
    /// fails on any bound violation. Slow; meant for tests.
    pub check_bounds: bool,
}

impl Default for SpmvOptions {
    fn default() -> Self {
        SpmvOptions {
            format: Format::Csr,
            workers: 1,
            partitioning: Partitioning::Scalar,
            balance: false,
            use_compression: false,
            use_reordering: false,
            check_bounds: false,
        }
    }
}

impl SpmvOptions {
    pub fn with_format(mut self, format: Format) -> Self {
        self.format = format;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Unit of parallel work.
#[derive(Clone, Debug)]
enum Rows {
    Range(Range<usize>),
    List(Vec<usize>),
    Slices(Range<usize>),
}

#[derive(Clone, Debug)]
struct Task {
    rows: Rows,
    channels: Range<usize>,
}

/// A matrix prepared for repeated products in one basis.
pub struct SpmvPlan {
    basis: RnsBasis,
    options: SpmvOptions,
    matrix: Prepared,
    row_norm: u64,
    schedule: Schedule,
    tasks: Vec<Task>,
    pool: Option<rayon::ThreadPool>,
}

impl fmt::Debug for SpmvPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpmvPlan")
            .field("basis", &self.basis.describe())
            .field("options", &self.options)
            .field("row_norm", &self.row_norm)
            .field("steps", &self.schedule.steps())
            .finish()
    }
}

impl SpmvPlan {
    pub fn new(m: &CooMatrix, basis: &RnsBasis, options: SpmvOptions) -> Result<SpmvPlan> {
        Self::from_csr(&m.to_csr(), basis, options)
    }

    pub fn from_csr(m: &CsrMatrix, basis: &RnsBasis, options: SpmvOptions) -> Result<SpmvPlan> {
        let reordered;
        let m = if options.use_reordering || (options.use_compression && options.format == Format::Csr) {
            reordered = reorder_row_categories(m);
            &reordered
        } else {
            m
        };
        let prepared = match options.format {
            Format::Csr if options.use_compression => Prepared::Compressed(compress_values(m)?),
            Format::Csr => Prepared::Csr(m.clone()),
            Format::Coo => Prepared::coo(m.to_coo()),
            Format::Slcoo(size) => Prepared::Slcoo(csr_to_slcoo(m, size)?),
            Format::Ell => Prepared::Ell(csr_to_ell(m, m.max_row_len().max(1))?),
            Format::Hybrid(k) => Prepared::Hybrid(split_hybrid(m, k.unwrap_or_else(|| choose_hybrid_k(m)))?),
        };
        let tasks = make_tasks(&prepared, m, basis.len(), &options);
        Self::assemble(prepared, m.max_row_norm(), basis, options, tasks)
    }

    fn assemble(
        matrix: Prepared,
        row_norm: u64,
        basis: &RnsBasis,
        options: SpmvOptions,
        tasks: Vec<Task>,
    ) -> Result<SpmvPlan> {
        if options.workers == 0 {
            return Err(Error::InvalidParameter("worker count must be >= 1".into()));
        }
        let row_norm = row_norm.max(1);
        let schedule = Schedule::new(basis, row_norm, &BigUint::from(0u32))?;
        let pool = if options.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(options.workers)
                    .build()
                    .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(SpmvPlan {
            basis: basis.clone(),
            options,
            matrix,
            row_norm,
            schedule,
            tasks,
            pool,
        })
    }

    pub fn basis(&self) -> &RnsBasis {
        &self.basis
    }

    pub fn options(&self) -> &SpmvOptions {
        &self.options
    }

    /// The matrix as stored by this plan.
    pub fn matrix(&self) -> &dyn SparseMatrix {
        self.matrix.as_sparse()
    }

    pub fn n_rows(&self) -> usize {
        self.matrix().n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix().n_cols()
    }

    pub fn nnz(&self) -> usize {
        self.matrix().nnz()
    }

    /// Largest row norm `r` (at least 1).
    pub fn row_norm(&self) -> u64 {
        self.row_norm
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    /// Products between reductions, `F`.
    pub fn reduction_frequency(&self) -> usize {
        self.schedule.steps()
    }

    /// Destination rows owned by each unit of work, in task order (a row
    /// appears once per channel group it is split into).
    pub fn partitions(&self) -> Vec<Vec<usize>> {
        self.tasks
            .iter()
            .map(|t| match &t.rows {
                Rows::Range(r) => r.clone().collect(),
                Rows::List(l) => l.clone(),
                Rows::Slices(s) => match &self.matrix {
                    Prepared::Slcoo(m) => s.clone().flat_map(|i| m.slice_rows(i)).collect(),
                    _ => unreachable!(),
                },
            })
            .collect()
    }

    /// `A src` in phase 0 of the schedule: `src` must be normalized with
    /// element values below `n 2^k l` (reduced or canonical).
    pub fn multiply(&self, src: &RnsVector) -> Result<RnsVector> {
        self.apply(src, self.schedule.complement(0))
    }

    /// One product with explicit complement residues.
    pub fn apply(&self, src: &RnsVector, complement: &[u64]) -> Result<RnsVector> {
        let width = self.basis.len();
        if src.len() != self.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols(),
                actual: src.len(),
            });
        }
        if src.width() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                actual: src.width(),
            });
        }
        debug_assert!(src
            .as_raw()
            .chunks(width)
            .all(|e| e.iter().zip(self.basis.moduli()).all(|(&r, m)| r < m.p)));

        let run = |task: &Task| -> Vec<u64> {
            let ctx = Ctx {
                moduli: self.basis.moduli(),
                complement,
                src: src.as_raw(),
                width,
                channels: task.channels.clone(),
            };
            match self.basis.flavor() {
                Flavor::Integer => self.run_task::<IntegerArith>(task, &ctx),
                Flavor::Float => self.run_task::<FloatArith>(task, &ctx),
            }
        };
        let results: Vec<Vec<u64>> = match &self.pool {
            Some(pool) => pool.install(|| self.tasks.par_iter().map(run).collect()),
            None => self.tasks.iter().map(run).collect(),
        };

        let mut dst = RnsVector::zeros(self.n_rows(), width);
        let raw = dst.as_raw_mut();
        for (task, values) in self.tasks.iter().zip(&results) {
            let ch = task.channels.len();
            let mut write = |pos: usize, row: usize| {
                raw[row * width + task.channels.start..row * width + task.channels.end]
                    .copy_from_slice(&values[pos * ch..(pos + 1) * ch]);
            };
            match &task.rows {
                Rows::Range(r) => r.clone().enumerate().for_each(|(i, row)| write(i, row)),
                Rows::List(l) => l.iter().enumerate().for_each(|(i, &row)| write(i, row)),
                Rows::Slices(s) => {
                    let Prepared::Slcoo(m) = &self.matrix else {
                        unreachable!()
                    };
                    s.clone()
                        .flat_map(|i| m.slice_rows(i))
                        .enumerate()
                        .for_each(|(i, row)| write(i, row));
                }
            }
        }
        Ok(dst)
    }

    fn run_task<A: crate::rns::ChannelArith>(&self, task: &Task, ctx: &Ctx<'_>) -> Vec<u64> {
        let mut out = Vec::new();
        match (&task.rows, &self.matrix) {
            (Rows::Slices(s), Prepared::Slcoo(m)) => eval_slices::<A>(m, ctx, s.clone(), &mut out),
            (Rows::Range(r), m) => eval_rows::<A>(m, ctx, &mut r.clone(), &mut out),
            (Rows::List(l), m) => eval_rows::<A>(m, ctx, &mut l.iter().copied(), &mut out),
            _ => unreachable!(),
        }
        out
    }
}

fn make_tasks(prepared: &Prepared, m: &CsrMatrix, width: usize, options: &SpmvOptions) -> Vec<Task> {
    let workers = options.workers.max(1);
    let n = m.n_rows();
    let row_sets: Vec<Rows> = match prepared {
        Prepared::Slcoo(s) => chunks(s.n_slices(), workers).into_iter().map(Rows::Slices).collect(),
        _ if options.balance && workers > 1 => {
            let (_, perm) = permute_rows_balanced(m, workers);
            (0..workers).map(|w| Rows::List(perm.partition(w))).collect()
        }
        _ => chunks(n, workers).into_iter().map(Rows::Range).collect(),
    };
    let channel_sets: Vec<Range<usize>> = match options.partitioning {
        Partitioning::Scalar => std::iter::once(0..width).collect(),
        Partitioning::ResidueVector => (0..width).map(|j| j..j + 1).collect(),
    };
    row_sets
        .into_iter()
        .flat_map(|rows| {
            channel_sets.iter().map(move |ch| Task {
                rows: rows.clone(),
                channels: ch.clone(),
            })
        })
        .collect()
}

/// `n` items cut into at most `parts` contiguous, nearly equal ranges.
fn chunks(n: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.clamp(1, n.max(1));
    let base = n / parts;
    let extra = n % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let len = base + usize::from(i < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Borrowed matrix in one of the non-CSR formats.
#[derive(Clone, Copy, Debug)]
pub enum FormatRef<'a> {
    Coo(&'a CooMatrix),
    Slcoo(&'a SlcooMatrix),
    Ell(&'a EllMatrix),
    Hybrid(&'a HybridMatrix),
}

impl<'a> From<&'a CooMatrix> for FormatRef<'a> {
    fn from(m: &'a CooMatrix) -> Self {
        FormatRef::Coo(m)
    }
}

impl<'a> From<&'a SlcooMatrix> for FormatRef<'a> {
    fn from(m: &'a SlcooMatrix) -> Self {
        FormatRef::Slcoo(m)
    }
}

impl<'a> From<&'a EllMatrix> for FormatRef<'a> {
    fn from(m: &'a EllMatrix) -> Self {
        FormatRef::Ell(m)
    }
}

impl<'a> From<&'a HybridMatrix> for FormatRef<'a> {
    fn from(m: &'a HybridMatrix) -> Self {
        FormatRef::Hybrid(m)
    }
}

/// One product on a CSR matrix; `options.use_compression` and
/// `use_reordering` select the storage, the format field is ignored.
pub fn spmv_csr(m: &CsrMatrix, src: &RnsVector, basis: &RnsBasis, options: SpmvOptions) -> Result<RnsVector> {
    SpmvPlan::from_csr(m, basis, options.with_format(Format::Csr))?.multiply(src)
}

/// One product on an already compressed CSR matrix.
pub fn spmv_compressed(
    m: &CompressedCsrMatrix,
    src: &RnsVector,
    basis: &RnsBasis,
    options: SpmvOptions,
) -> Result<RnsVector> {
    let options = options.with_format(Format::Csr);
    let csr = m.decompress();
    let tasks = make_tasks(&Prepared::Compressed(m.clone()), &csr, basis.len(), &options);
    SpmvPlan::assemble(
        Prepared::Compressed(m.clone()),
        csr.max_row_norm(),
        basis,
        options,
        tasks,
    )?
    .multiply(src)
}

/// One product on a COO, SLCOO, ELL or hybrid matrix, used as stored.
pub fn spmv_format<'a>(
    m: impl Into<FormatRef<'a>>,
    src: &RnsVector,
    basis: &RnsBasis,
    options: SpmvOptions,
) -> Result<RnsVector> {
    let (prepared, csr, format) = match m.into() {
        FormatRef::Coo(m) => (Prepared::coo(m.clone()), m.to_csr(), Format::Coo),
        FormatRef::Slcoo(m) => (
            Prepared::Slcoo(m.clone()),
            CsrMatrix::from_triplets(m.n_rows(), m.n_cols(), m.triplets())?,
            Format::Slcoo(m.slice_size()),
        ),
        FormatRef::Ell(m) => (Prepared::Ell(m.clone()), m.to_csr(), Format::Ell),
        FormatRef::Hybrid(m) => (
            Prepared::Hybrid(m.clone()),
            m.to_csr(),
            Format::Hybrid(Some(m.ell_part().width())),
        ),
    };
    let options = options.with_format(format);
    let tasks = make_tasks(&prepared, &csr, basis.len(), &options);
    SpmvPlan::assemble(prepared, csr.max_row_norm(), basis, options, tasks)?.multiply(src)
}

/// What happened during [`spmv_iterate_traced`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace {
    /// Iterations (1-based) after which the vector was reduced modulo `l`.
    pub reductions: Vec<usize>,
    /// Elements whose exact value was checked against the bounds.
    pub bound_checks: usize,
    pub spmv_time: Duration,
    pub reduce_time: Duration,
}

/// `A^t v0 mod l`, canonical. `v0` must be canonical.
pub fn spmv_iterate(plan: &SpmvPlan, v0: &RnsVector, t: usize) -> Result<RnsVector> {
    Ok(spmv_iterate_traced(plan, v0, t)?.0)
}

/// [`spmv_iterate`] with reduction and timing instrumentation; honours
/// `check_bounds`.
pub fn spmv_iterate_traced(plan: &SpmvPlan, v0: &RnsVector, t: usize) -> Result<(RnsVector, IterationTrace)> {
    if plan.n_rows() != plan.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: plan.n_rows(),
            actual: plan.n_cols(),
        });
    }
    let basis = plan.basis();
    let mut trace = IterationTrace::default();
    let mut cur = v0.clone();
    cur.normalize(basis);
    let mut checker = plan.options.check_bounds.then(|| BoundChecker::new(plan, &cur));
    let steps = plan.schedule.steps();
    let mut phase = 0;
    for it in 1..=t {
        let start = Instant::now();
        let mut next = plan.apply(&cur, plan.schedule.complement(phase))?;
        trace.spmv_time += start.elapsed();
        if let Some(c) = checker.as_mut() {
            c.step(plan, phase, &next, it)?;
            trace.bound_checks += next.len();
        }
        phase += 1;
        if phase == steps {
            let start = Instant::now();
            next.reduce(basis);
            trace.reduce_time += start.elapsed();
            trace.reductions.push(it);
            if let Some(c) = checker.as_mut() {
                c.reset(plan, &next, it)?;
            }
            phase = 0;
        } else {
            next.normalize(basis);
        }
        cur = next;
    }
    cur.canonicalize(basis);
    Ok((cur, trace))
}

/// Exact big-integer shadow of an iteration, for bound checking.
struct BoundChecker {
    values: Vec<BigUint>,
    entries: Vec<(u32, u32, i32)>,
}

impl BoundChecker {
    fn new(plan: &SpmvPlan, v: &RnsVector) -> Self {
        BoundChecker {
            values: v.to_ints(plan.basis()),
            entries: plan.matrix().triplets(),
        }
    }

    fn step(&mut self, plan: &SpmvPlan, phase: usize, out: &RnsVector, iteration: usize) -> Result<()> {
        let basis = plan.basis();
        let bound = plan.schedule.input_bound(phase);
        let c = plan.schedule.complement_value(basis, phase);
        if let Some(element) = self.values.iter().position(|y| y >= bound) {
            return Err(Error::BoundViolation { iteration, element });
        }
        let mut exact = vec![BigUint::from(0u32); out.len()];
        for &(r, col, v) in &self.entries {
            let y = &self.values[col as usize];
            let lambda = v.unsigned_abs();
            if v > 0 {
                exact[r as usize] += y * lambda;
            } else {
                exact[r as usize] += (&c - y) * lambda;
            }
        }
        for (i, x) in exact.iter().enumerate() {
            let represented = int_from_rns(basis, &RnsElement(out.element(i).to_vec()));
            if !basis.below_reduction_limit(x) || &represented != x {
                return Err(Error::BoundViolation { iteration, element: i });
            }
        }
        self.values = exact;
        Ok(())
    }

    fn reset(&mut self, plan: &SpmvPlan, reduced: &RnsVector, iteration: usize) -> Result<()> {
        let basis = plan.basis();
        let values = reduced.to_ints(basis);
        for (i, (x, before)) in values.iter().zip(&self.values).enumerate() {
            if x >= basis.reduced_bound() || (x % basis.ell()) != (before % basis.ell()) {
                return Err(Error::BoundViolation { iteration, element: i });
            }
        }
        self.values = values;
        Ok(())
    }
}
