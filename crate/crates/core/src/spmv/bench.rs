use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{spmv_iterate_traced, SpmvPlan};
use crate::rns::{random_elements, RnsVector};
use crate::{Error, Result};

/// Timing of repeated products, counted the usual way: one product costs
/// `2 * nnz * 2 * n` operations for `n` residues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub format: String,
    pub compression: bool,
    pub reordering: bool,
    pub balance: bool,
    pub partitioning: String,
    pub workers: usize,
    pub basis: String,
    pub n_rows: usize,
    pub nnz: usize,
    pub residues: usize,
    pub iterations: usize,
    pub ops_per_iteration: u64,
    pub total_ops: u64,
    /// Products between reductions, `F`.
    pub reduction_frequency: usize,
    /// Reductions performed (`iterations / F`, rounded down).
    pub reductions: usize,
    /// Reductions per product, `1/F`.
    pub reduction_rate: f64,
    pub wall_seconds: f64,
    pub seconds_per_iteration: f64,
    pub ops_per_second: f64,
    pub reduction_seconds_per_call: f64,
    /// Reduction time amortized at `1/F` over the per-iteration time.
    pub reduction_share: f64,
}

impl ThroughputReport {
    /// Single-line JSON.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// Fields that do not depend on timing.
    pub fn counts(&self) -> (usize, u64, u64, usize, usize) {
        (
            self.iterations,
            self.ops_per_iteration,
            self.total_ops,
            self.reduction_frequency,
            self.reductions,
        )
    }
}

/// Runs `iterations` products from a fixed random vector.
pub fn benchmark(plan: &SpmvPlan, iterations: usize) -> Result<ThroughputReport> {
    if iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be >= 1".into()));
    }
    let basis = plan.basis();
    let v0 = RnsVector::from_ints(basis, &random_elements(basis.ell(), plan.n_cols(), 0, 0))?;
    let start = Instant::now();
    let (out, trace) = spmv_iterate_traced(plan, &v0, iterations)?;
    let wall = start.elapsed().as_secs_f64();

    let per_call = if trace.reductions.is_empty() {
        let mut v = out;
        let t = Instant::now();
        v.reduce(basis);
        t.elapsed().as_secs_f64()
    } else {
        trace.reduce_time.as_secs_f64() / trace.reductions.len() as f64
    };
    let f = plan.reduction_frequency();
    let spmv_per_iter = trace.spmv_time.as_secs_f64() / iterations as f64;
    let amortized = per_call / f as f64;
    let ops_per_iteration = 2 * plan.nnz() as u64 * 2 * basis.len() as u64;
    let options = plan.options();
    Ok(ThroughputReport {
        format: options.format.to_string(),
        compression: options.use_compression,
        reordering: options.use_reordering,
        balance: options.balance,
        partitioning: options.partitioning.to_string(),
        workers: options.workers,
        basis: basis.describe(),
        n_rows: plan.n_rows(),
        nnz: plan.nnz(),
        residues: basis.len(),
        iterations,
        ops_per_iteration,
        total_ops: ops_per_iteration * iterations as u64,
        reduction_frequency: f,
        reductions: trace.reductions.len(),
        reduction_rate: 1.0 / f as f64,
        wall_seconds: wall,
        seconds_per_iteration: wall / iterations as f64,
        ops_per_second: if wall > 0.0 {
            (ops_per_iteration * iterations as u64) as f64 / wall
        } else {
            0.0
        },
        reduction_seconds_per_call: per_call,
        reduction_share: if spmv_per_iter + amortized > 0.0 {
            amortized / (spmv_per_iter + amortized)
        } else {
            0.0
        },
    })
}
