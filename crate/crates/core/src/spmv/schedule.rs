use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

use crate::rns::RnsBasis;
use crate::{Error, Result};

/// Upper limit on the number of products between reductions when the row
/// norm does not force one (`r = 1`).
pub const MAX_UNREDUCED_STEPS: usize = 1024;

/// Deferred-reduction schedule for one basis and row norm.
///
/// Inputs of the first product are bounded by `b_0 = n 2^k l`, the bound on
/// reduced elements. A negative coefficient `-lambda` applied to a source
/// value `Y < b_t` accumulates `lambda (C_t - Y)` with `C_t = l ceil(b_t / l)`,
/// which is congruent to `-lambda Y` and never negative. The next bound is
/// `b_{t+1} = r C_t + extra`, where `extra` covers a value added after each
/// product (Horner steps). Phase `t` is allowed while `b_{t+1} < (1 - delta) P`.
#[derive(Clone, Debug)]
pub struct Schedule {
    /// Residues of `C_t`, one row per allowed phase.
    complements: Vec<Vec<u64>>,
    bounds: Vec<BigUint>,
}

impl Schedule {
    pub fn new(basis: &RnsBasis, row_norm: u64, extra: &BigUint) -> Result<Schedule> {
        if row_norm == 0 {
            return Err(Error::InvalidParameter("row norm must be >= 1".into()));
        }
        let ell = basis.ell();
        let mut bound = basis.reduced_bound().clone();
        let mut complements = Vec::new();
        let mut bounds = vec![bound.clone()];
        while complements.len() < MAX_UNREDUCED_STEPS {
            let c = bound.div_ceil(ell) * ell;
            let next = &c * row_norm + extra;
            if !basis.below_reduction_limit(&next) {
                break;
            }
            complements.push(basis.residues_of(&c));
            bounds.push(next.clone());
            if row_norm == 1 && extra.is_zero() {
                // the bound is stationary; one phase repeats forever
                break;
            }
            bound = next;
        }
        if complements.is_empty() {
            return Err(Error::RowNormTooLarge { row_norm });
        }
        Ok(Schedule { complements, bounds })
    }

    /// Products allowed between two reductions.
    pub fn steps(&self) -> usize {
        if self.is_stationary() {
            MAX_UNREDUCED_STEPS
        } else {
            self.complements.len()
        }
    }

    fn is_stationary(&self) -> bool {
        self.complements.len() == 1 && self.bounds[0] == self.bounds[1]
    }

    /// Complement residues of phase `t` (products since the last reduction).
    pub fn complement(&self, t: usize) -> &[u64] {
        if self.is_stationary() {
            &self.complements[0]
        } else {
            &self.complements[t]
        }
    }

    /// Value bound on the inputs of phase `t`.
    pub fn input_bound(&self, t: usize) -> &BigUint {
        if self.is_stationary() {
            &self.bounds[0]
        } else {
            &self.bounds[t]
        }
    }

    /// `l ceil(b_t / l)` as an integer.
    pub fn complement_value(&self, basis: &RnsBasis, t: usize) -> BigUint {
        self.input_bound(t).div_ceil(basis.ell()) * basis.ell()
    }
}
