//! Reduction modulo `l` without leaving the RNS.
//!
//! For `x` with CRT coefficients `g_i = |x_i P_i^{-1}|_{p_i}`,
//! `x = sum g_i P_i - a P` with `a = floor(sum g_i / p_i)`, so
//! `z = sum g_i |P_i|_l + |-a P|_l` is congruent to `x` and lies below
//! `l (sum p_i + 1) <= n 2^k l`. The quotient `a` is estimated from the top
//! `s` bits of each `g_i`.

use super::basis::RnsBasis;

/// CRT coefficients `g_j = |x_j |P_j^{-1}|_{p_j}|_{p_j}` of a relaxed element.
pub fn crt_coefficients(basis: &RnsBasis, x: &[u64]) -> Vec<u64> {
    basis
        .moduli()
        .iter()
        .zip(x)
        .zip(basis.inv_cofactor())
        .map(|((m, &xj), &inv)| m.mul_mod(m.normalize(xj), inv))
        .collect()
}

/// Quotient estimate `floor(sum floor(g_i / 2^(k-s)) / 2^s + delta)`, in
/// integer arithmetic scaled by `2^s`.
pub fn estimate_quotient(basis: &RnsBasis, gamma: &[u64]) -> u64 {
    let shift = basis.k() - basis.truncation();
    let sum: u64 = gamma.iter().map(|&g| g >> shift).sum::<u64>() + basis.delta_scaled();
    sum >> basis.truncation()
}

/// Reduces `x` (value below `(1 - delta) P`) to a congruent element below
/// `n 2^k l`, fully reduced per channel. Also returns the quotient estimate.
pub fn reduce_with_quotient(basis: &RnsBasis, x: &[u64]) -> (Vec<u64>, u64) {
    let mut out = vec![0u64; basis.len()];
    let alpha = reduce_into(basis, x, &mut out);
    (out, alpha)
}

/// In-place variant used by the vector reduction: writes the reduced
/// residues of `x` into `out`.
pub fn reduce_into(basis: &RnsBasis, x: &[u64], out: &mut [u64]) -> u64 {
    let n = basis.len();
    debug_assert_eq!(x.len(), n);
    let mut stack = [0u64; 16];
    let mut heap = Vec::new();
    let gamma: &mut [u64] = if n <= stack.len() {
        &mut stack[..n]
    } else {
        heap.resize(n, 0);
        &mut heap
    };
    for (j, g) in gamma.iter_mut().enumerate() {
        let m = basis.modulus(j);
        *g = m.mul_mod(m.normalize(x[j]), basis.inv_cofactor()[j]);
    }
    let alpha = estimate_quotient(basis, gamma);
    debug_assert!((alpha as usize) < n);
    let correction = basis.neg_multiple_mod_ell(alpha as usize);
    for (j, o) in out.iter_mut().enumerate() {
        let m = basis.modulus(j);
        let mut acc = correction[j];
        for (i, &g) in gamma.iter().enumerate() {
            acc = m.add_mod(acc, m.mul_mod(g, basis.cofactor_mod_ell(i)[j]));
        }
        *o = acc;
    }
    alpha
}
