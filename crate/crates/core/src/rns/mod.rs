//! Residue number system over pseudo-Mersenne moduli.

mod arith;
mod basis;
mod reduce;

use std::ops::Range;

use num_bigint::BigUint;
use num_traits::Zero;

pub use arith::{
    add_float, add_int, addmul_float, addmul_int, two_product, veltkamp_split, ChannelArith, FloatArith, IntegerArith,
    Modulus, FLOAT_LAMBDA_LIMIT, INT_LAMBDA_LIMIT, K0,
};
pub use basis::{candidate_offsets, AccumulationLimit, Delta, Flavor, RnsBasis, DEFAULT_TRUNCATION};
pub use reduce::{crt_coefficients, estimate_quotient, reduce_with_quotient};

use crate::{Error, Result};

/// One element of `Z/lZ` as `n` relaxed residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RnsElement(pub Vec<u64>);

impl RnsElement {
    pub fn residues(&self) -> &[u64] {
        &self.0
    }
}

/// `N` elements stored element-major: element `i` occupies residues
/// `i * n .. (i + 1) * n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RnsVector {
    width: usize,
    data: Vec<u64>,
}

impl RnsVector {
    pub fn zeros(len: usize, width: usize) -> Self {
        RnsVector {
            width,
            data: vec![0; len * width],
        }
    }

    pub fn from_raw(width: usize, data: Vec<u64>) -> Self {
        assert!(width > 0 && data.len().is_multiple_of(width));
        RnsVector { width, data }
    }

    /// Number of elements `N`.
    pub fn len(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Residues per element `n`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn element(&self, i: usize) -> &[u64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn element_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.width..(i + 1) * self.width]
    }

    /// Mutable access to a contiguous range of elements; disjoint ranges may
    /// be handed to different workers.
    pub fn elements_mut(&mut self, range: Range<usize>) -> &mut [u64] {
        &mut self.data[range.start * self.width..range.end * self.width]
    }

    pub fn as_raw(&self) -> &[u64] {
        &self.data
    }

    pub fn as_raw_mut(&mut self) -> &mut [u64] {
        &mut self.data
    }

    pub fn into_raw(self) -> Vec<u64> {
        self.data
    }

    /// Converts canonical integers (each below `P`).
    pub fn from_ints(basis: &RnsBasis, values: &[BigUint]) -> Result<Self> {
        let mut data = Vec::with_capacity(values.len() * basis.len());
        for v in values {
            data.extend(rns_from_int(basis, v)?.0);
        }
        Ok(RnsVector {
            width: basis.len(),
            data,
        })
    }

    /// CRT value of every element.
    pub fn to_ints(&self, basis: &RnsBasis) -> Vec<BigUint> {
        self.data
            .chunks(self.width)
            .map(|e| int_from_rns_slice(basis, e))
            .collect()
    }

    /// Every element reduced to `[0, l - 1]`.
    pub fn to_canonical(&self, basis: &RnsBasis) -> Vec<BigUint> {
        self.data
            .chunks(self.width)
            .map(|e| int_from_rns_slice(basis, e) % basis.ell())
            .collect()
    }

    /// Brings every residue into `[0, p_j)`.
    pub fn normalize(&mut self, basis: &RnsBasis) {
        let moduli = basis.moduli();
        for e in self.data.chunks_mut(self.width) {
            for (r, m) in e.iter_mut().zip(moduli) {
                *r = m.normalize(*r);
            }
        }
    }

    /// Applies [`rns_mod_reduce`] to every element; outputs are fully
    /// reduced per channel.
    pub fn reduce(&mut self, basis: &RnsBasis) {
        let mut out = vec![0u64; self.width];
        for e in self.data.chunks_mut(self.width) {
            reduce::reduce_into(basis, e, &mut out);
            e.copy_from_slice(&out);
        }
    }

    /// Exact reduction to canonical representatives in `[0, l - 1]`: RNS
    /// reduction, conversion, a final big-integer remainder, conversion back.
    pub fn canonicalize(&mut self, basis: &RnsBasis) {
        self.reduce(basis);
        let width = self.width;
        for e in self.data.chunks_mut(width) {
            let v = int_from_rns_slice(basis, e) % basis.ell();
            e.copy_from_slice(&basis.residues_of(&v));
        }
    }

    /// `true` iff every element is `0 mod l`.
    pub fn is_zero_mod_ell(&self, basis: &RnsBasis) -> bool {
        self.to_canonical(basis).iter().all(Zero::is_zero)
    }
}

/// `len` uniform elements of `[0, l)` from ChaCha8 seeded with `seed`, on
/// stream `stream`.
pub fn random_elements(ell: &BigUint, len: usize, seed: u64, stream: u64) -> Vec<BigUint> {
    use num_bigint::RandBigInt;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..len).map(|_| rng.gen_biguint_below(ell)).collect()
}

/// Residues of `x` (fully reduced). Fails for `x >= P`.
pub fn rns_from_int(basis: &RnsBasis, x: &BigUint) -> Result<RnsElement> {
    if x >= basis.product() {
        return Err(Error::OutOfRnsRange);
    }
    Ok(RnsElement(basis.residues_of(x)))
}

/// CRT reconstruction; relaxed residues are normalized first.
pub fn int_from_rns(basis: &RnsBasis, x: &RnsElement) -> BigUint {
    int_from_rns_slice(basis, &x.0)
}

pub(crate) fn int_from_rns_slice(basis: &RnsBasis, x: &[u64]) -> BigUint {
    let gamma = crt_coefficients(basis, x);
    let mut sum = BigUint::zero();
    for (j, g) in gamma.into_iter().enumerate() {
        sum += basis.cofactor(j) * g;
    }
    sum % basis.product()
}

/// Residue-wise reduction into `[0, p_j)`.
pub fn normalize(basis: &RnsBasis, x: &RnsElement) -> RnsElement {
    RnsElement(x.0.iter().zip(basis.moduli()).map(|(&r, m)| m.normalize(r)).collect())
}

/// `x_j + y_j` on channel `j`.
pub fn rns_add(basis: &RnsBasis, j: usize, x: u64, y: u64) -> u64 {
    let m = basis.modulus(j);
    match basis.flavor() {
        Flavor::Integer => IntegerArith::add(m, x, y),
        Flavor::Float => FloatArith::add(m, x, y),
    }
}

/// `x_j + lambda y_j` on channel `j`.
pub fn rns_addmul(basis: &RnsBasis, j: usize, x: u64, lambda: u64, y: u64) -> u64 {
    let m = basis.modulus(j);
    match basis.flavor() {
        Flavor::Integer => IntegerArith::addmul(m, x, lambda, y),
        Flavor::Float => FloatArith::addmul(m, x, lambda, y),
    }
}

/// `x_j - lambda y_j` on channel `j`, as AddMul on the complement `p_j - y_j`.
pub fn rns_submul(basis: &RnsBasis, j: usize, x: u64, lambda: u64, y: u64) -> u64 {
    if y == 0 {
        return x;
    }
    let m = basis.modulus(j);
    rns_addmul(basis, j, x, lambda, m.p - y)
}

/// Float-flavor AddMul with explicit modulus parameters.
pub fn rns_addmul_float(p: f64, c: f64, x: f64, lambda: f64, y: f64) -> f64 {
    addmul_float(p, c, x, lambda, y)
}

/// Reduction modulo `l` (value of `x` must be below `(1 - delta) P`).
pub fn rns_mod_reduce(basis: &RnsBasis, x: &RnsElement) -> RnsElement {
    RnsElement(reduce_with_quotient(basis, &x.0).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn small_basis() -> RnsBasis {
        let ell = crate::oracle::next_prime(&(BigUint::one() << 200));
        RnsBasis::build(&ell, 500, Flavor::Integer).unwrap()
    }

    #[test]
    fn conversions() {
        let b = small_basis();
        assert!(rns_from_int(&b, &BigUint::zero()).unwrap().0.iter().all(|&r| r == 0));
        assert!(rns_from_int(&b, &BigUint::one()).unwrap().0.iter().all(|&r| r == 1));
        let x = rns_from_int(&b, &(BigUint::one() << 64)).unwrap();
        assert_eq!(x.0[0], 59);
        assert!(matches!(rns_from_int(&b, b.product()), Err(Error::OutOfRnsRange)));
    }

    #[test]
    fn relaxed_residues_reconstruct() {
        let b = small_basis();
        let relaxed = RnsElement(b.moduli().iter().map(|m| m.p + 3).collect());
        assert_eq!(int_from_rns(&b, &relaxed), BigUint::from(3u32));
        let n = normalize(&b, &relaxed);
        assert!(n.0.iter().all(|&r| r == 3));
        let top = RnsElement(vec![u64::MAX; b.len()]);
        assert_eq!(normalize(&b, &top).0[0], 58);
    }

    #[test]
    fn submul_examples() {
        let b = small_basis();
        assert_eq!(rns_submul(&b, 0, 77, 5, 0), 77);
        assert_eq!(rns_submul(&b, 0, 0, 1, 1), b.modulus(0).p - 1);
    }

    #[test]
    fn reduce_zero_and_ell() {
        let b = small_basis();
        let zero = rns_from_int(&b, &BigUint::zero()).unwrap();
        assert!(int_from_rns(&b, &rns_mod_reduce(&b, &zero)).is_zero());
        let ell = rns_from_int(&b, b.ell()).unwrap();
        let z = int_from_rns(&b, &rns_mod_reduce(&b, &ell));
        assert!((&z % b.ell()).is_zero());
        assert!(&z < b.reduced_bound());
    }
}
