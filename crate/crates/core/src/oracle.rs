//! Arbitrary-precision reference arithmetic.
//!
//! Everything here works directly on [`BigUint`] values and is deliberately
//! independent of the RNS machinery: it converts inputs and checks outputs of
//! the fast paths, and doubles as the multi-precision (MP) SpMV baseline that
//! reduces once per product.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::matrix::SparseMatrix;
use crate::{Error, Result};

/// `x mod m` in `[0, m - 1]`.
pub fn oracle_mod(x: &BigUint, m: &BigUint) -> Result<BigUint> {
    if m.is_zero() {
        return Err(Error::ZeroModulus);
    }
    Ok(x % m)
}

/// `w = A v mod l`, every coordinate in `[0, l - 1]`.
///
/// Positive and negative contributions are summed separately so the whole
/// computation stays in nonnegative integers; the single reduction per row
/// happens at the end.
pub fn oracle_spmv_mod<M: SparseMatrix + ?Sized>(a: &M, v: &[BigUint], ell: &BigUint) -> Result<Vec<BigUint>> {
    if ell.is_zero() {
        return Err(Error::ZeroModulus);
    }
    if v.len() != a.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: a.n_cols(),
            actual: v.len(),
        });
    }
    let mut pos = vec![BigUint::zero(); a.n_rows()];
    let mut neg = vec![BigUint::zero(); a.n_rows()];
    a.for_each_entry(&mut |row, col, value| {
        let magnitude = BigUint::from(value.unsigned_abs());
        if value > 0 {
            pos[row] += magnitude * &v[col];
        } else {
            neg[row] += magnitude * &v[col];
        }
    });
    Ok(pos.into_iter().zip(neg).map(|(p, n)| signed_mod(p, n, ell)).collect())
}

/// `(p - n) mod l` for nonnegative `p`, `n`.
fn signed_mod(p: BigUint, n: BigUint, ell: &BigUint) -> BigUint {
    let p = p % ell;
    let n = n % ell;
    if p >= n {
        p - n
    } else {
        ell - n + p
    }
}

/// `t` applications of [`oracle_spmv_mod`].
pub fn oracle_iterate<M: SparseMatrix + ?Sized>(a: &M, v: &[BigUint], ell: &BigUint, t: usize) -> Result<Vec<BigUint>> {
    let mut cur = v.to_vec();
    for _ in 0..t {
        cur = oracle_spmv_mod(a, &cur, ell)?;
    }
    Ok(cur)
}

/// Modular inverse by the extended Euclidean algorithm; `None` when
/// `gcd(a, m) != 1`.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::{BigInt, Sign};
    if m.is_zero() {
        return None;
    }
    let a = BigInt::from_biguint(Sign::Plus, a % m);
    let m_signed = BigInt::from_biguint(Sign::Plus, m.clone());
    let egcd = a.extended_gcd(&m_signed);
    if !egcd.gcd.is_one() {
        return None;
    }
    let x = egcd.x.mod_floor(&m_signed);
    x.to_biguint()
}

const MR_BASES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Miller-Rabin with the first sixteen prime bases. Deterministic below
/// 2^81; a strong probable-prime test above.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in &MR_BASES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let shift = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> shift;
    'bases: for &b in &MR_BASES {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..shift {
            x = &x * &x % n;
            if x == n_minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Smallest probable prime `>= n`.
pub fn next_prime(n: &BigUint) -> BigUint {
    let mut candidate = n.clone();
    if candidate <= BigUint::from(2u32) {
        return BigUint::from(2u32);
    }
    if candidate.is_even() {
        candidate += 1u32;
    }
    while !is_probable_prime(&candidate) {
        candidate += 2u32;
    }
    candidate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CooMatrix;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn mod_examples() {
        assert_eq!(oracle_mod(&big(0), &big(7)).unwrap(), big(0));
        assert_eq!(oracle_mod(&big(7), &big(7)).unwrap(), big(0));
        let two64 = BigUint::one() << 64;
        let p = &two64 - 59u32;
        assert_eq!(oracle_mod(&two64, &p).unwrap(), big(59));
        assert!(matches!(oracle_mod(&big(3), &big(0)), Err(Error::ZeroModulus)));
    }

    #[test]
    fn negative_coefficient_is_subtraction() {
        let a = CooMatrix::from_triplets(1, 1, vec![(0, 0, -1)]).unwrap();
        let w = oracle_spmv_mod(&a, &[big(3)], &big(7)).unwrap();
        assert_eq!(w, vec![big(4)]);
    }

    #[test]
    fn identity_is_identity() {
        let a = CooMatrix::from_triplets(3, 3, (0..3).map(|i| (i, i, 1)).collect()).unwrap();
        let v = vec![big(5), big(0), big(6)];
        assert_eq!(oracle_spmv_mod(&a, &v, &big(7)).unwrap(), v);
    }

    #[test]
    fn dimension_mismatch() {
        let a = CooMatrix::from_triplets(2, 2, vec![(0, 0, 1)]).unwrap();
        assert!(matches!(
            oracle_spmv_mod(&a, &[big(1)], &big(7)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn primality() {
        let two64 = BigUint::one() << 64;
        for c in 1u32..256 {
            let expect = [59, 83, 95, 179, 189].contains(&c);
            assert_eq!(is_probable_prime(&(&two64 - c)), expect, "c = {c}");
        }
        assert_eq!(next_prime(&big(90)), big(97));
        assert_eq!(mod_inverse(&big(3), &big(7)), Some(big(5)));
        assert_eq!(mod_inverse(&big(6), &big(9)), None);
    }
}
