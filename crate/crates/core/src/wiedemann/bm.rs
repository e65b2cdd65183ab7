use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::oracle::mod_inverse;
use crate::{Error, Result};

/// Monic linear generator `F_0 + F_1 X + ... + X^d` of a sequence:
/// `sum_j F_j a_{i+j} = 0 mod l` for every window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorPoly {
    /// `F_0..F_d`, canonical modulo `l`.
    pub coeffs: Vec<BigUint>,
}

impl GeneratorPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Largest `v` with `X^v | F`.
    pub fn valuation(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    /// Checks `sum_j F_j a_{i+j} = 0` for every full window of `a`.
    pub fn annihilates(&self, a: &[BigUint], ell: &BigUint) -> bool {
        let d = self.degree();
        (0..a.len().saturating_sub(d)).all(|i| {
            let s: BigUint = self.coeffs.iter().zip(&a[i..]).map(|(f, x)| f * x).sum();
            (s % ell).is_zero()
        })
    }
}

fn sub_mod(a: &BigUint, b: &BigUint, ell: &BigUint) -> BigUint {
    if a >= b {
        a - b
    } else {
        ell - b + a
    }
}

/// Minimal monic generator of `a` over `Z/lZ` (`l` prime).
///
/// An all-zero sequence has generator `1`. Fails when the sequence is empty
/// or too short to determine the generator found (`2 deg > len`).
pub fn berlekamp_massey(a: &[BigUint], ell: &BigUint) -> Result<GeneratorPoly> {
    if a.is_empty() {
        return Err(Error::InsufficientSequence { len: 0, degree: 0 });
    }
    if ell.is_zero() {
        return Err(Error::ZeroModulus);
    }
    // connection polynomials: a_n + sum_{i=1..L} c_i a_{n-i} = 0
    let mut c: Vec<BigUint> = vec![BigUint::one()];
    let mut b: Vec<BigUint> = vec![BigUint::one()];
    let mut big_l = 0usize;
    let mut shift = 1usize;
    let mut b_disc = BigUint::one();
    for n in 0..a.len() {
        let mut d = &a[n] % ell;
        for i in 1..=big_l.min(c.len() - 1) {
            d += &c[i] * &a[n - i];
        }
        d %= ell;
        if d.is_zero() {
            shift += 1;
            continue;
        }
        let coef = &d * mod_inverse(&b_disc, ell).ok_or(Error::InvalidParameter("l is not prime".into()))? % ell;
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, BigUint::zero());
        }
        for (i, bi) in b.iter().enumerate() {
            let t = &coef * bi % ell;
            c[i + shift] = sub_mod(&c[i + shift], &t, ell);
        }
        if 2 * big_l <= n {
            big_l = n + 1 - big_l;
            b = prev;
            b_disc = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    if 2 * big_l > a.len() {
        return Err(Error::InsufficientSequence {
            len: a.len(),
            degree: big_l,
        });
    }
    c.resize(big_l + 1, BigUint::zero());
    let coeffs = (0..=big_l).map(|j| c[big_l - j].clone()).collect();
    Ok(GeneratorPoly { coeffs })
}
