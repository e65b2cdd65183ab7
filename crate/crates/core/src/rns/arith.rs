//! Residue-channel arithmetic for pseudo-Mersenne moduli `p = 2^k - c`.
//!
//! Inputs `x` may be relaxed (anywhere in `[0, 2^k)`), the multiplicand `y`
//! must be fully reduced (`y < p`). Outputs are relaxed again.

use crate::{Error, Result};

/// Bound exponent on the modulus offsets: every `c < 2^K0`.
pub const K0: u32 = 8;

/// Largest coefficient magnitude accepted by the integer AddMul (`2^(64 - K0)`
/// exclusive).
pub const INT_LAMBDA_LIMIT: u64 = 1 << (64 - K0);

/// Largest coefficient magnitude accepted by the float AddMul (exclusive).
pub const FLOAT_LAMBDA_LIMIT: u64 = 1 << 44;

const TWO_52: f64 = 4_503_599_627_370_496.0;
const TWO_53: f64 = 9_007_199_254_740_992.0;

/// One pseudo-Mersenne modulus `p = 2^k - c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Modulus {
    pub p: u64,
    pub c: u64,
}

impl Modulus {
    /// Brings a relaxed residue into `[0, p)`; one subtraction suffices since
    /// `2^k < 2p`.
    #[inline(always)]
    pub fn normalize(&self, x: u64) -> u64 {
        if x >= self.p {
            x - self.p
        } else {
            x
        }
    }

    /// `(a - b) mod p` for `a, b < p`.
    #[inline(always)]
    pub fn sub_mod(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + (self.p - b)
        }
    }

    #[inline(always)]
    pub fn add_mod(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        let p = self.p as u128;
        (if s >= p { s - p } else { s }) as u64
    }

    #[inline(always)]
    pub fn mul_mod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }
}

/// Accumulation primitives shared by every SpMV kernel; one implementation
/// per residue flavor.
pub trait ChannelArith: Send + Sync + 'static {
    /// `x + y`, relaxed output.
    fn add(m: &Modulus, x: u64, y: u64) -> u64;
    /// `x + lambda * y`, relaxed output.
    fn addmul(m: &Modulus, x: u64, lambda: u64, y: u64) -> u64;
}

/// 64-bit integer residues.
pub struct IntegerArith;

/// 52-bit residues held in the mantissa of an `f64`.
pub struct FloatArith;

impl ChannelArith for IntegerArith {
    #[inline(always)]
    fn add(m: &Modulus, x: u64, y: u64) -> u64 {
        add_int(m, x, y)
    }

    #[inline(always)]
    fn addmul(m: &Modulus, x: u64, lambda: u64, y: u64) -> u64 {
        addmul_int(m, x, lambda, y)
    }
}

impl ChannelArith for FloatArith {
    #[inline(always)]
    fn add(m: &Modulus, x: u64, y: u64) -> u64 {
        add_float(m.p as f64, x as f64, y as f64) as u64
    }

    #[inline(always)]
    fn addmul(m: &Modulus, x: u64, lambda: u64, y: u64) -> u64 {
        addmul_float(m.p as f64, m.c as f64, x as f64, lambda as f64, y as f64) as u64
    }
}

/// RNS Add on 64-bit words: wrap, then fold the carry back in as `+c`.
///
/// `x + y < 2^64 + p`, so after a carry `z + c < p + c = 2^64`.
#[inline(always)]
pub fn add_int(m: &Modulus, x: u64, y: u64) -> u64 {
    debug_assert!(y < m.p);
    let (z, carry) = x.overflowing_add(y);
    if carry {
        z + m.c
    } else {
        z
    }
}

/// RNS AddMul on 64-bit words.
///
/// The 128-bit sum `x + lambda * y` is split into `lo + 2^64 hi`, and
/// `2^64 = c (mod p)` folds it to `lo + c * hi`. With `lambda < 2^56` and
/// `c < 2^8`, `c * hi < 2^64`; a carry leaves `z < c * hi`, so the single
/// `+c` correction cannot carry again.
#[inline(always)]
pub fn addmul_int(m: &Modulus, x: u64, lambda: u64, y: u64) -> u64 {
    debug_assert!(y < m.p);
    debug_assert!(lambda < INT_LAMBDA_LIMIT);
    let t = x as u128 + lambda as u128 * y as u128;
    let lo = t as u64;
    let hi = (t >> 64) as u64;
    let (z, carry) = lo.overflowing_add(m.c * hi);
    if carry {
        z + m.c
    } else {
        z
    }
}

/// RNS Add on doubles: `x < 2^52`, `y < p`, so `x + y < 2^53` is exact.
#[inline(always)]
pub fn add_float(p: f64, x: f64, y: f64) -> f64 {
    let z = x + y;
    debug_assert!(exact_int(z));
    if z >= p {
        z - p
    } else {
        z
    }
}

/// Splits `t >= 0` at the `2^52` boundary: `hi` is the largest multiple of
/// `2^52` not above `t`, `lo = t - hi` lies in `[0, 2^52)`.
///
/// Adding and subtracting `1.5 * 2^104` rounds `t` to the nearest multiple of
/// `2^52` (the ulp at that magnitude); a final step fixes the rounding
/// direction. Exact for `t < 2^103`.
pub fn veltkamp_split(t: f64, bits: u32) -> Result<(f64, f64)> {
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    if bits != 52 {
        return Err(Error::InvalidParameter(format!(
            "split boundary must be 52 bits, got {bits}"
        )));
    }
    Ok(split52(t))
}

#[inline(always)]
fn split52(t: f64) -> (f64, f64) {
    const ROUNDER: f64 = 1.5 * TWO_52 * TWO_52;
    debug_assert!(t >= 0.0);
    let mut hi = (t + ROUNDER) - ROUNDER;
    if hi > t {
        hi -= TWO_52;
    }
    (hi, t - hi)
}

/// Exact product `a * b = hi + lo` via a fused multiply-add.
#[inline(always)]
pub fn two_product(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    (hi, lo)
}

/// RNS AddMul on doubles (`p = 2^52 - c`, `lambda < 2^44`).
///
/// `y * lambda = tH + tL` exactly, `tH = q 2^52 + r` with `r < 2^52` and
/// `q <= 2^44`, and `2^52 = c (mod p)` folds the product to `q c + r + tL`.
/// `tL` is signed, so it is absorbed into `x` first with a two-sided
/// correction; every later partial sum stays below `2^53` and is exact.
#[inline(always)]
pub fn addmul_float(p: f64, c: f64, x: f64, lambda: f64, y: f64) -> f64 {
    debug_assert!(x < TWO_52 && y < p && lambda < FLOAT_LAMBDA_LIMIT as f64);
    let (t_hi, t_lo) = two_product(y, lambda);
    let (hh, hl) = split52(t_hi);
    let q = hh * (1.0 / TWO_52);

    // |t_lo| <= 2^43: u in (-2^43, 2^52 + 2^43)
    let mut u = x + t_lo;
    if u < 0.0 {
        u += p;
    } else if u >= p {
        u -= p;
    }
    // u < p, hl < 2^52
    let mut z = u + hl;
    if z >= p {
        z -= p;
    }
    // z < 2^52, q c <= 255 * 2^44
    let mut w = z + q * c;
    if w >= p {
        w -= p;
    }
    debug_assert!(exact_int(u) && exact_int(z) && exact_int(w) && exact_int(q * c));
    debug_assert!((0.0..TWO_52).contains(&w));
    w
}

#[inline(always)]
fn exact_int(v: f64) -> bool {
    v.fract() == 0.0 && v.abs() <= TWO_53
}
