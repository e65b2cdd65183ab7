use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::arith::{Modulus, K0};
use crate::{Error, Result};

/// Residue representation: native 64-bit words, or 52-bit integers carried in
/// `f64` mantissas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Integer,
    Float,
}

impl Flavor {
    /// Bit width `k` of each modulus.
    pub fn width(self) -> u32 {
        match self {
            Flavor::Integer => 64,
            Flavor::Float => 52,
        }
    }

    pub fn from_width(k: u32) -> Result<Self> {
        match k {
            64 => Ok(Flavor::Integer),
            52 => Ok(Flavor::Float),
            _ => Err(Error::UnsupportedWidth(k)),
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Integer => "integer",
            Flavor::Float => "float",
        })
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integer" | "int" => Ok(Flavor::Integer),
            "float" => Ok(Flavor::Float),
            _ => Err(Error::InvalidParameter(format!("unknown flavor {s:?}"))),
        }
    }
}

/// The error-correcting term of the quotient estimate, as a fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Delta {
    pub num: u64,
    pub den: u64,
}

impl Delta {
    pub const HALF: Delta = Delta { num: 1, den: 2 };
}

/// Truncation parameter of the quotient estimate.
pub const DEFAULT_TRUNCATION: u32 = 16;

/// How many consecutive products may be accumulated before reducing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccumulationLimit {
    Steps(u32),
    /// Row norm 1: values never grow.
    Unbounded,
}

/// A complete RNS context for `Z/lZ`: moduli and every table the conversions
/// and the reduction modulo `l` need. Immutable once built.
#[derive(Clone, Debug)]
pub struct RnsBasis {
    flavor: Flavor,
    k: u32,
    moduli: Vec<Modulus>,
    product: BigUint,
    ell: BigUint,
    /// `|P_j^{-1}|_{p_j}` with `P_j = P / p_j`.
    inv_cofactor: Vec<u64>,
    /// Row `i`: residues of `|P_i|_l`.
    cofactor_mod_ell: Vec<Vec<u64>>,
    /// Row `a`: residues of `(-a P) mod l`, `a` in `0..n`.
    neg_multiple_mod_ell: Vec<Vec<u64>>,
    /// Big-integer cofactors `P_j` for CRT reconstruction.
    cofactors: Vec<BigUint>,
    delta: Delta,
    truncation: u32,
    /// `floor(delta * 2^s)`.
    delta_scaled: u64,
    /// `n * 2^k * l`: bound on every reduction output.
    reduced_bound: BigUint,
}

/// Offsets `c < 2^8` in selection order: first every `c` making `2^k - c`
/// prime, increasing; then, if more moduli are needed, composite `2^k - c`
/// coprime to everything already selected.
pub fn candidate_offsets(k: u32) -> Vec<u64> {
    let top = 1u64 << K0;
    let modulus = |c: u64| -> u128 { (1u128 << k) - c as u128 };
    let mut chosen: Vec<u64> = (1..top).filter(|&c| is_prime_u128(modulus(c))).collect();
    for c in 1..top {
        if chosen.contains(&c) {
            continue;
        }
        let m = modulus(c);
        if chosen.iter().all(|&d| m.gcd(&modulus(d)) == 1) {
            chosen.push(c);
        }
    }
    chosen
}

fn is_prime_u128(n: u128) -> bool {
    crate::oracle::is_probable_prime(&BigUint::from(n))
}

impl RnsBasis {
    /// Smallest basis with `r * n * 2^k * l < (1 - delta) P`.
    pub fn build(ell: &BigUint, r: u64, flavor: Flavor) -> Result<Self> {
        if *ell < BigUint::from(3u32) {
            return Err(Error::InvalidParameter("l must be at least 3".into()));
        }
        if r == 0 {
            return Err(Error::InvalidParameter("row norm bound r must be >= 1".into()));
        }
        let k = flavor.width();
        let delta = Delta::HALF;
        let offsets = candidate_offsets(k);
        let mut product = BigUint::one();
        for n in 1..=offsets.len() {
            product *= (BigUint::one() << k) - offsets[n - 1];
            let lhs = BigUint::from(r) * n * (BigUint::one() << k) * ell * delta.den;
            if lhs < &product * (delta.den - delta.num) {
                return Self::with_offsets(ell.clone(), flavor, &offsets[..n], delta, DEFAULT_TRUNCATION);
            }
        }
        Err(Error::BasisExhausted {
            available: offsets.len(),
        })
    }

    /// A basis on explicitly chosen offsets; checks coprimality, the offset
    /// bound, the estimate conditions and that the reduction output fits.
    pub fn with_offsets(ell: BigUint, flavor: Flavor, offsets: &[u64], delta: Delta, truncation: u32) -> Result<Self> {
        let k = flavor.width();
        let n = offsets.len();
        if n == 0 {
            return Err(Error::MalformedBasis("empty modulus list".into()));
        }
        if ell < BigUint::from(3u32) {
            return Err(Error::InvalidParameter("l must be at least 3".into()));
        }
        if offsets.iter().any(|&c| c == 0 || c >= 1 << K0) {
            return Err(Error::MalformedBasis(format!("offsets must lie in [1, 2^{K0})")));
        }
        if delta.num == 0 || delta.num >= delta.den || truncation == 0 || truncation > k {
            return Err(Error::MalformedBasis("invalid delta or truncation".into()));
        }
        let moduli: Vec<Modulus> = offsets
            .iter()
            .map(|&c| Modulus {
                p: ((1u128 << k) - c as u128) as u64,
                c,
            })
            .collect();
        for (i, a) in moduli.iter().enumerate() {
            for b in &moduli[i + 1..] {
                if a.p.gcd(&b.p) != 1 {
                    return Err(Error::MalformedBasis(format!(
                        "moduli {} and {} share a factor",
                        a.p, b.p
                    )));
                }
            }
        }

        // epsilon + delta_trunc <= delta, scaled by 2^k * den
        let eps_num: u128 = offsets.iter().map(|&c| c as u128).sum();
        let trunc_num = n as u128 * ((1u128 << (k - truncation)) - 1);
        if (eps_num + trunc_num) * delta.den as u128 > (delta.num as u128) << k {
            return Err(Error::MalformedBasis(
                "estimate condition epsilon + delta <= Delta fails".into(),
            ));
        }

        let product: BigUint = moduli.iter().map(|m| BigUint::from(m.p)).product();
        let reduced_bound = BigUint::from(n) * (BigUint::one() << k) * &ell;
        if &reduced_bound * delta.den >= &product * (delta.den - delta.num) {
            return Err(Error::MalformedBasis("P too small: n 2^k l >= (1 - delta) P".into()));
        }

        let residues = |x: &BigUint| -> Vec<u64> {
            moduli
                .iter()
                .map(|m| (x % m.p).to_u64().expect("residue fits in u64"))
                .collect()
        };
        let cofactors: Vec<BigUint> = moduli.iter().map(|m| &product / m.p).collect();
        let inv_cofactor = moduli
            .iter()
            .zip(&cofactors)
            .map(|(m, cof)| {
                let r = crate::oracle::mod_inverse(cof, &BigUint::from(m.p)).expect("coprime moduli");
                r.to_u64().expect("fits")
            })
            .collect();
        let cofactor_mod_ell = cofactors.iter().map(|cof| residues(&(cof % &ell))).collect();
        let neg_multiple_mod_ell = (0..n)
            .map(|a| {
                let m = (BigUint::from(a) * &product) % &ell;
                let neg = if m.is_zero() { m } else { &ell - m };
                residues(&neg)
            })
            .collect();
        let delta_scaled = ((delta.num as u128) << truncation) / delta.den as u128;

        Ok(RnsBasis {
            flavor,
            k,
            moduli,
            product,
            ell,
            inv_cofactor,
            cofactor_mod_ell,
            neg_multiple_mod_ell,
            cofactors,
            delta,
            truncation,
            delta_scaled: delta_scaled as u64,
            reduced_bound,
        })
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Modulus bit width `k`.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of moduli `n`.
    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    pub fn moduli(&self) -> &[Modulus] {
        &self.moduli
    }

    pub fn modulus(&self, j: usize) -> &Modulus {
        &self.moduli[j]
    }

    pub fn offsets(&self) -> Vec<u64> {
        self.moduli.iter().map(|m| m.c).collect()
    }

    /// `P`, the product of all moduli.
    pub fn product(&self) -> &BigUint {
        &self.product
    }

    pub fn ell(&self) -> &BigUint {
        &self.ell
    }

    pub fn delta(&self) -> Delta {
        self.delta
    }

    /// Truncation parameter `s`.
    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn delta_scaled(&self) -> u64 {
        self.delta_scaled
    }

    pub fn inv_cofactor(&self) -> &[u64] {
        &self.inv_cofactor
    }

    pub fn cofactor(&self, j: usize) -> &BigUint {
        &self.cofactors[j]
    }

    pub fn cofactor_mod_ell(&self, i: usize) -> &[u64] {
        &self.cofactor_mod_ell[i]
    }

    /// Residues of `(-a P) mod l`.
    pub fn neg_multiple_mod_ell(&self, a: usize) -> &[u64] {
        &self.neg_multiple_mod_ell[a]
    }

    /// `n * 2^k * l`, the bound on every reduction output.
    pub fn reduced_bound(&self) -> &BigUint {
        &self.reduced_bound
    }

    /// `true` iff `value < (1 - delta) P`, the reduction's input condition.
    pub fn below_reduction_limit(&self, value: &BigUint) -> bool {
        value * self.delta.den < &self.product * (self.delta.den - self.delta.num)
    }

    /// Largest `F >= 1` with `r^F * n * 2^k * l < (1 - delta) P`.
    pub fn max_accumulation_count(&self, r: u64) -> Result<AccumulationLimit> {
        match r {
            0 => Err(Error::InvalidParameter("row norm must be >= 1".into())),
            1 => Ok(AccumulationLimit::Unbounded),
            _ => {
                let mut value = self.reduced_bound.clone();
                let mut steps = 0u32;
                loop {
                    value *= r;
                    if !self.below_reduction_limit(&value) {
                        break;
                    }
                    steps += 1;
                }
                if steps == 0 {
                    Err(Error::RowNormTooLarge { row_norm: r })
                } else {
                    Ok(AccumulationLimit::Steps(steps))
                }
            }
        }
    }

    /// Residues of an arbitrary nonnegative integer, without range checks.
    pub(crate) fn residues_of(&self, x: &BigUint) -> Vec<u64> {
        self.moduli
            .iter()
            .map(|m| (x % m.p).to_u64().expect("residue fits in u64"))
            .collect()
    }

    /// Single-line text form, parsed back by [`FromStr`].
    pub fn describe(&self) -> String {
        let offsets: Vec<String> = self.moduli.iter().map(|m| m.c.to_string()).collect();
        format!(
            "rns-basis flavor={} k={} n={} c={} ell={:#x} delta={}/{} s={}",
            self.flavor,
            self.k,
            self.len(),
            offsets.join(","),
            self.ell,
            self.delta.num,
            self.delta.den,
            self.truncation
        )
    }
}

impl fmt::Display for RnsBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl FromStr for RnsBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::MalformedBasis(m.to_string());
        let mut words = s.split_whitespace();
        if words.next() != Some("rns-basis") {
            return Err(bad("missing rns-basis tag"));
        }
        let (mut flavor, mut k, mut n, mut offsets, mut ell, mut delta, mut s_param) =
            (None, None, None, None, None, None, None);
        for word in words {
            let (key, value) = word.split_once('=').ok_or_else(|| bad(word))?;
            match key {
                "flavor" => flavor = Some(value.parse::<Flavor>().map_err(|_| bad(value))?),
                "k" => k = Some(value.parse::<u32>().map_err(|_| bad(value))?),
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad(value))?),
                "c" => {
                    let list: std::result::Result<Vec<u64>, _> = value.split(',').map(str::parse).collect();
                    offsets = Some(list.map_err(|_| bad(value))?);
                }
                "ell" => {
                    let hex = value.strip_prefix("0x").ok_or_else(|| bad("ell must be 0x-prefixed"))?;
                    ell = Some(BigUint::parse_bytes(hex.as_bytes(), 16).ok_or_else(|| bad(value))?);
                }
                "delta" => {
                    let (a, b) = value.split_once('/').ok_or_else(|| bad(value))?;
                    delta = Some(Delta {
                        num: a.parse().map_err(|_| bad(value))?,
                        den: b.parse().map_err(|_| bad(value))?,
                    });
                }
                "s" => s_param = Some(value.parse::<u32>().map_err(|_| bad(value))?),
                _ => return Err(bad(key)),
            }
        }
        let flavor = flavor.ok_or_else(|| bad("missing flavor"))?;
        let k = k.ok_or_else(|| bad("missing k"))?;
        if Flavor::from_width(k)? != flavor {
            return Err(bad("k does not match flavor"));
        }
        let offsets = offsets.ok_or_else(|| bad("missing c"))?;
        if n != Some(offsets.len()) {
            return Err(bad("n does not match the offset list"));
        }
        RnsBasis::with_offsets(
            ell.ok_or_else(|| bad("missing ell"))?,
            flavor,
            &offsets,
            delta.ok_or_else(|| bad("missing delta"))?,
            s_param.ok_or_else(|| bad("missing s"))?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_offsets_start_with_primes() {
        let c = candidate_offsets(64);
        assert_eq!(&c[..5], &[59, 83, 95, 179, 189]);
        assert!(c.len() > 10);
        let f = candidate_offsets(52);
        assert_eq!(&f[..6], &[47, 143, 173, 183, 197, 209]);
    }

    #[test]
    fn tiny_ell_needs_two_moduli() {
        let ell = BigUint::from(5u32);
        let b = RnsBasis::build(&ell, 1, Flavor::Integer).unwrap();
        assert_eq!(b.len(), 2);
        // n = 1 fails: 1 * 2^64 * 5 >= (1/2)(2^64 - 59)
        let one = RnsBasis::with_offsets(ell, Flavor::Integer, &[59], Delta::HALF, 16);
        assert!(one.is_err());
    }

    #[test]
    fn tables_are_consistent() {
        let ell = crate::oracle::next_prime(&(BigUint::one() << 160));
        let b = RnsBasis::build(&ell, 100, Flavor::Integer).unwrap();
        for j in 0..b.len() {
            let p = BigUint::from(b.modulus(j).p);
            let check = (BigUint::from(b.inv_cofactor()[j]) * b.cofactor(j)) % &p;
            assert!(check.is_one());
        }
        assert_eq!(b.delta_scaled(), 1 << 15);
    }

    #[test]
    fn text_round_trip() {
        let ell = crate::oracle::next_prime(&(BigUint::one() << 100));
        for flavor in [Flavor::Integer, Flavor::Float] {
            let b = RnsBasis::build(&ell, 492, flavor).unwrap();
            let text = b.describe();
            let back: RnsBasis = text.parse().unwrap();
            assert_eq!(back.describe(), text);
            assert_eq!(back.product(), b.product());
        }
        assert!("rns-basis k=64".parse::<RnsBasis>().is_err());
        assert!("garbage".parse::<RnsBasis>().is_err());
    }

    #[test]
    fn accumulation_sentinels() {
        let ell = BigUint::from(1_000_003u32);
        let b = RnsBasis::build(&ell, 2, Flavor::Integer).unwrap();
        assert_eq!(b.max_accumulation_count(1).unwrap(), AccumulationLimit::Unbounded);
        assert!(b.max_accumulation_count(0).is_err());
        assert!(matches!(b.max_accumulation_count(2).unwrap(), AccumulationLimit::Steps(s) if s >= 1));
    }
}
