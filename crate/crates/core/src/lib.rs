//! Exact sparse linear algebra over `Z/lZ` for large primes `l`.
//!
//! Elements of `Z/lZ` are carried in a residue number system (RNS) built on
//! pseudo-Mersenne moduli `2^k - c`. Sparse matrix-vector products accumulate
//! without reducing modulo `l` for as many iterations as the largest row norm
//! allows, after which the RNS-internal reduction brings every element back
//! below `n * 2^k * l`. On top of the SpMV engines sits a Wiedemann solver that
//! produces kernel vectors of singular matrices.
//!
//! Every result can be cross-checked against the arbitrary-precision routines
//! in [`oracle`].

pub mod error;
pub mod matrix;
pub mod oracle;
pub mod rns;
pub mod spmv;
pub mod wiedemann;

pub use error::{Error, Result};
pub use num_bigint::BigUint;
