//! Exact machinery for representing integers as sums of distinct positive
//! n-th powers.
//!
//! The crate has two halves that check each other:
//!
//! * a constructive side ([`params`], [`partition`], [`delta`], [`residue`],
//!   [`progression`], [`assemble`]) that derives an explicit upper bound on
//!   the largest integer with no such representation and materializes every
//!   step of the construction as a self-verifying certificate, and
//! * an empirical side ([`threshold`]) that computes the exact threshold of
//!   completeness for small exponents by bitset subset-sum reachability,
//!   closed off by a run-of-consecutive-representables stopping certificate.
//!
//! All arithmetic is exact; big values are `num_bigint::BigUint`, and there
//! is no floating point anywhere in the verification paths.

pub mod assemble;
pub mod delta;
pub mod params;
pub mod partition;
pub mod progression;
pub mod residue;
pub mod threshold;

pub use params::{derive_params, Params};

use num_bigint::BigUint;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("exponent must be at least {min}, got {got}")]
    ExponentOutOfRange { got: u32, min: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("certificate not found: {0}")]
    CertificateNotFound(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

/// Serde helpers: big integers serialize as decimal strings, since JSON
/// numbers cannot hold them losslessly.
pub mod ser {
    use num_bigint::BigUint;
    use serde::Serializer;

    pub fn biguint_dec<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn biguint_vec_dec<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_str_radix(10)))
    }
}
