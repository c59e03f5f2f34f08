//! Numerics for Schur-Weyl based property tests of quantum states.
//!
//! The crate computes acceptance probabilities of the rank and Schmidt-rank
//! tests (through weak Schur sampling and longest decreasing subsequences),
//! the exact soundness of the `(r+1)`-copy rank test, the tree tensor network
//! truncation with its overlap certificate, and the copy budgets built on top
//! of them. Every formula has an independent check living next to it: brute
//! force enumeration, a numeric minimisation, or a dense operator computation
//! at micro scale.

pub mod bounds;
pub mod linalg_oracle;
pub mod partitions;
pub mod ranktest;
pub mod scalar;
pub mod schmidt;
pub mod ttns;
pub mod verify;
pub mod wss;

pub use num_bigint::{BigInt, BigUint};
pub use num_complex::Complex64;
pub use num_rational::BigRational;

pub use partitions::{Partition, Spectrum};
pub use scalar::{ArithmeticMode, Scalar};

/// Errors shared by every module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{what} cap exceeded ({needed} > {limit}); {hint}")]
    CapExceeded {
        what: &'static str,
        needed: String,
        limit: String,
        hint: &'static str,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0}")]
    Parse(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

/// Size limits for the enumerative code paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of partitions enumerated by the exact WSS path.
    pub partitions: u64,
    /// Maximum number of weighted words for brute-force enumeration.
    pub brute_words: u64,
    /// Maximum number of tableaux for the direct SSYT sum.
    pub ssyt: u64,
    /// Maximum number of states in the patience-sorting automaton.
    pub automaton_states: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            partitions: 2_000_000,
            brute_words: 43_046_721, // 3^16
            ssyt: 2_000_000,
            automaton_states: 1 << 20,
        }
    }
}
