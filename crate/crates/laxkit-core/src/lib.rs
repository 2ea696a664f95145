//! Lax operator algebras attached to Z-gradings of semisimple Lie algebras.
//!
//! - [`liealg`]: root systems, matrix realizations, gradings, integer identities
//! - [`formal`]: truncated Laurent expansions at the points of Γ
//! - [`sphere`]: exact genus-0 realization (slices, cocycle, M-operators)
//! - [`elliptic`]: Weierstrass σ, ζ, ℘, ℘′
//! - [`calogero`]: elliptic Calogero–Moser systems and their diagnostics
//!
//! Exact parts use [`exact::Q`]; no floating point enters them.
#![no_std]

extern crate alloc;

pub mod calogero;
pub mod elliptic;
pub mod exact;
pub mod formal;
pub mod liealg;
pub mod sphere;

pub use exact::{Mat, Q};

/// Errors shared by all modules.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("invalid grading element: {0}")]
    InvalidGrading(&'static str),
    #[error("decomposition mismatch")]
    DecompositionMismatch,
    #[error("invalid divisor: {0}")]
    InvalidDivisor(&'static str),
    #[error("rank deficiency: expected dimension {expected}, found {found}")]
    RankDeficient { expected: usize, found: usize },
    #[error("inconsistent linear system: {0}")]
    Inconsistent(&'static str),
    #[error("pole proximity at z = {re} + {im}i")]
    PoleProximity { re: f64, im: f64 },
    #[error("collision: {0}")]
    Collision(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("internal consistency error: {0}")]
    Internal(&'static str),
}
