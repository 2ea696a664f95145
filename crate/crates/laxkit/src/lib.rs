//! Verification suites, Calogero–Moser simulation drivers and file formats
//! for [`laxkit_core`].
//!
//! Every randomized routine takes a seed and derives per-case generators from
//! it, so results do not depend on how rayon schedules the cases.

pub mod cm;
pub mod config;
pub mod grading;
pub mod involution;
pub mod report;
pub mod suites;

use laxkit_core::elliptic::{Lattice, C};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Errors with their process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum LaxkitError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("runtime: {0}")]
    Runtime(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl LaxkitError {
    pub fn exit_code(&self) -> u8 {
        match self {
            LaxkitError::Usage(_) => 2,
            _ => 3,
        }
    }
}

impl From<laxkit_core::Error> for LaxkitError {
    fn from(e: laxkit_core::Error) -> Self {
        LaxkitError::Runtime(e.to_string())
    }
}

/// Exit code for a finished run: 0 if every check passed, 1 otherwise.
pub fn exit_code_for(passed: bool) -> u8 {
    if passed {
        0
    } else {
        1
    }
}

/// Generator for case `index` of a run seeded with `seed`.
pub fn case_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Default simulation lattice: `ω_1 = 2`, `τ = i`.
pub fn default_lattice() -> Lattice {
    simulation_lattice(2.0, C::new(0.0, 1.0)).expect("valid default lattice")
}

/// Lattice with real half-period `ω_1` and modulus `τ`.
pub fn simulation_lattice(omega1: f64, tau: C) -> Result<Lattice, LaxkitError> {
    if !(omega1 > 0.0) || !omega1.is_finite() {
        return Err(LaxkitError::Usage("omega1 must be positive".into()));
    }
    Lattice::from_tau(C::new(omega1, 0.0), tau).map_err(|e| LaxkitError::Usage(e.to_string()))
}

/// Parses `re,im`, a real number, or `i`.
pub fn parse_complex(s: &str) -> Result<C, LaxkitError> {
    let t = s.trim();
    if t == "i" {
        return Ok(C::new(0.0, 1.0));
    }
    let bad = || LaxkitError::Usage(format!("cannot parse complex number {s:?} (use re,im)"));
    match t.split_once(',') {
        Some((a, b)) => Ok(C::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
        None => Ok(C::new(t.parse().map_err(|_| bad())?, 0.0)),
    }
}

/// Parses `2,3,4` or `2..4` (inclusive).
pub fn parse_powers(s: &str) -> Result<Vec<u32>, LaxkitError> {
    let bad = || LaxkitError::Usage(format!("cannot parse powers {s:?} (use 2,3,4 or 2..4)"));
    let t = s.trim();
    if let Some((a, b)) = t.split_once("..") {
        let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        return Ok((a..=b).collect());
    }
    t.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}
