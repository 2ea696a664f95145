//! Pairwise Poisson brackets of the residue Hamiltonians `H_{p,1}`.

use laxkit_core::calogero::{CMState, CMSystem, CmFamily, GradientMethod, HamSpec};
use serde_json::{json, Value};

use crate::report::{complex_json, Check, Report};
use crate::{case_rng, default_lattice, LaxkitError};

pub const BRACKET_TOL: f64 = 1e-6;
pub const DEFAULT_RETRIES: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct BracketEntry {
    pub a: u32,
    pub b: u32,
    pub value: laxkit_core::elliptic::C,
}

#[derive(Clone, Debug)]
pub struct InvolutionRun {
    pub state: CMState,
    /// Samples rejected before `state` was accepted.
    pub resampled: usize,
    pub table: Vec<BracketEntry>,
    pub max_abs: f64,
}

/// Powers must be positive, distinct and even for B/C/D.
pub fn validate_powers(family: CmFamily, powers: &[u32]) -> Result<(), LaxkitError> {
    if powers.is_empty() || powers.contains(&0) {
        return Err(LaxkitError::Usage("powers must be positive".into()));
    }
    if family != CmFamily::A && powers.iter().any(|p| p % 2 == 1) {
        return Err(LaxkitError::Usage("odd powers vanish identically for B/C/D; use even powers".into()));
    }
    let mut v = powers.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() != powers.len() {
        return Err(LaxkitError::Usage("powers must be distinct".into()));
    }
    Ok(())
}

fn table_at(sys: &CMSystem, s: &CMState, powers: &[u32]) -> Result<Vec<BracketEntry>, laxkit_core::Error> {
    let mut out = Vec::new();
    for (i, &a) in powers.iter().enumerate() {
        for &b in &powers[i + 1..] {
            let value = sys.poisson_bracket(
                HamSpec::Residue { p: a, m: 1 },
                HamSpec::Residue { p: b, m: 1 },
                s,
                GradientMethod::CentralDifference,
            )?;
            out.push(BracketEntry { a, b, value });
        }
    }
    Ok(out)
}

/// Brackets at a seeded random state; states where a Hamiltonian cannot be
/// evaluated (collisions, Lax poles) are resampled up to `retries` times.
pub fn run(
    family: CmFamily,
    n: usize,
    powers: &[u32],
    seed: u64,
    retries: usize,
) -> Result<InvolutionRun, LaxkitError> {
    validate_powers(family, powers)?;
    if n == 0 {
        return Err(LaxkitError::Usage("n must be positive".into()));
    }
    let sys = CMSystem::physical_on(family, n, default_lattice())?;
    let mut rng = case_rng(seed, 0);
    let mut last = None;
    for attempt in 0..=retries {
        let attempt_result = sys
            .sample_state(&mut rng, 0.02, 0.5)
            .and_then(|s| sys.check_lax_state(&s).map(|_| s))
            .and_then(|s| table_at(&sys, &s, powers).map(|t| (s, t)));
        match attempt_result {
            Ok((state, table)) => {
                let max_abs = table.iter().map(|e| e.value.norm()).fold(0.0, f64::max);
                return Ok(InvolutionRun { state, resampled: attempt, table, max_abs });
            }
            Err(e) => last = Some(e),
        }
    }
    Err(LaxkitError::Runtime(format!(
        "no admissible state after {retries} retries: {}",
        last.map(|e| e.to_string()).unwrap_or_default()
    )))
}

pub fn report(family: CmFamily, n: usize, powers: &[u32], seed: u64, run: &InvolutionRun) -> Report {
    let table: Vec<Value> = run
        .table
        .iter()
        .map(|e| json!({"a": format!("H_{},1", e.a), "b": format!("H_{},1", e.b), "value": complex_json(e.value), "abs": e.value.norm()}))
        .collect();
    let check = Check::below("max |{H_a, H_b}|", run.max_abs, BRACKET_TOL, run.table.len());
    Report::new("involution", seed, vec![check])
        .with("family", json!(family.to_string()))
        .with("n", json!(n))
        .with("powers", json!(powers))
        .with("m", json!(1))
        .with("state", json!({"q": run.state.q.iter().map(|x| x.re).collect::<Vec<_>>(), "p": run.state.p.iter().map(|x| x.re).collect::<Vec<_>>()}))
        .with("resampled", json!(run.resampled))
        .with("bracket_table", Value::Array(table))
        .with("max_abs", json!(run.max_abs))
}
