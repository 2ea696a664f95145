//! Calogero–Moser runs: integrate, measure drift, write CSV and a JSON report.

use std::io::Write;

use laxkit_core::calogero::{
    multiset_distance, CMState, CMSystem, CmFamily, GradientMethod, HamSpec, Scheme, Trajectory,
};
use laxkit_core::elliptic::C;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::report::{complex_json, Check, Report};
use crate::{case_rng, simulation_lattice, LaxkitError};

pub const H_DRIFT_TOL: f64 = 1e-8;
pub const SPEC_DRIFT_TOL: f64 = 1e-6;

/// Spectral parameters `a ω_1 + b ω_2` at which `L(z)` is monitored.
pub const Z_SAMPLES: [(f64, f64); 3] = [(0.13, 0.42), (-0.27, 0.22), (0.31, -0.34)];

/// Marker written in the `t` column of the last CSV row of an aborted run.
pub const TRUNCATION_MARKER: &str = "#truncated";

#[derive(Clone, Debug)]
pub struct CmParams {
    pub family: CmFamily,
    pub n: usize,
    pub t_end: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub tau: C,
    pub omega1: f64,
    pub seed: u64,
    /// Keep every `sample_every`-th step.
    pub sample_every: usize,
}

impl CmParams {
    pub fn new(family: CmFamily, n: usize) -> Self {
        CmParams {
            family,
            n,
            t_end: 10.0,
            dt: 1e-3,
            scheme: Scheme::Rk4,
            tau: C::new(0.0, 1.0),
            omega1: 2.0,
            seed: 0,
            sample_every: 100,
        }
    }
}

/// Powers `p` of the traced invariants written to the CSV.
pub fn invariant_powers(family: CmFamily) -> Vec<u32> {
    match family {
        CmFamily::A => vec![2, 3, 4],
        _ => vec![2, 4],
    }
}

/// Per-sample diagnostics.
#[derive(Clone, Debug)]
pub struct Sample {
    pub h: C,
    /// `tr L(z_j)^p` for each invariant power, then each `z_j`; `None` if `L` is singular there.
    pub invariants: Vec<Option<C>>,
    pub eigenvalues: Vec<Option<Vec<C>>>,
}

#[derive(Clone, Debug)]
pub struct CmRun {
    pub params: CmParams,
    pub system: CMSystem,
    pub initial: CMState,
    pub trajectory: Trajectory,
    pub samples: Vec<Sample>,
    pub report: Report,
}

impl CmRun {
    pub fn aborted(&self) -> bool {
        self.trajectory.abort.is_some()
    }
}

fn z_points(sys: &CMSystem) -> Vec<C> {
    Z_SAMPLES.iter().map(|&(a, b)| sys.lattice.omega1() * a + sys.lattice.omega2() * b).collect()
}

fn sample(sys: &CMSystem, s: &CMState, zs: &[C], powers: &[u32]) -> Result<Sample, LaxkitError> {
    let pmax = powers.iter().copied().max().unwrap_or(1);
    let mut invariants = Vec::new();
    let traces: Vec<Option<Vec<C>>> = zs.iter().map(|&z| sys.spectral_invariants(s, z, pmax).ok()).collect();
    for &p in powers {
        for t in &traces {
            invariants.push(t.as_ref().map(|t| t[p as usize - 1]));
        }
    }
    let eigenvalues = zs.iter().map(|&z| sys.eigenvalues(s, z).ok()).collect();
    Ok(Sample { h: sys.hamiltonian(s)?, invariants, eigenvalues })
}

/// FD brackets `{H_{p,1}, H_{p',1}}` at `s` for `p < p'`.
pub fn bracket_table(sys: &CMSystem, s: &CMState, powers: &[u32]) -> Vec<Value> {
    let mut out = Vec::new();
    for (i, &a) in powers.iter().enumerate() {
        for &b in &powers[i + 1..] {
            let r = sys.poisson_bracket(
                HamSpec::Residue { p: a, m: 1 },
                HamSpec::Residue { p: b, m: 1 },
                s,
                GradientMethod::CentralDifference,
            );
            out.push(match r {
                Ok(v) => json!({"a": format!("H_{a},1"), "b": format!("H_{b},1"), "value": complex_json(v), "abs": v.norm()}),
                Err(e) => json!({"a": format!("H_{a},1"), "b": format!("H_{b},1"), "error": e.to_string()}),
            });
        }
    }
    out
}

/// Physical system on the requested lattice with seeded near-equilibrium data.
pub fn prepare(p: &CmParams) -> Result<(CMSystem, CMState), LaxkitError> {
    if p.n == 0 {
        return Err(LaxkitError::Usage("n must be positive".into()));
    }
    if !(p.dt > 0.0) || !(p.t_end >= 0.0) {
        return Err(LaxkitError::Usage("need dt > 0 and T >= 0".into()));
    }
    let lattice = simulation_lattice(p.omega1, p.tau)?;
    let sys = CMSystem::physical_on(p.family, p.n, lattice)?;
    let s0 = sys.sample_state(&mut case_rng(p.seed, 0), 0.03, 0.5)?;
    Ok((sys, s0))
}

pub fn simulate(p: &CmParams) -> Result<CmRun, LaxkitError> {
    let (sys, s0) = prepare(p)?;
    let traj = sys.integrate(&s0, p.t_end, p.dt, p.scheme, p.sample_every)?;
    let zs = z_points(&sys);
    let powers = invariant_powers(p.family);
    let samples: Vec<Sample> =
        traj.states.par_iter().map(|s| sample(&sys, s, &zs, &powers)).collect::<Result<_, _>>()?;

    let h0 = samples[0].h;
    let h_drift = samples.iter().map(|x| (x.h - h0).norm() / h0.norm().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    let mut spec_drift = 0.0f64;
    let mut singular = 0;
    for x in &samples {
        for (e0, e) in samples[0].eigenvalues.iter().zip(&x.eigenvalues) {
            match (e0, e) {
                (Some(a), Some(b)) => spec_drift = spec_drift.max(multiset_distance(a, b)),
                _ => singular += 1,
            }
        }
    }
    if singular > 0 {
        spec_drift = f64::NAN;
    }

    let mut checks = vec![
        Check::below("relative H drift", h_drift, H_DRIFT_TOL, samples.len()),
        Check::below("eigenvalue multiset drift of L(z0)", spec_drift, SPEC_DRIFT_TOL, samples.len() * zs.len()),
    ];
    if let Some(e) = &traj.abort {
        checks.push(Check::new("trajectory completed", false, 1).with_detail(json!(e.to_string())));
    }
    let mut report = Report::new("cm", p.seed, Vec::new())
        .with("family", json!(p.family.to_string()))
        .with("n", json!(p.n))
        .with("dt", json!(p.dt))
        .with("T", json!(p.t_end))
        .with("scheme", json!(if p.scheme == Scheme::Rk4 { "rk4" } else { "leapfrog" }))
        .with("tau", complex_json(p.tau))
        .with("omega1", json!(p.omega1))
        .with("z0", Value::Array(zs.iter().map(|&z| complex_json(z)).collect()))
        .with("initial_state", json!({"q": s0.q.iter().map(|x| x.re).collect::<Vec<_>>(), "p": s0.p.iter().map(|x| x.re).collect::<Vec<_>>()}))
        .with("samples", json!(samples.len()))
        .with("max_H_drift", json!(h_drift))
        .with("max_spec_drift", json!(spec_drift))
        .with("bracket_table", Value::Array(bracket_table(&sys, &s0, &powers)))
        .with("truncated", json!(traj.abort.is_some()))
        .with("abort", json!(traj.abort.as_ref().map(|e| e.to_string())));
    if p.family == CmFamily::B {
        let (frozen, line) = q0_line(&sys, &s0)?;
        checks.push(Check::new("q0 frozen", frozen, 1));
        report = report.with("q0", line);
    }
    report.passed = checks.iter().all(|c| c.passed);
    report.checks = checks;
    Ok(CmRun { params: p.clone(), system: sys, initial: s0, trajectory: traj, samples, report })
}

/// `q_0` is a parameter of the `B_n` system: moving it leaves `H` and the flow unchanged.
fn q0_line(sys: &CMSystem, s: &CMState) -> Result<(bool, Value), LaxkitError> {
    let mut moved = sys.clone();
    moved.q0 = sys.q0 * 0.5 + sys.lattice.omega2() * 0.2;
    let same_h = sys.hamiltonian(s)? == moved.hamiltonian(s)?;
    let same_flow = sys.equations_of_motion(s)? == moved.equations_of_motion(s)?;
    let frozen = same_h && same_flow;
    Ok((
        frozen,
        json!({
            "value": complex_json(sys.q0),
            "frozen": frozen,
            "note": "q0 is not a phase-space coordinate: H and the flow on (q_1..q_n, p_1..p_n) do not depend on it",
        }),
    ))
}

/// CSV header: `t, q_i, p_i, H`, then `inv_p{p}_z{j}` with its imaginary part in `inv_p{p}_z{j}_im`.
pub fn csv_header(run: &CmRun) -> Vec<String> {
    let n = run.params.n;
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("q_{i}")));
    h.extend((1..=n).map(|i| format!("p_{i}")));
    h.push("H".into());
    for p in invariant_powers(run.params.family) {
        for j in 1..=Z_SAMPLES.len() {
            h.push(format!("inv_p{p}_z{j}"));
            h.push(format!("inv_p{p}_z{j}_im"));
        }
    }
    h
}

/// Writes the trajectory; an aborted run ends with a truncation marker row.
pub fn write_csv<W: Write>(run: &CmRun, out: W) -> Result<(), LaxkitError> {
    let mut w = csv::Writer::from_writer(out);
    let header = csv_header(run);
    w.write_record(&header)?;
    for ((t, s), x) in run.trajectory.times.iter().zip(&run.trajectory.states).zip(&run.samples) {
        let mut row = vec![t.to_string()];
        row.extend(s.q.iter().map(|v| v.re.to_string()));
        row.extend(s.p.iter().map(|v| v.re.to_string()));
        row.push(x.h.re.to_string());
        for v in &x.invariants {
            let v = v.unwrap_or(C::new(f64::NAN, f64::NAN));
            row.push(v.re.to_string());
            row.push(v.im.to_string());
        }
        w.write_record(&row)?;
    }
    if let Some(e) = &run.trajectory.abort {
        let mut row = vec![String::new(); header.len()];
        row[0] = TRUNCATION_MARKER.into();
        row[1] = e.to_string();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Drift checks for every family at `n ∈ {2, 3}` with default parameters.
pub fn conservation_sweep(seed: u64) -> Vec<(CmFamily, usize, Result<CmRun, LaxkitError>)> {
    let cases: Vec<(CmFamily, usize)> = [CmFamily::A, CmFamily::B, CmFamily::C, CmFamily::D]
        .into_iter()
        .flat_map(|f| [2, 3].map(|n| (f, n)))
        .collect();
    cases
        .into_par_iter()
        .enumerate()
        .map(|(i, (f, n))| {
            let mut p = CmParams::new(f, n);
            p.seed = seed.wrapping_add(i as u64);
            (f, n, simulate(&p))
        })
        .collect()
}
