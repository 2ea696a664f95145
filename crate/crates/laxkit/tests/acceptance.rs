//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.

use std::time::{Duration, Instant};

use laxkit::report::Check;
use laxkit::{cm, involution, suites};
use laxkit_core::calogero::CmFamily;

const SEED: u64 = 7;

fn summary(checks: &[Check]) -> String {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| match c.measured {
            Some(m) => format!("{} = {m:.3e}", c.name),
            None => c.name.clone(),
        })
        .collect();
    if failed.is_empty() {
        let worst = checks
            .iter()
            .filter_map(|c| Some(c.measured? / c.tolerance?))
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
        match worst {
            Some(w) => format!("{} checks, worst at {:.1e} of tolerance", checks.len(), w),
            None => format!("{} checks", checks.len()),
        }
    } else {
        format!("failing: {}", failed.join("; "))
    }
}

fn verdict(id: u32, title: &str, checks: &[Check], elapsed: Duration, budget: Option<Duration>) {
    let in_time = !matches!(budget, Some(b) if elapsed > b);
    let ok = !checks.is_empty() && checks.iter().all(|c| c.passed) && in_time;
    let budget = budget.map_or(String::new(), |b| format!(" / {}s", b.as_secs()));
    println!(
        "criterion {id:>2} {title}: {} ({:.1}s{budget}) {}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        summary(checks)
    );
    assert!(in_time, "criterion {id} over budget");
    assert!(ok, "criterion {id} failed");
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

#[test]
fn criterion_01_closure() {
    let (checks, t) = timed(|| suites::closure(SEED));
    assert!(checks.iter().all(|c| c.count >= suites::CLOSURE_PAIRS));
    verdict(1, "Lax closure", &checks, t, Some(Duration::from_secs(30)));
}

#[test]
fn criterion_02_dimensions() {
    let (checks, t) = timed(|| suites::dims(SEED));
    verdict(2, "slice dimensions", &checks, t, Some(Duration::from_secs(60)));
}

#[test]
fn criterion_03_cocycle() {
    let (checks, t) = timed(|| suites::cocycle(SEED));
    verdict(3, "cocycle and locality", &checks, t, Some(Duration::from_secs(60)));
}

#[test]
fn criterion_04_pole_elimination() {
    let (checks, t) = timed(|| suites::pole_elimination(SEED));
    verdict(4, "pole elimination", &checks, t, None);
}

#[test]
fn criterion_05_m_operators() {
    let (checks, t) = timed(|| suites::m_operators(SEED));
    verdict(5, "M-operators for gl(2)", &checks, t, None);
}

#[test]
fn criterion_06_integer_identities() {
    let (checks, t) = timed(suites::integer_identities);
    verdict(6, "integer identities", &checks, t, None);
}

#[test]
fn criterion_07_weierstrass() {
    let (checks, t) = timed(|| suites::weierstrass(SEED, 1000));
    verdict(7, "Weierstrass identities", &checks, t, Some(Duration::from_secs(5)));
}

#[test]
fn criterion_08_conservation() {
    let (runs, t) = timed(|| cm::conservation_sweep(SEED));
    let mut checks = Vec::new();
    for (f, n, run) in runs {
        match run {
            Ok(run) => checks.extend(run.report.checks.into_iter().map(|mut c| {
                c.name = format!("{f}{n} {}", c.name);
                c
            })),
            Err(e) => checks.push(Check::new(format!("{f}{n} run: {e}"), false, 0)),
        }
    }
    verdict(8, "CM conservation", &checks, t, Some(Duration::from_secs(120)));
}

#[test]
fn criterion_09_involution() {
    let cases: [(CmFamily, usize, &[u32]); 4] =
        [(CmFamily::A, 2, &[2, 3, 4]), (CmFamily::A, 3, &[2, 3, 4]), (CmFamily::D, 2, &[2, 4]), (CmFamily::D, 3, &[2, 4])];
    let (checks, t) = timed(|| {
        let mut checks = Vec::new();
        for (f, n, powers) in cases {
            let mut worst = 0.0f64;
            let mut count = 0;
            for seed in SEED..SEED + 5 {
                match involution::run(f, n, powers, seed, involution::DEFAULT_RETRIES) {
                    Ok(run) => {
                        worst = worst.max(run.max_abs);
                        count += run.table.len();
                    }
                    Err(_) => worst = f64::NAN,
                }
            }
            checks.push(Check::below(format!("{f}{n} brackets"), worst, involution::BRACKET_TOL, count));
        }
        checks
    });
    verdict(9, "involution", &checks, t, Some(Duration::from_secs(60)));
}

#[test]
fn criterion_10_residue_hamiltonian() {
    let (checks, t) = timed(|| suites::residue_closed_form(SEED, 5));
    verdict(10, "residue Hamiltonian", &checks, t, None);
}

#[test]
fn criterion_11_particle_residues() {
    let (checks, t) = timed(|| {
        let mut checks = Vec::new();
        for n in [2, 3, 4] {
            match suites::residue_along_trajectory(n, SEED) {
                Ok((sv, sq, count)) => {
                    checks.push(Check::below(format!("A{n} s2/s1"), sv, suites::RESIDUE_TOL, count));
                    checks.push(Check::below(format!("A{n} |R^2|/|R|^2"), sq, suites::RESIDUE_TOL, count));
                }
                Err(e) => checks.push(Check::new(format!("A{n} trajectory: {e}"), false, 0)),
            }
        }
        checks
    });
    verdict(11, "rank-one residues along A trajectories", &checks, t, None);
}
