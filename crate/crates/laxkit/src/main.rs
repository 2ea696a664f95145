use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use laxkit::cm::{self, CmParams};
use laxkit::config::{required, resolve_seed, FileConfig};
use laxkit::report::Report;
use laxkit::{exit_code_for, grading, involution, parse_complex, parse_powers, suites, LaxkitError};
use laxkit_core::calogero::{CmFamily, Scheme};
use laxkit_core::liealg::Family;

/// Lax operator algebras: verification suites and Calogero–Moser simulations.
#[derive(Parser, Debug)]
#[command(name = "laxkit", version, about)]
struct Cli {
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Depth, graded dimensions and the mist residual of a simple-root grading.
    Grading {
        /// A (gl), SL, B, C, D or G2.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        rank: Option<usize>,
        /// 1-based simple root index.
        #[arg(long)]
        root: Option<usize>,
        /// Use the dual grading (h → −h).
        #[arg(long)]
        dual: bool,
        /// Print a JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run a property suite and print its JSON report.
    Verify {
        /// closure, cocycle, dims, mops or tyurin.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a Calogero–Moser system and write its trajectory.
    Cm {
        /// A, B, C or D.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        /// Total time.
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// rk4 or leapfrog.
        #[arg(long)]
        scheme: Option<String>,
        /// Lattice modulus as `re,im` (default `0,1`).
        #[arg(long)]
        tau: Option<String>,
        /// Real half-period (default 2).
        #[arg(long)]
        omega1: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Keep every k-th step in the CSV (default 100).
        #[arg(long)]
        sample_every: Option<usize>,
        /// Trajectory CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Conservation report (JSON); printed to stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Pairwise Poisson brackets of the Hamiltonians H_{p,1} at a random state.
    Involution {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        /// `2,3,4` or `2..4`.
        #[arg(long)]
        powers: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Resampling attempts when a state is inadmissible.
        #[arg(long)]
        retries: Option<usize>,
    },
}

fn usage<E: std::fmt::Display>(e: E) -> LaxkitError {
    LaxkitError::Usage(e.to_string())
}

fn emit(report: &Report, out: Option<&PathBuf>) -> Result<(), LaxkitError> {
    match out {
        Some(p) => std::fs::write(p, report.to_json() + "\n")?,
        None => println!("{}", report.to_json()),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, LaxkitError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Grading { family, rank, root, dual, json } => {
            let family: Family = required(family, file.family.clone(), "family")?.parse().map_err(usage)?;
            let rank = required(rank, file.rank, "rank")?;
            let root = required(root, file.root, "root")?;
            let g = grading::summarize(family, rank, root, dual || file.dual.unwrap_or(false))?;
            if json {
                println!("{}", g.report(resolve_seed(None, file.seed)?).to_json());
            } else {
                print!("{}", g.text());
            }
            Ok(0)
        }
        Command::Verify { suite, seed, out } => {
            let suite = required(suite, file.suite.clone(), "suite")?;
            let seed = resolve_seed(seed, file.seed)?;
            let report = suites::run(&suite, seed)?;
            emit(&report, out.as_ref())?;
            for c in report.failed_checks() {
                eprintln!("FAIL {}", c.name);
            }
            Ok(exit_code_for(report.passed))
        }
        Command::Cm { family, n, t, dt, scheme, tau, omega1, seed, sample_every, out, report } => {
            let family: CmFamily = required(family, file.family.clone(), "family")?.parse().map_err(usage)?;
            let mut p = CmParams::new(family, required(n, file.n, "n")?);
            p.t_end = t.or(file.t).unwrap_or(p.t_end);
            p.dt = dt.or(file.dt).unwrap_or(p.dt);
            if let Some(s) = scheme.or(file.scheme.clone()) {
                p.scheme = s.parse::<Scheme>().map_err(usage)?;
            }
            if let Some(t) = tau {
                p.tau = parse_complex(&t)?;
            } else if let Some([re, im]) = file.tau {
                p.tau = laxkit_core::elliptic::C::new(re, im);
            }
            p.omega1 = omega1.or(file.omega1).unwrap_or(p.omega1);
            p.sample_every = sample_every.or(file.sample_every).unwrap_or(p.sample_every).max(1);
            p.seed = resolve_seed(seed, file.seed)?;
            let out = required(out, file.out.clone(), "out")?;
            let report_path = report.or(file.report.clone());
            let run = cm::simulate(&p)?;
            cm::write_csv(&run, BufWriter::new(File::create(&out)?))?;
            emit(&run.report, report_path.as_ref())?;
            if let Some(e) = &run.trajectory.abort {
                eprintln!("aborted at t = {}: {e}", run.trajectory.times.last().copied().unwrap_or(0.0));
                return Ok(3);
            }
            Ok(exit_code_for(run.report.passed))
        }
        Command::Involution { family, n, powers, seed, retries } => {
            let family: CmFamily = required(family, file.family.clone(), "family")?.parse().map_err(usage)?;
            let n = required(n, file.n, "n")?;
            let powers = match powers {
                Some(s) => parse_powers(&s)?,
                None => required(None, file.powers.clone(), "powers")?,
            };
            let seed = resolve_seed(seed, file.seed)?;
            let retries = retries.or(file.retries).unwrap_or(involution::DEFAULT_RETRIES);
            let result = involution::run(family, n, &powers, seed, retries)?;
            let report = involution::report(family, n, &powers, seed, &result);
            emit(&report, None)?;
            Ok(exit_code_for(report.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("laxkit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
