//! Batch front end for the smartcd solver.
//!
//! Exit codes: 0 on success, 1 on configuration errors or failed checks,
//! 2 when a run diverges.

mod check;
mod config;
mod describe;
mod error;
mod problem;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::run::Overrides;

#[derive(Parser, Debug)]
#[command(name = "smartcd", version, about = "Randomized smoothed coordinate descent benchmarks")]
struct App {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the configuration in a TOML file and write traces and a summary
    Run {
        /// Path to the TOML configuration
        config: PathBuf,
        /// Seed for every run, overriding the file
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, overriding `output.dir`
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite on small instances
    Check,
    /// Print dimensions, block constants, sampling probabilities and tau0
    Describe {
        /// One of lp, tv, svm, svm-file
        problem: String,
        /// Problem parameters and `beta1`, `alpha` as key=value
        params: Vec<String>,
    },
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, seed, out } => {
            let cfg = RunConfig::load(&config)?;
            let summaries = run::run(&cfg, &Overrides { seed, out })?;
            for s in &summaries {
                let metric = |label: &str, v: Option<f64>| v.map(|v| format!(" {label}={v:.3e}")).unwrap_or_default();
                println!(
                    "{}: {} iterations, {} restarts, F={:.10e}{}{}{} -> {}",
                    s.name,
                    s.iterations,
                    s.restarts,
                    s.objective,
                    metric("subopt", s.suboptimality),
                    metric("feas", s.feasibility),
                    metric("gap", s.duality_gap),
                    s.trace_path.display(),
                );
            }
            Ok(())
        }
        Command::Check => {
            let results = check::run_all();
            let mut failed = 0;
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                failed += usize::from(!r.passed);
            }
            if failed == 0 {
                Ok(())
            } else {
                Err(CliError::Failed(format!("{failed} of {} checks failed", results.len())))
            }
        }
        Command::Describe { problem, params } => {
            let (problem, solver) = describe::parse_params(&problem, &params)?;
            let text = describe::describe(&problem, &solver)?;
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let app = match App::try_parse() {
        Ok(app) => app,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; help and version are not.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(app.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("smartcd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
