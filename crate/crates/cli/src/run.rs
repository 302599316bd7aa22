//! `run`: executes every configured run and writes traces plus a summary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use smartcd::oracle::long_run_reference;
use smartcd::problems::{KnownOptimum, Provenance};
use smartcd::{ProblemSpec, RunOutput, SolverConfig};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::problem;

/// Command-line overrides of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Final state of one run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub name: String,
    pub config: SolverConfig,
    pub iterations: usize,
    pub restarts: usize,
    pub objective: f64,
    pub suboptimality: Option<f64>,
    pub feasibility: Option<f64>,
    pub duality_gap: Option<f64>,
    pub wall_ms: f64,
    pub trace_path: PathBuf,
}

pub const SUMMARY_HEADER: &str = "name,seed,alpha,beta1,restart_period,iterations,restarts,F,subopt,feas,gap,wall_ms";

fn scalar(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(scalar).unwrap_or_default()
}

impl RunSummary {
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.name,
            self.config.seed,
            scalar(self.config.alpha),
            scalar(self.config.beta1),
            self.config.restart_period.map(|p| p.to_string()).unwrap_or_default(),
            self.iterations,
            self.restarts,
            scalar(self.objective),
            optional(self.suboptimality),
            optional(self.feasibility),
            optional(self.duality_gap),
            scalar(self.wall_ms),
        )
    }
}

/// Attaches a long-run reference value when the instance has no known optimum.
fn attach_reference(problem: &mut ProblemSpec, iterations: Option<usize>) -> Result<(), CliError> {
    let Some(iterations) = iterations else {
        return Ok(());
    };
    if problem.known_optimum.is_some() {
        return Ok(());
    }
    if iterations == 0 {
        return Err(CliError::Config("output.reference_iterations: must be at least 1".into()));
    }
    let reference =
        long_run_reference(problem, iterations).map_err(|e| CliError::from_solver("reference solve", e))?;
    problem.known_optimum = Some(KnownOptimum {
        value: reference.fref,
        point: Some(reference.xref),
        provenance: Provenance::Oracle {
            iterations,
            accuracy: reference.accuracy,
        },
    });
    Ok(())
}

fn write_trace(path: &Path, output: &RunOutput) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::Failed(format!("cannot create {}: {e}", path.display())))?;
    let mut writer = std::io::BufWriter::new(file);
    output
        .trace
        .write_csv(&mut writer)
        .and_then(|_| writer.flush().map_err(Into::into))
        .map_err(|e| CliError::Failed(format!("cannot write {}: {e}", path.display())))
}

fn execute(problem: &ProblemSpec, name: &str, config: SolverConfig, dir: &Path) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let output = smartcd::run(problem, config.clone()).map_err(|e| CliError::from_solver(&format!("run {name}"), e))?;
    let wall_ms = if config.record_wall_time {
        started.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    let trace_path = dir.join(format!("{name}.csv"));
    write_trace(&trace_path, &output)?;
    let last = output.trace.last().expect("a run always records k = 0");
    Ok(RunSummary {
        name: name.to_string(),
        config,
        iterations: output.iterations,
        restarts: output.restarts,
        objective: last.objective,
        suboptimality: last.suboptimality,
        feasibility: last.feasibility,
        duality_gap: last.duality_gap,
        wall_ms,
        trace_path,
    })
}

/// Runs everything in `config`, in parallel across runs.
pub fn run(config: &RunConfig, overrides: &Overrides) -> Result<Vec<RunSummary>, CliError> {
    let mut problem = problem::build(&config.problem)?;
    let lipschitz = problem.h.is_lipschitz();
    let blocks = problem.blocks();
    let record_wall_time = config.output.record_wall_time;

    let mut runs = Vec::new();
    for (name, mut section) in config.resolved_runs()? {
        if let Some(seed) = overrides.seed {
            section.seed = seed;
        }
        runs.push((name, section.to_solver_config(blocks, lipschitz, record_wall_time)?));
    }
    attach_reference(&mut problem, config.output.reference_iterations)?;

    let dir = overrides.out.clone().unwrap_or_else(|| config.output.dir.clone());
    fs::create_dir_all(&dir).map_err(|e| CliError::Failed(format!("cannot create {}: {e}", dir.display())))?;

    let summaries = runs
        .into_par_iter()
        .map(|(name, solver)| execute(&problem, &name, solver, &dir))
        .collect::<Result<Vec<_>, _>>()?;

    let mut text = format!("{SUMMARY_HEADER}\n");
    for s in &summaries {
        text.push_str(&s.csv_row());
        text.push('\n');
    }
    let path = dir.join("summary.csv");
    fs::write(&path, text).map_err(|e| CliError::Failed(format!("cannot write {}: {e}", path.display())))?;
    Ok(summaries)
}
