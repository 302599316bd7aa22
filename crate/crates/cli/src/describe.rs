//! `describe`: instance dimensions and the constants fixed at start-up.

use std::fmt::Write;

use smartcd::solver::Smartcd;
use smartcd::SolverConfig;

use crate::config::{ProblemConfig, SolverSection};
use crate::error::CliError;
use crate::problem;

/// Parses `key=value` words into a problem and the solver keys `beta1`,
/// `alpha`. Values are read as TOML literals, falling back to strings.
pub fn parse_params(name: &str, params: &[String]) -> Result<(ProblemConfig, SolverSection), CliError> {
    let mut table = toml::Table::new();
    table.insert("name".into(), toml::Value::String(name.into()));
    let mut solver = SolverSection::default();
    for word in params {
        let Some((key, raw)) = word.split_once('=') else {
            return Err(CliError::Config(format!("{word}: expected key=value")));
        };
        let key = key.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        match key {
            "beta1" | "alpha" => {
                let v = value
                    .as_float()
                    .or_else(|| value.as_integer().map(|i| i as f64))
                    .ok_or_else(|| CliError::Config(format!("{key}: expected a number, got {raw}")))?;
                if key == "beta1" {
                    solver.beta1 = v;
                } else {
                    solver.alpha = v;
                }
            }
            "name" => return Err(CliError::Config("name: give the problem as the first argument".into())),
            _ => {
                table.insert(key.to_string(), value);
            }
        }
    }
    let problem = toml::Value::Table(table)
        .try_into::<ProblemConfig>()
        .map_err(|e| CliError::Config(format!("problem: {}", e.message())))?;
    Ok((problem, solver))
}

pub fn describe(problem_config: &ProblemConfig, solver: &SolverSection) -> Result<String, CliError> {
    let spec = problem::build(problem_config)?;
    let lipschitz = spec.h.is_lipschitz();
    let config: SolverConfig = solver.to_solver_config(spec.blocks(), lipschitz, false)?;
    let smartcd = Smartcd::new(&spec, config.clone()).map_err(|e| CliError::from_solver("describe", e))?;

    let mut out = String::new();
    let h = if lipschitz { "l1 (lipschitz regime)" } else { "equality (constrained regime)" };
    writeln!(
        out,
        "{}: n={} p={} m={}",
        problem_config.name(),
        spec.blocks(),
        spec.dim(),
        spec.dual_dim()
    )
    .unwrap();
    writeln!(out, "h: {h}").unwrap();
    if let Some(fstar) = spec.known_fstar() {
        writeln!(out, "known F*: {fstar}").unwrap();
    }
    writeln!(out, "beta1={} alpha={} tau0={:.16e}", config.beta1, config.alpha, smartcd.tau0()).unwrap();
    writeln!(out, "block,size,B0,q").unwrap();
    let q = smartcd.sampler().probabilities();
    for (i, b) in smartcd.initial_constants().iter().enumerate() {
        writeln!(out, "{i},{},{b:.16e},{:.16e}", spec.partition().size(i), q[i]).unwrap();
    }
    Ok(out)
}
