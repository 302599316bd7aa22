//! Builds instances from their configuration.

use smartcd::problems::{
    degenerate_lp, parse_libsvm, svm_dual, synthetic_separable, synthetic_tv, GridDims, SyntheticTv,
};
use smartcd::ProblemSpec;

use crate::config::ProblemConfig;
use crate::error::CliError;

fn bad(key: &str, msg: String) -> CliError {
    CliError::Config(format!("problem.{key}: {msg}"))
}

fn grid_dims(grid: &[usize]) -> Result<GridDims, CliError> {
    if grid.contains(&0) {
        return Err(bad("grid", format!("extents must be positive, got {grid:?}")));
    }
    match *grid {
        [a] => Ok(GridDims::D1(a)),
        [a, b] => Ok(GridDims::D2(a, b)),
        [a, b, c] => Ok(GridDims::D3(a, b, c)),
        _ => Err(bad("grid", format!("needs 1 to 3 extents, got {}", grid.len()))),
    }
}

fn svm_lambda(lambda: Option<f64>, examples: usize) -> Result<f64, CliError> {
    let lambda = lambda.unwrap_or(1.0 / examples as f64);
    if lambda > 0.0 && lambda.is_finite() {
        Ok(lambda)
    } else {
        Err(bad("lambda", format!("must be positive, got {lambda}")))
    }
}

fn lib(key: &'static str) -> impl Fn(smartcd::SmartcdError) -> CliError {
    move |e| bad(key, e.to_string())
}

fn check_cap(cap: f64) -> Result<(), CliError> {
    if cap > 0.0 && cap.is_finite() {
        Ok(())
    } else {
        Err(bad("cap", format!("must be positive, got {cap}")))
    }
}

pub fn build(config: &ProblemConfig) -> Result<ProblemSpec, CliError> {
    match config {
        ProblemConfig::Lp { p, d } => {
            if *p < 2 {
                return Err(bad("p", format!("must be at least 2, got {p}")));
            }
            if *d < 1 {
                return Err(bad("d", format!("must be at least 1, got {d}")));
            }
            degenerate_lp(*p, *d).map_err(lib("p"))
        }
        ProblemConfig::Tv {
            grid,
            observations,
            lambda,
            r,
            noise,
            pieces,
            seed,
        } => {
            if *observations == 0 {
                return Err(bad("observations", "must be at least 1".into()));
            }
            if !(*lambda >= 0.0) || !lambda.is_finite() {
                return Err(bad("lambda", format!("must be nonnegative, got {lambda}")));
            }
            if !(0.0..=1.0).contains(r) {
                return Err(bad("r", format!("must lie in [0, 1], got {r}")));
            }
            if !(*noise >= 0.0) {
                return Err(bad("noise", format!("must be nonnegative, got {noise}")));
            }
            if *pieces == 0 {
                return Err(bad("pieces", "must be at least 1".into()));
            }
            let cfg = SyntheticTv {
                dims: grid_dims(grid)?,
                observations: *observations,
                lambda: *lambda,
                r: *r,
                noise: *noise,
                pieces: *pieces,
                seed: *seed,
            };
            synthetic_tv(&cfg).map(|(spec, _)| spec).map_err(lib("grid"))
        }
        ProblemConfig::Svm {
            examples,
            features,
            margin,
            cap,
            lambda,
            seed,
        } => {
            if *examples < 2 {
                return Err(bad("examples", format!("must be at least 2, got {examples}")));
            }
            if *features == 0 {
                return Err(bad("features", "must be at least 1".into()));
            }
            if !(*margin >= 0.0) || *margin >= 1.0 {
                return Err(bad("margin", format!("must lie in [0, 1), got {margin}")));
            }
            check_cap(*cap)?;
            let lambda = svm_lambda(*lambda, *examples)?;
            let data = synthetic_separable(*examples, *features, *margin, *seed).map_err(lib("examples"))?;
            svm_dual(data.features, data.labels, vec![*cap; *examples], lambda).map_err(lib("examples"))
        }
        ProblemConfig::SvmFile { path, cap, lambda } => {
            check_cap(*cap)?;
            let data = parse_libsvm(path).map_err(|e| bad("path", format!("{}: {e}", path.display())))?;
            let m = data.labels.len();
            let lambda = svm_lambda(*lambda, m)?;
            svm_dual(data.features, data.labels, vec![*cap; m], lambda).map_err(lib("path"))
        }
    }
}
