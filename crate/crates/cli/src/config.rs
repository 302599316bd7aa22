//! TOML run configuration.
//!
//! ```toml
//! [problem]
//! name = "lp"
//! p = 10
//! d = 200
//!
//! [solver]
//! max_iterations = 100000
//! alpha = 1.0
//!
//! [output]
//! dir = "out/lp"
//!
//! [[runs]]
//! name = "uniform"
//! alpha = 0.0
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use smartcd::{Regime, SolverConfig, Variant};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub runs: Vec<RunOverride>,
}

/// Instance family and its parameters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Degenerate LP with `p` variables and `d` repeated constraints.
    Lp {
        #[serde(default = "default_lp_p")]
        p: usize,
        #[serde(default = "default_lp_d")]
        d: usize,
    },
    /// Synthetic TV-ℓ1 regression on a 1-3 dimensional grid.
    Tv {
        #[serde(default = "default_tv_grid")]
        grid: Vec<usize>,
        #[serde(default = "default_tv_observations")]
        observations: usize,
        #[serde(default = "default_tv_lambda")]
        lambda: f64,
        #[serde(default = "default_tv_r")]
        r: f64,
        #[serde(default = "default_tv_noise")]
        noise: f64,
        #[serde(default = "default_tv_pieces")]
        pieces: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Dual SVM with bias on synthetic separable data.
    Svm {
        #[serde(default = "default_svm_examples")]
        examples: usize,
        #[serde(default = "default_svm_features")]
        features: usize,
        #[serde(default = "default_svm_margin")]
        margin: f64,
        #[serde(default = "default_cap")]
        cap: f64,
        /// Defaults to `1/examples`.
        lambda: Option<f64>,
        #[serde(default)]
        seed: u64,
    },
    /// Dual SVM with bias on a libsvm-format file.
    SvmFile {
        path: PathBuf,
        #[serde(default = "default_cap")]
        cap: f64,
        /// Defaults to `1/examples`.
        lambda: Option<f64>,
    },
}

fn default_lp_p() -> usize {
    10
}
fn default_lp_d() -> usize {
    200
}
fn default_tv_grid() -> Vec<usize> {
    vec![200]
}
fn default_tv_observations() -> usize {
    100
}
fn default_tv_lambda() -> f64 {
    0.01
}
fn default_tv_r() -> f64 {
    0.5
}
fn default_tv_noise() -> f64 {
    0.05
}
fn default_tv_pieces() -> usize {
    6
}
fn default_svm_examples() -> usize {
    200
}
fn default_svm_features() -> usize {
    20
}
fn default_svm_margin() -> f64 {
    0.1
}
fn default_cap() -> f64 {
    1.0
}

impl ProblemConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Lp { .. } => "lp",
            Self::Tv { .. } => "tv",
            Self::Svm { .. } => "svm",
            Self::SvmFile { .. } => "svm-file",
        }
    }

    /// Resolves relative file paths against `base`.
    pub fn rebase(&mut self, base: &Path) {
        if let Self::SvmFile { path, .. } = self {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantName {
    Reference,
    Efficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeName {
    Lipschitz,
    Constrained,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_variant")]
    pub variant: VariantName,
    /// Defaults to the regime matching the problem's `h`.
    pub regime: Option<RegimeName>,
    #[serde(default)]
    pub g_zero_mode: bool,
    /// Iteration budget; exclusive with `epochs`.
    pub max_iterations: Option<usize>,
    /// Budget in passes over the blocks; exclusive with `max_iterations`.
    pub epochs: Option<usize>,
    pub restart_period: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to one record per epoch.
    pub checkpoint_every: Option<usize>,
}

fn default_beta1() -> f64 {
    1.0
}
fn default_variant() -> VariantName {
    VariantName::Efficient
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            beta1: default_beta1(),
            alpha: 0.0,
            variant: default_variant(),
            regime: None,
            g_zero_mode: false,
            max_iterations: None,
            epochs: None,
            restart_period: None,
            seed: 0,
            checkpoint_every: None,
        }
    }
}

/// Epoch budget when neither `max_iterations` nor `epochs` is given.
pub const DEFAULT_EPOCHS: usize = 100;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// When false, `wall_ms` is written as zero so traces are reproducible.
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
    /// Iterations of the deterministic reference used for `subopt` when the
    /// problem has no known optimal value.
    pub reference_iterations: Option<usize>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            record_wall_time: true,
            reference_iterations: None,
        }
    }
}

/// Per-run changes to the `[solver]` section.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOverride {
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub beta1: Option<f64>,
    pub variant: Option<VariantName>,
    pub restart_period: Option<usize>,
    /// Disables restarts inherited from `[solver]`.
    #[serde(default)]
    pub no_restart: bool,
    pub max_iterations: Option<usize>,
    pub epochs: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        config.problem.rebase(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    /// Named runs: the `[[runs]]` list applied over `[solver]`, or a single
    /// run named `run`.
    pub fn resolved_runs(&self) -> Result<Vec<(String, SolverSection)>, CliError> {
        if self.runs.is_empty() {
            return Ok(vec![("run".to_string(), self.solver.clone())]);
        }
        let mut out: Vec<(String, SolverSection)> = Vec::with_capacity(self.runs.len());
        for (index, run) in self.runs.iter().enumerate() {
            let name = run.name.clone().unwrap_or_else(|| format!("run-{index}"));
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(CliError::Config(format!("runs[{index}].name: {name:?} is not a valid file stem")));
            }
            if out.iter().any(|(n, _)| *n == name) {
                return Err(CliError::Config(format!("runs[{index}].name: duplicate run name {name:?}")));
            }
            let mut s = self.solver.clone();
            if let Some(v) = run.seed {
                s.seed = v;
            }
            if let Some(v) = run.alpha {
                s.alpha = v;
            }
            if let Some(v) = run.beta1 {
                s.beta1 = v;
            }
            if let Some(v) = run.variant {
                s.variant = v;
            }
            if run.no_restart {
                if run.restart_period.is_some() {
                    return Err(CliError::Config(format!(
                        "runs[{index}].no_restart: conflicts with runs[{index}].restart_period"
                    )));
                }
                s.restart_period = None;
            } else if run.restart_period.is_some() {
                s.restart_period = run.restart_period;
            }
            if run.max_iterations.is_some() || run.epochs.is_some() {
                s.max_iterations = run.max_iterations;
                s.epochs = run.epochs;
            }
            out.push((name, s));
        }
        Ok(out)
    }
}

impl SolverSection {
    /// Library configuration for a problem with `blocks` blocks whose `h` is
    /// Lipschitz or not. Errors name the offending key.
    pub fn to_solver_config(
        &self,
        blocks: usize,
        lipschitz_h: bool,
        record_wall_time: bool,
    ) -> Result<SolverConfig, CliError> {
        let bad = |key: &str, msg: String| Err(CliError::Config(format!("solver.{key}: {msg}")));
        if !(self.beta1 > 0.0) || !self.beta1.is_finite() {
            return bad("beta1", format!("must be positive and finite, got {}", self.beta1));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha", format!("must lie in [0, 1], got {}", self.alpha));
        }
        if self.restart_period == Some(0) {
            return bad("restart_period", "must be at least 1".into());
        }
        if self.checkpoint_every == Some(0) {
            return bad("checkpoint_every", "must be at least 1".into());
        }
        let max_iterations = match (self.max_iterations, self.epochs) {
            (Some(_), Some(_)) => return bad("epochs", "give either max_iterations or epochs, not both".into()),
            (Some(0), None) => return bad("max_iterations", "must be at least 1".into()),
            (None, Some(0)) => return bad("epochs", "must be at least 1".into()),
            (Some(k), None) => k,
            (None, Some(e)) => e * blocks,
            (None, None) => DEFAULT_EPOCHS * blocks,
        };
        let regime = match (self.regime, lipschitz_h) {
            (None, true) | (Some(RegimeName::Lipschitz), true) => Regime::Lipschitz,
            (None, false) | (Some(RegimeName::Constrained), false) => Regime::Constrained,
            (Some(RegimeName::Lipschitz), false) => {
                return bad(
                    "regime",
                    "the lipschitz regime needs a Lipschitz h; this problem has an equality constraint, use \"constrained\"".into(),
                )
            }
            (Some(RegimeName::Constrained), true) => {
                return bad(
                    "regime",
                    "the constrained regime needs an equality-constrained h; this problem's h is Lipschitz, use \"lipschitz\"".into(),
                )
            }
        };
        let variant = match self.variant {
            VariantName::Reference => Variant::Reference,
            VariantName::Efficient => Variant::Efficient,
        };
        if blocks == 1 && variant == Variant::Efficient {
            return bad("variant", "a single block needs variant = \"reference\"".into());
        }
        if self.restart_period.is_some() && variant != Variant::Efficient {
            return bad("restart_period", "restarts need variant = \"efficient\"".into());
        }
        if self.g_zero_mode && variant != Variant::Reference {
            return bad("g_zero_mode", "needs variant = \"reference\"".into());
        }
        Ok(SolverConfig {
            beta1: self.beta1,
            alpha: self.alpha,
            variant,
            regime,
            g_zero_mode: self.g_zero_mode,
            max_iterations,
            restart_period: self.restart_period,
            seed: self.seed,
            checkpoint_every: self.checkpoint_every,
            record_wall_time,
        })
    }
}
