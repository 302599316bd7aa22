//! Smoothed, accelerated, randomized block-coordinate descent with a
//! homotopy on the smoothness parameter.
//!
//! Two implementations of the same iteration are provided:
//!
//! * [`ReferenceState`] keeps the full vectors `x̄`, `x̃` and forms
//!   `x̂ = (1−τ)x̄ + τx̃` and `Ax̂` every iteration. It is the readable form
//!   and the correctness oracle for the other variant.
//! * [`EfficientState`] keeps `x̂ = c·u + z̃` implicitly, together with the
//!   images `Mu`, `Mz̃`, `Au`, `Az̃`, so one iteration only touches the
//!   nonzeros of the sampled column block.
//!
//! With identical seeds both produce the same iterates up to rounding.

mod efficient;
mod reference;
mod trace;

pub use efficient::EfficientState;
pub use reference::{CombinationWeights, ReferenceState};
pub use trace::{Trace, TraceRecord, CSV_HEADER};

use std::time::Instant;

use crate::error::{Result, SmartcdError};
use crate::functions::ConjugatePart;
use crate::problems::ProblemSpec;
use crate::schedule::{build_sampler, Regime, Sampler, Schedule};
use crate::smoothing::{lipschitz_b, SmoothingContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Full-vector iteration.
    Reference,
    /// Residual-maintaining iteration.
    Efficient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub beta1: f64,
    pub alpha: f64,
    pub variant: Variant,
    pub regime: Regime,
    /// Coordinate gradient steps with `τ_0 = 1` for problems with `g = 0`.
    pub g_zero_mode: bool,
    pub max_iterations: usize,
    /// Iterations between restarts (efficient variant only).
    pub restart_period: Option<usize>,
    pub seed: u64,
    /// Iterations between trace records; `None` records once per epoch.
    pub checkpoint_every: Option<usize>,
    /// When false, `wall_ms` is written as zero so traces are reproducible
    /// byte for byte.
    pub record_wall_time: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta1: 1.0,
            alpha: 0.0,
            variant: Variant::Efficient,
            regime: Regime::Lipschitz,
            g_zero_mode: false,
            max_iterations: 1000,
            restart_period: None,
            seed: 0,
            checkpoint_every: None,
            record_wall_time: true,
        }
    }
}

impl SolverConfig {
    /// The regime matching the kind of `h`.
    pub fn natural_regime(h: &ConjugatePart) -> Regime {
        if h.is_lipschitz() {
            Regime::Lipschitz
        } else {
            Regime::Constrained
        }
    }

    pub fn validate(&self, problem: &ProblemSpec) -> Result<()> {
        let invalid = |msg: String| Err(SmartcdError::InvalidParameter(msg));
        if !(self.beta1 > 0.0) || !self.beta1.is_finite() {
            return invalid(format!("beta1 must be positive, got {}", self.beta1));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return invalid(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if self.restart_period == Some(0) {
            return invalid("restart_period must be at least 1".into());
        }
        if self.checkpoint_every == Some(0) {
            return invalid("checkpoint_every must be at least 1".into());
        }
        if self.restart_period.is_some() && self.variant != Variant::Efficient {
            return invalid("restart requires the efficient variant".into());
        }
        if self.g_zero_mode {
            if !problem.g.is_zero() {
                return invalid("g_zero_mode requires g = 0".into());
            }
            if self.variant != Variant::Reference {
                return invalid("g_zero_mode is only available in the reference variant".into());
            }
        }
        match (self.regime, problem.h.is_lipschitz()) {
            (Regime::Lipschitz, false) => {
                invalid("the lipschitz regime requires a Lipschitz h (bounded dom h*)".into())
            }
            (Regime::Constrained, true) => invalid("the constrained regime requires an equality-indicator h".into()),
            _ => Ok(()),
        }
    }
}

/// Per-run constants: `L̂_i`, `‖A_i‖²`, the sampler and `τ_0`.
#[derive(Debug, Clone)]
pub struct Smartcd<'p> {
    problem: &'p ProblemSpec,
    config: SolverConfig,
    /// `(L̂_i, ‖A_i‖²)` side by side so one lookup serves a step.
    curvature: Vec<(f64, f64)>,
    b0: Vec<f64>,
    sampler: Sampler,
    tau0: f64,
}

impl<'p> Smartcd<'p> {
    pub fn new(problem: &'p ProblemSpec, config: SolverConfig) -> Result<Self> {
        problem.audit()?;
        config.validate(problem)?;
        let norm_sq: Vec<f64> = problem.a.block_norms().iter().map(|n| n * n).collect();
        let lhat = problem.f.lhat();
        let b0 = (0..problem.blocks())
            .map(|i| {
                let b = lipschitz_b(lhat[i], norm_sq[i].sqrt(), config.beta1)?;
                if b > 0.0 {
                    Ok(b)
                } else {
                    Err(SmartcdError::ZeroCurvature { block: i })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let sampler = build_sampler(&b0, config.alpha)?;
        let tau0 = if config.g_zero_mode { 1.0 } else { sampler.tau0() };
        Ok(Self {
            problem,
            config,
            curvature: lhat.iter().copied().zip(norm_sq).collect(),
            b0,
            sampler,
            tau0,
        })
    }

    pub fn problem(&self) -> &'p ProblemSpec {
        self.problem
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    /// `τ_0`: `min_i q_i`, or 1 in g = 0 mode.
    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// `B_i⁰ = L̂_i + ‖A_i‖²/β₁`.
    pub fn initial_constants(&self) -> &[f64] {
        &self.b0
    }

    /// `B_i = L̂_i + ‖A_i‖²/β` for the current `β = β_{k+1}`.
    #[inline]
    pub fn block_constant(&self, i: usize, beta: f64) -> f64 {
        let (lhat, norm_sq) = self.curvature[i];
        lhat + norm_sq / beta
    }

    #[inline]
    fn prefetch_curvature(&self, i: usize) {
        crate::blocks::prefetch(&self.curvature, i);
    }

    pub fn schedule(&self) -> Schedule {
        Schedule::new(self.config.regime, self.tau0, self.config.beta1)
            .expect("tau0 and beta1 validated at construction")
    }

    fn checkpoint_every(&self) -> usize {
        self.config.checkpoint_every.unwrap_or(self.problem.blocks()).max(1)
    }

    fn record(&self, k: usize, xbar: &[f64], schedule: &Schedule, started: Instant) -> Result<TraceRecord> {
        let m = self.problem.metrics(xbar)?;
        if !m.objective.is_finite() {
            return Err(SmartcdError::Diverged { iteration: k });
        }
        Ok(TraceRecord {
            k,
            epoch: k as f64 / self.problem.blocks() as f64,
            objective: m.objective,
            suboptimality: self.problem.known_fstar().map(|f| m.objective - f),
            feasibility: m.feasibility,
            duality_gap: m.duality_gap,
            tau: schedule.tau(),
            beta: schedule.beta_next(),
            wall_ms: if self.config.record_wall_time {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
        })
    }

    /// Runs the configured variant for `max_iterations` steps.
    pub fn run(&self) -> Result<RunOutput> {
        let started = Instant::now();
        let every = self.checkpoint_every();
        let total = self.config.max_iterations;
        let mut trace = Trace::default();
        let mut restarts = 0;
        match self.config.variant {
            Variant::Reference => {
                let mut state = self.init_reference();
                trace.push(self.record(0, &state.xbar, &state.schedule, started)?);
                for k in 0..total {
                    if self.config.g_zero_mode {
                        self.g_zero_step(&mut state)?;
                    } else {
                        self.reference_step(&mut state)?;
                    }
                    if (k + 1) % every == 0 || k + 1 == total {
                        trace.push(self.record(k + 1, &state.xbar, &state.schedule, started)?);
                    }
                }
                Ok(RunOutput {
                    x: state.xbar,
                    trace,
                    iterations: total,
                    restarts,
                    operations: 0,
                })
            }
            Variant::Efficient => {
                let mut state = self.init_efficient();
                trace.push(self.record(0, &state.xbar(), &state.schedule, started)?);
                for k in 0..total {
                    if let Some(period) = self.config.restart_period {
                        if k > 0 && k % period == 0 {
                            self.restart(&mut state)?;
                            restarts += 1;
                        }
                    }
                    self.efficient_step(&mut state)?;
                    if (k + 1) % every == 0 || k + 1 == total {
                        self.refresh_residuals(&mut state)?;
                        trace.push(self.record(k + 1, &state.xbar(), &state.schedule, started)?);
                    }
                }
                Ok(RunOutput {
                    x: state.xbar(),
                    trace,
                    iterations: total,
                    restarts,
                    operations: state.operations(),
                })
            }
        }
    }

    /// `y*_β(u)` over all rows, used at restarts and by the reference step.
    pub(crate) fn dual_point(&self, ydot: &[f64], beta: f64, u: &[f64]) -> Result<Vec<f64>> {
        SmoothingContext::new(&self.problem.h, ydot, beta)?.smoothed_dual(u)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Final `x̄`.
    pub x: Vec<f64>,
    pub trace: Trace,
    pub iterations: usize,
    pub restarts: usize,
    /// Nonzeros touched by efficient steps.
    pub operations: u64,
}

/// Builds the solver for `problem` and runs it.
pub fn run(problem: &ProblemSpec, config: SolverConfig) -> Result<RunOutput> {
    Smartcd::new(problem, config)?.run()
}

/// `ẏ + (1/β)(Ax̂ − c)`, the closed-form dual step of the constrained regime.
pub fn constrained_dual_step(ydot: &[f64], beta: f64, ax: &[f64], c: &[f64]) -> Result<Vec<f64>> {
    if !(beta > 0.0) {
        return Err(SmartcdError::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    crate::error::check_len("A x", ydot.len(), ax.len())?;
    crate::error::check_len("c", ydot.len(), c.len())?;
    Ok(ydot
        .iter()
        .zip(ax)
        .zip(c)
        .map(|((y, a), c)| y + (a - c) / beta)
        .collect())
}

#[inline]
pub(crate) fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}
