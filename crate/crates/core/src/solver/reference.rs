use super::{all_finite, Smartcd};
use crate::error::{Result, SmartcdError};
use crate::schedule::{seeded_rng, Schedule, SolverRng};

/// Full-vector iterate set `(x̄, x̃)`.
#[derive(Debug, Clone)]
pub struct ReferenceState {
    pub xbar: Vec<f64>,
    pub xtilde: Vec<f64>,
    /// Smoothing center.
    pub ydot: Vec<f64>,
    pub schedule: Schedule,
    pub rng: SolverRng,
    /// Block sampled by the last step.
    pub last_block: Option<usize>,
}

impl ReferenceState {
    /// `x̂ = (1−τ)x̄ + τx̃` at the current `τ`.
    pub fn xhat(&self) -> Vec<f64> {
        let tau = self.schedule.tau();
        self.xbar
            .iter()
            .zip(&self.xtilde)
            .map(|(b, t)| (1.0 - tau) * b + tau * t)
            .collect()
    }
}

/// Weights `γ_l` expressing `x̄^k = Σ_l γ_l x̃^l` over the history of `x̃`.
/// Every block shares the same weights because unsampled blocks satisfy
/// `x̃^{l+1}_i = x̃^l_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationWeights {
    weights: Vec<f64>,
    tau0: f64,
}

impl CombinationWeights {
    pub fn new(tau0: f64) -> Self {
        Self {
            weights: vec![1.0],
            tau0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies one iteration with parameter `τ_k`.
    pub fn step(&mut self, tau: f64) {
        let ratio = tau / self.tau0;
        for w in &mut self.weights {
            *w *= 1.0 - tau;
        }
        *self.weights.last_mut().expect("weights are never empty") += tau - ratio;
        self.weights.push(ratio);
    }

    /// `Σ_l γ_l x̃^l` for a history of `x̃` iterates.
    pub fn combine(&self, history: &[Vec<f64>]) -> Vec<f64> {
        assert_eq!(history.len(), self.weights.len(), "one iterate per weight");
        let mut out = vec![0.0; history.first().map_or(0, Vec::len)];
        for (w, x) in self.weights.iter().zip(history) {
            out.iter_mut().zip(x).for_each(|(o, v)| *o += w * v);
        }
        out
    }
}

impl Smartcd<'_> {
    pub fn init_reference(&self) -> ReferenceState {
        let p = self.problem.x0.clone();
        ReferenceState {
            xbar: p.clone(),
            xtilde: p,
            ydot: vec![0.0; self.problem.dual_dim()],
            schedule: self.schedule(),
            rng: seeded_rng(self.config.seed),
            last_block: None,
        }
    }

    /// Block gradient `∇_i f(x̂) + A_iᵀ y*` at `x̂`, plus `x̂` itself.
    fn reference_gradient(&self, state: &ReferenceState, i: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let problem = self.problem;
        let beta = state.schedule.beta_next();
        let xhat = state.xhat();
        let uhat = problem.a.matrix().apply(&xhat)?;
        let ystar = self.dual_point(&state.ydot, beta, &uhat)?;
        let image = problem.f.image(&xhat)?;
        let mut grad = vec![0.0; problem.partition().size(i)];
        problem.f.grad_block(&image, i, &mut grad)?;
        let mut dual_part = vec![0.0; grad.len()];
        problem.a.block_tr_mul(i, &ystar, &mut dual_part);
        grad.iter_mut().zip(&dual_part).for_each(|(g, d)| *g += d);
        Ok((xhat, grad))
    }

    /// One full-vector iteration.
    pub fn reference_step(&self, state: &mut ReferenceState) -> Result<()> {
        let k = state.schedule.k();
        let tau = state.schedule.tau();
        let beta = state.schedule.beta_next();
        let i = self.sampler.sample(&mut state.rng);
        let (xhat, grad) = self.reference_gradient(state, i)?;

        let range = self.problem.partition().range(i);
        let step = self.tau0 / (tau * self.block_constant(i, beta));
        let shifted: Vec<f64> = state.xtilde[range.clone()]
            .iter()
            .zip(&grad)
            .map(|(x, g)| x - step * g)
            .collect();
        let mut next = vec![0.0; shifted.len()];
        self.problem.g.prox_block(i, &shifted, step, &mut next)?;

        state.xbar = xhat;
        let ratio = tau / self.tau0;
        for ((xb, xt), n) in state.xbar[range.clone()]
            .iter_mut()
            .zip(&mut state.xtilde[range.clone()])
            .zip(&next)
        {
            *xb += ratio * (n - *xt);
            *xt = *n;
        }
        if !all_finite(&state.xbar[range.clone()]) || !all_finite(&state.xtilde[range]) {
            return Err(SmartcdError::Diverged { iteration: k });
        }
        state.last_block = Some(i);
        state.schedule.advance()?;
        Ok(())
    }

    /// Coordinate gradient step for `g = 0` with `τ_0 = 1`: step
    /// `q_i/(τB_i)` on `x̃_i` and averaging weight `τ/q_i` on the sampled
    /// block.
    pub fn g_zero_step(&self, state: &mut ReferenceState) -> Result<()> {
        if !self.problem.g.is_zero() {
            return Err(SmartcdError::InvalidParameter("g_zero_step requires g = 0".into()));
        }
        let k = state.schedule.k();
        let tau = state.schedule.tau();
        let beta = state.schedule.beta_next();
        let i = self.sampler.sample(&mut state.rng);
        let q = self.sampler.probabilities()[i];
        let (xhat, grad) = self.reference_gradient(state, i)?;

        let range = self.problem.partition().range(i);
        let step = q / (tau * self.block_constant(i, beta));
        let ratio = tau / q;
        state.xbar = xhat;
        for ((xb, xt), g) in state.xbar[range.clone()]
            .iter_mut()
            .zip(&mut state.xtilde[range.clone()])
            .zip(&grad)
        {
            let delta = -step * g;
            *xt += delta;
            *xb += ratio * delta;
        }
        if !all_finite(&state.xbar[range.clone()]) || !all_finite(&state.xtilde[range]) {
            return Err(SmartcdError::Diverged { iteration: k });
        }
        state.last_block = Some(i);
        state.schedule.advance()?;
        Ok(())
    }
}
