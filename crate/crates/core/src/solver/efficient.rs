use super::{all_finite, Smartcd};
use crate::error::{Result, SmartcdError};
use crate::schedule::{seeded_rng, Schedule, SolverRng};

/// Relative drift above which maintained residuals are recomputed.
const RESIDUAL_DRIFT_TOL: f64 = 1e-8;

/// Implicit iterate set: `x̄ = c_prev·u + z̃`, `x̂ = c·u + z̃`, with the images
/// of `u` and `z̃` under `M` (the least-squares matrix of `f`) and `A`.
#[derive(Debug, Clone)]
pub struct EfficientState {
    pub u: Vec<f64>,
    pub ztilde: Vec<f64>,
    /// `c_k = Π_{l≤k}(1−τ_l)`
    pub c: f64,
    /// `c_{k−1}`
    pub c_prev: f64,
    pub ydot: Vec<f64>,
    pub r_uf: Vec<f64>,
    pub r_zf: Vec<f64>,
    pub r_uh: Vec<f64>,
    pub r_zh: Vec<f64>,
    pub schedule: Schedule,
    pub rng: SolverRng,
    pub last_block: Option<usize>,
    ops: u64,
    /// The next three sampled blocks, drawn ahead so their data can be
    /// prefetched. The draw order of `rng` is unchanged.
    lookahead: Option<[usize; 3]>,
    scratch_grad: Vec<f64>,
    scratch_next: Vec<f64>,
}

impl EfficientState {
    pub fn xbar(&self) -> Vec<f64> {
        combine(self.c_prev, &self.u, &self.ztilde)
    }

    pub fn xhat(&self) -> Vec<f64> {
        combine(self.c, &self.u, &self.ztilde)
    }

    /// `A x̄` from the maintained residuals.
    pub fn abar(&self) -> Vec<f64> {
        combine(self.c_prev, &self.r_uh, &self.r_zh)
    }

    /// Matrix nonzeros touched by all steps so far.
    pub fn operations(&self) -> u64 {
        self.ops
    }
}

fn combine(scale: f64, u: &[f64], z: &[f64]) -> Vec<f64> {
    u.iter().zip(z).map(|(a, b)| scale * a + b).collect()
}

fn drifted(kept: &[f64], fresh: &[f64]) -> bool {
    let diff = kept.iter().zip(fresh).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale = fresh.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    diff > RESIDUAL_DRIFT_TOL * scale
}

impl Smartcd<'_> {
    /// `u⁰ = 0`, `z̃⁰ = x⁰`, so `x̄⁰ = x̂⁰ = x⁰` for any `c`.
    pub fn init_efficient(&self) -> EfficientState {
        let problem = self.problem;
        let x0 = problem.x0.clone();
        let r_zf = problem.f.image(&x0).expect("x0 length audited");
        let r_zh = problem.a.matrix().apply(&x0).expect("x0 length audited");
        let width = problem.partition().sizes().iter().copied().max().unwrap_or(0);
        EfficientState {
            u: vec![0.0; x0.len()],
            ztilde: x0,
            c: 1.0 - self.tau0,
            c_prev: 1.0,
            ydot: vec![0.0; problem.dual_dim()],
            r_uf: vec![0.0; r_zf.len()],
            r_zf,
            r_uh: vec![0.0; r_zh.len()],
            r_zh,
            schedule: self.schedule(),
            rng: seeded_rng(self.config.seed),
            last_block: None,
            ops: 0,
            lookahead: None,
            scratch_grad: vec![0.0; width],
            scratch_next: vec![0.0; width],
        }
    }

    /// One residual-maintaining iteration; cost is proportional to the
    /// nonzeros of the sampled column block of `M` and `A`.
    pub fn efficient_step(&self, state: &mut EfficientState) -> Result<()> {
        let problem = self.problem;
        let k = state.schedule.k();
        let tau = state.schedule.tau();
        let beta = state.schedule.beta_next();
        let c = state.c;
        let i = self.next_block(state);
        let range = problem.partition().range(i);
        let width = range.len();
        let mut touched = 0usize;

        let grad = &mut state.scratch_grad[..width];
        problem.f.grad_block_shifted(&state.r_uf, c, Some(&state.r_zf), range.clone(), grad);
        let quadratic = problem.f.quadratic().map(|q| q.matrix.matrix());
        if let Some(m) = quadratic {
            touched += range.clone().map(|j| m.col_nnz(j)).sum::<usize>();
        }

        // Dual entries only on rows touched by A_i; h is separable.
        let a = problem.a.matrix();
        let sigma = 1.0 / beta;
        for (g, j) in grad.iter_mut().zip(range.clone()) {
            let (rows, vals) = a.col(j);
            touched += rows.len();
            for (&r, &v) in rows.iter().zip(vals) {
                let arg = state.ydot[r] + (c * state.r_uh[r] + state.r_zh[r]) * sigma;
                *g += v * problem.h.prox_conj_entry(r, arg, sigma);
            }
        }

        let step = self.tau0 / (tau * self.block_constant(i, beta));
        let next = &mut state.scratch_next[..width];
        for ((n, z), g) in next.iter_mut().zip(&state.ztilde[range.clone()]).zip(grad.iter()) {
            *n = z - step * g;
        }
        // `grad` is free again; reuse it as the prox input.
        grad.copy_from_slice(next);
        problem.g.prox_block_unchecked(range.clone(), grad, step, next);
        for (n, z) in next.iter_mut().zip(&state.ztilde[range.clone()]) {
            *n -= z;
        }
        let t = &*next;
        if !all_finite(t) {
            return Err(SmartcdError::Diverged { iteration: k });
        }

        let numerator = 1.0 - tau / self.tau0;
        let coef = if numerator == 0.0 {
            0.0
        } else if c == 0.0 {
            return Err(SmartcdError::DegenerateCombination { iteration: k });
        } else {
            numerator / c
        };

        for ((z, u), tj) in state.ztilde[range.clone()]
            .iter_mut()
            .zip(&mut state.u[range.clone()])
            .zip(t)
        {
            *z += tj;
            *u -= coef * tj;
        }
        for (&tj, j) in t.iter().zip(range) {
            if tj == 0.0 {
                continue;
            }
            if let Some(m) = quadratic {
                m.col_axpy(j, tj, &mut state.r_zf);
                if coef != 0.0 {
                    m.col_axpy(j, -coef * tj, &mut state.r_uf);
                }
            }
            a.col_axpy(j, tj, &mut state.r_zh);
            if coef != 0.0 {
                a.col_axpy(j, -coef * tj, &mut state.r_uh);
            }
        }
        state.ops += 2 * touched as u64;

        state.last_block = Some(i);
        let tau_next = state.schedule.advance()?;
        state.c_prev = c;
        state.c = c * (1.0 - tau_next);
        Ok(())
    }

    /// Pops the current block and draws one more into the queue. Each queue
    /// slot hints the data the next slot will need: partition bookkeeping
    /// for the farthest block, column pointers one step later, then the
    /// nonzeros and iterate entries.
    fn next_block(&self, state: &mut EfficientState) -> usize {
        let [current, near, mid] = match state.lookahead {
            Some(queued) => queued,
            None => std::array::from_fn(|_| self.sampler.sample(&mut state.rng)),
        };
        let far = self.sampler.sample(&mut state.rng);
        state.lookahead = Some([near, mid, far]);

        let problem = self.problem;
        let partition = problem.partition();
        let quadratic = problem.f.quadratic().map(|q| q.matrix.matrix());
        let a = problem.a.matrix();
        partition.prefetch_block(far);
        for j in partition.range(mid) {
            a.prefetch_col_ptr(j);
            if let Some(m) = quadratic {
                m.prefetch_col_ptr(j);
            }
        }
        for j in partition.range(near) {
            a.prefetch_col(j);
            if let Some(m) = quadratic {
                m.prefetch_col(j);
            }
            crate::blocks::prefetch(&state.ztilde, j);
            crate::blocks::prefetch(&state.u, j);
        }
        self.prefetch_curvature(near);
        current
    }

    /// Resets the momentum bookkeeping and moves the smoothing center to the
    /// current dual point. `z̃` and the sampler are kept.
    pub fn restart(&self, state: &mut EfficientState) -> Result<()> {
        let uhat = combine(state.c, &state.r_uh, &state.r_zh);
        state.ydot = self.dual_point(&state.ydot, state.schedule.beta_next(), &uhat)?;
        state.u.iter_mut().for_each(|v| *v = 0.0);
        state.r_uf.iter_mut().for_each(|v| *v = 0.0);
        state.r_uh.iter_mut().for_each(|v| *v = 0.0);
        // Same bookkeeping as a fresh start; only `c·u` matters, so the
        // scale of `c` is free.
        state.c = 1.0 - self.tau0;
        state.c_prev = 1.0;
        state.schedule.reset();
        Ok(())
    }

    /// Recomputes the four residuals from `u` and `z̃`, replacing those whose
    /// relative drift exceeds the tolerance. Returns how many were replaced.
    pub fn refresh_residuals(&self, state: &mut EfficientState) -> Result<usize> {
        let problem = self.problem;
        let mut replaced = 0;
        let fresh = [
            problem.f.image(&state.u)?,
            problem.f.image(&state.ztilde)?,
            problem.a.matrix().apply(&state.u)?,
            problem.a.matrix().apply(&state.ztilde)?,
        ];
        let kept = [&mut state.r_uf, &mut state.r_zf, &mut state.r_uh, &mut state.r_zh];
        for (kept, fresh) in kept.into_iter().zip(fresh) {
            if drifted(kept, &fresh) {
                *kept = fresh;
                replaced += 1;
            }
        }
        Ok(replaced)
    }
}
