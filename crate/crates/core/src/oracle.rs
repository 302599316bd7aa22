//! Ground-truth helpers for tests: a deterministic high-accuracy reference
//! solve, exhaustive scalar minimization and finite differences.

use crate::blocks::BlockPartition;
use crate::error::{Result, SmartcdError};
use crate::functions::{ConjugatePart, SmoothKind};
use crate::problems::ProblemSpec;
use crate::solver::{SolverConfig, Smartcd, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMethod {
    Analytic,
    LongRunDeterministic,
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub xref: Vec<f64>,
    pub fref: f64,
    pub method: ReferenceMethod,
    /// Objective change over the last decade of iterations.
    pub accuracy: f64,
    pub iterations: usize,
}

/// Iterations between exact recomputations of the maintained images.
const REFRESH_EVERY: usize = 4096;

/// Runs the single-block (deterministic) method for `iterations` steps with
/// `β₁ = 1`.
pub fn long_run_reference(problem: &ProblemSpec, iterations: usize) -> Result<ReferenceSolution> {
    long_run_reference_with(problem, iterations, 1.0)
}

/// As [`long_run_reference`] with an explicit `β₁`.
///
/// With one block the sampler is trivial, `τ₀ = 1` and every step is a full
/// accelerated smoothed proximal-gradient step. The loop keeps `Mx̄`, `Mx̃`,
/// `Ax̄`, `Ax̃` so a step costs one product with each matrix and its
/// transpose. For Lipschitz `h` the best iterate seen is returned, which makes
/// the result nonincreasing in `iterations`; for the equality kind the final
/// iterate is returned and its objective is `f + g`.
pub fn long_run_reference_with(problem: &ProblemSpec, iterations: usize, beta1: f64) -> Result<ReferenceSolution> {
    problem.audit()?;
    let trivial = problem.f.kind() == SmoothKind::Zero
        && problem.g.is_zero()
        && matches!(problem.h, ConjugatePart::L1 { lambda, .. } if lambda == 0.0);
    if trivial || iterations == 0 {
        return Ok(ReferenceSolution {
            fref: problem.objective(&problem.x0)?,
            xref: problem.x0.clone(),
            method: ReferenceMethod::LongRunDeterministic,
            accuracy: 0.0,
            iterations: 0,
        });
    }

    let single = problem.repartition(BlockPartition::single(problem.dim())?)?;
    let config = SolverConfig {
        beta1,
        variant: Variant::Reference,
        regime: SolverConfig::natural_regime(&single.h),
        max_iterations: iterations,
        ..SolverConfig::default()
    };
    let solver = Smartcd::new(&single, config)?;
    let mut schedule = solver.schedule();
    let tau0 = solver.tau0();
    let lipschitz = single.h.is_lipschitz();

    let f = &single.f;
    let a = single.a.matrix();
    let image_m = |x: &[f64]| -> Result<Vec<f64>> { f.image(x) };
    let p = single.dim();

    let mut xbar = single.x0.clone();
    let mut xtilde = single.x0.clone();
    let mut mbar = image_m(&xbar)?;
    let mut mtilde = mbar.clone();
    let mut abar = a.apply(&xbar)?;
    let mut atilde = abar.clone();
    let ydot = vec![0.0; single.dual_dim()];
    let mut ystar = vec![0.0; single.dual_dim()];
    let mut grad = vec![0.0; p];
    let mut dual_part = vec![0.0; p];
    let mut shifted = vec![0.0; p];
    let mut next = vec![0.0; p];

    let objective = |x: &[f64], image: &[f64], ax: &[f64]| -> Result<f64> {
        let mut v = f.value_from_image(image, x) + single.g.value(x)?;
        if lipschitz {
            v += single.h.value(ax)?;
        }
        Ok(v)
    };

    let mut best = (objective(&xbar, &mbar, &abar)?, xbar.clone());
    let decade = iterations - iterations / 10;
    let mut at_decade = best.0;

    for k in 0..iterations {
        let tau = schedule.tau();
        let beta = schedule.beta_next();
        let mix = |b: &[f64], t: &[f64]| -> Vec<f64> { b.iter().zip(t).map(|(b, t)| (1.0 - tau) * b + tau * t).collect() };
        let xhat = mix(&xbar, &xtilde);
        let mhat = mix(&mbar, &mtilde);
        let ahat = mix(&abar, &atilde);

        crate::smoothing::SmoothingContext::new(&single.h, &ydot, beta)?.smoothed_dual_into(&ahat, &mut ystar)?;
        if let Some(q) = f.quadratic() {
            let resid: Vec<f64> = mhat.iter().zip(&q.target).map(|(r, b)| r - b).collect();
            q.matrix.matrix().tr_mul_vec(&resid, &mut grad)?;
        } else {
            grad.iter_mut().for_each(|g| *g = 0.0);
        }
        if let Some(w) = f.linear_term() {
            grad.iter_mut().zip(w).for_each(|(g, w)| *g += w);
        }
        a.tr_mul_vec(&ystar, &mut dual_part)?;

        let step = tau0 / (tau * solver.block_constant(0, beta));
        for j in 0..p {
            shifted[j] = xtilde[j] - step * (grad[j] + dual_part[j]);
        }
        single.g.prox_block(0, &shifted, step, &mut next)?;

        let ratio = tau / tau0;
        let refresh = (k + 1) % REFRESH_EVERY == 0;
        let mnext = image_m(&next)?;
        let anext = a.apply(&next)?;
        for j in 0..p {
            xbar[j] = xhat[j] + ratio * (next[j] - xtilde[j]);
        }
        mbar = mhat.iter().zip(&mnext).zip(&mtilde).map(|((h, n), t)| h + ratio * (n - t)).collect();
        abar = ahat.iter().zip(&anext).zip(&atilde).map(|((h, n), t)| h + ratio * (n - t)).collect();
        std::mem::swap(&mut xtilde, &mut next);
        mtilde = mnext;
        atilde = anext;
        if refresh {
            mbar = image_m(&xbar)?;
            abar = a.apply(&xbar)?;
        }
        schedule.advance()?;

        let value = objective(&xbar, &mbar, &abar)?;
        if !value.is_finite() && lipschitz {
            return Err(SmartcdError::Diverged { iteration: k });
        }
        if !lipschitz || value < best.0 {
            best = (value, xbar.clone());
        }
        if k + 1 == decade {
            at_decade = best.0;
        }
    }
    // Final objective from scratch rather than maintained images.
    let fref = problem.objective(&best.1)?;
    if !fref.is_finite() {
        return Err(SmartcdError::Diverged { iteration: iterations });
    }
    Ok(ReferenceSolution {
        xref: best.1,
        fref,
        method: ReferenceMethod::LongRunDeterministic,
        accuracy: (at_decade - fref).abs(),
        iterations,
    })
}

/// Exhaustive minimization of `f` over `lo, lo + step, …, ≤ hi`. Ties go to
/// the lowest grid point.
pub fn grid_minimize_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> Result<(f64, f64)> {
    if !(lo < hi) || !(step > 0.0) {
        return Err(SmartcdError::InvalidParameter(format!(
            "grid needs lo < hi and step > 0, got [{lo}, {hi}] step {step}"
        )));
    }
    let count = ((hi - lo) / step).floor() as usize;
    let mut best = (lo, f(lo));
    for k in 1..=count {
        let u = lo + k as f64 * step;
        let v = f(u);
        if v < best.1 {
            best = (u, v);
        }
    }
    Ok(best)
}

/// Central differences `(f(x + s e_j) − f(x − s e_j)) / 2s`.
pub fn finite_diff_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(SmartcdError::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        probe[j] = x[j] + step;
        let plus = f(&probe);
        probe[j] = x[j] - step;
        let minus = f(&probe);
        probe[j] = x[j];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(SmartcdError::InvalidParameter(format!(
                "function is not finite near coordinate {j}"
            )));
        }
        out.push((plus - minus) / (2.0 * step));
    }
    Ok(out)
}
