//! End-to-end acceptance checks. Runs without the libtest harness so every
//! check prints one PASS/FAIL line; the process exits nonzero on any failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{random_instance_with, random_vec, rel_err, rng, HKind};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use smartcd::functions::{soft_threshold, CoordTerm};
use smartcd::oracle::{finite_diff_gradient, grid_minimize_scalar, long_run_reference_with};
use smartcd::problems::{degenerate_lp, svm_dual, synthetic_separable, synthetic_tv, GridDims, SyntheticTv};
use smartcd::schedule::Schedule;
use smartcd::smoothing::SmoothingContext;
use smartcd::solver::{CombinationWeights, Smartcd, SolverConfig, Variant};
use smartcd::{BlockPartition, BlockSparseMatrix, ConjugatePart, ProblemSpec, Regime, SmoothPart};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------------------
// 1. Reference and efficient variants produce the same iterates.

const EQUIV_INSTANCES: u64 = 20;
const EQUIV_ITERATIONS: usize = 2000;
const EQUIV_TOL: f64 = 1e-8;

fn criterion_01_variant_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..EQUIV_INSTANCES {
        let kind = HKind::ALL[(seed % 3) as usize];
        let problem = random_instance_with(seed, kind, seed % 2 == 0);
        let config = |variant| SolverConfig {
            variant,
            regime: SolverConfig::natural_regime(&problem.h),
            seed: 1000 + seed,
            ..SolverConfig::default()
        };
        let reference = Smartcd::new(&problem, config(Variant::Reference)).unwrap();
        let efficient = Smartcd::new(&problem, config(Variant::Efficient)).unwrap();
        let mut rs = reference.init_reference();
        let mut es = efficient.init_efficient();
        for _ in 0..EQUIV_ITERATIONS {
            worst = worst.max(rel_err(&es.xhat(), &rs.xhat()));
            reference.reference_step(&mut rs).unwrap();
            efficient.efficient_step(&mut es).unwrap();
            worst = worst
                .max(rel_err(&es.xbar(), &rs.xbar))
                .max(rel_err(&es.ztilde, &rs.xtilde));
        }
    }
    outcome(
        worst <= EQUIV_TOL,
        format!("{EQUIV_INSTANCES} instances x {EQUIV_ITERATIONS} iterations, max relative deviation {worst:.2e} (tol {EQUIV_TOL:.0e})"),
    )
}

// ---------------------------------------------------------------------------
// 2. Parameter sequence bounds.

const SCHEDULE_STEPS: usize = 1_000_000;
const SCHEDULE_SLACK: f64 = 1e-12;

fn criterion_02_schedule_bounds() -> Outcome {
    let beta1 = 1.0;
    let mut violations = Vec::new();
    for tau0 in [1.0, 0.5, 0.1, 0.01] {
        let mut s = Schedule::new(Regime::Lipschitz, tau0, beta1).unwrap();
        let inv = 1.0 / tau0;
        for k in 0..=SCHEDULE_STEPS {
            let kf = k as f64;
            let tau = s.tau();
            let lo = 1.0 / (kf + inv);
            let hi = 2.0 / (kf + inv + 1.0);
            // beta_next() is β_{k+1}.
            let beta_bound = beta1 * (1.0 + tau0) / (tau0 * (kf + 1.0) + 1.0);
            if tau < lo - SCHEDULE_SLACK || tau > hi + SCHEDULE_SLACK || s.beta_next() > beta_bound + SCHEDULE_SLACK {
                violations.push(format!("tau0={tau0} k={k}"));
                break;
            }
            if k < SCHEDULE_STEPS {
                s.advance().unwrap();
            }
        }
    }
    outcome(
        violations.is_empty(),
        if violations.is_empty() {
            format!("tau0 in {{1, 0.5, 0.1, 0.01}}, {SCHEDULE_STEPS} steps each, slack {SCHEDULE_SLACK:.0e}")
        } else {
            format!("violations at {}", violations.join(", "))
        },
    )
}

// ---------------------------------------------------------------------------
// 3. Smoothing inequalities.

const SMOOTHING_TRIALS: usize = 1000;
const SMOOTHING_SLACK: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn criterion_03_smoothing_properties() -> Outcome {
    let mut r = rng(3);
    let mut failures: Vec<String> = Vec::new();
    let mut fail = |name: &str| {
        if !failures.iter().any(|f| f == name) {
            failures.push(name.to_string());
        }
    };
    for _ in 0..SMOOTHING_TRIALS {
        let m = r.random_range(1..=8);
        let ydot = random_vec(m, 0.5, &mut r);
        let lambda = r.random_range(0.1..2.0);
        let c = random_vec(m, 1.0, &mut r);
        let kinds = [ConjugatePart::l1(lambda, m).unwrap(), ConjugatePart::equality(c.clone())];
        let beta = r.random_range(0.05..3.0);
        let beta_bar = beta + r.random_range(0.0..3.0);
        let u = random_vec(m, 3.0, &mut r);
        let uh = random_vec(m, 3.0, &mut r);
        for h in &kinds {
            let ctx = SmoothingContext::new(h, &ydot, beta).unwrap();
            let ctx_bar = SmoothingContext::new(h, &ydot, beta_bar).unwrap();
            let (hu, yu) = ctx.value_and_dual(&u).unwrap();
            let (huh, yuh) = ctx.value_and_dual(&uh).unwrap();
            let scale = 1.0 + hu.abs().max(huh.abs());

            // (a) y* is 1/β-Lipschitz.
            if dist_sq(&yu, &yuh).sqrt() > dist_sq(&u, &uh).sqrt() / beta + SMOOTHING_SLACK {
                fail("a");
            }
            // (b) descent-type lower bound.
            let diff: Vec<f64> = uh.iter().zip(&u).map(|(a, b)| a - b).collect();
            if hu + dot(&yu, &diff) + 0.5 * beta * dist_sq(&yu, &yuh) > huh + SMOOTHING_SLACK * scale {
                fail("b");
            }
            // (c) lower model of h, at points where h is finite.
            let target = match h {
                ConjugatePart::L1 { .. } => uh.clone(),
                ConjugatePart::Equality { c } => c.clone(),
            };
            let diff_t: Vec<f64> = target.iter().zip(&u).map(|(a, b)| a - b).collect();
            let h_target = h.value(&target).unwrap();
            if h_target < hu + dot(&yu, &diff_t) + 0.5 * beta * dist_sq(&yu, &ydot) - SMOOTHING_SLACK * scale {
                fail("c");
            }
            // (d) monotonicity in β.
            let hbar = ctx_bar.h_beta_value(&u).unwrap();
            if hu > hbar + 0.5 * (beta_bar - beta) * dist_sq(&yu, &ydot) + SMOOTHING_SLACK * scale {
                fail("d");
            }
            // (e) exact identity for linear h*.
            if let ConjugatePart::Equality { .. } = h {
                let rhs = hbar + (beta_bar - beta) * beta / (2.0 * beta_bar) * dist_sq(&yu, &ydot);
                if (hu - rhs).abs() > SMOOTHING_SLACK * hu.abs().max(rhs.abs()).max(1.0) {
                    fail("e");
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("all five bounds hold over {SMOOTHING_TRIALS} trials, both kinds, slack {SMOOTHING_SLACK:.0e}")
        } else {
            format!("violated: {}", failures.join(", "))
        },
    )
}

// ---------------------------------------------------------------------------
// 4. Degenerate LP: optimum 2 at rate O(1/k).

const LP_ITERATIONS: usize = 100_000;
const LP_CHECKPOINT: usize = 1000;
const LP_TOL: f64 = 1e-3;
const LP_SLOPE: (f64, f64) = (-1.5, -0.6);

fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = points.iter().map(|(x, y)| (x.ln() - mx) * (y.ln() - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x.ln() - mx).powi(2)).sum();
    num / den
}

fn criterion_04_degenerate_lp() -> Outcome {
    let problem = degenerate_lp(10, 200).unwrap();
    let fstar = problem.known_fstar().unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.0, 1.0] {
        let config = SolverConfig {
            beta1: 1.0,
            alpha,
            variant: Variant::Efficient,
            regime: Regime::Constrained,
            max_iterations: LP_ITERATIONS,
            checkpoint_every: Some(LP_CHECKPOINT),
            record_wall_time: false,
            seed: 4,
            ..SolverConfig::default()
        };
        let out = smartcd::run(&problem, config).unwrap();
        let last = out.trace.last().unwrap();
        let subopt = (last.objective - fstar).abs();
        let feas = last.feasibility.unwrap();
        let decade: Vec<(f64, f64)> = out
            .trace
            .records
            .iter()
            .filter(|r| r.k >= LP_ITERATIONS / 10)
            .map(|r| (r.k as f64, (r.objective - fstar).abs()))
            .collect();
        let slope = loglog_slope(&decade);
        let ok = subopt < LP_TOL && feas < LP_TOL && (LP_SLOPE.0..=LP_SLOPE.1).contains(&slope);
        pass &= ok;
        parts.push(format!("alpha={alpha}: |F-2|={subopt:.2e} feas={feas:.2e} slope={slope:.3}"));
    }
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------------------
// 5. TV-ℓ1 regression against a long deterministic reference.

const TV_BETA1: f64 = 100.0;
const TV_ITERATIONS: usize = 1_000_000;
const TV_REFERENCE_ITERATIONS: usize = 1_000_000;
const TV_GAP_TOL: f64 = 1e-3;
const TV_LS_TOL: f64 = 1e-4;

fn dense_least_squares(problem: &ProblemSpec) -> Vec<f64> {
    let q = problem.f.quadratic().unwrap();
    let dense = q.matrix.matrix().to_dense();
    let (m, p) = (dense.len(), dense[0].len());
    let mat = DMatrix::from_fn(m, p, |i, j| dense[i][j]);
    let rhs = DVector::from_vec(q.target.clone());
    let normal = mat.transpose() * &mat;
    let x = normal.cholesky().unwrap().solve(&(mat.transpose() * rhs));
    x.iter().copied().collect()
}

fn criterion_05_tv_regression() -> Outcome {
    let (problem, _) = synthetic_tv(&SyntheticTv::default()).unwrap();
    let reference = long_run_reference_with(&problem, TV_REFERENCE_ITERATIONS, TV_BETA1).unwrap();
    let config = SolverConfig {
        beta1: TV_BETA1,
        max_iterations: TV_ITERATIONS,
        checkpoint_every: Some(TV_ITERATIONS),
        record_wall_time: false,
        seed: 5,
        ..SolverConfig::default()
    };
    let out = smartcd::run(&problem, config.clone()).unwrap();
    let f = problem.objective(&out.x).unwrap();
    let gap = (f - reference.fref) / reference.fref.abs();

    // λ = 0 on an overdetermined design is plain least squares.
    let (ls_problem, _) = synthetic_tv(&SyntheticTv {
        dims: GridDims::D1(10),
        observations: 20,
        lambda: 0.0,
        ..SyntheticTv::default()
    })
    .unwrap();
    let exact = dense_least_squares(&ls_problem);
    let ls_out = smartcd::run(
        &ls_problem,
        SolverConfig {
            max_iterations: 100_000,
            ..config
        },
    )
    .unwrap();
    let ls_err = ls_out.x.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    outcome(
        gap <= TV_GAP_TOL && ls_err <= TV_LS_TOL,
        format!(
            "F={f:.10} Fref={:.10} (reference accuracy {:.1e}), relative gap {gap:.2e} (tol {TV_GAP_TOL:.0e}); lambda=0 max error vs dense solve {ls_err:.2e} (tol {TV_LS_TOL:.0e})",
            reference.fref, reference.accuracy
        ),
    )
}

// ---------------------------------------------------------------------------
// 6. Dual SVM with bias.

const SVM_EXAMPLES: usize = 200;
const SVM_FEATURES: usize = 20;
const SVM_EPOCHS: usize = 100;
const SVM_FEAS_TOL: f64 = 1e-4;
const SVM_GAP_RATIO: f64 = 1e-2;
const SVM_BETA1: f64 = 1e-3;
const SVM_RESTART_BETA1: f64 = 0.1;
const SVM_SEEDS: u64 = 5;
const SVM_RESTART_WINS: usize = 4;

fn svm_instance(seed: u64) -> ProblemSpec {
    let data = synthetic_separable(SVM_EXAMPLES, SVM_FEATURES, 0.1, seed).unwrap();
    svm_dual(data.features, data.labels, vec![1.0; SVM_EXAMPLES], 1.0 / SVM_EXAMPLES as f64).unwrap()
}

fn svm_config(beta1: f64, restart: Option<usize>, seed: u64) -> SolverConfig {
    SolverConfig {
        beta1,
        variant: Variant::Efficient,
        regime: Regime::Constrained,
        max_iterations: SVM_EPOCHS * SVM_EXAMPLES,
        restart_period: restart,
        checkpoint_every: Some(SVM_EXAMPLES),
        record_wall_time: false,
        seed,
        ..SolverConfig::default()
    }
}

/// First epoch checkpoint (after the start) with feasibility at most the
/// tolerance; `None` when the budget runs out first.
fn first_feasible(problem: &ProblemSpec, config: SolverConfig) -> Option<usize> {
    let out = smartcd::run(problem, config).unwrap();
    out.trace
        .records
        .iter()
        .skip(1)
        .find(|r| r.feasibility.unwrap() <= SVM_FEAS_TOL)
        .map(|r| r.k)
}

fn criterion_06_svm() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();

    let problem = svm_instance(0);
    let initial_gap = problem.metrics(&problem.x0).unwrap().duality_gap.unwrap();
    let out = smartcd::run(&problem, svm_config(SVM_BETA1, None, 0)).unwrap();
    let last = out.trace.last().unwrap();
    let feas = last.feasibility.unwrap();
    let ratio = last.duality_gap.unwrap() / initial_gap;
    pass &= feas <= SVM_FEAS_TOL && ratio <= SVM_GAP_RATIO;
    parts.push(format!(
        "after {SVM_EPOCHS} epochs |b'x|={feas:.2e} gap/initial={ratio:.2e}"
    ));

    let budget = SVM_EPOCHS * SVM_EXAMPLES;
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..SVM_SEEDS {
        let problem = svm_instance(seed);
        let plain = first_feasible(&problem, svm_config(SVM_RESTART_BETA1, None, seed));
        let restarted = first_feasible(&problem, svm_config(SVM_RESTART_BETA1, Some(SVM_EXAMPLES), seed));
        let plain_k = plain.unwrap_or(budget + 1);
        let restart_k = restarted.unwrap_or(budget + 1);
        if restart_k < plain_k {
            wins += 1;
        }
        let show = |k: Option<usize>| k.map_or(">budget".to_string(), |k| k.to_string());
        pairs.push(format!("{}/{}", show(restarted), show(plain)));
    }
    pass &= wins >= SVM_RESTART_WINS;
    parts.push(format!(
        "restart wins {wins}/{SVM_SEEDS} (iterations to 1e-4 feasibility, restart/plain: {})",
        pairs.join(" ")
    ));
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------------------
// 7. Combination weights.

const WEIGHT_ITERATIONS: usize = 50;
const WEIGHT_POINT_TOL: f64 = 1e-8;
const WEIGHT_SUM_TOL: f64 = 1e-10;

fn criterion_07_combination_weights() -> Outcome {
    let problem = random_instance_with(7, HKind::L1, false);
    let solver = Smartcd::new(
        &problem,
        SolverConfig {
            variant: Variant::Reference,
            seed: 7,
            ..SolverConfig::default()
        },
    )
    .unwrap();
    let mut state = solver.init_reference();
    let mut weights = CombinationWeights::new(solver.tau0());
    let mut history = vec![state.xtilde.clone()];
    let (mut point_err, mut sum_err, mut min_w): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for _ in 0..WEIGHT_ITERATIONS {
        let tau = state.schedule.tau();
        solver.reference_step(&mut state).unwrap();
        weights.step(tau);
        history.push(state.xtilde.clone());
        let combined = weights.combine(&history);
        point_err = point_err.max(combined.iter().zip(&state.xbar).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        sum_err = sum_err.max((weights.weights().iter().sum::<f64>() - 1.0).abs());
        min_w = min_w.min(weights.weights().iter().copied().fold(f64::INFINITY, f64::min));
    }
    outcome(
        point_err <= WEIGHT_POINT_TOL && sum_err <= WEIGHT_SUM_TOL && min_w >= 0.0,
        format!("{WEIGHT_ITERATIONS} iterations: reconstruction error {point_err:.2e}, |sum-1| {sum_err:.2e}, min weight {min_w:.3e}"),
    )
}

// ---------------------------------------------------------------------------
// 8. Per-iteration cost independent of dimension.

const COST_NNZ_PER_COLUMN: usize = 10;
const COST_ROWS: usize = 1000;
const COST_ITERATIONS: usize = 200_000;
const COST_REPEATS: usize = 5;
const COST_RATIO: f64 = 2.0;

fn fixed_nnz_matrix(rows: usize, cols: usize, per_col: usize, r: &mut common::TestRng) -> smartcd::CscMatrix {
    let mut t = Vec::with_capacity(cols * per_col);
    for j in 0..cols {
        let mut picked: Vec<usize> = Vec::with_capacity(per_col);
        while picked.len() < per_col {
            let i = r.random_range(0..rows);
            if !picked.contains(&i) {
                picked.push(i);
            }
        }
        t.extend(picked.into_iter().map(|i| (i, j, r.random_range(-1.0..1.0))));
    }
    smartcd::CscMatrix::from_triplets(rows, cols, &t).unwrap()
}

fn cost_instance(p: usize) -> ProblemSpec {
    let mut r = rng(p as u64);
    let partition = BlockPartition::scalar(p).unwrap();
    let m = fixed_nnz_matrix(COST_ROWS, p, COST_NNZ_PER_COLUMN, &mut r);
    let a = fixed_nnz_matrix(COST_ROWS, p, COST_NNZ_PER_COLUMN, &mut r);
    let f = SmoothPart::least_squares(BlockSparseMatrix::new(m, partition.clone()).unwrap(), random_vec(COST_ROWS, 1.0, &mut r)).unwrap();
    let g = smartcd::SeparablePart::l1(partition.clone(), 0.01).unwrap();
    let h = ConjugatePart::l1(0.1, COST_ROWS).unwrap();
    ProblemSpec::new(f, g, h, BlockSparseMatrix::new(a, partition).unwrap(), vec![0.0; p]).unwrap()
}

/// Best-of-repeats mean step time in nanoseconds and operations per step.
fn time_steps(p: usize) -> (f64, f64) {
    let problem = cost_instance(p);
    let solver = Smartcd::new(&problem, SolverConfig::default()).unwrap();
    let mut best = f64::INFINITY;
    let mut ops_per_step = 0.0;
    for _ in 0..COST_REPEATS {
        let mut state = solver.init_efficient();
        let start = Instant::now();
        for _ in 0..COST_ITERATIONS {
            solver.efficient_step(&mut state).unwrap();
        }
        best = best.min(start.elapsed().as_nanos() as f64 / COST_ITERATIONS as f64);
        ops_per_step = state.operations() as f64 / COST_ITERATIONS as f64;
    }
    (best, ops_per_step)
}

fn criterion_08_iteration_cost() -> Outcome {
    let (small_ns, small_ops) = time_steps(1_000);
    let (large_ns, large_ops) = time_steps(100_000);
    let ratio = large_ns / small_ns;
    let expected_ops = (4 * COST_NNZ_PER_COLUMN) as f64;
    outcome(
        ratio <= COST_RATIO && small_ops == expected_ops && large_ops == expected_ops,
        format!(
            "p=1e3: {small_ns:.0} ns/step, {small_ops} ops/step; p=1e5: {large_ns:.0} ns/step, {large_ops} ops/step; ratio {ratio:.2} (tol {COST_RATIO})"
        ),
    )
}

// ---------------------------------------------------------------------------
// 9. Prox and gradient oracles.

const PROX_GRID_STEP: f64 = 1e-4;
const PROX_TOL: f64 = 1e-3;
const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-5;
const MOREAU_TOL: f64 = 1e-12;

/// `prox_{h/σ}(w)` computed directly from `h`.
fn prox_h_direct(h: &ConjugatePart, w: &[f64], sigma: f64) -> Vec<f64> {
    match h {
        ConjugatePart::L1 { lambda, .. } => w.iter().map(|&v| soft_threshold(v, lambda / sigma)).collect(),
        ConjugatePart::Equality { c } => c.clone(),
    }
}

fn criterion_09_oracles() -> Outcome {
    let mut r = rng(9);
    let mut prox_err: f64 = 0.0;
    for _ in 0..50 {
        let v = r.random_range(-3.0..3.0);
        let step = r.random_range(0.1..2.0);
        let terms = [
            CoordTerm::Zero,
            CoordTerm::L1(r.random_range(0.1..2.0)),
            CoordTerm::Box { lo: -1.0, hi: 0.5 },
            CoordTerm::NonNeg,
        ];
        for t in &terms {
            let closed = t.prox(v, step);
            let (grid, _) =
                grid_minimize_scalar(|u| t.value(u) + (u - v).powi(2) / (2.0 * step), -6.0, 6.0, PROX_GRID_STEP).unwrap();
            prox_err = prox_err.max((closed - grid).abs());
        }
        // Conjugate proxes, one coordinate at a time.
        let sigma = r.random_range(0.1..2.0);
        let lambda = r.random_range(0.1..2.0);
        let c = r.random_range(-1.0..1.0);
        let l1 = ConjugatePart::l1(lambda, 1).unwrap();
        let (grid, _) = grid_minimize_scalar(|y| (y - v).powi(2) / 2.0, -lambda, lambda, PROX_GRID_STEP).unwrap();
        prox_err = prox_err.max((l1.prox_conj_entry(0, v, sigma) - grid).abs());
        let eq = ConjugatePart::equality(vec![c]);
        let (grid, _) =
            grid_minimize_scalar(|y| sigma * c * y + (y - v).powi(2) / 2.0, -8.0, 8.0, PROX_GRID_STEP).unwrap();
        prox_err = prox_err.max((eq.prox_conj_entry(0, v, sigma) - grid).abs());
    }

    let mut grad_err: f64 = 0.0;
    for seed in 0..10 {
        let problem = random_instance_with(900 + seed, HKind::L1, false);
        let mut rr = rng(seed);
        let x = random_vec(problem.dim(), 1.0, &mut rr);
        let analytic = problem.f.grad_full(&x).unwrap();
        let fd = finite_diff_gradient(|z| problem.f.value(z).unwrap(), &x, FD_STEP).unwrap();
        grad_err = grad_err.max(analytic.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));

        let m = rr.random_range(1..=6);
        let ydot = random_vec(m, 0.5, &mut rr);
        let u = random_vec(m, 1.0, &mut rr);
        for h in [ConjugatePart::l1(0.7, m).unwrap(), ConjugatePart::equality(random_vec(m, 1.0, &mut rr))] {
            let ctx = SmoothingContext::new(&h, &ydot, 0.8).unwrap();
            let y = ctx.smoothed_dual(&u).unwrap();
            let fd = finite_diff_gradient(|z| ctx.h_beta_value(z).unwrap(), &u, FD_STEP).unwrap();
            grad_err = grad_err.max(y.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
    }

    let mut moreau_err: f64 = 0.0;
    for _ in 0..1000 {
        let m = r.random_range(1..=6);
        let v = random_vec(m, 3.0, &mut r);
        let sigma = r.random_range(0.1..3.0);
        for h in [
            ConjugatePart::l1(r.random_range(0.0..2.0), m).unwrap(),
            ConjugatePart::equality(random_vec(m, 1.0, &mut r)),
        ] {
            let mut p = vec![0.0; m];
            h.prox_conj(&v, sigma, &mut p).unwrap();
            let w: Vec<f64> = v.iter().map(|x| x / sigma).collect();
            let q = prox_h_direct(&h, &w, sigma);
            for j in 0..m {
                let err = (p[j] + sigma * q[j] - v[j]).abs() / v[j].abs().max(1.0);
                moreau_err = moreau_err.max(err);
            }
        }
    }
    outcome(
        prox_err <= PROX_TOL && grad_err <= FD_TOL && moreau_err <= MOREAU_TOL,
        format!(
            "prox vs grid {prox_err:.1e} (tol {PROX_TOL:.0e}); gradient vs finite differences {grad_err:.1e} (tol {FD_TOL:.0e}); Moreau identity {moreau_err:.1e} (tol {MOREAU_TOL:.0e})"
        ),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let checks: [(&str, Check); 9] = [
        ("1 variant equivalence", criterion_01_variant_equivalence),
        ("2 schedule bounds", criterion_02_schedule_bounds),
        ("3 smoothing properties", criterion_03_smoothing_properties),
        ("4 degenerate LP", criterion_04_degenerate_lp),
        ("5 TV-l1 regression", criterion_05_tv_regression),
        ("6 dual SVM with bias", criterion_06_svm),
        ("7 combination weights", criterion_07_combination_weights),
        ("8 per-iteration cost", criterion_08_iteration_cost),
        ("9 prox and gradient oracles", criterion_09_oracles),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    // Timing-sensitive check runs alone; the others share threads.
    let results: Vec<(usize, Outcome, f64)> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        let mut results = Vec::new();
        for (idx, (name, check)) in checks.iter().enumerate() {
            if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
                continue;
            }
            if idx == 7 {
                continue;
            }
            let check = *check;
            handles.push((idx, scope.spawn(move || {
                let start = Instant::now();
                let o = check();
                (o, start.elapsed().as_secs_f64())
            })));
        }
        for (idx, h) in handles {
            let (o, secs) = h.join().unwrap_or_else(|_| (outcome(false, "panicked".into()), 0.0));
            results.push((idx, o, secs));
        }
        results
    });
    let mut results = results;
    if filter.is_empty() || filter.iter().any(|f| checks[7].0.contains(f.as_str())) {
        let start = Instant::now();
        let o = checks[7].1();
        results.push((7, o, start.elapsed().as_secs_f64()));
    }
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (idx, o, secs) in &results {
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {}: {status} ({secs:.1}s) {}", checks[*idx].0, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
