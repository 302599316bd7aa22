//! `check`: invariant suite on small bundled instances.

use rand::Rng;
use smartcd::problems::{degenerate_lp, svm_dual, synthetic_separable, synthetic_tv, GridDims, SyntheticTv};
use smartcd::schedule::{next_tau_constrained, next_tau_lipschitz, seeded_rng};
use smartcd::smoothing::SmoothingContext;
use smartcd::solver::{CombinationWeights, Smartcd};
use smartcd::{ConjugatePart, ProblemSpec, SolverConfig, Variant};

const EQUIVALENCE_ITERATIONS: usize = 1000;
const EQUIVALENCE_TOL: f64 = 1e-8;
const SCHEDULE_STEPS: usize = 10_000;
const SCHEDULE_TOL: f64 = 1e-12;
const TRIALS: usize = 200;
const MOREAU_TOL: f64 = 1e-12;
const SMOOTHING_SLACK: f64 = 1e-10;
const WEIGHT_ITERATIONS: usize = 100;
const WEIGHT_TOL: f64 = 1e-8;
const LP_ITERATIONS: usize = 100_000;
const LP_TOL: f64 = 1e-3;

type Check = fn() -> Result<String, String>;

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    diff / b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0)
}

fn instances() -> Vec<(&'static str, ProblemSpec)> {
    let lp = degenerate_lp(6, 20).expect("valid LP size");
    let (tv, _) = synthetic_tv(&SyntheticTv {
        dims: GridDims::D1(30),
        observations: 15,
        ..SyntheticTv::default()
    })
    .expect("valid TV size");
    let data = synthetic_separable(30, 5, 0.1, 1).expect("valid SVM size");
    let svm = svm_dual(data.features, data.labels, vec![1.0; 30], 1.0 / 30.0).expect("valid SVM data");
    vec![("lp", lp), ("tv", tv), ("svm", svm)]
}

fn config(problem: &ProblemSpec, variant: Variant) -> SolverConfig {
    SolverConfig {
        variant,
        regime: SolverConfig::natural_regime(&problem.h),
        seed: 7,
        ..SolverConfig::default()
    }
}

fn variant_equivalence() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for (name, problem) in instances() {
        let reference = Smartcd::new(&problem, config(&problem, Variant::Reference)).map_err(|e| format!("{name}: {e}"))?;
        let efficient = Smartcd::new(&problem, config(&problem, Variant::Efficient)).map_err(|e| format!("{name}: {e}"))?;
        let (mut rs, mut es) = (reference.init_reference(), efficient.init_efficient());
        for _ in 0..EQUIVALENCE_ITERATIONS {
            reference.reference_step(&mut rs).map_err(|e| format!("{name}: {e}"))?;
            efficient.efficient_step(&mut es).map_err(|e| format!("{name}: {e}"))?;
            worst = worst.max(rel_err(&es.xbar(), &rs.xbar)).max(rel_err(&es.ztilde, &rs.xtilde));
        }
    }
    let detail = format!("lp, tv, svm x {EQUIVALENCE_ITERATIONS} steps, max relative deviation {worst:.2e}");
    if worst <= EQUIVALENCE_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn schedule() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for tau0 in [1.0, 0.1, 0.01] {
        let (mut lip, mut con) = (tau0, tau0);
        for k in 1..=SCHEDULE_STEPS {
            let next = next_tau_lipschitz(lip).map_err(|e| e.to_string())?;
            worst = worst.max((next * next * (1.0 + next) - (1.0 - next) * lip * lip).abs() / (lip * lip));
            lip = next;
            con = next_tau_constrained(con).map_err(|e| e.to_string())?;
            let exact = 1.0 / (k as f64 + 1.0 / tau0);
            worst = worst.max((con - exact).abs() / exact);
        }
    }
    let detail = format!("{SCHEDULE_STEPS} steps per tau0, max relative residual {worst:.2e}");
    if worst <= SCHEDULE_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_h(rng: &mut impl Rng, dim: usize, l1: bool) -> ConjugatePart {
    if l1 {
        ConjugatePart::L1 {
            lambda: rng.random_range(0.1..2.0),
            dim,
        }
    } else {
        ConjugatePart::equality((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
    }
}

fn moreau() -> Result<String, String> {
    let mut rng = seeded_rng(3);
    let mut worst: f64 = 0.0;
    for trial in 0..TRIALS {
        let h = random_h(&mut rng, 5, trial % 2 == 0);
        let sigma = rng.random_range(0.1..5.0);
        let v: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut conj = vec![0.0; 5];
        h.prox_conj(&v, sigma, &mut conj).map_err(|e| e.to_string())?;
        for (j, (&vj, &cj)) in v.iter().zip(&conj).enumerate() {
            // prox_{h/σ}(v/σ) evaluated from h directly.
            let direct = match &h {
                ConjugatePart::L1 { lambda, .. } => {
                    let w = vj / sigma;
                    w.signum() * (w.abs() - lambda / sigma).max(0.0)
                }
                ConjugatePart::Equality { c } => c[j],
            };
            worst = worst.max((cj + sigma * direct - vj).abs() / (1.0 + vj.abs()));
        }
    }
    let detail = format!("{TRIALS} trials, max residual {worst:.2e}");
    if worst <= MOREAU_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn smoothing() -> Result<String, String> {
    let mut rng = seeded_rng(4);
    let mut worst: f64 = f64::NEG_INFINITY;
    for trial in 0..TRIALS {
        let l1 = trial % 2 == 0;
        let h = random_h(&mut rng, 4, l1);
        let scale = if let ConjugatePart::L1 { lambda, .. } = h { lambda } else { 1.0 };
        let ydot: Vec<f64> = (0..4).map(|_| rng.random_range(-scale..scale)).collect();
        let beta = rng.random_range(0.05..5.0);
        let ctx = SmoothingContext::new(&h, &ydot, beta).map_err(|e| e.to_string())?;
        let u: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
        let w: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (hu, yu) = ctx.value_and_dual(&u).map_err(|e| e.to_string())?;
        let (hw, yw) = ctx.value_and_dual(&w).map_err(|e| e.to_string())?;
        let dy = yu.iter().zip(&yw).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let du = u.iter().zip(&w).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        // 1/β-Lipschitz dual map.
        worst = worst.max(dy.sqrt() - du.sqrt() / beta);
        // Upper model of the smoothed value.
        let inner: f64 = yu.iter().zip(w.iter().zip(&u)).map(|(y, (a, b))| y * (a - b)).sum();
        worst = worst.max((hu + inner + 0.5 * beta * dy - hw) / (1.0 + hw.abs()));
    }
    let detail = format!("{TRIALS} trials, max violation {worst:.2e}");
    if worst <= SMOOTHING_SLACK {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn combination_weights() -> Result<String, String> {
    let (_, problem) = instances().swap_remove(1);
    let solver = Smartcd::new(&problem, config(&problem, Variant::Reference)).map_err(|e| e.to_string())?;
    let mut state = solver.init_reference();
    let mut weights = CombinationWeights::new(solver.tau0());
    let mut history = vec![state.xtilde.clone()];
    let (mut point, mut sum, mut min): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for _ in 0..WEIGHT_ITERATIONS {
        let tau = state.schedule.tau();
        solver.reference_step(&mut state).map_err(|e| e.to_string())?;
        weights.step(tau);
        history.push(state.xtilde.clone());
        let combined = weights.combine(&history);
        point = point.max(combined.iter().zip(&state.xbar).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        sum = sum.max((weights.weights().iter().sum::<f64>() - 1.0).abs());
        min = min.min(weights.weights().iter().copied().fold(f64::INFINITY, f64::min));
    }
    let detail = format!("{WEIGHT_ITERATIONS} steps, reconstruction {point:.2e}, |sum-1| {sum:.2e}, min weight {min:.2e}");
    if point <= WEIGHT_TOL && sum <= 1e-10 && min >= -1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lp_convergence() -> Result<String, String> {
    let problem = degenerate_lp(10, 200).map_err(|e| e.to_string())?;
    let out = smartcd::run(
        &problem,
        SolverConfig {
            max_iterations: LP_ITERATIONS,
            checkpoint_every: Some(LP_ITERATIONS),
            regime: SolverConfig::natural_regime(&problem.h),
            ..SolverConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let last = out.trace.last().expect("final record");
    let (gap, feas) = ((last.objective - 2.0).abs(), last.feasibility.unwrap_or(f64::INFINITY));
    let detail = format!("{LP_ITERATIONS} steps, |F-2| {gap:.2e}, feasibility {feas:.2e}");
    if gap <= LP_TOL && feas <= LP_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

pub fn run_all() -> Vec<CheckResult> {
    let checks: [(&'static str, Check); 6] = [
        ("variant equivalence", variant_equivalence),
        ("schedule identities", schedule),
        ("moreau identity", moreau),
        ("smoothing bounds", smoothing),
        ("combination weights", combination_weights),
        ("lp convergence", lp_convergence),
    ];
    checks
        .into_iter()
        .map(|(name, f)| match f() {
            Ok(detail) => CheckResult {
                name,
                passed: true,
                detail,
            },
            Err(detail) => CheckResult {
                name,
                passed: false,
                detail,
            },
        })
        .collect()
}
