mod common;

use nalgebra::{DMatrix, DVector};
use smartcd::oracle::{long_run_reference, long_run_reference_with, ReferenceMethod};
use smartcd::problems::{degenerate_lp, synthetic_tv, GridDims, SyntheticTv};
use smartcd::{BlockPartition, BlockSparseMatrix, ConjugatePart, ProblemSpec, SeparablePart, SmoothPart};

use common::{random_instance, random_sparse, rng};

fn dense_least_squares(problem: &ProblemSpec) -> Vec<f64> {
    let q = problem.f.quadratic().unwrap();
    let dense = q.matrix.matrix().to_dense();
    let mat = DMatrix::from_fn(dense.len(), problem.dim(), |r, c| dense[r][c]);
    let rhs = DVector::from_column_slice(&q.target);
    let normal = mat.transpose() * &mat;
    normal.cholesky().unwrap().solve(&(mat.transpose() * rhs)).as_slice().to_vec()
}

#[test]
fn lp_reference_reaches_known_optimum() {
    let problem = degenerate_lp(10, 200).unwrap();
    let reference = long_run_reference(&problem, 100_000).unwrap();
    assert_eq!(reference.method, ReferenceMethod::LongRunDeterministic);
    assert!((reference.fref - 2.0).abs() <= 1e-4, "Fref = {}", reference.fref);
}

#[test]
fn unregularized_tv_matches_normal_equations() {
    let (problem, _) = synthetic_tv(&SyntheticTv {
        dims: GridDims::D1(10),
        observations: 20,
        lambda: 0.0,
        ..Default::default()
    })
    .unwrap();
    // h ≡ 0 here, so a large β₁ only removes the homotopy's step damping.
    let reference = long_run_reference_with(&problem, 200_000, 100.0).unwrap();
    let exact = dense_least_squares(&problem);
    let err = reference.xref.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-6, "max error {err:e}");
}

#[test]
fn zero_objective_returns_start() {
    let mut r = rng(1);
    let p = 6;
    let partition = BlockPartition::scalar(p).unwrap();
    let problem = ProblemSpec::new(
        SmoothPart::zero(partition.clone()),
        SeparablePart::zero(partition.clone()),
        ConjugatePart::l1(0.0, 3).unwrap(),
        BlockSparseMatrix::new(random_sparse(3, p, 0.5, &mut r), partition).unwrap(),
        vec![0.25; p],
    )
    .unwrap();
    let reference = long_run_reference(&problem, 1000).unwrap();
    assert_eq!(reference.xref, problem.x0);
    assert_eq!((reference.fref, reference.iterations), (0.0, 0));
}

#[test]
fn doubling_iterations_never_worsens() {
    for seed in 0..4 {
        let problem = random_instance(seed, true);
        let mut previous = f64::INFINITY;
        for iterations in [1_000, 2_000, 4_000, 8_000] {
            let reference = long_run_reference(&problem, iterations).unwrap();
            assert!(reference.fref <= previous + 1e-12, "seed {seed}: {} after {previous}", reference.fref);
            assert!(reference.accuracy.is_finite());
            previous = reference.fref;
        }
    }
}
