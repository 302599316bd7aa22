#![allow(dead_code)]

use rand::Rng;
use smartcd::functions::CoordTerm;
use smartcd::schedule::{seeded_rng, SolverRng as ChaCha8Rng};

pub type TestRng = ChaCha8Rng;
use smartcd::{BlockPartition, BlockSparseMatrix, ConjugatePart, CscMatrix, ProblemSpec, SeparablePart, SmoothPart};

pub fn rng(seed: u64) -> ChaCha8Rng {
    seeded_rng(seed)
}

/// Sparse matrix with roughly `density` of its entries uniform in [-1, 1].
pub fn random_sparse(rows: usize, cols: usize, density: f64, rng: &mut ChaCha8Rng) -> CscMatrix {
    let mut t = Vec::new();
    for j in 0..cols {
        // At least one entry per column keeps every block curvature positive.
        let forced = rng.random_range(0..rows);
        for i in 0..rows {
            if i == forced || rng.random::<f64>() < density {
                t.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
    }
    CscMatrix::from_triplets(rows, cols, &t).unwrap()
}

pub fn random_partition(p: usize, n: usize, rng: &mut ChaCha8Rng) -> BlockPartition {
    assert!(n <= p);
    let mut sizes = vec![1usize; n];
    for _ in n..p {
        let i = rng.random_range(0..n);
        sizes[i] += 1;
    }
    BlockPartition::new(sizes).unwrap()
}

pub fn random_vec(len: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HKind {
    L1,
    Equality,
    /// ℓ1 with zero weight: `h ≡ 0`, `dom h* = {0}`.
    ZeroL1,
}

impl HKind {
    pub const ALL: [HKind; 3] = [HKind::L1, HKind::Equality, HKind::ZeroL1];
}

/// Random three-composite instance: least squares plus linear `f`, mixed
/// per-coordinate `g`, `h` of the given kind. `n ∈ [5, 50]`, `p ≤ 200`,
/// `m ≤ 100`.
pub fn random_instance_with(seed: u64, kind: HKind, scalar_blocks: bool) -> ProblemSpec {
    let mut r = rng(seed);
    let (n, p) = if scalar_blocks {
        let n = r.random_range(5..=50);
        (n, n)
    } else {
        let n = r.random_range(5..=50);
        (n, r.random_range(n.max(10)..=200))
    };
    let m = r.random_range(5..=100);
    let rows_a = r.random_range(3..=40);
    let partition = if scalar_blocks {
        BlockPartition::scalar(p).unwrap()
    } else {
        random_partition(p, n, &mut r)
    };
    let mm = random_sparse(m, p, 0.1, &mut r);
    let b = random_vec(m, 1.0, &mut r);
    let w = random_vec(p, 0.1, &mut r);
    let f = SmoothPart::least_squares(BlockSparseMatrix::new(mm, partition.clone()).unwrap(), b)
        .unwrap()
        .with_linear(w)
        .unwrap();
    let terms = (0..p)
        .map(|j| match j % 3 {
            0 => CoordTerm::L1(0.05),
            1 => CoordTerm::Box { lo: -1.0, hi: 1.0 },
            _ => CoordTerm::Zero,
        })
        .collect();
    let g = SeparablePart::from_terms(partition.clone(), terms).unwrap();
    let a = random_sparse(rows_a, p, 0.05, &mut r);
    let h = match kind {
        HKind::L1 => ConjugatePart::l1(0.5, rows_a).unwrap(),
        HKind::ZeroL1 => ConjugatePart::l1(0.0, rows_a).unwrap(),
        HKind::Equality => ConjugatePart::equality(random_vec(rows_a, 0.5, &mut r)),
    };
    let x0 = random_vec(p, 0.5, &mut r)
        .into_iter()
        .enumerate()
        .map(|(j, v)| if j % 3 == 1 { v.clamp(-1.0, 1.0) } else { v })
        .collect();
    ProblemSpec::new(f, g, h, BlockSparseMatrix::new(a, partition).unwrap(), x0).unwrap()
}

pub fn random_instance(seed: u64, lipschitz_h: bool) -> ProblemSpec {
    random_instance_with(seed, if lipschitz_h { HKind::L1 } else { HKind::Equality }, false)
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    diff / scale
}
