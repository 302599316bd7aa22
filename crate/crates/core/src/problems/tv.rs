use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::difference::{difference_operator, GridDims};
use super::{Family, ProblemSpec};
use crate::blocks::{BlockPartition, BlockSparseMatrix, CscMatrix};
use crate::error::{check_len, Result, SmartcdError};
use crate::functions::{ConjugatePart, SeparablePart, SmoothPart};
use crate::schedule::seeded_rng;

/// `min ½‖Mx − b‖² + λr‖x‖₁ + λ(1−r)‖Dx‖₁` with anisotropic TV, mapped as
/// `f` least squares, `g = λr‖·‖₁`, `h = λ(1−r)‖·‖₁` and `A = D`.
pub fn tv_l1_least_squares(m: CscMatrix, b: Vec<f64>, lambda: f64, r: f64, dims: GridDims) -> Result<ProblemSpec> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(SmartcdError::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(SmartcdError::InvalidParameter(format!("r must lie in [0, 1], got {r}")));
    }
    check_len("columns of M vs grid size", dims.len(), m.cols())?;
    check_len("observations", m.rows(), b.len())?;
    let p = m.cols();
    let partition = BlockPartition::scalar(p)?;
    let d = difference_operator(dims)?;
    let rows = d.rows();
    let f = SmoothPart::least_squares(BlockSparseMatrix::new(m, partition.clone())?, b)?;
    let g = SeparablePart::l1(partition.clone(), lambda * r)?;
    let h = ConjugatePart::l1(lambda * (1.0 - r), rows)?;
    let a = BlockSparseMatrix::new(d, partition)?;
    let mut spec = ProblemSpec::new(f, g, h, a, vec![0.0; p])?;
    spec.family = Family::TvL1 { lambda, r };
    Ok(spec)
}

/// Sum of `pieces` random axis-aligned boxes with Gaussian levels.
pub fn piecewise_constant_signal<R: Rng>(dims: GridDims, pieces: usize, rng: &mut R) -> Vec<f64> {
    let shape = dims.shape();
    let total = dims.len();
    let mut x = vec![0.0; total];
    for _ in 0..pieces {
        let bounds: Vec<(usize, usize)> = shape
            .iter()
            .map(|&s| {
                let a = rng.random_range(0..s);
                let b = rng.random_range(0..s);
                (a.min(b), a.max(b))
            })
            .collect();
        let level: f64 = StandardNormal.sample(rng);
        for (idx, v) in x.iter_mut().enumerate() {
            let mut rem = idx;
            let mut inside = true;
            for (axis, &(lo, hi)) in bounds.iter().enumerate().rev() {
                let c = rem % shape[axis];
                rem /= shape[axis];
                inside &= c >= lo && c <= hi;
            }
            if inside {
                *v += level;
            }
        }
    }
    x
}

/// Parameters of a synthetic TV-ℓ1 regression instance.
#[derive(Debug, Clone)]
pub struct SyntheticTv {
    pub dims: GridDims,
    /// Number of observations (rows of `M`).
    pub observations: usize,
    pub lambda: f64,
    pub r: f64,
    pub noise: f64,
    pub pieces: usize,
    pub seed: u64,
}

impl Default for SyntheticTv {
    fn default() -> Self {
        Self {
            dims: GridDims::D1(200),
            observations: 100,
            lambda: 0.01,
            r: 0.5,
            noise: 0.05,
            pieces: 6,
            seed: 0,
        }
    }
}

/// Gaussian design `M` with entries `N(0, 1/m)`, piecewise-constant ground
/// truth and noisy observations. Returns the instance and the ground truth.
pub fn synthetic_tv(cfg: &SyntheticTv) -> Result<(ProblemSpec, Vec<f64>)> {
    if cfg.observations == 0 {
        return Err(SmartcdError::InvalidParameter("need at least one observation".into()));
    }
    let mut rng = seeded_rng(cfg.seed);
    let p = cfg.dims.len();
    let truth = piecewise_constant_signal(cfg.dims, cfg.pieces, &mut rng);
    let scale = 1.0 / (cfg.observations as f64).sqrt();
    let mut triplets = Vec::with_capacity(cfg.observations * p);
    for j in 0..p {
        for i in 0..cfg.observations {
            let v: f64 = StandardNormal.sample(&mut rng);
            triplets.push((i, j, v * scale));
        }
    }
    let m = CscMatrix::from_triplets(cfg.observations, p, &triplets)?;
    let mut b = m.apply(&truth)?;
    for bi in &mut b {
        let e: f64 = StandardNormal.sample(&mut rng);
        *bi += cfg.noise * e;
    }
    let spec = tv_l1_least_squares(m, b, cfg.lambda, cfg.r, cfg.dims)?;
    Ok((spec, truth))
}
