use rand_distr::{Distribution, StandardNormal};

use super::libsvm::LabeledData;
use super::{Family, ProblemSpec};
use crate::blocks::{BlockPartition, BlockSparseMatrix, CscMatrix};
use crate::error::{check_len, Result, SmartcdError};
use crate::functions::{ConjugatePart, SeparablePart, SmoothPart};
use crate::schedule::seeded_rng;

/// Training data of a dual SVM instance.
#[derive(Debug, Clone)]
pub struct SvmData {
    /// `p × m`, one example per column.
    pub features: CscMatrix,
    pub labels: Vec<f64>,
    pub caps: Vec<f64>,
    pub lambda: f64,
}

/// Dual of the soft-margin SVM with bias:
///
/// ```text
/// min (1/(2λ))‖M D(b) x‖² − Σ x_i   s.t. 0 ≤ x_i ≤ C_i,  bᵀx = 0
/// ```
///
/// with `f` the quadratic plus the linear term, `g` the box, `h = δ_{0}` and
/// `A = bᵀ`. One scalar block per example.
pub fn svm_dual(features: CscMatrix, labels: Vec<f64>, caps: Vec<f64>, lambda: f64) -> Result<ProblemSpec> {
    let m = features.cols();
    check_len("labels", m, labels.len())?;
    check_len("caps", m, caps.len())?;
    if m == 0 {
        return Err(SmartcdError::InvalidParameter("no training examples".into()));
    }
    if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l != 1.0 && l != -1.0) {
        return Err(SmartcdError::Label {
            line: i + 1,
            label: l.to_string(),
        });
    }
    if let Some(&c) = caps.iter().find(|&&c| !(c > 0.0)) {
        return Err(SmartcdError::InvalidParameter(format!("caps must be positive, got {c}")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(SmartcdError::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let partition = BlockPartition::scalar(m)?;

    let mut scaled = features.clone();
    let s = 1.0 / lambda.sqrt();
    let col_scales: Vec<f64> = labels.iter().map(|b| b * s).collect();
    scaled.scale_columns(&col_scales)?;
    let f = SmoothPart::least_squares(BlockSparseMatrix::new(scaled, partition.clone())?, vec![0.0; features.rows()])?
        .with_linear(vec![-1.0; m])?;
    let g = SeparablePart::boxed(partition.clone(), &vec![0.0; m], &caps)?;
    let h = ConjugatePart::equality(vec![0.0]);
    let row: Vec<(usize, usize, f64)> = labels.iter().enumerate().map(|(j, &b)| (0, j, b)).collect();
    let a = BlockSparseMatrix::new(CscMatrix::from_triplets(1, m, &row)?, partition)?;

    let mut spec = ProblemSpec::new(f, g, h, a, vec![0.0; m])?;
    spec.family = Family::SvmDual(SvmData {
        features,
        labels,
        caps,
        lambda,
    });
    Ok(spec)
}

/// `w = (1/λ) M D(b) x`
fn primal_weights(data: &SvmData, x: &[f64]) -> Result<Vec<f64>> {
    let bx: Vec<f64> = x.iter().zip(&data.labels).map(|(a, b)| a * b / data.lambda).collect();
    data.features.apply(&bx)
}

/// `Σ C_i max(0, 1 − b_i(⟨a_i, w⟩ + w₀)) + (λ/2)‖w‖²`
pub fn svm_primal_objective(data: &SvmData, w: &[f64], w0: f64) -> Result<f64> {
    let scores = data.features.apply_tr(w)?;
    let hinge: f64 = scores
        .iter()
        .zip(&data.labels)
        .zip(&data.caps)
        .map(|((s, b), c)| c * (1.0 - b * (s + w0)).max(0.0))
        .sum();
    Ok(hinge + 0.5 * data.lambda * w.iter().map(|v| v * v).sum::<f64>())
}

/// Minimizer of the hinge sum over the bias. The sum is convex piecewise
/// linear with a breakpoint `b_i − s_i` per example, each raising the slope
/// by `C_i`; the minimum sits at the first breakpoint where the slope turns
/// nonnegative.
fn best_bias(scores: &[f64], labels: &[f64], caps: &[f64]) -> f64 {
    let mut points: Vec<(f64, f64)> = scores
        .iter()
        .zip(labels)
        .zip(caps)
        .map(|((s, b), c)| (b - s, *c))
        .collect();
    if points.is_empty() {
        return 0.0;
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut slope: f64 = -labels
        .iter()
        .zip(caps)
        .filter(|(b, _)| **b > 0.0)
        .map(|(_, c)| c)
        .sum::<f64>();
    for &(t, c) in &points {
        slope += c;
        if slope >= 0.0 {
            return t;
        }
    }
    points.last().unwrap().0
}

/// Primal objective at `w = (1/λ)MD(b)x` with the best bias, minus the dual
/// objective `Σx_i − (1/(2λ))‖MD(b)x‖²`.
pub fn svm_duality_gap(data: &SvmData, x: &[f64]) -> Result<f64> {
    check_len("dual point", data.labels.len(), x.len())?;
    let w = primal_weights(data, x)?;
    let scores = data.features.apply_tr(&w)?;
    let w0 = best_bias(&scores, &data.labels, &data.caps);
    let primal = svm_primal_objective(data, &w, w0)?;
    let dual = x.iter().sum::<f64>() - 0.5 * data.lambda * w.iter().map(|v| v * v).sum::<f64>();
    Ok(primal - dual)
}

/// Linearly separable two-class data: Gaussian features, labels from a random
/// hyperplane with offset, points closer than `margin` to it rejected.
pub fn synthetic_separable(examples: usize, features: usize, margin: f64, seed: u64) -> Result<LabeledData> {
    if examples == 0 || features == 0 {
        return Err(SmartcdError::InvalidParameter("need at least one example and one feature".into()));
    }
    let mut rng = seeded_rng(seed);
    let normal: Vec<f64> = (0..features).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    let normal: Vec<f64> = normal.iter().map(|v| v / norm).collect();
    let shift: f64 = StandardNormal.sample(&mut rng);
    let offset = 0.3 * shift;

    let mut triplets = Vec::with_capacity(examples * features);
    let mut labels = Vec::with_capacity(examples);
    let mut col = 0;
    while col < examples {
        let a: Vec<f64> = (0..features).map(|_| StandardNormal.sample(&mut rng)).collect();
        let side: f64 = a.iter().zip(&normal).map(|(x, y)| x * y).sum::<f64>() + offset;
        if side.abs() < margin {
            continue;
        }
        // Keep the classes roughly balanced.
        let label = if side > 0.0 { 1.0 } else { -1.0 };
        let positives = labels.iter().filter(|&&l| l > 0.0).count();
        let negatives = labels.len() - positives;
        if (label > 0.0 && positives >= examples.div_ceil(2)) || (label < 0.0 && negatives >= examples.div_ceil(2)) {
            continue;
        }
        triplets.extend(a.iter().enumerate().map(|(r, &v)| (r, col, v)));
        labels.push(label);
        col += 1;
    }
    Ok(LabeledData {
        features: CscMatrix::from_triplets(features, examples, &triplets)?,
        labels,
    })
}
