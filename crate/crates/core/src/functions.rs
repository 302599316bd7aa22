//! The three function classes of the template `f(x) + g(x) + h(Ax)`.
//!
//! * [`SmoothPart`]: `f`, a least-squares term `½‖Mx − b‖²` plus an optional
//!   linear term `⟨w, x⟩`, with per-block gradient Lipschitz constants.
//! * [`SeparablePart`]: `g`, coordinate-separable with a closed-form prox.
//! * [`ConjugatePart`]: `h`, accessed only through the prox of its conjugate.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use crate::blocks::{BlockPartition, BlockSparseMatrix};
use crate::error::{check_len, Result, SmartcdError};

/// Slack used when evaluating indicator functions at floating-point points.
pub const INDICATOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub matrix: BlockSparseMatrix,
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothKind {
    Zero,
    Linear,
    LeastSquares,
    /// Least squares plus a linear term (the dual SVM objective).
    LeastSquaresLinear,
}

/// Smooth convex `f(x) = ½‖Mx − b‖² + ⟨w, x⟩`, either part optional.
#[derive(Debug, Clone)]
pub struct SmoothPart {
    partition: BlockPartition,
    quadratic: Option<LeastSquares>,
    linear: Option<Vec<f64>>,
    lhat: Vec<f64>,
}

impl SmoothPart {
    pub fn zero(partition: BlockPartition) -> Self {
        let lhat = vec![0.0; partition.len()];
        Self {
            partition,
            quadratic: None,
            linear: None,
            lhat,
        }
    }

    pub fn linear(partition: BlockPartition, w: Vec<f64>) -> Result<Self> {
        check_len("linear term", partition.dim(), w.len())?;
        let mut f = Self::zero(partition);
        f.linear = Some(w);
        Ok(f)
    }

    pub fn least_squares(matrix: BlockSparseMatrix, target: Vec<f64>) -> Result<Self> {
        check_len("least-squares target", matrix.rows(), target.len())?;
        let partition = matrix.partition().clone();
        let lhat = matrix.block_norms().iter().map(|n| n * n).collect();
        Ok(Self {
            partition,
            quadratic: Some(LeastSquares { matrix, target }),
            linear: None,
            lhat,
        })
    }

    /// Adds `⟨w, x⟩` to the function.
    pub fn with_linear(mut self, w: Vec<f64>) -> Result<Self> {
        check_len("linear term", self.partition.dim(), w.len())?;
        self.linear = Some(w);
        Ok(self)
    }

    pub fn kind(&self) -> SmoothKind {
        match (&self.quadratic, &self.linear) {
            (None, None) => SmoothKind::Zero,
            (None, Some(_)) => SmoothKind::Linear,
            (Some(_), None) => SmoothKind::LeastSquares,
            (Some(_), Some(_)) => SmoothKind::LeastSquaresLinear,
        }
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn quadratic(&self) -> Option<&LeastSquares> {
        self.quadratic.as_ref()
    }

    pub fn linear_term(&self) -> Option<&[f64]> {
        self.linear.as_deref()
    }

    /// Per-block Lipschitz constants `L̂_i = ‖M_i‖²`.
    pub fn lhat(&self) -> &[f64] {
        &self.lhat
    }

    /// Length of the residual image `Mx` (zero without a quadratic part).
    pub fn image_dim(&self) -> usize {
        self.quadratic.as_ref().map_or(0, |q| q.matrix.rows())
    }

    /// The residual image `Mx`.
    pub fn image(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("point", self.partition.dim(), x.len())?;
        match &self.quadratic {
            Some(q) => q.matrix.matrix().apply(x),
            None => Ok(Vec::new()),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let image = self.image(x)?;
        Ok(self.value_from_image(&image, x))
    }

    /// `f(x)` given the maintained image `Mx`.
    pub fn value_from_image(&self, image: &[f64], x: &[f64]) -> f64 {
        let quad = self.quadratic.as_ref().map_or(0.0, |q| {
            0.5 * image
                .iter()
                .zip(&q.target)
                .map(|(r, b)| (r - b) * (r - b))
                .sum::<f64>()
        });
        let lin = self
            .linear
            .as_ref()
            .map_or(0.0, |w| w.iter().zip(x).map(|(a, b)| a * b).sum());
        quad + lin
    }

    /// `∇f(x)` over all coordinates.
    pub fn grad_full(&self, x: &[f64]) -> Result<Vec<f64>> {
        let image = self.image(x)?;
        let mut g = vec![0.0; self.partition.dim()];
        if let Some(q) = &self.quadratic {
            let resid: Vec<f64> = image.iter().zip(&q.target).map(|(r, b)| r - b).collect();
            q.matrix.matrix().tr_mul_vec(&resid, &mut g)?;
        }
        if let Some(w) = &self.linear {
            g.iter_mut().zip(w).for_each(|(a, b)| *a += b);
        }
        Ok(g)
    }

    /// `∇_i f` from the caller-maintained image `Mx`; touches only the
    /// nonzeros of `M_i`.
    pub fn grad_block(&self, image: &[f64], i: usize, out: &mut [f64]) -> Result<()> {
        self.partition.check_block(i)?;
        check_len("block gradient output", self.partition.size(i), out.len())?;
        check_len("residual image", self.image_dim(), image.len())?;
        self.grad_block_shifted(image, 1.0, None, self.partition.range(i), out);
        Ok(())
    }

    /// `∇_i f` at a point whose image is `scale * image + extra`. Used by the
    /// residual-maintaining solver, which stores `Mu` and `Mz̃` separately.
    #[inline]
    pub(crate) fn grad_block_shifted(
        &self,
        image: &[f64],
        scale: f64,
        extra: Option<&[f64]>,
        range: Range<usize>,
        out: &mut [f64],
    ) {
        match &self.quadratic {
            Some(q) => {
                let m = q.matrix.matrix();
                for (o, j) in out.iter_mut().zip(range.clone()) {
                    let (idx, val) = m.col(j);
                    *o = match extra {
                        Some(e) => idx
                            .iter()
                            .zip(val)
                            .map(|(&r, &v)| v * (scale * image[r] + e[r] - q.target[r]))
                            .sum(),
                        None => idx
                            .iter()
                            .zip(val)
                            .map(|(&r, &v)| v * (scale * image[r] - q.target[r]))
                            .sum(),
                    };
                }
            }
            None => out.iter_mut().for_each(|o| *o = 0.0),
        }
        if let Some(w) = &self.linear {
            out.iter_mut().zip(&w[range]).for_each(|(o, wj)| *o += wj);
        }
    }

    /// Nonzeros read by one block gradient.
    pub fn block_nnz(&self, i: usize) -> usize {
        self.quadratic.as_ref().map_or(0, |q| q.matrix.block_nnz(i))
    }

    pub fn repartition(&self, partition: BlockPartition) -> Result<Self> {
        check_len("partition dimension", self.partition.dim(), partition.dim())?;
        let mut f = match &self.quadratic {
            Some(q) => Self::least_squares(q.matrix.repartition(partition)?, q.target.clone())?,
            None => Self::zero(partition),
        };
        f.linear = self.linear.clone();
        Ok(f)
    }
}

/// A user-supplied scalar term with a closed-form prox.
pub trait ScalarProx: Send + Sync {
    fn value(&self, u: f64) -> f64;
    /// `argmin_u { term(u) + (1/(2·step))(u − v)² }`
    fn prox(&self, v: f64, step: f64) -> f64;
}

/// One coordinate's term of the separable `g`.
#[derive(Clone)]
pub enum CoordTerm {
    Zero,
    /// `weight · |u|`
    L1(f64),
    /// Indicator of `[lo, hi]`.
    Box { lo: f64, hi: f64 },
    /// Indicator of `u ≥ 0`.
    NonNeg,
    Custom(Arc<dyn ScalarProx>),
}

impl fmt::Debug for CoordTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoordTerm::Zero => write!(f, "Zero"),
            CoordTerm::L1(w) => write!(f, "L1({w})"),
            CoordTerm::Box { lo, hi } => write!(f, "Box[{lo}, {hi}]"),
            CoordTerm::NonNeg => write!(f, "NonNeg"),
            CoordTerm::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl CoordTerm {
    pub fn value(&self, u: f64) -> f64 {
        match self {
            CoordTerm::Zero => 0.0,
            CoordTerm::L1(w) => w * u.abs(),
            CoordTerm::Box { lo, hi } => {
                let tol = INDICATOR_TOL * (1.0 + lo.abs().max(hi.abs()));
                if u >= lo - tol && u <= hi + tol {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            CoordTerm::NonNeg => {
                if u >= -INDICATOR_TOL {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            CoordTerm::Custom(t) => t.value(u),
        }
    }

    #[inline]
    pub fn prox(&self, v: f64, step: f64) -> f64 {
        match self {
            CoordTerm::Zero => v,
            CoordTerm::L1(w) => soft_threshold(v, w * step),
            CoordTerm::Box { lo, hi } => v.clamp(*lo, *hi),
            CoordTerm::NonNeg => v.max(0.0),
            CoordTerm::Custom(t) => t.prox(v, step),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            CoordTerm::Zero => true,
            CoordTerm::L1(w) => *w == 0.0,
            _ => false,
        }
    }
}

#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Separable `g(x) = Σ_j g_j(x_j)`; block proxes apply coordinatewise.
#[derive(Debug, Clone)]
pub struct SeparablePart {
    partition: BlockPartition,
    terms: Vec<CoordTerm>,
}

impl SeparablePart {
    pub fn from_terms(partition: BlockPartition, terms: Vec<CoordTerm>) -> Result<Self> {
        check_len("separable terms", partition.dim(), terms.len())?;
        for (j, t) in terms.iter().enumerate() {
            match t {
                CoordTerm::L1(w) if *w < 0.0 || !w.is_finite() => {
                    return Err(SmartcdError::InvalidParameter(format!(
                        "l1 weight at coordinate {j} must be nonnegative, got {w}"
                    )))
                }
                CoordTerm::Box { lo, hi } if !(lo <= hi) => {
                    return Err(SmartcdError::InvalidParameter(format!(
                        "empty box [{lo}, {hi}] at coordinate {j}"
                    )))
                }
                _ => {}
            }
        }
        Ok(Self { partition, terms })
    }

    pub fn zero(partition: BlockPartition) -> Self {
        let terms = vec![CoordTerm::Zero; partition.dim()];
        Self { partition, terms }
    }

    pub fn l1(partition: BlockPartition, weight: f64) -> Result<Self> {
        let terms = vec![CoordTerm::L1(weight); partition.dim()];
        Self::from_terms(partition, terms)
    }

    pub fn boxed(partition: BlockPartition, lo: &[f64], hi: &[f64]) -> Result<Self> {
        check_len("box lower bounds", partition.dim(), lo.len())?;
        check_len("box upper bounds", partition.dim(), hi.len())?;
        let terms = lo
            .iter()
            .zip(hi)
            .map(|(&lo, &hi)| CoordTerm::Box { lo, hi })
            .collect();
        Self::from_terms(partition, terms)
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn terms(&self) -> &[CoordTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(CoordTerm::is_zero)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_len("point", self.partition.dim(), x.len())?;
        Ok(self.terms.iter().zip(x).map(|(t, &u)| t.value(u)).sum())
    }

    /// `g_i(x_i)` for a block vector.
    pub fn block_value(&self, i: usize, v: &[f64]) -> Result<f64> {
        self.partition.check_block(i)?;
        check_len("block vector", self.partition.size(i), v.len())?;
        Ok(self.terms[self.partition.range(i)]
            .iter()
            .zip(v)
            .map(|(t, &u)| t.value(u))
            .sum())
    }

    /// `argmin_u { g_i(u) + (1/(2·step))‖u − v‖² }` written into `out`.
    pub fn prox_block(&self, i: usize, v: &[f64], step: f64, out: &mut [f64]) -> Result<()> {
        self.partition.check_block(i)?;
        check_len("block vector", self.partition.size(i), v.len())?;
        check_len("block output", self.partition.size(i), out.len())?;
        if !(step > 0.0) {
            return Err(SmartcdError::InvalidParameter(format!("prox step must be positive, got {step}")));
        }
        self.prox_block_unchecked(self.partition.range(i), v, step, out);
        Ok(())
    }

    #[inline]
    pub(crate) fn prox_block_unchecked(&self, range: Range<usize>, v: &[f64], step: f64, out: &mut [f64]) {
        for ((o, &vj), t) in out.iter_mut().zip(v).zip(&self.terms[range]) {
            *o = t.prox(vj, step);
        }
    }

    pub fn repartition(&self, partition: BlockPartition) -> Result<Self> {
        check_len("partition dimension", self.partition.dim(), partition.dim())?;
        Ok(Self {
            partition,
            terms: self.terms.clone(),
        })
    }
}

/// Nonsmooth `h`, represented through `h*`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConjugatePart {
    /// `h(u) = λ‖u‖₁`; `h*` is the indicator of the ∞-ball of radius `λ`.
    L1 { lambda: f64, dim: usize },
    /// `h(u) = δ_{c}(u)`; `h*(y) = ⟨c, y⟩`.
    Equality { c: Vec<f64> },
}

impl ConjugatePart {
    pub fn l1(lambda: f64, dim: usize) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(SmartcdError::InvalidParameter(format!(
                "l1 weight must be nonnegative, got {lambda}"
            )));
        }
        Ok(Self::L1 { lambda, dim })
    }

    pub fn equality(c: Vec<f64>) -> Self {
        Self::Equality { c }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::L1 { dim, .. } => *dim,
            Self::Equality { c } => c.len(),
        }
    }

    /// True when `h` is Lipschitz (bounded `dom h*`).
    pub fn is_lipschitz(&self) -> bool {
        matches!(self, Self::L1 { .. })
    }

    /// `h(u)`; the equality indicator uses [`INDICATOR_TOL`] slack.
    pub fn value(&self, u: &[f64]) -> Result<f64> {
        check_len("h argument", self.dim(), u.len())?;
        Ok(match self {
            Self::L1 { lambda, .. } => lambda * u.iter().map(|v| v.abs()).sum::<f64>(),
            Self::Equality { c } => {
                let ok = u
                    .iter()
                    .zip(c)
                    .all(|(a, b)| (a - b).abs() <= INDICATOR_TOL * (1.0 + b.abs()));
                if ok {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        })
    }

    /// `h*(y)`.
    pub fn conj_value(&self, y: &[f64]) -> Result<f64> {
        check_len("h* argument", self.dim(), y.len())?;
        Ok(match self {
            Self::L1 { lambda, .. } => {
                let slack = lambda * (1.0 + 1e-12) + 1e-300;
                if y.iter().all(|v| v.abs() <= slack) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Equality { c } => c.iter().zip(y).map(|(a, b)| a * b).sum(),
        })
    }

    /// `prox_{σh*}(v)` for one coordinate; `h` is separable in both kinds.
    #[inline]
    pub fn prox_conj_entry(&self, j: usize, v: f64, sigma: f64) -> f64 {
        match self {
            Self::L1 { lambda, .. } => v.clamp(-lambda, *lambda),
            Self::Equality { c } => v - sigma * c[j],
        }
    }

    /// `prox_{σh*}(v)`.
    pub fn prox_conj(&self, v: &[f64], sigma: f64, out: &mut [f64]) -> Result<()> {
        check_len("h* prox argument", self.dim(), v.len())?;
        check_len("h* prox output", self.dim(), out.len())?;
        if !(sigma > 0.0) {
            return Err(SmartcdError::InvalidParameter(format!("prox scale must be positive, got {sigma}")));
        }
        for (j, (o, &vj)) in out.iter_mut().zip(v).enumerate() {
            *o = self.prox_conj_entry(j, vj, sigma);
        }
        Ok(())
    }

    /// `D_{h*} = max_{y ∈ dom h*} ‖y − ẏ‖`; infinite for the equality kind.
    pub fn dual_diameter(&self, ydot: &[f64]) -> Result<f64> {
        check_len("smoothing center", self.dim(), ydot.len())?;
        Ok(match self {
            Self::L1 { lambda, .. } => ydot
                .iter()
                .map(|y| (lambda + y.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            Self::Equality { .. } => f64::INFINITY,
        })
    }

    /// `‖u − c‖` for the equality kind.
    pub fn infeasibility(&self, u: &[f64]) -> Option<f64> {
        match self {
            Self::Equality { c } => Some(
                u.iter()
                    .zip(c)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt(),
            ),
            Self::L1 { .. } => None,
        }
    }
}
