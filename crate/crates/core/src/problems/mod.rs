//! Problem instances of `min_x f(x) + g(x) + h(Ax)` and the builders for the
//! benchmark families: a degenerate LP, TV-ℓ1 regression and the dual SVM
//! with bias.

mod difference;
mod libsvm;
mod lp;
mod svm;
mod tv;

pub use difference::{difference_operator, GridDims};
pub use libsvm::{parse_libsvm, parse_libsvm_str, write_libsvm, LabeledData};
pub use lp::degenerate_lp;
pub use svm::{svm_duality_gap, svm_dual, svm_primal_objective, synthetic_separable, SvmData};
pub use tv::{piecewise_constant_signal, synthetic_tv, tv_l1_least_squares, SyntheticTv};

use crate::blocks::{BlockPartition, BlockSparseMatrix};
use crate::error::{check_len, Result};
use crate::functions::{ConjugatePart, SeparablePart, SmoothPart};

/// Where a recorded optimal value came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Derived in closed form from the problem structure.
    Analytic,
    /// Produced by a long deterministic reference run.
    Oracle { iterations: usize, accuracy: f64 },
}

#[derive(Debug, Clone)]
pub struct KnownOptimum {
    pub value: f64,
    pub point: Option<Vec<f64>>,
    pub provenance: Provenance,
}

/// Which builder produced the instance; carries data the metrics need.
#[derive(Debug, Clone)]
pub enum Family {
    Generic,
    DegenerateLp { p: usize, d: usize },
    TvL1 { lambda: f64, r: f64 },
    SvmDual(SvmData),
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub f: SmoothPart,
    pub g: SeparablePart,
    pub h: ConjugatePart,
    pub a: BlockSparseMatrix,
    pub x0: Vec<f64>,
    pub known_optimum: Option<KnownOptimum>,
    /// A dual solution for the equality-constrained kind, when known.
    pub known_dual: Option<Vec<f64>>,
    pub family: Family,
}

/// Objective, feasibility and (SVM only) duality gap at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// `F(x)` with the true `h`. For the equality kind only the finite part
    /// `f(x) + g(x)` is reported; feasibility is reported separately.
    pub objective: f64,
    /// `‖Ax − c‖` for the equality kind.
    pub feasibility: Option<f64>,
    pub duality_gap: Option<f64>,
}

impl ProblemSpec {
    pub fn new(
        f: SmoothPart,
        g: SeparablePart,
        h: ConjugatePart,
        a: BlockSparseMatrix,
        x0: Vec<f64>,
    ) -> Result<Self> {
        let spec = Self {
            f,
            g,
            h,
            a,
            x0,
            known_optimum: None,
            known_dual: None,
            family: Family::Generic,
        };
        spec.audit()?;
        Ok(spec)
    }

    /// Dimensional consistency of every component.
    pub fn audit(&self) -> Result<()> {
        let part = self.a.partition();
        check_len("f partition dimension", part.dim(), self.f.partition().dim())?;
        check_len("g partition dimension", part.dim(), self.g.partition().dim())?;
        check_len("f block count", part.len(), self.f.partition().len())?;
        check_len("g block count", part.len(), self.g.partition().len())?;
        if self.f.partition() != part || self.g.partition() != part {
            return Err(crate::error::SmartcdError::InvalidPartition(
                "f, g and A must share one block partition".into(),
            ));
        }
        check_len("h dimension vs rows of A", self.a.rows(), self.h.dim())?;
        check_len("initial point", part.dim(), self.x0.len())?;
        if let Some(opt) = &self.known_optimum {
            if let Some(x) = &opt.point {
                check_len("known solution", part.dim(), x.len())?;
            }
        }
        if let Some(y) = &self.known_dual {
            check_len("known dual", self.a.rows(), y.len())?;
        }
        Ok(())
    }

    pub fn partition(&self) -> &BlockPartition {
        self.a.partition()
    }

    pub fn dim(&self) -> usize {
        self.partition().dim()
    }

    pub fn blocks(&self) -> usize {
        self.partition().len()
    }

    /// Rows of `A`.
    pub fn dual_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn known_fstar(&self) -> Option<f64> {
        self.known_optimum.as_ref().map(|o| o.value)
    }

    /// The same problem under another block partition.
    pub fn repartition(&self, partition: BlockPartition) -> Result<Self> {
        let mut out = self.clone();
        out.f = self.f.repartition(partition.clone())?;
        out.g = self.g.repartition(partition.clone())?;
        out.a = self.a.repartition(partition)?;
        out.audit()?;
        Ok(out)
    }

    pub fn metrics(&self, x: &[f64]) -> Result<Metrics> {
        check_len("point", self.dim(), x.len())?;
        let ax = self.a.matrix().apply(x)?;
        let mut objective = self.f.value(x)? + self.g.value(x)?;
        let feasibility = self.h.infeasibility(&ax);
        if feasibility.is_none() {
            objective += self.h.value(&ax)?;
        }
        let duality_gap = match &self.family {
            Family::SvmDual(data) => Some(svm_duality_gap(data, x)?),
            _ => None,
        };
        Ok(Metrics {
            objective,
            feasibility,
            duality_gap,
        })
    }

    /// `F(x)`, reporting only the finite part for the equality kind.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        self.metrics(x).map(|m| m.objective)
    }
}
