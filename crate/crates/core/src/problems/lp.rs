use super::{Family, KnownOptimum, ProblemSpec, Provenance};
use crate::blocks::{BlockPartition, BlockSparseMatrix, CscMatrix};
use crate::error::{Result, SmartcdError};
use crate::functions::{ConjugatePart, CoordTerm, SeparablePart, SmoothPart};

/// Degenerate LP
///
/// ```text
/// min 2 x_p  s.t.  Σ_{k<p} x_k = 1,
///                  x_p − Σ_{k<p} x_k = 0   (repeated d times),
///                  x_p ≥ 0
/// ```
///
/// mapped as `f = 2x_p`, `g = δ(x_p ≥ 0)`, `h = δ_{c}` with `A ∈ R^{(d+1)×p}`
/// and `c = e_0`. The two constraint families force `x_p = 1`, so `F* = 2`.
pub fn degenerate_lp(p: usize, d: usize) -> Result<ProblemSpec> {
    if p < 2 || d < 1 {
        return Err(SmartcdError::InvalidParameter(format!(
            "degenerate LP needs p >= 2 and d >= 1, got p={p}, d={d}"
        )));
    }
    let last = p - 1;
    let mut triplets = Vec::with_capacity((d + 1) * p);
    for k in 0..last {
        triplets.push((0, k, 1.0));
    }
    for row in 1..=d {
        for k in 0..last {
            triplets.push((row, k, -1.0));
        }
        triplets.push((row, last, 1.0));
    }
    let partition = BlockPartition::scalar(p)?;
    let a = BlockSparseMatrix::new(CscMatrix::from_triplets(d + 1, p, &triplets)?, partition.clone())?;

    let mut w = vec![0.0; p];
    w[last] = 2.0;
    let f = SmoothPart::linear(partition.clone(), w)?;

    let mut terms = vec![CoordTerm::Zero; p];
    terms[last] = CoordTerm::NonNeg;
    let g = SeparablePart::from_terms(partition, terms)?;

    let mut c = vec![0.0; d + 1];
    c[0] = 1.0;
    let h = ConjugatePart::equality(c);

    let mut xstar = vec![1.0 / last as f64; p];
    xstar[last] = 1.0;
    // Lagrange multipliers: y_0 = −2 and the d repeated rows share −2 equally.
    let mut ystar = vec![-2.0 / d as f64; d + 1];
    ystar[0] = -2.0;

    let mut spec = ProblemSpec::new(f, g, h, a, vec![0.0; p])?;
    spec.known_optimum = Some(KnownOptimum {
        value: 2.0,
        point: Some(xstar),
        provenance: Provenance::Analytic,
    });
    spec.known_dual = Some(ystar);
    spec.family = Family::DegenerateLp { p, d };
    spec.audit()?;
    Ok(spec)
}
