//! Quadratic smoothing of `h` around a center `ẏ`:
//!
//! `h_β(u) = max_y { ⟨u, y⟩ − h*(y) − (β/2)‖y − ẏ‖² }`
//!
//! whose maximizer is `y*_β(u) = prox_{β⁻¹h*}(ẏ + β⁻¹u)` and whose gradient
//! is `y*_β(u)`, `1/β`-Lipschitz.

use crate::error::{check_len, Result, SmartcdError};
use crate::functions::ConjugatePart;

#[derive(Debug, Clone, Copy)]
pub struct SmoothingContext<'a> {
    h: &'a ConjugatePart,
    ydot: &'a [f64],
    beta: f64,
}

impl<'a> SmoothingContext<'a> {
    pub fn new(h: &'a ConjugatePart, ydot: &'a [f64], beta: f64) -> Result<Self> {
        check_positive_beta(beta)?;
        check_len("smoothing center", h.dim(), ydot.len())?;
        Ok(Self { h, ydot, beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `y*_β(u)` written into `out`.
    pub fn smoothed_dual_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("smoothing argument", self.h.dim(), u.len())?;
        check_len("smoothed dual output", self.h.dim(), out.len())?;
        let inv = 1.0 / self.beta;
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.h.prox_conj_entry(j, self.ydot[j] + inv * u[j], inv);
        }
        Ok(())
    }

    /// `y*_β(u)`.
    pub fn smoothed_dual(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.h.dim()];
        self.smoothed_dual_into(u, &mut out)?;
        Ok(out)
    }

    /// `h_β(u)` together with its maximizer.
    pub fn value_and_dual(&self, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        let y = self.smoothed_dual(u)?;
        let inner: f64 = u.iter().zip(&y).map(|(a, b)| a * b).sum();
        // For the l1 kind y* stays in dom h* by construction, so h*(y*) = 0.
        let conj = match self.h {
            ConjugatePart::L1 { .. } => 0.0,
            ConjugatePart::Equality { c } => c.iter().zip(&y).map(|(a, b)| a * b).sum(),
        };
        let prox_term: f64 = y
            .iter()
            .zip(self.ydot)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok((inner - conj - 0.5 * self.beta * prox_term, y))
    }

    /// `h_β(u)`.
    pub fn h_beta_value(&self, u: &[f64]) -> Result<f64> {
        self.value_and_dual(u).map(|(v, _)| v)
    }
}

fn check_positive_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(SmartcdError::InvalidParameter(format!(
            "smoothness parameter must be positive, got {beta}"
        )))
    }
}

/// `B_i = L̂_i + ‖A_i‖²/β`, the block Lipschitz constant of `∇ψ_β`.
pub fn lipschitz_b(lhat: f64, norm_a: f64, beta: f64) -> Result<f64> {
    check_positive_beta(beta)?;
    Ok(lhat + norm_a * norm_a / beta)
}
