//! Homotopy parameter sequences `τ_k`, `β_k` and the nonuniform block sampler.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;

use crate::error::{Result, SmartcdError};

/// Block-selection generator: ChaCha with 8 rounds, a counter-based stream
/// cipher whose output is identical on every platform for a given seed.
pub type SolverRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SolverRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Which `τ`/`β` recursion drives the homotopy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `h` Lipschitz: `τ` from the cubic, `β ← β/(1+τ)`.
    Lipschitz,
    /// `h` an equality indicator: `τ ← τ/(1+τ)`, `β ← (1−τ)β`.
    Constrained,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(SmartcdError::InvalidParameter(format!("tau must lie in (0, 1], got {tau}")))
    }
}

#[inline]
fn cubic(tau: f64, tk2: f64) -> f64 {
    ((tau + 1.0) * tau + tk2) * tau - tk2
}

/// Unique positive root of `τ³ + τ² + τ_k²τ − τ_k² = 0`, which lies in `(0, τ_k)`.
///
/// The cubic is increasing and convex on `[0, ∞)` with value `−τ_k²` at 0 and
/// `2τ_k³` at `τ_k`. Newton starts from `τ_k/(1+τ_k)`, which agrees with the
/// root up to `O(τ_k³)`; a bisection fallback keeps every iterate inside the
/// bracket.
pub fn next_tau_lipschitz(tau_k: f64) -> Result<f64> {
    check_tau(tau_k)?;
    let tk2 = tau_k * tau_k;
    let (mut lo, mut hi) = (0.0f64, tau_k);
    let mut t = tau_k / (1.0 + tau_k);
    for _ in 0..200 {
        let v = cubic(t, tk2);
        if v > 0.0 {
            hi = hi.min(t);
        } else if v < 0.0 {
            lo = lo.max(t);
        } else {
            return Ok(t);
        }
        let d = (3.0 * t + 2.0) * t + tk2;
        let mut next = t - v / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let settled = (next - t).abs() <= 2.0 * f64::EPSILON * t;
        t = next;
        if settled || hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(t)
}

/// `τ_{k+1} = τ_k/(1 + τ_k)`.
pub fn next_tau_constrained(tau_k: f64) -> Result<f64> {
    check_tau(tau_k)?;
    Ok(tau_k / (1.0 + tau_k))
}

/// `β_{k+2}` from `β_{k+1}` and `τ_{k+1}`.
pub fn next_beta(regime: Regime, beta: f64, tau: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(SmartcdError::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    check_tau(tau)?;
    Ok(match regime {
        Regime::Lipschitz => beta / (1.0 + tau),
        Regime::Constrained => (1.0 - tau) * beta,
    })
}

/// Live `τ_k`, `β_{k+1}` pair of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    regime: Regime,
    tau0: f64,
    beta1: f64,
    tau: f64,
    beta_next: f64,
    k: usize,
}

impl Schedule {
    pub fn new(regime: Regime, tau0: f64, beta1: f64) -> Result<Self> {
        check_tau(tau0)?;
        if !(beta1 > 0.0) || !beta1.is_finite() {
            return Err(SmartcdError::InvalidParameter(format!("beta1 must be positive, got {beta1}")));
        }
        Ok(Self {
            regime,
            tau0,
            beta1,
            tau: tau0,
            beta_next: beta1,
            k: 0,
        })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    /// `τ_k`
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `β_{k+1}`
    pub fn beta_next(&self) -> f64 {
        self.beta_next
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Moves to `τ_{k+1}`, `β_{k+2}` and returns the new `τ`.
    pub fn advance(&mut self) -> Result<f64> {
        let tau = match self.regime {
            Regime::Lipschitz => next_tau_lipschitz(self.tau)?,
            Regime::Constrained => next_tau_constrained(self.tau)?,
        };
        self.beta_next = next_beta(self.regime, self.beta_next, tau)?;
        self.tau = tau;
        self.k += 1;
        Ok(tau)
    }

    /// Restart: `τ ← τ_0`, `β ← β_1`. The iteration counter keeps running.
    pub fn reset(&mut self) {
        self.tau = self.tau0;
        self.beta_next = self.beta1;
    }
}

#[derive(Debug, Clone)]
enum Table {
    Single,
    Uniform(usize),
    Cumulative(WeightedIndex<f64>),
    Alias(WeightedAliasIndex<f64>),
}

/// Above this block count the sampler switches from an inverse-CDF table to
/// an alias table.
pub const ALIAS_THRESHOLD: usize = 1024;

/// Draws block `i` with probability `q_i`.
#[derive(Debug, Clone)]
pub struct Sampler {
    q: Vec<f64>,
    tau0: f64,
    table: Table,
}

impl Sampler {
    /// `q_i = (B_i⁰)^α / Σ_j (B_j⁰)^α`.
    pub fn new(b0: &[f64], alpha: f64) -> Result<Self> {
        if b0.is_empty() {
            return Err(SmartcdError::InvalidParameter("no blocks to sample".into()));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(SmartcdError::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if let Some(i) = b0.iter().position(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(SmartcdError::InvalidParameter(format!(
                "block constant B_{i} must be positive and finite, got {}",
                b0[i]
            )));
        }
        let weights: Vec<f64> = b0.iter().map(|&b| if alpha == 0.0 { 1.0 } else { b.powf(alpha) }).collect();
        let total: f64 = weights.iter().sum();
        let q: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let tau0 = q.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
        Self::from_probabilities(q, tau0)
    }

    fn from_probabilities(q: Vec<f64>, tau0: f64) -> Result<Self> {
        let table = if q.len() == 1 {
            Table::Single
        } else if q.iter().all(|&v| v == q[0]) {
            Table::Uniform(q.len())
        } else if q.len() <= ALIAS_THRESHOLD {
            Table::Cumulative(
                WeightedIndex::new(q.iter().copied())
                    .map_err(|e| SmartcdError::InvalidParameter(format!("sampling weights: {e}")))?,
            )
        } else {
            Table::Alias(
                WeightedAliasIndex::new(q.clone())
                    .map_err(|e| SmartcdError::InvalidParameter(format!("sampling weights: {e}")))?,
            )
        };
        Ok(Self { q, tau0, table })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.q
    }

    /// `τ_0 = min_i q_i`.
    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn uses_alias_table(&self) -> bool {
        matches!(self.table, Table::Alias(_))
    }

    #[inline]
    pub fn sample(&self, rng: &mut SolverRng) -> usize {
        match &self.table {
            Table::Single => 0,
            Table::Uniform(n) => rng.random_range(0..*n),
            Table::Cumulative(w) => w.sample(rng),
            Table::Alias(w) => w.sample(rng),
        }
    }
}

/// Sampler over `q_i ∝ (B_i⁰)^α`.
pub fn build_sampler(b0: &[f64], alpha: f64) -> Result<Sampler> {
    Sampler::new(b0, alpha)
}
