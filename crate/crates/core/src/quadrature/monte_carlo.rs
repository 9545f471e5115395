use alloc::vec;

use libm::{exp, log1p, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EvalResult;
use crate::{Error, Result};

/// Minimum sample count accepted by the oracle.
pub const MIN_SAMPLES: usize = 10_000;

/// One coordinate of a Monte-Carlo box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McAxis {
    /// Uniform proposal on `[lower, upper]`.
    Finite { lower: f64, upper: f64 },
    /// Proposal `rate·e^{-rate(x-lower)}` on `[lower, ∞)`.
    SemiInfinite { lower: f64, rate: f64 },
}

impl McAxis {
    fn validate(&self) -> Result<()> {
        match *self {
            McAxis::Finite { lower, upper } if lower.is_finite() && upper.is_finite() && lower < upper => Ok(()),
            McAxis::SemiInfinite { lower, rate } if lower.is_finite() && rate > 0.0 && rate.is_finite() => Ok(()),
            _ => Err(Error::InvalidPlan("Monte-Carlo axis must be a non-empty interval with positive rate")),
        }
    }

    /// Maps `u ∈ [0,1)` to a sample and returns `(x, 1/proposal density)`.
    fn sample(&self, u: f64) -> (f64, f64) {
        match *self {
            McAxis::Finite { lower, upper } => (lower + (upper - lower) * u, upper - lower),
            McAxis::SemiInfinite { lower, rate } => {
                let y = -log1p(-u) / rate;
                (lower + y, exp(rate * y) / rate)
            }
        }
    }
}

/// Importance-sampled estimate of `∫ f` over the product of `axes` with `n`
/// samples from a ChaCha8 stream seeded by `seed`. The error estimate is one
/// standard error of the mean.
pub fn monte_carlo_oracle<F>(f: F, axes: &[McAxis], seed: u64, n: usize) -> Result<EvalResult>
where
    F: Fn(&[f64]) -> f64,
{
    try_monte_carlo(|x: &[f64]| Ok(f(x)), axes, seed, n)
}

pub(super) fn try_monte_carlo<F>(f: F, axes: &[McAxis], seed: u64, n: usize) -> Result<EvalResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if n < MIN_SAMPLES {
        return Err(Error::InvalidPlan("Monte-Carlo oracle needs at least 10^4 samples"));
    }
    if axes.is_empty() {
        return Err(Error::InvalidPlan("Monte-Carlo domain has no axes"));
    }
    for axis in axes {
        axis.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; axes.len()];
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        let mut weight = 1.0;
        for (xi, axis) in x.iter_mut().zip(axes) {
            let u: f64 = rng.random();
            let (s, w) = axis.sample(u);
            *xi = s;
            weight *= w;
        }
        let fx = f(&x)?;
        let sample = if fx == 0.0 { 0.0 } else { fx * weight };
        if !sample.is_finite() {
            return Err(Error::NonFinite { x: x[0] });
        }
        let delta = sample - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (sample - mean);
    }
    let variance = m2 / (n - 1) as f64;
    let err = sqrt(variance / n as f64);
    Ok(EvalResult {
        value: mean,
        err_estimate: err,
        n_evals: n,
        converged: err.is_finite(),
    })
}
