//! One-dimensional adaptive quadrature, nested 2-D/3-D integration and a
//! seeded Monte-Carlo oracle.
//!
//! Semi-infinite intervals are split in two and the tail is compactified
//! before subdivision.
//! Every integrator is deterministic: panels are refined in a fixed order and
//! the final sum is taken over panels sorted by position.

mod adaptive;
mod double_exp;
mod monte_carlo;
mod nested;

use libm::{fabs, log};

pub use monte_carlo::{monte_carlo_oracle, McAxis, MIN_SAMPLES};
pub use nested::{integrate_nd, try_integrate_nd, try_integrate_nd_within};

use crate::{Error, Result};

/// Smallest relative tolerance a plan may request.
pub const MIN_REL_TOL: f64 = 1e-14;

/// Smallest evaluation budget (one Kronrod panel).
pub const MIN_EVALS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Globally adaptive Gauss–Kronrod (10/21) subdivision.
    Adaptive,
    /// Tanh-sinh with step halving.
    DoubleExponential,
    /// Importance-sampled Monte Carlo (1-D plans only; see [`monte_carlo_oracle`]).
    MonteCarlo,
}

/// Compactification of `[lower, ∞)`; ignored on finite intervals.
///
/// The range is split at `lower + scale`. The head is integrated directly and
/// the tail through a variable `u ∈ (0, 1]` that sends `u → 0` to infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mapping {
    /// Same as `Rational { scale: 1.0 }` on semi-infinite intervals.
    None,
    /// Tail `x = lower + scale/u`, suited to power-law decay.
    Rational { scale: f64 },
    /// Tail `x = lower + scale(1 - ln u)`, suited to `e^{-x/scale}` decay.
    Exponential { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePlan {
    pub method: Method,
    pub lower: f64,
    /// May be `f64::INFINITY`.
    pub upper: f64,
    pub mapping: Mapping,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    /// Used by [`Method::MonteCarlo`] only.
    pub rng_seed: u64,
}

impl QuadraturePlan {
    pub fn new(lower: f64, upper: f64) -> Self {
        QuadraturePlan {
            method: Method::Adaptive,
            lower,
            upper,
            mapping: Mapping::None,
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_evals: 50_000,
            rng_seed: 0,
        }
    }

    /// `[lower, ∞)` with the default rational compactification.
    pub fn semi_infinite(lower: f64) -> Self {
        Self::new(lower, f64::INFINITY)
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_mapping(mut self, mapping: Mapping) -> Self {
        self.mapping = mapping;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn is_semi_infinite(&self) -> bool {
        self.upper == f64::INFINITY
    }

    /// Tolerance a result of magnitude `value` must meet.
    pub fn target(&self, value: f64) -> f64 {
        (self.rel_tol * fabs(value)).max(self.abs_tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= MIN_REL_TOL) {
            return Err(Error::InvalidPlan("rel_tol must be at least 1e-14"));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::InvalidPlan("abs_tol must be non-negative"));
        }
        if self.max_evals < MIN_EVALS {
            return Err(Error::InvalidPlan("max_evals must be at least 15"));
        }
        if !self.lower.is_finite() {
            return Err(Error::InvalidPlan("lower limit must be finite"));
        }
        if !(self.lower < self.upper) {
            return Err(Error::InvalidPlan("lower limit must be below upper limit"));
        }
        match self.mapping {
            Mapping::Rational { scale } | Mapping::Exponential { scale } if !(scale > 0.0 && scale.is_finite()) => {
                Err(Error::InvalidPlan("mapping scale must be positive and finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Outcome of one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub err_estimate: f64,
    pub n_evals: usize,
    pub converged: bool,
}

impl EvalResult {
    pub fn exact(value: f64) -> Self {
        EvalResult {
            value,
            err_estimate: 0.0,
            n_evals: 0,
            converged: true,
        }
    }

    /// Sum of two independent results; errors add.
    pub fn combine(self, other: EvalResult) -> Self {
        EvalResult {
            value: self.value + other.value,
            err_estimate: self.err_estimate + other.err_estimate,
            n_evals: self.n_evals + other.n_evals,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        EvalResult {
            value: self.value * factor,
            err_estimate: self.err_estimate * fabs(factor),
            ..self
        }
    }

    pub fn rel_error_to(&self, truth: f64) -> f64 {
        fabs(self.value - truth) / fabs(truth)
    }
}

/// One piece of the integration range in its own variable `t`.
///
/// A semi-infinite range is split at `lower + scale` into a linear head and a
/// tail parametrised by `u ∈ (0, 1]` with the point at infinity at `u = 0`,
/// where floating-point resolution is finest.
#[derive(Debug, Clone, Copy)]
enum Piece {
    /// `x = offset + t`, `t ∈ [0, len]`.
    Linear { offset: f64, len: f64 },
    /// `x = lower + scale/u`.
    RationalTail { lower: f64, scale: f64 },
    /// `x = lower + scale(1 - ln u)`.
    ExponentialTail { lower: f64, scale: f64 },
}

impl Piece {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            Piece::Linear { len, .. } => (0.0, len),
            _ => (0.0, 1.0),
        }
    }

    /// `(x(t), dx/dt)`, or `None` where the map leaves the representable range.
    fn map(&self, t: f64) -> Option<(f64, f64)> {
        let (x, jac) = match *self {
            Piece::Linear { offset, .. } => (offset + t, 1.0),
            Piece::RationalTail { lower, scale } => (lower + scale / t, scale / (t * t)),
            Piece::ExponentialTail { lower, scale } => (lower + scale * (1.0 - log(t)), scale / t),
        };
        (x.is_finite() && jac.is_finite()).then_some((x, jac))
    }
}

fn pieces(plan: &QuadraturePlan) -> ([Piece; 2], usize) {
    let lower = plan.lower;
    if !plan.is_semi_infinite() {
        let head = Piece::Linear {
            offset: lower,
            len: plan.upper - lower,
        };
        return ([head; 2], 1);
    }
    let (scale, tail) = match plan.mapping {
        Mapping::None => (1.0, Piece::RationalTail { lower, scale: 1.0 }),
        Mapping::Rational { scale } => (scale, Piece::RationalTail { lower, scale }),
        Mapping::Exponential { scale } => (scale, Piece::ExponentialTail { lower, scale }),
    };
    (
        [
            Piece::Linear {
                offset: lower,
                len: scale,
            },
            tail,
        ],
        2,
    )
}

/// Integrand value with an attached non-negative error density that is
/// integrated alongside it (the inner error of a nested integral).
pub(crate) type Pair = (f64, f64);

pub(crate) struct Outcome {
    pub value: f64,
    pub err: f64,
    pub n_evals: usize,
}

/// Integrates `g` (value, error-density) over the plan's interval.
pub(crate) fn integrate_pair<G>(g: &G, plan: &QuadraturePlan) -> Result<EvalResult>
where
    G: Fn(f64) -> Result<Pair>,
{
    plan.validate()?;
    let (all, count) = pieces(plan);
    let pieces = &all[..count];
    let mut bounds = [(0.0, 0.0); 2];
    for (b, p) in bounds.iter_mut().zip(pieces) {
        *b = p.bounds();
    }
    let mapped = |piece: usize, t: f64| -> Result<Pair> {
        let Some((x, jac)) = pieces[piece].map(t) else {
            return Ok((0.0, 0.0));
        };
        // Nodes of sub-ulp panels can round onto a finite endpoint. The
        // unresolved sliver is charged to the error, sized by the integrand
        // at the nearest interior point.
        if x <= plan.lower || x >= plan.upper {
            let inner = if x <= plan.lower { plan.lower.next_up() } else { plan.upper.next_down() };
            let (v, aux) = g(inner)?;
            if !v.is_finite() || !aux.is_finite() {
                return Err(Error::NonFinite { x: inner });
            }
            return Ok((0.0, (fabs(v) + fabs(aux)) * jac));
        }
        let (v, aux) = g(x)?;
        if !v.is_finite() || !aux.is_finite() {
            return Err(Error::NonFinite { x });
        }
        if v == 0.0 && aux == 0.0 {
            return Ok((0.0, 0.0));
        }
        Ok((v * jac, fabs(aux) * jac))
    };
    let bounds = &bounds[..count];
    let out = match plan.method {
        Method::Adaptive => adaptive::integrate(&mapped, bounds, plan)?,
        Method::DoubleExponential => double_exp::integrate(&mapped, bounds, plan, plan.max_evals)?,
        Method::MonteCarlo => {
            return Err(Error::InvalidPlan(
                "Monte-Carlo plans cannot be nested; use monte_carlo_oracle",
            ))
        }
    };
    Ok(EvalResult {
        value: out.value,
        err_estimate: out.err,
        n_evals: out.n_evals,
        converged: out.value.is_finite() && out.err <= plan.target(out.value),
    })
}

/// Integrates `f` over the plan's interval.
pub fn integrate_1d<F>(f: F, plan: &QuadraturePlan) -> Result<EvalResult>
where
    F: Fn(f64) -> f64,
{
    try_integrate_1d(|x| Ok(f(x)), plan)
}

/// As [`integrate_1d`] for a fallible integrand; the first error aborts.
pub fn try_integrate_1d<F>(f: F, plan: &QuadraturePlan) -> Result<EvalResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if plan.method == Method::MonteCarlo {
        plan.validate()?;
        let axis = if plan.is_semi_infinite() {
            let scale = match plan.mapping {
                Mapping::Rational { scale } | Mapping::Exponential { scale } => scale,
                Mapping::None => 1.0,
            };
            McAxis::SemiInfinite {
                lower: plan.lower,
                rate: 1.0 / scale,
            }
        } else {
            McAxis::Finite {
                lower: plan.lower,
                upper: plan.upper,
            }
        };
        let mut res = monte_carlo::try_monte_carlo(|x: &[f64]| f(x[0]), &[axis], plan.rng_seed, plan.max_evals)?;
        res.converged = res.converged && res.err_estimate <= plan.target(res.value);
        return Ok(res);
    }
    integrate_pair(&|x| f(x).map(|v| (v, 0.0)), plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_k, Order};
    use approx::assert_relative_eq;
    use core::f64::consts::PI;
    use libm::{exp, sqrt};

    #[test]
    fn plan_validation() {
        assert!(QuadraturePlan::new(0.0, 1.0).validate().is_ok());
        assert!(QuadraturePlan::new(1.0, 0.0).validate().is_err());
        assert!(QuadraturePlan::new(0.0, 1.0).with_rel_tol(1e-16).validate().is_err());
        assert!(QuadraturePlan::new(0.0, 1.0).with_max_evals(14).validate().is_err());
        assert!(QuadraturePlan::new(f64::NEG_INFINITY, 0.0).validate().is_err());
        assert!(QuadraturePlan::semi_infinite(0.0)
            .with_mapping(Mapping::Rational { scale: -1.0 })
            .validate()
            .is_err());
    }

    #[test]
    fn spec_examples_1d() {
        let plan = QuadraturePlan::semi_infinite(0.0).with_rel_tol(1e-13);
        let r = integrate_1d(|x| exp(-x), &plan).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-12);

        let r = integrate_1d(|x| bessel_k(Order::ZERO, x).unwrap(), &plan.with_rel_tol(1e-11)).unwrap();
        assert!(r.converged, "{r:?}");
        assert_relative_eq!(r.value, PI / 2.0, max_relative = 1e-10);

        let r = integrate_1d(|x| exp(-x) / sqrt(x), &plan.with_rel_tol(1e-11)).unwrap();
        assert!(r.converged, "{r:?}");
        assert_relative_eq!(r.value, sqrt(PI), max_relative = 1e-10);
    }

    #[test]
    fn double_exponential_method() {
        let plan = QuadraturePlan::new(0.0, 1.0).with_method(Method::DoubleExponential).with_rel_tol(1e-12);
        let r = integrate_1d(|x| 1.0 / sqrt(x), &plan).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-11);
        let plan = QuadraturePlan::semi_infinite(0.0).with_method(Method::DoubleExponential);
        let r = integrate_1d(|x| exp(-x) * x, &plan).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let plan = QuadraturePlan::new(0.0, 1.0).with_max_evals(30).with_rel_tol(1e-14);
        let r = integrate_1d(|x| libm::sin(200.0 * x), &plan).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let plan = QuadraturePlan::new(-1.0, 1.0);
        assert!(matches!(integrate_1d(|x| 1.0 / (x * 0.0), &plan), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn monte_carlo_plan_1d() {
        let plan = QuadraturePlan::semi_infinite(0.0)
            .with_method(Method::MonteCarlo)
            .with_max_evals(100_000)
            .with_rel_tol(1e-2)
            .with_seed(3);
        let r = integrate_1d(|x| x * exp(-x), &plan).unwrap();
        assert!((r.value - 1.0).abs() < 4.0 * r.err_estimate);
        assert_eq!(r, integrate_1d(|x| x * exp(-x), &plan).unwrap());
    }
}
