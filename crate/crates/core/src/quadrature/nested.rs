use core::cell::Cell;

use super::{integrate_pair, pieces, EvalResult, QuadraturePlan, MIN_EVALS, MIN_REL_TOL};
use crate::{Error, Result};

/// Each inner dimension is integrated to the enclosing tolerance divided by
/// this factor.
pub const INNER_TOL_FACTOR: f64 = 50.0;

/// Iterated integral of `f` over the product of the plans' intervals;
/// `plans[0]` is the outermost coordinate and `f` receives the point in plan
/// order. Inner errors are integrated alongside the values, so the reported
/// error is the outer estimate plus the integrated inner estimates.
pub fn integrate_nd<F>(f: F, plans: &[QuadraturePlan]) -> Result<EvalResult>
where
    F: Fn(&[f64]) -> f64,
{
    try_integrate_nd(|x: &[f64]| Ok(f(x)), plans)
}

pub fn try_integrate_nd<F>(f: F, plans: &[QuadraturePlan]) -> Result<EvalResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    nested(f, plans, None)
}

/// As [`try_integrate_nd`] with a shared budget of about `total`
/// evaluations of `f`. Minimal passes of the inner rules at every outer node
/// take at most half of it; each inner integral may refine with what is
/// left, capped by its own plan.
pub fn try_integrate_nd_within<F>(f: F, plans: &[QuadraturePlan], total: usize) -> Result<EvalResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    nested(f, plans, Some(total))
}

/// Evaluations in one unrefined pass of the rule over `plan`.
fn minimal_pass(plan: &QuadraturePlan) -> usize {
    21 * pieces(plan).1
}

fn nested<F>(f: F, plans: &[QuadraturePlan], total: Option<usize>) -> Result<EvalResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if !(2..=3).contains(&plans.len()) {
        return Err(Error::InvalidPlan("nested integration supports 2 or 3 dimensions"));
    }
    let mut effective = [plans[0]; 3];
    for d in 1..plans.len() {
        let parent = effective[d - 1];
        let mut p = plans[d];
        p.rel_tol = p.rel_tol.min(parent.rel_tol / INNER_TOL_FACTOR).max(MIN_REL_TOL);
        p.abs_tol = p.abs_tol.min(parent.abs_tol / INNER_TOL_FACTOR);
        effective[d] = p;
    }
    if let Some(total) = total {
        let inner_cost: usize = plans[1..].iter().map(minimal_pass).product();
        effective[0].max_evals = effective[0].max_evals.min((total / (2 * inner_cost)).max(MIN_EVALS));
    }
    let state = State {
        f: &f,
        plans: &effective[..plans.len()],
        calls: Cell::new(0),
        total,
        inner_ok: Cell::new(true),
    };
    let outer = state.level(0, [0.0; 3])?;
    Ok(EvalResult {
        n_evals: state.calls.get(),
        converged: outer.converged && state.inner_ok.get(),
        ..outer
    })
}

struct State<'a, F> {
    f: &'a F,
    plans: &'a [QuadraturePlan],
    calls: Cell<usize>,
    total: Option<usize>,
    inner_ok: Cell<bool>,
}

impl<F> State<'_, F>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    fn level(&self, depth: usize, point: [f64; 3]) -> Result<EvalResult> {
        let dims = self.plans.len();
        let innermost = depth + 1 == dims;
        let g = |xi: f64| {
            let mut p = point;
            p[depth] = xi;
            if innermost {
                self.calls.set(self.calls.get() + 1);
                (self.f)(&p[..dims]).map(|v| (v, 0.0))
            } else {
                let r = self.level(depth + 1, p)?;
                if !r.converged {
                    self.inner_ok.set(false);
                }
                Ok((r.value, r.err_estimate))
            }
        };
        let mut plan = self.plans[depth];
        if let (Some(total), true) = (self.total, depth > 0) {
            plan.max_evals = plan.max_evals.min(total.saturating_sub(self.calls.get()).max(MIN_EVALS));
        }
        integrate_pair(&g, &plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;
    use libm::{exp, pow};

    #[test]
    fn separable_exponential() {
        let p = QuadraturePlan::semi_infinite(0.0).with_rel_tol(1e-10);
        let r = integrate_nd(|x| exp(-x[0] - x[1]), &[p, p]).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn gaussian_quarter_plane() {
        let p = QuadraturePlan::semi_infinite(0.0).with_rel_tol(1e-10);
        let r = integrate_nd(|x| exp(-x[0] * x[0] - x[1] * x[1]), &[p, p]).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.value, PI / 4.0, max_relative = 1e-10);
    }

    #[test]
    fn three_orbital_parameter_integral_at_unit_decay() {
        let p = QuadraturePlan::semi_infinite(0.0).with_rel_tol(1e-9);
        let r = integrate_nd(|z| 4.0 * PI * PI / pow(z[0] + z[1] + 1.0, 3.0), &[p, p]).unwrap();
        assert!(r.converged, "{r:?}");
        assert_relative_eq!(r.value, 2.0 * PI * PI, max_relative = 1e-8);
    }

    #[test]
    fn three_dimensional_box() {
        let p = QuadraturePlan::new(0.0, 1.0).with_rel_tol(1e-10);
        let r = integrate_nd(|x| x[0] * x[1] * x[1] * x[2] * x[2] * x[2], &[p, p, p]).unwrap();
        assert_relative_eq!(r.value, 1.0 / 24.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_other_dimensions() {
        let p = QuadraturePlan::new(0.0, 1.0);
        assert!(integrate_nd(|_| 1.0, &[p]).is_err());
        assert!(integrate_nd(|_| 1.0, &[p, p, p, p]).is_err());
    }

    #[test]
    fn shared_budget() {
        let p = QuadraturePlan::semi_infinite(0.0).with_rel_tol(1e-13);
        let f = |z: &[f64]| Ok(1.0 / pow(z[0] + z[1] + 1.0, 3.0));
        let small = try_integrate_nd_within(f, &[p, p], 2_000).unwrap();
        assert!(small.n_evals <= 4_000, "{small:?}");
        let large = try_integrate_nd_within(f, &[p, p], 200_000).unwrap();
        assert!(large.n_evals <= 300_000, "{large:?}");
        assert!((large.value - 0.5).abs() <= (small.value - 0.5).abs());
        assert_relative_eq!(large.value, 0.5, max_relative = 1e-10);
    }
}
