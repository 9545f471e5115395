//! Two-, three- and four-orbital amplitudes
//! `∫ Π e^{-η R}/R` evaluated by closed forms and by several reductions
//! through the ζ-transform, the Gaussian transform and the ρ-form.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use libm::{cos, exp, expm1, fabs, log, pow, sin, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::identities::{k0_singular_closed, k2_weighted_closed, substitution_holds, K2Weight, SqrtRatio, SubstitutionFamily};
use crate::quadrature::{try_integrate_1d, try_integrate_nd, try_integrate_nd_within, EvalResult, Mapping, Method, QuadraturePlan};
use crate::{Error, Result};

/// Below `|η₁-η₁₂| < SEAM_REL·max(η)` the two-orbital closed form switches to
/// its series about the equal-η limit.
pub const SEAM_REL: f64 = 1e-6;

/// `∫∫ 2α⁵β² Φ(α,β) dα dβ`, the universal factor of the four-orbital route.
pub const FOUR_ORBITAL_UNIVERSAL: f64 = 64.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AmplitudeKind {
    /// `∫ d³x₁ e^{-η₁x₁}/x₁ · e^{-η₁₂x₁₂}/x₁₂` at external `x₂`.
    S2,
    /// [`AmplitudeKind::S2`] with `η₁₂ = 0`.
    S2Coulomb,
    /// `∫ d³x₂ d³x₁` of three factors on the triangle `(0, x₁, x₂)`.
    S3,
    /// [`AmplitudeKind::S3`] times an unshifted fourth factor in `x₃`.
    S4,
}

impl AmplitudeKind {
    pub const ALL: [AmplitudeKind; 4] = [AmplitudeKind::S2, AmplitudeKind::S2Coulomb, AmplitudeKind::S3, AmplitudeKind::S4];

    pub fn name(self) -> &'static str {
        match self {
            AmplitudeKind::S2 => "s2",
            AmplitudeKind::S2Coulomb => "s2-coulomb",
            AmplitudeKind::S3 => "s3",
            AmplitudeKind::S4 => "s4",
        }
    }

    pub fn n_etas(self) -> usize {
        match self {
            AmplitudeKind::S2 => 2,
            AmplitudeKind::S2Coulomb => 1,
            AmplitudeKind::S3 => 3,
            AmplitudeKind::S4 => 4,
        }
    }

    pub fn needs_x2(self) -> bool {
        matches!(self, AmplitudeKind::S2 | AmplitudeKind::S2Coulomb)
    }

    pub fn routes(self) -> &'static [Route] {
        use Route::*;
        match self {
            AmplitudeKind::S2 | AmplitudeKind::S2Coulomb => &[ClosedForm, Gaussian, NewSequential],
            AmplitudeKind::S3 => &[ClosedForm, Gaussian, NewSequential, NewSimultaneous, ZetaLast, RhoForm],
            AmplitudeKind::S4 => &[ClosedForm, NewSimultaneous],
        }
    }
}

impl fmt::Display for AmplitudeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AmplitudeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s2" => Ok(AmplitudeKind::S2),
            "s2-coulomb" | "s2c" => Ok(AmplitudeKind::S2Coulomb),
            "s3" => Ok(AmplitudeKind::S3),
            "s4" => Ok(AmplitudeKind::S4),
            _ => Err(Error::NotImplemented("unknown amplitude kind")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    ClosedForm,
    /// Gaussian transform, reduced to the `τ` integral.
    Gaussian,
    /// ζ-transform applied to one pair at a time.
    NewSequential,
    /// ζ-transform applied to all factors at once.
    NewSimultaneous,
    /// `K₀` radial form with the last ζ collapsed in closed form.
    ZetaLast,
    /// ρ-form with the last ζ integrated first.
    RhoForm,
}

impl Route {
    pub const ALL: [Route; 6] = [
        Route::ClosedForm,
        Route::Gaussian,
        Route::NewSequential,
        Route::NewSimultaneous,
        Route::ZetaLast,
        Route::RhoForm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Route::ClosedForm => "closed",
            Route::Gaussian => "gaussian",
            Route::NewSequential => "new-transform",
            Route::NewSimultaneous => "simultaneous",
            Route::ZetaLast => "zeta-last",
            Route::RhoForm => "rho-form",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" | "closed-form" => Ok(Route::ClosedForm),
            "gaussian" => Ok(Route::Gaussian),
            "new-transform" | "new-sequential" | "sequential" => Ok(Route::NewSequential),
            "simultaneous" | "new-simultaneous" => Ok(Route::NewSimultaneous),
            "zeta-last" | "k0" => Ok(Route::ZetaLast),
            "rho-form" | "rho" | "zeta2-first" => Ok(Route::RhoForm),
            _ => Err(Error::NotImplemented("unknown route")),
        }
    }
}

/// A validated amplitude request.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSpec {
    pub kind: AmplitudeKind,
    pub etas: Vec<f64>,
    pub x2: Option<f64>,
}

impl AmplitudeSpec {
    pub fn new(kind: AmplitudeKind, etas: Vec<f64>, x2: Option<f64>) -> Result<Self> {
        let spec = AmplitudeSpec { kind, etas, x2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.etas.len() != self.kind.n_etas() {
            return Err(Error::domain("wrong number of decay constants", self.etas.len() as f64));
        }
        if let Some(&e) = self.etas.iter().find(|&&e| !(e >= 0.0 && e.is_finite())) {
            return Err(Error::domain("decay constants must be finite and non-negative", e));
        }
        if self.kind.needs_x2() {
            let x2 = self.x2.ok_or(Error::domain("x2 is required", f64::NAN))?;
            check_x2(x2)?;
        }
        let e = &self.etas;
        match self.kind {
            AmplitudeKind::S2 => check_pair(e[0], e[1]),
            AmplitudeKind::S2Coulomb => check_pair(e[0], 0.0),
            AmplitudeKind::S3 => check_triangle(e[0], e[1], e[2]),
            AmplitudeKind::S4 => {
                check_triangle(e[0], e[1], e[2])?;
                if e[3] > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Divergent("eta3 must be positive"))
                }
            }
        }
    }

    fn pair(&self) -> (f64, f64, f64) {
        let x2 = self.x2.unwrap_or(f64::NAN);
        match self.kind {
            AmplitudeKind::S2Coulomb => (self.etas[0], 0.0, x2),
            _ => (self.etas[0], self.etas[1], x2),
        }
    }

    fn triple(&self) -> [f64; 3] {
        [self.etas[0], self.etas[1], self.etas[2]]
    }

    pub fn closed_form(&self) -> Result<f64> {
        self.validate()?;
        match self.kind {
            AmplitudeKind::S2 | AmplitudeKind::S2Coulomb => {
                let (e1, e12, x2) = self.pair();
                s2_closed(e1, e12, x2)
            }
            AmplitudeKind::S3 => s3_closed(self.etas[0], self.etas[1], self.etas[2]),
            AmplitudeKind::S4 => s4_closed(self.etas[0], self.etas[1], self.etas[2], self.etas[3]),
        }
    }
}

fn check_x2(x2: f64) -> Result<()> {
    if x2 > 0.0 && x2.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("x2 must be positive", x2))
    }
}

fn check_pair(eta1: f64, eta12: f64) -> Result<()> {
    for e in [eta1, eta12] {
        if !(e >= 0.0 && e.is_finite()) {
            return Err(Error::domain("decay constants must be finite and non-negative", e));
        }
    }
    if eta1 == 0.0 && eta12 == 0.0 {
        return Err(Error::Divergent("both decay constants vanish"));
    }
    Ok(())
}

fn check_triangle(eta1: f64, eta12: f64, eta2: f64) -> Result<()> {
    for e in [eta1, eta12, eta2] {
        if !(e >= 0.0 && e.is_finite()) {
            return Err(Error::domain("decay constants must be finite and non-negative", e));
        }
    }
    if eta1 + eta2 == 0.0 || eta1 + eta12 == 0.0 || eta2 + eta12 == 0.0 {
        return Err(Error::Divergent("a pairwise sum of decay constants vanishes"));
    }
    Ok(())
}

/// Tolerance and budget overrides; `None` picks the route default.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalOptions {
    pub rel_tol: Option<f64>,
    pub max_evals: Option<usize>,
}

impl EvalOptions {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = Some(rel_tol);
        self
    }

    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = Some(max_evals);
        self
    }

    fn tol(&self, default: f64) -> f64 {
        self.rel_tol.unwrap_or(default)
    }

    /// Budget of a one-dimensional rule. Nested rules keep their per-axis
    /// default and share `max_evals` through [`EvalOptions::nested`].
    fn per_axis(&self, dims: u32, default: usize) -> usize {
        match self.max_evals {
            Some(n) if dims == 1 => n.max(crate::quadrature::MIN_EVALS),
            _ => default,
        }
    }

    fn nested<F>(&self, f: F, plans: &[QuadraturePlan]) -> Result<EvalResult>
    where
        F: Fn(&[f64]) -> Result<f64>,
    {
        match self.max_evals {
            Some(n) => try_integrate_nd_within(f, plans, n),
            None => try_integrate_nd(f, plans),
        }
    }

    fn plan(&self, plan: QuadraturePlan, dims: u32, default_tol: f64, default_evals: usize) -> QuadraturePlan {
        plan.with_rel_tol(self.tol(default_tol))
            .with_max_evals(self.per_axis(dims, default_evals))
    }
}

fn semi(scale: f64) -> QuadraturePlan {
    QuadraturePlan::semi_infinite(0.0).with_mapping(Mapping::Rational { scale })
}

/// `4π(e^{-η₁₂x₂} - e^{-η₁x₂})/(x₂(η₁² - η₁₂²))`, with the equal-η and
/// Coulomb limits.
pub fn s2_closed(eta1: f64, eta12: f64, x2: f64) -> Result<f64> {
    check_pair(eta1, eta12)?;
    check_x2(x2)?;
    let (lo, hi) = if eta1 < eta12 { (eta1, eta12) } else { (eta12, eta1) };
    let d = hi - lo;
    let t = d * x2;
    let ratio = if d < SEAM_REL * hi && t < 1e-2 {
        1.0 - t / 2.0 + t * t / 6.0 - t * t * t / 24.0 + t * t * t * t / 120.0
    } else {
        -expm1(-t) / t
    };
    Ok(4.0 * PI * exp(-lo * x2) * ratio / (hi + lo))
}

/// `2π e^{-x₂s}/s` at `s² = τη₁₂² + (1-τ)η₁²`, with `1-τ` passed separately
/// so that neither end loses precision.
fn s2_gaussian_term(eta1: f64, eta12: f64, x2: f64, tau: f64, one_minus_tau: f64) -> f64 {
    let s = sqrt(tau * eta12 * eta12 + one_minus_tau * eta1 * eta1);
    2.0 * PI * exp(-x2 * s) / s
}

/// The `τ` integrand in `τ = w²(3-2w)`, which cancels the `1/s` endpoint
/// singularity of the Coulomb limits.
fn s2_gaussian_smoothed(eta1: f64, eta12: f64, x2: f64, w: f64) -> f64 {
    let v = 1.0 - w;
    let jac = 6.0 * w * v;
    if jac == 0.0 {
        return 0.0;
    }
    jac * s2_gaussian_term(eta1, eta12, x2, w * w * (3.0 - 2.0 * w), v * v * (1.0 + 2.0 * w))
}

/// `∫₀¹ 2π e^{-x₂ s(τ)}/s(τ) dτ` with `s² = τ(η₁₂²-η₁²)+η₁²`.
pub fn s2_via_gaussian(eta1: f64, eta12: f64, x2: f64, opts: EvalOptions) -> Result<EvalResult> {
    check_pair(eta1, eta12)?;
    check_x2(x2)?;
    let plan = opts.plan(QuadraturePlan::new(0.0, 1.0), 1, 1e-12, 50_000);
    try_integrate_1d(|w| Ok(s2_gaussian_smoothed(eta1, eta12, x2, w)), &plan)
}

/// `2π e^{-x₂√(q/p)}/(p^{3/2}√q)` with `p = ζ₁+1`, `q = ζ₁η₁₂²+η₁²`.
pub fn s2_new_transform_integrand(eta1: f64, eta12: f64, x2: f64, zeta1: f64) -> f64 {
    let p = zeta1 + 1.0;
    let q = zeta1 * eta12 * eta12 + eta1 * eta1;
    2.0 * PI * exp(-x2 * sqrt(q / p)) / (p * sqrt(p) * sqrt(q))
}

fn zeta_scale(eta1: f64, eta12: f64) -> f64 {
    if eta12 > 0.0 && eta1 > 0.0 {
        (eta1 * eta1 / (eta12 * eta12)).clamp(0.01, 100.0)
    } else {
        1.0
    }
}

pub fn s2_via_new_transform(eta1: f64, eta12: f64, x2: f64, opts: EvalOptions) -> Result<EvalResult> {
    check_pair(eta1, eta12)?;
    check_x2(x2)?;
    let plan = opts
        .plan(semi(zeta_scale(eta1, eta12)), 1, 1e-12, 50_000)
        .with_method(Method::DoubleExponential);
    try_integrate_1d(|z| Ok(s2_new_transform_integrand(eta1, eta12, x2, z)), &plan)
}

/// `16π²/((η₁+η₂)(η₁+η₁₂)(η₂+η₁₂))`.
pub fn s3_closed(eta1: f64, eta12: f64, eta2: f64) -> Result<f64> {
    check_triangle(eta1, eta12, eta2)?;
    Ok(16.0 * PI * PI / ((eta1 + eta2) * (eta1 + eta12) * (eta2 + eta12)))
}

/// `4π²/((ζ₁+ζ₂+1)^{3/2} G^{3/2})`, `G = η₁²+ζ₁η₁₂²+ζ₂η₂²`.
pub fn s3_simultaneous_integrand(etas: [f64; 3], zeta1: f64, zeta2: f64) -> f64 {
    let [e1, e12, e2] = etas;
    let g = e1 * e1 + zeta1 * e12 * e12 + zeta2 * e2 * e2;
    let s = zeta1 + zeta2 + 1.0;
    4.0 * PI * PI / (s * sqrt(s) * g * sqrt(g))
}

/// The `ζ₂` integral of [`s3_simultaneous_integrand`] in closed form:
/// `8π²/(√(pq)(√(ph)+√q)²)`, `h = η₂²`.
pub fn s3_reduced_integrand(etas: [f64; 3], zeta1: f64) -> f64 {
    let [e1, e12, e2] = etas;
    let p = zeta1 + 1.0;
    let q = zeta1 * e12 * e12 + e1 * e1;
    let r = sqrt(p) * e2 + sqrt(q);
    8.0 * PI * PI / (sqrt(p * q) * r * r)
}

/// The simultaneous reduction at three depths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimultaneousReport {
    /// `(ζ₁, ζ₂)` quadrature.
    pub two_d: EvalResult,
    /// `ζ₁` quadrature after the `ζ₂` integral.
    pub one_d: EvalResult,
    /// Fully analytic value through the square-root-ratio antiderivative.
    pub antiderivative: Option<f64>,
    /// Whether the relabelled decay constants put every logarithm on its
    /// real branch; `antiderivative` is `None` otherwise.
    pub branch_ok: bool,
}

pub fn s3_simultaneous_2d(etas: [f64; 3], opts: EvalOptions) -> Result<EvalResult> {
    check_triangle(etas[0], etas[1], etas[2])?;
    let plan = opts.plan(semi(1.0), 2, 1e-9, 20_000);
    opts.nested(|z: &[f64]| Ok(s3_simultaneous_integrand(etas, z[0], z[1])), &[plan, plan])
}

pub fn s3_simultaneous_1d(etas: [f64; 3], opts: EvalOptions) -> Result<EvalResult> {
    check_triangle(etas[0], etas[1], etas[2])?;
    let plan = opts.plan(semi(zeta_scale(etas[0], etas[1])), 1, 1e-12, 50_000);
    try_integrate_1d(|z| Ok(s3_reduced_integrand(etas, z)), &plan)
}

/// Closed-form `ζ₁` integral of the three-term split
/// `η₂²·T₁ - 16π²η₂/(cf) + T₃`, each `T` an antiderivative difference.
///
/// The amplitude is symmetric in its decay constants, so they are relabelled
/// as `η₁ > η₁₂ > η₂`, which keeps `c+fζ` away from zero and both logarithms
/// real. Ties leave the branch and give `None`.
pub fn s3_antiderivative(etas: [f64; 3]) -> Result<Option<f64>> {
    check_triangle(etas[0], etas[1], etas[2])?;
    let mut sorted = etas;
    sorted.sort_by(|a, b| b.total_cmp(a));
    let [e1, e12, e2] = sorted;
    if !(e1 > e12 && e12 > e2) {
        return Ok(None);
    }
    let (s1, s12, s2) = (e1 * e1, e12 * e12, e2 * e2);
    let c = s2 - s1;
    let f = s2 - s12;
    let first = SqrtRatio::new(1.0, 1.0, s1, s12, c, f);
    let third = SqrtRatio::new(s1, s12, 1.0, 1.0, c, f);
    if !first.in_branch() || !third.in_branch() {
        return Ok(None);
    }
    let t1 = first.definite(0.0, f64::INFINITY)?;
    let t3 = third.definite(0.0, f64::INFINITY)?;
    let k = 8.0 * PI * PI;
    Ok(Some(k * s2 * t1 - 2.0 * k * e2 / (c * f) + k * t3))
}

pub fn s3_via_simultaneous(etas: [f64; 3], opts: EvalOptions) -> Result<SimultaneousReport> {
    let two_d = s3_simultaneous_2d(etas, opts)?;
    let one_d = s3_simultaneous_1d(etas, opts)?;
    let antiderivative = s3_antiderivative(etas)?;
    Ok(SimultaneousReport {
        two_d,
        one_d,
        antiderivative,
        branch_ok: antiderivative.is_some(),
    })
}

/// `(x₂, τ)` quadrature of the Gaussian two-orbital result times the third
/// factor.
pub fn s3_via_gaussian(etas: [f64; 3], opts: EvalOptions) -> Result<EvalResult> {
    let [e1, e12, e2] = etas;
    check_triangle(e1, e12, e2)?;
    let x_plan = opts.plan(semi(1.0 / (e1.min(e12) + e2)), 2, 1e-9, 20_000);
    let t_plan = opts.plan(QuadraturePlan::new(0.0, 1.0), 2, 1e-9, 20_000);
    opts.nested(
        |v: &[f64]| {
            let x2 = v[0];
            Ok(4.0 * PI * x2 * exp(-e2 * x2) * s2_gaussian_smoothed(e1, e12, x2, v[1]))
        },
        &[x_plan, t_plan],
    )
}

/// `(ζ₁, x₂)` quadrature of the two-orbital ζ-integrand times the third
/// factor.
pub fn s3_via_sequential(etas: [f64; 3], opts: EvalOptions) -> Result<EvalResult> {
    let [e1, e12, e2] = etas;
    check_triangle(e1, e12, e2)?;
    let z_plan = opts.plan(semi(zeta_scale(e1, e12)), 2, 1e-9, 20_000);
    let x_plan = opts.plan(semi(1.0), 2, 1e-9, 20_000);
    opts.nested(
        |v: &[f64]| {
            let x2 = v[1];
            Ok(4.0 * PI * x2 * exp(-e2 * x2) * s2_new_transform_integrand(e1, e12, x2, v[0]))
        },
        &[z_plan, x_plan],
    )
}

/// ρ-integrand after the `ζ₂` and `x′₁` integrals, with `ρ = ρ*σ` and
/// `ρ* = x₂/(2√(pq))`: `2√π ρ*^{1/2} σ^{-1/2} e^{-κ(σ+1/σ)}/p^{3/2}`,
/// `κ = x₂√(q/p)/2`.
fn rho_integrand(etas: [f64; 3], zeta1: f64, x2: f64, sigma: f64) -> f64 {
    let [e1, e12, _] = etas;
    let p = zeta1 + 1.0;
    let q = zeta1 * e12 * e12 + e1 * e1;
    let rho_star = x2 / (2.0 * sqrt(p * q));
    let kappa = 0.5 * x2 * sqrt(q / p);
    let sqrt_pi = sqrt(PI);
    2.0 * sqrt_pi * sqrt(rho_star / sigma) * exp(-kappa * (sigma + 1.0 / sigma)) / (p * sqrt(p))
}

/// The `ρ` integral at fixed `(ζ₁, x₂)` against the two-orbital ζ-integrand
/// it must reproduce.
pub fn s3_zeta2_first_intermediate(etas: [f64; 3], zeta1: f64, x2: f64, rel_tol: f64) -> Result<crate::transforms::CheckedPair> {
    check_triangle(etas[0], etas[1], etas[2])?;
    check_x2(x2)?;
    let closed = s2_new_transform_integrand(etas[0], etas[1], x2, zeta1);
    let numeric = try_integrate_1d(|s| Ok(rho_integrand(etas, zeta1, x2, s)), &semi(1.0).with_rel_tol(rel_tol))?;
    Ok(crate::transforms::CheckedPair { closed, numeric })
}

/// `(ζ₁, x₂, ρ)` quadrature of the ρ-form after the `ζ₂` integral.
pub fn s3_zeta2_first(etas: [f64; 3], opts: EvalOptions) -> Result<EvalResult> {
    let [e1, e12, e2] = etas;
    check_triangle(e1, e12, e2)?;
    let z_plan = opts.plan(semi(zeta_scale(e1, e12)), 3, 1e-8, 4_000);
    let x_plan = opts.plan(semi(1.0), 3, 1e-8, 4_000);
    let s_plan = opts.plan(semi(1.0), 3, 1e-8, 4_000);
    opts.nested(
        |v: &[f64]| {
            let (zeta1, x2, sigma) = (v[0], v[1], v[2]);
            Ok(4.0 * PI * x2 * exp(-e2 * x2) * rho_integrand(etas, zeta1, x2, sigma))
        },
        &[z_plan, x_plan, s_plan],
    )
}

/// `∫dζ₂` of the `K₀` radial integrand in closed form, at fixed `(ζ₁, x₂)`.
/// The collapse of `√(2√(ac)+b)` is asserted whenever `η₂ > 0`.
pub fn s3_k0_inner(etas: [f64; 3], zeta1: f64, x2: f64) -> Result<f64> {
    let family = SubstitutionFamily::ThreeOrbital { zeta1, etas, x2 };
    let (a, b, c, x_eta) = family.parameters();
    if etas[2] > 0.0 && !substitution_holds(a, b, c, x_eta) {
        let (lhs, rhs) = crate::identities::substitution_sides(a, b, c, x_eta);
        return Err(Error::Consistency {
            what: "square-root collapse left its parameter family",
            lhs,
            rhs,
        });
    }
    let p = zeta1 + 1.0;
    Ok(8.0 * PI * x2 * x2 / (p * sqrt(p)) * k0_singular_closed(a, b, c)?)
}

pub fn s3_k0_route(etas: [f64; 3], opts: EvalOptions) -> Result<EvalResult> {
    let [e1, e12, e2] = etas;
    check_triangle(e1, e12, e2)?;
    let z_plan = opts.plan(semi(zeta_scale(e1, e12)), 2, 1e-9, 20_000);
    let x_plan = opts.plan(semi(1.0), 2, 1e-9, 20_000);
    opts.nested(|v: &[f64]| s3_k0_inner(etas, v[0], v[1]), &[z_plan, x_plan])
}

/// `64π³/((η₁+η₂)(η₁+η₁₂)(η₂+η₁₂)η₃²)`.
pub fn s4_closed(eta1: f64, eta12: f64, eta2: f64, eta3: f64) -> Result<f64> {
    if !(eta3 > 0.0 && eta3.is_finite()) {
        return Err(Error::Divergent("eta3 must be positive"));
    }
    Ok(s3_closed(eta1, eta12, eta2)? * 4.0 * PI / (eta3 * eta3))
}

/// Weighted sum `η₃⁴I₁ + 2η₃²G I₂ + G²I₃` of the three `K₂` integrals that
/// replace the `ζ₃` integral, at `a = η₃²t/4`, `b = (Gt+x₃²η₃²)/4`,
/// `c = x₃²G/4`.
pub fn s4_bracket(g: f64, eta3: f64, t: f64, x3: f64) -> Result<f64> {
    let a = 0.25 * eta3 * eta3 * t;
    let b = 0.25 * (g * t + x3 * x3 * eta3 * eta3);
    let c = 0.25 * x3 * x3 * g;
    if !substitution_holds(a, b, c, x3 * eta3) {
        let (lhs, rhs) = crate::identities::substitution_sides(a, b, c, x3 * eta3);
        return Err(Error::Consistency {
            what: "square-root collapse left its parameter family",
            lhs,
            rhs,
        });
    }
    let i1 = k2_weighted_closed(K2Weight::ThreeHalves, a, b, c)?;
    let i2 = k2_weighted_closed(K2Weight::Half, a, b, c)?;
    let i3 = k2_weighted_closed(K2Weight::MinusHalf, a, b, c)?;
    let e2 = eta3 * eta3;
    Ok(e2 * e2 * i1 + 2.0 * e2 * g * i2 + g * g * i3)
}

/// `∫∫ t² x₃² bracket dt dx₃` at fixed `G`, which the substitution
/// `t = α²/G`, `x₃ = β/η₃` turns into `J/(G^{3/2}η₃²)`.
pub fn s4_slice(g: f64, eta3: f64, rel_tol: f64) -> Result<crate::transforms::CheckedPair> {
    let closed = FOUR_ORBITAL_UNIVERSAL / (g * sqrt(g) * eta3 * eta3);
    let t_plan = semi(4.0 / g).with_rel_tol(rel_tol).with_max_evals(4_000);
    let x_plan = semi(2.0 / eta3).with_rel_tol(rel_tol).with_max_evals(4_000);
    let numeric = try_integrate_nd(
        |v: &[f64]| {
            let (t, x3) = (v[0], v[1]);
            Ok(t * t * x3 * x3 * s4_bracket(g, eta3, t, x3)?)
        },
        &[t_plan, x_plan],
    )?;
    Ok(crate::transforms::CheckedPair { closed, numeric })
}

/// `J = ∫∫ 2α⁵β² Φ(α,β) dα dβ` with `Φ` the bracket at `G = η₃ = 1`.
pub fn s4_universal(opts: EvalOptions) -> Result<EvalResult> {
    let plan = opts.plan(semi(2.0), 2, 1e-10, 20_000);
    opts.nested(
        |v: &[f64]| {
            let (al, be) = (v[0], v[1]);
            Ok(2.0 * pow(al, 5.0) * be * be * s4_bracket(1.0, 1.0, al * al, be)?)
        },
        &[plan, plan],
    )
}

/// Components of the four-orbital simultaneous route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourOrbitalReport {
    pub value: EvalResult,
    /// `(ζ₁, ζ₂)` quadrature, equal to the three-orbital amplitude.
    pub zeta_part: EvalResult,
    /// Numeric `J`.
    pub universal: EvalResult,
}

/// `ζ₃` replaced by the three `K₂` closed forms; the `x′₁`, `x₂` integrals
/// collapse to one radial `t`, after which `t = α²/G` separates the
/// remaining `(t, x₃)` integral from `(ζ₁, ζ₂)`. Both factors are integrated
/// numerically.
pub fn s4_via_simultaneous_report(etas: [f64; 4], opts: EvalOptions) -> Result<FourOrbitalReport> {
    let [e1, e12, e2, e3] = etas;
    s4_closed(e1, e12, e2, e3)?;
    let zeta_part = s3_simultaneous_2d([e1, e12, e2], opts)?;
    let universal = s4_universal(opts)?;
    let factor = 1.0 / (16.0 * e3 * e3);
    let value = zeta_part.value * universal.value * factor;
    let rel = zeta_part.err_estimate / fabs(zeta_part.value) + universal.err_estimate / fabs(universal.value);
    Ok(FourOrbitalReport {
        value: EvalResult {
            value,
            err_estimate: fabs(value) * rel,
            n_evals: zeta_part.n_evals + universal.n_evals,
            converged: zeta_part.converged && universal.converged,
        },
        zeta_part,
        universal,
    })
}

pub fn s4_via_simultaneous(etas: [f64; 4], opts: EvalOptions) -> Result<EvalResult> {
    Ok(s4_via_simultaneous_report(etas, opts)?.value)
}

/// Evaluates `spec` by `route`.
pub fn evaluate(spec: &AmplitudeSpec, route: Route, opts: EvalOptions) -> Result<EvalResult> {
    spec.validate()?;
    if route == Route::ClosedForm {
        return spec.closed_form().map(EvalResult::exact);
    }
    let unsupported = Err(Error::UnsupportedRoute {
        kind: spec.kind.name(),
        route: route.name(),
    });
    match spec.kind {
        AmplitudeKind::S2 | AmplitudeKind::S2Coulomb => {
            let (e1, e12, x2) = spec.pair();
            match route {
                Route::Gaussian => s2_via_gaussian(e1, e12, x2, opts),
                Route::NewSequential => s2_via_new_transform(e1, e12, x2, opts),
                _ => unsupported,
            }
        }
        AmplitudeKind::S3 => {
            let etas = spec.triple();
            match route {
                Route::Gaussian => s3_via_gaussian(etas, opts),
                Route::NewSequential => s3_via_sequential(etas, opts),
                Route::NewSimultaneous => s3_simultaneous_2d(etas, opts),
                Route::ZetaLast => s3_k0_route(etas, opts),
                Route::RhoForm => s3_zeta2_first(etas, opts),
                Route::ClosedForm => unreachable!(),
            }
        }
        AmplitudeKind::S4 => match route {
            Route::NewSimultaneous => {
                let e = &spec.etas;
                s4_via_simultaneous([e[0], e[1], e[2], e[3]], opts)
            }
            _ => unsupported,
        },
    }
}

/// How [`direct_oracle`] integrates the defining integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Deterministic quadrature in spherical coordinates; for three and four
    /// factors the inner two-orbital integral is taken in closed form.
    SemiDirect,
    /// Importance-sampled Monte Carlo over the electron coordinates.
    MonteCarlo { seed: u64, samples: usize },
}

/// Brute-force evaluation of the defining coordinate-space integral.
pub fn direct_oracle(spec: &AmplitudeSpec, mode: OracleMode, rel_tol: f64) -> Result<EvalResult> {
    spec.validate()?;
    match mode {
        OracleMode::SemiDirect => semi_direct(spec, rel_tol),
        OracleMode::MonteCarlo { seed, samples } => monte_carlo(spec, seed, samples),
    }
}

/// `∫ r² dr ∫ 2π du e^{-η₁r}/r · e^{-η₁₂x₁₂}/x₁₂` with `1-u = v²`, which
/// removes the `x₁₂ → 0` singularity.
fn s2_direct(eta1: f64, eta12: f64, x2: f64, rel_tol: f64) -> Result<EvalResult> {
    let r_plan = semi(x2).with_rel_tol(rel_tol).with_max_evals(20_000);
    let v_plan = QuadraturePlan::new(0.0, sqrt(2.0)).with_rel_tol(rel_tol).with_max_evals(20_000);
    try_integrate_nd(
        |p: &[f64]| {
            let (r, v) = (p[0], p[1]);
            let d = r - x2;
            let x12 = sqrt(d * d + 2.0 * r * x2 * v * v);
            Ok(2.0 * PI * r * exp(-eta1 * r) * 2.0 * v * exp(-eta12 * x12) / x12)
        },
        &[r_plan, v_plan],
    )
}

fn semi_direct(spec: &AmplitudeSpec, rel_tol: f64) -> Result<EvalResult> {
    match spec.kind {
        AmplitudeKind::S2 | AmplitudeKind::S2Coulomb => {
            let (e1, e12, x2) = spec.pair();
            s2_direct(e1, e12, x2, rel_tol)
        }
        AmplitudeKind::S3 => s3_semi_direct(spec.triple(), rel_tol),
        AmplitudeKind::S4 => {
            let s3 = s3_semi_direct(spec.triple(), rel_tol)?;
            let e3 = spec.etas[3];
            let plan = semi(1.0 / e3).with_rel_tol(rel_tol);
            let x3 = try_integrate_1d(|x| Ok(4.0 * PI * x * exp(-e3 * x)), &plan)?;
            let value = s3.value * x3.value;
            Ok(EvalResult {
                value,
                err_estimate: fabs(value) * (s3.err_estimate / fabs(s3.value) + x3.err_estimate / fabs(x3.value)),
                n_evals: s3.n_evals + x3.n_evals,
                converged: s3.converged && x3.converged,
            })
        }
    }
}

fn s3_semi_direct(etas: [f64; 3], rel_tol: f64) -> Result<EvalResult> {
    let [e1, e12, e2] = etas;
    let plan = semi(1.0).with_rel_tol(rel_tol);
    try_integrate_1d(|x2| Ok(4.0 * PI * x2 * exp(-e2 * x2) * s2_closed(e1, e12, x2)?), &plan)
}

/// Draws `x` with density `λ² e^{-λ|x|}/(4π|x|)`.
fn sample_yukawa(rng: &mut ChaCha8Rng, lambda: f64) -> [f64; 3] {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = 1.0 - rng.random::<f64>();
    let r = -(log(u1) + log(u2)) / lambda;
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let s = sqrt((1.0 - z * z).max(0.0));
    [r * s * cos(phi), r * s * sin(phi), r * z]
}

fn norm(v: [f64; 3]) -> f64 {
    sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

fn yukawa(eta: f64, r: f64) -> f64 {
    exp(-eta * r) / r
}

fn monte_carlo(spec: &AmplitudeSpec, seed: u64, samples: usize) -> Result<EvalResult> {
    if samples < 2 {
        return Err(Error::InvalidPlan("Monte Carlo needs at least two samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (e1, e12) = match spec.kind {
        AmplitudeKind::S2Coulomb => (spec.etas[0], 0.0),
        _ => (spec.etas[0], spec.etas[1]),
    };
    if !(e1 > 0.0) {
        return Err(Error::Divergent("Monte Carlo proposal needs eta1 > 0"));
    }
    let w1 = 4.0 * PI / (e1 * e1);
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..samples {
        let x1 = sample_yukawa(&mut rng, e1);
        let value = match spec.kind {
            AmplitudeKind::S2 | AmplitudeKind::S2Coulomb => {
                let x2 = spec.x2.unwrap_or(f64::NAN);
                let d = [x1[0], x1[1], x1[2] - x2];
                w1 * yukawa(e12, norm(d))
            }
            AmplitudeKind::S3 | AmplitudeKind::S4 => {
                if !(e12 > 0.0) {
                    return Err(Error::Divergent("Monte Carlo proposal needs eta12 > 0"));
                }
                let d = sample_yukawa(&mut rng, e12);
                let x2 = [x1[0] - d[0], x1[1] - d[1], x1[2] - d[2]];
                let mut v = w1 * 4.0 * PI / (e12 * e12) * yukawa(spec.etas[2], norm(x2));
                if spec.kind == AmplitudeKind::S4 {
                    let e3 = spec.etas[3];
                    v *= 4.0 * PI / (e3 * e3);
                }
                v
            }
        };
        let delta = value - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (value - mean);
    }
    let var = m2 / (samples - 1) as f64;
    let err = sqrt(var / samples as f64);
    Ok(EvalResult {
        value: mean,
        err_estimate: err,
        n_evals: samples,
        converged: err.is_finite(),
    })
}
