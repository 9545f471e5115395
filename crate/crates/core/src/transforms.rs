//! Integral-transform kernels for Slater factors `e^{-ηR}/R` and their
//! reconstructions.
//!
//! Each kernel is a pointwise function of its transform variables. The
//! `reconstruct_*` functions integrate a kernel numerically and pair the
//! result with the product of Slater factors it should reproduce.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_PI, PI};

use libm::{cos, exp, fabs, lgamma, log, pow, sqrt};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};

use crate::quadrature::{try_integrate_1d, try_integrate_nd, EvalResult, Mapping, QuadraturePlan, MIN_SAMPLES};
use crate::specfun::{bessel_j0, bessel_k_scaled, hermite, Order};
use crate::{Error, Result};

const LN_2: f64 = core::f64::consts::LN_2;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// A closed-form value together with the numeric integral that should equal it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckedPair {
    pub closed: f64,
    pub numeric: EvalResult,
}

impl CheckedPair {
    pub fn rel_error(&self) -> f64 {
        let diff = fabs(self.numeric.value - self.closed);
        if self.closed == 0.0 {
            diff
        } else {
            diff / fabs(self.closed)
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.rel_error() <= tol
    }
}

/// One factor `R^{j-1} e^{-ηR}` of a product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlaterFactor {
    pub eta: f64,
    pub r: f64,
    pub j: u32,
}

impl SlaterFactor {
    pub fn new(eta: f64, r: f64) -> Self {
        SlaterFactor { eta, r, j: 0 }
    }

    pub fn with_power(self, j: u32) -> Self {
        SlaterFactor { j, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) {
            return Err(Error::domain("radial magnitude must be positive", self.r));
        }
        if !(self.eta >= 0.0) {
            return Err(Error::domain("decay constant must be non-negative", self.eta));
        }
        if self.j > 0 && self.eta == 0.0 {
            return Err(Error::domain("j > 0 requires a positive decay constant", self.eta));
        }
        Ok(())
    }

    /// `R^{j-1} e^{-ηR}`.
    pub fn value(&self) -> f64 {
        pow(self.r, self.j as f64 - 1.0) * exp(-self.eta * self.r)
    }
}

/// Gaussian-transform weight: its `ρ₃`-integral over `[0,∞)` is
/// `R^{j-1}e^{-ηR}`.
pub fn gaussian_weight(factor: &SlaterFactor, rho3: f64) -> Result<f64> {
    factor.validate()?;
    if !(rho3 > 0.0) {
        return Err(Error::domain("rho3 must be positive", rho3));
    }
    let SlaterFactor { eta, r, j } = *factor;
    let jf = j as f64;
    let norm = 1.0 / (pow(2.0, jf) * sqrt(PI));
    let expo = exp(-r * r * rho3 - eta * eta / (4.0 * rho3));
    Ok(norm * expo * hermite(j, eta / (2.0 * sqrt(rho3))) / pow(rho3, 0.5 * (jf + 1.0)))
}

pub fn reconstruct_gaussian(factor: &SlaterFactor, rel_tol: f64) -> Result<CheckedPair> {
    factor.validate()?;
    // saddle of R²ρ + η²/(4ρ)
    let scale = if factor.eta > 0.0 {
        factor.eta / (2.0 * factor.r)
    } else {
        1.0 / (factor.r * factor.r)
    };
    let plan = QuadraturePlan::semi_infinite(0.0)
        .with_mapping(Mapping::Rational { scale })
        .with_rel_tol(rel_tol);
    let numeric = try_integrate_1d(|rho| gaussian_weight(factor, rho), &plan)?;
    Ok(CheckedPair {
        closed: factor.value(),
        numeric,
    })
}

fn check_power_params(r0: f64, r1: f64, p1: f64, s: f64) -> Result<()> {
    if !(r0 > 0.0) || !(r1 > 0.0) {
        return Err(Error::domain("denominator coefficients must be positive", r0.min(r1)));
    }
    if !(p1 > 0.0) {
        return Err(Error::domain("p1 must be positive", p1));
    }
    if !(p1 < s) {
        return Err(Error::Divergent("power-denominator transform needs p1 < s"));
    }
    Ok(())
}

/// `Γ(s)/(Γ(p₁)Γ(s-p₁)) · ζ^{p₁-1}/(r₁ζ + r₀)^s`, whose `ζ`-integral is
/// `1/(r₀^{s-p₁} r₁^{p₁})`.
pub fn power_denominator_kernel(r0: f64, r1: f64, p1: f64, s: f64, zeta: f64) -> Result<f64> {
    check_power_params(r0, r1, p1, s)?;
    if !(zeta > 0.0) {
        return Err(Error::domain("zeta must be positive", zeta));
    }
    let log_norm = lgamma(s) - lgamma(p1) - lgamma(s - p1);
    Ok(exp(log_norm + (p1 - 1.0) * log(zeta) - s * log(r1 * zeta + r0)))
}

pub fn reconstruct_power_denominator(r0: f64, r1: f64, p1: f64, s: f64, rel_tol: f64) -> Result<CheckedPair> {
    check_power_params(r0, r1, p1, s)?;
    let plan = QuadraturePlan::semi_infinite(0.0)
        .with_mapping(Mapping::Rational { scale: r0 / r1 })
        .with_rel_tol(rel_tol);
    let numeric = try_integrate_1d(|z| power_denominator_kernel(r0, r1, p1, s, z), &plan)?;
    Ok(CheckedPair {
        closed: 1.0 / (pow(r0, s - p1) * pow(r1, p1)),
        numeric,
    })
}

/// `(2/π) cos(tη)/(t² + x²)`; its `t`-integral over `[0,∞)` is `e^{-ηx}/x`.
pub fn cosine_pair_identity(x: f64, eta: f64, t: f64) -> f64 {
    FRAC_2_PI * cos(t * eta) / (t * t + x * x)
}

pub fn reconstruct_cosine_pair(x: f64, eta: f64, rel_tol: f64) -> Result<CheckedPair> {
    if !(x > 0.0) {
        return Err(Error::domain("x must be positive", x));
    }
    if !(eta >= 0.0) {
        return Err(Error::domain("eta must be non-negative", eta));
    }
    let f = |t: f64| cosine_pair_identity(x, eta, t);
    let numeric = if eta == 0.0 {
        let plan = QuadraturePlan::semi_infinite(0.0)
            .with_mapping(Mapping::Rational { scale: x })
            .with_rel_tol(rel_tol);
        try_integrate_1d(|t| Ok(f(t)), &plan)?
    } else {
        let half_period = PI / eta;
        integrate_oscillatory(f, |k| (k as f64 + 0.5) * half_period, rel_tol)?
    };
    Ok(CheckedPair {
        closed: exp(-eta * x) / x,
        numeric,
    })
}

/// `x J₀(xλ)/(r² + x²)^{3/2}`; its `x`-integral over `[0,∞)` is `e^{-λr}/r`.
pub fn j0_transform_integrand(r: f64, lambda: f64, x: f64) -> f64 {
    let d = r * r + x * x;
    x * bessel_j0(x * lambda) / (d * sqrt(d))
}

/// Both sides of the `J₀` transform at `(r, λ)`.
pub fn j0_transform_identity(r: f64, lambda: f64) -> Result<CheckedPair> {
    if !(r > 0.0) {
        return Err(Error::domain("r must be positive", r));
    }
    if !(lambda >= 0.0) {
        return Err(Error::domain("lambda must be non-negative", lambda));
    }
    let f = |x: f64| j0_transform_integrand(r, lambda, x);
    let numeric = if lambda == 0.0 {
        let plan = QuadraturePlan::semi_infinite(0.0)
            .with_mapping(Mapping::Rational { scale: r })
            .with_rel_tol(1e-11);
        try_integrate_1d(|x| Ok(f(x)), &plan)?
    } else {
        integrate_oscillatory(f, |k| j0_zero(k + 1) / lambda, 1e-11)?
    };
    Ok(CheckedPair {
        closed: exp(-lambda * r) / r,
        numeric,
    })
}

/// McMahon's approximation to the `s`-th positive zero of `J₀`.
fn j0_zero(s: usize) -> f64 {
    let beta = (s as f64 - 0.25) * PI;
    beta + 1.0 / (8.0 * beta) - 31.0 / (384.0 * beta * beta * beta)
}

/// `∫₀^∞ f` for an integrand whose sign alternates between consecutive
/// `breakpoint(k)`. Integrates panel by panel and accelerates the partial sums
/// by repeated pairwise averaging.
fn integrate_oscillatory<F, B>(f: F, breakpoint: B, rel_tol: f64) -> Result<EvalResult>
where
    F: Fn(f64) -> f64,
    B: Fn(usize) -> f64,
{
    const PANELS: usize = 48;
    const AVERAGED: usize = 24;
    let mut partial = Vec::with_capacity(PANELS + 1);
    let mut running = 0.0;
    let mut err = 0.0;
    let mut n_evals = 0;
    let mut converged = true;
    let mut lo = 0.0;
    for k in 0..=PANELS {
        let hi = breakpoint(k);
        let plan = QuadraturePlan::new(lo, hi).with_rel_tol(rel_tol * 1e-2).with_abs_tol(1e-300);
        let r = try_integrate_1d(|x| Ok(f(x)), &plan)?;
        running += r.value;
        err += r.err_estimate;
        n_evals += r.n_evals;
        converged &= r.converged;
        partial.push(running);
        lo = hi;
    }
    let accelerate = |sums: &[f64]| {
        let mut s = sums.to_vec();
        while s.len() > 1 {
            for i in 0..s.len() - 1 {
                s[i] = 0.5 * (s[i] + s[i + 1]);
            }
            s.pop();
        }
        s[0]
    };
    let n = partial.len();
    let value = accelerate(&partial[n - AVERAGED..]);
    let previous = accelerate(&partial[n - AVERAGED - 1..n - 1]);
    let err = err + fabs(value - previous);
    Ok(EvalResult {
        value,
        err_estimate: err,
        n_evals,
        converged: converged && err <= rel_tol * fabs(value),
    })
}

/// Product of `M` Slater factors `e^{-η_i R_i}/R_i` prepared for the
/// `(M-1)`-parameter transform.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaKernel {
    rs: Vec<f64>,
    etas: Vec<f64>,
}

impl ZetaKernel {
    pub fn new(rs: Vec<f64>, etas: Vec<f64>) -> Result<Self> {
        if rs.len() != etas.len() {
            return Err(Error::domain("radii and decay constants must have equal length", etas.len() as f64));
        }
        if rs.len() < 2 {
            return Err(Error::NotImplemented("the zeta transform needs M >= 2 orbitals"));
        }
        if let Some(&r) = rs.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::domain("radial magnitudes must be positive", r));
        }
        if let Some(&e) = etas.iter().find(|&&e| !(e >= 0.0 && e.is_finite())) {
            return Err(Error::domain("decay constants must be non-negative", e));
        }
        if etas.iter().all(|&e| e == 0.0) {
            return Err(Error::Divergent("all decay constants vanish, so B(zeta) = 0"));
        }
        Ok(ZetaKernel { rs, etas })
    }

    pub fn uniform(m: usize, r: f64, eta: f64) -> Result<Self> {
        Self::new(vec![r; m], vec![eta; m])
    }

    pub fn m(&self) -> usize {
        self.rs.len()
    }

    pub fn rs(&self) -> &[f64] {
        &self.rs
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() + 1 != self.m() {
            return Err(Error::domain("expected M-1 transform parameters", params.len() as f64));
        }
        match params.iter().find(|&&z| !(z > 0.0 && z.is_finite())) {
            Some(&z) => Err(Error::domain("transform parameters must be positive", z)),
            None => Ok(()),
        }
    }

    /// `A(ζ) = R₁² + Σ R_j²/ζ_{j-1}`.
    pub fn a(&self, zetas: &[f64]) -> f64 {
        let r = &self.rs;
        r[0] * r[0] + zetas.iter().zip(&r[1..]).map(|(z, r)| r * r / z).sum::<f64>()
    }

    /// `B(ζ) = η₁² + Σ ζ_{j-1} η_j²`.
    pub fn b(&self, zetas: &[f64]) -> f64 {
        let e = &self.etas;
        e[0] * e[0] + zetas.iter().zip(&e[1..]).map(|(z, e)| z * e * e).sum::<f64>()
    }

    /// `A` in the inverse variables `ξ = 1/ζ`.
    pub fn a_inverse(&self, xis: &[f64]) -> f64 {
        let r = &self.rs;
        r[0] * r[0] + xis.iter().zip(&r[1..]).map(|(x, r)| x * r * r).sum::<f64>()
    }

    pub fn b_inverse(&self, xis: &[f64]) -> f64 {
        let e = &self.etas;
        e[0] * e[0] + xis.iter().zip(&e[1..]).map(|(x, e)| e * e / x).sum::<f64>()
    }

    /// `Π e^{-η_i R_i}/R_i`.
    pub fn target(&self) -> f64 {
        self.rs.iter().zip(&self.etas).map(|(r, e)| exp(-e * r) / r).product()
    }

    /// `ζ_i = R_{i+1}η₁/(R₁η_{i+1})`, the point minimising `A·B`; 1 where that
    /// ratio is degenerate.
    pub fn natural_scales(&self) -> Vec<f64> {
        (1..self.m())
            .map(|j| {
                let z = self.rs[j] * self.etas[0] / (self.rs[0] * self.etas[j]);
                if z > 0.0 && z.is_finite() {
                    z
                } else {
                    1.0
                }
            })
            .collect()
    }
}

/// Two-orbital kernel written directly in the pair variables
/// `(x₁, x₁₂; η₁, η₁₂)`.
pub fn pair_kernel(k: &ZetaKernel, zeta1: f64) -> Result<f64> {
    if k.m() != 2 {
        return Err(Error::domain("pair kernel needs exactly two orbitals", k.m() as f64));
    }
    if !(zeta1 > 0.0) {
        return Err(Error::domain("zeta1 must be positive", zeta1));
    }
    let (x1, x12) = (k.rs[0], k.rs[1]);
    let (e1, e12) = (k.etas[0], k.etas[1]);
    let q = sqrt(zeta1 * e12 * e12 + e1 * e1);
    let d = sqrt(x1 * x1 + x12 * x12 / zeta1);
    let z = d * q;
    if !(z > 0.0) {
        return Err(Error::domain("degenerate kernel argument", z));
    }
    Ok(q * bessel_k_scaled(Order::ONE, z)? * exp(-z) / (PI * pow(zeta1, 1.5) * d))
}

/// Compact `M`-orbital kernel: its `(M-1)`-fold `ζ`-integral over the
/// positive orthant is `Π e^{-η_i R_i}/R_i`.
pub fn m_kernel(k: &ZetaKernel, zetas: &[f64]) -> Result<f64> {
    k.check_params(zetas)?;
    let a = k.a(zetas);
    let b = k.b(zetas);
    let log_zeta: f64 = zetas.iter().map(|&z| log(z)).sum();
    compact_core(k.m(), a, b, -1.5 * log_zeta)
}

/// Compact kernel in `ξ_i = 1/ζ_i`, including the Jacobian.
pub fn m_kernel_inverse(k: &ZetaKernel, xis: &[f64]) -> Result<f64> {
    k.check_params(xis)?;
    let a = k.a_inverse(xis);
    let b = k.b_inverse(xis);
    let log_xi: f64 = xis.iter().map(|&x| log(x)).sum();
    compact_core(k.m(), a, b, -0.5 * log_xi)
}

fn compact_core(m: usize, a: f64, b: f64, log_weight: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::domain("B(zeta) must be positive", b));
    }
    let mf = m as f64;
    let z = sqrt(a) * sqrt(b);
    let k = bessel_k_scaled(Order::half_of(m as u32), z)?;
    let log_prefactor = (1.0 - 0.5 * mf) * LN_2 - 0.5 * mf * LN_PI;
    let log_value = log_prefactor + log_weight - 0.25 * mf * log(a) + 0.25 * mf * log(b) - z + log(k);
    Ok(exp(log_value))
}

/// ρ-form of the `M`-orbital kernel; integrating over `ρ ∈ [0,∞)` gives
/// [`m_kernel`].
pub fn m_kernel_rho(k: &ZetaKernel, zetas: &[f64], rho: f64) -> Result<f64> {
    k.check_params(zetas)?;
    if !(rho > 0.0) {
        return Err(Error::domain("rho must be positive", rho));
    }
    let mf = k.m() as f64;
    let log_zeta: f64 = zetas.iter().map(|&z| log(z)).sum();
    let log_prefactor = -0.5 * mf * LN_PI - mf * LN_2 - (0.5 * mf + 1.0) * log(rho) - 1.5 * log_zeta;
    Ok(exp(log_prefactor - rho * k.b(zetas) - k.a(zetas) / (4.0 * rho)))
}

/// `ρ`-integral of [`m_kernel_rho`] against [`m_kernel`] at fixed `ζ`.
pub fn reconstruct_rho_integral(k: &ZetaKernel, zetas: &[f64], rel_tol: f64) -> Result<CheckedPair> {
    let closed = m_kernel(k, zetas)?;
    let scale = sqrt(k.a(zetas)) / (2.0 * sqrt(k.b(zetas)));
    let plan = QuadraturePlan::semi_infinite(0.0)
        .with_mapping(Mapping::Rational { scale })
        .with_rel_tol(rel_tol);
    let numeric = try_integrate_1d(|rho| m_kernel_rho(k, zetas, rho), &plan)?;
    Ok(CheckedPair { closed, numeric })
}

/// Which kernel representation a reconstruction integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelForm {
    /// [`m_kernel`] over `ζ`.
    Compact,
    /// [`m_kernel_inverse`] over `ξ`.
    Inverse,
    /// [`m_kernel_rho`] over `(ρ, ζ)`; one more dimension than the others.
    Rho,
}

/// Deterministic nested reconstruction for `M ∈ {2, 3, 4}` (`M = 2, 3` for the
/// ρ-form), compared with `Π e^{-η_i R_i}/R_i`.
pub fn reconstruct_m_kernel(k: &ZetaKernel, form: KernelForm, rel_tol: f64) -> Result<CheckedPair> {
    let m = k.m();
    let dims = match form {
        KernelForm::Rho => m,
        _ => m - 1,
    };
    if !(1..=3).contains(&dims) {
        return Err(Error::NotImplemented(
            "deterministic reconstruction covers at most three transform dimensions",
        ));
    }
    let scales = k.natural_scales();
    let mut plans: Vec<QuadraturePlan> = scales
        .iter()
        .map(|&s| {
            let s = if form == KernelForm::Inverse { 1.0 / s } else { s };
            QuadraturePlan::semi_infinite(0.0)
                .with_mapping(Mapping::Rational { scale: s })
                .with_rel_tol(rel_tol)
                .with_max_evals(20_000)
        })
        .collect();
    if form == KernelForm::Rho {
        let zs = scales.clone();
        let scale = sqrt(k.a(&zs)) / (2.0 * sqrt(k.b(&zs)));
        plans.insert(
            0,
            QuadraturePlan::semi_infinite(0.0)
                .with_mapping(Mapping::Rational { scale })
                .with_rel_tol(rel_tol)
                .with_max_evals(20_000),
        );
    }
    let eval = |x: &[f64]| -> Result<f64> {
        match form {
            KernelForm::Compact => m_kernel(k, x),
            KernelForm::Inverse => m_kernel_inverse(k, x),
            KernelForm::Rho => m_kernel_rho(k, &x[1..], x[0]),
        }
    };
    let numeric = if dims == 1 {
        try_integrate_1d(|z| eval(&[z]), &plans[0])?
    } else {
        try_integrate_nd(eval, &plans)?
    };
    Ok(CheckedPair {
        closed: k.target(),
        numeric,
    })
}

/// Seeded Monte-Carlo reconstruction of the compact kernel for
/// `2 ≤ M ≤ 9`, importance-sampled from [`ZetaProposal`].
pub fn reconstruct_m_kernel_mc(k: &ZetaKernel, seed: u64, n: usize) -> Result<CheckedPair> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidPlan("Monte-Carlo oracle needs at least 10^4 samples"));
    }
    let proposal = ZetaProposal::new(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zetas = vec![0.0; k.m() - 1];
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..n {
        proposal.sample(&mut rng, &mut zetas);
        let w = exp(log(m_kernel(k, &zetas)?) - proposal.log_density(&zetas));
        if !w.is_finite() {
            return Err(Error::NonFinite { x: zetas[0] });
        }
        let delta = w - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (w - mean);
    }
    let err = sqrt(m2 / ((n - 1) as f64 * n as f64));
    Ok(CheckedPair {
        closed: k.target(),
        numeric: EvalResult {
            value: mean,
            err_estimate: err,
            n_evals: n,
            converged: err.is_finite(),
        },
    })
}

/// Mixture proposal on the `ζ` orthant.
///
/// At fixed `ρ` the ρ-form factorises into `ζ_j^{-3/2}e^{-ρη_j²ζ_j-R_j²/(4ρζ_j)}`,
/// an inverse-Gaussian density in each `ζ_j`. The proposal mixes these over a
/// log-spaced `ρ` grid weighted by the `ρ`-marginal
/// `ρ^{-3/2}e^{-ρη₁²-R₁²/(4ρ)}`, plus a small heavy-tailed component
/// `ζ = κw/(1-w)` so that the importance weight stays bounded.
#[derive(Debug, Clone)]
pub struct ZetaProposal {
    rs: Vec<f64>,
    etas: Vec<f64>,
    rhos: Vec<f64>,
    log_weights: Vec<f64>,
    scales: Vec<f64>,
}

impl ZetaProposal {
    const DEFENSIVE: f64 = 0.002;
    const GRID_HALF_WIDTH: f64 = 4.0;
    const GRID_STEP: f64 = 0.5;

    pub fn new(k: &ZetaKernel) -> Result<Self> {
        if k.m() > 9 {
            return Err(Error::NotImplemented("Monte-Carlo reconstruction covers M <= 9"));
        }
        let (r1, e1) = (k.rs[0], k.etas[0]);
        let centre = if e1 > 0.0 { r1 / (2.0 * e1) } else { r1 * r1 / 6.0 };
        let steps = (2.0 * Self::GRID_HALF_WIDTH / Self::GRID_STEP) as usize;
        let rhos: Vec<f64> = (0..=steps)
            .map(|i| centre * exp(-Self::GRID_HALF_WIDTH + i as f64 * Self::GRID_STEP))
            .collect();
        let raw: Vec<f64> = rhos.iter().map(|&r| -0.5 * log(r) - r * e1 * e1 - r1 * r1 / (4.0 * r)).collect();
        let top = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = raw.iter().map(|&l| exp(l - top)).sum();
        let log_weights = raw.iter().map(|&l| l - top - log(total) + log(1.0 - Self::DEFENSIVE)).collect();
        Ok(ZetaProposal {
            rs: k.rs[1..].to_vec(),
            etas: k.etas[1..].to_vec(),
            rhos,
            log_weights,
            scales: k.natural_scales(),
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, zetas: &mut [f64]) {
        if rng.random::<f64>() < Self::DEFENSIVE {
            for (z, &s) in zetas.iter_mut().zip(&self.scales) {
                let mut w: f64 = rng.random();
                while w == 0.0 {
                    w = rng.random();
                }
                *z = s * w / (1.0 - w);
            }
            return;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.rhos.len() - 1;
        for (i, &lw) in self.log_weights.iter().enumerate() {
            acc += exp(lw) / (1.0 - Self::DEFENSIVE);
            if u < acc {
                pick = i;
                break;
            }
        }
        let rho = self.rhos[pick];
        for ((z, &r), &e) in zetas.iter_mut().zip(&self.rs).zip(&self.etas) {
            let shape = r * r / (2.0 * rho);
            *z = if e > 0.0 {
                let mean = r / (2.0 * rho * e);
                InverseGaussian::new(mean, shape).expect("positive parameters").sample(rng)
            } else {
                let g: f64 = rng.sample(StandardNormal);
                shape / (g * g)
            };
        }
    }

    pub fn log_density(&self, zetas: &[f64]) -> f64 {
        let log_zeta: f64 = zetas.iter().map(|&z| log(z)).sum();
        let component = |rho: f64, lw: f64| {
            let mut l = lw - 1.5 * log_zeta;
            for ((&z, &r), &e) in zetas.iter().zip(&self.rs).zip(&self.etas) {
                let shape = r * r / (2.0 * rho);
                l += 0.5 * log(shape / (2.0 * PI)) - rho * e * e * z + e * r - r * r / (4.0 * rho * z);
            }
            l
        };
        let heavy: f64 = log(Self::DEFENSIVE)
            + zetas
                .iter()
                .zip(&self.scales)
                .map(|(&z, &s)| log(s) - 2.0 * log(s + z))
                .sum::<f64>();
        let terms = || {
            self.rhos
                .iter()
                .zip(&self.log_weights)
                .map(|(&rho, &lw)| component(rho, lw))
                .chain(core::iter::once(heavy))
        };
        let top = terms().fold(f64::NEG_INFINITY, f64::max);
        top + log(terms().map(|t| exp(t - top)).sum::<f64>())
    }
}

/// Coefficient data of the momentum-space quadratic form at fixed `(ζ, ρ)`.
///
/// The shift vectors `b_j = -iR_j/(2ρ)` only enter through
/// `b_j² = -R_j²/(4ρ²)`, so everything is real.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub m: usize,
    pub zetas: Vec<f64>,
    pub b_sq: Vec<f64>,
    pub c_const: f64,
    pub rho: f64,
    rs: Vec<f64>,
    etas: Vec<f64>,
}

pub fn build_quadratic_form(k: &ZetaKernel, zetas: &[f64], rho: f64) -> Result<QuadraticForm> {
    k.check_params(zetas)?;
    if !(rho > 0.0) {
        return Err(Error::domain("rho must be positive", rho));
    }
    let b_sq = k.rs.iter().map(|r| -r * r / (4.0 * rho * rho)).collect();
    Ok(QuadraticForm {
        m: k.m(),
        zetas: zetas.to_vec(),
        b_sq,
        c_const: k.b(zetas),
        rho,
        rs: k.rs.clone(),
        etas: k.etas.clone(),
    })
}

impl QuadraticForm {
    /// `Λ = Π ζ_i`.
    pub fn lambda(&self) -> f64 {
        self.zetas.iter().product()
    }

    /// `c′ = η₁² + Σζ_{j-1}η_j² + R₁²/(4ρ²) + ΣR_j²/(4ρ²ζ_{j-1})`.
    pub fn c_prime_closed(&self) -> f64 {
        let four_rho_sq = 4.0 * self.rho * self.rho;
        let mut c = self.etas[0] * self.etas[0] + self.rs[0] * self.rs[0] / four_rho_sq;
        for (j, z) in self.zetas.iter().enumerate() {
            let (e, r) = (self.etas[j + 1], self.rs[j + 1]);
            c += z * e * e + r * r / (four_rho_sq * z);
        }
        c
    }

    /// `Ω` by expansion in minors: `CΛ - b₁²Λ - Σ_{j≥2} b_j² Π_{i≠j-1} ζ_i`.
    pub fn omega_minors(&self) -> f64 {
        let lambda = self.lambda();
        let mut omega = self.c_const * lambda - self.b_sq[0] * lambda;
        for j in 1..self.m {
            let minor: f64 = self
                .zetas
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j - 1)
                .map(|(_, z)| z)
                .product();
            omega -= self.b_sq[j] * minor;
        }
        omega
    }

    /// `Ω` as the determinant of the bordered matrix
    /// `[[diag(1, ζ), u], [vᵀ, C]]` with `u_j = R_j/(2ρ)`, `v_j = -R_j/(2ρ)`
    /// (so `u_j v_j = b_j²`), by Gaussian elimination with partial pivoting.
    pub fn omega_determinant(&self) -> f64 {
        let n = self.m + 1;
        let mut a = vec![0.0; n * n];
        for i in 0..self.m {
            a[i * n + i] = if i == 0 { 1.0 } else { self.zetas[i - 1] };
            let u = self.rs[i] / (2.0 * self.rho);
            a[i * n + self.m] = u;
            a[self.m * n + i] = -u;
        }
        a[self.m * n + self.m] = self.c_const;
        lu_determinant(&mut a, n)
    }
}

fn lu_determinant(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| fabs(a[i * n + col]).total_cmp(&fabs(a[j * n + col])))
            .expect("non-empty range");
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = a[row * n + col] / p;
            if factor != 0.0 {
                for c in col..n {
                    a[row * n + c] -= factor * a[col * n + c];
                }
            }
        }
    }
    det
}

/// `c′ = Ω/Λ`, computed in closed form and cross-checked against the minor
/// expansion and the bordered determinant.
pub fn c_prime(qf: &QuadraticForm) -> Result<f64> {
    let lambda = qf.lambda();
    if !(lambda > 0.0) {
        return Err(Error::domain("Lambda must be positive", lambda));
    }
    let closed = qf.c_prime_closed();
    for (what, omega) in [
        ("c' Lambda vs minor expansion of Omega", qf.omega_minors()),
        ("c' Lambda vs determinant of W", qf.omega_determinant()),
    ] {
        let lhs = closed * lambda;
        if fabs(lhs - omega) > 1e-12 * fabs(lhs) {
            return Err(Error::Consistency { what, lhs, rhs: omega });
        }
    }
    Ok(closed)
}

fn trio_parts(k: &ZetaKernel, zetas: &[f64]) -> Result<(f64, f64, f64)> {
    if k.m() != 3 {
        return Err(Error::domain("recursion applies to a trio of orbitals", k.m() as f64));
    }
    k.check_params(zetas)?;
    let norm = 2.0 * PI * pow(zetas[0] * zetas[1], 1.5);
    Ok((k.a(zetas), k.b(zetas), norm))
}

/// Right side of the trio recursion, `-2 ∂_b [e^{-√(A+b)√B}/(2πζ₁^{3/2}ζ₂^{3/2}√(A+b))]`
/// at `b = 0`, with the derivative taken analytically.
pub fn recursion_trio(k: &ZetaKernel, zetas: &[f64]) -> Result<f64> {
    let (a, b, norm) = trio_parts(k, zetas)?;
    let u = sqrt(a);
    let sb = sqrt(b);
    Ok(exp(-u * sb) * (sb * u + 1.0) / (norm * u * u * u))
}

/// The same derivative by a central difference of step `h` in `b`.
pub fn recursion_trio_fd(k: &ZetaKernel, zetas: &[f64], h: f64) -> Result<f64> {
    let (a, b, norm) = trio_parts(k, zetas)?;
    let sb = sqrt(b);
    let g = |shift: f64| {
        let u = sqrt(a + shift);
        exp(-u * sb) / (norm * u)
    };
    Ok(-2.0 * (g(h) - g(-h)) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_weight_examples() {
        let w = gaussian_weight(&SlaterFactor::new(0.0, 1.0), 1.0).unwrap();
        assert_relative_eq!(w, exp(-1.0) / sqrt(PI), max_relative = 1e-15);
        let c = reconstruct_gaussian(&SlaterFactor::new(1.0, 1.0), 1e-11).unwrap();
        assert!(c.holds(1e-10), "{c:?}");
        assert_relative_eq!(c.closed, exp(-1.0));
        let c = reconstruct_gaussian(&SlaterFactor::new(2.0, 1.0).with_power(1), 1e-11).unwrap();
        assert_relative_eq!(c.closed, exp(-2.0));
        assert!(c.holds(1e-10), "{c:?}");
        let c = reconstruct_gaussian(&SlaterFactor::new(1.5, 0.7).with_power(3), 1e-11).unwrap();
        assert!(c.holds(1e-9), "{c:?}");
        assert!(gaussian_weight(&SlaterFactor::new(0.0, 1.0).with_power(1), 1.0).is_err());
    }

    #[test]
    fn power_denominator_examples() {
        for (r0, r1, p1, s, exact) in [(1.0, 1.0, 0.5, 1.0, 1.0), (4.0, 1.0, 0.5, 1.0, 0.5), (1.0, 2.0, 1.0, 2.0, 0.5)] {
            let c = reconstruct_power_denominator(r0, r1, p1, s, 1e-11).unwrap();
            assert_relative_eq!(c.closed, exact, max_relative = 1e-15);
            assert!(c.holds(1e-9), "{c:?}");
        }
        assert!(matches!(power_denominator_kernel(1.0, 1.0, 2.0, 1.0, 1.0), Err(Error::Divergent(_))));
        // p1 = 1/2, s = 1: the normalisation is Γ(1)/(Γ(1/2)²) = 1/π
        assert_relative_eq!(power_denominator_kernel(1.0, 1.0, 0.5, 1.0, 1.0).unwrap(), 0.5 / PI, max_relative = 1e-14);
    }

    #[test]
    fn cosine_pair_examples() {
        for (x, eta, exact) in [(1.0, 0.0, 1.0), (1.0, 1.0, exp(-1.0)), (0.5, 2.0, 2.0 * exp(-1.0))] {
            let c = reconstruct_cosine_pair(x, eta, 1e-10).unwrap();
            assert_relative_eq!(c.closed, exact, max_relative = 1e-15);
            assert!(c.holds(1e-8), "{c:?}");
        }
    }

    #[test]
    fn j0_examples() {
        for (r, lambda, exact) in [(1.0, 0.0, 1.0), (1.0, 1.0, exp(-1.0)), (2.0, 1.0, exp(-2.0) / 2.0)] {
            let c = j0_transform_identity(r, lambda).unwrap();
            assert_relative_eq!(c.closed, exact, max_relative = 1e-15);
            assert!(c.holds(1e-8), "{c:?} {}", c.rel_error());
        }
    }

    #[test]
    fn pair_kernel_matches_compact_kernel() {
        let k = ZetaKernel::uniform(2, 1.0, 1.0).unwrap();
        assert_relative_eq!(pair_kernel(&k, 0.7).unwrap(), m_kernel(&k, &[0.7]).unwrap(), max_relative = 1e-14);
        let k = ZetaKernel::new(vec![2.0, 0.3], vec![0.4, 1.7]).unwrap();
        assert_relative_eq!(pair_kernel(&k, 2.3).unwrap(), m_kernel(&k, &[2.3]).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn pair_reconstructions() {
        let k = ZetaKernel::uniform(2, 1.0, 1.0).unwrap();
        let c = reconstruct_m_kernel(&k, KernelForm::Compact, 1e-10).unwrap();
        assert_relative_eq!(c.closed, exp(-2.0), max_relative = 1e-15);
        assert!(c.holds(1e-9), "{c:?}");
        let k = ZetaKernel::new(vec![2.0, 1.0], vec![1.0, 0.0]).unwrap();
        let c = reconstruct_m_kernel(&k, KernelForm::Compact, 1e-10).unwrap();
        assert_relative_eq!(c.closed, exp(-2.0) / 2.0, max_relative = 1e-15);
        assert!(c.holds(1e-7), "{c:?}");
    }

    #[test]
    fn three_orbital_forms() {
        let k = ZetaKernel::uniform(3, 1.0, 1.0).unwrap();
        for form in [KernelForm::Compact, KernelForm::Inverse] {
            let c = reconstruct_m_kernel(&k, form, 1e-8).unwrap();
            assert_relative_eq!(c.closed, exp(-3.0), max_relative = 1e-15);
            assert!(c.holds(1e-7), "{form:?} {c:?}");
        }
    }

    #[test]
    fn rho_form_examples() {
        let k = ZetaKernel::uniform(2, 1.0, 1.0).unwrap();
        let c = reconstruct_rho_integral(&k, &[1.0], 1e-12).unwrap();
        assert!(c.holds(1e-10), "{c:?}");
        let c = reconstruct_m_kernel(&k, KernelForm::Rho, 1e-9).unwrap();
        assert!(c.holds(1e-8), "{c:?}");

        let k3 = ZetaKernel::uniform(3, 1.0, 1.0).unwrap();
        let v = m_kernel_rho(&k3, &[1.0, 1.0], 1.0).unwrap();
        let expect = pow(PI, 4.5) / (8.0 * pow(PI, 6.0)) * exp(-3.0) * exp(-0.75);
        assert_relative_eq!(v, expect, max_relative = 1e-14);
    }

    #[test]
    fn inverse_jacobian() {
        let k = ZetaKernel::new(vec![0.8, 1.9], vec![1.2, 0.5]).unwrap();
        let xi = 2.0;
        assert_relative_eq!(
            m_kernel_inverse(&k, &[xi]).unwrap(),
            m_kernel(&k, &[1.0 / xi]).unwrap() / (xi * xi),
            max_relative = 1e-13
        );
        let c = reconstruct_m_kernel(&ZetaKernel::uniform(2, 1.0, 1.0).unwrap(), KernelForm::Inverse, 1e-10).unwrap();
        assert!(c.holds(1e-9));
    }

    #[test]
    fn quadratic_form_examples() {
        let k = ZetaKernel::uniform(2, 1.0, 1.0).unwrap();
        let qf = build_quadratic_form(&k, &[1.0], 1.0).unwrap();
        assert_eq!(qf.c_const, 2.0);
        assert_eq!(qf.b_sq, vec![-0.25, -0.25]);
        assert_relative_eq!(c_prime(&qf).unwrap(), 2.5, max_relative = 1e-15);

        let k3 = ZetaKernel::uniform(3, 1.0, 1.0).unwrap();
        let qf = build_quadratic_form(&k3, &[2.0, 3.0], 1.0).unwrap();
        assert_eq!(qf.c_const, 6.0);
        assert_eq!(qf.lambda(), 6.0);
        let qf = build_quadratic_form(&k3, &[1.0, 1.0], 1.0).unwrap();
        assert_relative_eq!(c_prime(&qf).unwrap(), 3.75, max_relative = 1e-15);

        let qf = build_quadratic_form(&k3, &[1.0, 1.0], 1e8).unwrap();
        assert_relative_eq!(c_prime(&qf).unwrap(), qf.c_const, max_relative = 1e-14);
    }

    #[test]
    fn recursion_examples() {
        let k = ZetaKernel::uniform(3, 1.0, 1.0).unwrap();
        let z = [1.0, 1.0];
        let analytic = recursion_trio(&k, &z).unwrap();
        assert_relative_eq!(analytic, m_kernel(&k, &z).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(recursion_trio_fd(&k, &z, 1e-6).unwrap(), analytic, max_relative = 1e-6);
    }

    #[test]
    fn degenerate_kernels_rejected() {
        assert!(matches!(ZetaKernel::uniform(3, 1.0, 0.0), Err(Error::Divergent(_))));
        assert!(ZetaKernel::new(vec![1.0], vec![1.0]).is_err());
        assert!(ZetaKernel::new(vec![1.0, -1.0], vec![1.0, 1.0]).is_err());
        let k = ZetaKernel::uniform(2, 1.0, 1.0).unwrap();
        assert!(m_kernel(&k, &[0.0]).is_err());
        assert!(m_kernel(&k, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn monte_carlo_reconstruction_small() {
        let k = ZetaKernel::uniform(3, 1.0, 1.0).unwrap();
        let c = reconstruct_m_kernel_mc(&k, 5, 200_000).unwrap();
        assert!(c.rel_error() < 5.0 * c.numeric.err_estimate / c.closed + 1e-12, "{c:?}");
    }
}
