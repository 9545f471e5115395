//! Integrals over Macdonald functions of the argument `2√((ax²+bx+c)/x)`,
//! the doubly-infinite exponential identity, and a square-root-ratio
//! antiderivative, each with a quadrature check and a randomized registry.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{exp, fabs, log, sqrt};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::quadrature::{try_integrate_1d, try_integrate_nd, EvalResult, Mapping, QuadraturePlan};
use crate::specfun::{bessel_k, bessel_k_scaled, meijer_g2002, tricomi_u_special, Order};
use crate::transforms::CheckedPair;
use crate::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Relative agreement required of the two sides of a substitution rule.
pub const SUBSTITUTION_TOL: f64 = 1e-12;

/// `W(x) = (ax²+bx+c)/x`, written to stay finite at both ends.
fn w_of(a: f64, b: f64, c: f64, x: f64) -> f64 {
    a * x + b + c / x
}

/// `x^{p} K_ν(2√W)/W^{q}` in log space, so that `0·∞` never arises at the
/// ends of the range.
fn k_term(nu: Order, w: f64, x: f64, x_power: f64, w_power: f64) -> Result<f64> {
    let z = 2.0 * sqrt(w);
    if !z.is_finite() || z > 1500.0 {
        return Ok(0.0);
    }
    let ks = bessel_k_scaled(nu, z)?;
    Ok(exp(log(ks) - z + x_power * log(x) - w_power * log(w)))
}

fn check_abc(a: f64, b: f64, c: f64) -> Result<()> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::domain("a must be non-negative", a));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::domain("b must be non-negative", b));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::domain("c must be positive", c));
    }
    Ok(())
}

/// `s = √(2√(ac)+b)`.
pub fn collapsed_root(a: f64, b: f64, c: f64) -> f64 {
    sqrt(2.0 * sqrt(a) * sqrt(c) + b)
}

fn split_integral<F>(f: F, split: f64, rel_tol: f64) -> Result<EvalResult>
where
    F: Fn(f64) -> Result<f64>,
{
    let head = QuadraturePlan::new(0.0, split).with_rel_tol(rel_tol);
    let tail = QuadraturePlan::semi_infinite(split)
        .with_mapping(Mapping::Rational { scale: split })
        .with_rel_tol(rel_tol);
    Ok(try_integrate_1d(&f, &head)?.combine(try_integrate_1d(&f, &tail)?))
}

fn peak_split(a: f64, c: f64) -> f64 {
    if a > 0.0 {
        sqrt(c / a)
    } else {
        sqrt(c).max(1.0)
    }
}

/// `K₀(2√W)/x^{3/2}`.
pub fn k0_singular_integrand(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    k_term(Order::ZERO, w_of(a, b, c, x), x, -1.5, 0.0)
}

/// `∫₀^∞ K₀(2√W)/x^{3/2} dx = π e^{-2s}/(2√c)`.
pub fn k0_singular_closed(a: f64, b: f64, c: f64) -> Result<f64> {
    check_abc(a, b, c)?;
    Ok(PI * exp(-2.0 * collapsed_root(a, b, c)) / (2.0 * sqrt(c)))
}

pub fn k0_singular_integral(a: f64, b: f64, c: f64, rel_tol: f64) -> Result<CheckedPair> {
    let closed = k0_singular_closed(a, b, c)?;
    let numeric = split_integral(|x| k0_singular_integrand(a, b, c, x), peak_split(a, c), rel_tol)?;
    Ok(CheckedPair { closed, numeric })
}

/// The `K₀` integrand written three ways: Macdonald, Tricomi `U(½,1,·)` and
/// Meijer `G^{2,0}_{0,2}(·|0,0)`.
pub fn k0_representations(a: f64, b: f64, c: f64, x: f64) -> Result<[f64; 3]> {
    check_abc(a, b, c)?;
    let w = w_of(a, b, c, x);
    let k = bessel_k(Order::ZERO, 2.0 * sqrt(w))? / (x * sqrt(x));
    let u = SQRT_PI * exp(-2.0 * sqrt(w)) * tricomi_u_special(Order::ZERO, 4.0 * sqrt(w))? / (x * sqrt(x));
    let g = meijer_g2002(w, Order::ZERO)? / (2.0 * x * sqrt(x));
    Ok([k, u, g])
}

/// Power of `x` multiplying `K₂(2√W)/(ax²+bx+c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum K2Weight {
    ThreeHalves,
    Half,
    MinusHalf,
}

impl K2Weight {
    pub const ALL: [K2Weight; 3] = [K2Weight::ThreeHalves, K2Weight::Half, K2Weight::MinusHalf];

    pub fn exponent(self) -> f64 {
        match self {
            K2Weight::ThreeHalves => 1.5,
            K2Weight::Half => 0.5,
            K2Weight::MinusHalf => -0.5,
        }
    }
}

/// `x^w K₂(2√W)/(ax²+bx+c)`.
pub fn k2_weighted_integrand(weight: K2Weight, a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    k_term(Order::TWO, w_of(a, b, c, x), x, weight.exponent() - 1.0, 1.0)
}

/// Closed forms in terms of `s = √(2√(ac)+b)`. All three are positive.
pub fn k2_weighted_closed(weight: K2Weight, a: f64, b: f64, c: f64) -> Result<f64> {
    check_abc(a, b, c)?;
    let s = collapsed_root(a, b, c);
    let e = PI * exp(-2.0 * s);
    let (sa, sc) = (sqrt(a), sqrt(c));
    match weight {
        K2Weight::ThreeHalves => {
            if a == 0.0 {
                return Err(Error::Divergent("x^{3/2} weight needs a > 0"));
            }
            Ok(e * (1.0 / (4.0 * a * sa * s) + sc / (2.0 * a * s * s) + sc / (4.0 * a * s * s * s)))
        }
        K2Weight::Half => {
            if a == 0.0 {
                return Err(Error::Divergent("x^{1/2} weight needs a > 0"));
            }
            Ok(e / (2.0 * sa * s * s) * (1.0 / (2.0 * s) + 1.0))
        }
        K2Weight::MinusHalf => Ok(e * (1.0 / (2.0 * sc * s * s) + 1.0 / (4.0 * sc * s * s * s))),
    }
}

/// The `x^{1/2}` result as `√π a^{-1/2} s^{-3/2} K_{3/2}(2s)`.
pub fn k2_half_weight_bessel_form(a: f64, b: f64, c: f64) -> Result<f64> {
    check_abc(a, b, c)?;
    let s = collapsed_root(a, b, c);
    Ok(SQRT_PI / (sqrt(a) * s * sqrt(s)) * bessel_k(Order::THREE_HALVES, 2.0 * s)?)
}

pub fn k2_weighted_integrals(weight: K2Weight, a: f64, b: f64, c: f64, rel_tol: f64) -> Result<CheckedPair> {
    let closed = k2_weighted_closed(weight, a, b, c)?;
    let numeric = split_integral(|x| k2_weighted_integrand(weight, a, b, c, x), peak_split(a, c), rel_tol)?;
    Ok(CheckedPair { closed, numeric })
}

/// The weighted `K₂` integrand as Macdonald, `16√π x^{w-1} e^{-2√W} U(5/2,5,4√W)`
/// and `x^w G^{2,0}_{0,2}(W|1,-1)/(2(ax²+bx+c))`.
pub fn k2_representations(weight: K2Weight, a: f64, b: f64, c: f64, x: f64) -> Result<[f64; 3]> {
    check_abc(a, b, c)?;
    let w = w_of(a, b, c, x);
    let xw = libm::pow(x, weight.exponent() - 1.0);
    let k = xw * bessel_k(Order::TWO, 2.0 * sqrt(w))? / w;
    let u = 16.0 * SQRT_PI * xw * exp(-2.0 * sqrt(w)) * tricomi_u_special(Order::TWO, 4.0 * sqrt(w))?;
    let g = xw * meijer_g2002(w, Order::ONE)? / (2.0 * w);
    Ok([k, u, g])
}

/// Test profiles `f(t)` for the exponential-pair identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PbmProfile {
    /// `e^{-t}`
    Exponential,
    /// `1`
    Constant,
    /// `t e^{-t}`
    LinearExponential,
}

impl PbmProfile {
    pub const ALL: [PbmProfile; 3] = [PbmProfile::Exponential, PbmProfile::Constant, PbmProfile::LinearExponential];

    pub fn eval(self, t: f64) -> f64 {
        match self {
            PbmProfile::Exponential => exp(-t),
            PbmProfile::Constant => 1.0,
            PbmProfile::LinearExponential => t * exp(-t),
        }
    }

    /// `∫₀^∞ e^{-st} f(t) dt`.
    pub fn laplace(self, s: f64) -> f64 {
        match self {
            PbmProfile::Exponential => 1.0 / (s + 1.0),
            PbmProfile::Constant => 1.0 / s,
            PbmProfile::LinearExponential => 1.0 / ((s + 1.0) * (s + 1.0)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PbmProfile::Exponential => "exp",
            PbmProfile::Constant => "const",
            PbmProfile::LinearExponential => "texp",
        }
    }
}

/// Both sides of
/// `∫∫ f(xy/(x+y)) e^{-px-qy}/√(x+y) dx dy = √π(√p+√q)/√(pq) ∫ e^{-(√p+√q)²t} f(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbmCheck {
    pub lhs: EvalResult,
    pub rhs: EvalResult,
}

impl PbmCheck {
    pub fn rel_error(&self) -> f64 {
        fabs(self.lhs.value - self.rhs.value) / fabs(self.rhs.value)
    }
}

/// The left side is integrated in `x = rσ`, `y = r(1-σ)`, where the
/// integrand becomes `√r f(rσ(1-σ)) e^{-r(pσ+q(1-σ))}`.
pub fn fixed_pbm<F>(f: F, p: f64, q: f64, rel_tol: f64) -> Result<PbmCheck>
where
    F: Fn(f64) -> f64,
{
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain("p must be positive", p));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::domain("q must be positive", q));
    }
    let sigma = QuadraturePlan::new(0.0, 1.0).with_rel_tol(rel_tol);
    let radial = QuadraturePlan::semi_infinite(0.0)
        .with_mapping(Mapping::Rational { scale: 2.0 / (p + q) })
        .with_rel_tol(rel_tol);
    let lhs = try_integrate_nd(
        |v: &[f64]| {
            let (s, r) = (v[0], v[1]);
            Ok(sqrt(r) * f(r * s * (1.0 - s)) * exp(-r * (p * s + q * (1.0 - s))))
        },
        &[sigma, radial],
    )?;

    let root = sqrt(p) + sqrt(q);
    let rate = root * root;
    let prefactor = SQRT_PI * root / sqrt(p * q);
    let plan = QuadraturePlan::semi_infinite(0.0)
        .with_mapping(Mapping::Rational { scale: 1.0 / rate })
        .with_rel_tol(rel_tol);
    let rhs = try_integrate_1d(|t| Ok(exp(-rate * t) * f(t)), &plan)?.scale(prefactor);
    Ok(PbmCheck { lhs, rhs })
}

/// Closed right side for a test profile.
pub fn fixed_pbm_closed(profile: PbmProfile, p: f64, q: f64) -> f64 {
    let root = sqrt(p) + sqrt(q);
    SQRT_PI * root / sqrt(p * q) * profile.laplace(root * root)
}

/// Parameters of `√(a+gx)/(√(b+hx)(c+fx)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtRatio {
    pub a: f64,
    pub g: f64,
    pub b: f64,
    pub h: f64,
    pub c: f64,
    pub f: f64,
}

/// Value of the antiderivative. Off the real branch the logarithms are
/// principal complex logarithms; `re` is still an antiderivative of the
/// integrand and `im` is locally constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Antiderivative {
    pub re: f64,
    pub im: f64,
    pub in_branch: bool,
}

impl SqrtRatio {
    pub fn new(a: f64, g: f64, b: f64, h: f64, c: f64, f: f64) -> Self {
        SqrtRatio { a, g, b, h, c, f }
    }

    /// `af - cg > 0` and `bf - ch > 0`: every root and logarithm is real.
    pub fn in_branch(&self) -> bool {
        self.a * self.f - self.c * self.g > 0.0 && self.b * self.f - self.c * self.h > 0.0
    }

    pub fn integrand(&self, x: f64) -> Result<f64> {
        let (u, v, d) = self.check_point(x)?;
        Ok(sqrt(u) / (sqrt(v) * d * d))
    }

    fn check_point(&self, x: f64) -> Result<(f64, f64, f64)> {
        let u = self.a + self.g * x;
        let v = self.b + self.h * x;
        let d = self.c + self.f * x;
        if !(u > 0.0) {
            return Err(Error::domain("a + gx must be positive", u));
        }
        if !(v > 0.0) {
            return Err(Error::domain("b + hx must be positive", v));
        }
        if d == 0.0 {
            return Err(Error::domain("c + fx must not vanish", x));
        }
        Ok((u, v, d))
    }

    /// `√(af-cg)√(bf-ch)` and the common log coefficient
    /// `(bg-ah)/(√(af-cg)(bf-ch)^{3/2})`.
    fn roots(&self) -> (Complex64, Complex64, Complex64) {
        let SqrtRatio { a, g, b, h, c, f } = *self;
        let p = Complex64::new(a * f - c * g, 0.0).sqrt();
        let q = Complex64::new(b * f - c * h, 0.0).sqrt();
        let coef = Complex64::new(b * g - a * h, 0.0) / (p * q * q * q);
        (p, q, coef)
    }

    pub fn antiderivative(&self, x: f64) -> Result<Antiderivative> {
        let (u, v, d) = self.check_point(x)?;
        let SqrtRatio { a, g, b, h, c, f } = *self;
        let (p, q, coef) = self.roots();
        let suv = sqrt(u) * sqrt(v);
        let rational = Complex64::new(2.0 * suv / (d * (c * h - b * f)), 0.0);
        let arg1 = p * q * (d * (a * h - b * g));
        let lin = a * (2.0 * b * f - c * h + f * h * x) - b * c * g + b * f * g * x - 2.0 * c * g * h * x;
        let arg2 = (p * q * (2.0 * suv) + lin) * (-2.0 * f * (b * f - c * h));
        self.finish(rational, coef, arg1, arg2)
    }

    /// Limit of [`Self::antiderivative`] as `x → ∞`; requires `f`, `g`, `h > 0`.
    pub fn antiderivative_at_infinity(&self) -> Result<Antiderivative> {
        let SqrtRatio { a, g, b, h, c, f } = *self;
        if f == 0.0 || f.is_nan() || !(g > 0.0) || !(h > 0.0) {
            return Err(Error::domain("limit at infinity needs g, h > 0 and f != 0", f));
        }
        let (p, q, coef) = self.roots();
        let sgh = sqrt(g) * sqrt(h);
        let rational = Complex64::new(2.0 * sgh / (f * (c * h - b * f)), 0.0);
        let lim1 = p * q * (f * (a * h - b * g));
        let lin = a * f * h + b * f * g - 2.0 * c * g * h;
        let lim2 = (p * q * (2.0 * sgh) + lin) * (-2.0 * f * (b * f - c * h));
        self.finish(rational, coef, lim1, lim2)
    }

    fn finish(&self, rational: Complex64, coef: Complex64, arg1: Complex64, arg2: Complex64) -> Result<Antiderivative> {
        let logs = if coef == Complex64::new(0.0, 0.0) {
            coef
        } else {
            coef * (arg1.ln() - arg2.ln())
        };
        let value = (rational + logs) * 0.5;
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite { x: value.re });
        }
        Ok(Antiderivative {
            re: value.re,
            im: value.im,
            in_branch: self.in_branch(),
        })
    }

    /// `∫_{x0}^{x1}` from the antiderivative, with `x1 = ∞` allowed.
    pub fn definite(&self, x0: f64, x1: f64) -> Result<f64> {
        let upper = if x1 == f64::INFINITY {
            self.antiderivative_at_infinity()?
        } else {
            self.antiderivative(x1)?
        };
        Ok(upper.re - self.antiderivative(x0)?.re)
    }

    pub fn quadrature(&self, x0: f64, x1: f64, rel_tol: f64) -> Result<EvalResult> {
        let plan = if x1 == f64::INFINITY {
            QuadraturePlan::semi_infinite(x0).with_mapping(Mapping::Rational { scale: 1.0 + fabs(x0) })
        } else {
            QuadraturePlan::new(x0, x1)
        };
        try_integrate_1d(|x| self.integrand(x), &plan.with_rel_tol(rel_tol))
    }
}

pub fn sqrt_ratio_antiderivative(p: &SqrtRatio, x: f64) -> Result<Antiderivative> {
    p.antiderivative(x)
}

/// Parameter families on which `√(2√(ac)+b)` collapses to
/// `2√(ac)/(xη) + xη/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubstitutionFamily {
    /// `ζ₂` collapse of the three-orbital `K₀` form.
    ThreeOrbital {
        zeta1: f64,
        etas: [f64; 3],
        x2: f64,
    },
    /// `ζ₃` collapse of the four-orbital `K₂` form.
    FourOrbital {
        zeta1: f64,
        zeta2: f64,
        x1p: f64,
        x2: f64,
        x3: f64,
        etas: [f64; 4],
    },
}

impl SubstitutionFamily {
    /// `(a, b, c, xη)`.
    pub fn parameters(&self) -> (f64, f64, f64, f64) {
        match *self {
            SubstitutionFamily::ThreeOrbital { zeta1, etas, x2 } => {
                let [e1, e12, e2] = etas;
                let p = zeta1 + 1.0;
                let q = zeta1 * e12 * e12 + e1 * e1;
                let a = x2 * x2 * e2 * e2 / (4.0 * p);
                let b = x2 * x2 * (q + p * e2 * e2) / (4.0 * p);
                let c = 0.25 * x2 * x2 * q;
                (a, b, c, x2 * e2)
            }
            SubstitutionFamily::FourOrbital {
                zeta1,
                zeta2,
                x1p,
                x2,
                x3,
                etas,
            } => {
                let [e1, e12, e2, e3] = etas;
                let g = e1 * e1 + zeta1 * e12 * e12 + zeta2 * e2 * e2;
                let xq = x1p * x1p * (zeta1 + 1.0) / (4.0 * zeta1) + x2 * x2 * (zeta1 + zeta2 + 1.0) / (4.0 * (zeta1 + 1.0) * zeta2);
                let a = e3 * e3 * xq;
                let b = g * xq + 0.25 * x3 * x3 * e3 * e3;
                let c = 0.25 * x3 * x3 * g;
                (a, b, c, x3 * e3)
            }
        }
    }
}

/// Both sides of the collapse for explicit `(a, b, c, xη)`.
pub fn substitution_sides(a: f64, b: f64, c: f64, x_eta: f64) -> (f64, f64) {
    let lhs = collapsed_root(a, b, c);
    let rhs = 2.0 * sqrt(a) * sqrt(c) / x_eta + 0.5 * x_eta;
    (lhs, rhs)
}

pub fn substitution_holds(a: f64, b: f64, c: f64, x_eta: f64) -> bool {
    let (lhs, rhs) = substitution_sides(a, b, c, x_eta);
    lhs.is_finite() && rhs.is_finite() && fabs(lhs - rhs) <= SUBSTITUTION_TOL * fabs(lhs)
}

pub fn substitution_rule_check(family: &SubstitutionFamily) -> bool {
    let (a, b, c, x_eta) = family.parameters();
    substitution_holds(a, b, c, x_eta)
}

/// One identity: a closed form, a numeric evaluation of the defining
/// integral, and the box its parameters are drawn from.
#[derive(Clone, Copy)]
pub struct IdentityRecord {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub domain: &'static [(f64, f64)],
    pub tol: f64,
    /// Dimension of the numeric integral.
    pub dims: usize,
    pub closed_form: fn(&[f64]) -> Result<f64>,
    pub numeric: fn(&[f64], f64) -> Result<EvalResult>,
    /// Draws outside this predicate are resampled.
    pub admissible: fn(&[f64]) -> bool,
}

impl core::fmt::Debug for IdentityRecord {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("IdentityRecord")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("tol", &self.tol)
            .finish()
    }
}

impl IdentityRecord {
    pub fn check(&self, params: &[f64]) -> Result<CheckedPair> {
        if params.len() != self.params.len() {
            return Err(Error::domain("wrong number of identity parameters", params.len() as f64));
        }
        Ok(CheckedPair {
            closed: (self.closed_form)(params)?,
            numeric: (self.numeric)(params, self.tol * 1e-3)?,
        })
    }
}

const ABC: &[&str] = &["a", "b", "c"];
const PQ: &[&str] = &["p", "q"];
const AGBHCF: &[&str] = &["a", "g", "b", "h", "c", "f"];
const BOX3: &[(f64, f64)] = &[(0.1, 10.0); 3];
const BOX2: &[(f64, f64)] = &[(0.1, 10.0); 2];
const BOX6: &[(f64, f64)] = &[(0.1, 10.0); 6];

fn always(_: &[f64]) -> bool {
    true
}

fn pbm_numeric(profile: PbmProfile, p: &[f64], rel_tol: f64) -> Result<EvalResult> {
    Ok(fixed_pbm(|t| profile.eval(t), p[0], p[1], rel_tol)?.lhs)
}

fn sqrt_ratio_of(p: &[f64]) -> SqrtRatio {
    SqrtRatio::new(p[0], p[1], p[2], p[3], p[4], p[5])
}

/// Interval on which the antiderivative is checked.
pub const SQRT_RATIO_INTERVAL: (f64, f64) = (1.0, 2.0);

pub fn registry() -> Vec<IdentityRecord> {
    alloc::vec![
        IdentityRecord {
            name: "k0_singular",
            params: ABC,
            domain: BOX3,
            tol: 1e-7,
            dims: 1,
            closed_form: |p| k0_singular_closed(p[0], p[1], p[2]),
            numeric: |p, t| Ok(k0_singular_integral(p[0], p[1], p[2], t)?.numeric),
            admissible: always,
        },
        IdentityRecord {
            name: "k2_weight_three_halves",
            params: ABC,
            domain: BOX3,
            tol: 1e-7,
            dims: 1,
            closed_form: |p| k2_weighted_closed(K2Weight::ThreeHalves, p[0], p[1], p[2]),
            numeric: |p, t| Ok(k2_weighted_integrals(K2Weight::ThreeHalves, p[0], p[1], p[2], t)?.numeric),
            admissible: always,
        },
        IdentityRecord {
            name: "k2_weight_half",
            params: ABC,
            domain: BOX3,
            tol: 1e-7,
            dims: 1,
            closed_form: |p| k2_weighted_closed(K2Weight::Half, p[0], p[1], p[2]),
            numeric: |p, t| Ok(k2_weighted_integrals(K2Weight::Half, p[0], p[1], p[2], t)?.numeric),
            admissible: always,
        },
        IdentityRecord {
            name: "k2_weight_minus_half",
            params: ABC,
            domain: BOX3,
            tol: 1e-7,
            dims: 1,
            closed_form: |p| k2_weighted_closed(K2Weight::MinusHalf, p[0], p[1], p[2]),
            numeric: |p, t| Ok(k2_weighted_integrals(K2Weight::MinusHalf, p[0], p[1], p[2], t)?.numeric),
            admissible: always,
        },
        IdentityRecord {
            name: "exp_pair_exp",
            params: PQ,
            domain: BOX2,
            tol: 1e-6,
            dims: 2,
            closed_form: |p| Ok(fixed_pbm_closed(PbmProfile::Exponential, p[0], p[1])),
            numeric: |p, t| pbm_numeric(PbmProfile::Exponential, p, t),
            admissible: always,
        },
        IdentityRecord {
            name: "exp_pair_const",
            params: PQ,
            domain: BOX2,
            tol: 1e-6,
            dims: 2,
            closed_form: |p| Ok(fixed_pbm_closed(PbmProfile::Constant, p[0], p[1])),
            numeric: |p, t| pbm_numeric(PbmProfile::Constant, p, t),
            admissible: always,
        },
        IdentityRecord {
            name: "exp_pair_texp",
            params: PQ,
            domain: BOX2,
            tol: 1e-6,
            dims: 2,
            closed_form: |p| Ok(fixed_pbm_closed(PbmProfile::LinearExponential, p[0], p[1])),
            numeric: |p, t| pbm_numeric(PbmProfile::LinearExponential, p, t),
            admissible: always,
        },
        IdentityRecord {
            name: "sqrt_ratio_antiderivative",
            params: AGBHCF,
            domain: BOX6,
            tol: 1e-7,
            dims: 1,
            closed_form: |p| sqrt_ratio_of(p).definite(SQRT_RATIO_INTERVAL.0, SQRT_RATIO_INTERVAL.1),
            numeric: |p, t| sqrt_ratio_of(p).quadrature(SQRT_RATIO_INTERVAL.0, SQRT_RATIO_INTERVAL.1, t),
            admissible: |p| sqrt_ratio_of(p).in_branch(),
        },
    ]
}

/// Outcome of verifying one record on random draws.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub name: &'static str,
    pub draws: usize,
    /// Draws rejected by the admissibility predicate.
    pub resampled: usize,
    pub max_rel_error: f64,
    pub worst_params: Vec<f64>,
    pub tol: f64,
    pub all_converged: bool,
    pub passed: bool,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Seed of the stream a record draws from.
pub fn record_seed(name: &str, seed: u64) -> u64 {
    fnv1a(name) ^ seed
}

/// Verifies `record` on `draws` admissible parameter sets drawn uniformly
/// from its domain.
pub fn verify_record(record: &IdentityRecord, seed: u64, draws: usize, tol: Option<f64>) -> Result<VerifyReport> {
    let tol = tol.unwrap_or(record.tol);
    let mut rng = ChaCha8Rng::seed_from_u64(record_seed(record.name, seed));
    let mut report = VerifyReport {
        name: record.name,
        draws,
        resampled: 0,
        max_rel_error: 0.0,
        worst_params: Vec::new(),
        tol,
        all_converged: true,
        passed: true,
    };
    let mut params = Vec::with_capacity(record.params.len());
    let mut done = 0;
    while done < draws {
        params.clear();
        params.extend(record.domain.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()));
        if !(record.admissible)(&params) {
            report.resampled += 1;
            if report.resampled > 1000 * draws.max(1) {
                return Err(Error::domain("admissible region too small to sample", report.resampled as f64));
            }
            continue;
        }
        let pair = record.check(&params)?;
        let err = pair.rel_error();
        report.all_converged &= pair.numeric.converged;
        if !(err <= report.max_rel_error) {
            report.max_rel_error = err;
            report.worst_params = params.clone();
        }
        done += 1;
    }
    report.passed = report.max_rel_error <= tol;
    Ok(report)
}
