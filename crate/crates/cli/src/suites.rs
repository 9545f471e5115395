//! Verification suites: every check draws its parameters from its own seeded
//! stream, so a report depends only on the seed and never on scheduling.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use slater_zeta::amplitudes::{self, AmplitudeKind, AmplitudeSpec, EvalOptions, OracleMode};
use slater_zeta::identities::{self, record_seed, registry, SqrtRatio};
use slater_zeta::specfun::{bessel_k, bessel_k_scaled, meijer_g2002, tricomi_u_special, Order};
use slater_zeta::transforms::{self, KernelForm, ZetaKernel};
use slater_zeta::{EvalResult, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Specfun,
    Kernels,
    Amplitudes,
    Identities,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Specfun => "specfun",
            Suite::Kernels => "kernels",
            Suite::Amplitudes => "amplitudes",
            Suite::Identities => "identities",
            Suite::All => "all",
        }
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "specfun" => Ok(Suite::Specfun),
            "kernels" => Ok(Suite::Kernels),
            "amplitudes" => Ok(Suite::Amplitudes),
            "identities" => Ok(Suite::Identities),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite `{s}` (expected specfun, kernels, amplitudes, identities or all)")),
        }
    }
}

/// Kernel sizes the reconstruction checks cover.
pub const KERNEL_SIZES: [usize; 4] = [2, 3, 4, 5];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Replaces every check's own threshold.
    pub tol: Option<f64>,
    /// Restricts the kernel suite to one `M`.
    pub m: Option<usize>,
}

/// Result of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_rel_error: f64,
    pub tol: f64,
    pub samples: usize,
    pub passed: bool,
    /// All underlying quadratures met their own tolerance.
    pub converged: bool,
    /// Parameters at which `max_rel_error` was attained.
    pub worst_params: Vec<f64>,
    pub detail: Option<String>,
}

/// Running maximum of relative errors over a set of samples.
#[derive(Debug, Clone, Default)]
pub struct Tally {
    max: f64,
    worst: Vec<f64>,
    samples: usize,
    converged: bool,
}

impl Tally {
    pub fn new() -> Self {
        Tally {
            converged: true,
            ..Tally::default()
        }
    }

    pub fn record(&mut self, err: f64, params: &[f64]) {
        self.samples += 1;
        if err > self.max || err.is_nan() {
            self.max = err;
            self.worst = params.to_vec();
        }
    }

    pub fn record_pair(&mut self, lhs: f64, rhs: f64, params: &[f64]) {
        self.record(rel(lhs, rhs), params);
    }

    pub fn record_result(&mut self, r: &EvalResult, truth: f64, params: &[f64]) {
        self.converged &= r.converged;
        self.record(r.rel_error_to(truth), params);
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

type CheckFn = fn(&mut ChaCha8Rng, &mut Tally) -> Result<()>;

/// A named check with its default threshold.
#[derive(Clone, Copy)]
pub struct CheckSpec {
    pub name: &'static str,
    pub suite: Suite,
    pub tol: f64,
    /// Kernel size the check belongs to, if any.
    pub m: Option<usize>,
    run: CheckFn,
}

impl fmt::Debug for CheckSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CheckSpec").field("name", &self.name).field("tol", &self.tol).finish()
    }
}

impl CheckSpec {
    pub fn run(&self, opts: &SuiteOptions) -> Check {
        let tol = opts.tol.unwrap_or(self.tol);
        let mut rng = ChaCha8Rng::seed_from_u64(record_seed(self.name, opts.seed));
        let mut tally = Tally::new();
        let outcome = (self.run)(&mut rng, &mut tally);
        let detail = outcome.as_ref().err().map(|e| e.to_string());
        Check {
            name: self.name.to_string(),
            max_rel_error: tally.max,
            tol,
            samples: tally.samples,
            passed: detail.is_none() && tally.samples > 0 && tally.max <= tol,
            converged: tally.converged,
            worst_params: tally.worst,
            detail,
        }
    }
}

const fn check(name: &'static str, suite: Suite, tol: f64, run: CheckFn) -> CheckSpec {
    CheckSpec { name, suite, tol, m: None, run }
}

const fn kernel_check(name: &'static str, tol: f64, m: usize, run: CheckFn) -> CheckSpec {
    CheckSpec { name, suite: Suite::Kernels, tol, m: Some(m), run }
}

/// Every check in every suite.
pub fn catalogue() -> Vec<CheckSpec> {
    use Suite::*;
    let mut out = vec![
        check("specfun.k_recurrence", Specfun, 1e-10, specfun_recurrence),
        check("specfun.u_closure", Specfun, 1e-10, specfun_u_closure),
        check("specfun.g_reduction", Specfun, 1e-10, specfun_g_reduction),
        check("specfun.k_scaled", Specfun, 1e-12, specfun_scaled),
        kernel_check("kernels.reconstruct_m2", 1e-6, 2, |r, t| kernel_reconstruction(r, t, 2, 50)),
        kernel_check("kernels.reconstruct_m3", 1e-6, 3, |r, t| kernel_reconstruction(r, t, 3, 50)),
        kernel_check("kernels.reconstruct_m4_mc", 1e-3, 4, |r, t| kernel_reconstruction_mc(r, t, 4, 3)),
        kernel_check("kernels.reconstruct_m5_mc", 1e-3, 5, |r, t| kernel_reconstruction_mc(r, t, 5, 3)),
        kernel_check("kernels.recursion", 1e-10, 3, |r, t| kernel_recursion(r, t, 100)),
        kernel_check("kernels.recursion_fd", 1e-6, 3, |r, t| kernel_recursion_fd(r, t, 100)),
        check("kernels.c_prime_omega", Kernels, 1e-12, |r, t| kernel_c_prime(r, t, 200)),
        check("kernels.inverse_jacobian", Kernels, 1e-12, kernel_inverse_jacobian),
        check("kernels.rho_form", Kernels, 1e-8, kernel_rho_form),
        check("amplitudes.s2_new_transform", Amplitudes, 1e-8, |r, t| s2_route(r, t, amplitudes::Route::NewSequential, 100)),
        check("amplitudes.s2_gaussian", Amplitudes, 1e-8, |r, t| s2_route(r, t, amplitudes::Route::Gaussian, 100)),
        check("amplitudes.s2_seam", Amplitudes, 1e-5, s2_seam),
        check("amplitudes.s2_direct", Amplitudes, 1e-6, s2_direct),
        check("amplitudes.s3_simultaneous", Amplitudes, 1e-6, |r, t| s3_route(r, t, amplitudes::Route::NewSimultaneous, 25)),
        check("amplitudes.s3_zeta2_first", Amplitudes, 1e-6, |r, t| s3_route(r, t, amplitudes::Route::RhoForm, 25)),
        check("amplitudes.s3_zeta_last", Amplitudes, 1e-6, |r, t| s3_route(r, t, amplitudes::Route::ZetaLast, 25)),
        check("amplitudes.s3_gaussian", Amplitudes, 1e-6, |r, t| s3_route(r, t, amplitudes::Route::Gaussian, 25)),
        check("amplitudes.s3_sequential", Amplitudes, 1e-6, |r, t| s3_route(r, t, amplitudes::Route::NewSequential, 25)),
        check("amplitudes.s3_reduced", Amplitudes, 1e-10, s3_reduced),
        check("amplitudes.s3_antiderivative", Amplitudes, 1e-7, s3_antiderivative),
        check("amplitudes.s3_symmetry", Amplitudes, 1e-14, s3_symmetry),
        check("amplitudes.s4_simultaneous", Amplitudes, 1e-4, |r, t| s4_route(r, t, 5)),
        check("amplitudes.s3_direct", Amplitudes, 1e-8, s3_direct),
        check("identities.sqrt_ratio_derivative", Identities, 1e-6, sqrt_ratio_derivative),
        check("identities.representations", Identities, 1e-10, representations),
        check("identities.substitution_rule", Identities, identities::SUBSTITUTION_TOL, substitution_rule),
    ];
    for record in registry() {
        out.push(CheckSpec {
            name: record.name,
            suite: Identities,
            tol: record.tol,
            m: None,
            run: |_, _| Ok(()),
        });
    }
    out
}

/// The checks `suite` selects under `opts`.
pub fn select(suite: Suite, opts: &SuiteOptions) -> Vec<CheckSpec> {
    catalogue()
        .into_iter()
        .filter(|c| suite.includes(c.suite))
        .filter(|c| match (opts.m, c.suite) {
            (Some(m), Suite::Kernels) => c.m == Some(m),
            _ => true,
        })
        .collect()
}

fn run_spec(spec: &CheckSpec, opts: &SuiteOptions) -> Check {
    match registry().iter().find(|r| r.name == spec.name) {
        Some(record) => run_record(record, opts),
        None => spec.run(opts),
    }
}

/// Runs `suite` concurrently and returns the checks sorted by name.
pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Vec<Check> {
    let mut checks: Vec<Check> = select(suite, opts).par_iter().map(|spec| run_spec(spec, opts)).collect();
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    checks
}

/// Runs the check reported as `name`, if there is one.
pub fn run_check(name: &str, opts: &SuiteOptions) -> Option<Check> {
    let bare = name.strip_prefix("identities.").unwrap_or(name);
    catalogue()
        .iter()
        .find(|c| c.name == name || (c.suite == Suite::Identities && c.name == bare))
        .map(|spec| run_spec(spec, opts))
}

/// Draws per identity record.
pub const IDENTITY_DRAWS: usize = 50;

fn run_record(record: &identities::IdentityRecord, opts: &SuiteOptions) -> Check {
    let tol = opts.tol.unwrap_or(record.tol);
    match identities::verify_record(record, opts.seed, IDENTITY_DRAWS, Some(tol)) {
        Ok(r) => Check {
            name: format!("identities.{}", r.name),
            max_rel_error: r.max_rel_error,
            tol,
            samples: r.draws,
            passed: r.passed,
            converged: r.all_converged,
            worst_params: r.worst_params,
            detail: (r.resampled > 0).then(|| format!("{} out-of-branch draws resampled", r.resampled)),
        },
        Err(e) => Check {
            name: format!("identities.{}", record.name),
            max_rel_error: f64::INFINITY,
            tol,
            samples: 0,
            passed: false,
            converged: false,
            worst_params: Vec::new(),
            detail: Some(e.to_string()),
        },
    }
}

fn uniform<const N: usize>(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; N] {
    std::array::from_fn(|_| rng.random_range(lo..hi))
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn specfun_recurrence(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..200 {
        let z = log_uniform(rng, 0.1, 100.0);
        for twice in 1..=4 {
            let nu = twice as f64 / 2.0;
            let up = bessel_k_scaled(Order::from_twice(twice + 2), z)?;
            let down = bessel_k_scaled(Order::from_twice(twice - 2), z)?;
            let mid = bessel_k_scaled(Order::from_twice(twice), z)?;
            t.record_pair(up - down, 2.0 * nu / z * mid, &[nu, z]);
        }
    }
    Ok(())
}

fn specfun_u_closure(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..200 {
        let z = log_uniform(rng, 0.05, 300.0);
        for nu in [Order::ZERO, Order::TWO] {
            let v = nu.value();
            let lhs = PI.sqrt() * (2.0 * z).powf(v) * (-z).exp() * tricomi_u_special(nu, 2.0 * z)?;
            t.record_pair(lhs, bessel_k(nu, z)?, &[v, z]);
        }
    }
    Ok(())
}

/// Ascending series for `K₀`, independent of the library's evaluation.
pub fn k0_series(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let q = x * x / 4.0;
    let (mut term, mut harmonic, mut i0, mut rest) = (1.0, 0.0, 1.0, 0.0);
    for k in 1..200 {
        term *= q / (k * k) as f64;
        harmonic += 1.0 / k as f64;
        i0 += term;
        rest += term * harmonic;
        if term < 1e-18 * i0 {
            break;
        }
    }
    -((x / 2.0).ln() + EULER_GAMMA) * i0 + rest
}

fn specfun_g_reduction(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..20 {
        let z = rng.random_range(0.01..4.0);
        t.record_pair(meijer_g2002(z, Order::ZERO)?, 2.0 * k0_series(2.0 * z.sqrt()), &[z]);
    }
    Ok(())
}

fn specfun_scaled(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..200 {
        let z = log_uniform(rng, 0.1, 650.0);
        for twice in 0..=4 {
            let nu = Order::from_twice(twice);
            t.record_pair(bessel_k_scaled(nu, z)? * (-z).exp(), bessel_k(nu, z)?, &[nu.value(), z]);
        }
    }
    Ok(())
}

fn random_kernel(rng: &mut ChaCha8Rng, m: usize) -> Result<ZetaKernel> {
    let rs = (0..m).map(|_| rng.random_range(0.2..3.0)).collect();
    let etas = (0..m).map(|_| rng.random_range(0.2..3.0)).collect();
    ZetaKernel::new(rs, etas)
}

fn kernel_params(k: &ZetaKernel) -> Vec<f64> {
    k.rs().iter().chain(k.etas()).copied().collect()
}

/// Deterministic reconstruction of `m`-orbital kernels on `draws` random sets.
pub fn kernel_reconstruction(rng: &mut ChaCha8Rng, t: &mut Tally, m: usize, draws: usize) -> Result<()> {
    for _ in 0..draws {
        let k = random_kernel(rng, m)?;
        let c = transforms::reconstruct_m_kernel(&k, KernelForm::Compact, 1e-9)?;
        t.record_result(&c.numeric, c.closed, &kernel_params(&k));
    }
    Ok(())
}

/// Samples per Monte-Carlo kernel reconstruction.
pub const KERNEL_MC_SAMPLES: usize = 200_000;

/// Seeded Monte-Carlo reconstruction of `m`-orbital kernels.
pub fn kernel_reconstruction_mc(rng: &mut ChaCha8Rng, t: &mut Tally, m: usize, draws: usize) -> Result<()> {
    for _ in 0..draws {
        let k = random_kernel(rng, m)?;
        let c = transforms::reconstruct_m_kernel_mc(&k, rng.random(), KERNEL_MC_SAMPLES)?;
        t.record_result(&c.numeric, c.closed, &kernel_params(&k));
    }
    Ok(())
}

fn random_zetas(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| log_uniform(rng, 0.05, 20.0)).collect()
}

/// Analytic recursion against the trio kernel at `points` random points.
pub fn kernel_recursion(rng: &mut ChaCha8Rng, t: &mut Tally, points: usize) -> Result<()> {
    for _ in 0..points {
        let k = random_kernel(rng, 3)?;
        let z = random_zetas(rng, 2);
        t.record_pair(transforms::recursion_trio(&k, &z)?, transforms::m_kernel(&k, &z)?, &z);
    }
    Ok(())
}

/// Central difference against the analytic recursion.
pub fn kernel_recursion_fd(rng: &mut ChaCha8Rng, t: &mut Tally, points: usize) -> Result<()> {
    for _ in 0..points {
        let k = random_kernel(rng, 3)?;
        let z = random_zetas(rng, 2);
        let h = 1e-6 * k.a(&z);
        t.record_pair(transforms::recursion_trio_fd(&k, &z, h)?, transforms::recursion_trio(&k, &z)?, &z);
    }
    Ok(())
}

/// `c′Λ` against the minor expansion of `Ω` on `configs` random forms with
/// `2 ≤ M ≤ 6`.
pub fn kernel_c_prime(rng: &mut ChaCha8Rng, t: &mut Tally, configs: usize) -> Result<()> {
    for _ in 0..configs {
        let m = rng.random_range(2..=6);
        let k = random_kernel(rng, m)?;
        let z = random_zetas(rng, m - 1);
        let rho = log_uniform(rng, 0.05, 20.0);
        let qf = transforms::build_quadratic_form(&k, &z, rho)?;
        let lhs = qf.c_prime_closed() * qf.lambda();
        t.record_pair(lhs, qf.omega_minors(), &[m as f64, rho]);
        t.record_pair(lhs, qf.omega_determinant(), &[m as f64, rho]);
    }
    Ok(())
}

fn kernel_inverse_jacobian(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..100 {
        let m = rng.random_range(2..=5);
        let k = random_kernel(rng, m)?;
        let xi = random_zetas(rng, m - 1);
        let z: Vec<f64> = xi.iter().map(|x| 1.0 / x).collect();
        let jac: f64 = xi.iter().map(|x| 1.0 / (x * x)).product();
        t.record_pair(transforms::m_kernel_inverse(&k, &xi)?, transforms::m_kernel(&k, &z)? * jac, &xi);
    }
    Ok(())
}

fn kernel_rho_form(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..30 {
        let m = rng.random_range(2..=4);
        let k = random_kernel(rng, m)?;
        let z = random_zetas(rng, m - 1);
        let c = transforms::reconstruct_rho_integral(&k, &z, 1e-10)?;
        t.record_result(&c.numeric, c.closed, &z);
    }
    Ok(())
}

/// Two-orbital route against the closed form on `draws` sets in `[0.2, 5]³`.
pub fn s2_route(rng: &mut ChaCha8Rng, t: &mut Tally, route: amplitudes::Route, draws: usize) -> Result<()> {
    for _ in 0..draws {
        let [e1, e12, x2] = uniform(rng, 0.2, 5.0);
        let spec = AmplitudeSpec::new(AmplitudeKind::S2, vec![e1, e12], Some(x2))?;
        let r = amplitudes::evaluate(&spec, route, EvalOptions::default())?;
        t.record_result(&r, spec.closed_form()?, &[e1, e12, x2]);
    }
    Ok(())
}

fn s2_seam(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..100 {
        let [e, x] = uniform(rng, 0.05, 10.0);
        let limit = 2.0 * PI * (-e * x).exp() / e;
        for d in [1e-7, -1e-7] {
            t.record_pair(amplitudes::s2_closed(e, e + d, x)?, limit, &[e, d, x]);
        }
    }
    Ok(())
}

fn s2_direct(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..5 {
        let [e1, e12, x2] = uniform(rng, 0.3, 3.0);
        let spec = AmplitudeSpec::new(AmplitudeKind::S2, vec![e1, e12], Some(x2))?;
        let r = amplitudes::direct_oracle(&spec, OracleMode::SemiDirect, 1e-9)?;
        t.record_result(&r, spec.closed_form()?, &[e1, e12, x2]);
    }
    Ok(())
}

/// Three-orbital route on `(1,1,1)` and `draws - 1` random sets in `[0.3, 3]³`.
pub fn s3_route(rng: &mut ChaCha8Rng, t: &mut Tally, route: amplitudes::Route, draws: usize) -> Result<()> {
    for i in 0..draws {
        let etas = if i == 0 { [1.0; 3] } else { uniform(rng, 0.3, 3.0) };
        let spec = AmplitudeSpec::new(AmplitudeKind::S3, etas.to_vec(), None)?;
        let r = amplitudes::evaluate(&spec, route, EvalOptions::default())?;
        t.record_result(&r, spec.closed_form()?, &etas);
    }
    Ok(())
}

fn s3_reduced(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..25 {
        let etas = uniform(rng, 0.3, 3.0);
        let r = amplitudes::s3_simultaneous_1d(etas, EvalOptions::default())?;
        t.record_result(&r, amplitudes::s3_closed(etas[0], etas[1], etas[2])?, &etas);
    }
    Ok(())
}

fn s3_antiderivative(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..25 {
        let etas = uniform(rng, 0.3, 3.0);
        if let Some(v) = amplitudes::s3_antiderivative(etas)? {
            t.record_pair(v, amplitudes::s3_closed(etas[0], etas[1], etas[2])?, &etas);
        }
    }
    Ok(())
}

fn s3_symmetry(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..100 {
        let e: [f64; 3] = uniform(rng, 0.01, 10.0);
        let v = amplitudes::s3_closed(e[0], e[1], e[2])?;
        for p in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            t.record_pair(amplitudes::s3_closed(e[p[0]], e[p[1]], e[p[2]])?, v, &e);
        }
    }
    Ok(())
}

/// Four-orbital simultaneous route on `(1,1,1,1)` and `sets - 1` random sets.
pub fn s4_route(rng: &mut ChaCha8Rng, t: &mut Tally, sets: usize) -> Result<()> {
    for i in 0..sets {
        let etas = if i == 0 { [1.0; 4] } else { uniform(rng, 0.3, 3.0) };
        let r = amplitudes::s4_via_simultaneous(etas, EvalOptions::default())?;
        t.record_result(&r, amplitudes::s4_closed(etas[0], etas[1], etas[2], etas[3])?, &etas);
    }
    Ok(())
}

fn s3_direct(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..3 {
        let etas: [f64; 3] = uniform(rng, 0.5, 2.5);
        let spec = AmplitudeSpec::new(AmplitudeKind::S3, etas.to_vec(), None)?;
        let r = amplitudes::direct_oracle(&spec, OracleMode::SemiDirect, 1e-10)?;
        t.record_result(&r, spec.closed_form()?, &etas);
    }
    Ok(())
}

fn sqrt_ratio_derivative(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let mut done = 0;
    while done < 20 {
        let p: [f64; 6] = uniform(rng, 0.1, 10.0);
        let sr = SqrtRatio::new(p[0], p[1], p[2], p[3], p[4], p[5]);
        if !sr.in_branch() {
            continue;
        }
        let x = log_uniform(rng, 0.05, 20.0);
        let h = 1e-4 * x;
        let f = |s: f64| identities::sqrt_ratio_antiderivative(&sr, s).map(|a| a.re);
        let d = (f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h);
        t.record_pair(d, sr.integrand(x)?, &p);
        done += 1;
    }
    Ok(())
}

fn representations(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..100 {
        let [a, b, c] = uniform(rng, 0.1, 10.0);
        let x = log_uniform(rng, 0.01, 50.0);
        let [k, u, g] = identities::k0_representations(a, b, c, x)?;
        t.record_pair(u, k, &[a, b, c, x]);
        t.record_pair(g, k, &[a, b, c, x]);
        for w in identities::K2Weight::ALL {
            let [k, u, g] = identities::k2_representations(w, a, b, c, x)?;
            t.record_pair(u, k, &[a, b, c, x]);
            t.record_pair(g, k, &[a, b, c, x]);
        }
    }
    Ok(())
}

fn substitution_rule(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..100 {
        let etas: [f64; 3] = uniform(rng, 0.1, 5.0);
        let zeta1 = log_uniform(rng, 0.01, 20.0);
        let x2 = rng.random_range(0.1..5.0);
        let family = identities::SubstitutionFamily::ThreeOrbital { zeta1, etas, x2 };
        let (a, b, c, x_eta) = family.parameters();
        let (lhs, rhs) = identities::substitution_sides(a, b, c, x_eta);
        t.record_pair(lhs, rhs, &[zeta1, x2]);
    }
    Ok(())
}
