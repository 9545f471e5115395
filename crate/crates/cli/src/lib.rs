//! Command-line front end: `eval`, `verify` and `converge`.

pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use slater_zeta::amplitudes::{self, AmplitudeKind, AmplitudeSpec, EvalOptions, Route};
use slater_zeta::Error;

use report::{Format, LadderRow, Report, Rows};
use suites::{Check, Suite, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Budgets tried by `converge`, in evaluations.
pub const LADDER: [usize; 7] = [1_000, 2_000, 5_000, 10_000, 20_000, 50_000, 100_000];

#[derive(Debug, Parser)]
#[command(name = "slater-zeta", version, about = "Multi-centre Slater integrals by zeta transforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one amplitude.
    Eval(Flags),
    /// Run verification suites.
    Verify(Flags),
    /// Tabulate a numeric route against a ladder of budgets.
    Converge(Flags),
}

#[derive(Debug, Args, Default)]
struct Flags {
    /// s2, s2-coulomb, s3 or s4.
    #[arg(long)]
    kind: Option<AmplitudeKind>,
    /// closed, gaussian, new-transform, simultaneous, zeta-last or rho-form.
    #[arg(long)]
    route: Option<Route>,
    /// Comma-separated decay constants.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    etas: Option<Vec<f64>>,
    /// Internuclear distance.
    #[arg(long, allow_hyphen_values = true)]
    x2: Option<f64>,
    #[arg(long)]
    suite: Option<Suite>,
    /// Relative tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// json, csv or human.
    #[arg(long)]
    format: Option<Format>,
    /// Evaluation budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Kernel size for the kernels suite.
    #[arg(long)]
    m: Option<usize>,
    /// TOML file supplying any of the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    kind: Option<String>,
    route: Option<String>,
    etas: Option<Vec<f64>>,
    x2: Option<f64>,
    suite: Option<String>,
    tol: Option<f64>,
    seed: Option<u64>,
    format: Option<String>,
    budget: Option<usize>,
    m: Option<usize>,
}

/// Flags merged over the configuration file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    pub kind: Option<AmplitudeKind>,
    pub route: Option<Route>,
    pub etas: Option<Vec<f64>>,
    pub x2: Option<f64>,
    pub suite: Option<Suite>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub format: Format,
    pub budget: Option<usize>,
    pub m: Option<usize>,
}

fn parse_field<T: std::str::FromStr>(v: Option<String>, what: &str) -> anyhow::Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    v.map(|s| s.parse::<T>().map_err(|e| anyhow!("config {what}: {e}"))).transpose()
}

impl Settings {
    fn resolve(flags: Flags) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                toml::from_str::<ConfigFile>(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => ConfigFile::default(),
        };
        let s = Settings {
            kind: flags.kind.or(parse_field(file.kind, "kind")?),
            route: flags.route.or(parse_field(file.route, "route")?),
            etas: flags.etas.or(file.etas),
            x2: flags.x2.or(file.x2),
            suite: flags.suite.or(parse_field(file.suite, "suite")?),
            tol: flags.tol.or(file.tol),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            format: flags.format.or(parse_field(file.format, "format")?).unwrap_or_default(),
            budget: flags.budget.or(file.budget),
            m: flags.m.or(file.m),
        };
        if let Some(t) = s.tol {
            if !(t > 0.0 && t.is_finite()) {
                bail!("--tol must be positive, got {t}");
            }
        }
        if s.budget == Some(0) {
            bail!("--budget must be positive");
        }
        Ok(s)
    }

    fn spec(&self) -> anyhow::Result<AmplitudeSpec> {
        let kind = self.kind.ok_or_else(|| anyhow!("--kind is required"))?;
        let etas = self.etas.clone().ok_or_else(|| anyhow!("--etas is required"))?;
        if kind.needs_x2() && self.x2.is_none() {
            bail!("--x2 is required for {kind}");
        }
        let x2 = if kind.needs_x2() { self.x2 } else { None };
        Ok(AmplitudeSpec::new(kind, etas, x2)?)
    }

    fn options(&self) -> EvalOptions {
        EvalOptions {
            rel_tol: self.tol,
            max_evals: self.budget,
        }
    }
}

fn spec_params(spec: &AmplitudeSpec) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("kind".into(), spec.kind.name().into());
    m.insert("etas".into(), json!(spec.etas));
    if let Some(x2) = spec.x2 {
        m.insert("x2".into(), x2.into());
    }
    m
}

/// Report and exit code of one command.
pub struct Outcome {
    pub report: Report,
    pub code: i32,
}

fn eval(s: &Settings) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let spec = s.spec()?;
    let route = s.route.unwrap_or(Route::ClosedForm);
    let r = amplitudes::evaluate(&spec, route, s.options())?;
    let mut checks = Vec::new();
    if route != Route::ClosedForm {
        let closed = spec.closed_form()?;
        let err = r.rel_error_to(closed);
        let tol = s.tol.unwrap_or(1e-6);
        checks.push(Check {
            name: "closed_form".into(),
            max_rel_error: err,
            tol,
            samples: 1,
            passed: err <= tol,
            converged: r.converged,
            worst_params: Vec::new(),
            detail: None,
        });
    }
    let code = if r.converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    Ok(Outcome {
        report: Report {
            command: "eval",
            params: spec_params(&spec),
            route: Some(route.name().into()),
            value: Some(r.value),
            err_estimate: Some(r.err_estimate),
            n_evals: Some(r.n_evals),
            converged: r.converged,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            rows: Rows::Checks(checks),
        },
        code,
    })
}

fn verify(s: &Settings) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let suite = s.suite.unwrap_or(Suite::All);
    if let Some(m) = s.m {
        if !suites::KERNEL_SIZES.contains(&m) {
            bail!("--m must be one of {:?}, got {m}", suites::KERNEL_SIZES);
        }
    }
    let opts = SuiteOptions {
        seed: s.seed,
        tol: s.tol,
        m: s.m,
    };
    let checks = suites::run_suite(suite, &opts);
    let passed = checks.iter().all(|c| c.passed);
    let mut params = Map::new();
    params.insert("suite".into(), suite.name().into());
    params.insert("seed".into(), s.seed.into());
    params.insert("tol".into(), s.tol.into());
    params.insert("m".into(), s.m.into());
    Ok(Outcome {
        report: Report {
            command: "verify",
            params,
            route: None,
            value: None,
            err_estimate: None,
            n_evals: None,
            converged: checks.iter().all(|c| c.converged),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            rows: Rows::Checks(checks),
        },
        code: if passed { EXIT_OK } else { EXIT_NOT_CONVERGED },
    })
}

/// Rungs of the ladder up to `cap`; a cap between rungs becomes the last rung.
pub fn ladder(cap: Option<usize>) -> Vec<usize> {
    let cap = cap.unwrap_or(*LADDER.last().expect("non-empty"));
    let mut out: Vec<usize> = LADDER.iter().copied().filter(|&b| b <= cap).collect();
    if out.last() != Some(&cap) {
        out.push(cap);
    }
    out
}

fn converge(s: &Settings) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let spec = s.spec()?;
    let route = s.route.ok_or_else(|| anyhow!("--route is required"))?;
    if route == Route::ClosedForm {
        bail!("nothing to converge: the closed route is exact");
    }
    let closed = spec.closed_form()?;
    let mut rows = Vec::new();
    for budget in ladder(s.budget) {
        let opts = EvalOptions {
            rel_tol: s.tol,
            max_evals: Some(budget),
        };
        let r = amplitudes::evaluate(&spec, route, opts)?;
        rows.push(LadderRow {
            budget,
            n_evals: r.n_evals,
            value: r.value,
            err_estimate: r.err_estimate,
            rel_error: r.rel_error_to(closed),
            converged: r.converged,
        });
    }
    let last = rows.last().expect("at least one rung").clone();
    let mut params = spec_params(&spec);
    params.insert("tol".into(), s.tol.into());
    Ok(Outcome {
        report: Report {
            command: "converge",
            params,
            route: Some(route.name().into()),
            value: Some(last.value),
            err_estimate: Some(last.err_estimate),
            n_evals: Some(rows.iter().map(|r| r.n_evals).sum()),
            converged: last.converged,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            rows: Rows::Ladder(rows),
        },
        code: if last.converged { EXIT_OK } else { EXIT_NOT_CONVERGED },
    })
}

fn usage_error(e: &anyhow::Error) -> bool {
    !matches!(
        e.downcast_ref::<Error>(),
        Some(Error::NonFinite { .. }) | Some(Error::Consistency { .. })
    )
}

/// Runs the command line `args` (program name first), writing the report
/// to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let (command, flags) = match cli.command {
        Command::Eval(f) => ("eval", f),
        Command::Verify(f) => ("verify", f),
        Command::Converge(f) => ("converge", f),
    };
    let result = Settings::resolve(flags).and_then(|s| {
        let outcome = match command {
            "eval" => eval(&s),
            "verify" => verify(&s),
            _ => converge(&s),
        }?;
        Ok((s.format, outcome))
    });
    match result {
        Ok((format, outcome)) => {
            let _ = out.write_all(outcome.report.render(format).as_bytes());
            if outcome.code == EXIT_NOT_CONVERGED {
                let _ = writeln!(err, "warning: not all results met their tolerance");
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if usage_error(&e) {
                EXIT_USAGE
            } else {
                EXIT_NOT_CONVERGED
            }
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_caps() {
        assert_eq!(ladder(None), LADDER.to_vec());
        assert_eq!(ladder(Some(3_000)), vec![1_000, 2_000, 3_000]);
        assert_eq!(ladder(Some(500)), vec![500]);
    }

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join(format!("slater-zeta-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.toml");
        std::fs::write(&path, "kind = \"s3\"\netas = [1.0, 1.0, 1.0]\nseed = 9\nformat = \"json\"\n").unwrap();
        let flags = Flags {
            seed: Some(3),
            config: Some(path),
            ..Flags::default()
        };
        let s = Settings::resolve(flags).unwrap();
        assert_eq!(s.kind, Some(AmplitudeKind::S3));
        assert_eq!(s.etas, Some(vec![1.0; 3]));
        assert_eq!(s.seed, 3);
        assert_eq!(s.format, Format::Json);
    }
}
