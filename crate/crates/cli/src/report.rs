//! Rendering of command reports as JSON, CSV or aligned text.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::suites::Check;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Json,
    Csv,
    #[default]
    Human,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "human" => Ok(Format::Human),
            _ => Err(format!("unknown format `{s}` (expected json, csv or human)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Human => "human",
        })
    }
}

/// One rung of a convergence ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderRow {
    pub budget: usize,
    pub n_evals: usize,
    pub value: f64,
    pub err_estimate: f64,
    /// Relative error against the closed form.
    pub rel_error: f64,
    pub converged: bool,
}

/// Per-command rows listed under `checks`.
#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    Checks(Vec<Check>),
    Ladder(Vec<LadderRow>),
}

impl Rows {
    fn to_json(&self) -> Vec<Value> {
        match self {
            Rows::Checks(c) => c.iter().map(|c| serde_json::to_value(c).expect("plain data")).collect(),
            Rows::Ladder(l) => l.iter().map(|r| serde_json::to_value(r).expect("plain data")).collect(),
        }
    }
}

/// Everything a command reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub params: Map<String, Value>,
    pub route: Option<String>,
    pub value: Option<f64>,
    pub err_estimate: Option<f64>,
    pub n_evals: Option<usize>,
    pub converged: bool,
    pub wall_ms: f64,
    pub rows: Rows,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        out.insert("command".into(), self.command.into());
        out.insert("params".into(), Value::Object(self.params.clone()));
        out.insert("route".into(), self.route.clone().into());
        out.insert("value".into(), self.value.into());
        out.insert("err_estimate".into(), self.err_estimate.into());
        out.insert("n_evals".into(), self.n_evals.into());
        out.insert("converged".into(), self.converged.into());
        out.insert("wall_ms".into(), self.wall_ms.into());
        out.insert("checks".into(), Value::Array(self.rows.to_json()));
        Value::Object(out)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("plain data");
                s.push('\n');
                s
            }
            Format::Csv => self.csv(),
            Format::Human => self.human(),
        }
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.rows {
            Rows::Checks(checks) if self.command == "verify" => {
                w.write_record(["name", "max_rel_error", "tol", "samples", "passed", "converged"])
                    .expect("in-memory");
                for c in checks {
                    w.write_record([
                        c.name.clone(),
                        sig(c.max_rel_error),
                        sig(c.tol),
                        c.samples.to_string(),
                        c.passed.to_string(),
                        c.converged.to_string(),
                    ])
                    .expect("in-memory");
                }
            }
            Rows::Ladder(rows) => {
                w.write_record(["budget", "n_evals", "value", "err_estimate", "rel_error", "converged"])
                    .expect("in-memory");
                for r in rows {
                    w.write_record([
                        r.budget.to_string(),
                        r.n_evals.to_string(),
                        sig(r.value),
                        sig(r.err_estimate),
                        sig(r.rel_error),
                        r.converged.to_string(),
                    ])
                    .expect("in-memory");
                }
            }
            Rows::Checks(_) => {
                w.write_record(["command", "params", "route", "value", "err_estimate", "n_evals", "converged", "wall_ms"])
                    .expect("in-memory");
                w.write_record([
                    self.command.to_string(),
                    params_text(&self.params),
                    self.route.clone().unwrap_or_default(),
                    self.value.map(sig).unwrap_or_default(),
                    self.err_estimate.map(sig).unwrap_or_default(),
                    self.n_evals.map(|n| n.to_string()).unwrap_or_default(),
                    self.converged.to_string(),
                    format!("{:.3}", self.wall_ms),
                ])
                .expect("in-memory");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory")).expect("utf-8 fields")
    }

    fn human(&self) -> String {
        let mut lines = Vec::new();
        match &self.rows {
            Rows::Checks(checks) if self.command == "verify" => {
                let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
                for c in checks {
                    let mut line = format!(
                        "{:<width$}  {}  max_rel_error={}  tol={}  samples={}",
                        c.name,
                        if c.passed { "PASS" } else { "FAIL" },
                        sig(c.max_rel_error),
                        sig(c.tol),
                        c.samples,
                    );
                    if let Some(d) = &c.detail {
                        line.push_str(&format!("  ({d})"));
                    }
                    lines.push(line);
                }
                let passed = checks.iter().filter(|c| c.passed).count();
                lines.push(format!("{passed}/{} checks passed", checks.len()));
            }
            Rows::Ladder(rows) => {
                lines.push(format!(
                    "{:>8}  {:>8}  {:>16}  {:>16}  {:>16}  converged",
                    "budget", "n_evals", "value", "err_estimate", "rel_error"
                ));
                for r in rows {
                    lines.push(format!(
                        "{:>8}  {:>8}  {:>16}  {:>16}  {:>16}  {}",
                        r.budget,
                        r.n_evals,
                        sig(r.value),
                        sig(r.err_estimate),
                        sig(r.rel_error),
                        r.converged
                    ));
                }
            }
            Rows::Checks(checks) => {
                lines.push(format!("value         {}", self.value.map(sig).unwrap_or_default()));
                if let Some(route) = &self.route {
                    lines.push(format!("route         {route}"));
                }
                lines.push(format!("params        {}", params_text(&self.params)));
                lines.push(format!("err_estimate  {}", self.err_estimate.map(sig).unwrap_or_default()));
                lines.push(format!("n_evals       {}", self.n_evals.unwrap_or(0)));
                lines.push(format!("converged     {}", self.converged));
                for c in checks {
                    lines.push(format!(
                        "check         {} {} rel_error={}",
                        c.name,
                        if c.passed { "PASS" } else { "FAIL" },
                        sig(c.max_rel_error)
                    ));
                }
            }
        }
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }
}

fn params_text(params: &Map<String, Value>) -> String {
    params
        .iter()
        .map(|(k, v)| match v {
            Value::Array(items) => format!(
                "{k}={}",
                items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
            ),
            Value::String(text) => format!("{k}={text}"),
            other => format!("{k}={other}"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// `x` rounded to nine significant digits, in the shortest form that
/// reads back as the rounded value.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("float literal");
    let mag = rounded.abs();
    if (1e-3..1e9).contains(&mag) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(sig(2.0 * std::f64::consts::PI.powi(2)), "19.7392088");
        assert_eq!(sig(8.0 * std::f64::consts::PI.powi(3)), "248.050213");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(1.234_567_891_234e-9), "1.23456789e-9");
        assert_eq!(sig(-0.5), "-0.5");
        assert_eq!(sig(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_quotes_fields() {
        let mut params = Map::new();
        params.insert("etas".into(), serde_json::json!([1.0, 2.0]));
        let r = Report {
            command: "eval",
            params,
            route: Some("closed".into()),
            value: Some(1.0),
            err_estimate: Some(0.0),
            n_evals: Some(0),
            converged: true,
            wall_ms: 0.0,
            rows: Rows::Checks(Vec::new()),
        };
        let text = r.render(Format::Csv);
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let row = rd.records().next().unwrap().unwrap();
        assert_eq!(&row[1], "etas=1.0,2.0");
        assert!(text.contains("\"etas=1.0,2.0\""));
    }
}
