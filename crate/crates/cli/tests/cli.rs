use serde_json::Value;
use slater_zeta_cli::run_with;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("slater-zeta").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let r = run(&full);
    let v = serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {} / {}", r.stdout, r.stderr));
    (r.code, v)
}

const KEYS: [&str; 9] = ["command", "params", "route", "value", "err_estimate", "n_evals", "converged", "wall_ms", "checks"];

fn assert_schema(v: &Value) {
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, KEYS);
}

#[test]
fn eval_closed_three_orbital() {
    let r = run(&["eval", "--kind", "s3", "--route", "closed", "--etas", "1,1,1"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("19.7392088"), "{}", r.stdout);
}

#[test]
fn eval_two_orbital_new_transform() {
    let (code, v) = json(&["eval", "--kind", "s2", "--route", "new-transform", "--etas", "1,2", "--x2", "1"]);
    assert_eq!(code, 0);
    assert_schema(&v);
    assert_eq!(v["route"], "new-transform");
    assert!((v["value"].as_f64().unwrap() - 0.974_078_690_9).abs() < 1e-9);
    assert_eq!(v["converged"], true);
    assert!(v["n_evals"].as_u64().unwrap() > 0);
    assert_eq!(v["checks"][0]["name"], "closed_form");
    assert_eq!(v["checks"][0]["passed"], true);
}

#[test]
fn eval_default_route_is_closed() {
    let (code, v) = json(&["eval", "--kind", "s4", "--etas", "1,1,1,1"]);
    assert_eq!(code, 0);
    assert_eq!(v["route"], "closed");
    assert!((v["value"].as_f64().unwrap() - 248.050_213_4).abs() < 1e-6);
    assert!(v["checks"].as_array().unwrap().is_empty());
}

#[test]
fn divergent_parameters_exit_one() {
    let r = run(&["eval", "--kind", "s2", "--etas", "0,0", "--x2", "1"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("divergent parameter set"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["eval", "--etas", "1,1,1"][..],
        &["eval", "--kind", "s3"],
        &["eval", "--kind", "s2", "--etas", "1,2"],
        &["eval", "--kind", "s4", "--route", "gaussian", "--etas", "1,1,1,1"],
        &["eval", "--kind", "s5", "--etas", "1"],
        &["eval", "--kind", "s3", "--etas", "1,1"],
        &["eval", "--kind", "s3", "--etas", "1,1,1", "--tol", "-1"],
        &["eval", "--kind", "s3", "--etas", "1,x,1"],
        &["verify", "--suite", "everything"],
        &["verify", "--suite", "kernels", "--m", "7"],
        &["verify", "--format", "xml"],
        &["frobnicate"],
        &[],
    ] {
        let r = run(args);
        assert_eq!(r.code, 1, "{args:?}: {}", r.stderr);
        assert!(!r.stderr.is_empty());
    }
}

#[test]
fn help_and_version_exit_zero() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("converge"));
    assert_eq!(run(&["--version"]).code, 0);
}

#[test]
fn budget_exhaustion_exits_two() {
    let r = run(&["eval", "--kind", "s3", "--route", "simultaneous", "--etas", "1.2,0.8,2", "--budget", "1000"]);
    assert_eq!(r.code, 2, "{}", r.stdout);
    assert!(r.stdout.contains("converged     false"));
}

#[test]
fn human_output_nine_digits() {
    let r = run(&["eval", "--kind", "s2-coulomb", "--etas", "1", "--x2", "1"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("value         7.94346122\n"), "{}", r.stdout);
}

#[test]
fn csv_output_has_header_and_quoting() {
    let r = run(&["eval", "--kind", "s3", "--route", "gaussian", "--etas", "1,1,1", "--format", "csv"]);
    assert_eq!(r.code, 0);
    let mut rd = csv::Reader::from_reader(r.stdout.as_bytes());
    let header: Vec<String> = rd.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header[..4], ["command", "params", "route", "value"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1], "kind=s3 etas=1.0,1.0,1.0");
    assert_eq!(&rows[0][3], "19.7392088");
}

#[test]
fn config_file_supplies_flags() {
    let dir = std::env::temp_dir().join(format!("slater-zeta-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.toml");
    std::fs::write(&path, "kind = \"s3\"\nroute = \"closed\"\netas = [1.0, 1.0, 1.0]\nformat = \"json\"\n").unwrap();
    let path = path.to_str().unwrap();
    let r = run(&["eval", "--config", path]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 19.739_208_8).abs() < 1e-6);
    let r = run(&["eval", "--config", path, "--format", "human"]);
    assert!(r.stdout.starts_with("value"));

    std::fs::write(dir.join("bad.toml"), "colour = 3\n").unwrap();
    assert_eq!(run(&["eval", "--config", dir.join("bad.toml").to_str().unwrap()]).code, 1);
    assert_eq!(run(&["eval", "--config", dir.join("missing.toml").to_str().unwrap()]).code, 1);
}

#[test]
fn verify_identities_lists_each_identity() {
    let (code, v) = json(&["verify", "--suite", "identities", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_schema(&v);
    assert_eq!(v["value"], Value::Null);
    let checks = v["checks"].as_array().unwrap();
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    for name in ["identities.k0_singular", "identities.k2_weight_minus_half", "identities.exp_pair_texp"] {
        assert!(names.contains(&name), "{name}");
    }
    for c in checks {
        let e = c["max_rel_error"].as_f64().unwrap();
        assert!(e <= c["tol"].as_f64().unwrap(), "{c}");
    }
    let human = run(&["verify", "--suite", "identities", "--seed", "7"]);
    assert!(human.stdout.contains("identities.k0_singular"));
    assert!(human.stdout.contains("max_rel_error="));
}

#[test]
fn verify_kernels_single_size() {
    let (code, v) = json(&["verify", "--suite", "kernels", "--m", "3"]);
    assert_eq!(code, 0);
    let checks = v["checks"].as_array().unwrap();
    let m3 = checks.iter().find(|c| c["name"] == "kernels.reconstruct_m3").unwrap();
    assert_eq!(m3["samples"], 50);
    assert!(m3["max_rel_error"].as_f64().unwrap() <= 1e-6);
    assert!(checks.iter().all(|c| c["name"] != "kernels.reconstruct_m2"));
}

#[test]
fn verify_is_seed_deterministic() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("wall_ms");
        v
    };
    let a = strip(json(&["verify", "--suite", "specfun", "--seed", "3"]).1);
    let b = strip(json(&["verify", "--suite", "specfun", "--seed", "3"]).1);
    let c = strip(json(&["verify", "--suite", "specfun", "--seed", "4"]).1);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_ne!(a, c);
}

#[test]
fn impossible_tolerance_exits_two() {
    let r = run(&["verify", "--suite", "specfun", "--tol", "1e-300"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("FAIL"));
}

#[test]
fn verify_csv() {
    let r = run(&["verify", "--suite", "specfun", "--format", "csv"]);
    let mut rd = csv::Reader::from_reader(r.stdout.as_bytes());
    assert_eq!(rd.headers().unwrap().get(0), Some("name"));
    assert_eq!(rd.records().count(), 4);
}

fn ladder_errors(v: &Value) -> Vec<f64> {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["rel_error"].as_f64().unwrap())
        .collect()
}

#[test]
fn converge_two_orbital_is_monotone() {
    let (code, v) = json(&["converge", "--kind", "s2", "--route", "new-transform", "--etas", "1,2", "--x2", "1"]);
    assert_eq!(code, 0);
    assert_schema(&v);
    let rows = v["checks"].as_array().unwrap();
    assert_eq!(rows.first().unwrap()["budget"], 1000);
    assert_eq!(rows.last().unwrap()["budget"], 100_000);
    let errs = ladder_errors(&v);
    assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
}

#[test]
fn converge_three_orbital_simultaneous() {
    let (code, v) = json(&["converge", "--kind", "s3", "--route", "simultaneous", "--etas", "1.2,0.8,2"]);
    assert_eq!(code, 0);
    let errs = ladder_errors(&v);
    assert!(*errs.last().unwrap() <= 1e-6, "{errs:?}");
    assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
    assert_eq!(v["checks"].as_array().unwrap()[0]["converged"], false);
}

#[test]
fn converge_budget_caps_ladder() {
    let (_, v) = json(&["converge", "--kind", "s3", "--route", "gaussian", "--etas", "1,1,1", "--budget", "3000"]);
    let budgets: Vec<u64> = v["checks"].as_array().unwrap().iter().map(|r| r["budget"].as_u64().unwrap()).collect();
    assert_eq!(budgets, [1000, 2000, 3000]);
}

#[test]
fn converge_closed_route_refused() {
    let r = run(&["converge", "--kind", "s3", "--route", "closed", "--etas", "1,1,1"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("nothing to converge"));
}

#[test]
fn converge_csv() {
    let r = run(&["converge", "--kind", "s2", "--route", "gaussian", "--etas", "1,2", "--x2", "1", "--format", "csv"]);
    let mut rd = csv::Reader::from_reader(r.stdout.as_bytes());
    let h: Vec<String> = rd.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(h, ["budget", "n_evals", "value", "err_estimate", "rel_error", "converged"]);
    assert_eq!(rd.records().count(), 7);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_slater-zeta");
    let ok = std::process::Command::new(bin)
        .args(["eval", "--kind", "s3", "--etas", "1,1,1"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("19.7392088"));
    let bad = std::process::Command::new(bin)
        .args(["eval", "--kind", "s2", "--etas", "0,0", "--x2", "1"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
