use std::fs;
use std::path::Path;

use serde_json::Value;

use fisher_scale::cli::{self, EXIT_INFINITE, EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK};
use fisher_scale::report::Report;

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, Option<Report>) {
    let out = dir.join(name);
    let mut argv = vec!["fisher-scale".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.extend(["--out".to_string(), out.display().to_string()]);
    let code = cli::run(&argv);
    let report = fs::read_to_string(&out).ok().and_then(|t| Report::from_json(&t).ok());
    (code, report)
}

fn result(report: &Report, key: &str) -> Value {
    report.body.results[key].clone()
}

#[test]
fn info_closed_examples() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run_to(dir.path(), "a.json", &["info", "--dist", "normal", "--method", "closed"]);
    assert_eq!(code, EXIT_OK);
    let r = r.unwrap();
    assert_eq!(r.schema, 1);
    assert!((result(&r, "value").as_f64().unwrap() - 2.0).abs() < 1e-8);

    let (code, r) = run_to(dir.path(), "b.json", &["info", "--dist", "mix: 0.9*normal ++ 0.1*dirac(0)", "--method", "closed"]);
    assert_eq!(code, EXIT_OK);
    assert!((result(&r.unwrap(), "value").as_f64().unwrap() - 1.8).abs() < 1e-8);

    let (code, r) = run_to(dir.path(), "c.json", &["info", "--dist", "uniform(0,2)"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(result(&r.unwrap(), "value"), Value::String("infinity".into()));
}

#[test]
fn info_other_methods() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run_to(dir.path(), "v.json", &["info", "--dist", "normal", "--method", "variational", "--kind", "linear", "--m", "32"]);
    assert_eq!(code, EXIT_OK);
    let v = result(&r.unwrap(), "value").as_f64().unwrap();
    assert!((1.98..=2.0 + 1e-6).contains(&v));

    let (code, r) = run_to(dir.path(), "s.json", &["info", "--dist", "uniform(0,2)", "--method", "scan", "--kind", "linear"]);
    assert_eq!(code, EXIT_OK);
    let r = r.unwrap();
    assert_eq!(r.body.results["scan"]["verdict"]["verdict"], "divergent");
    assert!(result(&r, "value").is_null());

    let (code, r) = run_to(dir.path(), "e.json", &["info", "--dist", "normal", "--method", "empirical", "--m", "4", "--n", "5000", "--seed", "3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(r.unwrap().body.seed, Some(3));

    let (code, _) = run_to(dir.path(), "x.json", &["info", "--dist", "normal", "--method", "empirical"]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn estimate_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let xs = dir.path().join("xs.txt");
    fs::write(&xs, "# three observations\n1\n2\n3\n").unwrap();
    let (code, r) = run_to(dir.path(), "r.json", &["estimate", "--input", xs.to_str().unwrap(), "--score", "chi2"]);
    assert_eq!(code, EXIT_OK);
    let r = r.unwrap();
    assert!((result(&r, "S").as_f64().unwrap() - 2.1602469).abs() < 1e-7);

    let csv = dir.path().join("xs.csv");
    fs::write(&csv, "id,value\na,1\nb,2\nc,3\n").unwrap();
    let (code, r) = run_to(dir.path(), "c.json", &["estimate", "--input", csv.to_str().unwrap(), "--csv-col", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!((result(&r.unwrap(), "S").as_f64().unwrap() - 2.1602469).abs() < 1e-7);

    let zeros = dir.path().join("zeros.txt");
    fs::write(&zeros, "0\n0\n").unwrap();
    let (code, _) = run_to(dir.path(), "z.json", &["estimate", "--input", zeros.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);

    let (code, _) = run_to(dir.path(), "m.json", &["estimate", "--input", "/nonexistent/file"]);
    assert_eq!(code, EXIT_INVALID);

    let (code, _) = run_to(dir.path(), "u.json", &["estimate", "--input", xs.to_str().unwrap(), "--score", "lambda", "--dist", "uniform(0,1)"]);
    assert_eq!(code, EXIT_INFINITE);
}

#[test]
fn validation_and_infinite_information_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["info", "--dist", "normal", "--bogus"],
        vec!["info", "--dist", "nonsense(1)"],
        vec!["lan", "--n", "0"],
        vec!["simulate", "--sigma", "0"],
        vec!["info", "--dist", "normal", "--method", "variational", "--tail-prob", "0.1"],
    ] {
        assert_eq!(run_to(dir.path(), "r.json", &args).0, EXIT_INVALID, "{args:?}");
    }
    for args in [
        vec!["lan", "--dist", "uniform(0,2)", "--n", "10", "--reps", "4"],
        vec!["l2check", "--dist", "mix: 0.5*normal ++ 0.5*dirac(1)"],
        vec!["simulate", "--dist", "uniform(0,2)", "--score", "chi2", "--n", "10", "--reps", "4"],
    ] {
        assert_eq!(run_to(dir.path(), "r.json", &args).0, EXIT_INFINITE, "{args:?}");
    }
}

#[test]
fn reports_verify_and_detect_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_to(dir.path(), "lan.json", &["lan", "--n", "300", "--reps", "50", "--seed", "7", "--workers", "2"]);
    assert_eq!(code, EXIT_OK);
    let path = dir.path().join("lan.json");
    let verify = |workers: &str| {
        cli::run(["fisher-scale", "--verify", path.to_str().unwrap(), "--workers", workers, "--out", dir.path().join("v.json").to_str().unwrap()])
    };
    assert_eq!(verify("1"), EXIT_OK);
    assert_eq!(verify("5"), EXIT_OK);
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(summary["match"], Value::Bool(true));

    let mut report = Report::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    report.body.results["h"] = serde_json::json!(2.0);
    fs::write(&path, report.to_json()).unwrap();
    assert_eq!(verify("1"), EXIT_NUMERICAL);

    let (code, _) = run_to(dir.path(), "l2.json", &["l2check", "--dist", "exponential"]);
    assert_eq!(code, EXIT_OK);
    let l2 = dir.path().join("l2.json");
    assert_eq!(cli::run(["fisher-scale", "--verify", l2.to_str().unwrap()]), EXIT_OK);
}

#[test]
fn identical_arguments_give_identical_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--dist", "normal", "--score", "chi2", "--bound-score", "huber(1.5)", "--n", "200", "--reps", "100", "--seed", "5"];
    let (_, a) = run_to(dir.path(), "a.json", &args);
    let (_, b) = run_to(dir.path(), "b.json", &args);
    let (a, b) = (a.unwrap(), b.unwrap());
    assert_eq!(serde_json::to_string(&a.body).unwrap(), serde_json::to_string(&b.body).unwrap());
    assert_eq!(a.body.results["bound"]["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let code = cli::run(["fisher-scale", "info", "--dist", "laplace", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(out).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.lines().any(|l| l.starts_with("body.results.value,")));
}
