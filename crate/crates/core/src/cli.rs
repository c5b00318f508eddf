//! Command line front end.
//!
//! Exit codes: `0` success, `2` invalid input, `3` numerical failure (or a
//! `--verify` mismatch), `4` information infinite where a finite value was
//! required.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::asymp::{self, McConfig};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::mest::{self, AsymVariance, ScoreSpec};
use crate::quad::QuadratureConfig;
use crate::report::{Body, Report};
use crate::score;
use crate::varinfo::{self, BasisKind, ScanSettings, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INFINITE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "fisher-scale",
    version,
    about = "Fisher information of scale, M-estimators of scale and LAN diagnostics",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    /// Recompute a saved report and compare its body.
    #[arg(long, value_name = "REPORT")]
    verify: Option<PathBuf>,

    #[command(flatten)]
    output: OutputArgs,

    #[command(flatten)]
    quad: QuadArgs,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for simulations (0: all cores). Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct QuadArgs {
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = positive_f64)]
    abs_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive_f64)]
    rel_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-12, value_parser = positive_f64)]
    tail_prob: f64,
}

impl QuadArgs {
    fn config(&self) -> Result<QuadratureConfig> {
        let cfg = QuadratureConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            tail_prob: self.tail_prob,
            ..QuadratureConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Closed,
    Variational,
    Empirical,
    Scan,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fisher information of scale of a distribution.
    Info(InfoArgs),
    /// M-estimate of scale from a data file.
    Estimate(EstimateArgs),
    /// Monte Carlo variance of an M-estimator and the information bound table.
    Simulate(SimulateArgs),
    /// Monte Carlo check of the LAN expansion.
    Lan(LanArgs),
    /// L2 remainder of the root density.
    L2check(L2Args),
}

#[derive(Debug, Args)]
struct InfoArgs {
    #[arg(long)]
    dist: Distribution,
    #[arg(long, value_enum, default_value_t = Method::Closed)]
    method: Method,
    #[arg(long, default_value = "mixed")]
    kind: BasisKind,
    /// Basis size.
    #[arg(long, default_value_t = 16, value_parser = positive_usize)]
    m: usize,
    /// Basis sizes of a refinement scan.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32", value_parser = positive_usize)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    sigma: f64,
    #[arg(long, default_value_t = varinfo::DEFAULT_REG_TOL, value_parser = positive_f64)]
    reg_tol: f64,
    /// Sample size drawn for `--method empirical` without `--input`.
    #[arg(long, value_parser = positive_usize)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Data file for `--method empirical`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// 1-based CSV column of the input file.
    #[arg(long, value_parser = positive_usize)]
    csv_col: Option<usize>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = positive_usize)]
    csv_col: Option<usize>,
    /// `lambda`, `chi2`, `huber(k)` or `bumps[lin(c,w,a);log+(c,w,a);...]`.
    #[arg(long, default_value = "chi2")]
    score: ScoreSpec,
    /// Reference distribution used for calibration and the variance.
    #[arg(long, default_value = "normal")]
    dist: Distribution,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value = "normal")]
    dist: Distribution,
    #[arg(long, default_value = "lambda")]
    score: ScoreSpec,
    /// Extra scores listed in the information bound table (repeatable).
    #[arg(long)]
    bound_score: Vec<ScoreSpec>,
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    sigma: f64,
    #[arg(long, default_value_t = 2000, value_parser = positive_usize)]
    n: usize,
    #[arg(long, default_value_t = 2000, value_parser = positive_usize)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct LanArgs {
    #[arg(long, default_value = "normal")]
    dist: Distribution,
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    h: f64,
    #[arg(long, default_value_t = 5000, value_parser = positive_usize)]
    n: usize,
    #[arg(long, default_value_t = 1000, value_parser = positive_usize)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Extra runs at 2n, 4n, ... for the remainder trend.
    #[arg(long, default_value_t = 1)]
    doublings: usize,
}

#[derive(Debug, Args)]
struct L2Args {
    #[arg(long, default_value = "normal")]
    dist: Distribution,
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    sigma: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.04,0.02,0.01", allow_negative_numbers = true)]
    t: Vec<f64>,
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive and finite"))
    }
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("`{s}` must be a positive integer")),
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InformationInfinite => EXIT_INFINITE,
        Error::Quadrature { .. } | Error::NoRoot { .. } => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<String> = argv
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli, &argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, argv: &[String]) -> Result<i32> {
    if let Some(path) = &cli.verify {
        return verify(path, cli);
    }
    let Some(command) = &cli.command else {
        return Err(Error::domain("a subcommand or --verify is required"));
    };
    let cfg = cli.quad.config()?;
    let body = compute(command, normalized_args(argv), cli.output.workers, &cfg)?;
    emit(&Report::new(body), &cli.output)?;
    Ok(EXIT_OK)
}

/// Drops the program name and the flags that do not affect results.
fn normalized_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        match a.as_str() {
            "--out" | "--format" | "--workers" => {
                it.next();
            }
            s if s.starts_with("--out=") || s.starts_with("--format=") || s.starts_with("--workers=") => {}
            _ => out.push(a.clone()),
        }
    }
    out
}

fn emit(report: &Report, output: &OutputArgs) -> Result<()> {
    let mut buf = Vec::new();
    match output.format {
        Format::Json => {
            buf.extend_from_slice(report.to_json().as_bytes());
            buf.push(b'\n');
        }
        Format::Csv => report.write_csv(&mut buf)?,
    }
    match &output.out {
        Some(path) => fs::write(path, buf)?,
        None => io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn verify(path: &Path, cli: &Cli) -> Result<i32> {
    let saved = Report::from_json(&fs::read_to_string(path)?)?;
    let mut argv = vec!["fisher-scale".to_string()];
    argv.extend(saved.body.argv.iter().cloned());
    let replay = Cli::try_parse_from(&argv)
        .map_err(|e| Error::Parse(format!("recorded arguments: {e}")))?;
    let command = replay
        .command
        .as_ref()
        .ok_or_else(|| Error::Parse("recorded arguments name no subcommand".into()))?;
    let cfg = replay.quad.config()?;
    let fresh = compute(command, saved.body.argv.clone(), cli.output.workers, &cfg)?;
    let saved_body = serde_json::to_value(&saved.body).expect("bodies serialize");
    let fresh_body = serde_json::to_value(&fresh).expect("bodies serialize");
    let matches = saved_body == fresh_body;
    let summary = json!({
        "schema": crate::report::SCHEMA,
        "verify": path.display().to_string(),
        "command": fresh.command,
        "match": matches,
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    match &cli.output.out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(if matches { EXIT_OK } else { EXIT_NUMERICAL })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn compute(command: &Command, argv: Vec<String>, workers: usize, cfg: &QuadratureConfig) -> Result<Body> {
    let (name, seed, results) = match command {
        Command::Info(a) => {
            let (seed, r) = info(a, cfg)?;
            ("info", seed, r)
        }
        Command::Estimate(a) => ("estimate", None, estimate(a, cfg)?),
        Command::Simulate(a) => ("simulate", Some(a.seed), simulate(a, workers, cfg)?),
        Command::Lan(a) => ("lan", Some(a.seed), lan(a, workers, cfg)?),
        Command::L2check(a) => ("l2check", None, l2check(a, cfg)?),
    };
    Ok(Body {
        command: name.into(),
        argv,
        seed,
        results,
    })
}

fn info(a: &InfoArgs, cfg: &QuadratureConfig) -> Result<(Option<u64>, Value)> {
    let dist = a.dist.to_string();
    let scaled = a.dist.scale(a.sigma)?;
    let mut seed = None;
    let results = match a.method {
        Method::Closed => {
            let standardized = score::fisher_closed(&a.dist, cfg)?;
            json!({
                "method": a.method,
                "distribution": dist,
                "sigma": a.sigma,
                "value": standardized.scaled(a.sigma.powi(-2)),
                "standardized": standardized,
            })
        }
        Method::Variational => {
            let basis = varinfo::build_basis(a.kind, a.m, &scaled)?;
            let est = varinfo::fisher_variational(&scaled, &basis, a.reg_tol, cfg)?;
            json!({
                "method": a.method,
                "distribution": dist,
                "sigma": a.sigma,
                "value": est.value,
                "estimate": to_value(&est),
            })
        }
        Method::Empirical => {
            let sample = match (&a.input, a.n) {
                (Some(path), _) => read_sample(path, a.csv_col)?,
                (None, Some(n)) => {
                    seed = Some(a.seed);
                    scaled.sample(n, a.seed)
                }
                (None, None) => return Err(Error::domain("empirical method needs --input or --n")),
            };
            let basis = varinfo::build_basis(a.kind, a.m, &scaled)?;
            let est = varinfo::fisher_empirical(&sample, &basis, a.reg_tol)?;
            json!({
                "method": a.method,
                "distribution": dist,
                "sigma": a.sigma,
                "n": sample.len(),
                "value": est.value,
                "estimate": to_value(&est),
            })
        }
        Method::Scan => {
            let settings = ScanSettings {
                reg_tol: a.reg_tol,
                ..ScanSettings::default()
            };
            let scan = varinfo::convergence_scan(&scaled, a.kind, &a.sizes, &settings, cfg)?;
            let value = match scan.verdict {
                Verdict::Finite { value } => Some(value),
                _ => None,
            };
            json!({
                "method": a.method,
                "distribution": dist,
                "sigma": a.sigma,
                "value": value,
                "scan": to_value(&scan),
            })
        }
    };
    Ok((seed, results))
}

fn estimate(a: &EstimateArgs, cfg: &QuadratureConfig) -> Result<Value> {
    let sample = read_sample(&a.input, a.csv_col)?;
    let score = a.score.build(&a.dist, cfg)?;
    let est = mest::m_estimate(&sample, &score)?;
    let v1 = mest::asym_variance(&score, &a.dist, cfg)?;
    let n = sample.len() as f64;
    let std_error = v1.value().map(|v| est.scale * (v / n).sqrt());
    let efficiency = match score::fisher_closed(&a.dist, cfg)? {
        ExtendedReal::Finite(i) if i > 0.0 => Some(mest::efficiency(&score, &a.dist, cfg)?),
        _ => None,
    };
    Ok(json!({
        "input": a.input.display().to_string(),
        "n": sample.len(),
        "reference": a.dist.to_string(),
        "score": score.label,
        "offset": score.offset,
        "S": est.scale,
        "roots": est.roots,
        "asym_variance": v1,
        "std_error": std_error,
        "efficiency": efficiency,
    }))
}

fn simulate(a: &SimulateArgs, workers: usize, cfg: &QuadratureConfig) -> Result<Value> {
    let score = a.score.build(&a.dist, cfg)?;
    let mc = McConfig {
        n: a.n,
        reps: a.reps,
        seed: a.seed,
        workers,
    };
    let report = asymp::mc_variance(&a.dist, &score, a.sigma, &mc, cfg)?;
    let mut scores = vec![score.clone()];
    for s in &a.bound_score {
        scores.push(s.build(&a.dist, cfg)?);
    }
    let bound = asymp::bound_report(&a.dist, &scores, cfg)?;
    let target = match mest::asym_variance(&score, &a.dist, cfg)? {
        AsymVariance::Finite(v) => a.sigma * a.sigma * v,
        _ => unreachable!("mc_variance requires a finite variance"),
    };
    Ok(json!({
        "distribution": a.dist.to_string(),
        "score": score.label,
        "sigma": a.sigma,
        "target_variance": target,
        "mc": to_value(&report),
        "bound": to_value(&bound),
        "pass": report.pass && bound.pass,
    }))
}

fn lan(a: &LanArgs, workers: usize, cfg: &QuadratureConfig) -> Result<Value> {
    let mc = McConfig {
        n: a.n,
        reps: a.reps,
        seed: a.seed,
        workers,
    };
    let trend = asymp::lan_trend(&a.dist, a.sigma, a.h, &mc, a.doublings, cfg)?;
    let information = score::fisher_scale(&a.dist, a.sigma, cfg)?;
    let pass = trend.decreasing && trend.runs.iter().all(|r| r.pass);
    Ok(json!({
        "distribution": a.dist.to_string(),
        "sigma": a.sigma,
        "h": a.h,
        "information": information,
        "target_mean": -0.5 * a.h * a.h * information.value().unwrap_or(f64::NAN),
        "target_variance": a.h * a.h * information.value().unwrap_or(f64::NAN),
        "trend": to_value(&trend),
        "pass": pass,
    }))
}

fn l2check(a: &L2Args, cfg: &QuadratureConfig) -> Result<Value> {
    let remainders = a
        .t
        .iter()
        .map(|&t| asymp::l2_remainder(&a.dist, a.sigma, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = remainders.windows(2).map(|w| w[1] / w[0]).collect();
    let decreasing = remainders.windows(2).all(|w| w[1] < w[0]);
    Ok(json!({
        "distribution": a.dist.to_string(),
        "sigma": a.sigma,
        "t": a.t,
        "remainder": remainders,
        "ratios": ratios,
        "decreasing": decreasing,
    }))
}

/// Reads one real per line (`#` starts a comment), or column `csv_col`
/// (1-based) of a CSV file whose first row may be a header.
pub fn read_sample(path: &Path, csv_col: Option<usize>) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let values = match csv_col {
        None => parse_lines(&text)?,
        Some(col) => parse_csv_column(&text, col)?,
    };
    if values.is_empty() {
        return Err(Error::Parse(format!("{}: no observations", path.display())));
    }
    Ok(values)
}

fn parse_number(s: &str, line: usize) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse(format!("line {line}: `{s}` is not a finite number"))),
    }
}

fn parse_lines(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let body = line.split('#').next().unwrap_or("").trim();
            (!body.is_empty()).then(|| parse_number(body, i + 1))
        })
        .collect()
}

fn parse_csv_column(text: &str, col: usize) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("csv: {e}")))?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        let field = record
            .get(col - 1)
            .ok_or_else(|| Error::Parse(format!("line {line}: no column {col}")))?;
        match parse_number(field, line) {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_args_drop_output_flags() {
        let argv: Vec<String> = ["bin", "lan", "--out", "r.json", "--workers=4", "--n", "10", "--format", "csv"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(normalized_args(&argv), vec!["lan", "--n", "10"]);
    }

    #[test]
    fn plain_lines_with_comments() {
        let v = parse_lines("# header\n1\n\n 2.5  # note\n-3e0\n").unwrap();
        assert_eq!(v, vec![1.0, 2.5, -3.0]);
        assert!(parse_lines("1\nx\n").is_err());
        assert!(parse_lines("nan\n").is_err());
    }

    #[test]
    fn csv_column_with_header() {
        let text = "id,x\n1,0.5\n2, -1.5\n";
        assert_eq!(parse_csv_column(text, 2).unwrap(), vec![0.5, -1.5]);
        assert!(parse_csv_column(text, 3).is_err());
        assert!(parse_csv_column("x\n1\nbad\n", 1).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::InformationInfinite), EXIT_INFINITE);
        assert_eq!(exit_code(&Error::NoRoot { lo: 0.0, hi: 1.0 }), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_INVALID);
        assert_eq!(run(["fisher-scale", "info"]), EXIT_INVALID);
        assert_eq!(run(["fisher-scale", "info", "--dist", "normal", "--sigma", "-1"]), EXIT_INVALID);
        assert_eq!(run(["fisher-scale"]), EXIT_INVALID);
    }
}
