use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tisgm_core::census::{self, fmt12, CensusReport};
use tisgm_core::chain::{BranchLayout, MeasureId};
use tisgm_core::extremality::msw_check;
use tisgm_core::tisgm::{residual, solve_free, solve_sym_w1, ReducedSolution};
use tisgm_core::{Error, ModelParams};

/// Translation-invariant splitting Gibbs measures of the Ising-Potts model on Cayley trees
#[derive(Parser, Debug)]
#[command(name = "tisgm", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// branching order of the tree
    #[arg(long, global = true, default_value_t = 2)]
    k: usize,
    /// number of Potts states
    #[arg(long, global = true, default_value_t = 5)]
    q: usize,
    /// residual tolerance for emitted solutions
    #[arg(long, global = true, env = "TISGM_TOL", default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// write to this file instead of stdout
    #[arg(long, global = true)]
    output_path: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct ThetaRange {
    /// single theta value
    #[arg(long, conflicts_with_all = ["theta_min", "theta_max"])]
    theta: Option<f64>,
    #[arg(long, requires = "theta_max")]
    theta_min: Option<f64>,
    #[arg(long, requires = "theta_min")]
    theta_max: Option<f64>,
    /// grid points, endpoints included
    #[arg(long, default_value_t = 1)]
    steps: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// list every reduced solution at one theta
    Solve {
        #[arg(long)]
        theta: f64,
        /// restrict to one m (0 = free solutions)
        #[arg(long)]
        m: Option<usize>,
    },
    /// count measures at one theta or along a grid
    Census {
        #[command(flatten)]
        range: ThetaRange,
        /// emit theta,total rows instead of per-entry rows
        #[arg(long)]
        totals: bool,
    },
    /// locate critical theta values
    Critical {
        #[arg(long, default_value_t = 1.01)]
        theta_min: f64,
        #[arg(long, default_value_t = 15.0)]
        theta_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        merge_tol: f64,
    },
    /// kappa, gamma, lambda_2 and both verdicts along a measure's branch
    Extremality {
        #[arg(long, value_enum, default_value_t = Measure::Free)]
        measure: Measure,
        #[arg(long, value_enum, default_value_t = Layout::Pinned)]
        layout: Layout,
        #[command(flatten)]
        range: ThetaRange,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Measure {
    Free,
    MuStar,
    MuStarStar,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Layout {
    Pinned,
    Uniform,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::MOutOfRange { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn grid(r: &ThetaRange) -> Result<Vec<f64>, Failure> {
    if r.steps == 0 {
        return Err(Failure::Usage("--steps must be >= 1".into()));
    }
    match (r.theta, r.theta_min, r.theta_max) {
        (Some(t), _, _) => Ok(vec![t]),
        (None, Some(lo), Some(hi)) => {
            if !(lo <= hi) {
                return Err(Failure::Usage(format!("empty range [{lo}, {hi}]")));
            }
            if r.steps == 1 {
                return Ok(vec![lo]);
            }
            Ok((0..r.steps).map(|i| lo + (hi - lo) * i as f64 / (r.steps - 1) as f64).collect())
        }
        _ => Err(Failure::Usage("give --theta or --theta-min/--theta-max".into())),
    }
}

/// Rounds every float in a JSON tree to 12 significant digits.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            fmt12(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(vec![]);
    let err = |e: csv::Error| Failure::Compute(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Compute(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Compute(e.to_string()))
}

fn solution_json(s: &ReducedSolution, res: f64) -> Value {
    json!({
        "m": s.m, "case_tag": s.case_tag.as_str(), "branch": s.branch,
        "u": s.u, "v": s.v, "w": s.w, "residual": res, "root_multiplicity": s.root_multiplicity,
    })
}

fn check_residuals(sols: &[ReducedSolution], p: &ModelParams, tol: f64) -> Result<Vec<f64>, Failure> {
    let res: Vec<f64> = sols.iter().map(|s| residual(s, p)).collect();
    if let Some((s, r)) = sols.iter().zip(&res).find(|(_, r)| !(**r < tol)) {
        return Err(Failure::Compute(format!(
            "{} solution m={} branch={} has residual {r:e} >= {tol:e}",
            s.case_tag.as_str(),
            s.m,
            s.branch
        )));
    }
    Ok(res)
}

fn cmd_solve(c: &Common, theta: f64, m: Option<usize>) -> Result<String, Failure> {
    let p = ModelParams::new(c.k, c.q, theta)?;
    let sols: Vec<ReducedSolution> = match m {
        Some(0) => solve_free(&p),
        Some(m) if c.k != 2 => solve_sym_w1(m, &p)?,
        Some(m) => {
            if m > p.m_max() {
                return Err(Error::MOutOfRange { m, max: p.m_max() }.into());
            }
            census::all_solutions(&p)?.into_iter().filter(|s| s.m == m).collect()
        }
        None => census::all_solutions(&p)?,
    };
    let res = check_residuals(&sols, &p, c.tol)?;
    match c.format {
        Format::Json => {
            let list: Vec<Value> = sols.iter().zip(&res).map(|(s, r)| solution_json(s, *r)).collect();
            let v = json!({"theta": theta, "k": c.k, "q": c.q, "partial": c.k != 2, "solutions": list});
            Ok(serde_json::to_string_pretty(&round_json(v)).unwrap() + "\n")
        }
        Format::Csv => csv_text(
            &["theta", "m", "case_tag", "branch", "u", "v", "w", "residual"],
            sols.iter()
                .zip(&res)
                .map(|(s, r)| {
                    vec![
                        fmt12(theta),
                        s.m.to_string(),
                        s.case_tag.as_str().into(),
                        s.branch.to_string(),
                        fmt12(s.u),
                        fmt12(s.v),
                        fmt12(s.w),
                        fmt12(*r),
                    ]
                })
                .collect(),
        ),
    }
}

fn cmd_census(c: &Common, range: &ThetaRange, totals: bool) -> Result<String, Failure> {
    let base = ModelParams::new(c.k, c.q, grid(range)?[0])?;
    let mut reports: Vec<CensusReport> = vec![];
    for t in grid(range)? {
        let p = base.with_theta(t);
        let r = census::enumerate(&p)?;
        let sols: Vec<ReducedSolution> = r.entries.iter().map(|e| e.solution).collect();
        check_residuals(&sols, &p, c.tol)?;
        reports.push(r);
    }
    match (c.format, totals) {
        (Format::Json, false) => {
            let v = serde_json::to_value(&reports).map_err(|e| Failure::Compute(e.to_string()))?;
            Ok(serde_json::to_string_pretty(&round_json(v)).unwrap() + "\n")
        }
        (Format::Json, true) => {
            let v: Vec<Value> =
                reports.iter().map(|r| json!({"theta": r.theta, "total": r.total, "partial": r.partial})).collect();
            Ok(serde_json::to_string_pretty(&round_json(Value::Array(v))).unwrap() + "\n")
        }
        (Format::Csv, false) => Ok(census::report_csv(&reports)?),
        (Format::Csv, true) => csv_text(
            &["theta", "total", "partial"],
            reports.iter().map(|r| vec![fmt12(r.theta), r.total.to_string(), r.partial.to_string()]).collect(),
        ),
    }
}

fn cmd_critical(c: &Common, lo: f64, hi: f64, merge_tol: f64) -> Result<String, Failure> {
    if !(merge_tol >= 0.0) {
        return Err(Failure::Usage("--merge-tol must be >= 0".into()));
    }
    let p = ModelParams::new(c.k, c.q, lo.max(1.0 + 1e-9))?;
    let cv = census::critical_scan(&p, lo, hi, merge_tol)?;
    match c.format {
        Format::Json => {
            let v = json!({"k": c.k, "q": c.q, "partial": c.k != 2, "critical_values": cv});
            Ok(serde_json::to_string_pretty(&round_json(v)).unwrap() + "\n")
        }
        Format::Csv => csv_text(
            &["theta", "kind", "changes_count", "count_below", "count_above"],
            cv.iter()
                .map(|v| {
                    vec![
                        fmt12(v.theta),
                        v.kind.clone(),
                        v.changes_count.to_string(),
                        v.count_below.to_string(),
                        v.count_above.to_string(),
                    ]
                })
                .collect(),
        ),
    }
}

fn cmd_extremality(c: &Common, measure: Measure, layout: Layout, range: &ThetaRange) -> Result<String, Failure> {
    let measure = match measure {
        Measure::Free => MeasureId::Free,
        Measure::MuStar => MeasureId::MuStar,
        Measure::MuStarStar => MeasureId::MuStarStar,
    };
    let layout = match layout {
        Layout::Pinned => BranchLayout::Pinned,
        Layout::Uniform => BranchLayout::Uniform,
    };
    let mut rows: Vec<Value> = vec![];
    for t in grid(range)? {
        let p = ModelParams::new(c.k, c.q, t)?;
        let row = match msw_check(measure, &p, layout) {
            Ok(r) => json!({
                "theta": t, "measure": measure.as_str(), "status": "ok", "w": r.w,
                "kappa": r.kappa, "gamma": r.gamma_bound, "product": r.product, "lambda2": r.lambda2,
                "msw_verdict": r.msw_verdict.as_str(), "ks_verdict": r.ks_verdict.as_str(),
            }),
            Err(Error::BranchAbsent(_)) | Err(Error::ThetaNotAboveOne(_)) => {
                json!({"theta": t, "measure": measure.as_str(), "status": "absent"})
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(row);
    }
    match c.format {
        Format::Json => Ok(serde_json::to_string_pretty(&round_json(Value::Array(rows))).unwrap() + "\n"),
        Format::Csv => {
            let cols = ["theta", "measure", "status", "w", "kappa", "gamma", "product", "lambda2", "msw_verdict", "ks_verdict"];
            let cell = |v: &Value| match v {
                Value::Number(n) => fmt12(n.as_f64().unwrap()),
                Value::String(s) => s.clone(),
                _ => String::new(),
            };
            csv_text(&cols, rows.iter().map(|r| cols.iter().map(|k| cell(&r[*k])).collect()).collect())
        }
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let c = &cli.common;
    if !(c.tol > 0.0) {
        return Err(Failure::Usage(format!("tolerance must be > 0, got {}", c.tol)));
    }
    match &cli.command {
        Command::Solve { theta, m } => cmd_solve(c, *theta, *m),
        Command::Census { range, totals } => cmd_census(c, range, *totals),
        Command::Critical { theta_min, theta_max, merge_tol } => cmd_critical(c, *theta_min, *theta_max, *merge_tol),
        Command::Extremality { measure, layout, range } => cmd_extremality(c, *measure, *layout, range),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(s) => s,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    match &cli.common.output_path {
        Some(path) => {
            if let Err(e) = fs::write(path, out) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{out}"),
    }
    ExitCode::SUCCESS
}
