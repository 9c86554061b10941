//! `so21`: distances, geodesics and structure queries on SO0(2,1) from the
//! command line.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver failure, 64 usage,
//! 66 unreadable batch file.

use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use so21::distance::{distance_with, SolverOptions};
use so21::io::{format_number, matrix_json, parse_matrix, trace_csv, trace_json};
use so21::oracle::{verify_distance_with, GridSpec, OracleReport, Verdict};
use so21::sample::{SampleBox, Sampler};
use so21::structure::{classify, cut_time, decompose, first_conjugate_time};
use so21::{geodesic_point, geodesic_trace, Error, Execution, GeodesicParams, GroupElement, DEFAULT_TOL};

#[derive(Debug, Parser)]
#[command(name = "so21", version, about = "Sub-Riemannian geometry of SO0(2,1)")]
struct Cli {
    /// Validation and classification tolerance.
    #[arg(long, global = true, env = "SO21_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Run batch paths on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distance between two elements and its minimizing geodesics.
    Distance {
        #[arg(long, default_value = "identity")]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// The element reached by a geodesic.
    Geodesic(GeodesicArgs),
    /// Samples along a geodesic on [0, t].
    Trace {
        #[command(flatten)]
        geodesic: GeodesicArgs,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Structural label, conjugate flag and thresholds.
    Classify {
        #[arg(long)]
        m: String,
    },
    /// C = S1 K1 = K1 S2 with K1 = rotation(eta).
    Decompose {
        #[arg(long)]
        m: String,
    },
    /// First time the geodesic with parameter beta reaches its cut locus.
    CutTime {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// First conjugate time; null for |beta| <= 1.
    ConjugateTime {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// Compares the analytic distance with brute-force shooting.
    OracleCheck(OracleArgs),
    /// Random group elements, valid by construction.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
struct GeodesicArgs {
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi: f64,
    #[arg(long)]
    t: f64,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Target matrix literal.
    #[arg(long, conflicts_with = "batch", required_unless_present = "batch")]
    m: Option<String>,
    /// File with one matrix literal per line; `#` starts a comment.
    #[arg(long)]
    batch: Option<String>,
    #[arg(long, default_value_t = 49)]
    beta_steps: usize,
    #[arg(long, default_value_t = 48)]
    phi_steps: usize,
    #[arg(long, default_value_t = 101)]
    t_steps: usize,
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, default_value_t = 3)]
    refine_rounds: u32,
    /// Agreement tolerance; defaults to the final grid resolution.
    #[arg(long)]
    agree_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    beta_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    beta_max: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi_min: f64,
    #[arg(long, default_value_t = std::f64::consts::TAU, allow_hyphen_values = true)]
    phi_max: f64,
    #[arg(long, default_value_t = 0.0)]
    t_min: f64,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    /// Right-multiply by rotation(omega), omega uniform in the range.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    omega: Option<Vec<f64>>,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Display) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_solver_failure() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

/// Prefixes a library error with the argument it came from.
fn context(what: &str) -> impl Fn(Error) -> Failure + '_ {
    move |e| {
        let mut f = Failure::from(e);
        f.message = format!("{what}: {}", f.message);
        f
    }
}

enum Output {
    Json(Value),
    Csv(Vec<String>, Vec<Vec<String>>),
    Raw(String),
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

fn num(x: f64) -> String {
    format_number(x)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

fn entries_row(c: &GroupElement) -> Vec<String> {
    c.to_row_major().iter().copied().map(num).collect()
}

const ENTRY_NAMES: [&str; 9] = ["c11", "c12", "c13", "c21", "c22", "c23", "c31", "c32", "c33"];

fn params(a: &GeodesicArgs) -> Result<GeodesicParams, Failure> {
    Ok(GeodesicParams::new(a.beta, a.phi, a.t)?)
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let tol = cli.tol;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Failure::invalid(format!("--tol must be positive, got {tol}")));
    }
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let csv = cli.format == Format::Csv;

    match &cli.command {
        Command::Distance { a, b } => {
            let g = parse_matrix(a, tol).map_err(context("--a"))?;
            let h = parse_matrix(b, tol).map_err(context("--b"))?;
            let opts = SolverOptions {
                tol,
                ..SolverOptions::default()
            };
            let r = distance_with(&g, &h, &opts)?.result;
            if !csv {
                return Ok(Output::Json(to_json(&r)));
            }
            let head = header(&["d", "case", "beta", "mu", "eta_abs", "gamma", "psi", "phi", "t"]);
            let rows = r
                .geodesics
                .iter()
                .map(|p| {
                    vec![
                        num(r.d),
                        r.case.as_str().to_string(),
                        num(p.beta),
                        num(r.mu),
                        num(r.eta_abs),
                        opt(r.gamma_angle),
                        num(r.psi),
                        num(p.phi),
                        num(p.t),
                    ]
                })
                .collect();
            Ok(Output::Csv(head, rows))
        }
        Command::Geodesic(a) => {
            let p = params(a)?;
            let c = geodesic_point(&p);
            if csv {
                let mut head = header(&["beta", "phi", "t"]);
                head.extend(header(&ENTRY_NAMES));
                let mut row = vec![num(p.beta), num(p.phi), num(p.t)];
                row.extend(entries_row(&c));
                return Ok(Output::Csv(head, vec![row]));
            }
            let mut v = matrix_json(&c, tol);
            v["params"] = to_json(&p);
            Ok(Output::Json(v))
        }
        Command::Trace { geodesic, steps } => {
            let points = geodesic_trace(&params(geodesic)?, *steps, exec)?;
            Ok(if csv {
                Output::Raw(trace_csv(&points))
            } else {
                Output::Json(trace_json(&points))
            })
        }
        Command::Classify { m } => {
            let c = parse_matrix(m, tol).map_err(context("--m"))?;
            let k = classify(&c, tol);
            if !csv {
                return Ok(Output::Json(to_json(&k)));
            }
            let label = to_json(&k.label).as_str().unwrap_or_default().to_string();
            let head = header(&["label", "conjugate_flag", "eta", "theta", "alpha"]);
            let row = vec![
                label,
                k.conjugate_flag.to_string(),
                num(k.eta),
                num(k.theta),
                num(k.alpha),
            ];
            Ok(Output::Csv(head, vec![row]))
        }
        Command::Decompose { m } => {
            let c = parse_matrix(m, tol).map_err(context("--m"))?;
            let d = decompose(&c);
            if csv {
                let mut head = header(&["factor"]);
                head.extend(header(&ENTRY_NAMES));
                let rows = [("s1", d.s1), ("k1", d.k1), ("s2", d.s2)]
                    .into_iter()
                    .map(|(name, f)| {
                        let mut r = vec![name.to_string()];
                        r.extend(entries_row(&f));
                        r
                    })
                    .collect();
                return Ok(Output::Csv(head, rows));
            }
            Ok(Output::Json(json!({
                "eta": d.eta,
                "s1": matrix_json(&d.s1, tol),
                "k1": matrix_json(&d.k1, tol),
                "s2": matrix_json(&d.s2, tol),
            })))
        }
        Command::CutTime { beta } => {
            let t = cut_time(*beta)?;
            Ok(scalar(csv, "beta", *beta, "cut_time", Some(t)))
        }
        Command::ConjugateTime { beta } => {
            if !beta.is_finite() {
                return Err(Failure::invalid(format!("beta must be finite, got {beta}")));
            }
            Ok(scalar(
                csv,
                "beta",
                *beta,
                "conjugate_time",
                first_conjugate_time(*beta),
            ))
        }
        Command::OracleCheck(o) => oracle_check(o, tol, csv, exec),
        Command::Sample(s) => sample(s, cli.seed, csv),
    }
}

/// `{"beta": b, key: v}`; `+∞` and `None` are written as JSON `null` and an
/// empty CSV field.
fn scalar(csv: bool, name: &str, x: f64, key: &str, v: Option<f64>) -> Output {
    let v = v.filter(|v| v.is_finite());
    if csv {
        Output::Csv(header(&[name, key]), vec![vec![num(x), opt(v)]])
    } else {
        Output::Json(json!({ name: x, key: v }))
    }
}

fn oracle_check(o: &OracleArgs, tol: f64, csv: bool, exec: Execution) -> Result<Output, Failure> {
    let grid = GridSpec {
        beta_steps: o.beta_steps,
        phi_steps: o.phi_steps,
        t_steps: o.t_steps,
        t_max: o.t_max,
        refine_rounds: o.refine_rounds,
        ..GridSpec::default()
    };
    grid.validate()?;
    let agree = o.agree_tol.unwrap_or_else(|| grid.final_resolution());

    let targets: Vec<(usize, GroupElement)> = match (&o.m, &o.batch) {
        (Some(m), _) => vec![(1, parse_matrix(m, tol).map_err(context("--m"))?)],
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure {
                code: 66,
                message: format!("{path}: {e}"),
            })?;
            let mut out = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let body = line.split('#').next().unwrap_or("");
                if body.trim().is_empty() {
                    continue;
                }
                let c = parse_matrix(body, tol).map_err(|e| {
                    let mut f = Failure::from(e);
                    f.message = format!("{path}:{}: {}", i + 1, f.message);
                    f
                })?;
                out.push((i + 1, c));
            }
            out
        }
        (None, None) => return Err(Failure::invalid("oracle-check needs --m or --batch")),
    };

    let reports = targets
        .iter()
        .map(|(line, c)| verify_distance_with(c, &grid, agree, exec).map(|r| (*line, r)))
        .collect::<Result<Vec<(usize, OracleReport)>, Error>>()?;

    if csv {
        let head = header(&[
            "line",
            "t_min",
            "analytic_d",
            "gap",
            "resolution",
            "verdict",
            "case",
            "hits",
        ]);
        let rows = reports
            .iter()
            .map(|(line, r)| {
                vec![
                    line.to_string(),
                    opt(Some(r.t_min).filter(|t| t.is_finite())),
                    opt(r.analytic_d),
                    opt(r.gap.filter(|g| g.is_finite())),
                    num(r.resolution),
                    match r.verdict {
                        Some(Verdict::Agree) => "agree".into(),
                        _ => "discrepancy".into(),
                    },
                    r.analytic_case.map(|c| c.as_str().to_string()).unwrap_or_default(),
                    r.hits.len().to_string(),
                ]
            })
            .collect();
        return Ok(Output::Csv(head, rows));
    }
    if o.batch.is_none() {
        return Ok(Output::Json(to_json(&reports[0].1)));
    }
    Ok(Output::Json(Value::Array(
        reports
            .iter()
            .map(|(line, r)| {
                let mut v = to_json(r);
                v["line"] = json!(line);
                v
            })
            .collect(),
    )))
}

fn sample(s: &SampleArgs, seed: u64, csv: bool) -> Result<Output, Failure> {
    let ranges = [
        ("beta", s.beta_min, s.beta_max),
        ("phi", s.phi_min, s.phi_max),
        ("t", s.t_min, s.t_max),
    ];
    for (name, lo, hi) in ranges {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Failure::invalid(format!(
                "{name} range [{lo}, {hi}] is not a finite interval"
            )));
        }
    }
    if s.t_min < 0.0 {
        return Err(Failure::invalid("t range must be non-negative"));
    }
    let omega = match s.omega.as_deref() {
        Some([lo, hi]) if lo.is_finite() && hi.is_finite() && lo <= hi => Some((*lo, *hi)),
        Some(_) => return Err(Failure::invalid("omega range is not a finite interval")),
        None => None,
    };
    let b = SampleBox {
        beta: (s.beta_min, s.beta_max),
        phi: (s.phi_min, s.phi_max),
        t: (s.t_min, s.t_max),
        omega,
    };
    let samples = Sampler::new(seed).samples(&b, s.count);
    if csv {
        let mut head = header(&["beta", "phi", "t", "omega"]);
        head.extend(header(&ENTRY_NAMES));
        let rows = samples
            .iter()
            .map(|x| {
                let mut r = vec![num(x.params.beta), num(x.params.phi), num(x.params.t), opt(x.omega)];
                r.extend(entries_row(&x.element));
                r
            })
            .collect();
        return Ok(Output::Csv(head, rows));
    }
    Ok(Output::Json(Value::Array(
        samples
            .iter()
            .map(|x| {
                json!({
                    "params": x.params,
                    "omega": x.omega,
                    "entries": x.element.to_row_major().to_vec(),
                })
            })
            .collect(),
    )))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            let text = match out {
                Output::Json(v) => serde_json::to_string_pretty(&v).expect("json value") + "\n",
                Output::Csv(head, rows) => csv_text(&head, &rows),
                Output::Raw(s) => s,
            };
            let mut stdout = io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(74);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use so21::io::TRACE_HEADER;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn trace_header_matches_library() {
        let text = csv_text(&header(&TRACE_HEADER), &[]);
        assert_eq!(text.trim_end(), TRACE_HEADER.join(","));
    }
}
