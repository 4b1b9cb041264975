//! Command-line front end.
//!
//! Exit status: 0 success, 1 validation or check failure, 2 usage error,
//! 3 numeric failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::duality::dualize;
use crate::eigenstress::assemble_eigenstress;
use crate::error::Error;
use crate::io::{
    format_number, parse_document, parse_eigenstress, parse_raw, sample_times, sample_to_csv, serialize_document,
    serialize_material, MaterialDocument, Metadata, Spacing,
};
use crate::kernel::{Kernel, Limit, LimitReport};
use crate::matrix6::{Matrix6, Vector6};
use crate::response::{respond, respond_creep, ResponseSeries, StrainHistory};
use crate::verify::{check_pair, check_wellformed, CheckReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "viscodual", version, about = "Relaxation/creep duality for viscoelastic kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a relaxation kernel to its creep dual or back.
    Dualize {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a kernel, and optionally a claimed dual pair.
    Check {
        input: PathBuf,
        #[arg(long)]
        against: Option<PathBuf>,
        /// Tolerance for the pair residuals and boundary identities.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Tabulate a kernel as CSV.
    Sample {
        input: PathBuf,
        #[arg(long)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        log: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print boundary values at t -> 0+ and t -> inf.
    Limits {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Response to a piecewise-linear history: stress for a relaxation
    /// kernel, strain for a creep kernel.
    Respond {
        kernel: PathBuf,
        history: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        log: bool,
    },
    /// Build a matrix relaxation kernel from an eigenstress basis.
    Eigenstress {
        basis: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Kernel(Error),
    /// Check ran but did not pass; the report has been printed.
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Kernel(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> std::result::Result<MaterialDocument, Failure> {
    let doc = parse_document(&read(path)?)?;
    for w in &doc.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(doc)
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Checks) => EXIT_FAILED,
        Err(Failure::Kernel(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Numeric(_) => EXIT_NUMERIC,
                _ => EXIT_FAILED,
            }
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Dualize { input, output } => {
            let doc = load(&input)?;
            let dual = dualize(&doc.kernel)?;
            let metadata = Metadata {
                name: doc.metadata.name.map(|n| format!("dual of {n}")),
                units: doc.metadata.units,
            };
            write_out(&output, &serialize_document(&MaterialDocument { kernel: dual, metadata, warnings: Vec::new() }))
        }
        Command::Check { input, against, tol, format } => check(&input, against.as_deref(), tol, format),
        Command::Sample { input, t0, t1, n, log, output } => {
            let doc = load(&input)?;
            let spacing = if log { Spacing::Log } else { Spacing::Linear };
            write_out(&output, &sample_to_csv(&doc.kernel, t0, t1, n, spacing)?)
        }
        Command::Limits { input, format } => {
            let doc = load(&input)?;
            print!("{}", render_limits(&doc.kernel, format));
            Ok(())
        }
        Command::Respond { kernel, history, output, t0, t1, n, log } => {
            let doc = load(&kernel)?;
            let hist = read(&history)?;
            let csv = respond_csv(&doc.kernel, &hist, SampleGrid { t0, t1, n, log })?;
            write_out(&output, &csv)
        }
        Command::Eigenstress { basis, output } => {
            let (b, eq) = parse_eigenstress(&read(&basis)?)?;
            let k = assemble_eigenstress(&b, eq)?;
            write_out(&output, &serialize_material(&Kernel::MatrixRelaxation(k)))
        }
    }
}

fn check(input: &Path, against: Option<&Path>, tol: Option<f64>, format: Format) -> Outcome {
    let text = read(input)?;
    let raw = parse_raw(&text)?;
    let mut report = prefixed(check_wellformed(&raw), "kernel");
    if let Some(path) = against {
        let other_text = read(path)?;
        let other_raw = parse_raw(&other_text)?;
        report.extend(prefixed(check_wellformed(&other_raw), "dual"));
        if report.passed() {
            let a = raw.to_kernel()?;
            let b = other_raw.to_kernel()?;
            report.extend(check_pair(&a, &b, tol)?);
        }
    } else if report.passed() {
        raw.to_kernel()?;
    }
    match format {
        Format::Text => print!("{report}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serialization")),
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn prefixed(mut r: CheckReport, prefix: &str) -> CheckReport {
    for e in r.entries.iter_mut() {
        if !e.name.starts_with(prefix) {
            e.name = format!("{prefix}: {}", e.name);
        }
    }
    r
}

fn limit_text<T>(l: &Limit<T>, f: impl Fn(&T) -> String) -> String {
    match l {
        Limit::Finite(v) => f(v),
        Limit::Infinite => "inf".to_string(),
    }
}

fn limit_json<T>(l: &Limit<T>, f: impl Fn(&T) -> Value) -> Value {
    match l {
        Limit::Finite(v) => f(v),
        Limit::Infinite => json!("inf"),
    }
}

fn matrix_text(m: &Matrix6) -> String {
    let rows: Vec<String> = m
        .to_rows()
        .iter()
        .map(|r| format!("  [{}]", r.iter().map(|x| format!("{x:>12.6e}")).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("\n{}", rows.join("\n"))
}

fn matrix_json(m: &Matrix6) -> Value {
    json!(m.to_rows())
}

fn render_report<T>(
    rep: &LimitReport<T>,
    symbol: &str,
    format: Format,
    text: impl Fn(&T) -> String,
    js: impl Fn(&T) -> Value,
) -> String {
    let fields = [
        ("value_at_zero", format!("{symbol}(0+)"), &rep.value_at_zero),
        ("value_at_infinity", format!("{symbol}(inf)"), &rep.value_at_infinity),
        ("derivative_at_zero", format!("{symbol}'(0+)"), &rep.derivative_at_zero),
        ("derivative_at_infinity", format!("{symbol}'(inf)"), &rep.derivative_at_infinity),
    ];
    match format {
        Format::Text => {
            let mut out = String::new();
            for (_, label, l) in &fields {
                out.push_str(&format!("{label} = {}\n", limit_text(l, &text)));
            }
            if let Some(n) = &rep.impulse {
                out.push_str(&format!("newtonian = {}\n", text(n)));
            }
            out
        }
        Format::Json => {
            let mut obj = serde_json::Map::new();
            for (key, _, l) in &fields {
                obj.insert(key.to_string(), limit_json(l, &js));
            }
            if let Some(n) = &rep.impulse {
                obj.insert("impulse".into(), js(n));
            }
            format!("{}\n", serde_json::to_string_pretty(&Value::Object(obj)).expect("limits serialization"))
        }
    }
}

fn render_limits(k: &Kernel, format: Format) -> String {
    let scalar_text = |x: &f64| format!("{x}");
    let scalar_json = |x: &f64| json!(x);
    match k {
        Kernel::ScalarRelaxation(k) => render_report(&k.limits(), "f", format, scalar_text, scalar_json),
        Kernel::ScalarCreep(c) => render_report(&c.limits(), "h", format, scalar_text, scalar_json),
        Kernel::MatrixRelaxation(k) => render_report(&k.limits(), "R", format, matrix_text, matrix_json),
        Kernel::MatrixCreep(c) => render_report(&c.limits(), "C", format, matrix_text, matrix_json),
    }
}

struct SampleGrid {
    t0: Option<f64>,
    t1: Option<f64>,
    n: Option<usize>,
    log: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HistoryDoc<V> {
    times: Vec<f64>,
    values: Vec<V>,
    #[serde(default)]
    samples: Option<Vec<f64>>,
}

fn sample_grid(grid: &SampleGrid, breakpoints: &[f64], explicit: Option<Vec<f64>>) -> std::result::Result<Vec<f64>, Failure> {
    if grid.n.is_some() || grid.t0.is_some() || grid.t1.is_some() {
        let last = *breakpoints.last().unwrap_or(&0.0);
        let t1 = grid.t1.unwrap_or(if last > 0.0 { 2.0 * last } else { 1.0 });
        let t0 = grid.t0.unwrap_or(if grid.log { t1 * 1e-3 } else { 0.0 });
        let spacing = if grid.log { Spacing::Log } else { Spacing::Linear };
        return Ok(sample_times(t0, t1, grid.n.unwrap_or(101), spacing)?);
    }
    if let Some(s) = explicit {
        return Ok(s);
    }
    let last = *breakpoints.last().unwrap_or(&0.0);
    Ok(sample_times(0.0, if last > 0.0 { 2.0 * last } else { 1.0 }, 101, Spacing::Linear)?)
}

fn history_schema(e: serde_json::Error) -> Failure {
    Failure::Kernel(Error::Schema(format!("history: {e}")))
}

fn respond_csv(kernel: &Kernel, text: &str, grid: SampleGrid) -> std::result::Result<String, Failure> {
    let mut out = String::new();
    if kernel.is_matrix() {
        let doc: HistoryDoc<[f64; 6]> = serde_json::from_str(text).map_err(history_schema)?;
        let values = doc.values.iter().map(|v| Vector6::from_column_slice(v)).collect();
        let hist = StrainHistory::new(doc.times, values)?;
        let times = sample_grid(&grid, hist.times(), doc.samples)?;
        let seg = hist.to_segmented();
        let series = match kernel {
            Kernel::MatrixRelaxation(k) => respond(k, &seg, &times)?,
            Kernel::MatrixCreep(c) => respond_creep(c, &seg, &times)?,
            _ => unreachable!(),
        };
        out.push_str("t,s1,s2,s3,s4,s5,s6\n");
        for (t, v) in series.times.iter().zip(&series.values) {
            out.push_str(&format_number(*t));
            for x in v.iter() {
                out.push(',');
                out.push_str(&format_number(*x));
            }
            out.push('\n');
        }
        report_impulses(&series, |v| v.norm() > 0.0, |v| format!("{:?}", v.as_slice()));
    } else {
        let doc: HistoryDoc<f64> = serde_json::from_str(text).map_err(history_schema)?;
        let hist = StrainHistory::new(doc.times, doc.values)?;
        let times = sample_grid(&grid, hist.times(), doc.samples)?;
        let seg = hist.to_segmented();
        let series = match kernel {
            Kernel::ScalarRelaxation(k) => respond(k, &seg, &times)?,
            Kernel::ScalarCreep(c) => respond_creep(c, &seg, &times)?,
            _ => unreachable!(),
        };
        out.push_str("t,value\n");
        for (t, v) in series.times.iter().zip(&series.values) {
            out.push_str(&format!("{},{}\n", format_number(*t), format_number(*v)));
        }
        report_impulses(&series, |v| *v != 0.0, |v| format_number(*v));
    }
    Ok(out)
}

fn report_impulses<V>(s: &ResponseSeries<V>, nonzero: impl Fn(&V) -> bool, show: impl Fn(&V) -> String) {
    for (t, v) in &s.impulses {
        if nonzero(v) {
            eprintln!("impulse at t = {}: {}", format_number(*t), show(v));
        }
    }
}
