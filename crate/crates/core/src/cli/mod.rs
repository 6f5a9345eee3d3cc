//! `bessel <verb> [flags]`.

pub mod query;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::constants::{ConstantError, HigherOrder};
use crate::oracle::OracleError;
use crate::potentials::PotentialError;
use crate::sturm::{ShootError, ShootOptions};
use crate::weights::WeightError;
pub use query::{execute, ConstantName, ConstantParams, Outcome, Query, TableName, TableRow};
pub use verify::{run_suite, Suite, VerifyItem, VerifyReport};

pub const EXIT_OK: i32 = 0;
/// A `verify` suite ran and at least one check failed.
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_OUT_OF_REGIME: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("out of regime: {0}")]
    OutOfRegime(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::OutOfRegime(_) => EXIT_OUT_OF_REGIME,
            Self::Numerical(_) | Self::Io(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<ConstantError> for CliError {
    fn from(e: ConstantError) -> Self {
        match e {
            ConstantError::OutOfRegime(msg) => Self::OutOfRegime(msg),
            other => Self::OutOfRegime(other.to_string()),
        }
    }
}

impl From<PotentialError> for CliError {
    fn from(e: PotentialError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<ShootError> for CliError {
    fn from(e: ShootError) -> Self {
        match e {
            ShootError::Stiffness { .. } => Self::Numerical(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        match e {
            WeightError::Shoot(s) => s.into(),
            WeightError::Potential(p) => p.into(),
            WeightError::BadTolerance(_) | WeightError::BadGrid(_) => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Constant(c) => c.into(),
            OracleError::Potential(p) => p.into(),
            OracleError::SingularMass | OracleError::IndefiniteStiffness => Self::Numerical(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bessel", version, about = "Bessel pair weights and inequality constants")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Args)]
struct Output {
    /// Print one JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Args)]
struct Numerics {
    /// Bisection and integrator tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Inner cutoff as a fraction of R.
    #[arg(long, default_value_t = ShootOptions::default().eps_ratio)]
    eps: f64,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Shoot the pair equation once and report positivity on (0, R).
    PairCheck {
        #[arg(long = "V", default_value = "const:1")]
        v: String,
        #[arg(long = "W")]
        w: String,
        #[arg(long)]
        n: u32,
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[command(flatten)]
        numerics: Numerics,
        #[command(flatten)]
        output: Output,
    },
    /// Weight of a pair (`--V`, `--W`, `--n`) or of a potential in dimension 2.
    Weight {
        #[arg(long, conflicts_with_all = ["v", "w"])]
        potential: Option<String>,
        #[arg(long = "V")]
        v: Option<String>,
        #[arg(long = "W")]
        w: Option<String>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
        #[command(flatten)]
        numerics: Numerics,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form constants: hardy, ckn, cn, a_nm, beta_nm, mode, sigma,
    /// power, bbdgv, ho.
    Constant {
        name: ConstantName,
        #[arg(long)]
        n: u32,
        #[arg(long, allow_negative_numbers = true)]
        m: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long)]
        beta_w: Option<f64>,
        /// ho1, ho2, ho3 or ho4.
        #[arg(long)]
        variant: Option<HigherOrder>,
        #[command(flatten)]
        output: Output,
    },
    /// Run a cross-check suite: classical, appendixB, rellich or weights.
    Verify {
        #[arg(long)]
        suite: Suite,
        #[command(flatten)]
        output: Output,
    },
    /// Tabulate a_nm or beta_nm over a grid of (n, m).
    Table {
        name: TableName,
        /// Inclusive `a..b`.
        #[arg(long, default_value = "1..12", allow_hyphen_values = true)]
        n_range: String,
        /// Inclusive `a..b..step`.
        #[arg(long, default_value = "-3..5..0.5", allow_hyphen_values = true)]
        m_range: String,
        /// Write the table as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

fn parse_n_range(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Usage(format!("n-range must look like a..b, got `{s}`"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_m_range(s: &str) -> Result<(f64, f64, f64), CliError> {
    let bad = || CliError::Usage(format!("m-range must look like a..b..step, got `{s}`"));
    let parts: Vec<f64> = s.split("..").map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, step] => Ok((a, b, step)),
        _ => Err(bad()),
    }
}

/// Formats with 12 significant digits, trimming trailing zeros.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if rounded != 0.0 && !(1e-4..1e15).contains(&rounded.abs()) {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}

fn to_query(verb: Verb) -> Result<(Query, bool, Option<PathBuf>), CliError> {
    Ok(match verb {
        Verb::PairCheck { v, w, n, radius, c, numerics, output } => {
            let q = Query::PairCheck {
                v: canonical(&v)?,
                w: canonical(&w)?,
                n,
                radius,
                coupling: c,
                tol: numerics.tol,
                eps: numerics.eps,
            };
            (q, output.json, None)
        }
        Verb::Weight { potential, v, w, n, radius, numerics, output } => {
            let (v, w, n) = match (potential, w) {
                (Some(p), None) => ("const:1".to_string(), p, n.unwrap_or(2)),
                (None, Some(w)) => {
                    let n = n.ok_or_else(|| CliError::Usage("weight of a pair needs --n".into()))?;
                    (v.unwrap_or_else(|| "const:1".into()), w, n)
                }
                _ => return Err(CliError::Usage("weight needs --potential or --W".into())),
            };
            let q = Query::Weight { v: canonical(&v)?, w: canonical(&w)?, n, radius, tol: numerics.tol, eps: numerics.eps };
            (q, output.json, None)
        }
        Verb::Constant { name, n, m, k, l, a, b, alpha, beta, lambda, beta_w, variant, output } => {
            let params = ConstantParams { n: Some(n), m, k, l, a, b, alpha, beta, lambda, beta_w, variant };
            (Query::Constant { name, params }, output.json, None)
        }
        Verb::Verify { suite, output } => (Query::Verify { suite }, output.json, None),
        Verb::Table { name, n_range, m_range, csv, output } => {
            let q = Query::Table { name, n_range: parse_n_range(&n_range)?, m_range: parse_m_range(&m_range)? };
            (q, output.json, csv)
        }
    })
}

fn canonical(expr: &str) -> Result<String, CliError> {
    Ok(expr.parse::<crate::potentials::RadialPotential>()?.to_string())
}

fn write_csv(rows: &[TableRow], sink: &mut dyn Write) -> std::io::Result<()> {
    writeln!(sink, "n,m,value,case,k_min")?;
    for r in rows {
        let k = r.k_min.map(|k| k.to_string()).unwrap_or_default();
        writeln!(sink, "{},{},{},\"{}\",{}", r.n, fmt12(r.m), fmt12(r.value), r.case.replace('"', "\"\""), k)?;
    }
    Ok(())
}

fn write_human(o: &Outcome, out: &mut dyn Write) -> std::io::Result<()> {
    if let Query::Verify { suite } = &o.query {
        let report: VerifyReport = serde_json::from_value(o.diagnostics.clone()).map_err(std::io::Error::other)?;
        for i in &report.items {
            let status = if i.pass { "PASS" } else { "FAIL" };
            writeln!(out, "{status} {}: deviation {} (tol {}) {}", i.name, fmt12(i.deviation), fmt12(i.tolerance), i.detail)?;
        }
        let passed = report.items.iter().filter(|i| i.pass).count();
        writeln!(out, "{suite:?}: {passed}/{} passed, max deviation {}", report.items.len(), fmt12(report.max_deviation))?;
        return Ok(());
    }
    if let Some(rows) = &o.rows {
        return write_csv(rows, out);
    }
    if let Some(v) = o.value {
        writeln!(out, "value: {}", fmt12(v))?;
    }
    if let Some([lo, hi]) = o.bracket {
        writeln!(out, "bracket: [{}, {}]", fmt12(lo), fmt12(hi))?;
    }
    writeln!(out, "case: {}", o.case_taken)?;
    if let Some(k) = o.diagnostics.get("k_min").and_then(|k| k.as_u64()) {
        writeln!(out, "k_min: {k}")?;
    }
    if let Some(ws) = o.diagnostics.get("warnings").and_then(|w| w.as_array()) {
        for w in ws {
            writeln!(out, "warning: {}", w.as_str().unwrap_or_default())?;
        }
    }
    if let Some(z) = o.diagnostics.get("criterion_at_zero").filter(|z| !z.is_null()) {
        writeln!(out, "criterion at zero: {} {}", z["limit_estimate"], z["classification"])?;
        writeln!(out, "note: a limit below 1/4 guarantees positivity only on some small ball (0, rho)")?;
    }
    Ok(())
}

fn thread_pool() -> Option<rayon::ThreadPool> {
    let cap = std::env::var("BESSEL_THREADS").ok()?.trim().parse::<usize>().ok().filter(|&t| t > 0)?;
    rayon::ThreadPoolBuilder::new().num_threads(cap).build().ok()
}

fn dispatch(verb: Verb, out: &mut dyn Write) -> Result<i32, CliError> {
    let (query, json, csv) = to_query(verb)?;
    let outcome = match thread_pool() {
        Some(pool) => pool.install(|| execute(&query))?,
        None => execute(&query)?,
    };
    if let (Some(path), Some(rows)) = (&csv, &outcome.rows) {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_csv(rows, &mut file)?;
        file.flush()?;
    }
    if json {
        let text = serde_json::to_string(&outcome).map_err(|e| CliError::Numerical(e.to_string()))?;
        writeln!(out, "{text}")?;
    } else if csv.is_none() || outcome.rows.is_none() {
        write_human(&outcome, out)?;
    }
    Ok(if outcome.failed { EXIT_VERIFY_FAILED } else { EXIT_OK })
}

/// Parses `args` (including the program name), runs the verb and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.verb, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
