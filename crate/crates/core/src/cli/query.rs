//! Serializable queries and their evaluation.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::verify::{self, Suite};
use super::CliError;
use crate::constants::{self, BbdgvConstant, ConstantResult, HigherOrder};
use crate::potentials::RadialPotential;
use crate::sturm::{integral_conditions, prufer_shoot, BesselPairSpec, ShootOptions};
use crate::weights::{criterion_at_zero, weight_pair_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantName {
    Hardy,
    Ckn,
    Cn,
    ANm,
    BetaNm,
    Mode,
    Sigma,
    Power,
    Bbdgv,
    HigherOrder,
}

impl std::str::FromStr for ConstantName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "hardy" => Self::Hardy,
            "ckn" => Self::Ckn,
            "cn" | "c_n" => Self::Cn,
            "a_nm" | "a" => Self::ANm,
            "beta_nm" | "beta" => Self::BetaNm,
            "mode" | "mode_a" => Self::Mode,
            "sigma" | "sigma_nm" => Self::Sigma,
            "power" | "power_family" => Self::Power,
            "bbdgv" => Self::Bbdgv,
            "ho" | "higher_order" => Self::HigherOrder,
            _ => return Err(format!("unknown constant `{s}`")),
        })
    }
}

/// Parameters of a closed-form constant. Unused fields stay `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstantParams {
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<HigherOrder>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableName {
    ANm,
    BetaNm,
}

impl std::str::FromStr for TableName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a_nm" | "a" => Ok(Self::ANm),
            "beta_nm" | "beta" => Ok(Self::BetaNm),
            _ => Err(format!("unknown table `{s}`; expected a_nm or beta_nm")),
        }
    }
}

/// One fully resolved invocation. Potentials are stored in canonical form so
/// that a query read back from JSON evaluates identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verb", rename_all = "kebab-case")]
pub enum Query {
    PairCheck { v: String, w: String, n: u32, radius: f64, coupling: f64, tol: f64, eps: f64 },
    Weight { v: String, w: String, n: u32, radius: f64, tol: f64, eps: f64 },
    Constant { name: ConstantName, params: ConstantParams },
    Verify { suite: Suite },
    Table { name: TableName, n_range: (u32, u32), m_range: (f64, f64, f64) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: u32,
    pub m: f64,
    pub value: f64,
    pub case: String,
    pub k_min: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub query: Query,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    pub case_taken: String,
    pub diagnostics: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<TableRow>>,
    /// Set by `verify` when at least one item failed.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub failed: bool,
}

impl Outcome {
    fn new(query: &Query, value: Option<f64>, case_taken: impl Into<String>, diagnostics: Value) -> Self {
        Self { query: query.clone(), value, bracket: None, case_taken: case_taken.into(), diagnostics, rows: None, failed: false }
    }
}

fn potential(expr: &str) -> Result<RadialPotential, CliError> {
    expr.parse::<RadialPotential>().map_err(|e| CliError::Usage(format!("`{expr}`: {e}")))
}

/// The integrator tolerance follows the requested tolerance but never
/// loosens past the default.
fn shoot_options(tol: f64, eps: f64) -> ShootOptions {
    let base = ShootOptions::default();
    ShootOptions { eps_ratio: eps, tol: base.tol.min(tol), ..base }
}

fn need<T: Copy>(field: Option<T>, flag: &str, name: ConstantName) -> Result<T, CliError> {
    field.ok_or_else(|| CliError::Usage(format!("constant {name:?} needs --{flag}")))
}

fn from_result(query: &Query, r: ConstantResult) -> Outcome {
    let diagnostics = json!({
        "k_min": r.k_min,
        "components": r.components,
        "table": r.table,
    });
    Outcome::new(query, Some(r.value), r.case_taken, diagnostics)
}

fn constant(query: &Query, name: ConstantName, p: &ConstantParams) -> Result<Outcome, CliError> {
    let n = need(p.n, "n", name)?;
    let exact = |value: f64, case: &str| Outcome::new(query, Some(value), case, json!({}));
    Ok(match name {
        ConstantName::Hardy => exact(constants::hardy_constant(n, p.lambda.unwrap_or(0.0))?, "((n-lambda-2)/2)^2"),
        ConstantName::Ckn => exact(constants::ckn_constant(n, need(p.a, "a", name)?)?, "((n-2a-2)/2)^2"),
        ConstantName::Cn => {
            let r = constants::a_nm(n, 0.0);
            let v = constants::cn_constant(n)?;
            let case = r.map(|r| r.case_taken).unwrap_or_default();
            exact(v, &case)
        }
        ConstantName::ANm => from_result(query, constants::a_nm(n, need(p.m, "m", name)?)?),
        ConstantName::BetaNm => from_result(query, constants::beta_nm(n, need(p.m, "m", name)?)?),
        ConstantName::Mode => {
            let k = need(p.k, "k", name)?;
            if !(k >= 0.0 && k.fract() == 0.0) {
                return Err(CliError::Usage(format!("mode index must be a nonnegative integer, got {k}")));
            }
            exact(constants::mode_constant_a(k as u64, need(p.m, "m", name)?, n)?, "A(k,m,n)")
        }
        ConstantName::Sigma => exact(
            constants::sigma_nm(n, need(p.m, "m", name)?, need(p.lambda, "lambda", name)?, need(p.beta_w, "beta-w", name)?),
            "sigma",
        ),
        ConstantName::Power => exact(
            constants::power_family_constant(n, p.m.unwrap_or(0.0), need(p.alpha, "alpha", name)?, need(p.beta, "beta", name)?)?,
            "power-family",
        ),
        ConstantName::Bbdgv => {
            let c = constants::bbdgv_constant(n, need(p.alpha, "alpha", name)?, need(p.beta, "beta", name)?, p.b.unwrap_or(1.0))?;
            match c {
                BbdgvConstant::Exact(v) => exact(v, "exact"),
                BbdgvConstant::Bounds { lower, upper } => {
                    let mut o = Outcome::new(query, None, "bounds", json!({}));
                    o.bracket = Some([lower, upper]);
                    o
                }
            }
        }
        ConstantName::HigherOrder => {
            let m = need(p.m, "m", name)?;
            if !(m >= 1.0 && m.fract() == 0.0) {
                return Err(CliError::Usage(format!("higher-order m must be a positive integer, got {m}")));
            }
            let r = constants::higher_order_constants(
                need(p.variant, "variant", name)?,
                n,
                p.k.unwrap_or(0.0),
                m as u32,
                need(p.l, "l", name)?,
                p.beta_w.unwrap_or(0.25),
                p.lambda.unwrap_or(2.0),
            )?;
            from_result(query, r)
        }
    })
}

fn m_grid(range: (f64, f64, f64)) -> Result<Vec<f64>, CliError> {
    let (lo, hi, step) = range;
    if !(step > 0.0 && lo <= hi && lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Usage(format!("bad m-range {lo}..{hi}..{step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    if count > 1_000_000 {
        return Err(CliError::Usage("m-range has too many points".into()));
    }
    Ok((0..=count).map(|i| lo + i as f64 * step).collect())
}

fn table(query: &Query, name: TableName, n_range: (u32, u32), m_range: (f64, f64, f64)) -> Result<Outcome, CliError> {
    use rayon::prelude::*;
    if n_range.0 > n_range.1 || n_range.0 == 0 {
        return Err(CliError::Usage(format!("bad n-range {}..{}", n_range.0, n_range.1)));
    }
    let ms = m_grid(m_range)?;
    let cells: Vec<(u32, f64)> = (n_range.0..=n_range.1).flat_map(|n| ms.iter().map(move |&m| (n, m))).collect();
    // Collecting an indexed parallel iterator keeps the input order.
    let rows: Vec<TableRow> = cells
        .par_iter()
        .filter_map(|&(n, m)| {
            let r = match name {
                TableName::ANm => constants::a_nm(n, m),
                TableName::BetaNm => constants::beta_nm(n, m),
            };
            r.ok().map(|r| TableRow { n, m, value: r.value, case: r.case_taken, k_min: r.k_min })
        })
        .collect();
    let mut o = Outcome::new(query, None, "table", json!({ "rows": rows.len(), "skipped_out_of_regime": cells.len() - rows.len() }));
    o.rows = Some(rows);
    Ok(o)
}

/// Evaluates a query. Deterministic: equal queries give bit-identical values.
pub fn execute(query: &Query) -> Result<Outcome, CliError> {
    match query {
        Query::PairCheck { v, w, n, radius, coupling, tol, eps } => {
            let (vp, wp) = (potential(v)?, potential(w)?);
            let pair = BesselPairSpec::new(vp.clone(), wp.clone(), *n, *radius, *coupling)?;
            let report = prufer_shoot(&pair, &shoot_options(*tol, *eps))?;
            let conditions = integral_conditions(&pair);
            let zero = criterion_at_zero(&vp, &wp, *n, *radius).ok().map(|z| z.with_coupling(*coupling));
            let case = if report.positive_on_interval { "positive" } else { "has-zero" };
            let diagnostics = json!({
                "report": report,
                "integral_conditions": conditions,
                "warnings": conditions.warnings(),
                "criterion_at_zero": zero.map(|z| json!({
                    "limit_estimate": z.limit_estimate,
                    "classification": z.classification,
                })),
            });
            Ok(Outcome::new(query, Some(report.zero_count as f64), case, diagnostics))
        }
        Query::Weight { v, w, n, radius, tol, eps } => {
            let (vp, wp) = (potential(v)?, potential(w)?);
            let est = weight_pair_with(&vp, &wp, *n, *radius, *tol, &shoot_options(*tol, *eps))?;
            let diagnostics = json!({
                "iterations": est.iterations,
                "lower_report": est.lower_report,
                "upper_report": est.upper_report,
            });
            let mut o = Outcome::new(query, Some(est.value), "bisection", diagnostics);
            o.bracket = Some([est.lower, est.upper]);
            Ok(o)
        }
        Query::Constant { name, params } => constant(query, *name, params),
        Query::Verify { suite } => {
            let report = verify::run_suite(*suite);
            let failed = report.items.iter().any(|i| !i.pass);
            let diagnostics = serde_json::to_value(&report).unwrap_or(Value::Null);
            let mut o = Outcome::new(query, Some(report.max_deviation), if failed { "fail" } else { "pass" }, diagnostics);
            o.failed = failed;
            Ok(o)
        }
        Query::Table { name, n_range, m_range } => table(query, *name, *n_range, *m_range),
    }
}
