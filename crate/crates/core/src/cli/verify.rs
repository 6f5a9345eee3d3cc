//! Cross-check suites: closed forms against the oracle and the ODE weight.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{self, HigherOrder};
use crate::oracle;
use crate::potentials::RadialPotential;
use crate::special::j0_first_zero;
use crate::weights::{criterion_at_zero, weight_pair, weight_potential, CriterionClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Classical,
    #[serde(rename = "appendixB")]
    AppendixB,
    Rellich,
    Weights,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classical" => Ok(Self::Classical),
            "appendixB" | "appendixb" | "appendix-b" => Ok(Self::AppendixB),
            "rellich" => Ok(Self::Rellich),
            "weights" => Ok(Self::Weights),
            _ => Err(format!("unknown suite `{s}`; expected classical, appendixB, rellich or weights")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyItem {
    pub name: String,
    pub pass: bool,
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub items: Vec<VerifyItem>,
    pub max_deviation: f64,
}

type Check = Box<dyn Fn() -> VerifyItem + Send + Sync>;

fn item(name: impl Into<String>, deviation: f64, tolerance: f64, detail: impl Into<String>) -> VerifyItem {
    VerifyItem { name: name.into(), pass: deviation <= tolerance, deviation, tolerance, detail: detail.into() }
}

fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> VerifyItem {
    VerifyItem { name: name.into(), pass: false, deviation: f64::INFINITY, tolerance: 0.0, detail: err.to_string() }
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn pot(expr: &str) -> RadialPotential {
    expr.parse().expect("suite potentials are well formed")
}

/// Runs every check of a suite, in parallel, and reports them in order.
/// A failing check never stops the others.
pub fn run_suite(suite: Suite) -> VerifyReport {
    let checks = match suite {
        Suite::Classical => classical(),
        Suite::AppendixB => appendix_b(),
        Suite::Rellich => rellich(),
        Suite::Weights => weights(),
    };
    let items: Vec<VerifyItem> = checks.par_iter().map(|c| c()).collect();
    let max_deviation = items.iter().map(|i| i.deviation).fold(0.0, f64::max);
    VerifyReport { suite, items, max_deviation }
}

fn classical() -> Vec<Check> {
    let mut checks: Vec<Check> = Vec::new();
    for n in 3..=10u32 {
        checks.push(Box::new(move || {
            let name = format!("hardy n={n} ode");
            let want = constants::hardy_constant(n, 0.0).unwrap();
            match weight_pair(&pot("const:1"), &pot("pow:2"), n, 1.0, 1e-7) {
                Ok(est) => item(name, (est.value - want).abs(), 1e-6, format!("weight {} vs {want}", est.value)),
                Err(e) => failed(name, e),
            }
        }));
        checks.push(Box::new(move || {
            let name = format!("hardy n={n} oracle");
            let want = constants::hardy_constant(n, 0.0).unwrap();
            match oracle::discrete_hardy_quotient(&pot("const:1"), &pot("pow:2"), n, 1.0, 4096) {
                Ok(v) => item(name, rel(v, want), 0.02, format!("discrete {v} vs {want}")),
                Err(e) => failed(name, e),
            }
        }));
    }
    checks
}

fn appendix_b() -> Vec<Check> {
    let mut checks: Vec<Check> = Vec::new();
    for n in 1..=12u32 {
        checks.push(Box::new(move || {
            let name = format!("a_nm scan vs table n={n}");
            let top = (n as f64 - 2.0) / 2.0;
            let (mut worst, mut compared) = (0.0f64, 0);
            let mut j = 0;
            loop {
                let m = -3.0 + 0.1 * j as f64;
                if m > top + 1e-12 {
                    break;
                }
                j += 1;
                let r = match constants::a_nm(n, m) {
                    Ok(r) => r,
                    Err(e) => return failed(name, e),
                };
                if let Some(t) = r.table.filter(|t| t.unambiguous) {
                    worst = worst.max((r.value - t.value).abs() / (1.0 + t.value.abs()));
                    compared += 1;
                }
            }
            item(name, worst, 1e-12, format!("{compared} grid points compared"))
        }));
    }
    for (n, want, k) in [(3u32, 25.0 / 36.0, 1u64), (4, 3.0, 1), (5, 6.25, 0)] {
        checks.push(Box::new(move || {
            let name = format!("C({n}) oracle");
            let cutoff = match oracle::default_mode_cutoff(n, 0.0) {
                Ok(c) => c,
                Err(e) => return failed(name, e),
            };
            match oracle::discrete_hardy_rellich(n, 0.0, cutoff, 1.0, 4096) {
                Ok(est) => {
                    let dev = if est.k_min == k { rel(est.value, want) } else { f64::INFINITY };
                    item(name, dev, 0.03, format!("discrete {} at k={} vs {want} at k={k}", est.value, est.k_min))
                }
                Err(e) => failed(name, e),
            }
        }));
    }
    checks
}

fn rellich() -> Vec<Check> {
    let mut checks: Vec<Check> = Vec::new();
    for n in 4..=12u32 {
        checks.push(Box::new(move || {
            let name = format!("beta_nm n={n} m=0");
            let nf = n as f64;
            let want = nf * nf * (nf - 4.0).powi(2) / 16.0;
            match constants::beta_nm(n, 0.0) {
                Ok(r) => item(name, (r.value - want).abs() / (1.0 + want), 1e-12, format!("{} vs {want}", r.value)),
                Err(e) => failed(name, e),
            }
        }));
        checks.push(Box::new(move || {
            let nf = n as f64;
            let want = 1.0 + nf * (nf - 4.0) / 8.0;
            let got = constants::sigma_nm(n, 0.0, 2.0, 0.25);
            item(format!("sigma n={n}"), (got - want).abs(), 1e-12, format!("{got} vs {want}"))
        }));
    }
    let ho: [(HigherOrder, u32, f64); 2] = [(HigherOrder::Ho1, 9, 126.5625), (HigherOrder::Ho4, 8, 64.0)];
    for (variant, n, want) in ho {
        checks.push(Box::new(move || {
            let name = format!("{variant:?} n={n}");
            match constants::higher_order_constants(variant, n, 0.0, 2, 1, 0.25, 2.0) {
                Ok(r) => item(name, (r.value - want).abs(), 1e-12, format!("{} vs {want}", r.value)),
                Err(e) => failed(name, e),
            }
        }));
    }
    checks
}

fn weights() -> Vec<Check> {
    let mut checks: Vec<Check> = Vec::new();
    checks.push(Box::new(|| {
        let z = j0_first_zero();
        match weight_potential(&pot("const:1"), 1.0, 1e-8) {
            Ok(est) => item("bessel zero", (est.value - z * z).abs(), 1e-6, format!("weight {} vs z0^2 {}", est.value, z * z)),
            Err(e) => failed("bessel zero", e),
        }
    }));
    checks.push(Box::new(|| {
        let name = "radius scaling";
        let values: Result<Vec<f64>, _> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&r| weight_potential(&pot("const:1"), r, 1e-9 / (r * r)).map(|e| e.value * r * r))
            .collect();
        match values {
            Ok(v) => {
                let dev = v.iter().map(|x| rel(*x, v[1])).fold(0.0, f64::max);
                item(name, dev, 1e-6, format!("beta R^2 = {v:?}"))
            }
            Err(e) => failed(name, e),
        }
    }));
    checks.push(Box::new(|| {
        let name = "iterated log weight";
        match weight_potential(&pot("ilog:k=1,rho=2.718281828459045"), 1.0, 1e-6) {
            Ok(est) => item(name, (est.value - 0.25).abs(), 0.05, format!("weight {}", est.value)),
            Err(e) => failed(name, e),
        }
    }));
    for c in [0.2, 3.0] {
        checks.push(Box::new(move || {
            let name = format!("criterion at zero c={c}");
            let w = RadialPotential::power_weighted(c / 2.0, c / 2.0, 0.0, 1.0, 1.0).expect("valid weight");
            let want_class = if c / 9.0 < 0.25 {
                CriterionClass::SufficientBelowQuarter
            } else {
                CriterionClass::NecessaryFailAboveQuarter
            };
            match criterion_at_zero(&pot("const:1"), &w, 5, 1.0) {
                Ok(z) => {
                    let dev = if z.classification == want_class { (z.limit_estimate - c / 9.0).abs() } else { f64::INFINITY };
                    item(name, dev, 1e-4, format!("limit {} ({:?})", z.limit_estimate, z.classification))
                }
                Err(e) => failed(name, e),
            }
        }));
    }
    checks.push(Box::new(|| {
        let name = "monotone in W";
        let small = weight_pair(&pot("const:1"), &pot("pow:2"), 3, 1.0, 1e-7);
        let large = weight_pair(&pot("const:1"), &pot("sum(pow:2;const:40)"), 3, 1.0, 1e-7);
        match (small, large) {
            (Ok(s), Ok(l)) => {
                // The constant term pushes the weight strictly below 1/4.
                let dev = if l.value < s.value - 1e-3 { 0.0 } else { (l.value - s.value + 1e-3).max(f64::MIN_POSITIVE) };
                item(name, dev, 1e-7, format!("beta(r^-2) = {}, beta(r^-2 + 40) = {}", s.value, l.value))
            }
            (Err(e), _) | (_, Err(e)) => failed(name, e),
        }
    }));
    checks
}
