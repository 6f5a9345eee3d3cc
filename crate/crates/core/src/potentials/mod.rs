//! Radial potentials and their logarithmic derivatives.
//!
//! Every potential can be evaluated in log form, `ln V` as a function of
//! `ln r`, so that radii far below the smallest positive double stay usable.

mod grammar;

use std::fmt;

use thiserror::Error;

pub use grammar::parse_potential;

/// Largest depth accepted for iterated logarithms. The tower `e^e^...` of
/// height 4 already overflows a double, so depth 5 is rejected by the
/// overflow guard anyway.
pub const MAX_ILOG_DEPTH: u32 = 5;
/// Largest nesting depth accepted for the `X_k` family.
pub const MAX_XLOG_DEPTH: u32 = 16;

const ILOG_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("radius {r} lies outside the domain (0, {radius}]")]
    Domain { r: f64, radius: f64 },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("no limiting exponent: {0}")]
    NoLimit(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `V(r) = c`, `c >= 0`.
    Constant { level: f64 },
    /// `V(r) = r^{-a}`.
    Power { exponent: f64 },
    /// `V(r) = (a + b r^alpha)^beta / r^{2m}`.
    PowerWeighted { a: f64, b: f64, alpha: f64, beta: f64, m: f64 },
    /// `W_{k,rho}(r) = sum_{j<=k} r^{-2} prod_{i<=j} (log^{(i)}(rho/r))^{-2}`.
    IteratedLog { depth: u32, rho: f64 },
    /// `sum_{j<=k} r^{-2} prod_{i<=j} X_i(r/D)^2` with `X_1(t) = 1/(1 - ln t)`.
    XLog { depth: u32, d: f64 },
    /// `alpha^2 W(alpha r)`.
    Scaled { alpha: f64, inner: Box<RadialPotential> },
    Sum(Vec<RadialPotential>),
}

/// A nonnegative radial function on `(0, domain_radius]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPotential {
    kind: PotentialKind,
    domain_radius: f64,
}

fn finite(name: &str, x: f64) -> Result<f64, PotentialError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(PotentialError::Param(format!("{name} must be finite, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> Result<f64, PotentialError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(PotentialError::Param(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Height-`k` exponential tower: `tower(0) = 1`, `tower(k) = e^{tower(k-1)}`.
pub fn exp_tower(k: u32) -> f64 {
    (0..k).fold(1.0_f64, |acc, _| acc.exp())
}

/// `ln(e^x + e^y)` without overflow.
pub(crate) fn log_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

/// `1 / (1 + e^{-z})`.
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl RadialPotential {
    fn new(kind: PotentialKind, domain_radius: f64) -> Self {
        Self { kind, domain_radius }
    }

    pub fn constant(level: f64) -> Result<Self, PotentialError> {
        let level = finite("constant level", level)?;
        if level < 0.0 {
            return Err(PotentialError::Param(format!("constant level must be >= 0, got {level}")));
        }
        Ok(Self::new(PotentialKind::Constant { level }, f64::INFINITY))
    }

    pub fn power(exponent: f64) -> Result<Self, PotentialError> {
        let exponent = finite("power exponent", exponent)?;
        Ok(Self::new(PotentialKind::Power { exponent }, f64::INFINITY))
    }

    pub fn power_weighted(a: f64, b: f64, alpha: f64, beta: f64, m: f64) -> Result<Self, PotentialError> {
        let a = positive("a", a)?;
        let b = positive("b", b)?;
        let alpha = finite("alpha", alpha)?;
        let beta = finite("beta", beta)?;
        let m = finite("m", m)?;
        Ok(Self::new(PotentialKind::PowerWeighted { a, b, alpha, beta, m }, f64::INFINITY))
    }

    pub fn iterated_log(depth: u32, rho: f64) -> Result<Self, PotentialError> {
        if depth == 0 || depth > MAX_ILOG_DEPTH {
            return Err(PotentialError::Param(format!(
                "iterated-log depth must be in 1..={MAX_ILOG_DEPTH}, got {depth}"
            )));
        }
        let rho = positive("rho", rho)?;
        let tower = exp_tower(depth - 1);
        if !tower.is_finite() {
            return Err(PotentialError::Param(format!(
                "exponential tower of height {} overflows; depth {depth} is unusable",
                depth - 1
            )));
        }
        let radius = rho / (tower * (1.0 + ILOG_MARGIN));
        Ok(Self::new(PotentialKind::IteratedLog { depth, rho }, radius))
    }

    pub fn xlog(depth: u32, d: f64) -> Result<Self, PotentialError> {
        if depth == 0 || depth > MAX_XLOG_DEPTH {
            return Err(PotentialError::Param(format!(
                "X-log depth must be in 1..={MAX_XLOG_DEPTH}, got {depth}"
            )));
        }
        let d = positive("D", d)?;
        Ok(Self::new(PotentialKind::XLog { depth, d }, d))
    }

    pub fn scaled(alpha: f64, inner: RadialPotential) -> Result<Self, PotentialError> {
        let alpha = positive("scaling alpha", alpha)?;
        let radius = inner.domain_radius / alpha;
        Ok(Self::new(PotentialKind::Scaled { alpha, inner: Box::new(inner) }, radius))
    }

    pub fn sum(members: Vec<RadialPotential>) -> Result<Self, PotentialError> {
        if members.is_empty() {
            return Err(PotentialError::Param("sum needs at least one member".into()));
        }
        let radius = members.iter().map(|m| m.domain_radius).fold(f64::INFINITY, f64::min);
        Ok(Self::new(PotentialKind::Sum(members), radius))
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Largest radius on which the potential is defined and positive-safe.
    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    /// True when the potential vanishes everywhere.
    pub fn is_identically_zero(&self) -> bool {
        match &self.kind {
            PotentialKind::Constant { level } => *level == 0.0,
            PotentialKind::Scaled { inner, .. } => inner.is_identically_zero(),
            PotentialKind::Sum(ms) => ms.iter().all(|m| m.is_identically_zero()),
            _ => false,
        }
    }

    fn check_radius(&self, r: f64) -> Result<(), PotentialError> {
        if r.is_finite() && r > 0.0 && r <= self.domain_radius {
            Ok(())
        } else {
            Err(PotentialError::Domain { r, radius: self.domain_radius })
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64, PotentialError> {
        self.check_radius(r)?;
        Ok(match &self.kind {
            PotentialKind::Constant { level } => *level,
            PotentialKind::Power { exponent } => r.powf(-exponent),
            _ => self.ln_value(r.ln()).exp(),
        })
    }

    /// `r V'(r) / V(r)`.
    pub fn log_derivative(&self, r: f64) -> Result<f64, PotentialError> {
        self.check_radius(r)?;
        if self.is_identically_zero() {
            return Err(PotentialError::NoLimit("log-derivative of the zero potential".into()));
        }
        Ok(self.ln_log_derivative(r.ln()))
    }

    /// `ln V` at `ln r = x`. Returns `-inf` where the potential vanishes.
    /// No domain check: callers stay inside `(0, domain_radius]`.
    pub fn ln_value(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Constant { level } => level.ln(),
            PotentialKind::Power { exponent } => -exponent * x,
            PotentialKind::PowerWeighted { a, b, alpha, beta, m } => {
                let base = log_add_exp(a.ln(), b.ln() + alpha * x);
                beta * base - 2.0 * m * x
            }
            PotentialKind::IteratedLog { depth, rho } => {
                let mut l = rho.ln() - x;
                let mut ln_p = 0.0;
                let mut acc = f64::NEG_INFINITY;
                for _ in 0..*depth {
                    ln_p += l.ln();
                    acc = log_add_exp(acc, -2.0 * ln_p);
                    l = l.ln();
                }
                -2.0 * x + acc
            }
            PotentialKind::XLog { depth, d } => {
                let mut xi = 1.0 / (1.0 - (x - d.ln()));
                let mut ln_p = 0.0;
                let mut acc = f64::NEG_INFINITY;
                for _ in 0..*depth {
                    ln_p += 2.0 * xi.ln();
                    acc = log_add_exp(acc, ln_p);
                    xi = 1.0 / (1.0 - xi.ln());
                }
                -2.0 * x + acc
            }
            PotentialKind::Scaled { alpha, inner } => 2.0 * alpha.ln() + inner.ln_value(x + alpha.ln()),
            PotentialKind::Sum(ms) => ms.iter().fold(f64::NEG_INFINITY, |acc, m| log_add_exp(acc, m.ln_value(x))),
        }
    }

    /// `r V'/V` at `ln r = x`.
    pub fn ln_log_derivative(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Constant { .. } => 0.0,
            PotentialKind::Power { exponent } => -exponent,
            PotentialKind::PowerWeighted { a, b, alpha, beta, m } => {
                let share = logistic(b.ln() + alpha * x - a.ln());
                -2.0 * m + alpha * beta * share
            }
            PotentialKind::IteratedLog { depth, rho } => {
                // term_j = r^-2 P_j^-2, r term_j'/term_j = -2 + 2 sum_{i<=j} 1/P_i
                let mut l = rho.ln() - x;
                let mut ln_p = 0.0;
                let mut s = 0.0;
                let mut terms = Vec::with_capacity(*depth as usize);
                for _ in 0..*depth {
                    ln_p += l.ln();
                    s += (-ln_p).exp();
                    terms.push((-2.0 * ln_p, -2.0 + 2.0 * s));
                    l = l.ln();
                }
                weighted_mean(&terms)
            }
            PotentialKind::XLog { depth, d } => {
                // term_j = r^-2 prod X_i^2, r term_j'/term_j = -2 + 2 sum_{i<=j} X_1...X_i
                let mut xi = 1.0 / (1.0 - (x - d.ln()));
                let mut ln_p = 0.0;
                let mut g = 1.0;
                let mut s = 0.0;
                let mut terms = Vec::with_capacity(*depth as usize);
                for _ in 0..*depth {
                    ln_p += 2.0 * xi.ln();
                    g *= xi;
                    s += g;
                    terms.push((ln_p, -2.0 + 2.0 * s));
                    xi = 1.0 / (1.0 - xi.ln());
                }
                weighted_mean(&terms)
            }
            PotentialKind::Scaled { alpha, inner } => inner.ln_log_derivative(x + alpha.ln()),
            PotentialKind::Sum(ms) => {
                let terms: Vec<(f64, f64)> = ms
                    .iter()
                    .filter(|m| !m.is_identically_zero())
                    .map(|m| (m.ln_value(x), m.ln_log_derivative(x)))
                    .collect();
                weighted_mean(&terms)
            }
        }
    }

    /// `lambda = -lim_{r->0} r V'(r)/V(r)`.
    pub fn lambda_limit(&self) -> Result<f64, PotentialError> {
        match &self.kind {
            PotentialKind::Constant { level } if *level == 0.0 => {
                Err(PotentialError::NoLimit("the zero potential has no log-derivative".into()))
            }
            PotentialKind::Constant { .. } => Ok(0.0),
            PotentialKind::Power { exponent } => Ok(*exponent),
            PotentialKind::PowerWeighted { alpha, beta, m, .. } => {
                if *alpha < 0.0 {
                    Ok(2.0 * m - alpha * beta)
                } else {
                    Ok(2.0 * m)
                }
            }
            PotentialKind::IteratedLog { .. } | PotentialKind::XLog { .. } => Ok(2.0),
            PotentialKind::Scaled { inner, .. } => inner.lambda_limit(),
            PotentialKind::Sum(ms) => dominant(ms, RadialPotential::lambda_limit, f64::max),
        }
    }

    /// `-lim_{r->inf} r V'(r)/V(r)`, for kinds defined on all of `(0, inf)`.
    pub fn lambda_at_infinity(&self) -> Result<f64, PotentialError> {
        match &self.kind {
            PotentialKind::Constant { level } if *level == 0.0 => {
                Err(PotentialError::NoLimit("the zero potential has no log-derivative".into()))
            }
            PotentialKind::Constant { .. } => Ok(0.0),
            PotentialKind::Power { exponent } => Ok(*exponent),
            PotentialKind::PowerWeighted { alpha, beta, m, .. } => {
                if *alpha > 0.0 {
                    Ok(2.0 * m - alpha * beta)
                } else {
                    Ok(2.0 * m)
                }
            }
            PotentialKind::IteratedLog { .. } | PotentialKind::XLog { .. } => {
                Err(PotentialError::NoLimit("logarithmic kinds live on a bounded interval".into()))
            }
            PotentialKind::Scaled { inner, .. } => inner.lambda_at_infinity(),
            PotentialKind::Sum(ms) => dominant(ms, RadialPotential::lambda_at_infinity, f64::min),
        }
    }
}

/// Weighted average of values with log-weights, as in the log-derivative of a sum.
fn weighted_mean(terms: &[(f64, f64)]) -> f64 {
    let top = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(lw, v) in terms {
        let w = (lw - top).exp();
        num += w * v;
        den += w;
    }
    num / den
}

fn dominant(
    ms: &[RadialPotential],
    f: fn(&RadialPotential) -> Result<f64, PotentialError>,
    pick: fn(f64, f64) -> f64,
) -> Result<f64, PotentialError> {
    let mut best: Option<f64> = None;
    for m in ms.iter().filter(|m| !m.is_identically_zero()) {
        let l = f(m)?;
        best = Some(best.map_or(l, |b| pick(b, l)));
    }
    best.ok_or_else(|| PotentialError::NoLimit("every member of the sum vanishes".into()))
}

impl fmt::Display for RadialPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PotentialKind::Constant { level } => write!(f, "const:{level}"),
            PotentialKind::Power { exponent } => write!(f, "pow:{exponent}"),
            PotentialKind::PowerWeighted { a, b, alpha, beta, m } => {
                write!(f, "pw:a={a},b={b},alpha={alpha},beta={beta},m={m}")
            }
            PotentialKind::IteratedLog { depth, rho } => write!(f, "ilog:k={depth},rho={rho}"),
            PotentialKind::XLog { depth, d } => write!(f, "xlog:k={depth},D={d}"),
            PotentialKind::Scaled { alpha, inner } => write!(f, "scaled:alpha={alpha},({inner})"),
            PotentialKind::Sum(ms) => {
                write!(f, "sum(")?;
                for (i, m) in ms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl std::str::FromStr for RadialPotential {
    type Err = PotentialError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_potential(s)
    }
}
