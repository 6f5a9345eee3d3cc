//! Self-adjoint radial ODE `(p y')' + q y = 0` with `p = r^{n-1} V`,
//! `q = c r^{n-1} W`, and a Prüfer-angle shooting solver for it.
//!
//! The angle is integrated in `tau = ln(r/R)` using the scaled variables
//! `y = rho sin(theta) r / p`, `p y' = rho cos(theta)`, which gives
//!
//! ```text
//! dtheta/dtau = cos^2 + G sin^2 + H sin cos,   G = c r^2 W/V,  H = n - 2 + r V'/V.
//! ```
//!
//! Zeros of `y` are the crossings of multiples of pi, and at such a crossing
//! `dtheta/dtau = 1`, so the angle never falls back below a multiple of pi.

mod rk;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potentials::{PotentialError, RadialPotential};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShootError {
    #[error("invalid pair: {0}")]
    InvalidPair(String),
    #[error("step size collapsed to {step:e} at ln(r/R) = {at}")]
    Stiffness { step: f64, at: f64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// A candidate Bessel pair on the ball of radius `radius` in dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselPairSpec {
    v: RadialPotential,
    w: RadialPotential,
    n: u32,
    radius: f64,
    coupling: f64,
}

impl BesselPairSpec {
    pub fn new(v: RadialPotential, w: RadialPotential, n: u32, radius: f64, coupling: f64) -> Result<Self, ShootError> {
        if n == 0 {
            return Err(ShootError::InvalidPair("dimension must be at least 1".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(ShootError::InvalidPair(format!("radius must be positive and finite, got {radius}")));
        }
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(ShootError::InvalidPair(format!("coupling must be >= 0 and finite, got {coupling}")));
        }
        if v.is_identically_zero() {
            return Err(ShootError::InvalidPair("V must be positive on (0, R)".into()));
        }
        for (name, p) in [("V", &v), ("W", &w)] {
            if p.domain_radius() < radius {
                return Err(ShootError::InvalidPair(format!(
                    "{name} is only defined up to r = {}, below R = {radius}",
                    p.domain_radius()
                )));
            }
        }
        Ok(Self { v, w, n, radius, coupling })
    }

    pub fn with_coupling(&self, coupling: f64) -> Result<Self, ShootError> {
        Self::new(self.v.clone(), self.w.clone(), self.n, self.radius, coupling)
    }

    pub fn v(&self) -> &RadialPotential {
        &self.v
    }
    pub fn w(&self) -> &RadialPotential {
        &self.w
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Log-variable coefficients `(G, H)` at `tau = ln(r/R)`.
    fn coefficients(&self, tau: f64) -> (f64, f64) {
        let x = self.radius.ln() + tau;
        let h = self.n as f64 - 2.0 + self.v.ln_log_derivative(x);
        let g = if self.coupling == 0.0 {
            0.0
        } else {
            self.coupling * (2.0 * x + self.w.ln_value(x) - self.v.ln_value(x)).exp()
        };
        (g, h)
    }
}

/// `p(r) = r^{n-1} V(r)` and `q(r) = c r^{n-1} W(r)`.
#[derive(Debug, Clone, Copy)]
pub struct SelfAdjointForm<'a> {
    pair: &'a BesselPairSpec,
}

pub fn self_adjoint_form(pair: &BesselPairSpec) -> SelfAdjointForm<'_> {
    SelfAdjointForm { pair }
}

impl SelfAdjointForm<'_> {
    pub fn p(&self, r: f64) -> Result<f64, PotentialError> {
        Ok(r.powi(self.pair.n as i32 - 1) * self.pair.v.eval(r)?)
    }

    pub fn q(&self, r: f64) -> Result<f64, PotentialError> {
        Ok(self.pair.coupling * r.powi(self.pair.n as i32 - 1) * self.pair.w.eval(r)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    /// Inner cutoff as a fraction of `R`. The solver may start deeper when
    /// the coefficients are still changing there.
    pub eps_ratio: f64,
    /// Local error tolerance of the integrator.
    pub tol: f64,
    /// Deepest admissible start, in units of `ln(R/r)`.
    pub max_log_span: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { eps_ratio: 1e-8, tol: 1e-10, max_log_span: 1e12 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingReport {
    pub positive_on_interval: bool,
    /// Zeros of the principal solution in `(epsilon_used, R)`.
    pub zero_count: u64,
    pub first_zero: Option<f64>,
    /// `ln(first_zero / R)`, kept because very deep zeros underflow as radii.
    pub first_zero_log_ratio: Option<f64>,
    pub epsilon_used: f64,
    /// `ln(epsilon_used / R)`.
    pub cutoff_log_ratio: f64,
    /// The angle reached a multiple of pi at `R` itself (within tolerance).
    pub endpoint_zero: bool,
    /// Coefficients had settled to constants below the start.
    pub frozen_start: bool,
    /// Those frozen coefficients are oscillatory, so zeros accumulate at 0.
    pub oscillatory_at_origin: bool,
    pub final_angle: f64,
    pub steps: StepStats,
    pub warnings: Vec<String>,
}

fn prufer_rhs(g: f64, h: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c * c + g * s * s + h * s * c
}

/// Angle of the frozen-coefficient principal solution `r^gamma`, or `None`
/// when the indicial roots are complex.
fn principal_angle(g: f64, h: f64) -> Option<f64> {
    let d = h * h - 4.0 * g;
    (d >= 0.0).then(|| {
        let gamma = 0.5 * (-h + d.sqrt());
        1.0_f64.atan2(gamma)
    })
}

struct Integration {
    theta: f64,
    first_cross: Option<f64>,
    stats: StepStats,
}

/// Integrates `dtheta/dtau = f` from `a` to `b`, recording the first time
/// the angle reaches pi.
fn integrate_angle<F: Fn(f64, f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    theta0: f64,
    tol: f64,
    mut first_cross: Option<f64>,
    stats: &mut StepStats,
) -> Result<Integration, ShootError> {
    let mut t = a;
    let mut y = theta0;
    let mut h = 1e-2_f64.min(b - a);
    let pi = std::f64::consts::PI;
    while t < b {
        let h_max = 0.25_f64.max(0.25 * t.abs());
        h = h.min(h_max).min(b - t);
        let (y_new, err) = rk::step(f, t, y, h);
        stats.evaluations += rk::EVALS_PER_STEP;
        let scale = tol * (1.0 + y.abs().max(y_new.abs()));
        let ratio = err / scale;
        if ratio <= 1.0 && y_new.is_finite() {
            if first_cross.is_none() && y < pi && y_new >= pi {
                first_cross = Some(locate_crossing(f, t, y, h, pi, stats));
            }
            t += h;
            y = y_new;
            stats.accepted += 1;
            let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            stats.rejected += 1;
            let shrink = if y_new.is_finite() { (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
            h *= shrink;
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(ShootError::Stiffness { step: h, at: t });
            }
        }
    }
    Ok(Integration { theta: y, first_cross, stats: *stats })
}

fn locate_crossing<F: Fn(f64, f64) -> f64>(f: &F, t: f64, y: f64, h: f64, target: f64, stats: &mut StepStats) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (ym, _) = rk::step(f, t, y, mid);
        stats.evaluations += rk::EVALS_PER_STEP;
        if ym >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    t + 0.5 * (lo + hi)
}

/// Relative change allowed in the discriminant between `tau` and `2 tau`
/// for the coefficients to count as settled.
const FREEZE_TOL: f64 = 1e-6;

fn is_frozen(pair: &BesselPairSpec, tau: f64) -> bool {
    let (g1, h1) = pair.coefficients(tau);
    let (g2, h2) = pair.coefficients(2.0 * tau);
    let d1 = h1 * h1 - 4.0 * g1;
    let d2 = h2 * h2 - 4.0 * g2;
    let floor = 64.0 * f64::EPSILON * (1.0 + 2.0 * tau.abs()) * (h1 * h1 + 4.0 * g1.abs());
    (h1 - h2).abs() <= 1e-8 * (1.0 + h1.abs()) && (d1 - d2).abs() <= FREEZE_TOL * d1.abs() + floor
}

/// Shoots the principal solution from the singular end out to `R` and counts
/// its zeros.
pub fn prufer_shoot(pair: &BesselPairSpec, opts: &ShootOptions) -> Result<ShootingReport, ShootError> {
    if !(opts.eps_ratio > 0.0 && opts.eps_ratio < 0.5) {
        return Err(ShootError::InvalidPair(format!("eps must lie in (0, R/2), got {} R", opts.eps_ratio)));
    }
    if !(opts.tol > 0.0 && opts.tol < 1e-2) {
        return Err(ShootError::InvalidPair(format!("tolerance {} out of range", opts.tol)));
    }
    let pi = std::f64::consts::PI;
    let radius = pair.radius;
    let mut warnings = integral_conditions(pair).warnings();
    let tau_user = opts.eps_ratio.ln();

    if pair.coupling == 0.0 || pair.w.is_identically_zero() {
        return Ok(ShootingReport {
            positive_on_interval: true,
            zero_count: 0,
            first_zero: None,
            first_zero_log_ratio: None,
            epsilon_used: radius * opts.eps_ratio,
            cutoff_log_ratio: tau_user,
            endpoint_zero: false,
            frozen_start: true,
            oscillatory_at_origin: false,
            final_angle: 0.5 * pi,
            steps: StepStats::default(),
            warnings,
        });
    }

    let max_span = opts.max_log_span.max(-tau_user);
    let mut tau0 = tau_user;
    let mut frozen = false;
    loop {
        if is_frozen(pair, tau0) {
            frozen = true;
            break;
        }
        if 2.0 * tau0.abs() > max_span {
            tau0 = -max_span;
            break;
        }
        tau0 *= 2.0;
    }

    let (g0, h0) = pair.coefficients(tau0);
    let mut stats = StepStats::default();
    let rhs = |t: f64, th: f64| {
        let (g, h) = pair.coefficients(t);
        prufer_rhs(g, h, th)
    };

    let mut oscillatory = false;
    let mut start = tau0;
    let (theta_at_tau0, first_cross) = match principal_angle(g0, h0) {
        Some(theta) => (theta, None),
        None if frozen => {
            // Constant oscillatory coefficients below tau0: extend the frozen
            // region far enough to capture at least one zero.
            oscillatory = true;
            let mu = 0.5 * (4.0 * g0 - h0 * h0).sqrt();
            let extension = 1.25 * pi / mu + 1.0;
            start = tau0 - extension;
            let frozen_rhs = |_t: f64, th: f64| prufer_rhs(g0, h0, th);
            let run = integrate_angle(&frozen_rhs, start, tau0, 0.5 * pi, opts.tol, None, &mut stats)?;
            (run.theta, run.first_cross)
        }
        None => (1.0_f64.atan2((-h0).max(0.0)), None),
    };
    if !frozen {
        warnings.push(format!(
            "coefficients still varying at ln(r/R) = {tau0:e}; result depends on the cutoff"
        ));
    }
    let run = integrate_angle(&rhs, tau0, 0.0, theta_at_tau0, opts.tol, first_cross, &mut stats)?;

    let theta = run.theta;
    let delta = 10.0 * opts.tol;
    let j = (theta / pi).floor();
    let (zero_count, endpoint_zero) = if j >= 1.0 && theta - j * pi <= delta {
        (j as u64 - 1, true)
    } else if (j + 1.0) * pi - theta <= delta {
        (j as u64, true)
    } else {
        (j as u64, false)
    };
    let first_zero_log_ratio = if zero_count >= 1 { run.first_cross } else { None };

    Ok(ShootingReport {
        positive_on_interval: zero_count == 0,
        zero_count,
        first_zero: first_zero_log_ratio.map(|t| radius * t.exp()),
        first_zero_log_ratio,
        epsilon_used: radius * start.exp(),
        cutoff_log_ratio: start,
        endpoint_zero,
        frozen_start: frozen,
        oscillatory_at_origin: oscillatory,
        final_angle: theta,
        steps: run.stats,
        warnings,
    })
}

/// Integrability conditions at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralConditions {
    /// `int_0 r^{1-n} / V dr = inf`.
    pub inner_divergent: bool,
    /// `int_0 r^{n-1} V dr < inf`.
    pub weight_integrable: bool,
}

impl IntegralConditions {
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.inner_divergent {
            w.push("integral of r^(1-n)/V converges at 0".to_string());
        }
        if !self.weight_integrable {
            w.push("integral of r^(n-1) V diverges at 0".to_string());
        }
        w
    }
}

/// Checks both conditions from the decay of the integrands in `ln r`.
pub fn integral_conditions(pair: &BesselPairSpec) -> IntegralConditions {
    let n = pair.n as f64;
    let lr = pair.radius.ln();
    let (ta, tb) = (-1e4_f64, -1e5_f64);
    // In tau the integrands are e^{(2-n)x}/V and e^{nx} V.
    let inner = |t: f64| (2.0 - n) * (lr + t) - pair.v.ln_value(lr + t);
    let outer = |t: f64| n * (lr + t) + pair.v.ln_value(lr + t);
    let decades = (tb / ta).ln();
    let inner_divergent = inner(tb) - inner(ta) >= -decades * (1.0 + 1e-9);
    let weight_integrable = outer(tb) - outer(ta) < -1.01 * decades;
    IntegralConditions { inner_divergent, weight_integrable }
}

/// Largest normalized residual `|(p phi')' + q phi| / (1 + |q phi|)` over the
/// grid. Derivatives use flux differences at steps `h = r eps^{1/6}` and
/// `h/2`, combined by Richardson extrapolation; that step balances the
/// `O(eps/h^2)` roundoff against the `O(h^4)` truncation.
pub fn residual<F: Fn(f64) -> f64>(phi: F, pair: &BesselPairSpec, grid: &[f64]) -> Result<f64, PotentialError> {
    let form = self_adjoint_form(pair);
    let flux = |r: f64, h: f64| -> Result<f64, PotentialError> {
        let up = form.p(r + 0.5 * h)? * (phi(r + h) - phi(r));
        let down = form.p(r - 0.5 * h)? * (phi(r) - phi(r - h));
        Ok((up - down) / (h * h))
    };
    let mut worst = 0.0_f64;
    for &r in grid {
        let h = f64::EPSILON.powf(1.0 / 6.0) * r;
        let d = (4.0 * flux(r, 0.5 * h)? - flux(r, h)?) / 3.0;
        let qphi = form.q(r)? * phi(r);
        worst = worst.max((d + qphi).abs() / (1.0 + qphi.abs()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(v: &str, w: &str, n: u32, r: f64, c: f64) -> BesselPairSpec {
        BesselPairSpec::new(v.parse().unwrap(), w.parse().unwrap(), n, r, c).unwrap()
    }

    #[test]
    fn rejects_bad_pairs() {
        let one: RadialPotential = "const:1".parse().unwrap();
        assert!(BesselPairSpec::new(one.clone(), one.clone(), 0, 1.0, 1.0).is_err());
        assert!(BesselPairSpec::new(one.clone(), one.clone(), 2, -1.0, 1.0).is_err());
        assert!(BesselPairSpec::new(one.clone(), one.clone(), 2, 1.0, -1.0).is_err());
        assert!(BesselPairSpec::new("const:0".parse().unwrap(), one.clone(), 2, 1.0, 1.0).is_err());
        let w: RadialPotential = "xlog:k=1,D=0.5".parse().unwrap();
        assert!(BesselPairSpec::new(one, w, 2, 1.0, 1.0).is_err());
    }

    #[test]
    fn hardy_subcritical_is_positive() {
        let r = prufer_shoot(&pair("const:1", "pow:2", 3, 1.0, 0.2), &ShootOptions::default()).unwrap();
        assert!(r.positive_on_interval);
        assert!(r.frozen_start);
        assert_eq!(r.zero_count, 0);
        assert!(r.first_zero.is_none());
    }

    #[test]
    fn hardy_supercritical_oscillates() {
        let r = prufer_shoot(&pair("const:1", "pow:2", 3, 1.0, 0.3), &ShootOptions::default()).unwrap();
        assert!(!r.positive_on_interval);
        assert!(r.oscillatory_at_origin);
        assert!(r.zero_count >= 1);
        let z = r.first_zero_log_ratio.unwrap();
        assert!(z < 0.0 && z >= r.cutoff_log_ratio);
    }

    #[test]
    fn cutoff_does_not_change_verdict() {
        for eps in [1e-4, 1e-6, 1e-8] {
            let opts = ShootOptions { eps_ratio: eps, ..ShootOptions::default() };
            let r = prufer_shoot(&pair("const:1", "pow:2", 3, 1.0, 0.2), &opts).unwrap();
            assert!(r.positive_on_interval);
        }
    }

    #[test]
    fn bessel_first_zero() {
        // J0(sqrt(c) r) has its first zero at j_{0,1} / sqrt(c).
        let j01 = 2.404_825_557_695_773;
        let c = 9.0;
        let r = prufer_shoot(&pair("const:1", "const:1", 2, 1.0, c), &ShootOptions::default()).unwrap();
        assert_eq!(r.zero_count, 1);
        let z = r.first_zero.unwrap();
        assert!((z - j01 / 3.0).abs() < 1e-6 * z, "{z}");
    }

    #[test]
    fn zero_coupling_is_trivially_positive() {
        let r = prufer_shoot(&pair("const:1", "pow:2", 3, 1.0, 0.0), &ShootOptions::default()).unwrap();
        assert!(r.positive_on_interval);
        assert_eq!(r.steps.accepted, 0);
    }

    #[test]
    fn self_adjoint_coefficients() {
        let p = pair("pow:1", "const:2", 3, 1.0, 0.5);
        let f = self_adjoint_form(&p);
        assert!((f.p(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((f.q(0.5).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn integral_conditions_detect_convergence() {
        assert!(integral_conditions(&pair("const:1", "pow:2", 3, 1.0, 0.1)).inner_divergent);
        assert!(integral_conditions(&pair("const:1", "pow:2", 2, 1.0, 0.1)).inner_divergent);
        assert!(!integral_conditions(&pair("const:1", "pow:2", 1, 1.0, 0.1)).inner_divergent);
        assert!(integral_conditions(&pair("const:1", "pow:2", 3, 1.0, 0.1)).weight_integrable);
    }

    #[test]
    fn residual_of_radial_bessel() {
        // sin(r)/r solves y'' + (2/r) y' + y = 0 in dimension 3.
        let p = pair("const:1", "const:1", 3, 3.0, 1.0);
        let grid: Vec<f64> = (1..100).map(|i| 0.03 * i as f64).collect();
        let res = residual(|r: f64| r.sin() / r, &p, &grid).unwrap();
        assert!(res < 1e-8, "{res}");
        let bad = residual(|r: f64| r.cos(), &p, &grid).unwrap();
        assert!(bad > 1e-2);
    }
}
