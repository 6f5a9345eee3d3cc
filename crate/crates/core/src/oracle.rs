//! Discretized Rayleigh quotients, minimized by inertia-count bisection.
//!
//! Radial problems live on a uniform grid in `tau = ln(r/R)` over `[-L, 0]`
//! with `L = sqrt(N)`, so the truncation error `O(1/L^2)` and the stencil
//! error `O((L/N)^2)` both decay like `1/N`.

use serde::Serialize;
use thiserror::Error;

use crate::constants::{self, harmonic_eigenvalue, ConstantError};
use crate::potentials::{PotentialError, RadialPotential};

pub const MIN_GRID: usize = 64;
/// Relative accuracy of the eigenvalue bisection.
const BISECT_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("grid size {0} is below the minimum of 64")]
    GridTooSmall(usize),
    #[error("the mass form vanishes on the whole grid")]
    SingularMass,
    #[error("the stiffness form is not positive definite")]
    IndefiniteStiffness,
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("ill-formed convergence study: {0}")]
    IllFormedStudy(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Constant(#[from] ConstantError),
}

/// Length of the log-radius window used with `n` grid intervals.
pub fn log_span(n: usize) -> f64 {
    (n as f64).sqrt()
}

/// Symmetric banded matrix stored by diagonals: `diag[d][i] = A[i][i+d]`.
#[derive(Debug, Clone)]
struct Banded {
    diag: Vec<Vec<f64>>,
}

impl Banded {
    fn new(size: usize, bandwidth: usize) -> Self {
        Self { diag: (0..=bandwidth).map(|d| vec![0.0; size.saturating_sub(d)]).collect() }
    }

    fn size(&self) -> usize {
        self.diag[0].len()
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.diag[j - i][i] += v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.diag.get(j - i).map_or(0.0, |d| d[i])
    }
}

/// Number of eigenvalues of `K x = mu M x` below `mu`, by the inertia of
/// `K - mu M` from an unpivoted banded `LDL^T`.
fn count_below(k: &Banded, m: &Banded, mu: f64) -> usize {
    let size = k.size();
    let bw = k.diag.len() - 1;
    let shifted = |i: usize, j: usize| k.get(i, j) - mu * m.get(i, j);
    // l[i][d] = L[i][i-d-1]
    let mut l = vec![vec![0.0; bw]; size];
    let mut d = vec![0.0; size];
    let mut neg = 0;
    for i in 0..size {
        for j in i.saturating_sub(bw)..i {
            let mut v = shifted(i, j);
            for p in i.saturating_sub(bw)..j {
                if j - p <= bw {
                    v -= l[i][i - p - 1] * l[j][j - p - 1] * d[p];
                }
            }
            l[i][i - j - 1] = v / d[j];
        }
        let mut v = shifted(i, i);
        for p in i.saturating_sub(bw)..i {
            v -= l[i][i - p - 1].powi(2) * d[p];
        }
        if v == 0.0 {
            v = -f64::EPSILON * (1.0 + shifted(i, i).abs());
        }
        if v < 0.0 {
            neg += 1;
        }
        d[i] = v;
    }
    neg
}

/// Smallest eigenvalue of `K x = mu M x` with `K` positive definite.
fn smallest_eigenvalue(k: &Banded, m: &Banded) -> Result<f64, OracleError> {
    if m.diag.iter().all(|d| d.iter().all(|&x| x == 0.0)) {
        return Err(OracleError::SingularMass);
    }
    if count_below(k, m, 0.0) > 0 {
        return Err(OracleError::IndefiniteStiffness);
    }
    let mut hi = 1.0;
    while count_below(k, m, hi) == 0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(OracleError::SingularMass);
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    while hi - lo > BISECT_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if count_below(k, m, mid) > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_grid(n: usize) -> Result<(), OracleError> {
    if n < MIN_GRID {
        Err(OracleError::GridTooSmall(n))
    } else {
        Ok(())
    }
}

fn check_radius(radius: f64) -> Result<(), OracleError> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(OracleError::BadInput(format!("radius must be positive, got {radius}")))
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        hi
    } else {
        hi + ((a - hi).exp() + (b - hi).exp()).ln()
    }
}

/// Smallest value of `int V u'^2 r^{n-1} dr / int W u^2 r^{n-1} dr` over
/// `u(R) = 0`, free at the inner cutoff.
pub fn discrete_hardy_quotient(
    v: &RadialPotential,
    w: &RadialPotential,
    n: u32,
    radius: f64,
    grid: usize,
) -> Result<f64, OracleError> {
    check_grid(grid)?;
    check_radius(radius)?;
    v.eval(radius)?;
    w.eval(radius)?;
    let span = log_span(grid);
    let h = span / grid as f64;
    let x0 = radius.ln() - span;
    let nf = n as f64;
    // Element weights between nodes j and j+1, and node masses, in log form.
    let ln_k: Vec<f64> = (0..grid)
        .map(|j| {
            let x = x0 + (j as f64 + 0.5) * h;
            v.ln_value(x) + (nf - 2.0) * x - h.ln()
        })
        .collect();
    if ln_k.iter().any(|x| !x.is_finite()) {
        return Err(OracleError::BadInput("V must be positive on the grid".into()));
    }
    let ln_m: Vec<f64> = (0..grid)
        .map(|j| {
            let x = x0 + j as f64 * h;
            let trap = if j == 0 { 0.5 * h } else { h };
            w.ln_value(x) + nf * x + trap.ln()
        })
        .collect();
    // Unknowns u_0..u_{N-1}; u_N = 0. Scale row j by exp(-sigma_j) so the
    // stiffness diagonal is one.
    let sigma: Vec<f64> = (0..grid)
        .map(|j| 0.5 * if j == 0 { ln_k[0] } else { log_sum_exp(ln_k[j - 1], ln_k[j]) })
        .collect();
    let mut k = Banded::new(grid, 1);
    let mut m = Banded::new(grid, 1);
    for j in 0..grid {
        k.add(j, j, 1.0);
        if j + 1 < grid {
            k.add(j, j + 1, -(ln_k[j] - sigma[j] - sigma[j + 1]).exp());
        }
        m.add(j, j, (ln_m[j] - 2.0 * sigma[j]).exp());
    }
    smallest_eigenvalue(&k, &m)
}

/// Smallest value of the mode-`k` quotient of the weighted Hardy-Rellich
/// functional, with `f` clamped at `R` and `f = 0` at the inner cutoff for
/// `k >= 1`.
pub fn discrete_mode_quotient(n: u32, m: f64, k: u64, radius: f64, grid: usize) -> Result<f64, OracleError> {
    check_grid(grid)?;
    check_radius(radius)?;
    let nf = n as f64;
    if !(m.is_finite() && m <= (nf - 2.0) / 2.0) {
        return Err(ConstantError::OutOfRegime(format!("m = {m} exceeds (n-2)/2")).into());
    }
    let c = harmonic_eigenvalue(k, n);
    // In tau, every term carries the weight exp(s tau).
    let s = nf - 2.0 * m - 4.0;
    let p = (nf - 1.0) * (2.0 * m + 1.0) + 2.0 * c;
    let q = c * (c + (nf - 4.0 - 2.0 * m) * (2.0 * m + 2.0));
    let span = log_span(grid);
    let h = span / grid as f64;
    let tau = |j: usize| -span + j as f64 * h;
    // Substituting u_j = exp(-s tau_j / 2) v_j turns the weight into a
    // bounded factor exp(s (tau_row - tau_col) / 2).
    let rel = |row: f64, j: usize| (0.5 * s * (row - tau(j))).exp();
    let add_outer = |mat: &mut Banded, idx: &dyn Fn(usize) -> Option<usize>, coeffs: &[(usize, f64)], weight: f64| {
        for &(a, ca) in coeffs {
            for &(b, cb) in coeffs {
                if let (Some(ia), Some(ib)) = (idx(a), idx(b)) {
                    if ia <= ib {
                        mat.add(ia, ib, weight * ca * cb);
                    }
                }
            }
        }
    };
    if k == 0 {
        // Both forms see only g = f_tau, with g(R) = 0. Solving for g avoids
        // the constant near the cutoff, which is null for both forms.
        let idx = |j: usize| (j < grid).then_some(j);
        let mut num = Banded::new(grid, 1);
        let mut den = Banded::new(grid, 1);
        for j in 0..grid {
            let t = tau(j) + 0.5 * h;
            let (a, b) = (rel(t, j), rel(t, j + 1));
            let row = [(j, (-1.0 / h - 0.5) * a), (j + 1, (1.0 / h - 0.5) * b)];
            add_outer(&mut num, &idx, &row, h);
        }
        for j in 0..=grid {
            let trap = if j == 0 || j == grid { 0.5 * h } else { h };
            add_outer(&mut num, &idx, &[(j, 1.0)], p * trap);
            add_outer(&mut den, &idx, &[(j, 1.0)], trap);
        }
        return smallest_eigenvalue(&num, &den);
    }
    // Unknowns f_1..f_{N-2}; f_0 = 0 at the cutoff, f_{N-1} = f_N = 0 clamps at R.
    let size = grid - 2;
    let idx = |j: usize| (1..=size).contains(&j).then(|| j - 1);
    let mut num = Banded::new(size, 2);
    let mut den = Banded::new(size, 1);
    // (f_tautau - f_tau)^2 at interior nodes.
    for j in 1..grid {
        let t = tau(j);
        let row = [
            (j - 1, (1.0 / (h * h) + 0.5 / h) * rel(t, j - 1)),
            (j, -2.0 / (h * h)),
            (j + 1, (1.0 / (h * h) - 0.5 / h) * rel(t, j + 1)),
        ];
        add_outer(&mut num, &idx, &row, h);
    }
    // f_tau^2 on elements, f^2 at nodes.
    for j in 0..grid {
        let t = tau(j) + 0.5 * h;
        let row = [(j, -rel(t, j) / h), (j + 1, rel(t, j + 1) / h)];
        add_outer(&mut num, &idx, &row, p * h);
        add_outer(&mut den, &idx, &row, h);
    }
    for j in 0..=grid {
        let trap = if j == 0 || j == grid { 0.5 * h } else { h };
        add_outer(&mut num, &idx, &[(j, 1.0)], q * trap);
        add_outer(&mut den, &idx, &[(j, 1.0)], c * trap);
    }
    smallest_eigenvalue(&num, &den)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyRellichEstimate {
    pub value: f64,
    pub k_min: u64,
    pub modes: Vec<(u64, f64)>,
}

/// Minimum of the discrete mode quotients over `k <= k_max`.
pub fn discrete_hardy_rellich(n: u32, m: f64, k_max: u64, radius: f64, grid: usize) -> Result<HardyRellichEstimate, OracleError> {
    let modes = (0..=k_max)
        .map(|k| discrete_mode_quotient(n, m, k, radius, grid).map(|v| (k, v)))
        .collect::<Result<Vec<_>, _>>()?;
    let (k_min, value) = modes.iter().copied().fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
    Ok(HardyRellichEstimate { value, k_min, modes })
}

/// A mode cutoff covering the closed-form scan: its minimizer plus two.
pub fn default_mode_cutoff(n: u32, m: f64) -> Result<u64, OracleError> {
    Ok(constants::a_nm(n, m)?.k_min.unwrap_or(0) + 2)
}

/// Smallest Dirichlet eigenvalue of `-u''` on `[0, R]`, a flat sanity check.
pub fn discrete_flat_membrane(radius: f64, grid: usize) -> Result<f64, OracleError> {
    check_grid(grid)?;
    check_radius(radius)?;
    let h = radius / grid as f64;
    let size = grid - 1;
    let mut k = Banded::new(size, 1);
    let mut m = Banded::new(size, 1);
    for i in 0..size {
        k.add(i, i, 2.0 / h);
        if i + 1 < size {
            k.add(i, i + 1, -1.0 / h);
        }
        m.add(i, i, h);
    }
    smallest_eigenvalue(&k, &m)
}

#[derive(Debug, Clone)]
pub enum StudyProblem {
    Hardy { v: RadialPotential, w: RadialPotential, n: u32, radius: f64 },
    Mode { n: u32, m: f64, k: u64, radius: f64 },
    FlatMembrane { radius: f64 },
}

impl StudyProblem {
    pub fn solve(&self, grid: usize) -> Result<f64, OracleError> {
        match self {
            Self::Hardy { v, w, n, radius } => discrete_hardy_quotient(v, w, *n, *radius, grid),
            Self::Mode { n, m, k, radius } => discrete_mode_quotient(*n, *m, *k, *radius, grid),
            Self::FlatMembrane { radius } => discrete_flat_membrane(*radius, grid),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub samples: Vec<(usize, f64)>,
    pub extrapolated: f64,
    pub observed_order: Option<f64>,
}

/// Solves at each grid size and Richardson-extrapolates from the last three
/// samples. The order in `1/N` is estimated from them and falls back to one
/// when the estimate is unusable.
pub fn convergence_study(problem: &StudyProblem, grids: &[usize]) -> Result<ConvergenceStudy, OracleError> {
    if grids.len() < 3 {
        return Err(OracleError::IllFormedStudy("needs at least three grid sizes".into()));
    }
    if grids.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OracleError::IllFormedStudy("grid sizes must be strictly increasing".into()));
    }
    let samples = grids
        .iter()
        .map(|&g| problem.solve(g).map(|v| (g, v)))
        .collect::<Result<Vec<_>, _>>()?;
    let [(n1, v1), (n2, v2), (n3, v3)] = samples[samples.len() - 3..] else { unreachable!() };
    let ratio = |a: usize, b: usize| b as f64 / a as f64;
    let order = {
        let (d1, d2) = (v1 - v2, v2 - v3);
        let same_ratio = (ratio(n1, n2) - ratio(n2, n3)).abs() < 1e-12;
        (same_ratio && d1 != 0.0 && d2 != 0.0 && d1.signum() == d2.signum())
            .then(|| (d1 / d2).ln() / ratio(n2, n3).ln())
            .filter(|p| (0.5..=4.0).contains(p))
    };
    let p = order.unwrap_or(1.0);
    let extrapolated = v3 + (v3 - v2) / (ratio(n2, n3).powf(p) - 1.0);
    Ok(ConvergenceStudy { samples, extrapolated, observed_order: order })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inverse_square() -> RadialPotential {
        RadialPotential::power(2.0).unwrap()
    }

    fn one() -> RadialPotential {
        RadialPotential::constant(1.0).unwrap()
    }

    #[test]
    fn hardy_quotient_matches_closed_form() {
        for (n, want) in [(3, 0.25), (5, 2.25)] {
            let got = discrete_hardy_quotient(&one(), &inverse_square(), n, 1.0, 4096).unwrap();
            assert!((got - want).abs() / want < 0.02, "n={n} got={got}");
            assert!(got >= want, "truncation should bias upward");
        }
    }

    #[test]
    fn hardy_quotient_scale_invariant() {
        let w1 = RadialPotential::power_weighted(1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let w7 = RadialPotential::power_weighted(7.0, 7.0, 2.0, 1.0, 1.0).unwrap();
        let v7 = RadialPotential::constant(7.0).unwrap();
        let a = discrete_hardy_quotient(&one(), &w1, 4, 1.0, 256).unwrap();
        let b = discrete_hardy_quotient(&v7, &w7, 4, 1.0, 256).unwrap();
        assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
    }

    #[test]
    fn hardy_quotient_rejects_bad_input() {
        let zero = RadialPotential::constant(0.0).unwrap();
        assert_eq!(discrete_hardy_quotient(&one(), &zero, 3, 1.0, 128), Err(OracleError::SingularMass));
        assert_eq!(discrete_hardy_quotient(&one(), &inverse_square(), 3, 1.0, 32), Err(OracleError::GridTooSmall(32)));
    }

    #[test]
    fn mode_quotients_match_constants() {
        for (n, k, want) in [(4, 1, 3.0), (3, 1, 25.0 / 36.0), (5, 0, 6.25)] {
            let got = discrete_mode_quotient(n, 0.0, k, 1.0, 4096).unwrap();
            assert!((got - want).abs() / want < 0.03, "n={n} k={k} got={got}");
        }
    }

    #[test]
    fn hardy_rellich_argmin() {
        for (n, k) in [(3, 1), (4, 1), (5, 0)] {
            let est = discrete_hardy_rellich(n, 0.0, 4, 1.0, 1024).unwrap();
            assert_eq!(est.k_min, k, "n={n} modes={:?}", est.modes);
        }
    }

    #[test]
    fn flat_membrane_converges() {
        let study = convergence_study(&StudyProblem::FlatMembrane { radius: 1.0 }, &[64, 128, 256, 512]).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((study.extrapolated - pi2).abs() / pi2 < 1e-4);
        assert!((study.observed_order.unwrap() - 2.0).abs() < 0.1);
    }

    #[test]
    fn study_rejects_bad_grids() {
        let p = StudyProblem::FlatMembrane { radius: 1.0 };
        assert!(matches!(convergence_study(&p, &[128, 128, 128]), Err(OracleError::IllFormedStudy(_))));
        assert!(matches!(convergence_study(&p, &[64, 128]), Err(OracleError::IllFormedStudy(_))));
    }

    #[test]
    fn banded_inertia_counts() {
        // diag(1, 2, 3) against the identity.
        let mut k = Banded::new(3, 2);
        let mut m = Banded::new(3, 1);
        for i in 0..3 {
            k.add(i, i, (i + 1) as f64);
            m.add(i, i, 1.0);
        }
        assert_eq!(count_below(&k, &m, 0.5), 0);
        assert_eq!(count_below(&k, &m, 2.5), 2);
        assert_eq!(count_below(&k, &m, 3.5), 3);
    }
}
