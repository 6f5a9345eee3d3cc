//! Optimal weights by bisection on the coupling, and the two integral
//! criteria that classify a pair at the origin and at infinity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potentials::{PotentialError, RadialPotential};
use crate::quad::{self, QuadError};
use crate::sturm::{prufer_shoot, BesselPairSpec, ShootError, ShootOptions, ShootingReport};

/// Bracket growth stops here and the weight is reported as infinite.
pub const COUPLING_CAP: f64 = 1_099_511_627_776.0; // 2^40

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("the equation stays positive for every coupling up to {cap}")]
    InfiniteWeight { cap: f64 },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("integral of 1/a diverges at infinity (decay exponent {0})")]
    DivergentTail(f64),
    #[error("criterion needs a grid point with positive a, got {0}")]
    BadGrid(String),
    #[error(transparent)]
    Shoot(#[from] ShootError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEstimate {
    pub lower: f64,
    pub upper: f64,
    pub value: f64,
    pub iterations: u32,
    pub lower_report: ShootingReport,
    pub upper_report: ShootingReport,
}

/// `sup { c >= 0 : the pair equation with coupling c has a positive solution on (0, R) }`.
pub fn weight_pair(
    v: &RadialPotential,
    w: &RadialPotential,
    n: u32,
    radius: f64,
    tol: f64,
) -> Result<WeightEstimate, WeightError> {
    weight_pair_with(v, w, n, radius, tol, &ShootOptions::default())
}

pub fn weight_pair_with(
    v: &RadialPotential,
    w: &RadialPotential,
    n: u32,
    radius: f64,
    tol: f64,
    opts: &ShootOptions,
) -> Result<WeightEstimate, WeightError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(WeightError::BadTolerance(tol));
    }
    let base = BesselPairSpec::new(v.clone(), w.clone(), n, radius, 0.0)?;
    let shoot = |c: f64| -> Result<ShootingReport, WeightError> { Ok(prufer_shoot(&base.with_coupling(c)?, opts)?) };

    let mut iterations = 0;
    let (mut lower, mut lower_report) = (0.0, shoot(0.0)?);
    let mut upper = 1.0;
    let mut upper_report = loop {
        iterations += 1;
        let rep = shoot(upper)?;
        if !rep.positive_on_interval {
            break rep;
        }
        lower = upper;
        lower_report = rep;
        upper *= 2.0;
        if upper > COUPLING_CAP {
            return Err(WeightError::InfiniteWeight { cap: COUPLING_CAP });
        }
    };
    while upper - lower > tol {
        let mid = 0.5 * (lower + upper);
        if mid <= lower || mid >= upper {
            break;
        }
        iterations += 1;
        let rep = shoot(mid)?;
        if rep.positive_on_interval {
            lower = mid;
            lower_report = rep;
        } else {
            upper = mid;
            upper_report = rep;
        }
    }
    Ok(WeightEstimate { lower, upper, value: 0.5 * (lower + upper), iterations, lower_report, upper_report })
}

/// Weight of the pair `(1, W)` in dimension 2, i.e. of `y'' + y'/r + c W y = 0`.
pub fn weight_potential(w: &RadialPotential, radius: f64, tol: f64) -> Result<WeightEstimate, WeightError> {
    weight_potential_with(w, radius, tol, &ShootOptions::default())
}

pub fn weight_potential_with(
    w: &RadialPotential,
    radius: f64,
    tol: f64,
    opts: &ShootOptions,
) -> Result<WeightEstimate, WeightError> {
    let one = RadialPotential::constant(1.0)?;
    weight_pair_with(&one, w, 2, radius, tol, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionClass {
    /// Limit below 1/4: the pair has a positive solution near 0.
    SufficientBelowQuarter,
    /// Limit above 1/4: no positive solution near 0.
    NecessaryFailAboveQuarter,
    Inconclusive,
}

/// Width of the band around 1/4 classified as inconclusive.
pub const QUARTER_MARGIN: f64 = 1e-3;

/// Places a limit relative to 1/4 with the margin [`QUARTER_MARGIN`].
pub fn classify(limit: f64) -> CriterionClass {
    if limit < 0.25 - QUARTER_MARGIN {
        CriterionClass::SufficientBelowQuarter
    } else if limit > 0.25 + QUARTER_MARGIN {
        CriterionClass::NecessaryFailAboveQuarter
    } else {
        CriterionClass::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCriterion {
    pub limit_estimate: f64,
    pub classification: CriterionClass,
    /// `(r, Phi(r))` on the dyadic grid `r = R 2^{-j}`.
    pub samples: Vec<(f64, f64)>,
}

impl ZeroCriterion {
    /// The criterion for `c W`. `Phi` is linear in `W`.
    pub fn with_coupling(mut self, c: f64) -> Self {
        self.limit_estimate *= c;
        self.classification = classify(self.limit_estimate);
        for s in &mut self.samples {
            s.1 *= c;
        }
        self
    }
}

/// Samples of `Phi(r) = r^{2(n-1)} V W (int_r^R t^{1-n}/V dt)^2` near 0.
pub fn criterion_at_zero(
    v: &RadialPotential,
    w: &RadialPotential,
    n: u32,
    radius: f64,
) -> Result<ZeroCriterion, WeightError> {
    const FIRST: i32 = 4;
    const LAST: i32 = 48;
    const AVERAGED: usize = 8;
    let pair = BesselPairSpec::new(v.clone(), w.clone(), n, radius, 1.0)?;
    let nf = n as f64;
    let lr = radius.ln();
    // t = R e^{-s}: int_r^R t^{1-n}/V dt = int_0^{ln(R/r)} (R e^{-s})^{2-n}/V ds
    let integrand = |s: f64| {
        let x = lr - s;
        ((2.0 - nf) * x - pair.v().ln_value(x)).exp()
    };
    let mut samples = Vec::new();
    let mut acc = 0.0;
    let mut s_prev = 0.0;
    for j in FIRST..=LAST {
        let s = j as f64 * std::f64::consts::LN_2;
        acc += quad::integrate(integrand, s_prev, s, 0.0, 1e-13)?;
        s_prev = s;
        if !acc.is_finite() {
            return Err(WeightError::Quadrature(QuadError::NonFinite(radius * (-s).exp())));
        }
        let x = lr - s;
        let ln_phi = 2.0 * (nf - 1.0) * x + pair.v().ln_value(x) + pair.w().ln_value(x) + 2.0 * acc.ln();
        samples.push((radius * (-s).exp(), ln_phi.exp()));
    }
    let tail = &samples[samples.len() - AVERAGED..];
    let limit_estimate = tail.iter().map(|s| s.1).sum::<f64>() / AVERAGED as f64;
    Ok(ZeroCriterion { limit_estimate, classification: classify(limit_estimate), samples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfinityCriterion {
    pub limit: f64,
    /// `(r, a b (int_r^inf 1/a)^2)` on `r = d 2^j`.
    pub samples: Vec<(f64, f64)>,
    /// The last samples disagree by more than 1e-3.
    pub oscillation_warning: bool,
}

/// `lim_{r->inf} a(r) b(r) (int_r^inf 1/a)^2` from dyadic samples with
/// extrapolation.
pub fn criterion_at_infinity<A, B>(a: A, b: B, d: f64) -> Result<InfinityCriterion, WeightError>
where
    A: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    const LAST: i32 = 40;
    if !(d.is_finite() && d > 0.0) {
        return Err(WeightError::BadGrid(format!("start point {d}")));
    }
    let grid: Vec<f64> = (0..=LAST).map(|j| d * 2f64.powi(j)).collect();
    let bvals: Vec<f64> = grid.iter().map(|&r| b(r)).collect();
    if bvals.iter().all(|&x| x == 0.0) {
        return Ok(InfinityCriterion { limit: 0.0, samples: grid.iter().map(|&r| (r, 0.0)).collect(), oscillation_warning: false });
    }
    let inv = |r: f64| 1.0 / a(r);
    for &r in &grid {
        let x = a(r);
        if !(x.is_finite() && x > 0.0) {
            return Err(WeightError::BadGrid(format!("a({r}) = {x}")));
        }
    }
    // Algebraic tail beyond the last grid point: 1/a ~ C r^{-p}.
    let r_last = grid[LAST as usize];
    let p = -(inv(2.0 * r_last) / inv(r_last)).ln() / std::f64::consts::LN_2;
    if !(p > 1.0 + 1e-6) {
        return Err(WeightError::DivergentTail(p));
    }
    let mut tail = r_last * inv(r_last) / (p - 1.0);
    let mut integrals = vec![0.0; grid.len()];
    integrals[LAST as usize] = tail;
    for j in (0..LAST as usize).rev() {
        let (s0, s1) = (grid[j].ln(), grid[j + 1].ln());
        tail += quad::integrate(|s: f64| s.exp() * inv(s.exp()), s0, s1, 0.0, 1e-13)?;
        integrals[j] = tail;
    }
    let samples: Vec<(f64, f64)> = grid
        .iter()
        .zip(&integrals)
        .zip(&bvals)
        .map(|((&r, &i), &bv)| if bv == 0.0 { (r, 0.0) } else { (r, a(r) * bv * i * i) })
        .collect();
    // Use samples a few octaves before the tail approximation dominates.
    let k = LAST as usize - 4;
    let (s1, s2, s3) = (samples[k - 2].1, samples[k - 1].1, samples[k].1);
    let ratio = (s3 - s2) / (s2 - s1);
    let limit = if ratio.is_finite() && ratio.abs() < 0.9 && (s2 - s1) != 0.0 {
        s3 + (s3 - s2) * ratio / (1.0 - ratio)
    } else {
        s3
    };
    let window = &samples[k - 3..=k];
    let hi = window.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = window.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    Ok(InfinityCriterion { limit, samples, oscillation_warning: hi - lo > 1e-3 * (1.0 + limit.abs()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pot(s: &str) -> RadialPotential {
        s.parse().unwrap()
    }

    #[test]
    fn hardy_weight_in_three_dimensions() {
        let est = weight_pair(&pot("const:1"), &pot("pow:2"), 3, 1.0, 1e-7).unwrap();
        assert!((est.value - 0.25).abs() < 1e-6, "{}", est.value);
        assert!(est.lower_report.positive_on_interval);
        assert!(!est.upper_report.positive_on_interval);
    }

    #[test]
    fn bessel_weight_scales_with_radius() {
        let a = weight_potential(&pot("const:1"), 1.0, 1e-8).unwrap().value;
        let b = weight_potential(&pot("const:1"), 2.0, 1e-8).unwrap().value;
        assert!((a - 4.0 * b).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn infinite_weight_for_zero_w() {
        let e = weight_pair(&pot("const:1"), &pot("const:0"), 3, 1.0, 1e-6);
        assert!(matches!(e, Err(WeightError::InfiniteWeight { .. })));
    }

    /// `c r^{-2}` written as a power-weighted potential.
    fn scaled_inverse_square(c: f64) -> RadialPotential {
        RadialPotential::power_weighted(0.5 * c, 0.5 * c, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_criterion_for_hardy_potential() {
        for (c, class) in [(0.2, CriterionClass::SufficientBelowQuarter), (3.0, CriterionClass::NecessaryFailAboveQuarter)] {
            let res = criterion_at_zero(&pot("const:1"), &scaled_inverse_square(c), 5, 1.0).unwrap();
            assert!((res.limit_estimate - c / 9.0).abs() < 1e-4, "{}", res.limit_estimate);
            assert_eq!(res.classification, class);
        }
    }

    #[test]
    fn infinity_criterion_for_power_pairs() {
        let c = 0.7;
        let res = criterion_at_infinity(|r: f64| r.powi(3), |r: f64| c * r, 1.0).unwrap();
        assert!((res.limit - c / 4.0).abs() < 1e-6);
        assert!(!res.oscillation_warning);
    }

    #[test]
    fn infinity_criterion_trivial_and_divergent() {
        let res = criterion_at_infinity(|r: f64| r, |_r: f64| 0.0, 1.0).unwrap();
        assert_eq!(res.limit, 0.0);
        assert!(matches!(criterion_at_infinity(|r: f64| r, |_r: f64| 1.0, 1.0), Err(WeightError::DivergentTail(_))));
    }
}
