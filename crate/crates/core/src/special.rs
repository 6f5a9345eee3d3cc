//! Reference functions with closed forms or convergent series.

/// `J_0(x)` from its power series. Accurate for `|x| <= 20`.
pub fn bessel_j0(x: f64) -> f64 {
    series(x, 0)
}

/// `J_1(x)` from its power series. Accurate for `|x| <= 20`.
pub fn bessel_j1(x: f64) -> f64 {
    series(x, 1)
}

fn series(x: f64, order: i32) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = (x / 2.0).powi(order);
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k as f64 + order as f64));
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() * 1e-2 {
            break;
        }
    }
    sum
}

/// First positive zero of `J_0`, by Newton iteration from 2.4.
pub fn j0_first_zero() -> f64 {
    let mut x = 2.4;
    for _ in 0..50 {
        let step = bessel_j0(x) / -bessel_j1(x);
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x {
            break;
        }
    }
    x
}

/// `log^{(i)}(rho/r)` for `i = 1..=depth`, innermost first.
fn log_chain(depth: u32, rho: f64, r: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(depth as usize);
    let mut l = (rho / r).ln();
    for _ in 0..depth {
        out.push(l);
        l = l.ln();
    }
    out
}

/// `phi_{k,rho}(r) = (prod_{i<=k} log^{(i)}(rho/r))^{1/2}`, a positive solution
/// of `(r phi')' + r W_{k,rho} phi / 4 = 0`.
pub fn iterated_log_solution(depth: u32, rho: f64, r: f64) -> f64 {
    log_chain(depth, rho, r).iter().product::<f64>().sqrt()
}

/// `X_1(t), ..., X_depth(t)` with `X_1(t) = 1/(1 - ln t)` and
/// `X_{i+1}(t) = X_1(X_i(t))`, for `t` in `(0, 1]`.
pub fn x_factors(depth: u32, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(depth as usize);
    let mut x = t;
    for _ in 0..depth {
        x = 1.0 / (1.0 - x.ln());
        out.push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
    }

    #[test]
    fn first_zero() {
        let z = j0_first_zero();
        assert!((z - 2.404_825_557_695_773).abs() < 1e-14);
        assert!(bessel_j0(z).abs() < 1e-15);
    }

    #[test]
    fn iterated_log_solution_depth_one() {
        let r: f64 = 0.25;
        assert!((iterated_log_solution(1, 1.0, r) - (4f64).ln().sqrt()).abs() < 1e-15);
    }
}
