//! Piecewise closed forms used to cross-check the mode scans.

use super::{mode_value, BOUNDARY_TOL};

/// One branch of the piecewise table for `a_{n,m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub value: f64,
    pub tag: String,
    /// False where the branch hypotheses sit on a boundary or are known to
    /// misdescribe the minimization.
    pub unambiguous: bool,
}

/// Endpoints of the window on which the radial value `((n+2m)/2)^2` is
/// optimal: `(-(n+4) -+ 2 sqrt(n^2-n+1)) / 6`.
pub fn radial_window(n: u32) -> (f64, f64) {
    let nf = n as f64;
    let s = 2.0 * (nf * nf - nf + 1.0).sqrt();
    ((-(nf + 4.0) - s) / 6.0, (-(nf + 4.0) + s) / 6.0)
}

fn near(m: f64, x: f64) -> bool {
    (m - x).abs() <= BOUNDARY_TOL
}

fn radial(n: f64, m: f64) -> f64 {
    ((n + 2.0 * m) / 2.0).powi(2)
}

fn first_mode(n: f64, m: f64) -> f64 {
    mode_value(n - 1.0, m, n)
}

fn c(k: f64, n: f64) -> f64 {
    k * (n + k - 2.0)
}

/// The table branch assigned to `(n, m)`, or `None` when no branch covers it.
pub fn a_nm_table(n: u32, m: f64) -> Option<TableEntry> {
    let nf = n as f64;
    let (w_lo, w_hi) = radial_window(n);
    let critical = (nf - 4.0) / 2.0;
    let top = (nf - 2.0) / 2.0;
    let entry = |value: f64, tag: &str, boundaries: &[f64]| TableEntry {
        value,
        tag: tag.to_string(),
        unambiguous: !boundaries.iter().any(|&b| near(m, b)),
    };

    if n == 1 {
        if near(m, -1.5) {
            // The c_1 = 0 mode makes the critical-line formula degenerate.
            let mut e = entry(radial(nf, m).min(nf - 1.0), "min{(n-2)^2,n-1}", &[]);
            e.unambiguous = false;
            return Some(e);
        }
        if m < -1.5 {
            // The branch assumes both stationary points are negative, which
            // fails for n = 1 there.
            let mut e = entry(radial(nf, m), "n=1:(n+2m)^2/4", &[-1.5]);
            e.unambiguous = false;
            return Some(e);
        }
        if (-7.0 / 6.0..=-0.5).contains(&m) {
            return Some(entry(radial(nf, m), "n=1:(n+2m)^2/4", &[-7.0 / 6.0, -0.5]));
        }
        if m > -1.5 && m < -7.0 / 6.0 {
            let a = (nf - 4.0 - 2.0 * m) * (nf + 2.0 * m) / 4.0;
            let b = ((nf - 4.0 - 2.0 * m) / 2.0).powi(2);
            let v = radial(nf, m).min((a + 2.0).powi(2) / (b + 2.0));
            return Some(entry(v, "n=1:min{(n+2m)^2/4,A(c=2)}", &[-1.5, -7.0 / 6.0]));
        }
        return None;
    }

    if near(m, critical) {
        let mut e = entry(((nf - 2.0) * (nf - 2.0)).min(nf - 1.0), "min{(n-2)^2,n-1}", &[]);
        e.unambiguous = (m - critical).abs() == 0.0;
        return Some(e);
    }
    if m >= w_lo - BOUNDARY_TOL && m <= w_hi + BOUNDARY_TOL {
        return Some(entry(radial(nf, m), "(n+2m)^2/4", &[w_lo, w_hi]));
    }
    if m < w_lo {
        return None;
    }
    let tag1 = "A(k=1)";
    if n <= 3 {
        return (m <= top + BOUNDARY_TOL).then(|| entry(first_mode(nf, m), tag1, &[w_hi, top]));
    }
    if m > critical {
        return (m <= top + BOUNDARY_TOL).then(|| entry(first_mode(nf, m), tag1, &[critical, top]));
    }
    // n >= 4 and w_hi < m < (n-4)/2.
    let k_star = ((3f64.sqrt() / 3.0 - 0.5) * (nf - 2.0)).floor();
    if k_star <= 1.0 {
        return Some(entry(first_mode(nf, m), tag1, &[w_hi, critical]));
    }
    let disc = |k: f64| ((nf - 2.0).powi(2) - 12.0 * c(k, nf)).sqrt();
    let m1 = |k: f64| if k == 0.0 { w_hi } else { (2.0 * (nf - 5.0) - disc(k)) / 6.0 };
    let m2 = |k: f64| if k == 0.0 { critical } else { (2.0 * (nf - 5.0) + disc(k)) / 6.0 };
    let pair = |k: f64| mode_value(c(k, nf), m, nf).min(mode_value(c(k + 1.0, nf), m, nf));
    let mut bounds = vec![w_hi, critical];
    for k in 1..=k_star as u32 {
        bounds.push(m1(k as f64));
        bounds.push(m2(k as f64));
    }
    if (m > m1(0.0) && m <= m1(1.0)) || (m >= m2(1.0) && m < m2(0.0)) {
        return Some(entry(first_mode(nf, m), tag1, &bounds));
    }
    for k in 1..k_star as u32 {
        let kf = k as f64;
        if (m > m1(kf) && m <= m1(kf + 1.0)) || (m >= m2(kf + 1.0) && m < m2(kf)) {
            return Some(entry(pair(kf), &format!("min{{A(k={k}),A(k={})}}", k + 1), &bounds));
        }
    }
    if m > m1(k_star) && m < m2(k_star) {
        let k = k_star as u32;
        return Some(entry(pair(k_star), &format!("min{{A(k={k}),A(k={})}}", k + 1), &bounds));
    }
    None
}

/// Values of the explicit cases for `beta_{n,m}` whose hypotheses hold.
/// Cases two to four are taken literally.
pub fn beta_nm_cases(n: u32, m: f64) -> Vec<(f64, String)> {
    let nf = n as f64;
    let base = ((nf + 2.0 * m) * (nf - 4.0 - 2.0 * m) / 4.0).powi(2);
    let y = (nf + 2.0 * m) * (nf - 2.0 * m - 4.0) / 2.0;
    let term = |ck: f64| ck * (ck + y);
    let threshold = -1.0 - (1.0 + (nf - 1.0).powi(2)).sqrt() / 2.0;
    let mut out = Vec::new();
    if m >= threshold && m <= (nf - 4.0) / 2.0 {
        out.push((base, "case1".to_string()));
    }
    if m >= nf / 2.0 - 3.0 && m <= threshold {
        out.push((base + term(nf - 1.0), "case2".to_string()));
    }
    let x2 = (nf - 2.0 * m - 4.0) / 2.0;
    if x2 >= 0.0 {
        if x2.fract() == 0.0 {
            out.push((base + term(c(x2, nf)), "case3".to_string()));
        } else {
            let k = x2.floor();
            out.push((base + term(c(k, nf)).min(term(c(k + 1.0, nf))), "case4".to_string()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_endpoints() {
        let (lo, hi) = radial_window(8);
        assert!(lo < 0.0 && hi > 0.0);
        assert!(radial_window(3).1 < 0.0);
        assert!(radial_window(5).1 > 0.0);
    }

    #[test]
    fn classical_points() {
        assert_eq!(a_nm_table(4, 0.0).unwrap().value, 3.0);
        assert_eq!(a_nm_table(4, 0.0).unwrap().tag, "min{(n-2)^2,n-1}");
        assert!((a_nm_table(3, 0.0).unwrap().value - 25.0 / 36.0).abs() < 1e-15);
        assert!((a_nm_table(5, 0.0).unwrap().value - 6.25).abs() < 1e-15);
        assert!((a_nm_table(8, 0.0).unwrap().value - 16.0).abs() < 1e-15);
    }

    #[test]
    fn below_window_is_uncovered() {
        let (lo, _) = radial_window(6);
        assert!(a_nm_table(6, lo - 0.5).is_none());
    }

    #[test]
    fn beta_case_one() {
        let v = beta_nm_cases(5, 0.0);
        assert!(v.iter().any(|(x, t)| t == "case1" && (*x - 25.0 / 16.0).abs() < 1e-15));
    }
}
