use bessel_pairs::constants::{self, table::radial_window};
use bessel_pairs::oracle;
use bessel_pairs::potentials::RadialPotential;
use bessel_pairs::special::x_factors;
use bessel_pairs::sturm::{prufer_shoot, BesselPairSpec, ShootOptions};
use proptest::prelude::*;

fn catalog() -> impl Strategy<Value = RadialPotential> {
    prop_oneof![
        (0.1f64..10.0).prop_map(|c| RadialPotential::constant(c).unwrap()),
        (-3.0f64..3.0).prop_map(|a| RadialPotential::power(a).unwrap()),
        (0.1f64..5.0, 0.1f64..5.0, 0.5f64..3.0, -2.0f64..2.0, -1.0f64..1.0)
            .prop_map(|(a, b, al, be, m)| RadialPotential::power_weighted(a, b, al, be, m).unwrap()),
        (1u32..=3, 1.0f64..4.0).prop_map(|(k, s)| {
            let rho = s * bessel_pairs::potentials::exp_tower(k - 1) * 1.5;
            RadialPotential::iterated_log(k, rho).unwrap()
        }),
        (1u32..=4, 1.0f64..3.0).prop_map(|(k, d)| RadialPotential::xlog(k, d).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_derivative_matches_finite_differences(p in catalog(), u in 0.0f64..1.0) {
        let r = p.domain_radius().min(1.0) * 10f64.powf(-6.0 * u) * 0.9;
        let h = r * 1e-6;
        let fd = r * (p.eval(r + h).unwrap() - p.eval(r - h).unwrap()) / (2.0 * h) / p.eval(r).unwrap();
        let exact = p.log_derivative(r).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "fd {fd} exact {exact} at r {r} for {p}");
    }

    #[test]
    fn scaled_consistency(alpha in 0.1f64..10.0, r in 0.01f64..0.5) {
        let inner = RadialPotential::power_weighted(1.0, 2.0, 2.0, -0.5, 0.5).unwrap();
        let scaled = RadialPotential::scaled(alpha, inner.clone()).unwrap();
        let want = alpha * alpha * inner.eval(alpha * r).unwrap();
        let got = scaled.eval(r).unwrap();
        prop_assert!((got - want).abs() <= 1e-13 * want, "{got} vs {want}");
    }

    #[test]
    fn iterated_log_positive(k in 1u32..=4, u in 0.0f64..1.0) {
        let rho = bessel_pairs::potentials::exp_tower(k - 1) * 1.01;
        let p = RadialPotential::iterated_log(k, rho).unwrap();
        let r = p.domain_radius() * 10f64.powf(-12.0 * u);
        let v = p.eval(r).unwrap();
        prop_assert!(v > 0.0 && v.is_finite(), "{v} at {r}");
    }

    #[test]
    fn x_factors_nest(t in 1e-12f64..=1.0) {
        // X_1(s) >= s on (0, 1], so composing climbs towards 1.
        let xs = x_factors(6, t);
        let mut prev = 0.0;
        for x in xs {
            prop_assert!(x > prev && x <= 1.0, "{x} after {prev}");
            prev = x;
        }
    }

    #[test]
    fn potential_display_round_trips(p in catalog()) {
        let back: RadialPotential = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }
}

fn random_pair() -> impl Strategy<Value = (RadialPotential, RadialPotential, u32)> {
    (
        (0.5f64..2.0, 0.1f64..2.0, 0.5f64..2.0, -1.0f64..1.0),
        (0.1f64..2.0, 0.1f64..2.0, 0.5f64..2.0, -1.0f64..1.0, 0.0f64..1.0),
        2u32..=7,
    )
        .prop_map(|((a, b, al, be), (c, d, al2, be2, m), n)| {
            let v = RadialPotential::power_weighted(a, b, al, be, 0.0).unwrap();
            let w = RadialPotential::power_weighted(c, d, al2, be2, m).unwrap();
            (v, w, n)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn zero_count_monotone_in_coupling((v, w, n) in random_pair()) {
        let base = BesselPairSpec::new(v, w, n, 1.0, 0.0).unwrap();
        let opts = ShootOptions::default();
        let mut prev = 0;
        for i in 0..10 {
            let c = 0.25 * 4f64.powi(i) / 16.0;
            let report = prufer_shoot(&base.with_coupling(c).unwrap(), &opts).unwrap();
            prop_assert!(report.zero_count >= prev, "c={c}: {} < {prev}", report.zero_count);
            prev = report.zero_count;
        }
    }
}

proptest! {
    #[test]
    fn a_nm_bounded_by_radial_value(n in 1u32..=12, j in 0u32..200) {
        let m = -3.0 + 0.05 * j as f64;
        prop_assume!(m <= (n as f64 - 2.0) / 2.0);
        let r = constants::a_nm(n, m).unwrap();
        let radial = ((n as f64 + 2.0 * m) / 2.0).powi(2);
        prop_assert!(r.value <= radial * (1.0 + 1e-12) + 1e-12);
        let (lo, hi) = radial_window(n);
        let critical = (n as f64 - 4.0) / 2.0;
        let inside = m > lo + 1e-9 && m < hi - 1e-9 && (m - critical).abs() > 1e-9;
        // For n = 1 the first harmonic is also constant, so the window
        // does not describe where the radial value is attained.
        let outside = n >= 2 && (m < lo - 1e-9 || m > hi + 1e-9) && (m - critical).abs() > 1e-9;
        if inside {
            prop_assert!((r.value - radial).abs() <= 1e-12 * (1.0 + radial));
        }
        if outside {
            prop_assert!(r.value < radial - 1e-12 * (1.0 + radial), "n={n} m={m} {} vs {radial}", r.value);
        }
    }

    #[test]
    fn radial_mode_simplifies(n in 1u32..=12, s in 0.01f64..6.0) {
        let m = (n as f64 - 4.0) / 2.0 - s;
        let got = constants::mode_constant_a(0, m, n).unwrap();
        let want = ((n as f64 + 2.0 * m) / 2.0).powi(2);
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want));
    }

    #[test]
    fn beta_nonnegative_and_below_base(n in 1u32..=12, s in 0.0f64..8.0) {
        let nf = n as f64;
        let m = (nf - 4.0) / 2.0 - s;
        let r = constants::beta_nm(n, m).unwrap();
        let base = ((nf + 2.0 * m) * (nf - 4.0 - 2.0 * m) / 4.0).powi(2);
        prop_assert!(r.value >= -1e-9 * (1.0 + base));
        prop_assert!(r.value <= base * (1.0 + 1e-12) + 1e-12);
    }
}

#[test]
fn rellich_case_one() {
    for n in 5..=12u32 {
        let nf = n as f64;
        let got = constants::beta_nm(n, 0.0).unwrap().value;
        assert!((got - nf * nf * (nf - 4.0).powi(2) / 16.0).abs() < 1e-12 * got);
    }
}

#[test]
fn cn_is_a_nm_at_zero() {
    for n in 3..=12u32 {
        let a = constants::a_nm(n, 0.0).unwrap().value;
        assert!((constants::cn_constant(n).unwrap() - a).abs() < 1e-12 * a, "n={n}");
    }
}

#[test]
fn sigma_identity() {
    for n in 4..=12u32 {
        let nf = n as f64;
        assert!((constants::sigma_nm(n, 0.0, 2.0, 0.25) - (1.0 + nf * (nf - 4.0) / 8.0)).abs() < 1e-12);
    }
}

#[test]
fn cutoff_robustness() {
    let v = RadialPotential::constant(1.0).unwrap();
    let w = RadialPotential::power(2.0).unwrap();
    let pair = BesselPairSpec::new(v, w, 3, 1.0, 0.2).unwrap();
    let verdicts: Vec<bool> = [1e-4, 1e-6, 1e-8]
        .iter()
        .map(|&eps| prufer_shoot(&pair, &ShootOptions { eps_ratio: eps, ..ShootOptions::default() }).unwrap().positive_on_interval)
        .collect();
    assert_eq!(verdicts, vec![true; 3]);
}

#[test]
fn mode_ordering_matches_closed_form() {
    for (n, m) in [(3u32, 0.0), (4, 0.0), (5, 0.0), (6, -1.0)] {
        let est = oracle::discrete_hardy_rellich(n, m, 6, 1.0, 2048).unwrap();
        let closed = (0..=6u64)
            .map(|k| {
                let radial = ((n as f64 + 2.0 * m) / 2.0).powi(2);
                (k, constants::mode_constant_a(k, m, n).unwrap_or(radial))
            })
            .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
        assert_eq!(est.k_min, closed.0, "n={n} m={m} {:?}", est.modes);
    }
}

#[test]
fn oracle_agrees_with_hardy_constants() {
    let v = RadialPotential::constant(1.0).unwrap();
    let w = RadialPotential::power(2.0).unwrap();
    for n in [3u32, 4, 5, 7, 10] {
        let want = constants::hardy_constant(n, 0.0).unwrap();
        let got = oracle::discrete_hardy_quotient(&v, &w, n, 1.0, 4096).unwrap();
        assert!((got - want).abs() / want < 0.02, "n={n} {got}");
    }
}

#[test]
fn oracle_refinement_is_stable() {
    let p = oracle::StudyProblem::Mode { n: 4, m: 0.0, k: 1, radius: 1.0 };
    let a = oracle::convergence_study(&p, &[256, 512, 1024, 2048]).unwrap();
    let b = oracle::convergence_study(&p, &[512, 1024, 2048, 4096]).unwrap();
    assert!((a.extrapolated - b.extrapolated).abs() / b.extrapolated < 0.005);
}
