use bessel_pairs::cli::{execute, run, Outcome, EXIT_OK, EXIT_OUT_OF_REGIME, EXIT_USAGE};

fn bessel(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bessel").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Outcome {
    let (code, out, err) = bessel(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn weight_of_the_unit_potential() {
    let o = json(&["weight", "--potential", "const:1", "--R", "1", "--tol", "1e-6", "--json"]);
    assert!((o.value.unwrap() - 5.7831859629).abs() < 2e-6);
    let [lo, hi] = o.bracket.unwrap();
    assert!(lo < hi && hi - lo <= 1e-6);
}

#[test]
fn a_nm_case_and_mode() {
    let o = json(&["constant", "a_nm", "--n", "4", "--m", "0", "--json"]);
    assert_eq!(o.value, Some(3.0));
    assert_eq!(o.case_taken, "min{(n-2)^2,n-1}");
    assert_eq!(o.diagnostics["k_min"], 1);
}

#[test]
fn exit_codes() {
    assert_eq!(bessel(&["constant", "a_nm", "--n", "4", "--m", "2"]).0, EXIT_OUT_OF_REGIME);
    assert_eq!(bessel(&["verify", "--suite", ""]).0, EXIT_USAGE);
    assert_eq!(bessel(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(bessel(&["weight", "--potential", "bogus:1"]).0, EXIT_USAGE);
    assert_eq!(bessel(&["constant", "hardy", "--n", "3", "--lambda", "2"]).0, EXIT_OUT_OF_REGIME);
    assert_eq!(bessel(&["--help"]).0, EXIT_OK);
}

#[test]
fn json_queries_rerun_bit_identically() {
    let cases: [&[&str]; 4] = [
        &["weight", "--V", "const:1", "--W", "pow:2", "--n", "5", "--tol", "1e-7", "--json"],
        &["pair-check", "--W", "pow:2", "--n", "3", "--c", "0.2", "--json"],
        &["constant", "beta_nm", "--n", "7", "--m", "-1.5", "--json"],
        &["constant", "bbdgv", "--n", "4", "--alpha", "2", "--beta", "1", "--json"],
    ];
    for args in cases {
        let first = json(args);
        let text = serde_json::to_string(&first).unwrap();
        let parsed: Outcome = serde_json::from_str(&text).unwrap();
        let again = execute(&parsed.query).unwrap();
        assert_eq!(first.value.map(f64::to_bits), again.value.map(f64::to_bits), "{args:?}");
        assert_eq!(first.bracket.map(|b| b.map(f64::to_bits)), again.bracket.map(|b| b.map(f64::to_bits)));
        assert_eq!(first.case_taken, again.case_taken);
    }
}

#[test]
fn pair_check_reports_positivity() {
    let o = json(&["pair-check", "--W", "pow:2", "--n", "3", "--c", "0.2", "--json"]);
    assert_eq!(o.case_taken, "positive");
    let o = json(&["pair-check", "--W", "pow:2", "--n", "3", "--c", "0.3", "--json"]);
    assert_eq!(o.case_taken, "has-zero");
}

#[test]
fn table_is_ordered_and_written_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    let p = path.to_str().unwrap();
    let (code, _, err) = bessel(&["table", "a_nm", "--n-range", "1..6", "--m-range", "-2..1..0.25", "--csv", p]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,m,value,case,k_min"));
    let keys: Vec<(u32, f64)> = lines
        .map(|l| {
            let mut f = l.split(',');
            (f.next().unwrap().parse().unwrap(), f.next().unwrap().parse().unwrap())
        })
        .collect();
    assert!(!keys.is_empty());
    assert!(keys.windows(2).all(|w| w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1)));
}

#[test]
fn table_order_independent_of_thread_count() {
    let args = ["table", "beta_nm", "--n-range", "1..12", "--m-range", "-4..4..0.5", "--json"];
    let a = json(&args);
    std::env::set_var("BESSEL_THREADS", "1");
    let b = json(&args);
    std::env::remove_var("BESSEL_THREADS");
    assert_eq!(a.rows, b.rows);
}

#[test]
fn verify_suites_pass() {
    for suite in ["classical", "appendixB", "rellich", "weights"] {
        let (code, out, _) = bessel(&["verify", "--suite", suite]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(!out.contains("FAIL"), "{out}");
    }
}

#[test]
fn pair_check_criterion_includes_coupling() {
    let o = json(&["pair-check", "--W", "pow:2", "--n", "3", "--c", "0.2", "--json"]);
    let z = &o.diagnostics["criterion_at_zero"];
    assert!((z["limit_estimate"].as_f64().unwrap() - 0.2).abs() < 1e-6);
    assert_eq!(z["classification"], "SufficientBelowQuarter");
}
