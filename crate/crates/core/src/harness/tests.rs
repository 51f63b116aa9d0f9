use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::error::Error;

fn square_sweep(dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "# separable modes on the square\n\
         name = square\n\
         domain = rectangle\n\
         dims = pi, pi\n\
         modes = 2..10\n\
         resolution = 16\n\
         resolution_per_mode = true\n\
         radii = 2, 3\n\
         max_centers = 16\n\
         doubling = false\n\
         output = {}\n",
        dir.display()
    ))
    .unwrap()
}

#[test]
fn numbers_with_pi() {
    assert_eq!(parse_real("pi").unwrap(), PI);
    assert_eq!(parse_real("2pi").unwrap(), 2.0 * PI);
    assert_eq!(parse_real("2 * pi").unwrap(), 2.0 * PI);
    assert_eq!(parse_real("pi/2").unwrap(), PI / 2.0);
    assert_eq!(parse_real("-1.5e-1").unwrap(), -0.15);
    assert!(matches!(parse_real("tau"), Err(Error::Config(_))));
}

#[test]
fn config_rejects_bad_input() {
    assert!(matches!(
        ExperimentConfig::parse("domain = rectangle\ndims = 1,1\nfoo = 3\n"),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        ExperimentConfig::parse("seed = 1\nseed = 2\n"),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        ExperimentConfig::parse("domain = torus\n"),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        ExperimentConfig::parse("just a line\n"),
        Err(Error::Config(_))
    ));
}

#[test]
fn explicit_modes_and_hash() {
    let a = ExperimentConfig::parse("dims = pi, pi\nmodes = 3:2, 1:1\n").unwrap();
    assert_eq!(a.modes, vec![vec![3, 2], vec![1, 1]]);
    assert_eq!(a.expected_lambda(0).unwrap(), 13.0);
    let mut b = a.clone();
    b.output = "elsewhere".into();
    assert_eq!(a.hash(), b.hash());
    b.seed = 7;
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 16);
}

#[test]
fn underresolved_sweep_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig::parse(&format!(
        "dims = pi, pi\nmodes = 16:16\nresolution = 32\noutput = {}\n",
        dir.path().display()
    ))
    .unwrap();
    assert!(matches!(run_sweep(&c, 1), Err(Error::Config(_))));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn square_sweep_rows_and_rerun_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let c = square_sweep(dir.path());
    let t = run_sweep(&c, 2).unwrap();
    assert_eq!(t.rows.len(), 9);
    for (r, m) in t.rows.iter().zip(2..) {
        assert!((r.lambda - 2.0 * (m * m) as f64).abs() < 1e-9);
        assert_eq!(r.components, (m * m) as usize);
        assert_eq!(r.mode, format!("{m}:{m}"));
    }
    let (csv, json) = store_paths(&c);
    let first = (std::fs::read(&csv).unwrap(), std::fs::read(&json).unwrap());
    let header = String::from_utf8(first.0.clone()).unwrap();
    assert!(header.starts_with(&CSV_COLUMNS.join(",")));
    // A rerun reuses the stored rows; a fresh run recomputes them.
    run_sweep(&c, 1).unwrap();
    assert_eq!(
        first,
        (std::fs::read(&csv).unwrap(), std::fs::read(&json).unwrap())
    );
    std::fs::remove_file(&json).unwrap();
    run_sweep(&c, 1).unwrap();
    assert_eq!(
        first,
        (std::fs::read(&csv).unwrap(), std::fs::read(&json).unwrap())
    );

    let report = emit_report(&load_store(dir.path()).unwrap(), &dir.path().join("report")).unwrap();
    let slope = report
        .checks
        .iter()
        .find(|c| c.name == "inradius exponent")
        .unwrap();
    assert!(slope.passed, "{}", slope.detail);
    let md = std::fs::read_to_string(dir.path().join("report/report.md")).unwrap();
    assert!(md.contains("fitted slope -0.5"));
    assert!(report.files.iter().all(|f| f.exists()));
}

#[test]
fn empty_store_has_nothing_to_report() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        emit_report(&[], dir.path()),
        Err(Error::NothingToReport)
    ));
}

#[test]
fn cube_sweep_reports_slack_table() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig::parse(&format!(
        "name = cubes\ndomain = torus\ndims = 2pi, 2pi, 2pi\nmodes = 1..2\nresolution = 24\nresolution_per_mode = true\n\
         radii = 2, 3\nmax_centers = 16\ndoubling = false\ncapacity_checks = true\ncapacity_components = 1\noutput = {}\n",
        dir.path().display()
    ))
    .unwrap();
    let t = run_sweep(&c, 1).unwrap();
    for r in &t.rows {
        let id = r.identity_min.unwrap() / cube_identity();
        assert!((id - 1.0).abs() < 0.03, "{id}");
        assert!(r.slack_min.unwrap() > 0.0);
    }
    let report = emit_report(&[t], dir.path()).unwrap();
    let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(md.contains("### Asymmetry constant and first eigenvalue"));
    assert!(md.contains("| mode | alpha | slack min | slack max |"));
    assert!(report.checks.iter().any(|c| c.name == "box identity"));
}

#[test]
fn power_law_fits() {
    let pts: Vec<(f64, f64)> = [2.0, 8.0, 18.0, 50.0]
        .iter()
        .map(|&l: &f64| (l, 3.0 / l.sqrt()))
        .collect();
    let f = fit_power_law(&pts).unwrap();
    assert!((f.exponent + 0.5).abs() < 1e-12);
    assert!((f.coefficient - 3.0).abs() < 1e-12);
    assert!((f.r_squared - 1.0).abs() < 1e-12);
    let flat = fit_power_law(&[(1.0, 0.7), (2.0, 0.7), (5.0, 0.7)]).unwrap();
    assert_eq!(flat.exponent, 0.0);
    assert!(matches!(
        fit_power_law(&pts[..2]),
        Err(Error::InsufficientData(2))
    ));
    assert!(matches!(
        fit_power_law(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]),
        Err(Error::LogDomain(_))
    ));
}

#[test]
fn band_check() {
    assert!(within_band(&[1.0, 0.6, 1.5, 0.8], 2.0));
    assert!(!within_band(&[1.0, 1.5, 0.7], 2.0));
}

proptest! {
    #[test]
    fn fit_is_scale_invariant(
        pts in prop::collection::vec((0.5f64..500.0, 0.01f64..10.0), 3..12),
        c in 0.01f64..100.0,
    ) {
        prop_assume!(pts.iter().any(|p| (p.0 / pts[0].0 - 1.0).abs() > 1e-3));
        let a = fit_power_law(&pts).unwrap();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, c * y)).collect();
        let b = fit_power_law(&scaled).unwrap();
        prop_assert!((a.exponent - b.exponent).abs() < 1e-9 * (1.0 + a.exponent.abs()));
        prop_assert!((b.coefficient / (c * a.coefficient) - 1.0).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&a.r_squared));
    }
}
