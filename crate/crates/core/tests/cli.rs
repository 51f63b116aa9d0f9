use std::path::Path;
use std::process::{Command, Output};

fn nodalgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodalgeom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_line(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().last().expect("one line of output");
    serde_json::from_str(line).expect("valid JSON")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.conf");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

const SQUARE: &str = "name = sq\ndomain = rectangle\ndims = pi, pi\nmodes = 2..5\nresolution = 16\n\
                      resolution_per_mode = true\nradii = 2, 3\nmax_centers = 16\ndoubling = false\n";

#[test]
fn sweep_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SQUARE);
    let out = dir.path().join("out");
    let out_s = out.display().to_string();
    let run = nodalgeom(&["--config", &cfg, "--out", &out_s, "--jobs", "1", "sweep"]);
    let v = json_line(&run);
    assert_eq!(v["command"], "sweep");
    assert_eq!(v["rows"], 4);
    assert_eq!(
        run.status.code(),
        Some(if v["failures"] == 0 { 0 } else { 2 })
    );
    let csv = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .find(|e| e.path().extension().is_some_and(|x| x == "csv"));
    let first = std::fs::read(csv.unwrap().path()).unwrap();
    assert_eq!(first.iter().filter(|&&b| b == b'\n').count(), 5);

    let rep = nodalgeom(&["--out", &out_s, "report"]);
    let v = json_line(&rep);
    assert_eq!(v["command"], "report");
    assert!(out.join("report/report.md").exists());
}

#[test]
fn seed_flag_changes_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SQUARE);
    let out = dir.path().display().to_string();
    for seed in ["0", "3"] {
        nodalgeom(&["--config", &cfg, "--out", &out, "--seed", seed, "sweep"]);
    }
    let json = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "json")
        })
        .count();
    assert_eq!(json, 2);
}

#[test]
fn nodal_and_scan_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SQUARE);
    let out = dir.path().display().to_string();
    let v = json_line(&nodalgeom(&[
        "--config", &cfg, "--out", &out, "nodal", "--row", "1",
    ]));
    assert_eq!(v["components"], 9);
    assert!(Path::new(v["file"].as_str().unwrap()).exists());
    let s = nodalgeom(&["--config", &cfg, "--out", &out, "scan", "--row", "0"]);
    let v = json_line(&s);
    assert_eq!(v["command"], "scan");
    assert!(v["summary"]["probes"].as_u64().unwrap() > 0);
    let v = json_line(&nodalgeom(&["--config", &cfg, "inradius"]));
    assert!((v["exponent"].as_f64().unwrap() + 0.5).abs() < 0.05);
}

#[test]
fn capacity_check_and_errors() {
    let ok = nodalgeom(&[
        "capacity", "--dim", "2", "--cells", "256", "--inner", "0.25",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json_line(&ok)["passed"], true);
    let strict = nodalgeom(&[
        "capacity", "--dim", "2", "--cells", "16", "--inner", "0.25", "--tol", "1e-6",
    ]);
    assert_eq!(strict.status.code(), Some(2));
    let bad = nodalgeom(&["capacity", "--dim", "4"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));
    let missing = nodalgeom(&["sweep"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn underresolved_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "dims = pi, pi\nmodes = 16:16\nresolution = 32\n",
    );
    let out = dir.path().join("o").display().to_string();
    let r = nodalgeom(&["--config", &cfg, "--out", &out, "sweep"]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn solve_reports_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "dims = pi, pi\nsource = eigensolve\neigen = 1..3\nresolution = 32\n",
    );
    let out = dir.path().display().to_string();
    let v = json_line(&nodalgeom(&["--config", &cfg, "--out", &out, "solve"]));
    let e = v["eigenvalues"].as_array().unwrap();
    assert_eq!(e.len(), 3);
    assert!((e[0].as_f64().unwrap() - 2.0).abs() < 0.01);
}
