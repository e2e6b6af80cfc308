use std::path::Path;
use std::process::{Command, Output};

fn stefan2p(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stefan2p"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("spawn stefan2p")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"
[geometry]
n_theta = 32

[grid]
n_r_minus = 16
n_r_plus = 16
k_max = 8

[time]
dt = 1e-3
t_end = 0.004
diag_every = 2

[init]
h0 = [[2, 0.001, 0.0]]
q0_preset = "eigen"
q0_scale = 0.01

[run]
label = "cli-small"
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn disc_eigen_oracle_is_the_squared_bessel_zero() {
    let o = stefan2p(&["oracle", "eigen", "--radius", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let value: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    // j_{0,1} = 2.404825557695773
    assert!((value - 5.783185962946784).abs() < 1e-12, "{value}");
}

#[test]
fn annulus_harmonic_oracle_k0_is_logarithmic() {
    let o = stefan2p(&["oracle", "harmonic", "--k", "0", "--inner", "1", "--outer", "0", "--points", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        let exact = 1.0 - r[0].ln() / 2f64.ln();
        assert!((r[1] - exact).abs() < 1e-14);
    }
}

#[test]
fn radial_oracle_melts_inward() {
    let o = stefan2p(&["oracle", "radial", "--cells", "32", "--samples", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# refinement_error="));
    let fronts: Vec<f64> = text.lines().skip(2).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(fronts.len(), 5);
    assert!(fronts.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn run_writes_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let mut csv = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = stefan2p(&["run", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("cli-small: 4 steps"));
        assert!(out.join("summary.json").exists());
        assert!(out.join("snapshots").join("snap_0000000.json").exists());
        assert!(out.join("snapshots").join("snap_0000004.json").exists());
        csv.push(std::fs::read(out.join("timeseries.csv")).unwrap());
    }
    assert_eq!(csv[0], csv[1]);
}

#[test]
fn diag_reproduces_the_run_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out = dir.path().join("out");
    assert!(stefan2p(&["run", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let snaps = out.join("snapshots");
    let first = snaps.join("snap_0000000.json");
    let last = snaps.join("snap_0000004.json");
    let o = stefan2p(&["diag", last.to_str().unwrap(), first.to_str().unwrap(), "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let diag = stdout(&o);
    let run = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    let run_lines: Vec<&str> = run.lines().collect();
    let diag_lines: Vec<&str> = diag.lines().collect();
    assert_eq!(diag_lines.len(), 4);
    // header, first row and final row; sorted by time regardless of argument order
    assert_eq!(diag_lines[1], run_lines[1]);
    assert_eq!(diag_lines[2], run_lines[2]);
    // running sups, integrals and flags depend on the reporting cadence
    let instantaneous = |l: &str| {
        let cols: Vec<&str> = l.split(',').collect();
        [&cols[..13], &cols[21..29]].concat().join(",")
    };
    assert_eq!(instantaneous(diag_lines[3]), instantaneous(run_lines.last().unwrap()));
}

#[test]
fn check_reports_admissible_eigen_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let o = stefan2p(&["check", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["admissibility"]["admissible"], serde_json::Value::Bool(true));
    assert!(v["eigenvalues"]["annulus_mixed"].as_f64().unwrap() < v["eigenvalues"]["annulus_dirichlet"].as_f64().unwrap());
}

#[test]
fn unknown_key_exits_2_with_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[time]\nd_t = 0.001\n");
    let o = stefan2p(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("d_t") && err.contains("dt"), "{err}");
}

#[test]
fn range_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[time]\ndt = 0.0\n");
    let o = stefan2p(&["check", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dt"));
}

#[test]
fn eta_above_the_first_eigenvalue_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[analysis]\neta = 6.0\n");
    let cfg = write(dir.path(), "c.toml", &text);
    let o = stefan2p(&["check", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("small constant"), "{}", stderr(&o));
}

#[test]
fn missing_files_exit_4() {
    assert_eq!(stefan2p(&["run", "/nonexistent/config.toml"]).status.code(), Some(4));
    assert_eq!(stefan2p(&["diag", "/nonexistent/snap.json"]).status.code(), Some(4));
}

#[test]
fn unknown_snapshot_schema_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let snap = write(dir.path(), "s.json", r#"{"schema_version": 99}"#);
    let o = stefan2p(&["diag", &snap]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("schema_version"));
}

#[test]
fn shipped_configs_pass_check() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let o = stefan2p(&["check", path.to_str().unwrap()]);
            assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
            n += 1;
        }
    }
    assert!(n >= 3);
}
