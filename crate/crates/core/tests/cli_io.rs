use num_complex::Complex64;
use proptest::prelude::*;

use stefan_core::config::{Q0Preset, SimConfig};
use stefan_core::diagnostics::BootstrapFlags;
use stefan_core::geometry::FourierMode;
use stefan_core::io::{
    coeffs_to_triples, parse_timeseries, timeseries_csv, triples_to_coeffs, Snapshot, TIMESERIES_COLUMNS,
};
use stefan_core::sim::{run_simulation, Simulation};
use stefan_core::StefanError;

fn tiny() -> SimConfig {
    let mut c = SimConfig::default();
    c.geometry.n_theta = 32;
    c.grid.n_r_minus = 12;
    c.grid.n_r_plus = 12;
    c.grid.k_max = 8;
    c.init.q0_preset = Q0Preset::Eigen;
    c.init.q0_scale = 0.01;
    c.init.h0 = vec![FourierMode::cos(2, 1e-3)];
    c.time.dt = 1e-3;
    c.time.t_end = 0.005;
    c.time.diag_every = 1;
    c
}

#[test]
fn empty_document_gives_defaults() {
    let c = SimConfig::from_toml_str("", None).unwrap();
    assert_eq!(c, SimConfig::default());
    assert!(c.validate().is_ok());
}

#[test]
fn toml_values_are_read() {
    let text = r#"
        [geometry]
        n_theta = 64
        [time]
        dt = 0.002
        t_end = 0.01
        [init]
        q0_preset = "eigen"
        h0 = [[2, 0.01, 0.0]]
    "#;
    let c = SimConfig::from_toml_str(text, None).unwrap();
    assert_eq!(c.geometry.n_theta, 64);
    assert_eq!(c.time.dt, 0.002);
    assert_eq!(c.n_steps(), 5);
    assert_eq!(c.init.q0_preset, Q0Preset::Eigen);
    assert_eq!(c.init.h0, vec![FourierMode::cos(2, 0.01)]);
}

#[test]
fn all_problems_are_reported_together() {
    let text = "[time]\ndt = -1.0\nt_endd = 1.0\n[geometry]\nn_theta = 48\n";
    let err = SimConfig::from_toml_str(text, None).unwrap_err();
    assert!(err.messages.len() >= 3, "{err}");
    let all = err.to_string();
    assert!(all.contains("time.t_end"), "{all}");
    assert!(all.contains("time.dt"));
    assert!(all.contains("power of two"));
}

#[test]
fn unknown_section_is_named() {
    let err = SimConfig::from_toml_str("[grdi]\nn_r_minus = 8\n", None).unwrap_err();
    assert!(err.to_string().contains("grid"), "{err}");
    assert!(SimConfig::from_toml_str("[time\n", None).is_err());
}

#[test]
fn missing_config_file_is_an_io_error() {
    let err = SimConfig::from_path(std::path::Path::new("/nonexistent/run.toml")).unwrap_err();
    assert!(matches!(err, StefanError::Io { .. }));
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn config_hash_is_stable_and_sensitive() {
    let a = tiny();
    assert_eq!(a.hash(), tiny().hash());
    assert_eq!(a.hash().len(), 64);
    let mut b = tiny();
    b.time.dt = 2e-3;
    assert_ne!(a.hash(), b.hash());
}

#[test]
fn empty_series_writes_only_the_header() {
    let text = timeseries_csv(&[], 4, false);
    let table = parse_timeseries(&text).unwrap();
    assert!(table.rows.is_empty());
    assert_eq!(table.columns.len(), TIMESERIES_COLUMNS.len() + BootstrapFlags::NAMES.len());
    assert!(text.starts_with("# truncation"));
}

#[test]
fn csv_round_trips_the_series() {
    let out = run_simulation(tiny(), None).unwrap();
    let text = timeseries_csv(&out.series, 4, false);
    let table = parse_timeseries(&text).unwrap();
    assert_eq!(table.rows.len(), out.series.len());
    let t = table.column("t").unwrap();
    let x = table.column("X_minus").unwrap();
    let e = table.column("E_beta_plus").unwrap();
    for (k, r) in out.series.iter().enumerate() {
        assert_eq!(t[k], r.t);
        assert_eq!(x[k], r.x_minus);
        assert_eq!(e[k], r.s.e_beta(stefan_core::grid::Phase::Plus));
        let flags: Vec<bool> = BootstrapFlags::NAMES.iter().map(|n| table.column(n).unwrap()[k] == 1.0).collect();
        assert_eq!(flags, r.flags.values());
    }
    assert!(table.column("no_such_column").is_none());
}

#[test]
fn malformed_csv_is_a_format_error() {
    assert!(matches!(parse_timeseries(""), Err(StefanError::Format(_))));
    assert!(matches!(parse_timeseries("a,b\n1,2,3\n"), Err(StefanError::Format(_))));
    assert!(matches!(parse_timeseries("a,b\n1,x\n"), Err(StefanError::Format(_))));
    let t = parse_timeseries("a,b\nnan,inf\n").unwrap();
    assert!(t.rows[0][0].is_nan() && t.rows[0][1] == f64::INFINITY);
}

#[test]
fn snapshot_json_round_trip_and_schema_check() {
    let mut sim = Simulation::new(tiny()).unwrap();
    sim.step().unwrap();
    let snap = sim.snapshot(None);
    assert_eq!(snap.provenance.config_hash, sim.config.hash());
    let text = snap.to_json().unwrap();
    let back = Snapshot::from_json(&text).unwrap();
    assert_eq!(back.to_json().unwrap(), text);
    assert_eq!(triples_to_coeffs(&back.h).unwrap(), sim.state.h.coeffs);

    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["schema_version"] = 2.into();
    assert!(matches!(Snapshot::from_json(&v.to_string()), Err(StefanError::Format(_))));
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["minus"]["n_r"] = 3.into();
    assert!(matches!(Snapshot::from_json(&v.to_string()), Err(StefanError::Format(_))));
    assert!(Snapshot::from_json("{").is_err());
}

#[test]
fn snapshot_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let snap = Simulation::new(tiny()).unwrap().snapshot(None);
    snap.write(&path).unwrap();
    assert_eq!(Snapshot::read(&path).unwrap(), snap);
    assert!(matches!(Snapshot::read(&dir.path().join("missing.json")), Err(StefanError::Io { .. })));
}

#[test]
fn mislabelled_triples_are_rejected() {
    assert!(triples_to_coeffs(&[[0.0, 1.0, 0.0], [2.0, 0.0, 0.0]]).is_err());
}

proptest! {
    #[test]
    fn triples_round_trip(c in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..20)) {
        let z: Vec<Complex64> = c.iter().map(|(a, b)| Complex64::new(*a, *b)).collect();
        prop_assert_eq!(triples_to_coeffs(&coeffs_to_triples(&z)).unwrap(), z);
    }
}
