use std::process::Command;

fn patsvd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_patsvd"))
}

fn small_config(dir: &std::path::Path) -> std::path::PathBuf {
    let mut c = patsvd_lab::RunConfig::desk_scale();
    c.radial_cells = 96;
    c.modes = patsvd_core::modal::ModeSelection::Count(24);
    c.time.horizon = patsvd_lab::Horizon::Fixed(40.0);
    c.data = patsvd_lab::DataSource::Spectral;
    c.output = dir.join("run");
    let path = dir.join("config.json");
    std::fs::write(&path, c.to_json().unwrap()).unwrap();
    path
}

#[test]
fn modes_writes_a_readable_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.bin");
    let status = patsvd()
        .args(["modes", "--profile", "const:1", "--modes", "rect:1:2", "--radial-cells", "64", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let modes = patsvd_core::io::load_modes(&out).unwrap();
    assert_eq!(modes.len(), 4);
    assert!(modes[0].mu.abs() < 1e-8);
}

#[test]
fn bad_mode_selection_is_a_usage_error() {
    let out = patsvd().args(["gram", "--modes", "rect:1"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rect:L:K"));
}

#[test]
fn validate_reports_and_sets_exit_code() {
    let out = patsvd().args(["validate", "classify"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("[PASS]"));
    let out = patsvd().args(["validate", "bogus"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn forward_then_reconstruct_then_export() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let status = patsvd().arg("forward").arg("--config").arg(&cfg).arg("--csv").status().unwrap();
    assert!(status.success());
    let run = dir.path().join("run");
    assert!(run.join("trace.bin").exists());
    let csv = std::fs::read_to_string(run.join("trace.csv")).unwrap();
    assert!(csv.starts_with("theta_index,time_index,value"));

    let status = patsvd()
        .args(["reconstruct", "--method", "lsq", "--config"])
        .arg(&cfg)
        .arg("--trace")
        .arg(run.join("trace.csv"))
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    assert!(report["residual"].as_f64().unwrap() < 1e-6);

    let image = dir.path().join("r.pgm");
    let status = patsvd()
        .arg("export")
        .arg(run.join("reconstruction.grid"))
        .args(["--size", "32", "--out"])
        .arg(&image)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(std::fs::read(&image).unwrap().starts_with(b"P5\n32 32\n65535\n"));
}

#[test]
fn pipeline_dry_run_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = patsvd()
        .args(["pipeline", "--dry-run", "--horizon", "auto", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("modes:"), "{text}");
    assert!(!dir.path().join("run").exists());

    let elsewhere = dir.path().join("elsewhere");
    let status = patsvd()
        .env("PATSVD_THREADS", "2")
        .args(["pipeline", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&elsewhere)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(elsewhere.join("manifest.json").exists());
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    v["colour"] = "blue".into();
    std::fs::write(&cfg, v.to_string()).unwrap();
    let out = patsvd().args(["pipeline", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}
