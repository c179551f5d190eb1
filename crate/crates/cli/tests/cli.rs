use std::path::Path;
use std::process::{Command, Output};

use arctic_core::io::{domain_frame, read_curve_csv, render_svg};
use arctic_core::scenarios::Model;

fn arctic(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arctic"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn uniform_curve_lies_on_the_circle() {
    let dir = tempfile::tempdir().unwrap();
    let o = arctic(&["curve", "--scenario", "uniform", "--n", "500"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_curve_csv(std::fs::File::open(dir.path().join("curve.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 500);
    for r in &rows {
        assert!(((r.x - 0.5).hypot(r.y - 0.5) - 0.5).abs() < 1e-5);
    }
    // The SVG is a pure function of the CSV.
    let svg = std::fs::read_to_string(dir.path().join("curve.svg")).unwrap();
    let frame = domain_frame(&Model::Uniform);
    assert_eq!(svg, render_svg(&rows, frame.as_deref()));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("curve.json")).unwrap()).unwrap();
    assert!(meta.is_object());
}

#[test]
fn invalid_parameters_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = arctic(&["curve", "--scenario", "two-periodic", "--b", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!dir.path().join("curve.csv").exists());
}

#[test]
fn repeated_fits_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = arctic(&["fit"], d.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let fa = std::fs::read(a.path().join("fit.json")).unwrap();
    let fb = std::fs::read(b.path().join("fit.json")).unwrap();
    assert_eq!(fa, fb);
    let v: serde_json::Value = serde_json::from_slice(&fa).unwrap();
    assert!((v["kappa"].as_f64().unwrap() - 0.15).abs() < 1e-9);
}

#[test]
fn tightened_selftest_fails_and_names_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_arctic"))
        .args(["selftest", "--only", "1"])
        .env("ARCTIC_TOL_CIRCLE", "1e-20")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("1 arctic circle"), "{}", stderr(&o));
    let ok = Command::new(env!("CARGO_BIN_EXE_arctic"))
        .args(["selftest", "--only", "1,2"])
        .output()
        .unwrap();
    assert!(ok.status.success());
}

#[test]
fn height_writes_mesh_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = arctic(&["height", "--scenario", "two-periodic", "--b", "0.5", "--grid", "32x16"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let obj = std::fs::read_to_string(dir.path().join("height.obj")).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("v ")));
    assert!(obj.lines().any(|l| l.starts_with("f ")));
    let csv = std::fs::read_to_string(dir.path().join("height.csv")).unwrap();
    assert!(csv.starts_with("j,k,re_u,im_u,x,y,h,s,t"));
}

#[test]
fn tilted_sweep_reports_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = arctic(&["fit", "--sweep", "0,0.15"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(r.headers().unwrap().iter().next_back(), Some("status"));
    let status: Vec<String> = r.records().map(|x| x.unwrap()[6].to_string()).collect();
    assert_eq!(status.len(), 2);
    assert_eq!(status[0], "ok");
    assert_ne!(status[1], "ok");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "scenario = \"two-periodic\"\n[params]\nb = 0.5\n[sampling]\nn = 200\n",
    )
    .unwrap();
    let o = arctic(&["curve", "--config", cfg.to_str().unwrap(), "--n", "120"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_curve_csv(std::fs::File::open(dir.path().join("curve.csv")).unwrap()).unwrap();
    // Two components, 120 samples each.
    assert_eq!(rows.len(), 240);

    std::fs::write(&cfg, "scenario = \"two-periodic\"\nbogus = 1\n").unwrap();
    let o = arctic(&["curve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
