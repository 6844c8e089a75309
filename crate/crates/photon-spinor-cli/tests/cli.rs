use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_photon-spinor"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn check_algebra_passes_with_many_identities() {
    let o = run(&["check", "algebra", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = stdout_json(&o);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 12);
    for c in checks {
        assert!(c["deviation"].as_f64().unwrap() < 1e-12, "{c}");
    }
}

#[test]
fn impossible_tolerance_fails_with_first_identity() {
    let o = run(&["check", "all", "--tolerance", "1e-30", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("check failed: algebra/"), "{}", stderr(&o));
}

#[test]
fn config_tolerances_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"seed": 3, "tolerances": {"default": 1e-30}}"#);
    let o = run(&["--config", &cfg, "check", "gravity"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["seed"], 3);
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [("a.json", "{ not json"), ("b.json", r#"{"sed": 1}"#), ("c.json", r#"{"tolerances": {"x": -1}}"#)] {
        let cfg = write(dir.path(), name, body);
        let o = run(&["--config", &cfg, "check", "algebra"]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
        assert!(stderr(&o).contains("config") || stderr(&o).contains("tolerance"), "{}", stderr(&o));
    }
}

#[test]
fn orbit_reports_split_radii() {
    let o = run(&["orbit", "--rs", "1", "--h", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = stdout_json(&o);
    assert!((v["rho_plus"].as_f64().unwrap() - 1.295).abs() < 1e-3);
    assert!((v["rho_minus"].as_f64().unwrap() - 0.783).abs() < 1e-3);
    assert!((v["circular"]["omega_sq_plus"].as_f64().unwrap() - 8.0 / 9.0).abs() < 1e-12);
}

#[test]
fn orbit_radii_double_with_rs() {
    let a = stdout_json(&run(&["orbit", "--rs", "1", "--h", "2"]));
    let b = stdout_json(&run(&["orbit", "--rs", "2", "--h", "2"]));
    for key in ["rho_zero", "rho_plus", "rho_minus", "spin_averaged_radius"] {
        assert_eq!(b[key].as_f64().unwrap(), 2.0 * a[key].as_f64().unwrap(), "{key}");
    }
    assert_eq!(b["classical"]["radius"].as_f64().unwrap(), 2.0 * a["classical"]["radius"].as_f64().unwrap());
}

#[test]
fn orbit_rejects_small_angular_momentum() {
    let o = run(&["orbit", "--h", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("angular momentum below threshold"), "{}", stderr(&o));
    let o = run(&["orbit", "--rs=-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("DomainViolation"));
}

#[test]
fn potential_scan_is_deterministic_csv() {
    let a = run(&["orbit", "--scan-potential", "--points", "50"]);
    assert_eq!(a.status.code(), Some(0));
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    assert!(text.starts_with("rho,omega_sq_plus,omega_sq_minus\n"));
    assert_eq!(text.lines().count(), 51);
    let b = bin().args(["orbit", "--scan-potential", "--points", "50"]).env("PHOTON_SPINOR_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_output_is_identical_across_thread_counts() {
    let args = ["check", "symmetries", "--format", "csv"];
    let one = bin().args(args).env("PHOTON_SPINOR_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("PHOTON_SPINOR_THREADS", "4").output().unwrap();
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    let bad = bin().args(args).env("PHOTON_SPINOR_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn modes_on_the_axis() {
    let v = stdout_json(&run(&["modes", "--k", "0,0,1"]));
    assert_eq!(v["e0"], serde_json::json!([0.0, 0.0, 1.0]));
    assert_eq!(v["axis_degenerate"], true);
    let o = run(&["modes", "--k", "0,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ZeroWaveVector"));
}

#[test]
fn field_synth_writes_binary_and_energy() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = write(dir.path(), "c.json", r#"{"modes":[{"k":[1,0,0],"pol":1,"b":[0.5,0.25]}]}"#);
    let field = dir.path().join("f.bin");
    let o = run(&["field", "synth", "--coeffs", &coeffs, "--out", field.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = stdout_json(&o);
    let (j0, e) = (v["j0"].as_f64().unwrap(), v["mode_energy"].as_f64().unwrap());
    assert!((j0 - e).abs() < 1e-10 * e, "{j0} vs {e}");
    let back = stdout_json(&run(&["field", "observe", "--input", field.to_str().unwrap()]));
    assert_eq!(back["j0"], v["j0"]);

    let bad = write(dir.path(), "bad.json", r#"{"modes":[{"k":[0.3,0,0],"pol":1,"b":[1,0]}]}"#);
    let o = run(&["field", "synth", "--coeffs", &bad, "--out", field.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("IncommensurateMode"));
}

#[test]
fn medium_check_homogeneous_profile() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", r#"{"eps_r": "1", "mu_r": "1"}"#);
    let o = run(&["medium", "check", "--profile", &p]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = stdout_json(&o);
    let checks = v["checks"].as_array().unwrap();
    for name in ["alpha_commutator_term", "chi_eta_term", "sigma_phi_cross_grad_term"] {
        let c = checks.iter().find(|c| c["name"] == name).unwrap();
        assert_eq!(c["deviation"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn medium_errors() {
    let dir = tempfile::tempdir().unwrap();
    let neg = write(dir.path(), "n.json", r#"{"eps_r": "-1", "mu_r": "1"}"#);
    let o = run(&["medium", "check", "--profile", &neg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NonPositiveMedium"));
    let garbled = write(dir.path(), "g.json", r#"{"eps_r": "((", "mu_r": "1"}"#);
    assert_eq!(run(&["medium", "check", "--profile", &garbled]).status.code(), Some(2));
}
