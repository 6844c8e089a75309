use photon_spinor_web::{polarization_json, scan_csv_text, split_radii_json, MAX_POINTS};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn radii_match_reference() {
    let v = parse(&split_radii_json(1.0, 2.0).unwrap());
    assert!((v["rho_plus"].as_f64().unwrap() - 1.295).abs() < 1e-3);
    assert!((v["rho_minus"].as_f64().unwrap() - 0.783).abs() < 1e-3);
    assert!((v["rho_zero"].as_f64().unwrap() - (2.0 + 3f64.sqrt()) / 4.0).abs() < 1e-12);
}

#[test]
fn radii_errors_are_messages() {
    assert!(split_radii_json(1.0, 1.0).unwrap_err().contains("angular momentum below threshold"));
    assert!(split_radii_json(-1.0, 2.0).is_err());
}

#[test]
fn scan_has_header_and_rows() {
    let csv = scan_csv_text(1.0, 2.0, 0.3, 5.0, 100).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rho,omega_sq_plus,omega_sq_minus"));
    assert_eq!(lines.count(), 100);
    assert_eq!(csv, scan_csv_text(1.0, 2.0, 0.3, 5.0, 100).unwrap());
}

#[test]
fn scan_rejects_bad_ranges() {
    assert!(scan_csv_text(1.0, 2.0, 0.2, 5.0, 10).is_err());
    assert!(scan_csv_text(1.0, 2.0, 0.3, 5.0, MAX_POINTS + 1).is_err());
    assert!(scan_csv_text(0.0, 2.0, 0.3, 5.0, 10).is_err());
}

#[test]
fn polarization_on_and_off_axis() {
    let v = parse(&polarization_json(0.0, 0.0, 2.0).unwrap());
    assert_eq!(v["axis_degenerate"], true);
    assert_eq!(v["e0"], serde_json::json!([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]));
    let v = parse(&polarization_json(1.0, 2.0, 2.0).unwrap());
    assert_eq!(v["omega"].as_f64().unwrap(), 3.0);
    let e3: Vec<f64> = v["linear"][2].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (a, b) in e3.iter().zip([1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!(polarization_json(0.0, 0.0, 0.0).is_err());
}
