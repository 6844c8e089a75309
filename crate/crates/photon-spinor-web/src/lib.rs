//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! The plain functions return `Result<String, String>` so they can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert the error side.

use photon_spinor::gravity::{helicity_split_radii, potential_scan, scan_csv};
use photon_spinor::polarization::{circular_basis, rotation_phase, WaveVector};
use photon_spinor::report::{complex_vec_json, to_json_string};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Upper bound on scan samples, keeps the page responsive.
pub const MAX_POINTS: usize = 20_000;

/// Split circular-orbit radii ρ₊, ρ₋, ρ₀ (isotropic chart) as JSON.
pub fn split_radii_json(rs: f64, h: f64) -> Result<String, String> {
    let r = helicity_split_radii(rs, h).map_err(|e| e.to_string())?;
    to_json_string(&json!({
        "rs": rs,
        "h": h,
        "rho_plus": r.rho_plus,
        "rho_minus": r.rho_minus,
        "rho_zero": r.rho_zero,
        "rho_zero_closed": r.rho_zero_closed,
    }))
    .map_err(|e| e.to_string())
}

/// ω±²(ρ) sampled on [rho_min, rho_max]·r_s as CSV `rho,omega_sq_plus,omega_sq_minus`.
pub fn scan_csv_text(rs: f64, h: f64, rho_min: f64, rho_max: f64, points: usize) -> Result<String, String> {
    if points > MAX_POINTS {
        return Err(format!("at most {MAX_POINTS} points"));
    }
    if !rs.is_finite() || rs <= 0.0 {
        return Err(format!("r_s must be positive, got {rs}"));
    }
    let rows = potential_scan(rs, h, rho_min * rs, rho_max * rs, points).map_err(|e| e.to_string())?;
    if rows.iter().any(|r| !r.omega_sq_plus.is_finite() || !r.omega_sq_minus.is_finite()) {
        return Err("scan produced non-finite values".into());
    }
    Ok(scan_csv(&rows))
}

/// Linear and circular polarization bases for wave vector k, as JSON.
pub fn polarization_json(k1: f64, k2: f64, k3: f64) -> Result<String, String> {
    let k = WaveVector::new([k1, k2, k3]);
    let b = circular_basis(&k).map_err(|e| e.to_string())?;
    let cv = |v: &[photon_spinor::algebra::C64]| complex_vec_json(v).map_err(|e| e.to_string());
    to_json_string(&json!({
        "k": [k1, k2, k3],
        "omega": k.omega,
        "axis_degenerate": k.axis_degenerate,
        "linear": b.eps,
        "e_plus": cv(&b.e_plus)?,
        "e_minus": cv(&b.e_minus)?,
        "e0": cv(&b.e_zero)?,
        "rotation_phase": cv(&[rotation_phase(&k)])?,
    }))
    .map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = splitRadii)]
pub fn split_radii(rs: f64, h: f64) -> Result<String, JsValue> {
    js(split_radii_json(rs, h))
}

#[wasm_bindgen(js_name = potentialScan)]
pub fn potential_scan_csv(rs: f64, h: f64, rho_min: f64, rho_max: f64, points: usize) -> Result<String, JsValue> {
    js(scan_csv_text(rs, h, rho_min, rho_max, points))
}

#[wasm_bindgen(js_name = polarizationBasis)]
pub fn polarization_basis(k1: f64, k2: f64, k3: f64) -> Result<String, JsValue> {
    js(polarization_json(k1, k2, k3))
}
