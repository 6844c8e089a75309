//! Check records and the numeric text formats shared by the CLI and tests.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// One identity or property check: measured deviation against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    /// Omitted from serialized reports when infinite (informational rows).
    #[serde(skip_serializing_if = "not_finite")]
    pub tolerance: f64,
    pub passed: bool,
    /// Informational rows are reported but never fail a suite.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
}

fn not_finite(x: &f64) -> bool {
    !x.is_finite()
}

impl Check {
    pub fn new(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            deviation,
            tolerance,
            passed: deviation.is_finite() && deviation < tolerance,
            informational: false,
        }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Check { name: name.into(), deviation: value, tolerance: f64::INFINITY, passed: true, informational: true }
    }

    pub fn renamed(mut self, name: String) -> Self {
        self.name = name;
        self
    }

    /// Re-judge against a different tolerance (config overrides).
    pub fn retolerance(&mut self, tolerance: f64) {
        if self.informational {
            return;
        }
        self.tolerance = tolerance;
        self.passed = self.deviation.is_finite() && self.deviation < tolerance;
    }
}

/// Collapse repeated names to their worst deviation (tightest tolerance), keeping
/// first-seen order.
pub fn merge_worst(checks: impl IntoIterator<Item = Check>) -> Vec<Check> {
    let mut out: Vec<Check> = Vec::new();
    for c in checks {
        match out.iter_mut().find(|o| o.name == c.name) {
            Some(o) => {
                let worst = if c.deviation.is_nan() || c.deviation > o.deviation { c.deviation } else { o.deviation };
                let tol = o.tolerance.min(c.tolerance);
                let informational = o.informational && c.informational;
                *o = if informational { Check::info(c.name, worst) } else { Check::new(c.name, worst, tol) };
            }
            None => out.push(c),
        }
    }
    out
}

pub fn first_failure(checks: &[Check]) -> Option<&Check> {
    checks.iter().find(|c| !c.passed)
}

/// 17 significant digits; round-trips every f64.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.16e}")
}

pub fn csv_row(fields: &[f64]) -> String {
    fields.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",")
}

/// `[re, im]`, refusing non-finite parts.
pub fn complex_json(z: Complex64) -> Result<Value> {
    Ok(Value::Array(vec![finite_json(z.re)?, finite_json(z.im)?]))
}

pub fn finite_json(x: f64) -> Result<Value> {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or_else(|| Error::NonFinite(format!("value {x} cannot be written to JSON")))
}

pub fn complex_vec_json(v: &[Complex64]) -> Result<Value> {
    v.iter().map(|&z| complex_json(z)).collect::<Result<Vec<_>>>().map(Value::Array)
}

/// Serialize with a final scan that rejects NaN/Inf anywhere in the tree.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::NonFinite(e.to_string()))?;
    if has_null_float(&v) {
        return Err(Error::NonFinite("output contains NaN or infinity".into()));
    }
    serde_json::to_string_pretty(&v).map_err(|e| Error::NonFinite(e.to_string()))
}

// serde_json turns non-finite f64 into null; no output of ours uses null otherwise.
fn has_null_float(v: &Value) -> bool {
    match v {
        Value::Null => true,
        Value::Array(a) => a.iter().any(has_null_float),
        Value::Object(o) => o.values().any(has_null_float),
        _ => false,
    }
}

/// Checks as CSV with header `name,deviation,tolerance,passed`.
pub fn checks_csv(checks: &[Check]) -> String {
    let mut s = String::from("name,deviation,tolerance,passed\n");
    for c in checks {
        let tol = if c.tolerance.is_finite() { fmt_f64(c.tolerance) } else { "inf".into() };
        s.push_str(&format!("{},{},{},{}\n", csv_field(&c.name), fmt_f64(c.deviation), tol, c.passed));
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn nan_rejected() {
        assert!(complex_json(Complex64::new(f64::NAN, 0.0)).is_err());
        assert!(to_json_string(&vec![1.0, f64::INFINITY]).is_err());
        assert!(to_json_string(&vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn quoted_names() {
        let c = Check::new("a,b", 0.0, 1.0);
        assert!(checks_csv(&[c]).contains("\"a,b\""));
    }
}
