//! Bracketing scans, safeguarded Newton, and low-degree polynomial roots.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootResult {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
    pub bracket: [f64; 2],
}

/// Sub-intervals of [lo, hi] (n uniform cells) on which `f` changes sign.
pub fn scan_brackets(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<[f64; 2]> {
    let step = (hi - lo) / n as f64;
    let mut out = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=n {
        let b = if i == n { hi } else { lo + step * i as f64 };
        let fb = f(b);
        // a root sitting on a node is reported once, in the cell that ends there
        let hit = (i == 1 && fa == 0.0) || fb == 0.0 || (fa.is_finite() && fb.is_finite() && fa * fb < 0.0);
        if hit {
            out.push([a, b]);
        }
        a = b;
        fa = fb;
    }
    out
}

/// Bisection down to a tight bracket, then Newton steps kept inside the bracket.
/// Stops when the step falls below `xtol`.
pub fn bisect_newton(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    bracket: [f64; 2],
    xtol: f64,
) -> Result<RootResult> {
    let [mut a, mut b] = bracket;
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(RootResult { root: a, residual: 0.0, iterations: 0, bracket });
    }
    if fb == 0.0 {
        return Ok(RootResult { root: b, residual: 0.0, iterations: 0, bracket });
    }
    if !(fa.signum() != fb.signum()) {
        return Err(Error::RootNotBracketed(format!("f({a}) = {fa:e}, f({b}) = {fb:e} have the same sign")));
    }
    let mut it = 0;
    // coarse bisection
    while (b - a) > 1e-6 * (1.0 + a.abs()) && it < 200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        it += 1;
        if fm == 0.0 {
            return Ok(RootResult { root: m, residual: 0.0, iterations: it, bracket });
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..100 {
        it += 1;
        let fx = f(x);
        let d = df(x);
        let mut nx = x - fx / d;
        if !nx.is_finite() || nx <= a || nx >= b {
            nx = 0.5 * (a + b);
        }
        if fx.signum() == fa.signum() {
            a = x;
        } else {
            b = x;
        }
        let step = (nx - x).abs();
        x = nx;
        if step < xtol {
            break;
        }
    }
    Ok(RootResult { root: x, residual: f(x).abs(), iterations: it, bracket })
}

/// Horner evaluation; coefficients from highest degree down.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, c| acc * x + c)
}

/// Roots of x³ + c2x² + c1x + c0 (complex coefficients allowed).
/// An exactly (or numerically) vanishing c0 is deflated to keep the zero root exact.
pub fn monic_cubic_roots(c2: Complex64, c1: Complex64, c0: Complex64) -> [Complex64; 3] {
    let scale = 1.0f64.max(c2.norm()).max(c1.norm().sqrt()).max(c0.norm().cbrt());
    if c0.norm() <= 1e-15 * scale.powi(3) {
        let [r1, r2] = quadratic_roots(c2, c1);
        return [Complex64::default(), r1, r2];
    }
    // Durand–Kerner from the standard non-symmetric seeds
    let p = |z: Complex64| ((z + c2) * z + c1) * z + c0;
    let seed = Complex64::new(0.4, 0.9);
    let mut r = [seed * scale, seed.powi(2) * scale, seed.powi(3) * scale];
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..3 {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    den *= r[i] - r[j];
                }
            }
            let step = p(r[i]) / den;
            r[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-16 * scale {
            break;
        }
    }
    r
}

/// Roots of x² + bx + c, cancellation-free.
pub fn quadratic_roots(b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - c * 4.0).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) * 0.5 } else { -(b - disc) * 0.5 };
    if q.norm() == 0.0 {
        return [Complex64::default(), Complex64::default()];
    }
    [q, c / q]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_hits_sqrt2() {
        let r = bisect_newton(|x| x * x - 2.0, |x| 2.0 * x, [0.0, 3.0], 1e-15).unwrap();
        assert!((r.root - 2f64.sqrt()).abs() < 1e-15);
        assert!(bisect_newton(|x| x * x + 1.0, |x| 2.0 * x, [0.0, 3.0], 1e-15).is_err());
    }

    #[test]
    fn scan_finds_each_sign_change() {
        let b = scan_brackets(|x| (x - 0.3) * (x - 0.7) * (x - 1.4), 0.0, 2.0, 100);
        assert_eq!(b.len(), 3);
    }

    #[test]
    fn cubic_roots_match_factors() {
        let c = |x: f64| Complex64::new(x, 0.0);
        // (x − 1)(x + 2)(x − 3) = x³ − 2x² − 5x + 6
        let mut r: Vec<f64> = monic_cubic_roots(c(-2.0), c(-5.0), c(6.0)).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (a, b) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        // x(x² − 4)
        let r = monic_cubic_roots(c(0.0), c(-4.0), c(0.0));
        assert_eq!(r[0], Complex64::default());
        assert!((r[1].re.abs() - 2.0).abs() < 1e-15 && (r[2].re.abs() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn horner() {
        assert_eq!(poly_eval(&[64.0, -112.0, 40.0, -3.0], 0.0), -3.0);
        assert_eq!(poly_eval(&[1.0, 0.0, -1.0], 2.0), 3.0);
    }
}
