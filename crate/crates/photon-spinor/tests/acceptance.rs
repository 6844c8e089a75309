//! One PASS/FAIL line per acceptance criterion. Every criterion is evaluated and
//! printed before the test asserts, so a single failure does not hide the rest.

use std::io::Write;
use std::time::Instant;

use photon_spinor::algebra::{algebra_suite, Representation, C64};
use photon_spinor::field::{dirac_residual, synthesize_with_dt, Grid, ModeBasis, ModeCoefficients, ModeEntry};
use photon_spinor::gravity::{
    circular_orbit_isotropic, circular_orbit_standard, classical_orbit, connection_oracle_deviation,
    chart_points, helicity_split_radii, isotropic_closed_form, photon_sphere_rho, Chart, DiagonalMetric,
    SchwarzschildParams, MINUS_POLY, PLUS_POLY,
};
use photon_spinor::medium::{medium_dirac_residual, medium_suite, MediumProfile};
use photon_spinor::polarization::polarization_suite;
use photon_spinor::report::{first_failure, Check};
use photon_spinor::roots::poly_eval;
use photon_spinor::symmetries::{lorentz_invariance_certificate, symmetry_suite};

const SEED: u64 = 20240611;

type Criterion = (&'static str, &'static str, fn() -> Vec<Check>);

struct Outcome {
    id: &'static str,
    title: &'static str,
    checks: Vec<Check>,
}

impl Outcome {
    fn passed(&self) -> bool {
        first_failure(&self.checks).is_none()
    }

    fn line(&self) -> String {
        let worst = self
            .checks
            .iter()
            .filter(|c| !c.informational)
            .max_by(|a, b| (a.deviation / a.tolerance).total_cmp(&(b.deviation / b.tolerance)))
            .map(|c| format!("{} = {:.3e} (tol {:.1e})", c.name, c.deviation, c.tolerance))
            .unwrap_or_default();
        let status = if self.passed() { "PASS" } else { "FAIL" };
        match first_failure(&self.checks) {
            Some(f) => format!("{} {status} {}: first failure {} = {:.3e} (tol {:.1e})", self.id, self.title, f.name, f.deviation, f.tolerance),
            None => format!("{} {status} {}: {} checks, tightest {worst}", self.id, self.title, self.checks.len()),
        }
    }
}

fn timed(name: &str, limit_s: f64, start: Instant) -> Check {
    Check::new(format!("{name}_runtime_seconds"), start.elapsed().as_secs_f64(), limit_s)
}

fn ac1() -> Vec<Check> {
    let start = Instant::now();
    let r = helicity_split_radii(1.0, 2.0).expect("radii");
    vec![
        Check::new("rho_zero", (r.rho_zero - (2.0 + 3f64.sqrt()) / 4.0).abs(), 1e-12),
        Check::new("rho_plus", (r.rho_plus - 1.295).abs(), 1e-3),
        Check::new("rho_minus", (r.rho_minus - 0.783).abs(), 1e-3),
        Check::new("cubic_stationarity", poly_eval(&PLUS_POLY, r.rho_plus).abs(), 1e-9),
        Check::new("quartic_stationarity", poly_eval(&MINUS_POLY, r.rho_minus).abs(), 1e-9),
        timed("radii", 1.0, start),
    ]
}

fn ac2() -> Vec<Check> {
    let iso = circular_orbit_isotropic(SchwarzschildParams::new(1.0, Chart::Isotropic).unwrap(), 2, None).unwrap();
    let std1 = SchwarzschildParams::new(1.0, Chart::Standard).unwrap();
    let st = circular_orbit_standard(std1, 2, Some(1.5)).unwrap();
    let cl = classical_orbit(std1, 2.0).unwrap();
    vec![
        Check::new("isotropic_omega_sq_plus", (iso.omega_sq_plus - 8.0 / 9.0).abs(), 1e-12),
        Check::new("isotropic_omega_sq_minus", (iso.omega_sq_minus - 8.0 / 27.0).abs(), 1e-12),
        Check::new("standard_omega_sq", (st.omega_sq_plus - 32.0 / 81.0).abs(), 1e-12),
        Check::new("classical_omega_sq", (cl.omega_sq_plus - 16.0 / 27.0).abs(), 1e-12),
    ]
}

fn ac3() -> Vec<Check> {
    let p = SchwarzschildParams::new(1.0, Chart::Standard).unwrap();
    // 10 radii × 5 angular momenta
    let mut worst = 0.0f64;
    let mut count = 0;
    for i in 0..10 {
        for m in 2..7 {
            let r = 1.1 + 0.45 * i as f64;
            let o = circular_orbit_standard(p, m, Some(r)).unwrap();
            worst = worst.max(o.diagnostics.closed_form_deviation.unwrap());
            count += 1;
        }
    }
    assert_eq!(count, 50);
    let (plus, minus) = isotropic_closed_form(1.0, 2.0, photon_sphere_rho(1.0));
    vec![
        Check::new("determinant_roots_vs_closed_form", worst, 1e-12),
        Check::new("isotropic_levels_from_constants", (plus - 8.0 / 27.0).abs().max((minus - 8.0 / 9.0).abs()), 1e-13),
    ]
}

fn ac4() -> Vec<Check> {
    let start = Instant::now();
    let mut c = algebra_suite(SEED, 1000);
    assert!(c.len() >= 12, "algebra suite lists {} identities", c.len());
    for x in c.iter_mut() {
        x.retolerance(x.tolerance.min(1e-12));
    }
    c.push(timed("algebra", 5.0, start));
    c
}

fn ac5() -> Vec<Check> {
    let mut c = polarization_suite(SEED, 1000).unwrap();
    for x in c.iter_mut() {
        x.retolerance(x.tolerance.min(1e-13));
    }
    c
}

fn plane_wave(dims: [usize; 3]) -> (Grid, ModeCoefficients) {
    let l = 2.0 * std::f64::consts::PI;
    let grid = Grid::periodic_box([l; 3], dims).unwrap();
    let coeffs = ModeCoefficients {
        basis: ModeBasis::Linear,
        modes: vec![ModeEntry { k: [1.0, 1.0, 1.0], pol: 1, b: C64::new(0.8, -0.3) }],
        circular: vec![],
    };
    (grid, coeffs)
}

fn order(name: &str, coarse: f64, fine: f64) -> Vec<Check> {
    let p = (coarse / fine).log2();
    vec![Check::info(format!("{name}_coarse"), coarse), Check::info(format!("{name}_fine"), fine), Check::new(format!("{name}_order_minus_2"), (p - 2.0).abs(), 0.2)]
}

fn ac6() -> Vec<Check> {
    let mut out = Vec::new();
    let n = 1.5;
    let medium = MediumProfile::homogeneous(n * n, 1.0).unwrap();
    let mut dirac = [0.0; 2];
    let mut delta = [0.0; 2];
    let mut med = [0.0; 2];
    for (i, dims) in [[16, 16, 16], [32, 32, 32]].into_iter().enumerate() {
        let (grid, coeffs) = plane_wave(dims);
        let (psi, dt) = synthesize_with_dt(&coeffs, Representation::Standard, grid, 0.0).unwrap();
        dirac[i] = dirac_residual(&psi, &dt).unwrap();
        delta[i] = lorentz_invariance_certificate(&psi, &dt, 1e-1).unwrap().delta.max_deviation;
        // the same snapshot solves the medium equation for ω = |k|/n
        let slow = dt.map(|d| d * C64::from(1.0 / n));
        med[i] = medium_dirac_residual(&psi, &slow, &medium).unwrap().dirac;
    }
    out.extend(order("dirac_residual", dirac[0], dirac[1]));
    out.extend(order("delta_certificate", delta[0], delta[1]));
    out.extend(order("homogeneous_medium_residual", med[0], med[1]));
    out
}

fn ac7() -> Vec<Check> {
    let (s, i) = chart_points(1.0, 100, SEED);
    vec![
        Check::new("standard_chart", connection_oracle_deviation(&DiagonalMetric::schwarzschild_standard(1.0), &s).unwrap(), 1e-11),
        Check::new("isotropic_chart", connection_oracle_deviation(&DiagonalMetric::schwarzschild_isotropic(1.0), &i).unwrap(), 1e-11),
    ]
}

fn ac8() -> Vec<Check> {
    let grid = Grid::periodic_box([2.0 * std::f64::consts::PI; 3], [12, 12, 12]).unwrap();
    symmetry_suite(grid)
        .unwrap()
        .into_iter()
        .filter(|c| {
            c.name.starts_with("charge_conjugation_fixed_point")
                || c.name.starts_with("chiral_residual_covariance")
                || c.name.starts_with("axial_current_vanishes")
        })
        .map(|mut c| {
            let tol = if c.name.starts_with("charge") {
                1e-15
            } else if c.name.starts_with("chiral") {
                1e-12
            } else {
                1e-14
            };
            c.retolerance(c.tolerance.min(tol));
            c
        })
        .collect()
}

fn ac9() -> Vec<Check> {
    let mut c = medium_suite(SEED).unwrap();
    for x in c.iter_mut() {
        if !x.name.starts_with("spin_orbit_vanishes_homogeneous") {
            x.retolerance(x.tolerance.min(1e-11));
        }
    }
    c
}

#[test]
fn acceptance_criteria() {
    let table: [Criterion; 9] = [
        ("AC1", "orbit radii regression", ac1),
        ("AC2", "energy levels", ac2),
        ("AC3", "closed form vs numeric", ac3),
        ("AC4", "algebra suite (1000 seeded inputs)", ac4),
        ("AC5", "polarization suite (1000 seeded k + axis cases)", ac5),
        ("AC6", "PDE residual convergence order", ac6),
        ("AC7", "connection oracle", ac7),
        ("AC8", "symmetry fixed points", ac8),
        ("AC9", "medium operator identities", ac9),
    ];
    let outcomes: Vec<Outcome> = table.iter().map(|(id, title, f)| Outcome { id, title, checks: f() }).collect();
    // straight to the stderr handle: libtest's capture would hide these on success
    let mut err = std::io::stderr().lock();
    for o in &outcomes {
        writeln!(err, "{}", o.line()).unwrap();
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
