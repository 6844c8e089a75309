//! Diagonal-metric tetrads, their connection coefficients, the curved-spacetime
//! Dirac-like operator, and circular photon orbits in Schwarzschild spacetime.
//!
//! Metric ds² = −a₀²dt² + a₁²dx₁² + a₂²dx₂² + a₃²dx₃², tetrad e_μ = a_μ⁻¹∂_μ.
//! Structure constants [e_κ, e_λ] = C_{κλ}^μ e_μ, C_{κλν} = η_{μν}C_{κλ}^μ.
//! The connection is Γ_{κλμ} = −(C_{κλμ} − C_{λμκ} − C_{μκλ})/2, which is antisymmetric
//! in (κ, λ) and reproduces the expanded operator forms exactly.
//!
//! Orbit conventions (G = c = 1, equatorial plane):
//! - `circular_orbit_isotropic` labels ω₊²/ω₋² by the τ₃ = ±1 spin projection, so
//!   ω₊² = 4m(m+1)/27r_s² at the photon sphere.
//! - `helicity_split_radii` and the potential scan follow the effective-potential
//!   curves ω±²(ρ) = h(1−x)²/(ρ²(1+x)⁶)·[h ∓ (3r_s/(4ρ+r_s) + r_s/(4ρ−r_s))], x = r_s/4ρ,
//!   whose "+" curve is the τ₃ = −1 level. The two labelings therefore differ; see the
//!   field docs.

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{build_tau, MatrixSet, Representation, SpinGenerators, C64, ETA};
use crate::error::{Error, Result};
use crate::expr::{add6, apply, eval6, scale6, sub6, sum6, Expr, SpinorExpr};
use crate::report::{fmt_f64, Check};
use crate::roots::{bisect_newton, monic_cubic_roots, poly_eval, scan_brackets, RootResult};

const I: C64 = C64::new(0.0, 1.0);

fn num(x: f64) -> Expr {
    Expr::num(x)
}

type Tensor3 = [[[Expr; 4]; 4]; 4];

fn zeros3() -> Tensor3 {
    std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| num(0.0))))
}

#[derive(Debug, Clone)]
pub struct DiagonalMetric {
    pub labels: [String; 4],
    pub a: [Expr; 4],
}

impl DiagonalMetric {
    /// Coefficients as expression strings in the given coordinate names.
    pub fn parse(labels: [&str; 4], a: [&str; 4]) -> Result<Self> {
        let mut out = Vec::with_capacity(4);
        for s in a {
            out.push(Expr::parse_with(s, &labels)?);
        }
        Ok(DiagonalMetric { labels: labels.map(String::from), a: out.try_into().expect("four coefficients") })
    }

    pub fn minkowski() -> Self {
        DiagonalMetric { labels: ["t", "x", "y", "z"].map(String::from), a: std::array::from_fn(|_| num(1.0)) }
    }

    /// a = (√(1−r_s/r), 1/√(1−r_s/r), r, r sin θ) in (t, r, θ, φ).
    pub fn schwarzschild_standard(rs: f64) -> Self {
        let r = Expr::var(1);
        let f = (num(1.0) - num(rs) / r.clone()).sqrt();
        DiagonalMetric {
            labels: ["t", "r", "theta", "phi"].map(String::from),
            a: [f.clone(), num(1.0) / f, r.clone(), r * Expr::var(2).sin()],
        }
    }

    /// a₀ = (1 − x)/(1 + x), a₁ = a₂ = a₃ = (1 + x)², x = r_s/4ρ, Cartesian (t, x, y, z).
    pub fn schwarzschild_isotropic(rs: f64) -> Self {
        let rho = (Expr::var(1).powf(2.0) + Expr::var(2).powf(2.0) + Expr::var(3).powf(2.0)).sqrt();
        let x = num(rs / 4.0) / rho;
        let a = (num(1.0) + x.clone()).powf(2.0);
        DiagonalMetric {
            labels: ["t", "x", "y", "z"].map(String::from),
            a: [(num(1.0) - x.clone()) / (num(1.0) + x), a.clone(), a.clone(), a],
        }
    }

    pub fn values(&self, at: [f64; 4]) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (m, a) in self.a.iter().enumerate() {
            let v = a.eval(&at);
            if !(v.re > 0.0) || !v.re.is_finite() || v.im.abs() > 1e-12 * v.re.abs() {
                return Err(Error::DomainViolation(format!("a_{m} = {v} at {at:?} is not positive")));
            }
            out[m] = v.re;
        }
        Ok(out)
    }

    /// e_μ f = a_μ⁻¹∂_μ f.
    pub fn frame(&self, mu: usize, f: &Expr) -> Expr {
        f.diff(mu) / self.a[mu].clone()
    }
}

/// C_{κλν} from the closed form for diagonal metrics.
pub fn structure_constants_closed(g: &DiagonalMetric) -> Tensor3 {
    let dln = |l: usize, m: usize| g.a[m].diff(l) / g.a[m].clone();
    let mut c = zeros3();
    for l in 1..4 {
        let v = -(dln(l, 0) / g.a[l].clone());
        c[0][l][0] = v.clone();
        c[l][0][0] = -v;
        for m in 1..4 {
            if m != l {
                let v = -(dln(l, m) / g.a[l].clone());
                c[l][m][m] = v.clone();
                c[m][l][m] = -v;
            }
        }
    }
    c
}

/// C_{κλν} by applying the commutator of frame fields to the coordinate functions.
pub fn structure_constants_brute(g: &DiagonalMetric) -> Tensor3 {
    let mut c = zeros3();
    for k in 0..4 {
        for l in 0..4 {
            for m in 0..4 {
                let x = Expr::var(m);
                let comm = g.frame(k, &g.frame(l, &x)) - g.frame(l, &g.frame(k, &x));
                // [e_κ, e_λ]x^μ = C_{κλ}^μ e_μ x^μ = C_{κλ}^μ / a_μ
                c[k][l][m] = num(ETA[m]) * comm * g.a[m].clone();
            }
        }
    }
    c
}

pub fn gamma_from(c: &Tensor3) -> Tensor3 {
    let mut g = zeros3();
    for k in 0..4 {
        for l in 0..4 {
            for m in 0..4 {
                g[k][l][m] = num(-0.5) * (c[k][l][m].clone() - c[l][m][k].clone() - c[m][k][l].clone());
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionData {
    pub c: [[[f64; 4]; 4]; 4],
    pub gamma: [[[f64; 4]; 4]; 4],
}

fn eval3(t: &Tensor3, at: &[f64; 4]) -> [[[f64; 4]; 4]; 4] {
    std::array::from_fn(|k| std::array::from_fn(|l| std::array::from_fn(|m| t[k][l][m].eval_real(at))))
}

pub fn connection_coefficients(g: &DiagonalMetric, at: [f64; 4]) -> Result<ConnectionData> {
    g.values(at)?;
    let c = structure_constants_closed(g);
    Ok(ConnectionData { c: eval3(&c, &at), gamma: eval3(&gamma_from(&c), &at) })
}

/// max |Γ_closed − Γ_brute| / max(1, max|Γ_brute|) over the given points.
pub fn connection_oracle_deviation(g: &DiagonalMetric, points: &[[f64; 4]]) -> Result<f64> {
    let closed = gamma_from(&structure_constants_closed(g));
    let brute = gamma_from(&structure_constants_brute(g));
    let mut worst = 0.0f64;
    for p in points {
        g.values(*p)?;
        let (a, b) = (eval3(&closed, p), eval3(&brute, p));
        let scale = b.iter().flatten().flatten().fold(1.0f64, |s, x| s.max(x.abs()));
        let d = a.iter().flatten().flatten().zip(b.iter().flatten().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if !d.is_finite() {
            return Err(Error::NonFinite(format!("connection at {p:?}")));
        }
        worst = worst.max(d / scale);
    }
    Ok(worst)
}

/// iβ^μ(e_μ − iΓ_{κλμ}S^{κλ}/2)ψ for an analytic spinor field.
pub fn curved_dirac(g: &DiagonalMetric, rep: Representation, psi: &SpinorExpr) -> SpinorExpr {
    let m = MatrixSet::new(rep);
    let s = SpinGenerators::new(rep);
    let gamma = gamma_from(&structure_constants_closed(g));
    sum6((0..4).map(|mu| {
        let e: SpinorExpr = std::array::from_fn(|r| g.frame(mu, &psi[r]));
        let mut conn = crate::expr::zero6();
        for k in 0..4 {
            for l in 0..4 {
                if gamma[k][l][mu].as_const() == Some(C64::default()) {
                    continue;
                }
                let t = apply(&(s.upper(k, l) * (-I * 0.5)), psi);
                conn = add6(&conn, &scale6(&gamma[k][l][mu], &t));
            }
        }
        apply(&(m.beta[mu] * I), &add6(&e, &conn))
    }))
}

/// The expanded form: a₀⁻¹iβ⁰∂₀ψ + Σ_l a_l⁻¹iβ^l[∂_l + ∂_l ln(a₀a_{l+1})]ψ
/// + a₁⁻¹β³Σ²∂₁ln(a₂/a₃)ψ + a₂⁻¹β¹Σ³∂₂ln(a₃/a₁)ψ + a₃⁻¹β²Σ¹∂₃ln(a₁/a₂)ψ (cyclic indices).
pub fn expanded_dirac(g: &DiagonalMetric, rep: Representation, psi: &SpinorExpr) -> SpinorExpr {
    let m = MatrixSet::new(rep);
    let a = &g.a;
    let dln = |l: usize, f: Expr| f.clone().ln().diff(l);
    let mut out = apply(&(m.beta[0] * I), &std::array::from_fn(|r| g.frame(0, &psi[r])));
    for l in 1..4 {
        let next = l % 3 + 1;
        let w = dln(l, a[0].clone() * a[next].clone());
        let inner: SpinorExpr = std::array::from_fn(|r| (psi[r].diff(l) + w.clone() * psi[r].clone()) / a[l].clone());
        out = add6(&out, &apply(&(m.beta[l] * I), &inner));
    }
    // (l, β index, Σ index, numerator, denominator)
    for (l, b, s, p, q) in [(1, 3, 2, 2, 3), (2, 1, 3, 3, 1), (3, 2, 1, 1, 2)] {
        let w = dln(l, a[p].clone() / a[q].clone()) / a[l].clone();
        out = add6(&out, &scale6(&w, &apply(&(m.beta[b] * m.sigma[s - 1]), psi)));
    }
    out
}

/// Right-hand side of i∂_tψ = … in standard Schwarzschild coordinates (t, r, θ, φ).
pub fn schwarzschild_hamiltonian_form(rs: f64, rep: Representation, psi: &SpinorExpr) -> SpinorExpr {
    let m = MatrixSet::new(rep);
    let r = Expr::var(1);
    let th = Expr::var(2);
    let f = num(1.0) - num(rs) / r.clone();
    let sf = f.clone().sqrt();
    let cot = th.clone().cos() / th.clone().sin();
    let d = |v: usize| -> SpinorExpr { std::array::from_fn(|c| psi[c].diff(v)) };
    let t1 = scale6(&(f * num(1.0)), &add6(&d(1), &scale6(&(num(1.0) / r.clone()), psi)));
    let t2 = scale6(&(sf.clone() / r.clone()), &add6(&d(2), &scale6(&cot, psi)));
    let t3 = scale6(&(sf.clone() / (r.clone() * th.sin())), &d(3));
    let t4 = scale6(&(num(rs / 2.0) / (r.clone() * r.clone())), psi);
    let t5 = scale6(&(sf * cot / r), &apply(&(m.alpha[0] * m.sigma[2]), psi));
    let mi = -I;
    let lin = add6(
        &add6(&apply(&(m.alpha[0] * mi), &t1), &apply(&(m.alpha[1] * mi), &t2)),
        &add6(&apply(&(m.alpha[2] * mi), &t3), &apply(&(m.alpha[0] * mi), &t4)),
    );
    sub6(&lin, &t5)
}

/// Isotropic-chart scalars: η = a/a₀, ϖ = (a₀a)², Π = ∇ ln √ϖ.
pub fn isotropic_scalars(rs: f64) -> (Expr, Expr, [Expr; 3]) {
    let g = DiagonalMetric::schwarzschild_isotropic(rs);
    let eta = g.a[1].clone() / g.a[0].clone();
    let varpi = (g.a[0].clone() * g.a[1].clone()).powf(2.0);
    let half = varpi.clone().sqrt().ln();
    (eta, varpi, [half.diff(1), half.diff(2), half.diff(3)])
}

fn rel_dev(a: &SpinorExpr, b: &SpinorExpr, points: &[[f64; 4]]) -> f64 {
    points
        .iter()
        .map(|p| {
            let (x, y) = (eval6(a, p), eval6(b, p));
            (x - y).camax() / x.camax().max(1.0)
        })
        .fold(0.0, |m: f64, d| if d.is_nan() { f64::NAN } else { m.max(d) })
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, gen: impl Fn(&mut ChaCha8Rng) -> [f64; 4]) -> Vec<[f64; 4]> {
    (0..n).map(|_| gen(rng)).collect()
}

/// Domain samples: standard chart r ∈ (1.05, 10)r_s, θ ∈ (0.1, π − 0.1);
/// isotropic chart ρ ∈ (0.3, 5)r_s in a random direction.
pub fn chart_points(rs: f64, n: usize, seed: u64) -> (Vec<[f64; 4]>, Vec<[f64; 4]>) {
    use std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = random_points(&mut rng, n, |r| {
        [r.random_range(-5.0..5.0), rs * r.random_range(1.05..10.0), r.random_range(0.1..PI - 0.1), r.random_range(0.0..2.0 * PI)]
    });
    let iso = random_points(&mut rng, n, |r| {
        let rho = rs * r.random_range(0.3..5.0);
        let ct: f64 = r.random_range(-1.0..1.0);
        let ph = r.random_range(0.0..2.0 * PI);
        let st = (1.0 - ct * ct).sqrt();
        [r.random_range(-5.0..5.0), rho * st * ph.cos(), rho * st * ph.sin(), rho * ct]
    });
    (std, iso)
}

/// Smooth generic test spinor in (t, x1, x2, x3).
pub fn test_spinor() -> SpinorExpr {
    [
        "sin(x1 + 2*x2 - t) + i*x3",
        "cos(x3)*exp(-i*t)",
        "x1*x2 + t",
        "exp(x2/3)*sin(t + x1)",
        "i*cos(x1*x3)",
        "x1 - x2*t",
    ]
    .map(|s| Expr::parse(s).expect("built-in spinor parses"))
}

/// Operator-level identities of the curved Dirac-like equation.
pub fn operator_checks(rs: f64, seed: u64, n: usize) -> Result<Vec<Check>> {
    let (std_pts, iso_pts) = chart_points(rs, n, seed);
    let psi = test_spinor();
    let tol = 1e-11;
    let mut out = Vec::new();
    let generic = DiagonalMetric::parse(
        ["t", "x1", "x2", "x3"],
        ["exp(x1/3 + sin(x2)/5 + x3/7)", "1 + x1^2/3 + x2*x3/9", "2 + cos(x1)/2 + x3/5", "1 + x1*x2/4 + sin(x3)/3"],
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let gen_pts = random_points(&mut rng, n, |r| std::array::from_fn(|_| r.random_range(-1.0..1.0)));
    for rep in [Representation::Standard, Representation::Chiral] {
        let name = rep.name();
        let m = MatrixSet::new(rep);
        for (label, g, pts) in [
            ("generic", &generic, &gen_pts),
            ("schwarzschild_standard", &DiagonalMetric::schwarzschild_standard(rs), &std_pts),
            ("schwarzschild_isotropic", &DiagonalMetric::schwarzschild_isotropic(rs), &iso_pts),
        ] {
            let d = rel_dev(&curved_dirac(g, rep, &psi), &expanded_dirac(g, rep, &psi), pts);
            out.push(Check::new(format!("expanded_operator[{label}, {name}]"), d, tol));
        }
        let flat = curved_dirac(&DiagonalMetric::minkowski(), rep, &psi);
        let vac = sum6((0..4).map(|mu| apply(&(m.beta[mu] * I), &std::array::from_fn(|r| psi[r].diff(mu)))));
        out.push(Check::new(format!("flat_limit[{name}]"), rel_dev(&flat, &vac, &gen_pts), 1e-15));

        // i∂_tψ = −a₀β⁰(op − iβ⁰a₀⁻¹∂_tψ)
        let g = DiagonalMetric::schwarzschild_standard(rs);
        let op = curved_dirac(&g, rep, &psi);
        let dt: SpinorExpr = std::array::from_fn(|r| psi[r].diff(0) / g.a[0].clone());
        let rest = sub6(&op, &apply(&(m.beta[0] * I), &dt));
        let lhs = scale6(&(-g.a[0].clone()), &apply(&m.beta[0], &rest));
        let d = rel_dev(&lhs, &schwarzschild_hamiltonian_form(rs, rep, &psi), &std_pts);
        out.push(Check::new(format!("schwarzschild_hamiltonian_form[{name}]"), d, tol));

        let g = DiagonalMetric::schwarzschild_isotropic(rs);
        let (eta, varpi, pi) = isotropic_scalars(rs);
        let op = curved_dirac(&g, rep, &psi);
        let lhs = scale6(&g.a[1], &op);
        let mut rhs = apply(&(m.beta[0] * I), &scale6(&eta, &std::array::from_fn(|r| psi[r].diff(0))));
        for l in 1..4 {
            let inner: SpinorExpr = std::array::from_fn(|r| psi[r].diff(l) + pi[l - 1].clone() * psi[r].clone());
            rhs = add6(&rhs, &apply(&(m.beta[l] * I), &inner));
        }
        out.push(Check::new(format!("isotropic_medium_form[{name}]"), rel_dev(&lhs, &rhs, &iso_pts), tol));

        // ψ = ϖ^{-1/2}φ removes Π entirely
        let inv = num(1.0) / varpi.clone().sqrt();
        let wrapped = scale6(&inv, &psi);
        let lhs = scale6(&(g.a[1].clone() * varpi.sqrt()), &curved_dirac(&g, rep, &wrapped));
        let mut rhs = apply(&(m.beta[0] * I), &scale6(&eta, &std::array::from_fn(|r| psi[r].diff(0))));
        for l in 1..4 {
            rhs = add6(&rhs, &apply(&(m.beta[l] * I), &std::array::from_fn(|r| psi[r].diff(l))));
        }
        out.push(Check::new(format!("isotropic_flat_form[{name}]"), rel_dev(&lhs, &rhs, &iso_pts), tol));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Circular orbits

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Standard,
    Isotropic,
}

impl std::str::FromStr for Chart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Chart::Standard),
            "isotropic" => Ok(Chart::Isotropic),
            _ => Err(Error::Parse(format!("unknown chart '{s}' (expected standard|isotropic)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchwarzschildParams {
    pub rs: f64,
    pub chart: Chart,
}

impl SchwarzschildParams {
    pub fn new(rs: f64, chart: Chart) -> Result<Self> {
        if !(rs > 0.0) || !rs.is_finite() {
            return Err(Error::DomainViolation(format!("Schwarzschild radius must be positive, got {rs}")));
        }
        Ok(SchwarzschildParams { rs, chart })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub residual: f64,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_deviation: Option<f64>,
    /// Roots dropped as unphysical, with the reason.
    pub discarded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitResult {
    pub chart: Chart,
    /// r (standard chart) or ρ (isotropic chart).
    pub radius: f64,
    pub omega_sq_plus: f64,
    pub omega_sq_minus: f64,
    pub m_or_h: f64,
    pub diagnostics: Diagnostics,
}

/// r = ρ(1 + r_s/4ρ)².
pub fn r_of_rho(rs: f64, rho: f64) -> f64 {
    rho * (1.0 + rs / (4.0 * rho)).powi(2)
}

/// Inverse of [`r_of_rho`] on the outer branch ρ > r_s/4.
pub fn rho_of_r(rs: f64, r: f64) -> f64 {
    (r - rs / 2.0 + (r * r - r * rs).sqrt()) / 2.0
}

/// ρ₀ = (2 + √3)r_s/4, the image of r = 3r_s/2.
pub fn photon_sphere_rho(rs: f64) -> f64 {
    (2.0 + 3f64.sqrt()) * rs / 4.0
}

/// V_eff(r) = h²(1 − r_s/r)/r².
pub fn v_eff(rs: f64, h: f64, r: f64) -> f64 {
    h * h * (1.0 - rs / r) / (r * r)
}

/// Right-hand side of the photon shape equation, 3r_s u²/2.
pub fn shape_rhs(rs: f64, u: f64) -> f64 {
    1.5 * rs * u * u
}

/// Maximize a function of one variable (slot 1 of the expression) on [lo, hi]:
/// scan the derivative for sign changes, polish with Newton, keep maxima with f > 0.
fn maximize(f: &Expr, lo: f64, hi: f64, xtol: f64, what: &str) -> Result<(RootResult, f64)> {
    let df = f.diff(1);
    let ddf = df.diff(1);
    let at = |e: &Expr, x: f64| e.eval_real(&[0.0, x, 0.0, 0.0]);
    let brackets = scan_brackets(|x| at(&df, x), lo, hi, 4000);
    let mut best: Option<(RootResult, f64)> = None;
    for b in &brackets {
        let r = bisect_newton(|x| at(&df, x), |x| at(&ddf, x), *b, xtol)?;
        let v = at(f, r.root);
        if at(&ddf, r.root) < 0.0 && v > 0.0 && best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((r, v));
        }
    }
    best.ok_or_else(|| {
        let signs: String = (0..=20)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / 20.0;
                if at(&df, x) >= 0.0 { '+' } else { '-' }
            })
            .collect();
        Error::RootNotBracketed(format!(
            "no positive maximum of {what} on [{}, {}]; derivative signs on a 21-point scan: {signs}",
            fmt_f64(lo),
            fmt_f64(hi)
        ))
    })
}

fn require_h(h: f64) -> Result<()> {
    if !(h * h >= 4.0) || !h.is_finite() {
        return Err(Error::InvalidAngularMomentum(h));
    }
    Ok(())
}

/// Classical circular orbit: maximum of V_eff, ω² = V_eff(r) = 4h²/27r_s² at r = 3r_s/2.
/// Solved in units of r_s, so radii scale exactly with r_s.
pub fn classical_orbit(p: SchwarzschildParams, h: f64) -> Result<OrbitResult> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidAngularMomentum(h));
    }
    let rs = p.rs;
    let r = Expr::var(1);
    let v = num(h * h) * (num(1.0) - num(1.0) / r.clone()) / (r.clone() * r);
    let (unit, w2_unit) = maximize(&v, 1.0 + 1e-9, 20.0, 1e-13, "V_eff")?;
    let root = rescale(unit, rs, -3);
    let w2 = w2_unit / (rs * rs);
    let closed = 4.0 * h * h / (27.0 * rs * rs);
    let radius = match p.chart {
        Chart::Standard => root.root,
        Chart::Isotropic => rho_of_r(rs, root.root),
    };
    Ok(OrbitResult {
        chart: p.chart,
        radius,
        omega_sq_plus: w2,
        omega_sq_minus: w2,
        m_or_h: h,
        diagnostics: Diagnostics {
            residual: root.residual,
            iterations: root.iterations,
            bracket: Some(root.bracket),
            closed_form_deviation: Some((w2 - closed).abs().max((root.root - 1.5 * rs).abs())),
            discarded: vec![],
        },
    })
}

/// A root found in units of r_s, moved back to physical units. The residual is of a
/// derivative that scales as r_s^`residual_power`.
fn rescale(r: RootResult, rs: f64, residual_power: i32) -> RootResult {
    RootResult {
        root: r.root * rs,
        residual: r.residual * rs.powi(residual_power),
        iterations: r.iterations,
        bracket: [r.bracket[0] * rs, r.bracket[1] * rs],
    }
}

/// Characteristic-polynomial roots of a 3×3 complex matrix.
fn eigenvalues3(a: &Matrix3<C64>) -> [C64; 3] {
    let tr = a.trace();
    let minors = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)] + a[(0, 0)] * a[(2, 2)] - a[(0, 2)] * a[(2, 0)]
        + a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)];
    monic_cubic_roots(-tr, minors, -a.determinant())
}

/// ω² = m²(1 − r_s/r)/r² − ((2r − r_s)/2r²)².
pub fn standard_closed_form(rs: f64, m: f64, r: f64) -> f64 {
    m * m * (1.0 - rs / r) / (r * r) - ((2.0 * r - rs) / (2.0 * r * r)).powi(2)
}

/// Circular orbit from the 3×3 first-order system in standard coordinates: ω is an
/// eigenvalue of A = −i(1/r − r_s/2r²)τ₁ + (1 − r_s/r)^{1/2}(m/r)τ₃; the zero root is
/// the longitudinal solution and is discarded.
pub fn circular_orbit_standard(p: SchwarzschildParams, m: i64, r: Option<f64>) -> Result<OrbitResult> {
    let mf = m as f64;
    require_h(mf)?;
    let rs = p.rs;
    let r = r.unwrap_or(1.5 * rs);
    if !(r > rs) {
        return Err(Error::DomainViolation(format!("r = {r} must exceed r_s = {rs}")));
    }
    let tau = build_tau();
    let c = 1.0 / r - rs / (2.0 * r * r);
    let s = (1.0 - rs / r).sqrt() * mf / r;
    let a = tau[0] * (-I * c) + tau[2] * C64::from(s);
    let roots = eigenvalues3(&a);
    let scale = c.abs().max(s.abs());
    let mut diag = Diagnostics::default();
    let mut omega: Option<f64> = None;
    for z in roots {
        if z.norm() <= 1e-12 * scale {
            diag.discarded.push(format!("omega = {} (longitudinal)", fmt_f64(z.norm())));
        } else if z.im.abs() > 1e-9 * scale {
            diag.discarded.push(format!("omega = {}{:+}i (complex)", fmt_f64(z.re), z.im));
        } else if z.re < 0.0 {
            diag.discarded.push(format!("omega = {} (negative frequency)", fmt_f64(z.re)));
        } else {
            omega = Some(z.re);
        }
    }
    let w = omega.ok_or_else(|| {
        Error::DomainViolation(format!("no positive-frequency circular solution at r = {r} (closed form ω² = {})", standard_closed_form(rs, mf, r)))
    })?;
    let det = (a - Matrix3::identity() * C64::from(w)).determinant().norm();
    let w2 = w * w;
    diag.residual = det;
    diag.closed_form_deviation = Some((w2 - standard_closed_form(rs, mf, r)).abs());
    let radius = match p.chart {
        Chart::Standard => r,
        Chart::Isotropic => rho_of_r(rs, r),
    };
    Ok(OrbitResult { chart: p.chart, radius, omega_sq_plus: w2, omega_sq_minus: w2, m_or_h: mf, diagnostics: diag })
}

/// Spin-averaged extremal radius: maximum over r of (h² − 1)(1 − r_s/r)/r² − r_s²/4r⁴,
/// with the closed form 3r_s/4 + r_s√(9(h²−1)² + 8(h²−1))/(4(h²−1)).
pub fn spin_averaged_radius(rs: f64, h: f64) -> Result<(RootResult, f64)> {
    SchwarzschildParams::new(rs, Chart::Standard)?;
    require_h(h)?;
    let r = Expr::var(1);
    let w2 = num(h * h - 1.0) * (num(1.0) - num(1.0) / r.clone()) / r.clone().powf(2.0) - num(0.25) / r.powf(4.0);
    let (root, _) = maximize(&w2, 1.0 + 1e-9, 20.0, 1e-13, "spin-averaged ω²")?;
    let k = h * h - 1.0;
    Ok((rescale(root, rs, -3), (0.75 + (9.0 * k * k + 8.0 * k).sqrt() / (4.0 * k)) * rs))
}

/// (η, A_ρ) at ρ: η = (1 + x)³/(1 − x), A_ρ = −(r_s/8ρ²)[3/(1 + x) + 1/(1 − x)], x = r_s/4ρ.
pub fn isotropic_eta_a(rs: f64, rho: f64) -> (f64, f64) {
    let x = rs / (4.0 * rho);
    ((1.0 + x).powi(3) / (1.0 - x), -rs / (8.0 * rho * rho) * (3.0 / (1.0 + x) + 1.0 / (1.0 - x)))
}

/// Closed-form split levels ω² = m²/(η²ρ²) ± 2mA_ρ/(η²ρ) (sign as written).
pub fn isotropic_closed_form(rs: f64, m: f64, rho: f64) -> (f64, f64) {
    let (eta, a) = isotropic_eta_a(rs, rho);
    let base = m * m / (eta * eta * rho * rho);
    let so = 2.0 * m * a / (eta * eta * rho);
    (base + so, base - so)
}

/// Circular orbit in isotropic coordinates. (2mρ⁻¹A_ρτ₃ + η²ω² − m²ρ⁻²)ζ = 0 is solved
/// on each eigenvector of τ₃; λ = 0 is the longitudinal solution (discarded).
/// `omega_sq_plus` is the τ₃ = +1 level (spin projection +1), the larger one because A_ρ < 0.
pub fn circular_orbit_isotropic(p: SchwarzschildParams, m: i64, rho: Option<f64>) -> Result<OrbitResult> {
    let mf = m as f64;
    require_h(mf)?;
    let rs = p.rs;
    let rho = rho.unwrap_or_else(|| photon_sphere_rho(rs));
    if !(rho > rs / 4.0) {
        return Err(Error::DomainViolation(format!("rho = {rho} must exceed r_s/4 = {}", rs / 4.0)));
    }
    let (eta, a) = isotropic_eta_a(rs, rho);
    let tau3 = build_tau()[2];
    let mut diag = Diagnostics::default();
    let (mut plus, mut minus) = (None, None);
    for lam in eigenvalues3(&tau3) {
        let level = (mf * mf / (rho * rho) - 2.0 * mf * a * lam.re / rho) / (eta * eta);
        if lam.norm() < 1e-12 {
            diag.discarded.push(format!("eta^2 omega^2 = m^2/rho^2 = {} (longitudinal)", fmt_f64(level * eta * eta)));
        } else if lam.re > 0.0 {
            plus = Some(level);
        } else {
            minus = Some(level);
        }
    }
    let (plus, minus) = plus.zip(minus).ok_or_else(|| Error::DomainViolation("tau_3 spectrum degenerate".into()))?;
    if !(plus > 0.0 && minus > 0.0) {
        return Err(Error::DomainViolation(format!("non-positive level at rho = {rho}: omega^2 = ({plus}, {minus})")));
    }
    let (cf_p, cf_m) = isotropic_closed_form(rs, mf, rho);
    // the written "+" sign is the τ₃ = −1 level
    diag.closed_form_deviation = Some((plus - cf_m).abs().max((minus - cf_p).abs()));
    let radius = match p.chart {
        Chart::Isotropic => rho,
        Chart::Standard => r_of_rho(rs, rho),
    };
    Ok(OrbitResult { chart: p.chart, radius, omega_sq_plus: plus, omega_sq_minus: minus, m_or_h: mf, diagnostics: diag })
}

/// ω±²(ρ) effective-potential curves, `sign` = +1 for the "+" curve.
pub fn split_potential(rs: f64, h: f64, sign: f64) -> Expr {
    let rho = Expr::var(1);
    let x = num(rs / 4.0) / rho.clone();
    let pref = num(h) * (num(1.0) - x.clone()).powf(2.0) / (rho.clone().powf(2.0) * (num(1.0) + x).powf(6.0));
    let so = num(3.0 * rs) / (num(4.0) * rho.clone() + num(rs)) + num(rs) / (num(4.0) * rho - num(rs));
    pref * (num(h) - num(sign) * so)
}

/// Uncorrected curve h²/(η²ρ²).
pub fn unsplit_potential(rs: f64, h: f64) -> Expr {
    let rho = Expr::var(1);
    let x = num(rs / 4.0) / rho.clone();
    num(h * h) * (num(1.0) - x.clone()).powf(2.0) / (rho.powf(2.0) * (num(1.0) + x).powf(6.0))
}

pub fn eval_rho(e: &Expr, rho: f64) -> f64 {
    e.eval_real(&[0.0, rho, 0.0, 0.0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitRadii {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub rho_zero: f64,
    /// (2 + √3)r_s/4.
    pub rho_zero_closed: f64,
    pub plus: RootResult,
    pub minus: RootResult,
    pub zero: RootResult,
}

/// Stationary points of ω±²(ρ) on (r_s/4, 20r_s], plus the uncorrected ρ₀.
/// Solved in units of r_s, so every radius scales exactly with r_s.
pub fn helicity_split_radii(rs: f64, h: f64) -> Result<SplitRadii> {
    SchwarzschildParams::new(rs, Chart::Isotropic)?;
    require_h(h)?;
    let lo = 0.25 * (1.0 + 1e-9);
    let hi = 20.0;
    let xtol = 1e-12;
    let (plus, _) = maximize(&split_potential(1.0, h, 1.0), lo, hi, xtol, "omega_+^2")?;
    let (minus, _) = maximize(&split_potential(1.0, h, -1.0), lo, hi, xtol, "omega_-^2")?;
    let (zero, _) = maximize(&unsplit_potential(1.0, h), lo, hi, xtol, "h^2/(eta rho)^2")?;
    let (plus, minus, zero) = (rescale(plus, rs, -3), rescale(minus, rs, -3), rescale(zero, rs, -3));
    let out = SplitRadii {
        rho_plus: plus.root,
        rho_minus: minus.root,
        rho_zero: zero.root,
        rho_zero_closed: photon_sphere_rho(rs),
        plus,
        minus,
        zero,
    };
    if !(out.rho_plus > out.rho_zero && out.rho_zero > out.rho_minus) {
        return Err(Error::DomainViolation(format!(
            "radius ordering rho_+ > rho_0 > rho_- violated: {} {} {}",
            out.rho_plus, out.rho_zero, out.rho_minus
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub rho: f64,
    pub omega_sq_plus: f64,
    pub omega_sq_minus: f64,
    pub v_eff: f64,
}

/// Samples of ω±²(ρ) and V_eff(r(ρ)) on n points of [lo, hi].
pub fn potential_scan(rs: f64, h: f64, lo: f64, hi: f64, n: usize) -> Result<Vec<ScanRow>> {
    if !(lo > rs / 4.0) || !(hi > lo) || n < 2 {
        return Err(Error::DomainViolation(format!("scan range [{lo}, {hi}] with {n} points is outside rho > r_s/4")));
    }
    let (p, m) = (split_potential(rs, h, 1.0), split_potential(rs, h, -1.0));
    Ok((0..n)
        .map(|i| {
            let rho = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            ScanRow { rho, omega_sq_plus: eval_rho(&p, rho), omega_sq_minus: eval_rho(&m, rho), v_eff: v_eff(rs, h, r_of_rho(rs, rho)) }
        })
        .collect())
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut s = String::from("rho,omega_sq_plus,omega_sq_minus\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", fmt_f64(r.rho), fmt_f64(r.omega_sq_plus), fmt_f64(r.omega_sq_minus)));
    }
    s
}

/// Printed stationarity polynomials for r_s = 1, h = 2.
pub const PLUS_POLY: [f64; 4] = [64.0, -112.0, 40.0, -3.0];
pub const MINUS_POLY: [f64; 5] = [128.0, -32.0, -80.0, 22.0, -1.0];

/// Orbit regressions, closed-form agreement, connection oracle and operator forms.
pub fn gravity_suite(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let std1 = SchwarzschildParams::new(1.0, Chart::Standard)?;
    let iso1 = SchwarzschildParams::new(1.0, Chart::Isotropic)?;

    let radii = helicity_split_radii(1.0, 2.0)?;
    out.push(Check::new("rho_zero", (radii.rho_zero - radii.rho_zero_closed).abs(), 1e-12));
    out.push(Check::new("rho_plus", (radii.rho_plus - 1.295).abs(), 1e-3));
    out.push(Check::new("rho_minus", (radii.rho_minus - 0.783).abs(), 1e-3));
    out.push(Check::new("rho_plus_polynomial", poly_eval(&PLUS_POLY, radii.rho_plus).abs(), 1e-9));
    out.push(Check::new("rho_minus_polynomial", poly_eval(&MINUS_POLY, radii.rho_minus).abs(), 1e-9));

    let iso = circular_orbit_isotropic(iso1, 2, None)?;
    out.push(Check::new("isotropic_omega_sq_plus", (iso.omega_sq_plus - 8.0 / 9.0).abs(), 1e-12));
    out.push(Check::new("isotropic_omega_sq_minus", (iso.omega_sq_minus - 8.0 / 27.0).abs(), 1e-12));
    let st = circular_orbit_standard(std1, 2, None)?;
    out.push(Check::new("standard_omega_sq_photon_sphere", (st.omega_sq_plus - 32.0 / 81.0).abs(), 1e-12));
    let cl = classical_orbit(std1, 2.0)?;
    out.push(Check::new("classical_omega_sq", (cl.omega_sq_plus - 16.0 / 27.0).abs(), 1e-12));
    out.push(Check::new("classical_radius", (cl.radius - 1.5).abs(), 1e-12));

    let mut worst = 0.0f64;
    for i in 0..10 {
        for m in 2..7 {
            let r = 1.2 + 0.5 * i as f64;
            let o = circular_orbit_standard(std1, m, Some(r))?;
            worst = worst.max(o.diagnostics.closed_form_deviation.unwrap_or(f64::NAN));
        }
    }
    out.push(Check::new("determinant_roots_vs_closed_form", worst, 1e-12));

    let rho0 = photon_sphere_rho(1.0);
    let (eta, a) = isotropic_eta_a(1.0, rho0);
    out.push(Check::new("photon_sphere_eta", (eta - (12.0 * 3f64.sqrt() - 18.0)).abs(), 1e-13));
    out.push(Check::new("photon_sphere_a_rho", (a + 2.0 * (2.0 - 3f64.sqrt())).abs(), 1e-13));
    let (cp, cm) = isotropic_closed_form(1.0, 2.0, rho0);
    out.push(Check::new("split_levels_closed_form", (cp - 8.0 / 27.0).abs().max((cm - 8.0 / 9.0).abs()), 1e-13));
    out.push(Check::new("photon_sphere_coordinate_map", (r_of_rho(1.0, rho0) - 1.5).abs(), 1e-15));

    let (sr, closed) = spin_averaged_radius(1.0, 2.0)?;
    out.push(Check::new("spin_averaged_radius", (sr.root - closed).abs().max((closed - (0.75 + 105f64.sqrt() / 12.0)).abs()), 1e-12));

    // scaling: radii ∝ r_s, ω² ∝ r_s⁻²
    let mut sdev = 0.0f64;
    for rs in [2.0, 10.0] {
        let r = helicity_split_radii(rs, 2.0)?;
        sdev = sdev.max((r.rho_plus / rs - radii.rho_plus).abs()).max((r.rho_minus / rs - radii.rho_minus).abs());
        let o = circular_orbit_isotropic(SchwarzschildParams::new(rs, Chart::Isotropic)?, 2, None)?;
        sdev = sdev.max((o.omega_sq_plus * rs * rs - 8.0 / 9.0).abs());
    }
    out.push(Check::new("scaling_law", sdev, 1e-11));

    // strict splitting everywhere in the scanned domain; flat limit at large ρ
    let rows = potential_scan(1.0, 2.0, 0.26, 50.0, 400)?;
    let degenerate = rows
        .iter()
        .filter(|r| (r.omega_sq_plus - r.omega_sq_minus).abs() <= 1e-12 * r.omega_sq_plus.abs().max(r.omega_sq_minus.abs()))
        .count();
    out.push(Check::new("strict_splitting_degenerate_points", degenerate as f64, 0.5));
    // ρ²ω±² → h² with an O(r_s/ρ) correction
    let far = 1e6;
    let flat = [1.0, -1.0].iter().map(|s| (eval_rho(&split_potential(1.0, 2.0, *s), far) * far * far - 4.0).abs()).fold(0.0, f64::max);
    out.push(Check::new("flat_space_limit", flat, 1e-4));

    let (std_pts, iso_pts) = chart_points(1.0, 100, seed);
    out.push(Check::new("connection_oracle[standard]", connection_oracle_deviation(&DiagonalMetric::schwarzschild_standard(1.0), &std_pts)?, 1e-11));
    out.push(Check::new("connection_oracle[isotropic]", connection_oracle_deviation(&DiagonalMetric::schwarzschild_isotropic(1.0), &iso_pts)?, 1e-11));
    out.extend(operator_checks(1.0, seed, 8)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_connection_vanishes() {
        let c = connection_coefficients(&DiagonalMetric::minkowski(), [0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(c.c.iter().flatten().flatten().chain(c.gamma.iter().flatten().flatten()).all(|x| *x == 0.0));
    }

    #[test]
    fn standard_c010_matches_hand_derivative() {
        // a₀ = √(1 − 1/r), a₁ = 1/a₀ ⇒ C₀₁₀ = −a₁⁻¹∂_r ln a₀ = −a₀·(1/(2r²(1 − 1/r)))
        let r = 2.0;
        let c = connection_coefficients(&DiagonalMetric::schwarzschild_standard(1.0), [0.0, r, std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        let a0 = (1.0 - 1.0 / r).sqrt();
        let want = -a0 / (2.0 * r * r * (1.0 - 1.0 / r));
        assert!((c.c[0][1][0] - want).abs() < 1e-15);
        assert_eq!(c.c[1][0][0], -c.c[0][1][0]);
    }

    #[test]
    fn gamma_antisymmetric() {
        let c = connection_coefficients(&DiagonalMetric::schwarzschild_isotropic(1.0), [0.0, 0.6, -0.3, 0.5]).unwrap();
        for k in 0..4 {
            for l in 0..4 {
                for m in 0..4 {
                    assert!((c.gamma[k][l][m] + c.gamma[l][k][m]).abs() < 1e-15);
                    assert!((c.c[k][l][m] + c.c[l][k][m]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn oracle_at_isotropic_rho_equals_rs() {
        let d = connection_oracle_deviation(&DiagonalMetric::schwarzschild_isotropic(1.0), &[[0.0, 0.6, 0.0, 0.8]]).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn domain_violation_inside_horizon() {
        let g = DiagonalMetric::schwarzschild_standard(1.0);
        assert!(matches!(connection_coefficients(&g, [0.0, 0.5, 1.0, 0.0]), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn classical_examples() {
        for rs in [1.0, 3.0] {
            let o = classical_orbit(SchwarzschildParams::new(rs, Chart::Standard).unwrap(), 2.0).unwrap();
            assert!((o.radius - 1.5 * rs).abs() < 1e-12);
        }
        let o = classical_orbit(SchwarzschildParams::new(1.0, Chart::Standard).unwrap(), 2.0).unwrap();
        assert!((o.omega_sq_plus - 16.0 / 27.0).abs() < 1e-14);
        // single maximum: second derivative negative
        let h = 1e-4;
        let d2 = (v_eff(1.0, 2.0, 1.5 + h) - 2.0 * v_eff(1.0, 2.0, 1.5) + v_eff(1.0, 2.0, 1.5 - h)) / (h * h);
        assert!(d2 < 0.0);
        assert_eq!(shape_rhs(1.0, 2.0 / 3.0), 2.0 / 3.0);
    }

    #[test]
    fn standard_orbit_examples() {
        let p = SchwarzschildParams::new(1.0, Chart::Standard).unwrap();
        let o = circular_orbit_standard(p, 2, None).unwrap();
        assert!((o.omega_sq_plus - 32.0 / 81.0).abs() < 1e-14);
        assert_eq!(o.diagnostics.discarded.len(), 2, "{:?}", o.diagnostics);
        assert!(matches!(circular_orbit_standard(p, 1, None), Err(Error::InvalidAngularMomentum(_))));
        assert!(matches!(circular_orbit_standard(p, 2, Some(0.9)), Err(Error::DomainViolation(_))));
        let (r, closed) = spin_averaged_radius(1.0, 2.0).unwrap();
        assert!((r.root - (0.75 + 105f64.sqrt() / 12.0)).abs() < 1e-12 && (r.root - closed).abs() < 1e-12, "{r:?} {closed}");
    }

    #[test]
    fn isotropic_orbit_examples() {
        let p = SchwarzschildParams::new(1.0, Chart::Isotropic).unwrap();
        let o = circular_orbit_isotropic(p, 2, None).unwrap();
        assert!((o.radius - (2.0 + 3f64.sqrt()) / 4.0).abs() < 1e-15);
        assert!((o.omega_sq_plus - 8.0 / 9.0).abs() < 1e-13 && (o.omega_sq_minus - 8.0 / 27.0).abs() < 1e-13);
        assert!(o.diagnostics.closed_form_deviation.unwrap() < 1e-15);
        assert!(o.diagnostics.discarded[0].contains("longitudinal"));
    }

    #[test]
    fn split_radii_regression() {
        let r = helicity_split_radii(1.0, 2.0).unwrap();
        assert!((r.rho_zero - r.rho_zero_closed).abs() < 1e-12);
        assert!((r.rho_plus - 1.295).abs() < 1e-3 && (r.rho_minus - 0.783).abs() < 1e-3);
        assert!(poly_eval(&PLUS_POLY, r.rho_plus).abs() < 1e-9);
        assert!(poly_eval(&MINUS_POLY, r.rho_minus).abs() < 1e-9);
        assert!(matches!(helicity_split_radii(1.0, 1.5), Err(Error::InvalidAngularMomentum(_))));
    }

    #[test]
    fn scan_csv_header() {
        let rows = potential_scan(1.0, 2.0, 0.5, 3.0, 5).unwrap();
        let csv = scan_csv(&rows);
        assert!(csv.starts_with("rho,omega_sq_plus,omega_sq_minus\n"));
        assert_eq!(csv.lines().count(), 6);
        assert!(potential_scan(1.0, 2.0, 0.2, 3.0, 5).is_err());
    }

    #[test]
    fn suite_passes() {
        for c in gravity_suite(11).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }
}
