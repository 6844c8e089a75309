//! Dirac-like operator in a linear, isotropic, inhomogeneous medium.
//!
//! Profiles ε_r, μ_r are expressions in (t, x1, x2, x3); every derivative the
//! operator identities need is taken symbolically, so the identity checks are
//! limited by round-off only. The time slot of ∂_ν is ∂₀ = n∂_t.
//!
//! Connection (lower index): χ_ν = (−∂₀ ln√ε_r, ∇ ln√ε_r), η_ν likewise with μ_r,
//! φ_ν = diag(χ_ν I₃, η_ν I₃) in the standard layout and U φ_ν U in the chiral one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{basis_change, levi_civita, Mat6, MatrixSet, Representation, Spinor, C64};
use crate::error::{Error, Result};
use crate::expr::{add6, apply, eval6, scale6, sub6, sum6, zero6, Expr, SpinorExpr};
use crate::field::{e_h_of, spatial_gradient, SpinorGridField};
use crate::report::Check;

const I: C64 = C64::new(0.0, 1.0);

/// Default ratio bound for the slowly-varying envelope conditions.
pub const SVEA_THRESHOLD: f64 = 0.01;

/// Tolerance for the analytic operator identities.
pub const IDENTITY_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProfileSpec {
    pub eps_r: String,
    pub mu_r: String,
}

#[derive(Debug, Clone)]
pub struct MediumProfile {
    pub spec: ProfileSpec,
    pub eps_r: Expr,
    pub mu_r: Expr,
}

impl MediumProfile {
    pub fn parse(eps_r: &str, mu_r: &str) -> Result<Self> {
        Ok(MediumProfile {
            spec: ProfileSpec { eps_r: eps_r.into(), mu_r: mu_r.into() },
            eps_r: Expr::parse(eps_r)?,
            mu_r: Expr::parse(mu_r)?,
        })
    }

    /// `{"eps_r": "...", "mu_r": "..."}`.
    pub fn from_json(src: &str) -> Result<Self> {
        let spec: ProfileSpec = serde_json::from_str(src).map_err(|e| Error::Parse(format!("medium profile: {e}")))?;
        MediumProfile::parse(&spec.eps_r, &spec.mu_r)
    }

    pub fn homogeneous(eps_r: f64, mu_r: f64) -> Result<Self> {
        let p = MediumProfile::parse(&format!("{eps_r:?}"), &format!("{mu_r:?}"))?;
        p.values_at([0.0; 4])?;
        Ok(p)
    }

    /// (ε_r, μ_r) at a spacetime point, rejecting non-positive or non-finite values.
    pub fn values_at(&self, at: [f64; 4]) -> Result<(f64, f64)> {
        let e = self.eps_r.eval(&at);
        let m = self.mu_r.eval(&at);
        for (what, v) in [("eps_r", e), ("mu_r", m)] {
            if !(v.re > 0.0) || v.im != 0.0 || !v.re.is_finite() {
                return Err(Error::NonPositiveMedium { what, value: v.re, at });
            }
        }
        Ok((e.re, m.re))
    }

    pub fn is_homogeneous(&self) -> bool {
        self.eps_r.is_constant() && self.mu_r.is_constant()
    }

    pub fn symbols(&self) -> MediumSymbols {
        MediumSymbols::new(self)
    }
}

/// Symbolic n, ln√ε_r, ln√μ_r and the lower-index connection components.
#[derive(Debug, Clone)]
pub struct MediumSymbols {
    pub n: Expr,
    pub ln_sqrt_eps: Expr,
    pub ln_sqrt_mu: Expr,
    pub chi: [Expr; 4],
    pub eta: [Expr; 4],
    pub grad_ln_n: [Expr; 3],
}

impl MediumSymbols {
    fn new(p: &MediumProfile) -> Self {
        let n = (p.eps_r.clone() * p.mu_r.clone()).sqrt();
        let le = p.eps_r.clone().ln() * Expr::num(0.5);
        let lm = p.mu_r.clone().ln() * Expr::num(0.5);
        let ln_n = le.clone() + lm.clone();
        let d0 = |f: &Expr| n.clone() * f.diff(0);
        let chi = [-d0(&le), le.diff(1), le.diff(2), le.diff(3)];
        let eta = [-d0(&lm), lm.diff(1), lm.diff(2), lm.diff(3)];
        let grad_ln_n = [ln_n.diff(1), ln_n.diff(2), ln_n.diff(3)];
        MediumSymbols { n, ln_sqrt_eps: le, ln_sqrt_mu: lm, chi, eta, grad_ln_n }
    }

    /// ∂_μ with ∂₀ = n∂_t.
    pub fn d(&self, mu: usize, f: &Expr) -> Expr {
        if mu == 0 {
            self.n.clone() * f.diff(0)
        } else {
            f.diff(mu)
        }
    }
}

/// The connection sampled at one spacetime point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediumConnection {
    pub n: f64,
    /// χ^ν (upper index).
    pub chi_upper: [f64; 4],
    pub eta_upper: [f64; 4],
    pub chi_lower: [f64; 4],
    pub eta_lower: [f64; 4],
    pub grad_ln_n: [f64; 3],
    /// max_l |∂_l ln n − χ_l − η_l|.
    pub gradient_identity: f64,
}

impl MediumConnection {
    /// φ_ν as a 6×6 matrix in the given layout.
    pub fn phi(&self, nu: usize, rep: Representation) -> Mat6 {
        phi_matrix(self.chi_lower[nu], self.eta_lower[nu], rep)
    }
}

pub fn phi_matrix(chi: f64, eta: f64, rep: Representation) -> Mat6 {
    let s = Mat6::from_fn(|r, c| if r != c { C64::default() } else if r < 3 { C64::from(chi) } else { C64::from(eta) });
    match rep {
        Representation::Standard => s,
        Representation::Chiral => {
            let u = basis_change();
            u * s * u
        }
    }
}

pub fn medium_connection(profile: &MediumProfile, at: [f64; 4]) -> Result<MediumConnection> {
    profile.values_at(at)?;
    medium_connection_with(&profile.symbols(), at)
}

fn medium_connection_with(s: &MediumSymbols, at: [f64; 4]) -> Result<MediumConnection> {
    let ev = |e: &Expr| e.eval_real(&at);
    let chi_lower = s.chi.clone().map(|e| ev(&e));
    let eta_lower = s.eta.clone().map(|e| ev(&e));
    let grad_ln_n = s.grad_ln_n.clone().map(|e| ev(&e));
    let upper = |v: [f64; 4]| [-v[0], v[1], v[2], v[3]];
    let gradient_identity = (0..3).map(|l| (grad_ln_n[l] - chi_lower[l + 1] - eta_lower[l + 1]).abs()).fold(0.0, f64::max);
    let out = MediumConnection {
        n: ev(&s.n),
        chi_upper: upper(chi_lower),
        eta_upper: upper(eta_lower),
        chi_lower,
        eta_lower,
        grad_ln_n,
        gradient_identity,
    };
    if !out.chi_lower.iter().chain(&out.eta_lower).chain([&out.n]).all(|x| x.is_finite()) {
        return Err(Error::NonFinite(format!("medium connection at {at:?}")));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediumResidual {
    /// max-norm of i(β⁰β^ν)(∂_ν − φ_ν)ψ, i.e. the equation multiplied through by β⁰.
    pub dirac: f64,
    /// max |(∇ + χ)·(√ε E)|.
    pub constraint_e: f64,
    /// max |(∇ + η)·(√μ H)|.
    pub constraint_h: f64,
}

/// Pointwise residual i[(n∂_t − φ₀)ψ + α^l(∂_l − φ_l)ψ] for ψ built from (√ε E, √μ H).
/// Multiplying the medium equation through by β⁰ (unitary) makes the homogeneous case
/// literally the vacuum residual with ∂_t replaced by n∂_t.
pub fn medium_residual_field(
    field: &SpinorGridField,
    dt: &SpinorGridField,
    profile: &MediumProfile,
) -> Result<(Vec<Spinor>, Vec<MediumConnection>)> {
    if !field.grid.same_as(&dt.grid) || field.rep != dt.rep || field.values.len() != dt.values.len() {
        return Err(Error::GridMismatch("field and time derivative grids differ".into()));
    }
    let grad = spatial_gradient(field)?;
    let sym = profile.symbols();
    let g = field.grid;
    let conns: Vec<MediumConnection> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let x = g.coords(i);
            let at = [field.time, x[0], x[1], x[2]];
            profile.values_at(at)?;
            medium_connection_with(&sym, at)
        })
        .collect::<Result<_>>()?;
    let m = MatrixSet::new(field.rep);
    let res = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let c = &conns[i];
            let p = field.values[i];
            let mut r = dt.values[i] * C64::from(c.n) - c.phi(0, field.rep) * p;
            for l in 0..3 {
                r += m.alpha[l] * (grad[l][i] - c.phi(l + 1, field.rep) * p);
            }
            r * I
        })
        .collect();
    Ok((res, conns))
}

pub fn medium_dirac_residual(
    field: &SpinorGridField,
    dt: &SpinorGridField,
    profile: &MediumProfile,
) -> Result<MediumResidual> {
    let (res, conns) = medium_residual_field(field, dt, profile)?;
    let grad = spatial_gradient(field)?;
    let (mut ce, mut ch) = (0.0f64, 0.0f64);
    for (i, c) in conns.iter().enumerate() {
        let (e, h) = e_h_of(&field.values[i], field.rep);
        let (mut se, mut sh) = (C64::default(), C64::default());
        for a in 0..3 {
            let (ge, gh) = e_h_of(&grad[a][i], field.rep);
            se += ge[a] + e[a] * c.chi_lower[a + 1];
            sh += gh[a] + h[a] * c.eta_lower[a + 1];
        }
        ce = ce.max(se.norm());
        ch = ch.max(sh.norm());
    }
    Ok(MediumResidual {
        dirac: res.iter().map(|v| v.camax()).fold(0.0, f64::max),
        constraint_e: ce,
        constraint_h: ch,
    })
}

// Symbolic operators on six-component expression spinors (standard layout).

/// Operators built from a profile, acting on expression spinors.
pub struct MediumOperators {
    pub sym: MediumSymbols,
    m: MatrixSet,
}

impl MediumOperators {
    pub fn new(profile: &MediumProfile) -> Self {
        MediumOperators { sym: profile.symbols(), m: MatrixSet::new(Representation::Standard) }
    }

    fn d(&self, mu: usize, v: &SpinorExpr) -> SpinorExpr {
        std::array::from_fn(|r| self.sym.d(mu, &v[r]))
    }

    /// Multiplication by φ_μ.
    fn phi(&self, mu: usize, v: &SpinorExpr) -> SpinorExpr {
        std::array::from_fn(|r| if r < 3 { self.sym.chi[mu].clone() } else { self.sym.eta[mu].clone() } * v[r].clone())
    }

    /// Multiplication by the function ∂₀φ_l.
    fn d0_phi(&self, l: usize, v: &SpinorExpr) -> SpinorExpr {
        let c = self.sym.d(0, &self.sym.chi[l]);
        let e = self.sym.d(0, &self.sym.eta[l]);
        std::array::from_fn(|r| if r < 3 { c.clone() } else { e.clone() } * v[r].clone())
    }

    pub fn cov(&self, mu: usize, v: &SpinorExpr) -> SpinorExpr {
        sub6(&self.d(mu, v), &self.phi(mu, v))
    }

    /// β^ν D_ν.
    pub fn dirac(&self, v: &SpinorExpr) -> SpinorExpr {
        sum6((0..4).map(|mu| apply(&self.m.beta[mu], &self.cov(mu, v))))
    }

    /// D_μβ^μ as the composition w ↦ Σ_μ (∂_μ − φ_μ)(β^μ w).
    pub fn dirac_left(&self, w: &SpinorExpr) -> SpinorExpr {
        sum6((0..4).map(|mu| self.cov(mu, &apply(&self.m.beta[mu], w))))
    }

    /// (D·β)(β·D), the spatial part of the square.
    pub fn spatial_square(&self, v: &SpinorExpr) -> SpinorExpr {
        let w = sum6((1..4).map(|l| apply(&self.m.beta[l], &self.cov(l, v))));
        sum6((1..4).map(|l| self.cov(l, &apply(&self.m.beta[l], &w))))
    }

    pub fn laplacian(&self, v: &SpinorExpr) -> SpinorExpr {
        sum6((1..4).map(|l| self.d(l, &self.d(l, v))))
    }

    /// ∂^μ∂_μ = −∂₀∂₀ + ∇².
    pub fn box_op(&self, v: &SpinorExpr) -> SpinorExpr {
        sub6(&self.laplacian(v), &self.d(0, &self.d(0, v)))
    }

    /// φ^μφ_μ.
    pub fn phi_phi(&self, v: &SpinorExpr) -> SpinorExpr {
        sub6(&sum6((1..4).map(|l| self.phi(l, &self.phi(l, v)))), &self.phi(0, &self.phi(0, v)))
    }

    /// φ^μ∂_μ.
    pub fn phi_d(&self, v: &SpinorExpr) -> SpinorExpr {
        sub6(&sum6((1..4).map(|l| self.phi(l, &self.d(l, v)))), &self.phi(0, &self.d(0, v)))
    }

    /// ∂^μ∘φ_μ (derivative of the product).
    pub fn d_phi(&self, v: &SpinorExpr) -> SpinorExpr {
        sub6(&sum6((1..4).map(|l| self.d(l, &self.phi(l, v)))), &self.d(0, &self.phi(0, v)))
    }

    /// Ω = diag(XXᵀ, YYᵀ) with X_j = ∂_j − χ_j, Y_j = ∂_j − η_j.
    pub fn omega(&self, v: &SpinorExpr) -> SpinorExpr {
        let x = |j: usize, f: &Expr, c: &[Expr; 4]| self.sym.d(j + 1, f) - c[j + 1].clone() * f.clone();
        let se = (0..3).fold(Expr::num(0.0), |acc, k| acc + x(k, &v[k], &self.sym.chi));
        let sh = (0..3).fold(Expr::num(0.0), |acc, k| acc + x(k, &v[k + 3], &self.sym.eta));
        std::array::from_fn(|r| if r < 3 { x(r, &se, &self.sym.chi) } else { x(r - 3, &sh, &self.sym.eta) })
    }

    /// Σ·(φ × ∇).
    pub fn sigma_phi_cross_grad(&self, v: &SpinorExpr) -> SpinorExpr {
        let mut out = zero6();
        for n in 0..3 {
            for l in 0..3 {
                for k in 0..3 {
                    let e = levi_civita(n, l, k);
                    if e != 0.0 {
                        let t = apply(&self.m.sigma[n], &self.phi(l + 1, &self.d(k + 1, v)));
                        out = add6(&out, &scale6(&Expr::num(e), &t));
                    }
                }
            }
        }
        out
    }

    /// α·[(∇ ln n)∂₀ + 2(∂₀φ) − (∇ ln n)φ₀].
    pub fn alpha_line(&self, v: &SpinorExpr) -> SpinorExpr {
        sum6((0..3).map(|l| {
            let g = &self.sym.grad_ln_n[l];
            let inner = add6(
                &sub6(&scale6(g, &self.d(0, v)), &scale6(g, &self.phi(0, v))),
                &scale6(&Expr::num(2.0), &self.d0_phi(l + 1, v)),
            );
            apply(&self.m.alpha[l], &inner)
        }))
    }

    /// Σ_l β^l[(χ_l − η_l)∂₀ − (χ₀ − η₀)∂_l − (η₀χ_l − η_lχ₀)].
    pub fn chi_eta_line(&self, v: &SpinorExpr) -> SpinorExpr {
        let s = &self.sym;
        let d0 = s.chi[0].clone() - s.eta[0].clone();
        sum6((1..4).map(|l| {
            let dl = s.chi[l].clone() - s.eta[l].clone();
            let cross = s.eta[0].clone() * s.chi[l].clone() - s.eta[l].clone() * s.chi[0].clone();
            let inner = sub6(&sub6(&scale6(&dl, &self.d(0, v)), &scale6(&d0, &self.d(l, v))), &scale6(&cross, v));
            apply(&self.m.beta[l], &inner)
        }))
    }

    /// (χ_μ − η_μ)β^μ D₀ as printed.
    pub fn printed_chi_eta_term(&self, v: &SpinorExpr) -> SpinorExpr {
        let d0v = self.cov(0, v);
        sum6((0..4).map(|mu| {
            let c = self.sym.chi[mu].clone() - self.sym.eta[mu].clone();
            scale6(&c, &apply(&self.m.beta[mu], &d0v))
        }))
    }

    /// D_l D₀ − D₀ D_l applied to v.
    pub fn covariant_commutator(&self, l: usize, v: &SpinorExpr) -> SpinorExpr {
        sub6(&self.cov(l, &self.cov(0, v)), &self.cov(0, &self.cov(l, v)))
    }

    /// (∇ ln n)_l∂₀ + 2(∂₀φ_l) − (∇ ln n)_lφ₀ applied to v.
    pub fn covariant_commutator_closed(&self, l: usize, v: &SpinorExpr) -> SpinorExpr {
        let g = &self.sym.grad_ln_n[l - 1];
        add6(
            &sub6(&scale6(g, &self.d(0, v)), &scale6(g, &self.phi(0, v))),
            &scale6(&Expr::num(2.0), &self.d0_phi(l, v)),
        )
    }

    /// The spin-tensor line of the expansion: −α·[…].
    pub fn spin_tensor_group(&self, v: &SpinorExpr) -> SpinorExpr {
        scale6(&Expr::num(-1.0), &self.alpha_line(v))
    }

    /// −∂^μ∂_μ − φ^μφ_μ + φ^μ∂_μ + ∂^μ∘φ_μ + Ω + (χ − η line).
    pub fn scalar_group(&self, v: &SpinorExpr) -> SpinorExpr {
        let a = sub6(&scale6(&Expr::num(-1.0), &self.box_op(v)), &self.phi_phi(v));
        let b = add6(&add6(&self.phi_d(v), &self.d_phi(v)), &self.omega(v));
        add6(&add6(&a, &b), &self.chi_eta_line(v))
    }

    /// The printed form: ∂^μ∂_μ − φ^μφ_μ + φ^μ∂_μ − ∂^μφ_μ + (χ_μ − η_μ)β^μD₀ + Ω
    /// + 2iΣ·(φ×∇) − α·[…].
    pub fn printed_expansion(&self, v: &SpinorExpr) -> SpinorExpr {
        let a = sub6(&self.box_op(v), &self.phi_phi(v));
        let b = sub6(&self.phi_d(v), &self.d_phi(v));
        let c = add6(&self.printed_chi_eta_term(v), &self.omega(v));
        let so = scale6(&Expr::complex(C64::new(0.0, 2.0)), &self.sigma_phi_cross_grad(v));
        sub6(&add6(&add6(&add6(&a, &b), &c), &so), &self.alpha_line(v))
    }
}

/// max over points of |a − b|, scaled by max(1, |a|).
fn deviation(a: &SpinorExpr, b: &SpinorExpr, points: &[[f64; 4]]) -> f64 {
    points
        .iter()
        .map(|p| {
            let (x, y) = (eval6(a, p), eval6(b, p));
            (x - y).camax() / x.camax().max(1.0)
        })
        .fold(0.0, |m: f64, d| if d.is_nan() { f64::NAN } else { m.max(d) })
}

fn magnitude(a: &SpinorExpr, points: &[[f64; 4]]) -> f64 {
    points.iter().map(|p| eval6(a, p).camax()).fold(0.0, f64::max)
}

/// Default inhomogeneous, time-dependent profile used by the identity battery.
pub fn default_test_profile() -> MediumProfile {
    MediumProfile::parse(
        "exp(2*(0.3*x1 + 0.2*sin(x2) + 0.1*t*x3))",
        "exp(2*(-0.2*x2 + cos(x1 + x3)/7 + 0.05*t*x1))",
    )
    .expect("built-in profile parses")
}

/// Default smooth test spinor (standard layout) and scalar test function.
pub fn default_test_fields() -> (SpinorExpr, Expr) {
    let src = [
        "sin(x1 + 2*x2 - t) + i*x3",
        "cos(x3)*exp(-i*t)",
        "x1*x2 + t",
        "exp(x2/3)*sin(t + x1)",
        "i*cos(x1*x3)",
        "x1 - x2*t",
    ];
    let v = src.map(|s| Expr::parse(s).expect("built-in field parses"));
    (v, Expr::parse("sin(x2)*exp(-i*1.7*t)").expect("built-in scalar parses"))
}

/// Reproducible sample points in [−1, 1]⁴.
pub fn sample_points(seed: u64, count: usize) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect()
}

/// Operator identities of the second-order reduction, each checked at `points` with
/// analytic derivatives. `field` is given in `rep`; the chiral layout is mapped to the
/// standard one by the unitary U, which leaves every deviation unchanged.
pub fn second_order_check(
    profile: &MediumProfile,
    field: &SpinorExpr,
    scalar: &Expr,
    rep: Representation,
    points: &[[f64; 4]],
) -> Result<Vec<Check>> {
    for p in points {
        profile.values_at(*p)?;
    }
    let psi = match rep {
        Representation::Standard => field.clone(),
        Representation::Chiral => apply(&basis_change(), field),
    };
    let ops = MediumOperators::new(profile);
    let s = &ops.sym;
    let tol = IDENTITY_TOL;
    let mut out = Vec::new();

    // (∇∂₀ − ∂₀∇)f = (∇ ln n)∂₀f
    let mut dev = 0.0f64;
    for l in 1..4 {
        let lhs = s.d(l, &s.d(0, scalar)) - s.d(0, &s.d(l, scalar));
        let rhs = s.grad_ln_n[l - 1].clone() * s.d(0, scalar);
        dev = dev.max(deviation(&[lhs, Expr::num(0.0), Expr::num(0.0), Expr::num(0.0), Expr::num(0.0), Expr::num(0.0)], &[rhs, Expr::num(0.0), Expr::num(0.0), Expr::num(0.0), Expr::num(0.0), Expr::num(0.0)], points));
    }
    out.push(Check::new("time_space_commutator", dev, tol));

    // (∂₀φ − ∇φ₀)f = [2(∂₀φ) − φ₀∇ + φ∂₀ − (∇ ln n)φ₀]f
    let f6: SpinorExpr = std::array::from_fn(|_| scalar.clone());
    let mut dev = 0.0f64;
    for l in 1..4 {
        let lhs = sub6(&ops.d(0, &ops.phi(l, &f6)), &ops.d(l, &ops.phi(0, &f6)));
        let g = &s.grad_ln_n[l - 1];
        let rhs = add6(
            &sub6(&scale6(&Expr::num(2.0), &ops.d0_phi(l, &f6)), &ops.phi(0, &ops.d(l, &f6))),
            &sub6(&ops.phi(l, &ops.d(0, &f6)), &scale6(g, &ops.phi(0, &f6))),
        );
        dev = dev.max(deviation(&lhs, &rhs, points));
    }
    out.push(Check::new("connection_time_space", dev, tol));

    let mut dev = 0.0f64;
    for l in 1..4 {
        dev = dev.max(deviation(&ops.covariant_commutator(l, &psi), &ops.covariant_commutator_closed(l, &psi), points));
    }
    out.push(Check::new("covariant_commutator", dev, tol));

    let sq = ops.spatial_square(&psi);
    let dot_phi = sum6((1..4).map(|l| ops.phi(l, &ops.phi(l, &psi))));
    let corrected = add6(
        &sub6(&scale6(&Expr::num(-1.0), &ops.laplacian(&psi)), &dot_phi),
        &add6(
            &sum6((1..4).map(|l| add6(&ops.phi(l, &ops.d(l, &psi)), &ops.d(l, &ops.phi(l, &psi))))),
            &ops.omega(&psi),
        ),
    );
    out.push(Check::new("spatial_square_expansion", deviation(&sq, &corrected, points), tol));
    let so = scale6(&Expr::complex(C64::new(0.0, 2.0)), &ops.sigma_phi_cross_grad(&psi));
    out.push(Check::info("spatial_square_printed_form_deviation", deviation(&sq, &add6(&corrected, &so), points)));

    let full = ops.dirac_left(&ops.dirac(&psi));
    let comm = sum6((1..4).map(|l| apply(&ops.m.alpha[l - 1], &ops.covariant_commutator(l, &psi))));
    let d0d0 = ops.cov(0, &ops.cov(0, &psi));
    let split = add6(&sub6(&add6(&d0d0, &sq), &comm), &ops.chi_eta_line(&psi));
    out.push(Check::new("square_time_space_split", deviation(&full, &split, points), tol));
    let printed_split = add6(&sub6(&add6(&d0d0, &sq), &comm), &ops.printed_chi_eta_term(&psi));
    out.push(Check::info("square_split_printed_form_deviation", deviation(&full, &printed_split, points)));

    let spin = ops.spin_tensor_group(&psi);
    let rest = ops.scalar_group(&psi);
    out.push(Check::new("second_order_expansion", deviation(&full, &add6(&spin, &rest), points), tol));
    out.push(Check::info("second_order_printed_form_deviation", deviation(&full, &ops.printed_expansion(&psi), points)));

    let worst_identity = points
        .iter()
        .map(|p| medium_connection_with(s, *p).map(|c| c.gradient_identity))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(Check::new("gradient_log_index", worst_identity, 1e-14));
    Ok(out)
}

/// Spin-orbit terms (α-line, χ−η line and Σ·(φ×∇)) on a profile, each as its max
/// magnitude over `points`; exactly zero when ε_r, μ_r are constant.
pub fn spin_orbit_terms(profile: &MediumProfile, field: &SpinorExpr, points: &[[f64; 4]]) -> [(&'static str, f64); 3] {
    let ops = MediumOperators::new(profile);
    [
        ("alpha_commutator_term", magnitude(&ops.alpha_line(field), points)),
        ("chi_eta_term", magnitude(&ops.chi_eta_line(field), points)),
        ("sigma_phi_cross_grad_term", magnitude(&ops.sigma_phi_cross_grad(field), points)),
    ]
}

pub fn spin_orbit_magnitude(profile: &MediumProfile, field: &SpinorExpr, points: &[[f64; 4]]) -> f64 {
    spin_orbit_terms(profile, field, points).iter().map(|t| t.1).fold(0.0, f64::max)
}

/// Identities on a user profile in both layouts, the spin-orbit terms as
/// informational rows, and for constant profiles the check that they vanish.
pub fn profile_checks(profile: &MediumProfile, seed: u64, count: usize) -> Result<Vec<Check>> {
    let points = sample_points(seed, count);
    let (psi, f) = default_test_fields();
    let mut out = Vec::new();
    for rep in [Representation::Standard, Representation::Chiral] {
        for c in second_order_check(profile, &psi, &f, rep, &points)? {
            let name = format!("{}[{}]", c.name, rep.name());
            out.push(c.renamed(name));
        }
    }
    let terms = spin_orbit_terms(profile, &psi, &points);
    for (name, v) in terms {
        out.push(Check::info(name, v));
    }
    if profile.is_homogeneous() {
        let worst = terms.iter().map(|t| t.1).fold(0.0, f64::max);
        out.push(Check::new("spin_orbit_vanishes_homogeneous", worst, f64::MIN_POSITIVE));
    }
    Ok(out)
}

/// The full battery: identities on the default inhomogeneous profile in both layouts,
/// plus vanishing spin-orbit terms on a homogeneous profile.
pub fn medium_suite(seed: u64) -> Result<Vec<Check>> {
    let points = sample_points(seed, 6);
    let (psi, f) = default_test_fields();
    let prof = default_test_profile();
    let mut out = Vec::new();
    for rep in [Representation::Standard, Representation::Chiral] {
        for c in second_order_check(&prof, &psi, &f, rep, &points)? {
            let name = format!("{}[{}]", c.name, rep.name());
            out.push(c.renamed(name));
        }
    }
    let homog = MediumProfile::homogeneous(2.25, 1.3)?;
    out.push(Check::new("spin_orbit_vanishes_homogeneous", spin_orbit_magnitude(&homog, &psi, &points), f64::MIN_POSITIVE));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub m_eff: Vec<f64>,
    /// max ‖in∂_tψ' − RHS‖ of the envelope equation.
    pub residual: f64,
    /// max of ‖n²∂_t²ψ'‖/(2m_eff) + ‖(α·χ)n∂_tψ'‖/m_eff, the terms dropped by the approximation.
    pub dropped: f64,
    /// max ‖∂_tψ'‖/(‖ψ'‖m_eff/n).
    pub ratio_first: f64,
    /// max ‖∂_t²ψ'‖/(‖ψ'‖m_eff/n).
    pub ratio_second: f64,
    /// max |∂_t(m_eff/n)|.
    pub dt_mass_over_n: f64,
}

/// Envelope reduction for χ = η, χ₀ = η₀ = 0: ψ = ψ' exp(−i m_eff t/n).
pub fn envelope_reduction(
    profile: &MediumProfile,
    envelope: &SpinorExpr,
    points: &[[f64; 4]],
    svea_threshold: f64,
) -> Result<EnvelopeReport> {
    let ops = MediumOperators::new(profile);
    let s = &ops.sym;
    let mut m_eff = Vec::with_capacity(points.len());
    for p in points {
        profile.values_at(*p)?;
        let c = medium_connection_with(s, *p)?;
        let gap = (0..4).map(|k| (c.chi_lower[k] - c.eta_lower[k]).abs()).fold(c.chi_lower[0].abs(), f64::max);
        if gap > 1e-12 {
            return Err(Error::DomainViolation(format!(
                "envelope reduction needs chi = eta and chi_0 = eta_0 = 0 (violated by {gap:e} at {p:?})"
            )));
        }
        let m = (c.chi_lower[1].powi(2) + c.chi_lower[2].powi(2) + c.chi_lower[3].powi(2)).sqrt();
        if m < 1e-12 {
            return Err(Error::DegenerateMass(m));
        }
        m_eff.push(m);
    }
    let mass = (1..4).fold(Expr::num(0.0), |a, l| a + s.chi[l].clone() * s.chi[l].clone()).sqrt();
    let dt_mass_over_n = points.iter().map(|p| (mass.clone() / s.n.clone()).diff(0).eval(p).norm()).fold(0.0, f64::max);

    let dt: SpinorExpr = std::array::from_fn(|r| envelope[r].diff(0));
    let dtt: SpinorExpr = std::array::from_fn(|r| dt[r].diff(0));
    let (mut ratio_first, mut ratio_second) = (0.0f64, 0.0f64);
    for (p, m) in points.iter().zip(&m_eff) {
        let n = s.n.eval_real(p);
        let scale = eval6(envelope, p).norm() * m / n;
        ratio_first = ratio_first.max(eval6(&dt, p).norm() / scale);
        ratio_second = ratio_second.max(eval6(&dtt, p).norm() / scale);
    }
    let ratio = ratio_first.max(ratio_second);
    if !(ratio <= svea_threshold) {
        return Err(Error::SVEAViolated { ratio, threshold: svea_threshold });
    }

    // RHS = −∇²ψ'/2m + [(∇·χ) − χ·∇ − Ω]ψ'/2m − [iΣ·(χ×∇) + i(α·χ)m]ψ'/m
    let div_chi = (1..4).fold(Expr::num(0.0), |a, l| a + s.chi[l].diff(l));
    let chi_grad = sum6((1..4).map(|l| scale6(&s.chi[l], &ops.d(l, envelope))));
    let alpha_chi = sum6((1..4).map(|l| scale6(&s.chi[l], &apply(&ops.m.alpha[l - 1], envelope))));
    let inv2m = Expr::num(0.5) / mass.clone();
    let bracket = sub6(&sub6(&scale6(&div_chi, envelope), &chi_grad), &ops.omega(envelope));
    let so = add6(&ops.sigma_phi_cross_grad(envelope), &scale6(&mass, &alpha_chi));
    let rhs = sub6(
        &scale6(&inv2m, &sub6(&bracket, &ops.laplacian(envelope))),
        &scale6(&(Expr::complex(I) / mass.clone()), &so),
    );
    let lhs = scale6(&(Expr::complex(I) * s.n.clone()), &dt);
    let residual = magnitude(&sub6(&lhs, &rhs), points);
    let n2 = s.n.clone() * s.n.clone();
    let drop_a = scale6(&(n2 * inv2m), &dtt);
    let drop_b = scale6(&(s.n.clone() / mass), &sum6((1..4).map(|l| scale6(&s.chi[l], &apply(&ops.m.alpha[l - 1], &dt)))));
    let dropped = points.iter().map(|p| eval6(&drop_a, p).norm() + eval6(&drop_b, p).norm()).fold(0.0, f64::max);
    Ok(EnvelopeReport { m_eff, residual, dropped, ratio_first, ratio_second, dt_mass_over_n })
}
