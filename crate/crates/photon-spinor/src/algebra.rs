//! Fixed matrices of the (1,0)⊕(0,1) representation and the Lorentz maps built on them.
//!
//! Index conventions: `beta[0]` is β⁰ (upper index), `beta[1..=3]` are β^l. Lower
//! indices use η = diag(−1, 1, 1, 1), so β_0 = −β⁰ and β_l = β^l.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::report::{merge_worst, Check};

pub type C64 = Complex64;
pub type Mat3 = SMatrix<C64, 3, 3>;
pub type Mat6 = SMatrix<C64, 6, 6>;
pub type Spinor = SVector<C64, 6>;

pub const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Chiral,
    Standard,
}

impl Representation {
    pub fn tag(self) -> u8 {
        match self {
            Representation::Chiral => 0,
            Representation::Standard => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Representation::Chiral),
            1 => Some(Representation::Standard),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Representation::Chiral => "chiral",
            Representation::Standard => "standard",
        }
    }

    pub fn other(self) -> Self {
        match self {
            Representation::Chiral => Representation::Standard,
            Representation::Standard => Representation::Chiral,
        }
    }
}

impl std::str::FromStr for Representation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "chiral" | "c" => Ok(Representation::Chiral),
            "standard" | "s" => Ok(Representation::Standard),
            other => Err(format!("unknown representation '{other}'")),
        }
    }
}

/// ε_{lmn} with indices in 0..3.
pub fn levi_civita(l: usize, m: usize, n: usize) -> f64 {
    match (l, m, n) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Spin-1 matrices (τ_l)_{mn} = −i ε_{lmn}, written out entry by entry.
pub fn build_tau() -> [Mat3; 3] {
    let z = ZERO;
    let t1 = Mat3::new(z, z, z, z, z, -I, z, I, z);
    let t2 = Mat3::new(z, z, I, z, z, z, -I, z, z);
    let t3 = Mat3::new(z, -I, z, I, z, z, z, z, z);
    [t1, t2, t3]
}

/// Assemble a 6×6 matrix from 3×3 blocks `[[a, b], [c, d]]`.
pub fn blocks(a: &Mat3, b: &Mat3, c: &Mat3, d: &Mat3) -> Mat6 {
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(a);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(b);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(c);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(d);
    m
}

/// The unitary U = U† = U⁻¹ taking chiral objects to standard ones.
pub fn basis_change() -> Mat6 {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let id = Mat3::identity() * s;
    blocks(&id, &id, &id, &(-id))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSet {
    pub rep: Representation,
    /// β^μ, upper index.
    pub beta: [Mat6; 4],
    /// α_l = β⁰β_l.
    pub alpha: [Mat6; 3],
    pub sigma: [Mat6; 3],
    pub beta5: Mat6,
    pub u: Mat6,
}

impl MatrixSet {
    pub fn new(rep: Representation) -> Self {
        let tau = build_tau();
        let id = Mat3::identity();
        let z = Mat3::zeros();
        let (beta, alpha, beta5) = match rep {
            Representation::Chiral => (
                [
                    blocks(&z, &id, &id, &z),
                    blocks(&z, &(-tau[0]), &tau[0], &z),
                    blocks(&z, &(-tau[1]), &tau[1], &z),
                    blocks(&z, &(-tau[2]), &tau[2], &z),
                ],
                [
                    blocks(&tau[0], &z, &z, &(-tau[0])),
                    blocks(&tau[1], &z, &z, &(-tau[1])),
                    blocks(&tau[2], &z, &z, &(-tau[2])),
                ],
                blocks(&id, &z, &z, &(-id)),
            ),
            Representation::Standard => (
                [
                    blocks(&id, &z, &z, &(-id)),
                    blocks(&z, &tau[0], &(-tau[0]), &z),
                    blocks(&z, &tau[1], &(-tau[1]), &z),
                    blocks(&z, &tau[2], &(-tau[2]), &z),
                ],
                [
                    blocks(&z, &tau[0], &tau[0], &z),
                    blocks(&z, &tau[1], &tau[1], &z),
                    blocks(&z, &tau[2], &tau[2], &z),
                ],
                blocks(&z, &id, &id, &z),
            ),
        };
        let sigma = [
            blocks(&tau[0], &z, &z, &tau[0]),
            blocks(&tau[1], &z, &z, &tau[1]),
            blocks(&tau[2], &z, &z, &tau[2]),
        ];
        MatrixSet { rep, beta, alpha, sigma, beta5, u: basis_change() }
    }

    /// β_μ = η_μμ β^μ.
    pub fn beta_lower(&self, mu: usize) -> Mat6 {
        self.beta[mu] * C64::from(ETA[mu])
    }

    /// α·k for a real 3-vector.
    pub fn alpha_dot(&self, k: [f64; 3]) -> Mat6 {
        self.alpha[0] * C64::from(k[0]) + self.alpha[1] * C64::from(k[1]) + self.alpha[2] * C64::from(k[2])
    }

    /// Every named matrix in a fixed order, for basis-change checks.
    pub fn all(&self) -> Vec<(&'static str, Mat6)> {
        vec![
            ("beta0", self.beta[0]),
            ("beta1", self.beta[1]),
            ("beta2", self.beta[2]),
            ("beta3", self.beta[3]),
            ("alpha1", self.alpha[0]),
            ("alpha2", self.alpha[1]),
            ("alpha3", self.alpha[2]),
            ("sigma1", self.sigma[0]),
            ("sigma2", self.sigma[1]),
            ("sigma3", self.sigma[2]),
            ("beta5", self.beta5),
        ]
    }
}

/// Antisymmetric generators S^{μν}: S^{0l} = iα^l, S^{lm} = ε_{lmn}Σ^n.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinGenerators {
    pub rep: Representation,
    upper: [[Mat6; 4]; 4],
}

impl SpinGenerators {
    pub fn new(rep: Representation) -> Self {
        let m = MatrixSet::new(rep);
        let mut upper = [[Mat6::zeros(); 4]; 4];
        for l in 0..3 {
            upper[0][l + 1] = m.alpha[l] * I;
            upper[l + 1][0] = -(m.alpha[l] * I);
            for k in 0..3 {
                let mut s = Mat6::zeros();
                for n in 0..3 {
                    let e = levi_civita(l, k, n);
                    if e != 0.0 {
                        s += m.sigma[n] * C64::from(e);
                    }
                }
                upper[l + 1][k + 1] = s;
            }
        }
        SpinGenerators { rep, upper }
    }

    pub fn upper(&self, mu: usize, nu: usize) -> &Mat6 {
        &self.upper[mu][nu]
    }

    pub fn lower(&self, mu: usize, nu: usize) -> Mat6 {
        self.upper[mu][nu] * C64::from(ETA[mu] * ETA[nu])
    }
}

/// Closed-form exp(i a·τ) for complex a, using s = a·a (bilinear, no conjugation).
///
/// exp(i a·τ) = cos√s · I + i (a·τ) sin√s/√s + a aᵀ (1 − cos√s)/s.
/// Each coefficient is an even function of √s, so the branch never matters.
pub fn exp_tau(a: [C64; 3]) -> Mat3 {
    let s = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    exp_tau_with_root(a, s.sqrt())
}

/// Same as [`exp_tau`] with an explicitly chosen square root of a·a.
/// Passing −√s must give the same matrix.
pub fn exp_tau_with_root(a: [C64; 3], root: C64) -> Mat3 {
    let (c, sinc, half) = exp_coefficients(root);
    let tau = build_tau();
    let adot = tau[0] * a[0] + tau[1] * a[1] + tau[2] * a[2];
    let av = SVector::<C64, 3>::from(a);
    Mat3::identity() * c + adot * (I * sinc) + av * av.transpose() * half
}

/// (cos z, sin z / z, (1 − cos z)/z²), series below |z| = 1e−8.
fn exp_coefficients(z: C64) -> (C64, C64, C64) {
    if z.norm() < 1e-8 {
        let s = z * z;
        let s2 = s * s;
        (
            ONE - s / 2.0 + s2 / 24.0,
            ONE - s / 6.0 + s2 / 120.0,
            C64::new(0.5, 0.0) - s / 24.0 + s2 / 720.0,
        )
    } else {
        let h = z / 2.0;
        let sinc_h = h.sin() / h;
        (z.cos(), z.sin() / z, sinc_h * sinc_h * 0.5)
    }
}

/// Six real Lorentz parameters: rotation angles θ and rapidities ζ.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LorentzParams {
    pub theta: [f64; 3],
    pub zeta: [f64; 3],
}

impl LorentzParams {
    pub fn rotation(theta: [f64; 3]) -> Self {
        LorentzParams { theta, zeta: [0.0; 3] }
    }

    pub fn boost(zeta: [f64; 3]) -> Self {
        LorentzParams { theta: [0.0; 3], zeta }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().chain(self.zeta.iter()).all(|x| x.is_finite())
    }

    /// ω^{μν} with ω^{l0} = ζ_l and ω^{lm} = −ε_{lmn}θ_n.
    pub fn omega(&self) -> [[f64; 4]; 4] {
        let mut w = [[0.0; 4]; 4];
        for l in 0..3 {
            w[l + 1][0] = self.zeta[l];
            w[0][l + 1] = -self.zeta[l];
            for m in 0..3 {
                w[l + 1][m + 1] = -(0..3).map(|n| levi_civita(l, m, n) * self.theta[n]).sum::<f64>();
            }
        }
        w
    }

    /// Inverse of [`omega`](Self::omega); ignores any symmetric part.
    pub fn from_omega(w: &[[f64; 4]; 4]) -> Self {
        let zeta = [
            0.5 * (w[1][0] - w[0][1]),
            0.5 * (w[2][0] - w[0][2]),
            0.5 * (w[3][0] - w[0][3]),
        ];
        // θ_n = −½ ε_{lmn} ω^{lm}
        let mut theta = [0.0; 3];
        for (n, t) in theta.iter_mut().enumerate() {
            for l in 0..3 {
                for m in 0..3 {
                    *t -= 0.5 * levi_civita(l, m, n) * w[l + 1][m + 1];
                }
            }
        }
        LorentzParams { theta, zeta }
    }

    /// The generator iθ·Σ + ζ·α in the given representation.
    pub fn generator(&self, rep: Representation) -> Mat6 {
        let m = MatrixSet::new(rep);
        let mut g = Mat6::zeros();
        for l in 0..3 {
            g += m.sigma[l] * (I * self.theta[l]) + m.alpha[l] * C64::from(self.zeta[l]);
        }
        g
    }
}

/// Representation matrix of the Lorentz transformation with parameters `p`.
///
/// Chiral: blockdiag(exp[iτ·(θ − iζ)], exp[iτ·(θ + iζ)]); standard: U L_C U.
pub fn lorentz_rep(rep: Representation, p: &LorentzParams) -> Mat6 {
    let minus: [C64; 3] = std::array::from_fn(|l| C64::new(p.theta[l], -p.zeta[l]));
    let plus: [C64; 3] = std::array::from_fn(|l| C64::new(p.theta[l], p.zeta[l]));
    let z = Mat3::zeros();
    let lc = blocks(&exp_tau(minus), &z, &z, &exp_tau(plus));
    match rep {
        Representation::Chiral => lc,
        Representation::Standard => {
            let u = basis_change();
            u * lc * u
        }
    }
}

pub fn max_abs(m: &Mat6) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs3(m: &Mat3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn commutator(a: &Mat6, b: &Mat6) -> Mat6 {
    a * b - b * a
}

/// Deviation of (τ·a)(τ·b) = a·b + iτ·(a×b) − a bᵀ and of the β-product expansion,
/// for contravariant 4-vectors a^μ, b^μ (products are bilinear throughout).
pub fn product_identities_check(a: [C64; 4], b: [C64; 4], rep: Representation) -> Vec<Check> {
    let tol = 1e-12 * (1.0 + norm4(&a) * norm4(&b));
    let tau = build_tau();
    let av = [a[1], a[2], a[3]];
    let bv = [b[1], b[2], b[3]];
    let cross = [
        av[1] * bv[2] - av[2] * bv[1],
        av[2] * bv[0] - av[0] * bv[2],
        av[0] * bv[1] - av[1] * bv[0],
    ];
    let dot3 = av[0] * bv[0] + av[1] * bv[1] + av[2] * bv[2];
    let va = SVector::<C64, 3>::from(av);
    let vb = SVector::<C64, 3>::from(bv);
    let outer = va * vb.transpose();

    let ta = tau[0] * av[0] + tau[1] * av[1] + tau[2] * av[2];
    let tb = tau[0] * bv[0] + tau[1] * bv[1] + tau[2] * bv[2];
    let rhs3 = Mat3::identity() * dot3 + (tau[0] * cross[0] + tau[1] * cross[1] + tau[2] * cross[2]) * I - outer;
    let dev3 = max_abs3(&(ta * tb - rhs3));

    let m = MatrixSet::new(rep);
    // β^μ a_μ with a_μ = η_μμ a^μ
    let slash = |v: &[C64; 4]| -> Mat6 { (0..4).fold(Mat6::zeros(), |acc, mu| acc + m.beta[mu] * (v[mu] * ETA[mu])) };
    let lhs = slash(&a) * slash(&b);
    let a_dot_b = (0..4).fold(ZERO, |acc, mu| acc + a[mu] * b[mu] * ETA[mu]);
    let mut rhs = Mat6::identity() * (-a_dot_b);
    for n in 0..3 {
        rhs -= m.sigma[n] * (I * cross[n]);
        rhs += m.alpha[n] * (av[n] * b[0] - a[0] * bv[n]);
    }
    let z = Mat3::zeros();
    rhs += blocks(&outer, &z, &z, &outer);
    let dev6 = max_abs(&(lhs - rhs));

    vec![
        Check::new("tau_product", dev3, tol),
        Check::new(format!("beta_product[{}]", rep.name()), dev6, tol),
    ]
}

fn norm4(v: &[C64; 4]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Commutation relations of the generators, in both representations.
pub fn generator_algebra_check() -> Vec<Check> {
    let tol = 1e-14;
    let mut out = Vec::new();
    let tau = build_tau();

    // [τ_l, τ_m] = iε_{lmn}τ_n, and the Casimir Στ² = 2.
    let mut dev = 0.0f64;
    for l in 0..3 {
        for k in 0..3 {
            let c = tau[l] * tau[k] - tau[k] * tau[l];
            let r = (0..3).fold(Mat3::zeros(), |acc, n| acc + tau[n] * (I * levi_civita(l, k, n)));
            dev = dev.max(max_abs3(&(c - r)));
        }
    }
    out.push(Check::new("tau_commutators", dev, tol));
    let cas = tau[0] * tau[0] + tau[1] * tau[1] + tau[2] * tau[2] - Mat3::identity() * C64::from(2.0);
    out.push(Check::new("tau_casimir", max_abs3(&cas), tol));

    for rep in [Representation::Chiral, Representation::Standard] {
        let m = MatrixSet::new(rep);
        let name = rep.name();
        // J = Σ, K = −iα: [J,J] = iεJ, [J,K] = iεK, [K,K] = −iεJ
        let j = m.sigma;
        let kk: [Mat6; 3] = std::array::from_fn(|l| m.alpha[l] * (-I));
        let mut d1 = 0.0f64;
        for l in 0..3 {
            for k in 0..3 {
                let mut rj = Mat6::zeros();
                let mut rk = Mat6::zeros();
                for n in 0..3 {
                    let e = I * levi_civita(l, k, n);
                    rj += j[n] * e;
                    rk += kk[n] * e;
                }
                d1 = d1.max(max_abs(&(commutator(&j[l], &j[k]) - rj)));
                d1 = d1.max(max_abs(&(commutator(&j[l], &kk[k]) - rk)));
                d1 = d1.max(max_abs(&(commutator(&kk[l], &kk[k]) + rj)));
            }
        }
        out.push(Check::new(format!("boost_rotation_algebra[{name}]"), d1, tol));

        // Q± = (J ± iK)/2 = (Σ ± α)/2 commute with each other.
        let mut d3 = 0.0f64;
        for l in 0..3 {
            for k in 0..3 {
                let qp = (j[l] + kk[l] * I) * C64::from(0.5);
                let qm = (j[k] - kk[k] * I) * C64::from(0.5);
                d3 = d3.max(max_abs(&commutator(&qp, &qm)));
            }
        }
        out.push(Check::new(format!("chiral_halves_commute[{name}]"), d3, tol));

        let s = SpinGenerators::new(rep);
        let (mut du, mut dl, mut anti) = (0.0f64, 0.0f64, 0.0f64);
        for a in 0..4 {
            for b in 0..4 {
                anti = anti.max(max_abs(&(s.upper(a, b) + s.upper(b, a))));
                for c in 0..4 {
                    for d in 0..4 {
                        du = du.max(lie_deviation(|x, y| *s.upper(x, y), a, b, c, d));
                        dl = dl.max(lie_deviation(|x, y| s.lower(x, y), a, b, c, d));
                    }
                }
            }
        }
        out.push(Check::new(format!("generators_antisymmetric[{name}]"), anti, tol));
        out.push(Check::new(format!("lorentz_lie_algebra_upper[{name}]"), du, tol));
        out.push(Check::new(format!("lorentz_lie_algebra_lower[{name}]"), dl, tol));

        // S^{0l} anti-Hermitian, S^{lm} Hermitian.
        let mut herm = 0.0f64;
        for l in 1..4 {
            herm = herm.max(max_abs(&(s.upper(0, l) + s.upper(0, l).adjoint())));
            for k in 1..4 {
                herm = herm.max(max_abs(&(s.upper(l, k) - s.upper(l, k).adjoint())));
            }
        }
        out.push(Check::new(format!("generator_hermiticity[{name}]"), herm, tol));

        // β^lΣ^m − Σ^mβ^l = iε_{lmn}β^n
        let mut d4 = 0.0f64;
        for l in 0..3 {
            for k in 0..3 {
                let r = (0..3).fold(Mat6::zeros(), |acc, n| acc + m.beta[n + 1] * (I * levi_civita(l, k, n)));
                d4 = d4.max(max_abs(&(m.beta[l + 1] * m.sigma[k] - m.sigma[k] * m.beta[l + 1] - r)));
            }
        }
        out.push(Check::new(format!("beta_sigma_commutator[{name}]"), d4, tol));
    }
    out
}

/// i[S_ab, S_cd] − (η_bc S_ad − η_ac S_bd + η_db S_ca − η_da S_cb), max entry.
fn lie_deviation(s: impl Fn(usize, usize) -> Mat6, a: usize, b: usize, c: usize, d: usize) -> f64 {
    let eta = |x: usize, y: usize| if x == y { ETA[x] } else { 0.0 };
    let lhs = commutator(&s(a, b), &s(c, d)) * I;
    let rhs = s(a, d) * C64::from(eta(b, c)) - s(b, d) * C64::from(eta(a, c)) + s(c, a) * C64::from(eta(d, b))
        - s(c, b) * C64::from(eta(d, a));
    max_abs(&(lhs - rhs))
}

/// Anticommutation/structural facts of a matrix set and the chiral→standard map.
pub fn structure_check() -> Vec<Check> {
    let tol = 1e-14;
    let mut out = Vec::new();
    let u = basis_change();
    out.push(Check::new("U_unitary_involution", max_abs(&(u * u - Mat6::identity())).max(max_abs(&(u - u.adjoint()))), tol));
    let mc = MatrixSet::new(Representation::Chiral);
    let ms = MatrixSet::new(Representation::Standard);
    let mut d = 0.0f64;
    for ((_, c), (_, s)) in mc.all().iter().zip(ms.all().iter()) {
        d = d.max(max_abs(&(u * c * u - s)));
    }
    out.push(Check::new("basis_change_consistency", d, tol));
    for m in [&mc, &ms] {
        let name = m.rep.name();
        let mut anti = 0.0f64;
        for mu in 0..4 {
            anti = anti.max(max_abs(&(m.beta5 * m.beta[mu] + m.beta[mu] * m.beta5)));
        }
        for l in 1..4 {
            anti = anti.max(max_abs(&(m.beta[0] * m.beta[l] + m.beta[l] * m.beta[0])));
        }
        out.push(Check::new(format!("beta_anticommutators[{name}]"), anti, tol));
        let mut ad = 0.0f64;
        for l in 0..3 {
            ad = ad.max(max_abs(&(m.beta[0] * m.beta[l + 1] - m.alpha[l])));
        }
        out.push(Check::new(format!("alpha_equals_beta0_beta[{name}]"), ad, tol));
        let sq = m.sigma[0] * m.sigma[0] + m.sigma[1] * m.sigma[1] + m.sigma[2] * m.sigma[2]
            - Mat6::identity() * C64::from(2.0);
        out.push(Check::new(format!("sigma_casimir[{name}]"), max_abs(&sq), tol));
    }
    out
}

/// Lorentz-map identities at one parameter set, checked against a generic matrix
/// exponential; deviations are relative to the size of the matrices involved.
pub fn lorentz_identities_check(p: &LorentzParams) -> Vec<Check> {
    let tol = 1e-12;
    let mut out = Vec::new();
    let lc = lorentz_rep(Representation::Chiral, p);
    let ls = lorentz_rep(Representation::Standard, p);
    let u = basis_change();
    let scale = max_abs(&lc).max(1.0);
    out.push(Check::new("lorentz_basis_change", max_abs(&(u * lc * u - ls)) / scale, tol));
    for (rep, l) in [(Representation::Chiral, lc), (Representation::Standard, ls)] {
        let name = rep.name();
        let e = p.generator(rep).exp();
        out.push(Check::new(format!("lorentz_exponential[{name}]"), max_abs(&(l - e)) / scale, tol));
        out.push(Check::new(format!("lorentz_unit_determinant[{name}]"), (l.determinant() - ONE).norm() / scale.powi(6), tol));
        let inv = lorentz_rep(rep, &LorentzParams { theta: p.theta.map(|x| -x), zeta: p.zeta.map(|x| -x) });
        out.push(Check::new(format!("lorentz_inverse[{name}]"), max_abs(&(l * inv - Mat6::identity())) / (scale * scale), tol));
        let rot = lorentz_rep(rep, &LorentzParams::rotation(p.theta));
        out.push(Check::new(format!("rotation_unitary[{name}]"), max_abs(&(rot * rot.adjoint() - Mat6::identity())), tol));
        let boost = lorentz_rep(rep, &LorentzParams::boost(p.zeta));
        let bscale = max_abs(&boost).max(1.0);
        out.push(Check::new(format!("boost_hermitian[{name}]"), max_abs(&(boost - boost.adjoint())) / bscale, tol));
        let pd = boost.symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, x| m.min(*x));
        out.push(Check::new(format!("boost_positive[{name}]"), if pd > 0.0 { 0.0 } else { -pd + 1.0 }, tol));
    }
    out
}

/// exp(i a·τ) identities for one complex a.
pub fn exp_tau_check(a: [C64; 3]) -> Vec<Check> {
    let tol = 1e-12;
    let tau = build_tau();
    let g = (tau[0] * a[0] + tau[1] * a[1] + tau[2] * a[2]) * I;
    let e = exp_tau(a);
    let scale = max_abs3(&e).max(1.0);
    let root = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let re: [C64; 3] = a.map(|z| C64::from(z.re));
    let back = exp_tau(re) * exp_tau(re.map(|z| -z));
    vec![
        Check::new("exp_tau_closed_form", max_abs3(&(e - g.exp())) / scale, tol),
        Check::new("exp_tau_branch", max_abs3(&(exp_tau_with_root(a, root) - exp_tau_with_root(a, -root))) / scale, tol),
        Check::new("exp_tau_real_inverse", max_abs3(&(back - Mat3::identity())), tol),
    ]
}

/// Every algebra identity: fixed structure and generator checks plus `samples` seeded
/// random vectors and Lorentz parameters, merged to worst case per identity.
pub fn algebra_suite(seed: u64, samples: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = |r: &mut ChaCha8Rng| C64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
    let mut checks = structure_check();
    checks.extend(generator_algebra_check());
    for _ in 0..samples {
        let a: [C64; 4] = std::array::from_fn(|_| c(&mut rng));
        let b: [C64; 4] = std::array::from_fn(|_| c(&mut rng));
        for rep in [Representation::Chiral, Representation::Standard] {
            checks.extend(product_identities_check(a, b, rep));
        }
        let v: [C64; 3] = std::array::from_fn(|_| c(&mut rng));
        checks.extend(exp_tau_check(v));
        let p = LorentzParams {
            theta: std::array::from_fn(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)),
            zeta: std::array::from_fn(|_| rng.random_range(-1.5..1.5)),
        };
        checks.extend(lorentz_identities_check(&p));
    }
    merge_worst(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn tau3_entries() {
        let t = build_tau();
        for r in 0..3 {
            for k in 0..3 {
                let want = match (r, k) {
                    (0, 1) => -I,
                    (1, 0) => I,
                    _ => ZERO,
                };
                assert_eq!(t[2][(r, k)], want);
            }
        }
    }

    #[test]
    fn tau12_commutator_is_i_tau3() {
        let t = build_tau();
        assert!(max_abs3(&(t[0] * t[1] - t[1] * t[0] - t[2] * I)) < 1e-15);
    }

    #[test]
    fn beta0_block_forms() {
        let z = Mat3::zeros();
        let id = Mat3::identity();
        assert_eq!(MatrixSet::new(Representation::Chiral).beta[0], blocks(&z, &id, &id, &z));
        assert_eq!(MatrixSet::new(Representation::Standard).beta[0], blocks(&id, &z, &z, &(-id)));
        assert_eq!(MatrixSet::new(Representation::Chiral).sigma, MatrixSet::new(Representation::Standard).sigma);
    }

    #[test]
    fn exp_tau_quarter_turn() {
        let e = exp_tau([c(std::f64::consts::FRAC_PI_2, 0.0), ZERO, ZERO]);
        let want = Mat3::new(ONE, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, -ONE, ZERO);
        assert!(max_abs3(&(e - want)) < 1e-15);
    }

    #[test]
    fn exp_tau_zero_is_identity() {
        assert_eq!(exp_tau([ZERO; 3]), Mat3::identity());
    }

    #[test]
    fn exp_tau_imaginary_argument_is_boost() {
        let z: f64 = 0.7;
        let e = exp_tau([c(0.0, -z), ZERO, ZERO]);
        assert!((e[(0, 0)] - ONE).norm() < 1e-15);
        assert!((e[(1, 1)] - c(z.cosh(), 0.0)).norm() < 1e-14);
        assert!((e[(2, 2)] - c(z.cosh(), 0.0)).norm() < 1e-14);
        assert!((e[(1, 2)] - c(0.0, -z.sinh())).norm() < 1e-14);
        assert!((e[(2, 1)] - c(0.0, z.sinh())).norm() < 1e-14);
    }

    #[test]
    fn exp_tau_matches_matrix_exponential() {
        let a = [c(0.3, -0.2), c(-1.1, 0.4), c(0.5, 0.9)];
        let t = build_tau();
        let g = (t[0] * a[0] + t[1] * a[1] + t[2] * a[2]) * I;
        assert!(max_abs3(&(exp_tau(a) - g.exp())) < 1e-13);
    }

    #[test]
    fn exp_tau_branch_independent() {
        let a = [c(0.3, -0.2), c(-1.1, 0.4), c(0.5, 0.9)];
        let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        assert!(max_abs3(&(exp_tau_with_root(a, r) - exp_tau_with_root(a, -r))) < 1e-14);
    }

    #[test]
    fn exp_tau_series_switch_is_continuous() {
        for z in [0.99e-8, 1.01e-8, 3e-9] {
            let (c0, s0, h0) = exp_coefficients(C64::new(z, 0.0));
            assert!((c0.re - z.cos()).abs() < 1e-16);
            assert!((s0.re - z.sin() / z).abs() < 1e-16);
            assert!((h0.re - 0.5).abs() < 1e-16);
        }
    }

    #[test]
    fn lorentz_examples() {
        let th = 0.8;
        let l = lorentz_rep(Representation::Chiral, &LorentzParams::rotation([th, 0.0, 0.0]));
        let r = exp_tau([c(th, 0.0), ZERO, ZERO]);
        let z = Mat3::zeros();
        assert!(max_abs(&(l - blocks(&r, &z, &z, &r))) < 1e-15);

        let ze = 0.6;
        let t = build_tau();
        let l = lorentz_rep(Representation::Chiral, &LorentzParams::boost([ze, 0.0, 0.0]));
        let want = blocks(&(t[0] * C64::from(ze)).exp(), &z, &z, &(t[0] * C64::from(-ze)).exp());
        assert!(max_abs(&(l - want)) < 1e-14);

        let l = lorentz_rep(Representation::Standard, &LorentzParams::default());
        assert!(max_abs(&(l - Mat6::identity())) < 1e-15);
    }

    #[test]
    fn omega_round_trip() {
        let p = LorentzParams { theta: [0.1, -0.2, 0.3], zeta: [1.0, 2.0, -3.0] };
        let w = p.omega();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(w[a][b], -w[b][a]);
            }
        }
        let q = LorentzParams::from_omega(&w);
        for l in 0..3 {
            assert!((q.theta[l] - p.theta[l]).abs() < 1e-15);
            assert!((q.zeta[l] - p.zeta[l]).abs() < 1e-15);
        }
    }

    #[test]
    fn product_identity_examples() {
        let e = [ZERO, ONE, ZERO, ZERO];
        for rep in [Representation::Chiral, Representation::Standard] {
            for ch in product_identities_check(e, e, rep) {
                assert!(ch.deviation < 1e-14, "{ch:?}");
            }
        }
        let t = [ONE, ZERO, ZERO, ZERO];
        let m = MatrixSet::new(Representation::Standard);
        let b0 = m.beta_lower(0);
        assert!(max_abs(&(b0 * b0 - Mat6::identity())) < 1e-15);
        assert!(product_identities_check(t, t, Representation::Chiral).iter().all(|c| c.passed));
    }

    #[test]
    fn seeded_suite_passes() {
        let s = algebra_suite(3, 50);
        assert!(s.len() >= 12);
        for c in s {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn generator_and_structure_checks_pass() {
        for ch in generator_algebra_check().into_iter().chain(structure_check()) {
            assert!(ch.passed, "{ch:?}");
        }
    }
}
