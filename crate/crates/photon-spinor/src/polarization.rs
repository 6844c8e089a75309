//! Polarization bases for a wave vector and the transverse mode spinors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::algebra::{build_tau, MatrixSet, Representation, Spinor, C64};
use crate::error::{Error, Result};
use crate::report::{merge_worst, Check};

pub type CVec3 = [C64; 3];

/// Relative threshold on k₁²+k₂² below which k is treated as lying on the 3-axis.
pub const DEGENERACY_TOL: f64 = 1e-24;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveVector {
    pub k: [f64; 3],
    pub omega: f64,
    pub axis_degenerate: bool,
}

impl WaveVector {
    pub fn new(k: [f64; 3]) -> Self {
        let omega = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let q = k[0] * k[0] + k[1] * k[1];
        WaveVector { k, omega, axis_degenerate: q < DEGENERACY_TOL * omega * omega || omega == 0.0 }
    }

    pub fn neg(&self) -> Self {
        WaveVector::new([-self.k[0], -self.k[1], -self.k[2]])
    }

    pub fn unit(&self) -> Result<[f64; 3]> {
        if self.omega == 0.0 {
            return Err(Error::ZeroWaveVector);
        }
        Ok([self.k[0] / self.omega, self.k[1] / self.omega, self.k[2] / self.omega])
    }

    fn transverse_sq(&self) -> f64 {
        self.k[0] * self.k[0] + self.k[1] * self.k[1]
    }
}

/// Linear basis ε(k,1..3) and circular basis e₊₁, e₋₁, e₀.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolBasis {
    pub eps: [[f64; 3]; 3],
    pub e_plus: CVec3,
    pub e_minus: CVec3,
    pub e_zero: CVec3,
}

/// ε(k,1), ε(k,2), ε(k,3) = k̂, with ε₁ × ε₂ = ε₃.
///
/// ε₁ = (k₃ + k₂²r, −k₁k₂r, −k₁)/|k| and ε₂ = (−k₁k₂r, k₃ + k₁²r, −k₂)/|k| where
/// r = (|k| − k₃)/(k₁² + k₂²), evaluated as 1/(|k| + k₃) when k₃ ≥ 0 to avoid
/// cancellation. On the 3-axis the limit along k₂ = 0, k₁ → 0⁺ is used.
pub fn linear_basis(k: &WaveVector) -> Result<[[f64; 3]; 3]> {
    let [k1, k2, k3] = k.k;
    let w = k.omega;
    if w == 0.0 {
        return Err(Error::ZeroWaveVector);
    }
    let e3 = [k1 / w, k2 / w, k3 / w];
    if k.axis_degenerate {
        let s = if k3 >= 0.0 { 1.0 } else { -1.0 };
        return Ok([[s, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, s]]);
    }
    let r = if k3 >= 0.0 { 1.0 / (w + k3) } else { (w - k3) / k.transverse_sq() };
    let e1 = [(k3 + k2 * k2 * r) / w, -k1 * k2 * r / w, -k1 / w];
    let e2 = [-k1 * k2 * r / w, (k3 + k1 * k1 * r) / w, -k2 / w];
    Ok([e1, e2, e3])
}

pub fn circular_basis(k: &WaveVector) -> Result<PolBasis> {
    let eps = linear_basis(k)?;
    let e_plus: CVec3 = std::array::from_fn(|c| C64::new(eps[0][c], eps[1][c]) * FRAC_1_SQRT_2);
    let e_minus = conj3(&e_plus);
    let e_zero = std::array::from_fn(|c| C64::from(eps[2][c]));
    Ok(PolBasis { eps, e_plus, e_minus, e_zero })
}

/// e₁ written directly in components of k; undefined on the 3-axis.
pub fn circular_explicit(k: &WaveVector) -> Option<CVec3> {
    if k.axis_degenerate {
        return None;
    }
    let [k1, k2, k3] = k.k;
    let w = k.omega;
    let den = C64::new(k1, -k2);
    let pre = 1.0 / (std::f64::consts::SQRT_2 * w);
    Some([
        C64::new(k1 * k3, -k2 * w) / den * pre,
        C64::new(k2 * k3, k1 * w) / den * pre,
        -C64::new(k1, k2) * pre,
    ])
}

/// exp(iφ) = (k₁ − ik₂)/√(k₁²+k₂²), i.e. φ = −atan2(k₂, k₁); 1 on the 3-axis.
pub fn rotation_phase(k: &WaveVector) -> C64 {
    if k.axis_degenerate {
        return C64::new(1.0, 0.0);
    }
    let q = k.transverse_sq().sqrt();
    C64::new(k.k[0] / q, -k.k[1] / q)
}

/// e'±₁ = exp(±iφ) e±₁. These satisfy e'±₁(−k) = e'∓₁(k) off the 3-axis.
pub fn rotated_circular_basis(k: &WaveVector) -> Result<(CVec3, CVec3)> {
    let b = circular_basis(k)?;
    let p = rotation_phase(k);
    Ok((scale3(&b.e_plus, p), scale3(&b.e_minus, p.conj())))
}

/// Transverse mode spinors: f (standard layout) and g = U f (chiral layout).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpinor {
    pub f: [Spinor; 2],
    pub g: [Spinor; 2],
}

impl ModeSpinor {
    pub fn get(&self, rep: Representation) -> &[Spinor; 2] {
        match rep {
            Representation::Standard => &self.f,
            Representation::Chiral => &self.g,
        }
    }
}

/// f₁ = (ε₁, iε₂)/√2, f₂ = (ε₂, −iε₁)/√2; g₁ = (e₁, e₋₁)/√2, g₂ = (−ie₁, ie₋₁)/√2.
pub fn mode_spinors(k: &WaveVector) -> Result<ModeSpinor> {
    let b = circular_basis(k)?;
    let re = |v: &[f64; 3]| -> CVec3 { std::array::from_fn(|c| C64::from(v[c])) };
    let e1 = re(&b.eps[0]);
    let e2 = re(&b.eps[1]);
    let f1 = stack(&e1, &scale3(&e2, I));
    let f2 = stack(&e2, &scale3(&e1, -I));
    let g = circular_pair(&b.e_plus, &b.e_minus);
    Ok(ModeSpinor { f: [f1, f2], g })
}

/// Mode spinors built on the rotated circular vectors (parity-adapted basis).
pub fn rotated_mode_spinors(k: &WaveVector) -> Result<ModeSpinor> {
    let (ep, em) = rotated_circular_basis(k)?;
    let g = circular_pair(&ep, &em);
    let u = crate::algebra::basis_change();
    Ok(ModeSpinor { f: [u * g[0], u * g[1]], g })
}

fn circular_pair(ep: &CVec3, em: &CVec3) -> [Spinor; 2] {
    [stack(ep, em), stack(&scale3(ep, -I), &scale3(em, I))]
}

fn stack(a: &CVec3, b: &CVec3) -> Spinor {
    Spinor::from_fn(|r, _| if r < 3 { a[r] } else { b[r - 3] } * FRAC_1_SQRT_2)
}

pub fn conj3(a: &CVec3) -> CVec3 {
    [a[0].conj(), a[1].conj(), a[2].conj()]
}

pub fn scale3(a: &CVec3, s: C64) -> CVec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// a†b
pub fn inner3(a: &CVec3, b: &CVec3) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

/// Vector of a†τ_l b.
pub fn tau_sandwich(a: &CVec3, b: &CVec3) -> CVec3 {
    let tau = build_tau();
    let va = nalgebra::Vector3::from(*a);
    let vb = nalgebra::Vector3::from(*b);
    std::array::from_fn(|l| va.dotc(&(tau[l] * vb)))
}

/// (τ·n) v for a real direction n.
pub fn tau_dot_apply(n: [f64; 3], v: &CVec3) -> CVec3 {
    let tau = build_tau();
    let m = tau[0] * C64::from(n[0]) + tau[1] * C64::from(n[1]) + tau[2] * C64::from(n[2]);
    let r = m * nalgebra::Vector3::from(*v);
    [r[0], r[1], r[2]]
}

fn cross_r(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dev3(a: &CVec3, b: &CVec3) -> f64 {
    (0..3).map(|c| (a[c] - b[c]).norm()).fold(0.0, f64::max)
}

fn realc(v: &[f64; 3]) -> CVec3 {
    std::array::from_fn(|c| C64::from(v[c]))
}

fn scaled_k(k: &WaveVector, s: C64) -> CVec3 {
    std::array::from_fn(|c| s * k.k[c] / k.omega)
}

/// Every orthogonality, helicity, parity and mode-spinor identity at one k.
/// Identities that involve k₁²+k₂² in a denominator are skipped on the 3-axis.
pub fn identity_suite(k: &WaveVector) -> Result<Vec<Check>> {
    let tol = 1e-13;
    let nk = k.neg();
    let a = linear_basis(k)?;
    let b = linear_basis(&nk)?;
    let cb = circular_basis(k)?;
    let cbn = circular_basis(&nk)?;
    let (ac, bc) = (a.map(|v| realc(&v)), b.map(|v| realc(&v)));
    let mut out = Vec::new();
    let mut push = |name: &str, d: f64| out.push(Check::new(name, d, tol));

    let mut d48 = 0.0f64;
    let mut d49_1 = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let cr = realc(&cross_r(&a[i], &a[j]));
            d48 = d48.max(dev3(&tau_sandwich(&ac[i], &ac[j]), &scale3(&cr, -I)));
            let ip = a[i][0] * a[j][0] + a[i][1] * a[j][1] + a[i][2] * a[j][2];
            d49_1 = d49_1.max((ip - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let mut completeness = 0.0f64;
    for r in 0..3 {
        for c in 0..3 {
            let s: f64 = (0..3).map(|i| a[i][r] * a[i][c]).sum();
            completeness = completeness.max((s - if r == c { 1.0 } else { 0.0 }).abs());
        }
    }
    push("eps_tau_eps_cross", d48);
    push("eps_orthonormal", d49_1.max(completeness));
    push("eps_handedness", dev3(&realc(&cross_r(&a[0], &a[1])), &ac[2]));
    let khat = k.unit()?;
    push("eps3_is_khat", dev3(&ac[2], &realc(&khat)));
    push(
        "eps_tau_eps_helicity",
        dev3(&tau_sandwich(&ac[0], &ac[1]), &scaled_k(k, -I)).max(dev3(&tau_sandwich(&ac[1], &ac[0]), &scaled_k(k, I))),
    );
    push(
        "eps_tau_eps_diagonal_zero",
        dev3(&tau_sandwich(&ac[0], &ac[0]), &[C64::default(); 3]).max(dev3(&tau_sandwich(&ac[1], &ac[1]), &[C64::default(); 3])),
    );

    if !k.axis_degenerate {
        let [k1, k2, _] = k.k;
        let q = k1 * k1 + k2 * k2;
        let dot = |x: &[f64; 3], y: &[f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        let c2 = (k2 * k2 - k1 * k1) / q;
        let s2 = -2.0 * k1 * k2 / q;
        push("eps_parity_diagonal", (dot(&a[0], &b[0]) - c2).abs().max((dot(&a[1], &b[1]) + c2).abs()));
        push("eps_parity_offdiagonal", (dot(&a[0], &b[1]) - s2).abs().max((dot(&a[1], &b[0]) - s2).abs()));
        let v6 = scaled_k(k, I * c2);
        push(
            "eps_tau_parity_offdiagonal",
            dev3(&tau_sandwich(&ac[0], &bc[1]), &v6).max(dev3(&tau_sandwich(&ac[1], &bc[0]), &v6)),
        );
        let v7 = scaled_k(k, I * (-s2));
        push(
            "eps_tau_parity_diagonal",
            dev3(&tau_sandwich(&ac[0], &bc[0]), &v7).max(dev3(&tau_sandwich(&ac[1], &bc[1]), &scale3(&v7, C64::from(-1.0)))),
        );
        let explicit = circular_explicit(k).expect("non-degenerate");
        push("circular_component_form", dev3(&explicit, &cb.e_plus));
        let th = C64::new(k1, k2) / C64::new(k1, -k2);
        push("circular_parity_phase_unimodular", (th.norm() - 1.0).abs());
        let neg_p = scale3(&cb.e_minus, -th);
        let neg_m = scale3(&cb.e_plus, -th.conj());
        push("circular_parity_pair", dev3(&cbn.e_plus, &neg_p).max(dev3(&cbn.e_minus, &neg_m)));

        let p = rotation_phase(k);
        push("rotation_phase_unimodular", (p.norm() - 1.0).abs());
        let (rp, rm) = rotated_circular_basis(k)?;
        let (np, nm) = rotated_circular_basis(&nk)?;
        push("rotated_circular_parity", dev3(&np, &rm).max(dev3(&nm, &rp)));
        let gk = rotated_mode_spinors(k)?;
        let gn = rotated_mode_spinors(&nk)?;
        let beta0 = MatrixSet::new(Representation::Chiral).beta[0];
        let d100 = (beta0 * gn.g[0] - gk.g[0]).camax().max((beta0 * gn.g[1] + gk.g[1]).camax());
        push("mode_parity_beta0", d100);
    }

    // circular orthonormality, completeness, helicity
    let e = [cb.e_plus, cb.e_minus, cb.e_zero];
    let mut d67_1 = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            d67_1 = d67_1.max((inner3(&e[i], &e[j]) - want).norm());
        }
    }
    for r in 0..3 {
        for c in 0..3 {
            let s: C64 = (0..3).map(|i| e[i][r] * e[i][c].conj()).sum();
            d67_1 = d67_1.max((s - if r == c { 1.0 } else { 0.0 }).norm());
        }
    }
    push("circular_orthonormal", d67_1);
    let zero3 = [C64::default(); 3];
    let en = [cbn.e_plus, cbn.e_minus];
    let mut d67_2 = 0.0f64;
    for l in 0..2 {
        d67_2 = d67_2.max(inner3(&en[l], &e[l]).norm());
        d67_2 = d67_2.max(dev3(&tau_sandwich(&e[l], &en[l]), &zero3));
    }
    push("circular_opposite_k", d67_2);
    push(
        "circular_spin_expectation",
        dev3(&tau_sandwich(&e[0], &e[0]), &scaled_k(k, C64::from(1.0)))
            .max(dev3(&tau_sandwich(&e[1], &e[1]), &scaled_k(k, C64::from(-1.0)))),
    );
    let mut d69 = 0.0f64;
    for (lam, v) in [(1.0, &e[0]), (-1.0, &e[1]), (0.0, &e[2])] {
        d69 = d69.max(dev3(&tau_dot_apply(khat, v), &scale3(v, C64::from(lam))));
    }
    push("helicity_eigenrelation", d69);

    // mode spinors
    let m = mode_spinors(k)?;
    let mn = mode_spinors(&nk)?;
    for rep in [Representation::Standard, Representation::Chiral] {
        let set = MatrixSet::new(rep);
        let (x, y) = (m.get(rep), mn.get(rep));
        let (mut norm, mut cross, mut curr, mut curr_cross) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                norm = norm.max((x[i].dotc(&x[j]) - want).norm());
                cross = cross.max(x[i].dotc(&y[j]).norm());
                for l in 0..3 {
                    curr = curr.max((x[i].dotc(&(set.alpha[l] * x[j])) - want * k.k[l] / k.omega).norm());
                    curr_cross = curr_cross.max(x[i].dotc(&(set.alpha[l] * y[j])).norm());
                }
            }
        }
        let name = rep.name();
        push(&format!("mode_orthonormal[{name}]"), norm.max(cross));
        push(&format!("mode_current[{name}]"), curr.max(curr_cross));
        let ak = set.alpha_dot(k.k);
        let eig = (0..2).map(|i| (ak * x[i] - x[i] * C64::from(k.omega)).camax()).fold(0.0, f64::max);
        push(&format!("mode_plane_wave[{name}]"), eig / k.omega.max(1.0));
    }
    let u = crate::algebra::basis_change();
    push("mode_g_equals_Uf", (u * m.f[0] - m.g[0]).camax().max((u * m.f[1] - m.g[1]).camax()));
    Ok(out)
}

/// k = (0, 0, 2), (0, 0, −1) and a slightly tilted vector that still takes the limit path
/// (that path is accurate to √(k₁² + k₂²)/|k|, so the tilt is kept far below the tolerances).
pub const AXIS_CASES: [[f64; 3]; 3] = [[0.0, 0.0, 2.0], [0.0, 0.0, -1.0], [3e-15, -2e-15, 1.0]];

/// Seeded random non-degenerate k (|k| ∈ [0.1, 5√3]) plus [`AXIS_CASES`], worst case per identity.
pub fn polarization_suite(seed: u64, samples: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut n = 0;
    while n < samples {
        let k: [f64; 3] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 < 0.01 || k[0] * k[0] + k[1] * k[1] < 1e-6 * k2 {
            continue;
        }
        checks.extend(identity_suite(&WaveVector::new(k))?);
        n += 1;
    }
    for k in AXIS_CASES {
        checks.extend(identity_suite(&WaveVector::new(k))?.into_iter().map(|c| {
            let name = format!("{}[axis]", c.name);
            c.renamed(name)
        }));
    }
    Ok(merge_worst(checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_suite_passes() {
        for c in polarization_suite(5, 200).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    fn close3(a: &[f64; 3], b: &[f64; 3]) -> bool {
        (0..3).all(|c| (a[c] - b[c]).abs() < 1e-15)
    }

    #[test]
    fn axis_limit() {
        let e = linear_basis(&WaveVector::new([0.0, 0.0, 2.0])).unwrap();
        assert!(close3(&e[0], &[1.0, 0.0, 0.0]));
        assert!(close3(&e[1], &[0.0, 1.0, 0.0]));
        assert!(close3(&e[2], &[0.0, 0.0, 1.0]));
        let e = linear_basis(&WaveVector::new([0.0, 0.0, -2.5])).unwrap();
        assert!(close3(&e[0], &[-1.0, 0.0, 0.0]));
        assert!(close3(&e[2], &[0.0, 0.0, -1.0]));
    }

    #[test]
    fn zero_k_rejected() {
        assert!(matches!(linear_basis(&WaveVector::new([0.0; 3])), Err(Error::ZeroWaveVector)));
        assert!(mode_spinors(&WaveVector::new([0.0; 3])).is_err());
    }

    #[test]
    fn matches_literal_formula() {
        // ε₁ = ((k₁²k₃ + k₂²|k|)/q, k₁k₂(k₃ − |k|)/q, −k₁)/|k|
        for k in [[1.0, 2.0, 3.0], [-0.3, 0.7, -2.0], [2.0, -1.0, 0.0]] {
            let w = WaveVector::new(k);
            let e = linear_basis(&w).unwrap();
            let [k1, k2, k3] = k;
            let (n, q) = (w.omega, k1 * k1 + k2 * k2);
            let e1 = [(k1 * k1 * k3 + k2 * k2 * n) / q / n, k1 * k2 * (k3 - n) / q / n, -k1 / n];
            let e2 = [k1 * k2 * (k3 - n) / q / n, (k1 * k1 * n + k2 * k2 * k3) / q / n, -k2 / n];
            for c in 0..3 {
                assert!((e[0][c] - e1[c]).abs() < 1e-15 && (e[1][c] - e2[c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn parity_overlap_example() {
        let k = WaveVector::new([1.0, 2.0, 3.0]);
        let a = linear_basis(&k).unwrap();
        let b = linear_basis(&k.neg()).unwrap();
        let d: f64 = (0..3).map(|c| a[0][c] * b[0][c]).sum();
        assert!((d - 0.6).abs() < 1e-15);
        let th = C64::new(1.0, 2.0) / C64::new(1.0, -2.0);
        assert!((th.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn helicity_example() {
        let k = WaveVector::new([3.0, 4.0, 0.0]);
        let b = circular_basis(&k).unwrap();
        assert!(dev3(&tau_dot_apply(k.unit().unwrap(), &b.e_plus), &b.e_plus) < 1e-14);
        assert!(dev3(&tau_dot_apply(k.unit().unwrap(), &b.e_zero), &[C64::default(); 3]) < 1e-15);
    }

    #[test]
    fn unit_x_is_unrotated() {
        let k = WaveVector::new([1.0, 0.0, 0.0]);
        assert_eq!(rotation_phase(&k), C64::new(1.0, 0.0));
        let b = circular_basis(&k).unwrap();
        let (p, m) = rotated_circular_basis(&k).unwrap();
        assert_eq!(p, b.e_plus);
        assert_eq!(m, b.e_minus);
    }

    #[test]
    fn rotated_parity_on_y_axis() {
        let k = WaveVector::new([0.0, 1.0, 0.0]);
        let (p, _) = rotated_circular_basis(&k.neg()).unwrap();
        let (_, m) = rotated_circular_basis(&k).unwrap();
        assert!(dev3(&p, &m) < 1e-15);
    }

    #[test]
    fn f1_layout() {
        let k = WaveVector::new([0.0, 0.0, 1.0]);
        let m = mode_spinors(&k).unwrap();
        let s = FRAC_1_SQRT_2;
        let want = [s, 0.0, 0.0, 0.0, 0.0, 0.0];
        let want_im = [0.0, 0.0, 0.0, 0.0, s, 0.0];
        for r in 0..6 {
            assert!((m.f[0][r] - C64::new(want[r], want_im[r])).norm() < 1e-15);
        }
    }

    #[test]
    fn suite_examples() {
        for k in [[1.0, 1.0, 1.0], [2.0, -1.0, 2.0], [1.0, 2.0, 2.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -2.5], [1e-14, 0.0, 3.0]] {
            for c in identity_suite(&WaveVector::new(k)).unwrap() {
                assert!(c.passed, "k={k:?}: {c:?}");
            }
        }
    }
}
