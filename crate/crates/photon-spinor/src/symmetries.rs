//! Discrete and chiral transforms, chirality projectors, and the Lorentz-invariance
//! certificate Δ_{μν} evaluated on grid fields.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{max_abs, Mat6, MatrixSet, Representation, SpinGenerators, Spinor, C64};
use crate::error::{Error, Result};
use crate::field::{
    dirac_residual, dirac_residual_field, divergence_norms, e_h_of, spatial_gradient, synthesize_with_dt, Grid,
    ModeBasis, ModeCoefficients, ModeEntry, SpinorGridField,
};
use crate::report::Check;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub position: [f64; 3],
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub name: String,
    pub max_deviation: f64,
    pub witness: Option<Witness>,
}

impl SymmetryReport {
    /// Largest pointwise norm with its location.
    pub fn from_nodes(name: impl Into<String>, grid: &Grid, values: impl IntoIterator<Item = f64>) -> Self {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in values.into_iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        match best {
            Some((i, v)) => SymmetryReport {
                name: name.into(),
                max_deviation: v,
                witness: Some(Witness { position: grid.coords(i), value: v }),
            },
            None => SymmetryReport { name: name.into(), max_deviation: 0.0, witness: None },
        }
    }

    pub fn to_check(&self, tol: f64) -> Check {
        Check::new(self.name.clone(), self.max_deviation, tol)
    }
}

/// ψ(t, x) → β⁰ψ(t, −x).
pub fn parity(field: &SpinorGridField) -> Result<SpinorGridField> {
    let g = field.grid;
    if !g.is_symmetric() {
        return Err(Error::AsymmetricGrid(format!("origin {:?} with dims {:?} is not centred", g.origin, g.dims)));
    }
    let b0 = MatrixSet::new(field.rep).beta[0];
    let values = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let n = g.unindex(idx);
            let m = g.index(g.dims[0] - 1 - n[0], g.dims[1] - 1 - n[1], g.dims[2] - 1 - n[2]);
            b0 * field.values[m]
        })
        .collect();
    Ok(SpinorGridField { values, ..field.clone() })
}

/// Antilinear time reversal on c-number data: conjugate samples, negate the time tag.
pub fn time_reversal(field: &SpinorGridField) -> SpinorGridField {
    let mut out = field.map(|p| p.conjugate());
    out.time = -field.time;
    out
}

/// Time derivative of the reversed field: ∂_{t'}ψ*(−t') = −(∂_tψ)*.
pub fn time_reversal_dt(dt: &SpinorGridField) -> SpinorGridField {
    let mut out = dt.map(|p| -p.conjugate());
    out.time = -dt.time;
    out
}

/// ψ → β⁰ψ*.
pub fn charge_conjugation(field: &SpinorGridField) -> SpinorGridField {
    let b0 = MatrixSet::new(field.rep).beta[0];
    field.map(|p| b0 * p.conjugate())
}

/// exp(iβ⁵θ) = cos θ + iβ⁵ sin θ.
pub fn chiral_matrix(rep: Representation, theta: f64) -> Mat6 {
    let b5 = MatrixSet::new(rep).beta5;
    Mat6::identity() * C64::from(theta.cos()) + b5 * (I * theta.sin())
}

pub fn chiral_transform(field: &SpinorGridField, theta: f64) -> SpinorGridField {
    let m = chiral_matrix(field.rep, theta);
    field.map(|p| m * p)
}

/// ((1 + β⁵)ψ/2, (1 − β⁵)ψ/2).
pub fn chirality_projectors(field: &SpinorGridField) -> (SpinorGridField, SpinorGridField) {
    let b5 = MatrixSet::new(field.rep).beta5;
    let half = C64::from(0.5);
    let pr = (Mat6::identity() + b5) * half;
    let pl = (Mat6::identity() - b5) * half;
    (field.map(|p| pr * p), field.map(|p| pl * p))
}

/// max over nodes and μ of |ψ̄β^μβ⁵ψ|.
pub fn axial_current_max(field: &SpinorGridField) -> SymmetryReport {
    let m = MatrixSet::new(field.rep);
    let ops: [Mat6; 4] = std::array::from_fn(|mu| m.beta[0] * m.beta[mu] * m.beta5);
    let v: Vec<f64> = field
        .values
        .iter()
        .map(|p| ops.iter().map(|o| p.dotc(&(o * p)).norm()).fold(0.0, f64::max))
        .collect();
    SymmetryReport::from_nodes("axial_current_vanishes", &field.grid, v)
}

/// The bracket i(β_m∂_l − β_l∂_m) + ε_{lmn}(β^ρΣ^n − Σ^nβ^ρ)∂_ρ, coefficient by coefficient.
pub fn rotation_bracket_deviation(rep: Representation) -> f64 {
    let m = MatrixSet::new(rep);
    let mut worst = 0.0f64;
    for l in 0..3 {
        for k in 0..3 {
            for rho in 0..4 {
                let mut op = Mat6::zeros();
                if rho == l + 1 {
                    op += m.beta[k + 1] * I;
                }
                if rho == k + 1 {
                    op -= m.beta[l + 1] * I;
                }
                for n in 0..3 {
                    let e = crate::algebra::levi_civita(l, k, n);
                    if e != 0.0 {
                        op += (m.beta[rho] * m.sigma[n] - m.sigma[n] * m.beta[rho]) * C64::from(e);
                    }
                }
                worst = worst.max(max_abs(&op));
            }
        }
    }
    worst
}

/// Four-gradient ∂_μψ with ∂_0 supplied by `dt`.
fn four_gradient(field: &SpinorGridField, dt: &SpinorGridField) -> Result<[Vec<Spinor>; 4]> {
    if !field.grid.same_as(&dt.grid) || field.rep != dt.rep {
        return Err(Error::GridMismatch("field and time derivative grids differ".into()));
    }
    let [gx, gy, gz] = spatial_gradient(field)?;
    Ok([dt.values.clone(), gx, gy, gz])
}

/// Δ_{μν} = ψ̄[i(β_ν∂_μ − β_μ∂_ν) + (β^ρS_{μν} − S_{μν}β^ρ)∂_ρ]ψ at every node.
pub fn delta_components(field: &SpinorGridField, dt: &SpinorGridField) -> Result<Vec<[[C64; 4]; 4]>> {
    let d = four_gradient(field, dt)?;
    let m = MatrixSet::new(field.rep);
    let s = SpinGenerators::new(field.rep);
    let lower: [Mat6; 4] = std::array::from_fn(|mu| m.beta_lower(mu));
    let comm: Vec<Vec<[Mat6; 4]>> = (0..4)
        .map(|mu| {
            (0..4)
                .map(|nu| {
                    let sl = s.lower(mu, nu);
                    std::array::from_fn(|rho| m.beta[rho] * sl - sl * m.beta[rho])
                })
                .collect()
        })
        .collect();
    let b0 = m.beta[0];
    Ok((0..field.values.len())
        .into_par_iter()
        .map(|i| {
            let bar = (b0 * field.values[i]).adjoint();
            let mut out = [[C64::default(); 4]; 4];
            for mu in 0..4 {
                for nu in 0..4 {
                    let mut v = (lower[nu] * d[mu][i] - lower[mu] * d[nu][i]) * I;
                    for rho in 0..4 {
                        v += comm[mu][nu][rho] * d[rho][i];
                    }
                    out[mu][nu] = (bar * v)[0];
                }
            }
            out
        })
        .collect())
}

/// ∂_ρQ^ρ_{μν} + iG_{μν} at every node (max over index pairs), with
/// G_{μν} = ∂_μ(ψ̄β_νψ) − ∂_ν(ψ̄β_μψ) and Q^ρ_{μν} = ψ̄(β^ρS_{μν} − S_{μν}β^ρ)ψ.
pub fn curl_relation(field: &SpinorGridField, dt: &SpinorGridField) -> Result<Vec<f64>> {
    let d = four_gradient(field, dt)?;
    let m = MatrixSet::new(field.rep);
    let s = SpinGenerators::new(field.rep);
    let b0 = m.beta[0];
    // β⁰β_ν and β⁰(β^ρS_{μν} − S_{μν}β^ρ), hoisted out of the node loop
    let g_ops: [Mat6; 4] = std::array::from_fn(|nu| b0 * m.beta_lower(nu));
    let q_ops: Vec<[Mat6; 4]> = (0..16)
        .map(|p| {
            let sl = s.lower(p / 4, p % 4);
            std::array::from_fn(|rho| b0 * (m.beta[rho] * sl - sl * m.beta[rho]))
        })
        .collect();
    Ok((0..field.values.len())
        .into_par_iter()
        .map(|i| {
            let p = field.values[i];
            // ∂_ρ(ψ̄Mψ) = (∂_ρψ)†β⁰Mψ + ψ†β⁰M∂_ρψ
            let dbil = |rho: usize, op: &Mat6| -> C64 { d[rho][i].dotc(&(op * p)) + p.dotc(&(op * d[rho][i])) };
            let mut worst = 0.0f64;
            for mu in 0..4 {
                for nu in (mu + 1)..4 {
                    let g = dbil(mu, &g_ops[nu]) - dbil(nu, &g_ops[mu]);
                    let dq: C64 = (0..4).map(|rho| dbil(rho, &q_ops[mu * 4 + nu][rho])).sum();
                    worst = worst.max((dq + I * g).norm());
                }
            }
            worst
        })
        .collect())
}

/// −i(E_l∇·E + H_l∇·H)/2, the closed form of Δ_{l0} for fields obeying the curl equations.
pub fn delta_l0_closed_form(field: &SpinorGridField) -> Result<Vec<[C64; 3]>> {
    let grad = spatial_gradient(field)?;
    Ok((0..field.values.len())
        .map(|i| {
            let (e, h) = e_h_of(&field.values[i], field.rep);
            let (mut de, mut dh) = (C64::default(), C64::default());
            for (a, g) in grad.iter().enumerate() {
                let (ge, gh) = e_h_of(&g[i], field.rep);
                de += ge[a];
                dh += gh[a];
            }
            std::array::from_fn(|l| -I * (e[l] * de + h[l] * dh) * 0.5)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub delta: SymmetryReport,
    pub rotation_bracket: f64,
    pub curl_relation: SymmetryReport,
    pub divergence_e: f64,
    pub divergence_h: f64,
}

/// Δ_{μν} on a transverse field; refuses fields whose divergences exceed `transverse_tol`.
pub fn lorentz_invariance_certificate(
    field: &SpinorGridField,
    dt: &SpinorGridField,
    transverse_tol: f64,
) -> Result<Certificate> {
    let (div_e, div_h) = divergence_norms(field)?;
    if div_e > transverse_tol || div_h > transverse_tol {
        return Err(Error::NonTransverseInput { div_e, div_h });
    }
    let delta = delta_components(field, dt)?;
    let worst: Vec<f64> = delta.iter().map(|d| d.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)).collect();
    Ok(Certificate {
        delta: SymmetryReport::from_nodes("lorentz_certificate_delta", &field.grid, worst),
        rotation_bracket: rotation_bracket_deviation(field.rep),
        curl_relation: SymmetryReport::from_nodes("four_curl_relation", &field.grid, curl_relation(field, dt)?),
        divergence_e: div_e,
        divergence_h: div_h,
    })
}

/// Apply a mode-coefficient map k → (k', factor, conjugate?) for coefficient-level checks.
pub fn map_coefficients(c: &ModeCoefficients, f: impl Fn(&ModeEntry) -> ModeEntry) -> ModeCoefficients {
    ModeCoefficients { basis: c.basis, modes: c.modes.iter().map(f).collect(), circular: vec![] }
}

/// b(k,1) → b(−k,1), b(k,2) → −b(−k,2).
pub fn parity_coefficients(c: &ModeCoefficients) -> ModeCoefficients {
    map_coefficients(c, |m| ModeEntry { k: m.k.map(|x| -x), pol: m.pol, b: if m.pol == 1 { m.b } else { -m.b } })
}

/// b'(−k,1) = b*(k,1), b'(−k,2) = −b*(k,2).
pub fn time_reversal_coefficients(c: &ModeCoefficients) -> ModeCoefficients {
    map_coefficients(c, |m| ModeEntry {
        k: m.k.map(|x| -x),
        pol: m.pol,
        b: if m.pol == 1 { m.b.conj() } else { -m.b.conj() },
    })
}

/// Full battery on a two-mode transverse field in both representations.
pub fn symmetry_suite(grid: Grid) -> Result<Vec<Check>> {
    let l = grid.lengths();
    let two_pi = 2.0 * std::f64::consts::PI;
    let k1 = [two_pi / l[0], 2.0 * two_pi / l[1], -two_pi / l[2]];
    let k2 = [-two_pi / l[0], 0.0, two_pi / l[2]];
    let coeffs = ModeCoefficients {
        basis: ModeBasis::Rotated,
        modes: vec![
            ModeEntry { k: k1, pol: 1, b: C64::new(0.7, 0.2) },
            ModeEntry { k: k2, pol: 2, b: C64::new(-0.3, 0.9) },
        ],
        circular: vec![],
    };
    let kmax = [k1, k2].iter().map(|k| k.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    // residual tolerances follow the O(h²) truncation error of the stencils
    let h = grid.spacing.iter().cloned().fold(0.0, f64::max);
    let fd_tol = 2.0 * kmax.powi(3) * h * h;
    let mut out = Vec::new();
    for rep in [Representation::Standard, Representation::Chiral] {
        let name = rep.name();
        let time = 0.37;
        let (psi, dt) = synthesize_with_dt(&coeffs, rep, grid, time)?;
        let base = dirac_residual(&psi, &dt)?;
        out.push(Check::new(format!("dirac_residual_fd[{name}]"), base, fd_tol));

        let c = charge_conjugation(&psi);
        out.push(Check::new(format!("charge_conjugation_fixed_point[{name}]"), c.max_abs_diff(&psi)?, 1e-15));
        let cc = charge_conjugation(&c);
        out.push(Check::new(format!("charge_conjugation_involution[{name}]"), cc.max_abs_diff(&psi)?, 1e-15));

        // the transforms commute with the operator: residual(Tψ) = T·residual(ψ)
        let res = dirac_residual_field(&psi, &dt)?;
        for theta in [0.0, std::f64::consts::FRAC_PI_4, 1.3] {
            let cm = chiral_matrix(rep, theta);
            let r = dirac_residual_field(&chiral_transform(&psi, theta), &chiral_transform(&dt, theta))?;
            let d = r.iter().zip(&res).map(|(a, b)| (a - cm * b).camax()).fold(0.0, f64::max);
            out.push(Check::new(format!("chiral_residual_covariance[{name}, theta={theta:.4}]"), d, 1e-12));
        }
        let (pr, pl) = chirality_projectors(&psi);
        let m = MatrixSet::new(rep);
        let mut d = 0.0f64;
        for i in 0..psi.values.len() {
            d = d.max((pr.values[i] + pl.values[i] - psi.values[i]).camax());
            d = d.max((m.beta5 * pr.values[i] - pr.values[i]).camax());
            d = d.max((m.beta5 * pl.values[i] + pl.values[i]).camax());
        }
        out.push(Check::new(format!("chirality_projectors[{name}]"), d, 1e-15));
        out.push(axial_current_max(&psi).to_check(1e-14).renamed(format!("axial_current_vanishes[{name}]")));

        let phase = C64::from_polar(1.0, -0.9);
        let gr = dirac_residual_field(&psi.map(|p| p * phase), &dt.map(|p| p * phase))?;
        let d = gr.iter().zip(&res).map(|(a, b)| (a - b * phase).camax()).fold(0.0, f64::max);
        out.push(Check::new(format!("global_phase_residual_covariance[{name}]"), d, 1e-12));

        let p = parity(&psi)?;
        let pd = parity(&dt)?;
        out.push(Check::new(format!("parity_involution[{name}]"), parity(&p)?.max_abs_diff(&psi)?, 1e-15));
        out.push(Check::new(format!("parity_residual[{name}]"), dirac_residual(&p, &pd)?, fd_tol));
        let pc = synthesize_with_dt(&parity_coefficients(&coeffs), rep, grid, time)?.0;
        out.push(Check::new(format!("parity_coefficient_action[{name}]"), p.max_abs_diff(&pc)?, 1e-12));

        let t = time_reversal(&psi);
        let tdt = time_reversal_dt(&dt);
        out.push(Check::new(format!("time_reversal_involution[{name}]"), time_reversal(&t).max_abs_diff(&psi)?, 1e-15));
        out.push(Check::new(format!("time_reversal_residual[{name}]"), dirac_residual(&t, &tdt)?, fd_tol));
        let tc = synthesize_with_dt(&time_reversal_coefficients(&coeffs), rep, grid, -time)?.0;
        out.push(Check::new(format!("time_reversal_coefficient_action[{name}]"), t.max_abs_diff(&tc)?, 1e-12));

        let cert = lorentz_invariance_certificate(&psi, &dt, 1e-8 + fd_tol)?;
        out.push(Check::new(format!("lorentz_certificate_delta[{name}]"), cert.delta.max_deviation, fd_tol * 4.0));
        out.push(Check::new(format!("rotation_bracket_identity[{name}]"), cert.rotation_bracket, 1e-15));
        out.push(Check::new(format!("four_curl_relation[{name}]"), cert.curl_relation.max_deviation, fd_tol * 8.0));

        let u = crate::algebra::basis_change();
        if rep == Representation::Chiral {
            let std = synthesize_with_dt(&coeffs, Representation::Standard, grid, time)?;
            let rs = dirac_residual_field(&std.0, &std.1)?;
            let d = res.iter().zip(&rs).map(|(a, b)| (u * a - b).camax()).fold(0.0, f64::max);
            out.push(Check::new("residual_representation_covariance", d, 1e-13));
        }
    }
    Ok(out)
}
