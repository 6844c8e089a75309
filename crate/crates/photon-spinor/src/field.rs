//! Spinor fields on uniform Cartesian grids, plane-wave synthesis, residuals and observables.

use nalgebra::{DMatrix, DVector, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::algebra::{basis_change, Mat6, MatrixSet, Representation, Spinor, C64};
use crate::error::{Error, Result};
use crate::polarization::{mode_spinors, rotated_mode_spinors, WaveVector};

const I: C64 = C64::new(0.0, 1.0);

/// Minimum nodes per axis (the one-sided stencils need three).
pub const MIN_DIM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// No boundary treatment chosen; derivative kernels refuse to run.
    Unspecified,
    Periodic,
    /// Non-periodic box: second-order one-sided stencils on the faces.
    OneSided,
}

impl Boundary {
    pub fn tag(self) -> u8 {
        match self {
            Boundary::Unspecified => 0,
            Boundary::Periodic => 1,
            Boundary::OneSided => 2,
        }
    }

    pub fn from_tag(t: u8) -> Option<Self> {
        match t {
            0 => Some(Boundary::Unspecified),
            1 => Some(Boundary::Periodic),
            2 => Some(Boundary::OneSided),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub dims: [usize; 3],
    pub boundary: Boundary,
}

impl Grid {
    pub fn new(origin: [f64; 3], spacing: [f64; 3], dims: [usize; 3], boundary: Boundary) -> Result<Self> {
        for a in 0..3 {
            if !(spacing[a] > 0.0 && spacing[a].is_finite()) {
                return Err(Error::InvalidGrid(format!("spacing[{a}] = {} must be positive", spacing[a])));
            }
            if dims[a] < MIN_DIM {
                return Err(Error::InvalidGrid(format!("dims[{a}] = {} is below the stencil minimum {MIN_DIM}", dims[a])));
            }
            if !origin[a].is_finite() {
                return Err(Error::InvalidGrid(format!("origin[{a}] is not finite")));
            }
        }
        Ok(Grid { origin, spacing, dims, boundary })
    }

    /// Periodic box of side `lengths`, `dims` nodes per axis, centred on the origin so that
    /// x → −x maps nodes onto nodes.
    pub fn periodic_box(lengths: [f64; 3], dims: [usize; 3]) -> Result<Self> {
        let spacing = [0, 1, 2].map(|a| lengths[a] / dims[a] as f64);
        let origin = [0, 1, 2].map(|a| -0.5 * (dims[a] as f64 - 1.0) * spacing[a]);
        Grid::new(origin, spacing, dims, Boundary::Periodic)
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.dims[2];
        let j = (idx / self.dims[2]) % self.dims[1];
        let i = idx / (self.dims[1] * self.dims[2]);
        [i, j, k]
    }

    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let n = self.unindex(idx);
        [0, 1, 2].map(|a| self.origin[a] + n[a] as f64 * self.spacing[a])
    }

    /// Period along each axis (periodic) or covered extent (one-sided).
    pub fn lengths(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| match self.boundary {
            Boundary::Periodic => self.dims[a] as f64 * self.spacing[a],
            _ => (self.dims[a] as f64 - 1.0) * self.spacing[a],
        })
    }

    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    /// Quadrature weight of a node: rectangle rule when periodic, trapezoid otherwise.
    pub fn weight(&self, idx: usize) -> f64 {
        let n = self.unindex(idx);
        (0..3)
            .map(|a| {
                let edge = self.boundary != Boundary::Periodic && (n[a] == 0 || n[a] + 1 == self.dims[a]);
                if edge {
                    0.5 * self.spacing[a]
                } else {
                    self.spacing[a]
                }
            })
            .product()
    }

    /// True when x → −x permutes the nodes.
    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|a| {
            let far = self.origin[a] + (self.dims[a] as f64 - 1.0) * self.spacing[a];
            (self.origin[a] + far).abs() <= 1e-12 * self.spacing[a] * self.dims[a] as f64
        })
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.dims == other.dims
            && self.boundary == other.boundary
            && (0..3).all(|a| {
                let tol = 1e-12 * self.spacing[a];
                (self.spacing[a] - other.spacing[a]).abs() <= tol && (self.origin[a] - other.origin[a]).abs() <= tol
            })
    }

    fn neighbour(&self, n: [usize; 3], axis: usize, step: isize) -> Option<usize> {
        let d = self.dims[axis] as isize;
        let mut m = n;
        let v = n[axis] as isize + step;
        let v = if self.boundary == Boundary::Periodic {
            v.rem_euclid(d)
        } else if (0..d).contains(&v) {
            v
        } else {
            return None;
        };
        m[axis] = v as usize;
        Some(self.index(m[0], m[1], m[2]))
    }
}

/// Six complex samples per node plus representation and time tags.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorGridField {
    pub grid: Grid,
    pub rep: Representation,
    pub time: f64,
    pub values: Vec<Spinor>,
}

impl SpinorGridField {
    pub fn zeros(grid: Grid, rep: Representation, time: f64) -> Self {
        SpinorGridField { grid, rep, time, values: vec![Spinor::zeros(); grid.len()] }
    }

    pub fn from_fn(grid: Grid, rep: Representation, time: f64, f: impl Fn([f64; 3]) -> Spinor + Sync + Send) -> Self {
        let values = (0..grid.len()).into_par_iter().map(|i| f(grid.coords(i))).collect();
        SpinorGridField { grid, rep, time, values }
    }

    pub fn map(&self, f: impl Fn(&Spinor) -> Spinor + Sync + Send) -> Self {
        SpinorGridField { values: self.values.par_iter().map(f).collect(), ..self.clone() }
    }

    pub fn to_rep(&self, rep: Representation) -> Self {
        if rep == self.rep {
            return self.clone();
        }
        let u = basis_change();
        SpinorGridField { rep, ..self.map(|p| u * p) }
    }

    pub fn max_abs_diff(&self, other: &SpinorGridField) -> Result<f64> {
        check_same(self, other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).camax()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.camax()).fold(0.0, f64::max)
    }

    /// Complex E and H per node (their imaginary parts vanish for physical data).
    pub fn e_h_complex(&self) -> Vec<([C64; 3], [C64; 3])> {
        self.values.iter().map(|p| e_h_of(p, self.rep)).collect()
    }

    pub fn e_h(&self) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
        self.values
            .iter()
            .map(|p| {
                let (e, h) = e_h_of(p, self.rep);
                (e.map(|z| z.re), h.map(|z| z.re))
            })
            .unzip()
    }
}

fn check_same(a: &SpinorGridField, b: &SpinorGridField) -> Result<()> {
    if !a.grid.same_as(&b.grid) || a.values.len() != b.values.len() {
        return Err(Error::GridMismatch(format!("grids differ: {:?} vs {:?}", a.grid.dims, b.grid.dims)));
    }
    if a.rep != b.rep {
        return Err(Error::GridMismatch(format!("representations differ: {} vs {}", a.rep.name(), b.rep.name())));
    }
    Ok(())
}

/// ψ_C = ((E + iH)/2, (E − iH)/2) or ψ_S = (E, iH)/√2.
pub fn spinor_from_e_h(e: [f64; 3], h: [f64; 3], rep: Representation) -> Spinor {
    match rep {
        Representation::Chiral => Spinor::from_fn(|r, _| {
            let c = r % 3;
            let s = if r < 3 { 1.0 } else { -1.0 };
            C64::new(e[c], s * h[c]) * 0.5
        }),
        Representation::Standard => Spinor::from_fn(|r, _| {
            if r < 3 {
                C64::new(e[r] * FRAC_1_SQRT_2, 0.0)
            } else {
                C64::new(0.0, h[r - 3] * FRAC_1_SQRT_2)
            }
        }),
    }
}

/// Inverse of [`spinor_from_e_h`] without discarding imaginary parts.
pub fn e_h_of(p: &Spinor, rep: Representation) -> ([C64; 3], [C64; 3]) {
    match rep {
        Representation::Chiral => {
            (std::array::from_fn(|c| p[c] + p[c + 3]), std::array::from_fn(|c| -I * (p[c] - p[c + 3])))
        }
        Representation::Standard => {
            (std::array::from_fn(|c| p[c] * SQRT_2), std::array::from_fn(|c| -I * p[c + 3] * SQRT_2))
        }
    }
}

pub fn assemble_spinor(
    grid: Grid,
    e: &[[f64; 3]],
    h: &[[f64; 3]],
    rep: Representation,
    time: f64,
) -> Result<SpinorGridField> {
    if e.len() != grid.len() || h.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "E has {} nodes, H has {}, grid has {}",
            e.len(),
            h.len(),
            grid.len()
        )));
    }
    let values = e.iter().zip(h).map(|(e, h)| spinor_from_e_h(*e, *h, rep)).collect();
    Ok(SpinorGridField { grid, rep, time, values })
}

/// Second-order central difference along `axis`; one-sided on non-periodic faces.
pub fn derivative(grid: &Grid, data: &[Spinor], axis: usize) -> Result<Vec<Spinor>> {
    if grid.boundary == Boundary::Unspecified {
        return Err(Error::BoundaryUnsupported("derivatives need a periodic or one-sided boundary".into()));
    }
    if data.len() != grid.len() {
        return Err(Error::GridMismatch(format!("{} samples for {} nodes", data.len(), grid.len())));
    }
    let inv = C64::from(0.5 / grid.spacing[axis]);
    let (three, four) = (C64::from(3.0), C64::from(4.0));
    Ok((0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let n = grid.unindex(idx);
            match (grid.neighbour(n, axis, -1), grid.neighbour(n, axis, 1)) {
                (Some(m), Some(p)) => (data[p] - data[m]) * inv,
                (None, Some(p)) => {
                    let p2 = grid.neighbour(n, axis, 2).expect("dims >= 5");
                    (data[p] * four - data[idx] * three - data[p2]) * inv
                }
                (Some(m), None) => {
                    let m2 = grid.neighbour(n, axis, -2).expect("dims >= 5");
                    (data[idx] * three - data[m] * four + data[m2]) * inv
                }
                (None, None) => unreachable!("axis has at least {MIN_DIM} nodes"),
            }
        })
        .collect())
}

/// ∂_l ψ for l = 1, 2, 3.
pub fn spatial_gradient(field: &SpinorGridField) -> Result<[Vec<Spinor>; 3]> {
    Ok([derivative(&field.grid, &field.values, 0)?, derivative(&field.grid, &field.values, 1)?, derivative(&field.grid, &field.values, 2)?])
}

/// Pointwise i∂_tψ + iα·∇ψ.
pub fn dirac_residual_field(field: &SpinorGridField, dt: &SpinorGridField) -> Result<Vec<Spinor>> {
    check_same(field, dt)?;
    let grad = spatial_gradient(field)?;
    let m = MatrixSet::new(field.rep);
    Ok((0..field.values.len())
        .into_par_iter()
        .map(|i| (dt.values[i] + m.alpha[0] * grad[0][i] + m.alpha[1] * grad[1][i] + m.alpha[2] * grad[2][i]) * I)
        .collect())
}

/// max-norm of the vacuum residual.
pub fn dirac_residual(field: &SpinorGridField, dt: &SpinorGridField) -> Result<f64> {
    Ok(dirac_residual_field(field, dt)?.iter().map(|v| v.camax()).fold(0.0, f64::max))
}

/// (max |∇·E|, max |∇·H|) by central differences.
pub fn divergence_norms(field: &SpinorGridField) -> Result<(f64, f64)> {
    let grad = spatial_gradient(field)?;
    let mut de = 0.0f64;
    let mut dh = 0.0f64;
    for i in 0..field.values.len() {
        let (mut se, mut sh) = (C64::default(), C64::default());
        for (a, g) in grad.iter().enumerate() {
            let (e, h) = e_h_of(&g[i], field.rep);
            se += e[a];
            sh += h[a];
        }
        de = de.max(se.norm());
        dh = dh.max(sh.norm());
    }
    Ok((de, dh))
}

pub fn require_transverse(field: &SpinorGridField, tol: f64) -> Result<()> {
    let (div_e, div_h) = divergence_norms(field)?;
    if div_e > tol || div_h > tol {
        return Err(Error::NonTransverseInput { div_e, div_h });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeBasis {
    /// f(k,i) from the linear basis.
    #[default]
    Linear,
    /// Parity-adapted basis built on the rotated circular vectors.
    Rotated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub k: [f64; 3],
    /// Transverse polarization index, 1 or 2.
    pub pol: u8,
    pub b: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularEntry {
    pub k: [f64; 3],
    /// +1 or −1.
    pub helicity: i8,
    pub a: C64,
}

/// c-number mode amplitudes b(k,i), optionally with the helicity amplitudes a_λ(k).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeCoefficients {
    #[serde(default)]
    pub basis: ModeBasis,
    pub modes: Vec<ModeEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub circular: Vec<CircularEntry>,
}

impl ModeCoefficients {
    pub fn single(k: [f64; 3], pol: u8, b: C64) -> Self {
        ModeCoefficients { basis: ModeBasis::Linear, modes: vec![ModeEntry { k, pol, b }], circular: vec![] }
    }

    pub fn validate(&self) -> Result<()> {
        for m in &self.modes {
            if m.pol != 1 && m.pol != 2 {
                return Err(Error::DomainViolation(format!("polarization index {} is not 1 or 2", m.pol)));
            }
            if !(m.k.iter().all(|x| x.is_finite()) && m.b.re.is_finite() && m.b.im.is_finite()) {
                return Err(Error::NonFinite(format!("mode at k = {:?}", m.k)));
            }
            if m.k == [0.0; 3] {
                return Err(Error::ZeroWaveVector);
            }
        }
        for c in &self.circular {
            if c.helicity != 1 && c.helicity != -1 {
                return Err(Error::DomainViolation(format!("helicity {} is not ±1", c.helicity)));
            }
        }
        Ok(())
    }

    fn amplitude(&self, k: [f64; 3], pol: u8) -> C64 {
        self.modes.iter().filter(|m| m.k == k && m.pol == pol).map(|m| m.b).sum()
    }

    /// a_{±1} = (b₁ ∓ i b₂)/√2 for every k present.
    pub fn to_circular(&self) -> Vec<CircularEntry> {
        let mut ks: Vec<[f64; 3]> = Vec::new();
        for m in &self.modes {
            if !ks.contains(&m.k) {
                ks.push(m.k);
            }
        }
        let mut out = Vec::new();
        for k in ks {
            let (b1, b2) = (self.amplitude(k, 1), self.amplitude(k, 2));
            out.push(CircularEntry { k, helicity: 1, a: (b1 - I * b2) * FRAC_1_SQRT_2 });
            out.push(CircularEntry { k, helicity: -1, a: (b1 + I * b2) * FRAC_1_SQRT_2 });
        }
        out
    }

    /// b₁ = (a₊ + a₋)/√2, b₂ = i(a₊ − a₋)/√2.
    pub fn from_circular(circular: &[CircularEntry]) -> Self {
        let mut ks: Vec<[f64; 3]> = Vec::new();
        for c in circular {
            if !ks.contains(&c.k) {
                ks.push(c.k);
            }
        }
        let mut modes = Vec::new();
        for k in ks {
            let a = |h: i8| -> C64 { circular.iter().filter(|c| c.k == k && c.helicity == h).map(|c| c.a).sum() };
            let (ap, am) = (a(1), a(-1));
            modes.push(ModeEntry { k, pol: 1, b: (ap + am) * FRAC_1_SQRT_2 });
            modes.push(ModeEntry { k, pol: 2, b: I * (ap - am) * FRAC_1_SQRT_2 });
        }
        ModeCoefficients { basis: ModeBasis::Linear, modes, circular: circular.to_vec() }
    }

    /// Largest mismatch between the stored circular map and the one implied by b.
    pub fn circular_consistency(&self) -> f64 {
        let implied = self.to_circular();
        let mut ks: Vec<([f64; 3], i8)> = self.circular.iter().map(|c| (c.k, c.helicity)).collect();
        ks.dedup();
        ks.iter()
            .map(|(k, h)| {
                let stored: C64 = self.circular.iter().filter(|c| c.k == *k && c.helicity == *h).map(|c| c.a).sum();
                let want: C64 = implied.iter().filter(|c| c.k == *k && c.helicity == *h).map(|c| c.a).sum();
                (stored - want).norm()
            })
            .fold(0.0, f64::max)
    }

    /// V Σ ω|b|² and V Σ k|b|² for a box of volume V.
    pub fn energy_momentum(&self, volume: f64) -> (f64, [f64; 3]) {
        let mut e = 0.0;
        let mut p = [0.0; 3];
        for m in &self.modes {
            let w = WaveVector::new(m.k);
            let n = m.b.norm_sqr() * volume;
            e += w.omega * n;
            for a in 0..3 {
                p[a] += m.k[a] * n;
            }
        }
        (e, p)
    }
}

/// Lattice check: every k must satisfy k_a L_a / 2π ∈ ℤ on a periodic box.
pub fn check_commensurate(grid: &Grid, k: [f64; 3]) -> Result<()> {
    if grid.boundary != Boundary::Periodic {
        return Ok(());
    }
    let l = grid.lengths();
    for a in 0..3 {
        let n = k[a] * l[a] / (2.0 * std::f64::consts::PI);
        if (n - n.round()).abs() > 1e-9 * (1.0 + n.abs()) {
            return Err(Error::IncommensurateMode { k });
        }
    }
    Ok(())
}

/// ψ = Σ √(ω/2) f(k,i) [b e^{i(k·x−ωt)} + b* e^{−i(k·x−ωt)}] and its exact time derivative.
pub fn synthesize_with_dt(
    coeffs: &ModeCoefficients,
    rep: Representation,
    grid: Grid,
    time: f64,
) -> Result<(SpinorGridField, SpinorGridField)> {
    coeffs.validate()?;
    let mut terms = Vec::with_capacity(coeffs.modes.len());
    for m in &coeffs.modes {
        check_commensurate(&grid, m.k)?;
        let w = WaveVector::new(m.k);
        let ms = match coeffs.basis {
            ModeBasis::Linear => mode_spinors(&w)?,
            ModeBasis::Rotated => rotated_mode_spinors(&w)?,
        };
        let f = ms.get(rep)[(m.pol - 1) as usize] * C64::from((w.omega / 2.0).sqrt());
        terms.push((m.k, w.omega, f, m.b));
    }
    let nodes: Vec<(Spinor, Spinor)> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let x = grid.coords(idx);
            let mut psi = Spinor::zeros();
            let mut dpsi = Spinor::zeros();
            for (k, w, f, b) in &terms {
                let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2] - w * time;
                let e = C64::from_polar(1.0, phase);
                let s = b * e + b.conj() * e.conj();
                // ∂_t e^{iφ} = −iω e^{iφ}
                let ds = (b * e - b.conj() * e.conj()) * (-I * *w);
                psi += f * s;
                dpsi += f * ds;
            }
            (psi, dpsi)
        })
        .collect();
    let (v, d): (Vec<_>, Vec<_>) = nodes.into_iter().unzip();
    Ok((
        SpinorGridField { grid, rep, time, values: v },
        SpinorGridField { grid, rep, time, values: d },
    ))
}

pub fn synthesize_field(coeffs: &ModeCoefficients, rep: Representation, grid: Grid, time: f64) -> Result<SpinorGridField> {
    Ok(synthesize_with_dt(coeffs, rep, grid, time)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    /// ∫ (E² + H²)/2
    pub j0: f64,
    /// ∫ E × H
    pub j: [f64; 3],
    /// ∫ x × (E × H)
    pub j_ang: [f64; 3],
}

/// Box quadrature of the energy, momentum and angular momentum densities.
/// Summation runs in node order so results do not depend on the thread count.
pub fn observables(field: &SpinorGridField) -> Observables {
    let m = MatrixSet::new(field.rep);
    let dens: Vec<(f64, [f64; 3])> = field
        .values
        .par_iter()
        .map(|p| {
            let j0 = p.dotc(p).re;
            let j = [0, 1, 2].map(|l| p.dotc(&(m.alpha[l] * p)).re);
            (j0, j)
        })
        .collect();
    let mut out = Observables { j0: 0.0, j: [0.0; 3], j_ang: [0.0; 3] };
    for (idx, (j0, j)) in dens.iter().enumerate() {
        let w = field.grid.weight(idx);
        let x = field.grid.coords(idx);
        out.j0 += w * j0;
        let xj = [x[1] * j[2] - x[2] * j[1], x[2] * j[0] - x[0] * j[2], x[0] * j[1] - x[1] * j[0]];
        for a in 0..3 {
            out.j[a] += w * j[a];
            out.j_ang[a] += w * xj[a];
        }
    }
    out
}

/// T_ij = ψ†(2α_iα_j − δ_ij)ψ.
pub fn stress_tensor(p: &Spinor, m: &MatrixSet) -> [[C64; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut op: Mat6 = m.alpha[i] * m.alpha[j] * C64::from(2.0);
            if i == j {
                op -= Mat6::identity();
            }
            p.dotc(&(op * p))
        })
    })
}

/// δ_ij(E†E + H†H)/2 − (E_j*E_i + H_j*H_i).
pub fn stress_tensor_from_e_h(e: &[C64; 3], h: &[C64; 3]) -> [[C64; 3]; 3] {
    let en: f64 = e.iter().chain(h.iter()).map(|z| z.norm_sqr()).sum::<f64>() * 0.5;
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let d = if i == j { C64::from(en) } else { C64::default() };
            d - (e[j].conj() * e[i] + h[j].conj() * h[i])
        })
    })
}

/// Pointwise stress tensor over the grid (real for physical data).
pub fn stress_field(field: &SpinorGridField) -> Vec<[[f64; 3]; 3]> {
    let m = MatrixSet::new(field.rep);
    field.values.par_iter().map(|p| stress_tensor(p, &m).map(|r| r.map(|z| z.re))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootCluster {
    pub omega_sq: f64,
    /// Multiplicity as a root of the degree-6 polynomial in ω.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dispersion {
    pub k: [f64; 3],
    /// Coefficients of det(ω − α·k) in ascending powers of ω.
    pub coefficients: [f64; 7],
    pub roots: Vec<RootCluster>,
}

/// Factor det(ω − α·k) by sampling at seven nodes, interpolating, and clustering the
/// roots in s = ω² of the (even) result.
pub fn dispersion_roots(k: [f64; 3]) -> Result<Dispersion> {
    if !k.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite(format!("k = {k:?}")));
    }
    let m = MatrixSet::new(Representation::Standard);
    let ak = m.alpha_dot(k);
    let w = WaveVector::new(k);
    let scale = if w.omega > 0.0 { w.omega } else { 1.0 };
    let nodes: Vec<f64> = (0..7).map(|j| scale * (j as f64 - 3.0) * 0.75).collect();
    let vals: Vec<f64> = nodes.iter().map(|&x| (Mat6::identity() * C64::from(x) - ak).determinant().re).collect();
    // interpolate in the scaled variable u = ω/scale for conditioning
    let v = DMatrix::from_fn(7, 7, |r, c| (nodes[r] / scale).powi(c as i32));
    let rhs = DVector::from_vec(vals);
    let cu = v.lu().solve(&rhs).ok_or_else(|| Error::NonFinite("singular interpolation system".into()))?;
    let coefficients: [f64; 7] = std::array::from_fn(|j| cu[j] / scale.powi(j as i32));

    // even part in s = (ω/scale)²: d0 + d1 s + d2 s² + s³
    let mut poly = vec![cu[0] / cu[6], cu[2] / cu[6], cu[4] / cu[6], 1.0];
    let mut s_roots: Vec<f64> = Vec::new();
    // deflate s = 0 first; a nilpotent companion matrix stalls the QR iteration
    while poly.len() > 1 && poly[0].abs() < 1e-10 {
        s_roots.push(0.0);
        poly.remove(0);
    }
    match poly.len() {
        1 => {}
        2 => s_roots.push(-poly[0]),
        3 => {
            let (c, b) = (poly[0], poly[1]);
            let disc = (b * b - 4.0 * c).max(0.0).sqrt();
            s_roots.push(0.5 * (-b - disc));
            s_roots.push(0.5 * (-b + disc));
        }
        _ => {
            let comp = Matrix3::new(0.0, 0.0, -poly[0], 1.0, 0.0, -poly[1], 0.0, 1.0, -poly[2]);
            let schur = nalgebra::linalg::Schur::try_new(comp, 1e-15, 10_000)
                .ok_or_else(|| Error::NonFinite(format!("companion eigenvalues did not converge for k = {k:?}")))?;
            s_roots.extend(schur.complex_eigenvalues().iter().map(|z| z.re));
        }
    }
    s_roots.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut roots: Vec<(f64, usize)> = Vec::new();
    for s in s_roots {
        match roots.last_mut() {
            Some((sum, n)) if (s - *sum / *n as f64).abs() < 1e-5 => {
                *sum += s;
                *n += 1;
            }
            _ => roots.push((s, 1)),
        }
    }
    let roots = roots
        .into_iter()
        .map(|(sum, n)| {
            let mut s = sum / n as f64 * scale * scale;
            if s.abs() < 1e-9 * scale * scale {
                s = 0.0;
            }
            RootCluster { omega_sq: s, multiplicity: 2 * n }
        })
        .collect();
    Ok(Dispersion { k, coefficients, roots })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> Grid {
        Grid::periodic_box([2.0 * std::f64::consts::PI; 3], [8, 8, 8]).unwrap()
    }

    #[test]
    fn chiral_sample_layout() {
        let p = spinor_from_e_h([1.0, 0.0, 0.0], [0.0; 3], Representation::Chiral);
        let want = [0.5, 0.0, 0.0, 0.5, 0.0, 0.0];
        for r in 0..6 {
            assert_eq!(p[r], C64::from(want[r]));
        }
    }

    #[test]
    fn standard_is_u_chiral_and_round_trip() {
        let e = [0.3, -1.2, 0.7];
        let h = [2.0, 0.1, -0.4];
        let c = spinor_from_e_h(e, h, Representation::Chiral);
        let s = spinor_from_e_h(e, h, Representation::Standard);
        assert!((basis_change() * c - s).camax() < 1e-15);
        for rep in [Representation::Chiral, Representation::Standard] {
            let p = spinor_from_e_h(e, h, rep);
            let (e2, h2) = e_h_of(&p, rep);
            for a in 0..3 {
                assert!((e2[a] - e[a]).norm() < 1e-15 && (h2[a] - h[a]).norm() < 1e-15);
            }
            let energy: f64 = e.iter().chain(h.iter()).map(|x| x * x).sum::<f64>() / 2.0;
            assert!((p.dotc(&p).re - energy).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new([0.0; 3], [0.1, 0.0, 0.1], [5, 5, 5], Boundary::Periodic).is_err());
        assert!(Grid::new([0.0; 3], [0.1; 3], [4, 5, 5], Boundary::Periodic).is_err());
        let g = Grid::new([0.0; 3], [0.1; 3], [5, 5, 5], Boundary::Unspecified).unwrap();
        let f = SpinorGridField::zeros(g, Representation::Standard, 0.0);
        assert!(matches!(dirac_residual(&f, &f), Err(Error::BoundaryUnsupported(_))));
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = SpinorGridField::zeros(small_grid(), Representation::Standard, 0.0);
        let g2 = Grid::periodic_box([1.0; 3], [8, 8, 8]).unwrap();
        let b = SpinorGridField::zeros(g2, Representation::Standard, 0.0);
        assert!(matches!(dirac_residual(&a, &b), Err(Error::GridMismatch(_))));
        assert!(assemble_spinor(small_grid(), &[[0.0; 3]; 3], &[[0.0; 3]; 3], Representation::Chiral, 0.0).is_err());
    }

    #[test]
    fn uniform_field_has_zero_residual() {
        let g = small_grid();
        let f = SpinorGridField::from_fn(g, Representation::Chiral, 0.0, |_| {
            spinor_from_e_h([1.0, 2.0, 3.0], [0.5, 0.0, -1.0], Representation::Chiral)
        });
        let dt = SpinorGridField::zeros(g, Representation::Chiral, 0.0);
        assert_eq!(dirac_residual(&f, &dt).unwrap(), 0.0);
    }

    #[test]
    fn longitudinal_field_flagged() {
        let g = Grid::new([-1.0; 3], [0.25; 3], [9, 9, 9], Boundary::OneSided).unwrap();
        let n = g.len();
        let e: Vec<[f64; 3]> = (0..n).map(|i| [g.coords(i)[0], 0.0, 0.0]).collect();
        let f = assemble_spinor(g, &e, &vec![[0.0; 3]; n], Representation::Standard, 0.0).unwrap();
        let (de, dh) = divergence_norms(&f).unwrap();
        assert!((de - 1.0).abs() < 1e-12 && dh == 0.0);
        assert!(matches!(require_transverse(&f, 1e-8), Err(Error::NonTransverseInput { .. })));
    }

    #[test]
    fn single_mode_pattern() {
        // b(k,1) = 1 along the 3-axis: E = √(2ω) ε₁ cos(k·x − ωt) with ε₁ = x̂
        let g = small_grid();
        let c = ModeCoefficients::single([0.0, 0.0, 2.0], 1, C64::from(1.0));
        let f = synthesize_field(&c, Representation::Standard, g, 0.3).unwrap();
        let (e, h) = f.e_h();
        for idx in [0, 17, 300] {
            let x = g.coords(idx);
            let amp = (2.0f64 * 2.0).sqrt() * (2.0 * x[2] - 2.0 * 0.3).cos();
            assert!((e[idx][0] - amp).abs() < 1e-13);
            assert!(e[idx][1].abs() < 1e-13 && e[idx][2].abs() < 1e-13);
            assert!((h[idx][1] - amp).abs() < 1e-13);
        }
        for (eh, _) in f.e_h_complex().iter().zip(0..) {
            assert!(eh.0.iter().chain(eh.1.iter()).all(|z| z.im.abs() < 1e-13));
        }
    }

    #[test]
    fn empty_coefficients_give_zero_field() {
        let f = synthesize_field(&ModeCoefficients::default(), Representation::Chiral, small_grid(), 0.0).unwrap();
        assert_eq!(f.max_abs(), 0.0);
        let o = observables(&f);
        assert_eq!((o.j0, o.j, o.j_ang), (0.0, [0.0; 3], [0.0; 3]));
    }

    #[test]
    fn incommensurate_rejected() {
        let c = ModeCoefficients::single([0.0, 0.0, 1.5], 1, C64::from(1.0));
        assert!(matches!(
            synthesize_field(&c, Representation::Standard, small_grid(), 0.0),
            Err(Error::IncommensurateMode { .. })
        ));
    }

    #[test]
    fn equal_helicity_amplitudes_are_linear() {
        let k = [1.0, 0.0, 0.0];
        let circ = [CircularEntry { k, helicity: 1, a: C64::from(0.5) }, CircularEntry { k, helicity: -1, a: C64::from(0.5) }];
        let c = ModeCoefficients::from_circular(&circ);
        assert!((c.amplitude(k, 1) - C64::from(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(c.amplitude(k, 2).norm() < 1e-15);
        assert!(c.circular_consistency() < 1e-15);
    }

    #[test]
    fn parseval_single_mode() {
        let g = small_grid();
        let c = ModeCoefficients::single([1.0, 2.0, -1.0], 2, C64::new(0.3, -0.4));
        let f = synthesize_field(&c, Representation::Chiral, g, 0.7).unwrap();
        let o = observables(&f);
        let (e, p) = c.energy_momentum(g.volume());
        assert!((o.j0 - e).abs() < 1e-10 * e);
        for a in 0..3 {
            assert!((o.j[a] - p[a]).abs() < 1e-10 * e);
        }
    }

    #[test]
    fn counter_propagating_momentum_cancels() {
        let g = small_grid();
        let c = ModeCoefficients {
            basis: ModeBasis::Linear,
            modes: vec![
                ModeEntry { k: [0.0, 1.0, 1.0], pol: 1, b: C64::from(1.0) },
                ModeEntry { k: [0.0, -1.0, -1.0], pol: 1, b: C64::from(1.0) },
            ],
            circular: vec![],
        };
        let o = observables(&synthesize_field(&c, Representation::Standard, g, 0.0).unwrap());
        assert!(o.j.iter().all(|x| x.abs() < 1e-10));
    }

    #[test]
    fn dispersion_examples() {
        let d = dispersion_roots([0.0, 0.0, 2.0]).unwrap();
        assert_eq!(d.roots.len(), 2);
        assert_eq!((d.roots[0].omega_sq, d.roots[0].multiplicity), (0.0, 2));
        assert!((d.roots[1].omega_sq - 4.0).abs() < 1e-10 && d.roots[1].multiplicity == 4);
        let d = dispersion_roots([0.0; 3]).unwrap();
        assert_eq!(d.roots, vec![RootCluster { omega_sq: 0.0, multiplicity: 6 }]);
        let d = dispersion_roots([1.0, 2.0, 2.0]).unwrap();
        assert!((d.roots[1].omega_sq - 9.0).abs() < 1e-9);
        // ω⁶ − 18ω⁴ + 81ω²
        let want = [0.0, 0.0, 81.0, 0.0, -18.0, 0.0, 1.0];
        for j in 0..7 {
            assert!((d.coefficients[j] - want[j]).abs() < 1e-9, "{:?}", d.coefficients);
        }
    }
}
