//! Eigenvalue curves of a Hermitian pencil `M(t) = M0 + t·M1`.
//!
//! Provides branch tracking across a parameter grid, numerical degeneracy
//! detection, the Hellmann–Feynman derivative for simple eigenvalues and the
//! projector-trace derivative for degenerate clusters, plus a Weyl envelope
//! check.

mod assignment;
mod tracking;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{eigh, HermitianMatrix, MatrixC, Spectrum};

pub use tracking::{track_branches, EigenBranchSet, MAX_REFINE_DEPTH};

/// Relative factor for the default degeneracy gap.
pub const DEFAULT_GAP_FACTOR: f64 = 1e-8;

/// `gap_tol = 1e-8·max(1, ‖M‖₂)` for a spectrum of `M`.
pub fn default_gap_tol(s: &Spectrum) -> f64 {
    DEFAULT_GAP_FACTOR * s.max_abs().max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PencilJson", into = "PencilJson")]
pub struct HermitianPencil {
    m0: HermitianMatrix,
    m1: HermitianMatrix,
}

/// Wire form: `{"M0": matrix-json, "M1": matrix-json}`.
#[derive(Serialize, Deserialize)]
struct PencilJson {
    #[serde(rename = "M0")]
    m0: HermitianMatrix,
    #[serde(rename = "M1")]
    m1: HermitianMatrix,
}

impl TryFrom<PencilJson> for HermitianPencil {
    type Error = Error;

    fn try_from(p: PencilJson) -> Result<Self> {
        HermitianPencil::new(p.m0, p.m1)
    }
}

impl From<HermitianPencil> for PencilJson {
    fn from(p: HermitianPencil) -> Self {
        PencilJson { m0: p.m0, m1: p.m1 }
    }
}

impl HermitianPencil {
    pub fn new(m0: HermitianMatrix, m1: HermitianMatrix) -> Result<Self> {
        if m0.n() != m1.n() {
            return Err(invalid(format!(
                "pencil dimensions differ: {} vs {}",
                m0.n(),
                m1.n()
            )));
        }
        Ok(HermitianPencil { m0, m1 })
    }

    pub fn n(&self) -> usize {
        self.m0.n()
    }

    pub fn m0(&self) -> &HermitianMatrix {
        &self.m0
    }

    /// `M'(t) = M1`.
    pub fn m1(&self) -> &HermitianMatrix {
        &self.m1
    }

    pub fn at(&self, t: f64) -> HermitianMatrix {
        self.m0
            .add_scaled(t, &self.m1)
            .expect("pencil dimensions are checked at construction")
    }

    pub fn spectrum_at(&self, t: f64) -> Result<Spectrum> {
        if !t.is_finite() {
            return Err(invalid("pencil parameter must be finite"));
        }
        eigh(&self.at(t))
    }

    /// `‖M1‖₂`, the Lipschitz constant of every eigenvalue branch.
    pub fn lipschitz(&self) -> Result<f64> {
        Ok(eigh(&self.m1)?.max_abs())
    }
}

/// A maximal group of numerically coincident eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct DegenerateCluster {
    /// Contiguous indices into the non-increasing spectrum (0-based).
    pub indices: Vec<usize>,
    pub multiplicity: usize,
    /// Orthogonal projector onto the cluster's eigenspace.
    pub projector: HermitianMatrix,
}

impl DegenerateCluster {
    /// Builds the cluster from frame columns `indices` of `s`.
    pub fn from_spectrum(s: &Spectrum, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() || indices.iter().any(|&i| i >= s.n()) {
            return Err(invalid("cluster indices out of range"));
        }
        let n = s.n();
        let q = s.frame();
        let mut p = MatrixC::zeros(n);
        for &k in &indices {
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += q[(i, k)] * q[(j, k)].conj();
                }
            }
        }
        Ok(DegenerateCluster {
            multiplicity: indices.len(),
            indices,
            projector: crate::linalg::re_part(&p),
        })
    }
}

/// Splits a spectrum into maximal contiguous runs whose consecutive gaps are
/// below `gap_tol`.
pub fn detect_clusters(s: &Spectrum, gap_tol: f64) -> Result<Vec<DegenerateCluster>> {
    cluster_indices(s.values(), gap_tol)?
        .into_iter()
        .map(|idx| DegenerateCluster::from_spectrum(s, idx))
        .collect()
}

pub(crate) fn cluster_indices(values: &[f64], gap_tol: f64) -> Result<Vec<Vec<usize>>> {
    if !(gap_tol > 0.0) {
        return Err(invalid("gap_tol must be positive"));
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(run) if values[i - 1] - v < gap_tol => run.push(i),
            _ => out.push(vec![i]),
        }
    }
    Ok(out)
}

fn quadratic_form(m: &MatrixC, u: &[Complex64]) -> Complex64 {
    let n = m.n();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += m[(i, j)] * u[j];
        }
        acc += u[i].conj() * row;
    }
    acc
}

/// `u*·M·u` for a unit vector `u` and Hermitian `M`.
pub fn rayleigh(m: &HermitianMatrix, u: &[Complex64]) -> f64 {
    quadratic_form(m.matrix(), u).re
}

/// Hellmann–Feynman derivative `λ'_j(t) = u_j*(t)·M1·u_j(t)`.
///
/// `j` is a 0-based index into the non-increasing spectrum of `M(t)`. When
/// `gap_tol` is `None` the default relative gap is used.
pub fn eigen_derivative_simple(
    p: &HermitianPencil,
    t: f64,
    j: usize,
    gap_tol: Option<f64>,
) -> Result<f64> {
    let s = p.spectrum_at(t)?;
    derivative_from_spectrum(p.m1(), &s, j, gap_tol.unwrap_or_else(|| default_gap_tol(&s)))
}

pub(crate) fn derivative_from_spectrum(
    m1: &HermitianMatrix,
    s: &Spectrum,
    j: usize,
    gap_tol: f64,
) -> Result<f64> {
    let n = s.n();
    if j >= n {
        return Err(invalid(format!("eigen index {j} out of range for n = {n}")));
    }
    let v = s.values();
    let gap = spectral_gap(v, j);
    if gap <= gap_tol {
        return Err(Error::DegenerateSpectrum {
            index: j,
            gap,
            tol: gap_tol,
        });
    }
    let u = s.vector(j);
    let z = quadratic_form(m1.matrix(), &u);
    let scale = s.max_abs().max(1.0) + m1.matrix().frobenius_norm();
    if z.im.abs() > 1e-12 * scale {
        return Err(Error::NumericalFailure(format!(
            "Rayleigh quotient has imaginary residue {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// Distance from `values[j]` to its nearest neighbour (∞ for `n = 1`).
pub fn spectral_gap(values: &[f64], j: usize) -> f64 {
    let mut gap = f64::INFINITY;
    if j > 0 {
        gap = gap.min(values[j - 1] - values[j]);
    }
    if j + 1 < values.len() {
        gap = gap.min(values[j] - values[j + 1]);
    }
    gap
}

/// Derivative of a permanently degenerate branch: `(1/m)·Tr(M1·P)`.
pub fn eigen_derivative_projector(p: &HermitianPencil, cluster: &DegenerateCluster) -> Result<f64> {
    let proj = cluster.projector.matrix();
    if proj.n() != p.n() {
        return Err(invalid("projector dimension does not match the pencil"));
    }
    if cluster.multiplicity == 0 || cluster.multiplicity != cluster.indices.len() {
        return Err(invalid("cluster multiplicity must equal its index count and be >= 1"));
    }
    let idempotence = (&(proj * proj) - proj).frobenius_norm();
    if idempotence > 1e-9 {
        return Err(invalid(format!(
            "projector is not idempotent (‖P² − P‖_F = {idempotence:e})"
        )));
    }
    let m = cluster.multiplicity as f64;
    if (proj.trace().re - m).abs() > 1e-9 {
        return Err(invalid(format!(
            "projector trace {} does not match multiplicity {}",
            proj.trace().re,
            cluster.multiplicity
        )));
    }
    Ok((p.m1().matrix() * proj).trace().re / m)
}

/// Per-index slacks of `λ_j(M0)+λ_n(tM1) ≤ λ_j(M(t)) ≤ λ_j(M0)+λ_1(tM1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylSlacks {
    pub t: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub tol: f64,
}

impl WeylSlacks {
    pub fn min_slack(&self) -> f64 {
        self.lower
            .iter()
            .chain(&self.upper)
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn holds(&self) -> bool {
        self.min_slack() >= -self.tol
    }
}

pub fn weyl_envelope_check(p: &HermitianPencil, t: f64) -> Result<WeylSlacks> {
    let s0 = eigh(p.m0())?;
    let s1 = eigh(p.m1())?;
    let st = p.spectrum_at(t)?;
    let v1 = s1.values();
    let (hi, lo) = if t >= 0.0 {
        (t * v1[0], t * v1[v1.len() - 1])
    } else {
        (t * v1[v1.len() - 1], t * v1[0])
    };
    let lower = st
        .values()
        .iter()
        .zip(s0.values())
        .map(|(&lt, &l0)| lt - (l0 + lo))
        .collect();
    let upper = st
        .values()
        .iter()
        .zip(s0.values())
        .map(|(&lt, &l0)| (l0 + hi) - lt)
        .collect();
    let tol = 1e-9 * (s0.max_abs() + t.abs() * s1.max_abs()).max(1.0);
    Ok(WeylSlacks {
        t,
        lower,
        upper,
        tol,
    })
}
