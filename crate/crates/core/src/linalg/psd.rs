use serde::{Deserialize, Serialize};

use super::hermitian::{eigh, eigh_with, HermitianMatrix, Spectrum};
use super::jacobi::EighOptions;
use super::matrix::MatrixC;
use crate::error::{invalid, Error, Result};

/// Relative floor below which negative eigenvalues reject a PSD candidate.
pub const PSD_CLAMP_TOL: f64 = 1e-10;

/// Positive semidefinite matrix together with its (clamped) spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixC", into = "MatrixC")]
pub struct PsdMatrix {
    base: HermitianMatrix,
    spectrum: Spectrum,
    certified_min_eig: f64,
}

impl TryFrom<MatrixC> for PsdMatrix {
    type Error = Error;

    fn try_from(m: MatrixC) -> Result<Self> {
        PsdMatrix::from_matrix(m)
    }
}

impl From<PsdMatrix> for MatrixC {
    fn from(p: PsdMatrix) -> Self {
        p.base.into_matrix()
    }
}

impl PsdMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        Self::new_with(h, &EighOptions::default())
    }

    pub fn new_with(h: HermitianMatrix, opts: &EighOptions) -> Result<Self> {
        let spectrum = eigh_with(&h, opts)?;
        Self::from_spectrum(h, spectrum)
    }

    pub fn from_matrix(m: MatrixC) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(HermitianMatrix::identity(n)).expect("identity is PSD")
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_diag(&vec![0.0; n]).expect("zero is PSD")
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("matrix dimension must be at least 1"));
        }
        Self::new(HermitianMatrix::from_real_diag(diag))
    }

    fn from_spectrum(h: HermitianMatrix, spectrum: Spectrum) -> Result<Self> {
        let norm = spectrum.max_abs();
        let floor = -PSD_CLAMP_TOL * norm.max(1.0);
        let min = spectrum.values().last().copied().unwrap_or(0.0);
        if min < floor {
            return Err(invalid(format!(
                "matrix is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        let clamped: Vec<f64> = spectrum.values().iter().map(|&l| l.max(0.0)).collect();
        Ok(PsdMatrix {
            base: h,
            spectrum: Spectrum::from_parts(clamped, spectrum.frame().clone()),
            certified_min_eig: min,
        })
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn matrix(&self) -> &MatrixC {
        self.base.matrix()
    }

    /// Spectrum with round-off negatives clamped to zero.
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn certified_min_eig(&self) -> f64 {
        self.certified_min_eig
    }

    /// `‖A‖₂ = λ₁(A)`.
    pub fn spectral_norm(&self) -> f64 {
        self.spectrum.values().first().copied().unwrap_or(0.0)
    }

    pub fn scale(&self, c: f64) -> Result<PsdMatrix> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(invalid("PSD scale factor must be finite and non-negative"));
        }
        let values = self.spectrum.values().iter().map(|l| l * c).collect();
        Ok(PsdMatrix {
            base: self.base.scale(c),
            spectrum: Spectrum::from_parts(values, self.spectrum.frame().clone()),
            certified_min_eig: self.certified_min_eig * c,
        })
    }
}

/// `A^r = Q·diag(λ^r)·Q*` from the spectrum cached on `A`.
pub fn psd_power(a: &PsdMatrix, r: f64) -> Result<PsdMatrix> {
    psd_power_impl(a, r, None)
}

/// Like [`psd_power`] but re-diagonalizes `A` with the given options.
pub fn psd_power_with(a: &PsdMatrix, r: f64, opts: &EighOptions) -> Result<PsdMatrix> {
    if *opts == EighOptions::default() {
        psd_power_impl(a, r, None)
    } else {
        psd_power_impl(a, r, Some(opts))
    }
}

fn psd_power_impl(a: &PsdMatrix, r: f64, opts: Option<&EighOptions>) -> Result<PsdMatrix> {
    if !r.is_finite() || r < 0.0 {
        return Err(invalid(format!("power must be finite and >= 0, got {r}")));
    }
    if r == 1.0 {
        return Ok(a.clone());
    }
    let fresh;
    let spectrum = match opts {
        Some(o) => {
            let s = eigh_with(a.hermitian(), o)?;
            let clamped = s.values().iter().map(|&l| l.max(0.0)).collect();
            fresh = Spectrum::from_parts(clamped, s.frame().clone());
            &fresh
        }
        None => a.spectrum(),
    };
    let pow = |l: f64| l.max(0.0).powf(r);
    let base = HermitianMatrix::symmetrized(&spectrum.reconstruct_with(pow));
    let values: Vec<f64> = spectrum.values().iter().map(|&l| pow(l)).collect();
    let certified_min_eig = values.last().copied().unwrap_or(0.0);
    Ok(PsdMatrix {
        base,
        spectrum: Spectrum::from_parts(values, spectrum.frame().clone()),
        certified_min_eig,
    })
}

/// Singular values, non-negative and non-increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularValues(Vec<f64>);

impl SingularValues {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn largest(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    /// Ky Fan k-norm: the sum of the `k` largest singular values.
    pub fn ky_fan(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.0.len() {
            return Err(invalid(format!(
                "Ky Fan order must lie in 1..={}, got {k}",
                self.0.len()
            )));
        }
        Ok(self.0[..k].iter().sum())
    }
}

/// Singular values of `X`.
///
/// Computed as the top half of the spectrum of the Hermitian dilation
/// `[[0, X], [X*, 0]]`, whose eigenvalues are `±s_j(X)`. This keeps small
/// singular values accurate to `eps·‖X‖` in absolute terms, where the Gram
/// route `√λ(X*X)` would only give `√eps·‖X‖`.
pub fn singular_values(x: &MatrixC) -> Result<SingularValues> {
    singular_values_with(x, &EighOptions::default())
}

pub fn singular_values_with(x: &MatrixC, opts: &EighOptions) -> Result<SingularValues> {
    let n = x.n();
    let mut d = MatrixC::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            d[(i, n + j)] = x[(i, j)];
            d[(n + j, i)] = x[(i, j)].conj();
        }
    }
    let s = eigh_with(&HermitianMatrix::symmetrized(&d), opts)?;
    Ok(SingularValues(
        s.values()[..n].iter().map(|&v| v.max(0.0)).collect(),
    ))
}

/// Eigenvalues of a Hermitian matrix as a plain vector (non-increasing).
pub fn eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    Ok(eigh(h)?.values().to_vec())
}
