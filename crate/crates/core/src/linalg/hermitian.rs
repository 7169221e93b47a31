use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jacobi::{jacobi_eigh, EighOptions};
use super::matrix::MatrixC;
use crate::error::{invalid, Error, Result};

/// Hermitian matrix, stored exactly Hermitian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixC", into = "MatrixC")]
pub struct HermitianMatrix {
    base: MatrixC,
}

impl TryFrom<MatrixC> for HermitianMatrix {
    type Error = Error;

    fn try_from(m: MatrixC) -> Result<Self> {
        HermitianMatrix::new(m)
    }
}

impl From<HermitianMatrix> for MatrixC {
    fn from(h: HermitianMatrix) -> Self {
        h.base
    }
}

impl HermitianMatrix {
    /// Accepts `m` if `‖m − m*‖_F ≤ 1e-12·max(1, ‖m‖_F)` and symmetrizes it.
    pub fn new(m: MatrixC) -> Result<Self> {
        let defect = m.hermitian_defect();
        let scale = m.frobenius_norm().max(1.0);
        if defect > 1e-12 * scale {
            return Err(invalid(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(Self::symmetrized(&m))
    }

    /// `(X + X*)/2`, with the diagonal forced real.
    pub(crate) fn symmetrized(m: &MatrixC) -> Self {
        let n = m.n();
        let mut out = MatrixC::zeros(n);
        for i in 0..n {
            out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        HermitianMatrix { base: out }
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix {
            base: MatrixC::identity(n),
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        HermitianMatrix {
            base: MatrixC::from_real_diag(diag),
        }
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn matrix(&self) -> &MatrixC {
        &self.base
    }

    pub fn into_matrix(self) -> MatrixC {
        self.base
    }

    /// `self + t·other`; exact Hermitian symmetry is preserved entrywise.
    pub fn add_scaled(&self, t: f64, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        self.base.check_same_dim(&other.base)?;
        Ok(HermitianMatrix {
            base: &self.base + &other.base.scale(t),
        })
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix {
            base: self.base.scale(s),
        }
    }
}

/// Eigenvalues sorted non-increasing with an orthonormal eigenvector frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    frame: MatrixC,
}

impl Spectrum {
    pub(crate) fn from_parts(values: Vec<f64>, frame: MatrixC) -> Self {
        debug_assert_eq!(values.len(), frame.n());
        Spectrum { values, frame }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column `j` pairs with `values()[j]`.
    pub fn frame(&self) -> &MatrixC {
        &self.frame
    }

    pub fn vector(&self, j: usize) -> Vec<Complex64> {
        self.frame.column(j)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `Q · diag(f(λ)) · Q*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> MatrixC {
        let n = self.n();
        let q = &self.frame;
        let d: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = MatrixC::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += q[(i, k)] * q[(j, k)].conj() * d[k];
                }
                out[(i, j)] = acc;
                if i != j {
                    out[(j, i)] = acc.conj();
                } else {
                    out[(i, i)] = Complex64::new(acc.re, 0.0);
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> MatrixC {
        self.reconstruct_with(|l| l)
    }
}

/// Hermitian eigendecomposition with the default Jacobi threshold.
pub fn eigh(h: &HermitianMatrix) -> Result<Spectrum> {
    eigh_with(h, &EighOptions::default())
}

pub fn eigh_with(h: &HermitianMatrix, opts: &EighOptions) -> Result<Spectrum> {
    let n = h.n();
    let mut work = h.matrix().as_slice().to_vec();
    if work.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(invalid("matrix entries must be finite"));
    }
    let (values, vectors) = jacobi_eigh(&mut work, n, opts.threshold, opts.max_sweeps)
        .map_err(|e| {
            Error::NumericalFailure(format!(
                "Jacobi did not converge after {} sweeps (off-diagonal mass {:e})",
                e.sweeps, e.off_norm
            ))
        })?;
    let frame = MatrixC::new(n, vectors)
        .map_err(|_| Error::NumericalFailure("non-finite eigenvectors".into()))?;
    Ok(Spectrum { values, frame })
}

/// Hermitian part `(X + X*)/2`.
pub fn re_part(x: &MatrixC) -> HermitianMatrix {
    HermitianMatrix::symmetrized(x)
}
