use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Dense `n x n` complex matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct MatrixC {
    n: usize,
    data: Vec<Complex64>,
}

/// Wire form: `{"n": int, "entries": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for MatrixC {
    type Error = crate::Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        let data = json
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        MatrixC::new(json.n, data)
    }
}

impl From<MatrixC> for MatrixJson {
    fn from(m: MatrixC) -> Self {
        MatrixJson {
            n: m.n,
            entries: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl MatrixC {
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("matrix dimension must be at least 1"));
        }
        if data.len() != n * n {
            return Err(invalid(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(MatrixC { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix dimension must be at least 1");
        MatrixC {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real_diag(&vec![1.0; n])
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a real matrix from rows; rows must be square and finite.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("rows must form a square matrix"));
        }
        let data = rows
            .iter()
            .flatten()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        Self::new(n, data)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> MatrixC {
        MatrixC::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> MatrixC {
        MatrixC {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖X − X*‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// Principal submatrix with row/column `skip` removed.
    pub fn without_index(&self, skip: usize) -> Result<MatrixC> {
        if self.n == 1 || skip >= self.n {
            return Err(invalid("cannot remove an index from this matrix"));
        }
        let keep: Vec<usize> = (0..self.n).filter(|&i| i != skip).collect();
        Ok(MatrixC::from_fn(keep.len(), |i, j| self[(keep[i], keep[j])]))
    }

    pub(crate) fn check_same_dim(&self, other: &MatrixC) -> Result<()> {
        if self.n != other.n {
            return Err(invalid(format!(
                "dimension mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for MatrixC {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for MatrixC {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl<'a> Add<&'a MatrixC> for &'a MatrixC {
    type Output = MatrixC;

    fn add(self, rhs: &MatrixC) -> MatrixC {
        assert_eq!(self.n, rhs.n, "dimension mismatch in addition");
        MatrixC {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a MatrixC> for &'a MatrixC {
    type Output = MatrixC;

    fn sub(self, rhs: &MatrixC) -> MatrixC {
        assert_eq!(self.n, rhs.n, "dimension mismatch in subtraction");
        MatrixC {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a MatrixC> for &'a MatrixC {
    type Output = MatrixC;

    fn mul(self, rhs: &MatrixC) -> MatrixC {
        assert_eq!(self.n, rhs.n, "dimension mismatch in product");
        let n = self.n;
        let mut out = MatrixC::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}
