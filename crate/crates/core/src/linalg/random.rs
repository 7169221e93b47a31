//! Seeded random instances: Haar-like unitaries, Gaussian and PSD matrices.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::hermitian::HermitianMatrix;
use super::matrix::MatrixC;
use super::psd::PsdMatrix;
use crate::error::{invalid, Result};

pub type SpecRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SpecRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a path of indices.
///
/// The rule depends only on its arguments, so sub-seeds are independent of
/// the order in which work units are executed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Eigenvalue prescription for [`random_psd`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SpectrumSpec {
    /// Exactly these eigenvalues (any order).
    Explicit { values: Vec<f64> },
    /// i.i.d. uniform eigenvalues on `[low, high)`.
    Uniform { low: f64, high: f64 },
    /// `rank` uniform eigenvalues on `[low, high)`, the rest exactly zero.
    RankDeficient { rank: usize, low: f64, high: f64 },
}

impl SpectrumSpec {
    fn sample(&self, n: usize, rng: &mut SpecRng) -> Result<Vec<f64>> {
        let check_range = |low: f64, high: f64| {
            if !(low >= 0.0 && high >= low && high.is_finite()) {
                return Err(invalid("eigenvalue range must satisfy 0 <= low <= high < inf"));
            }
            Ok(())
        };
        let draw = |rng: &mut SpecRng, low: f64, high: f64| {
            if high > low {
                rng.gen_range(low..high)
            } else {
                low
            }
        };
        match self {
            SpectrumSpec::Explicit { values } => {
                if values.len() != n {
                    return Err(invalid(format!(
                        "expected {n} eigenvalues, got {}",
                        values.len()
                    )));
                }
                if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                    return Err(invalid("requested eigenvalues must be finite and >= 0"));
                }
                Ok(values.clone())
            }
            SpectrumSpec::Uniform { low, high } => {
                check_range(*low, *high)?;
                Ok((0..n).map(|_| draw(rng, *low, *high)).collect())
            }
            SpectrumSpec::RankDeficient { rank, low, high } => {
                check_range(*low, *high)?;
                if *rank > n {
                    return Err(invalid("rank exceeds dimension"));
                }
                Ok((0..n)
                    .map(|i| if i < *rank { draw(rng, *low, *high) } else { 0.0 })
                    .collect())
            }
        }
    }
}

fn complex_gaussian(rng: &mut SpecRng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// i.i.d. standard complex Gaussian entries.
pub fn random_gaussian(n: usize, rng: &mut SpecRng) -> MatrixC {
    MatrixC::from_fn(n, |_, _| complex_gaussian(rng))
}

/// GUE-like Hermitian matrix `(G + G*)/2`.
pub fn random_hermitian(n: usize, rng: &mut SpecRng) -> HermitianMatrix {
    HermitianMatrix::symmetrized(&random_gaussian(n, rng))
}

/// Haar-distributed unitary: Gram–Schmidt (with one reorthogonalization
/// pass) on a complex Gaussian matrix. Gram–Schmidt leaves `R` with a
/// positive diagonal, which is what makes `Q` Haar.
pub fn haar_unitary(n: usize, rng: &mut SpecRng) -> MatrixC {
    let g = random_gaussian(n, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for q in &cols {
                let proj: Complex64 = q.iter().zip(&v).map(|(qi, vi)| qi.conj() * vi).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= norm;
        }
        cols.push(v);
    }
    MatrixC::from_fn(n, |i, j| cols[j][i])
}

/// Random PSD matrix `Q·diag(λ)·Q*` with Haar `Q` and `λ` from `spec`.
pub fn random_psd(n: usize, spec: &SpectrumSpec, seed: u64) -> Result<PsdMatrix> {
    let mut rng = rng_from_seed(seed);
    random_psd_from(n, spec, &mut rng)
}

pub fn random_psd_from(n: usize, spec: &SpectrumSpec, rng: &mut SpecRng) -> Result<PsdMatrix> {
    if n == 0 {
        return Err(invalid("matrix dimension must be at least 1"));
    }
    let lambda = spec.sample(n, rng)?;
    let q = haar_unitary(n, rng);
    Ok(psd_from_frame(&q, &lambda)?)
}

/// `Q·diag(λ)·Q*` for a unitary `Q`.
pub fn psd_from_frame(q: &MatrixC, lambda: &[f64]) -> Result<PsdMatrix> {
    let n = q.n();
    if lambda.len() != n {
        return Err(invalid("eigenvalue count does not match frame"));
    }
    let mut m = MatrixC::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += q[(i, k)] * q[(j, k)].conj() * lambda[k];
            }
            m[(i, j)] = acc;
        }
    }
    PsdMatrix::new(HermitianMatrix::symmetrized(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;

    #[test]
    fn explicit_spectrum_is_reproduced() {
        let spec = SpectrumSpec::Explicit {
            values: vec![3.0, 2.0, 1.0],
        };
        let a = random_psd(3, &spec, 7).unwrap();
        let s = eigh(a.hermitian()).unwrap();
        for (got, want) in s.values().iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
        assert!(!a.matrix().is_real());
    }

    #[test]
    fn deterministic_for_same_seed() {
        let spec = SpectrumSpec::Uniform { low: 0.0, high: 2.0 };
        let a = random_psd(4, &spec, 99).unwrap();
        let b = random_psd(4, &spec, 99).unwrap();
        assert_eq!(a.matrix().as_slice(), b.matrix().as_slice());
        let c = random_psd(4, &spec, 100).unwrap();
        assert_ne!(a.matrix().as_slice(), c.matrix().as_slice());
    }

    #[test]
    fn one_by_one() {
        let spec = SpectrumSpec::Explicit { values: vec![5.0] };
        let a = random_psd(1, &spec, 3).unwrap();
        assert!((a.matrix()[(0, 0)] - Complex64::new(5.0, 0.0)).norm() <= 1e-15);
    }

    #[test]
    fn negative_eigenvalue_rejected() {
        let spec = SpectrumSpec::Explicit {
            values: vec![1.0, -0.5],
        };
        assert!(random_psd(2, &spec, 0).is_err());
    }

    #[test]
    fn rank_deficient_has_zero_eigenvalues() {
        let spec = SpectrumSpec::RankDeficient {
            rank: 2,
            low: 0.5,
            high: 1.0,
        };
        let a = random_psd(4, &spec, 11).unwrap();
        let v = a.spectrum().values();
        assert!(v[1] >= 0.5 - 1e-12);
        assert!(v[2].abs() <= 1e-12 && v[3].abs() <= 1e-12);
    }

    #[test]
    fn derive_seed_depends_on_path() {
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_ne!(derive_seed(1, &[2]), derive_seed(2, &[2]));
    }
}
