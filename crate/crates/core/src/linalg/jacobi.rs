//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! The kernel is generic over the real scalar so that the same rotation code
//! serves the f64 fast path and the double-double re-check path.

use std::ops::Neg;

use num_complex::Complex;
use num_traits::Num;

/// Real scalar the Jacobi kernel runs on.
pub(crate) trait Real: Copy + Num + Neg<Output = Self> + PartialOrd {
    fn of(x: f64) -> Self;
    fn sqrt(self) -> Self;
    fn to_f64(self) -> f64;

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn of(x: f64) -> Self {
        x
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }
}

impl Real for qd::Quad {
    fn of(x: f64) -> Self {
        qd::Quad::from_f64(x)
    }

    fn sqrt(self) -> Self {
        qd::Quad::sqrt(self)
    }

    fn to_f64(self) -> f64 {
        self.0 + self.1
    }
}

/// Convergence controls for the Jacobi sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EighOptions {
    /// Stop once the off-diagonal Frobenius mass is at most
    /// `threshold * ‖H‖_F`.
    pub threshold: f64,
    pub max_sweeps: usize,
}

impl EighOptions {
    pub const DEFAULT_THRESHOLD: f64 = 1e-14;
    pub const TIGHT_THRESHOLD: f64 = 1e-16;

    pub const fn tight() -> Self {
        EighOptions {
            threshold: Self::TIGHT_THRESHOLD,
            max_sweeps: 100,
        }
    }
}

impl Default for EighOptions {
    fn default() -> Self {
        EighOptions {
            threshold: Self::DEFAULT_THRESHOLD,
            max_sweeps: 100,
        }
    }
}

#[derive(Debug)]
pub(crate) struct NoConvergence {
    pub sweeps: usize,
    pub off_norm: f64,
}

/// Diagonalizes the Hermitian matrix stored row-major in `a` (overwritten).
///
/// Returns eigenvalues sorted non-increasing together with the matching
/// eigenvector columns (row-major `n x n`). Ties keep the order in which the
/// sweeps left them.
pub(crate) fn jacobi_eigh<T: Real>(
    a: &mut [Complex<T>],
    n: usize,
    threshold: T,
    max_sweeps: usize,
) -> Result<(Vec<T>, Vec<Complex<T>>), NoConvergence> {
    debug_assert_eq!(a.len(), n * n);
    let zero = T::zero();
    let one = T::one();
    let two = one + one;
    let hundred = T::of(100.0);

    let mut v = vec![Complex::new(zero, zero); n * n];
    for i in 0..n {
        v[i * n + i] = Complex::new(one, zero);
        a[i * n + i] = Complex::new(a[i * n + i].re, zero);
    }

    let total = a.iter().fold(zero, |acc, z| acc + z.norm_sqr()).sqrt();
    let target = threshold * total;

    let mut sweep = 0;
    loop {
        let mut off = zero;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off + a[i * n + j].norm_sqr();
                }
            }
        }
        let off = off.sqrt();
        if off <= target || off == zero {
            break;
        }
        if sweep == max_sweeps {
            return Err(NoConvergence {
                sweeps: sweep,
                off_norm: off.to_f64(),
            });
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let h = a[p * n + q];
                let habs = h.norm_sqr().sqrt();
                if habs == zero {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Rutishauser: drop elements below the diagonals' resolution.
                if sweep > 3
                    && app.abs() + hundred * habs == app.abs()
                    && aqq.abs() + hundred * habs == aqq.abs()
                {
                    a[p * n + q] = Complex::new(zero, zero);
                    a[q * n + p] = Complex::new(zero, zero);
                    continue;
                }

                let phase = h / habs;
                let theta = (aqq - app) / (two * habs);
                let t = if theta.abs() > T::of(1e150) {
                    one / (two * theta)
                } else {
                    let sgn = if theta < zero { -one } else { one };
                    sgn / (theta.abs() + (theta * theta + one).sqrt())
                };
                let c = one / (t * t + one).sqrt();
                let s = t * c;
                let ph_c = phase.conj();

                // A <- A U with U_pp = c, U_pq = s, U_qp = -s e*, U_qq = c e*.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - ph_c * akq * s;
                    a[k * n + q] = akp * s + ph_c * akq * c;
                }
                // A <- U* A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - phase * aqk * s;
                    a[q * n + k] = apk * s + phase * aqk * c;
                }
                a[p * n + q] = Complex::new(zero, zero);
                a[q * n + p] = Complex::new(zero, zero);
                a[p * n + p] = Complex::new(app - t * habs, zero);
                a[q * n + q] = Complex::new(aqq + t * habs, zero);

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - ph_c * vkq * s;
                    v[k * n + q] = vkp * s + ph_c * vkq * c;
                }
            }
        }
        sweep += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep sweep order
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .re
            .partial_cmp(&a[i * n + i].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = vec![Complex::new(zero, zero); n * n];
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + dst] = v[k * n + src];
        }
    }
    Ok((values, vectors))
}
