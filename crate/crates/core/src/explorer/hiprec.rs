//! Double-double re-evaluation of flagged cases.
//!
//! Fractional powers use the Jacobi kernel in double-double arithmetic;
//! singular values and eigenvalues come from the characteristic polynomial
//! (Faddeev–LeVerrier) whose real roots are isolated between the roots of
//! its derivative and refined by bisection.

use num_complex::Complex;
use num_traits::{One, Zero};
use qd::Quad;

use crate::error::{Error, Result};
use crate::inequalities::{CheckKind, VerificationRecord, TOL_FACTOR};
use crate::linalg::jacobi::jacobi_eigh;
use crate::linalg::MatrixC;

use super::campaign::CampaignCheck;
use super::family::TrialCase;

/// Largest dimension handled by the high-precision path.
pub const HP_MAX_DIM: usize = 4;

type Dd = Quad;
type Cdd = Complex<Dd>;

fn dd(x: f64) -> Dd {
    Quad::from_f64(x)
}

fn to_f64(x: Dd) -> f64 {
    x.0 + x.1
}

fn max(x: Dd, y: Dd) -> Dd {
    if y > x {
        y
    } else {
        x
    }
}

fn min(x: Dd, y: Dd) -> Dd {
    if y < x {
        y
    } else {
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
struct DdMatrix {
    n: usize,
    data: Vec<Cdd>,
}

impl DdMatrix {
    fn from_f64(m: &MatrixC) -> Self {
        DdMatrix {
            n: m.n(),
            data: m
                .as_slice()
                .iter()
                .map(|z| Complex::new(dd(z.re), dd(z.im)))
                .collect(),
        }
    }

    fn zeros(n: usize) -> Self {
        DdMatrix {
            n,
            data: vec![Complex::zero(); n * n],
        }
    }

    fn at(&self, i: usize, j: usize) -> Cdd {
        self.data[i * self.n + j]
    }

    fn mul(&self, o: &DdMatrix) -> DdMatrix {
        let n = self.n;
        let mut out = DdMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.at(i, k);
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + aik * o.at(k, j);
                }
            }
        }
        out
    }

    fn add(&self, o: &DdMatrix) -> DdMatrix {
        DdMatrix {
            n: self.n,
            data: self.data.iter().zip(&o.data).map(|(x, y)| x + y).collect(),
        }
    }

    fn scale(&self, s: Dd) -> DdMatrix {
        DdMatrix {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn adjoint(&self) -> DdMatrix {
        let n = self.n;
        let mut out = DdMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.at(i, j).conj();
            }
        }
        out
    }

    /// `(X + X*)/2`
    fn re_part(&self) -> DdMatrix {
        self.add(&self.adjoint()).scale(dd(0.5))
    }

    fn trace(&self) -> Cdd {
        (0..self.n).fold(Complex::zero(), |acc, i| acc + self.at(i, i))
    }

    /// `A^r` for a PSD `A`, negative eigenvalues clamped to zero.
    fn psd_power(&self, r: f64) -> Result<DdMatrix> {
        if r == 1.0 {
            return Ok(self.clone());
        }
        let n = self.n;
        let mut work = self.re_part().data;
        let (values, vectors) = jacobi_eigh(&mut work, n, dd(1e-30), 100).map_err(|e| {
            Error::NumericalFailure(format!(
                "double-double Jacobi did not converge after {} sweeps",
                e.sweeps
            ))
        })?;
        let rr = dd(r);
        let p: Vec<Dd> = values
            .iter()
            .map(|&l| {
                if l <= Dd::zero() {
                    if r == 0.0 {
                        Dd::one()
                    } else {
                        Dd::zero()
                    }
                } else {
                    (l.ln() * rr).exp()
                }
            })
            .collect();
        let mut out = DdMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Cdd::zero();
                for k in 0..n {
                    acc = acc + vectors[i * n + k] * vectors[j * n + k].conj() * p[k];
                }
                out.data[i * n + j] = acc;
            }
        }
        Ok(out)
    }
}

/// Coefficients `c_0..=c_n` (constant term first, monic) of `det(λI − H)`
/// for a Hermitian `H`, by Faddeev–LeVerrier.
fn charpoly(h: &DdMatrix) -> Vec<Dd> {
    let n = h.n;
    let mut c = vec![Dd::zero(); n + 1];
    c[n] = Dd::one();
    let mut m = DdMatrix::zeros(n);
    for k in 1..=n {
        let mut next = h.mul(&m);
        for i in 0..n {
            next.data[i * n + i] = next.data[i * n + i] + Complex::new(c[n - k + 1], Dd::zero());
        }
        m = next;
        c[n - k] = -h.mul(&m).trace().re / dd(k as f64);
    }
    c
}

fn horner(c: &[Dd], x: Dd) -> Dd {
    c.iter().rev().fold(Dd::zero(), |acc, &ci| acc * x + ci)
}

fn derivative(c: &[Dd]) -> Vec<Dd> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| ck * dd(k as f64))
        .collect()
}

fn bisect(c: &[Dd], mut lo: Dd, mut hi: Dd) -> Dd {
    let mut flo = horner(c, lo);
    for _ in 0..400 {
        let mid = (lo + hi) * dd(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        let fm = horner(c, mid);
        if fm == Dd::zero() {
            return mid;
        }
        if (fm < Dd::zero()) == (flo < Dd::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * dd(0.5)
}

/// Real roots (ascending) of a polynomial known to have only real roots.
///
/// Each root of `p` lies between consecutive roots of `p'`; an interval
/// without a sign change holds a multiple root at one of its ends.
fn real_roots(c: &[Dd]) -> Vec<Dd> {
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    if deg == 1 {
        return vec![-c[0] / lead];
    }
    let bound = c[..deg]
        .iter()
        .fold(Dd::one(), |m, &ci| max(m, (ci / lead).abs()))
        + Dd::one();
    let crit = real_roots(&derivative(c));
    let mut ends = Vec::with_capacity(deg + 1);
    ends.push(-bound);
    ends.extend(crit.iter().map(|&x| min(max(x, -bound), bound)));
    ends.push(bound);
    ends.windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let (flo, fhi) = (horner(c, lo), horner(c, hi));
            if flo == Dd::zero() {
                lo
            } else if fhi == Dd::zero() {
                hi
            } else if (flo < Dd::zero()) != (fhi < Dd::zero()) {
                bisect(c, lo, hi)
            } else if flo.abs() <= fhi.abs() {
                lo
            } else {
                hi
            }
        })
        .collect()
}

/// Eigenvalues of a Hermitian matrix, non-increasing.
fn eigenvalues(h: &DdMatrix) -> Vec<Dd> {
    let mut roots = real_roots(&charpoly(&h.re_part()));
    roots.reverse();
    roots
}

/// Singular values `√λ(X*X)`, non-increasing.
fn singular_values(x: &DdMatrix) -> Vec<Dd> {
    eigenvalues(&x.adjoint().mul(x))
        .into_iter()
        .map(|l| max(l, Dd::zero()).sqrt())
        .collect()
}

fn record(check: CheckKind, n: usize, lhs: Vec<Dd>, rhs: Vec<Dd>) -> VerificationRecord {
    let margins: Vec<f64> = rhs.iter().zip(&lhs).map(|(r, l)| to_f64(*r - *l)).collect();
    let mut rec = VerificationRecord::compare(
        check,
        n,
        lhs.into_iter().map(to_f64).collect(),
        rhs.into_iter().map(to_f64).collect(),
    );
    rec.margins = margins;
    rec.apply_tol_factor(TOL_FACTOR);
    rec
}

fn scaled(v: Vec<Dd>, c: Dd) -> Vec<Dd> {
    v.into_iter().map(|x| x * c).collect()
}

fn mean_expression(a: &DdMatrix, b: &DdMatrix, t: Dd) -> DdMatrix {
    a.mul(a).add(&a.mul(b).scale(t)).add(&b.mul(b))
}

fn sum_squared(a: &DdMatrix, b: &DdMatrix) -> DdMatrix {
    let s = a.add(b);
    s.mul(&s)
}

/// Re-evaluates the records of `check` on `case` in double-double
/// arithmetic. Record metadata (`r`, `t`, `k`, `proven`) is left for the
/// caller to copy over.
pub fn hp_records(
    check: CampaignCheck,
    case: &TrialCase,
    r: Option<f64>,
    t: Option<f64>,
    grid: &[f64],
) -> Result<Vec<VerificationRecord>> {
    let n = case.n();
    if n > HP_MAX_DIM {
        return Err(crate::error::invalid(format!(
            "high-precision path is limited to n <= {HP_MAX_DIM}"
        )));
    }
    let a = DdMatrix::from_f64(&case.a);
    let b = DdMatrix::from_f64(&case.b);
    let tt = dd(t.unwrap_or(0.0));
    let two = dd(2.0);
    Ok(match check {
        CampaignCheck::Zhan => {
            let r = r.unwrap_or(1.0);
            let y = a
                .psd_power(r)?
                .mul(&b.psd_power(2.0 - r)?)
                .add(&a.psd_power(2.0 - r)?.mul(&b.psd_power(r)?));
            let c = mean_expression(&a, &b, tt);
            vec![record(
                CheckKind::Zhan,
                n,
                scaled(singular_values(&y), two + tt),
                scaled(singular_values(&c), two),
            )]
        }
        CampaignCheck::ZhanNorm => {
            let r = r.unwrap_or(1.0);
            let x = DdMatrix::from_f64(
                case.x
                    .as_ref()
                    .ok_or_else(|| crate::error::invalid("the norm check needs a matrix X"))?,
            );
            let left = a
                .psd_power(r)?
                .mul(&x)
                .mul(&b.psd_power(2.0 - r)?)
                .add(&a.psd_power(2.0 - r)?.mul(&x).mul(&b.psd_power(r)?));
            let right = a
                .mul(&a.mul(&x))
                .add(&a.mul(&x).mul(&b).scale(tt))
                .add(&x.mul(&b).mul(&b));
            let sl = singular_values(&left);
            let sr = singular_values(&right);
            (1..=n)
                .map(|k| {
                    let lhs = sl[..k].iter().fold(Dd::zero(), |s, &v| s + v) * (two + tt);
                    let rhs = sr[..k].iter().fold(Dd::zero(), |s, &v| s + v) * two;
                    record(CheckKind::ZhanNorm, n, vec![lhs], vec![rhs]).with_k(k)
                })
                .collect()
        }
        CampaignCheck::Prop4 => vec![record(
            CheckKind::Prop4,
            n,
            scaled(singular_values(&a.mul(&b)), two + tt),
            singular_values(&mean_expression(&a, &b, tt)),
        )],
        CampaignCheck::AgMean => vec![record(
            CheckKind::AgMean,
            n,
            scaled(singular_values(&a.mul(&b.adjoint())), two),
            singular_values(&a.adjoint().mul(&a).add(&b.adjoint().mul(&b))),
        )],
        CampaignCheck::BhatiaKittaneh => {
            let y = a
                .psd_power(0.5)?
                .mul(&b.psd_power(1.5)?)
                .add(&a.psd_power(1.5)?.mul(&b.psd_power(0.5)?));
            vec![record(
                CheckKind::BhatiaKittaneh,
                n,
                scaled(singular_values(&y), two),
                singular_values(&sum_squared(&a, &b)),
            )]
        }
        CampaignCheck::Drury => vec![record(
            CheckKind::Drury,
            n,
            scaled(singular_values(&a.mul(&b)), dd(4.0)),
            singular_values(&sum_squared(&a, &b)),
        )],
        CampaignCheck::MeanComparison => {
            let c = mean_expression(&a, &b, tt);
            let sc = singular_values(&c);
            vec![
                record(
                    CheckKind::MeanComparisonRe,
                    n,
                    singular_values(&c.re_part()),
                    sc.clone(),
                ),
                record(
                    CheckKind::MeanComparisonSquare,
                    n,
                    scaled(singular_values(&sum_squared(&a, &b)), (two + tt) / dd(4.0)),
                    sc,
                ),
            ]
        }
        CampaignCheck::Corollary2 => {
            let m = mean_expression(&a, &b, tt).re_part();
            let eig = eigenvalues(&m);
            let mut sm: Vec<Dd> = eig.iter().map(|l| l.abs()).collect();
            sm.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
            vec![
                record(CheckKind::Corollary2Psd, n, vec![Dd::zero(); n], eig),
                record(
                    CheckKind::Corollary2Bound,
                    n,
                    scaled(singular_values(&sum_squared(&a, &b)), dd(0.25)),
                    scaled(sm, Dd::one() / (two + tt)),
                ),
            ]
        }
        CampaignCheck::Monotonicity => {
            let m0 = a.mul(&a).add(&b.mul(&b));
            let m1 = a.mul(&b).re_part();
            let f: Vec<Vec<Dd>> = grid
                .iter()
                .map(|&t| {
                    let w = two + dd(t);
                    eigenvalues(&m0.add(&m1.scale(dd(t))))
                        .into_iter()
                        .map(|l| l / w)
                        .collect()
                })
                .collect();
            let worst = (0..n)
                .map(|j| {
                    f.windows(2).fold(Dd::zero(), |m, w| {
                        max(m, (w[1][j] - w[0][j]) / max(w[0][j].abs(), Dd::one()))
                    })
                })
                .collect();
            vec![record(CheckKind::Monotonicity, n, worst, vec![Dd::zero(); n])]
        }
    })
}
