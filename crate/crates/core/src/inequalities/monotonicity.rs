use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{re_part, HermitianMatrix, PsdMatrix};
use crate::pencil::{rayleigh, spectral_gap, track_branches, HermitianPencil};

use super::record::{CheckKind, VerificationRecord, TOL_FACTOR};

/// Bound on `f'(t)` at simple-spectrum points.
pub const DERIVATIVE_SIGN_TOL: f64 = 1e-9;
/// Agreement required between the two expressions for `f'(t)`.
pub const DERIVATIVE_AGREEMENT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonotonicityViolationKind {
    /// `f_j` built from the j-th largest eigenvalue increased.
    SortedIncrease,
    /// `f` along a tracked analytic branch increased. Where the assignment
    /// exchanges ranks, the increase must also exceed the smallest gap met
    /// in that interval.
    BranchIncrease,
    /// Quotient-rule derivative exceeded the sign tolerance.
    DerivativeSign,
    /// The two derivative expressions disagree.
    DerivativeMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub kind: MonotonicityViolationKind,
    /// Sorted index (or branch id for `BranchIncrease`), 0-based.
    pub index: usize,
    pub t: f64,
    pub value: f64,
}

/// `f'(t)` evaluated two ways at one simple eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSample {
    pub t: f64,
    pub index: usize,
    /// `(u*M1u·(2+t) − λ)/(2+t)²`
    pub quotient: f64,
    /// `−u*(A−B)²u/(2+t)²`
    pub identity: f64,
}

/// `f_j(t) = λ_j(A² + B² + (t/2)(AB+BA))/(2+t)` sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityTrace {
    pub n: usize,
    pub grid: Vec<f64>,
    /// `f_values[j][k]` from the j-th largest eigenvalue.
    pub f_values: Vec<Vec<f64>>,
    /// `branch_f_values[b][k]` along tracked branch `b`.
    pub branch_f_values: Vec<Vec<f64>>,
    pub derivative_samples: Vec<DerivativeSample>,
    pub violations: Vec<MonotonicityViolation>,
}

impl MonotonicityTrace {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_derivative(&self) -> f64 {
        self.derivative_samples
            .iter()
            .fold(f64::NEG_INFINITY, |m, s| m.max(s.quotient))
    }

    pub fn max_derivative_mismatch(&self) -> f64 {
        self.derivative_samples
            .iter()
            .fold(0.0_f64, |m, s| m.max((s.quotient - s.identity).abs()))
    }

    /// Summary record. `lhs_j` is the worst normalized excess for index `j`
    /// (relative increase, derivative over its bound, mismatch over its
    /// bound, all scaled to the 1e-9 tolerance), `rhs_j = 0`.
    pub fn to_record(&self) -> VerificationRecord {
        let mut worst = vec![0.0_f64; self.n];
        let scale = TOL_FACTOR;
        for f in [&self.f_values, &self.branch_f_values] {
            for (j, row) in f.iter().enumerate() {
                for w in row.windows(2) {
                    worst[j] = worst[j].max((w[1] - w[0]) / w[0].abs().max(1.0));
                }
            }
        }
        for s in &self.derivative_samples {
            let sign = s.quotient * scale / DERIVATIVE_SIGN_TOL;
            let agree = (s.quotient - s.identity).abs() * scale / DERIVATIVE_AGREEMENT_TOL;
            worst[s.index] = worst[s.index].max(sign).max(agree);
        }
        let mut rec =
            VerificationRecord::compare(CheckKind::Monotonicity, self.n, worst, vec![0.0; self.n]);
        rec.pass = rec.pass && self.violations.is_empty();
        rec
    }
}

/// Traces `f_j(t)` over `grid` (all points `> −2`), recording every
/// increase larger than `1e-9·max(1, f_j(t_k))` and checking `f' ≤ 0` at
/// simple-spectrum points through two independent expressions.
pub fn monotonicity_trace(
    a: &PsdMatrix,
    b: &PsdMatrix,
    grid: &[f64],
) -> Result<MonotonicityTrace> {
    a.matrix().check_same_dim(b.matrix())?;
    if grid.iter().any(|&t| !t.is_finite() || t <= -2.0) {
        return Err(invalid("t must exceed -2"));
    }
    let (am, bm) = (a.matrix(), b.matrix());
    let m0 = re_part(&(&(am * am) + &(bm * bm)));
    let m1 = re_part(&(am * bm));
    let diff = am - bm;
    let diff_sq = re_part(&(&diff * &diff));
    let pencil = HermitianPencil::new(m0, m1)?;
    let set = track_branches(&pencil, grid, None)?;
    let n = a.n();

    let mut f_values = vec![Vec::with_capacity(grid.len()); n];
    let mut branch_f = vec![Vec::with_capacity(grid.len()); n];
    let mut samples = Vec::new();
    for (k, &t) in grid.iter().enumerate() {
        let w = 2.0 + t;
        let order = set.order(k);
        let mut sorted = vec![0.0; n];
        for (b, &i) in order.iter().enumerate() {
            sorted[i] = set.branch(b)[k];
            branch_f[b].push(set.branch(b)[k] / w);
        }
        for (j, &l) in sorted.iter().enumerate() {
            f_values[j].push(l / w);
        }
        let gap_tol = set.gap_tol(k);
        for (b, &i) in order.iter().enumerate() {
            if spectral_gap(&sorted, i) <= gap_tol {
                continue;
            }
            let u = set.frame(k).column(b);
            let hf = rayleigh(pencil.m1(), &u);
            samples.push(DerivativeSample {
                t,
                index: i,
                quotient: (hf * w - sorted[i]) / (w * w),
                identity: -rayleigh(&diff_sq, &u) / (w * w),
            });
        }
    }

    let mut violations = Vec::new();
    collect_increases(&f_values, grid, MonotonicityViolationKind::SortedIncrease, &mut violations);
    for (b, row) in branch_f.iter().enumerate() {
        for (k, w) in row.windows(2).enumerate() {
            let inc = w[1] - w[0];
            if inc <= TOL_FACTOR * w[0].abs().max(1.0) {
                continue;
            }
            let (from, to) = (set.order(k)[b], set.order(k + 1)[b]);
            let allowance = if from == to {
                0.0
            } else {
                crossing_allowance(&pencil, from.min(to), from.max(to), grid[k], grid[k + 1])?
            };
            if inc > allowance + TOL_FACTOR * w[0].abs().max(1.0) {
                violations.push(MonotonicityViolation {
                    kind: MonotonicityViolationKind::BranchIncrease,
                    index: b,
                    t: grid[k + 1],
                    value: inc,
                });
            }
        }
    }
    for s in &samples {
        if s.quotient > DERIVATIVE_SIGN_TOL {
            violations.push(MonotonicityViolation {
                kind: MonotonicityViolationKind::DerivativeSign,
                index: s.index,
                t: s.t,
                value: s.quotient,
            });
        }
        let gap = (s.quotient - s.identity).abs();
        if gap > DERIVATIVE_AGREEMENT_TOL {
            violations.push(MonotonicityViolation {
                kind: MonotonicityViolationKind::DerivativeMismatch,
                index: s.index,
                t: s.t,
                value: gap,
            });
        }
    }

    Ok(MonotonicityTrace {
        n,
        grid: grid.to_vec(),
        f_values,
        branch_f_values: branch_f,
        derivative_samples: samples,
        violations,
    })
}

fn collect_increases(
    f: &[Vec<f64>],
    grid: &[f64],
    kind: MonotonicityViolationKind,
    out: &mut Vec<MonotonicityViolation>,
) {
    for (j, row) in f.iter().enumerate() {
        for (k, w) in row.windows(2).enumerate() {
            let inc = w[1] - w[0];
            if inc > TOL_FACTOR * w[0].abs().max(1.0) {
                out.push(MonotonicityViolation {
                    kind,
                    index: j,
                    t: grid[k + 1],
                    value: inc,
                });
            }
        }
    }
}

/// Upper bound on the jump a branch picks up when the assignment carries it
/// from rank `lo` to rank `hi` (or back) across an unresolved avoided
/// crossing: the sum over the gaps it passes of `min_t gap_i(t)/(2+t)`.
fn crossing_allowance(p: &HermitianPencil, lo: usize, hi: usize, t0: f64, t1: f64) -> Result<f64> {
    let mut total = 0.0;
    for i in lo..hi {
        let g = |t: f64| -> Result<f64> {
            let v = p.spectrum_at(t)?;
            Ok((v.values()[i] - v.values()[i + 1]) / (2.0 + t))
        };
        let (mut a, mut b) = (t0, t1);
        let mut best = g(t0)?.min(g(t1)?);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (b - phi * (b - a), a + phi * (b - a));
        let (mut g1, mut g2) = (g(x1)?, g(x2)?);
        for _ in 0..60 {
            if g1 <= g2 {
                b = x2;
                x2 = x1;
                g2 = g1;
                x1 = b - phi * (b - a);
                g1 = g(x1)?;
            } else {
                a = x1;
                x1 = x2;
                g1 = g2;
                x2 = a + phi * (b - a);
                g2 = g(x2)?;
            }
        }
        best = best.min(g1).min(g2);
        total += best.max(0.0);
    }
    Ok(total)
}

/// `(A − B)²` as a Hermitian matrix.
pub fn difference_squared(a: &PsdMatrix, b: &PsdMatrix) -> HermitianMatrix {
    let d = a.matrix() - b.matrix();
    re_part(&(&d * &d))
}
