use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{EighOptions, MatrixC, PsdMatrix};

/// Relative tolerance factor: `tol = 1e-9·max(1, max rhs)`.
pub const TOL_FACTOR: f64 = 1e-9;

/// Which inequality a [`VerificationRecord`] compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// `(2+t)s_j(A^rB^{2−r}+A^{2−r}B^r) ≤ 2s_j(A²+tAB+B²)`
    Zhan,
    /// Ky Fan k-norm form of the above with an extra matrix `X`.
    ZhanNorm,
    /// `(2+t)s_j(AB) ≤ s_j(A²+tAB+B²)`
    Prop4,
    /// `2s_j(AB*) ≤ s_j(A*A+B*B)`
    AgMean,
    /// `2s_j(A^{1/2}B^{3/2}+A^{3/2}B^{1/2}) ≤ s_j((A+B)²)`
    BhatiaKittaneh,
    /// `4s_j(AB) ≤ s_j((A+B)²)`
    Drury,
    /// `s_j(Re C) ≤ s_j(C)` with `C = A²+tAB+B²`
    MeanComparisonRe,
    /// `((2+t)/4)s_j((A+B)²) ≤ s_j(C)`
    MeanComparisonSquare,
    /// `λ_j(A²+B²+(t/2)(AB+BA)) ≥ 0`
    Corollary2Psd,
    /// `s_j(M(t))/(2+t) ≥ s_j((A+B)²)/4`
    Corollary2Bound,
    /// `λ_j(M(t))/(2+t)` non-increasing in `t`
    Monotonicity,
}

impl CheckKind {
    pub const ALL: [CheckKind; 11] = [
        CheckKind::Zhan,
        CheckKind::ZhanNorm,
        CheckKind::Prop4,
        CheckKind::AgMean,
        CheckKind::BhatiaKittaneh,
        CheckKind::Drury,
        CheckKind::MeanComparisonRe,
        CheckKind::MeanComparisonSquare,
        CheckKind::Corollary2Psd,
        CheckKind::Corollary2Bound,
        CheckKind::Monotonicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Zhan => "zhan",
            CheckKind::ZhanNorm => "zhan-norm",
            CheckKind::Prop4 => "prop4",
            CheckKind::AgMean => "ag-mean",
            CheckKind::BhatiaKittaneh => "bhatia-kittaneh",
            CheckKind::Drury => "drury",
            CheckKind::MeanComparisonRe => "mean-comparison-re",
            CheckKind::MeanComparisonSquare => "mean-comparison-square",
            CheckKind::Corollary2Psd => "corollary2-psd",
            CheckKind::Corollary2Bound => "corollary2-bound",
            CheckKind::Monotonicity => "monotonicity",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| invalid(format!("unknown check '{s}'")))
    }
}

/// Per-index comparison of the two sides of one inequality instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub check: CheckKind,
    pub n: usize,
    pub r: Option<f64>,
    pub t: Option<f64>,
    pub k: Option<usize>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `rhs_j − lhs_j`
    pub margins: Vec<f64>,
    pub pass: bool,
    /// Whether the instance lies in a region where the inequality is a
    /// theorem.
    pub proven: bool,
    pub tol: f64,
    pub seed: Option<u64>,
    /// Set when a negative margin triggered a re-run with the tight
    /// eigensolver threshold.
    #[serde(default)]
    pub rechecked: bool,
}

impl VerificationRecord {
    pub fn compare(check: CheckKind, n: usize, lhs: Vec<f64>, rhs: Vec<f64>) -> Self {
        debug_assert_eq!(lhs.len(), rhs.len());
        let margins = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
        let mut rec = VerificationRecord {
            check,
            n,
            r: None,
            t: None,
            k: None,
            lhs,
            rhs,
            margins,
            pass: false,
            proven: true,
            tol: 0.0,
            seed: None,
            rechecked: false,
        };
        rec.apply_tol_factor(TOL_FACTOR);
        rec
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_proven(mut self, proven: bool) -> Self {
        self.proven = proven;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Recomputes `tol = factor·max(1, max rhs)` and the pass flag.
    pub fn apply_tol_factor(&mut self, factor: f64) {
        let max_rhs = self.rhs.iter().fold(1.0_f64, |m, &v| m.max(v));
        self.tol = factor * max_rhs;
        self.pass = self.min_margin() >= -self.tol;
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Any negative margin, including those inside the tolerance band.
    pub fn near_violation(&self) -> bool {
        self.min_margin() < 0.0
    }
}

/// Runs `eval` with default solver settings and, if any margin comes out
/// negative, once more with the tight Jacobi threshold.
pub(crate) fn with_recheck<F>(eval: F) -> Result<Vec<VerificationRecord>>
where
    F: Fn(&EighOptions) -> Result<Vec<VerificationRecord>>,
{
    let first = eval(&EighOptions::default())?;
    if first.iter().any(VerificationRecord::near_violation) {
        let mut second = eval(&EighOptions::tight())?;
        for rec in &mut second {
            rec.rechecked = true;
        }
        return Ok(second);
    }
    Ok(first)
}

/// One `(A, B, r, t)` instance, with an optional `X` for norm checks.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityCase {
    a: PsdMatrix,
    b: PsdMatrix,
    r: f64,
    t: f64,
    x: Option<MatrixC>,
}

pub(crate) fn check_t(t: f64) -> Result<()> {
    if !t.is_finite() || t <= -2.0 {
        return Err(invalid("t must exceed -2"));
    }
    if t > 2.0 {
        return Err(invalid("t must not exceed 2"));
    }
    Ok(())
}

impl InequalityCase {
    pub fn new(a: PsdMatrix, b: PsdMatrix, r: f64, t: f64) -> Result<Self> {
        if a.n() != b.n() {
            return Err(invalid(format!(
                "dimension mismatch: {} vs {}",
                a.n(),
                b.n()
            )));
        }
        if !(0.0..=2.0).contains(&r) {
            return Err(invalid(format!("r must lie in [0, 2], got {r}")));
        }
        check_t(t)?;
        Ok(InequalityCase { a, b, r, t, x: None })
    }

    pub fn with_x(mut self, x: MatrixC) -> Result<Self> {
        if x.n() != self.a.n() {
            return Err(invalid("X must have the same dimension as A and B"));
        }
        self.x = Some(x);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn a(&self) -> &PsdMatrix {
        &self.a
    }

    pub fn b(&self) -> &PsdMatrix {
        &self.b
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> Option<&MatrixC> {
        self.x.as_ref()
    }
}
