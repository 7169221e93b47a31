use crate::error::{invalid, Result};
use crate::linalg::{
    eigh_with, psd_power_with, re_part, singular_values_with, EighOptions, HermitianMatrix,
    MatrixC, PsdMatrix,
};

use super::record::{check_t, with_recheck, CheckKind, InequalityCase, VerificationRecord};

const PROVEN_R: [f64; 3] = [0.5, 1.0, 1.5];

fn is_proven_r(r: f64) -> bool {
    PROVEN_R.iter().any(|&p| (r - p).abs() <= 1e-12)
}

/// The singular-value form is a theorem for `r ∈ {1/2, 1, 3/2}` and, at
/// `t = 0`, for every `r ∈ [0, 2]`.
pub fn zhan_is_proven(r: f64, t: f64) -> bool {
    t > -2.0 && t <= 2.0 && (is_proven_r(r) || (t == 0.0 && (0.0..=2.0).contains(&r)))
}

/// The norm form is a theorem for `1 ≤ 2r ≤ 3`.
pub fn zhan_norm_is_proven(r: f64) -> bool {
    (0.5..=1.5).contains(&r)
}

fn sv(x: &MatrixC, opts: &EighOptions) -> Result<Vec<f64>> {
    Ok(singular_values_with(x, opts)?.into_vec())
}

fn scaled(v: Vec<f64>, c: f64) -> Vec<f64> {
    v.into_iter().map(|x| c * x).collect()
}

fn pow(a: &PsdMatrix, r: f64, opts: &EighOptions) -> Result<MatrixC> {
    Ok(psd_power_with(a, r, opts)?.matrix().clone())
}

/// `A² + tAB + B²`
fn mean_expression(a: &MatrixC, b: &MatrixC, t: f64) -> MatrixC {
    let ab = a * b;
    &(&(a * a) + &ab.scale(t)) + &(b * b)
}

/// `(A + B)²`
fn sum_squared(a: &MatrixC, b: &MatrixC) -> MatrixC {
    let s = a + b;
    &s * &s
}

fn zhan_sides(c: &InequalityCase, opts: &EighOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    let (a, b, r, t) = (c.a(), c.b(), c.r(), c.t());
    let y = &(&pow(a, r, opts)? * &pow(b, 2.0 - r, opts)?)
        + &(&pow(a, 2.0 - r, opts)? * &pow(b, r, opts)?);
    let cm = mean_expression(a.matrix(), b.matrix(), t);
    Ok((scaled(sv(&y, opts)?, 2.0 + t), scaled(sv(&cm, opts)?, 2.0)))
}

/// `(2+t)·s_j(A^rB^{2−r} + A^{2−r}B^r)` against `2·s_j(A² + tAB + B²)`.
pub fn zhan_singular_value_check(c: &InequalityCase) -> Result<VerificationRecord> {
    let n = c.n();
    let mut recs = with_recheck(|opts| {
        let (lhs, rhs) = zhan_sides(c, opts)?;
        Ok(vec![VerificationRecord::compare(CheckKind::Zhan, n, lhs, rhs)
            .with_r(c.r())
            .with_t(c.t())
            .with_proven(zhan_is_proven(c.r(), c.t()))])
    })?;
    Ok(recs.remove(0))
}

/// Ky Fan `k`-norm form with the case's `X`:
/// `(2+t)‖A^rXB^{2−r} + A^{2−r}XB^r‖_(k) ≤ 2‖A²X + tAXB + XB²‖_(k)`.
///
/// Requires `1 ≤ 2r ≤ 3`; see [`zhan_norm_explore`] for other `r`.
pub fn zhan_norm_check(c: &InequalityCase, k: usize) -> Result<VerificationRecord> {
    if !zhan_norm_is_proven(c.r()) {
        return Err(invalid(format!(
            "the norm inequality requires 1/2 <= r <= 3/2, got {}",
            c.r()
        )));
    }
    zhan_norm_explore(c, k)
}

/// [`zhan_norm_check`] without the hypothesis on `r`; records outside it are
/// marked unproven.
pub fn zhan_norm_explore(c: &InequalityCase, k: usize) -> Result<VerificationRecord> {
    if k == 0 || k > c.n() {
        return Err(invalid(format!("Ky Fan order must lie in 1..={}", c.n())));
    }
    let mut all = zhan_norm_all_orders(c)?;
    Ok(all.swap_remove(k - 1))
}

/// Norm check for every Ky Fan order `k = 1..=n` (hence, by Fan dominance,
/// for every unitarily invariant norm).
pub fn zhan_norm_all_orders(c: &InequalityCase) -> Result<Vec<VerificationRecord>> {
    let x = c
        .x()
        .ok_or_else(|| invalid("the norm check needs a matrix X"))?;
    let (a, b, r, t, n) = (c.a(), c.b(), c.r(), c.t(), c.n());
    with_recheck(|opts| {
        let left = &(&(&pow(a, r, opts)? * x) * &pow(b, 2.0 - r, opts)?)
            + &(&(&pow(a, 2.0 - r, opts)? * x) * &pow(b, r, opts)?);
        let (am, bm) = (a.matrix(), b.matrix());
        let right = &(&(am * &(am * x)) + &(&(am * x) * bm).scale(t)) + &(&(x * bm) * bm);
        let sl = sv(&left, opts)?;
        let sr = sv(&right, opts)?;
        Ok((1..=n)
            .map(|k| {
                let lhs = (2.0 + t) * sl[..k].iter().sum::<f64>();
                let rhs = 2.0 * sr[..k].iter().sum::<f64>();
                VerificationRecord::compare(CheckKind::ZhanNorm, n, vec![lhs], vec![rhs])
                    .with_r(r)
                    .with_t(t)
                    .with_k(k)
                    .with_proven(zhan_norm_is_proven(r))
            })
            .collect())
    })
}

/// `(2+t)·s_j(AB) ≤ s_j(A² + tAB + B²)`, the `r = 1` case as printed.
pub fn proposition4_check(a: &PsdMatrix, b: &PsdMatrix, t: f64) -> Result<VerificationRecord> {
    same_dim(a, b)?;
    check_t(t)?;
    let mut recs = with_recheck(|opts| {
        let (am, bm) = (a.matrix(), b.matrix());
        let lhs = scaled(sv(&(am * bm), opts)?, 2.0 + t);
        let rhs = sv(&mean_expression(am, bm, t), opts)?;
        Ok(vec![VerificationRecord::compare(CheckKind::Prop4, a.n(), lhs, rhs).with_t(t)])
    })?;
    Ok(recs.remove(0))
}

/// `2·s_j(AB*) ≤ s_j(A*A + B*B)` for arbitrary square `A`, `B`.
pub fn ag_mean_check(a: &MatrixC, b: &MatrixC) -> Result<VerificationRecord> {
    a.check_same_dim(b)?;
    let mut recs = with_recheck(|opts| {
        let lhs = scaled(sv(&(a * &b.adjoint()), opts)?, 2.0);
        let rhs = sv(&(&(&a.adjoint() * a) + &(&b.adjoint() * b)), opts)?;
        Ok(vec![VerificationRecord::compare(CheckKind::AgMean, a.n(), lhs, rhs)])
    })?;
    Ok(recs.remove(0))
}

/// `2·s_j(A^{1/2}B^{3/2} + A^{3/2}B^{1/2}) ≤ s_j((A+B)²)`.
pub fn bhatia_kittaneh_check(a: &PsdMatrix, b: &PsdMatrix) -> Result<VerificationRecord> {
    same_dim(a, b)?;
    let mut recs = with_recheck(|opts| {
        let y = &(&pow(a, 0.5, opts)? * &pow(b, 1.5, opts)?)
            + &(&pow(a, 1.5, opts)? * &pow(b, 0.5, opts)?);
        let lhs = scaled(sv(&y, opts)?, 2.0);
        let rhs = sv(&sum_squared(a.matrix(), b.matrix()), opts)?;
        Ok(vec![VerificationRecord::compare(CheckKind::BhatiaKittaneh, a.n(), lhs, rhs)])
    })?;
    Ok(recs.remove(0))
}

/// `4·s_j(AB) ≤ s_j((A+B)²)`.
pub fn drury_check(a: &PsdMatrix, b: &PsdMatrix) -> Result<VerificationRecord> {
    same_dim(a, b)?;
    let mut recs = with_recheck(|opts| {
        let lhs = scaled(sv(&(a.matrix() * b.matrix()), opts)?, 4.0);
        let rhs = sv(&sum_squared(a.matrix(), b.matrix()), opts)?;
        Ok(vec![VerificationRecord::compare(CheckKind::Drury, a.n(), lhs, rhs)])
    })?;
    Ok(recs.remove(0))
}

/// With `C = A² + tAB + B²`, returns
/// 1. `s_j(Re C) ≤ s_j(C)`, and
/// 2. `((2+t)/4)·s_j((A+B)²) ≤ s_j(C)`.
pub fn mean_comparison_check(
    a: &PsdMatrix,
    b: &PsdMatrix,
    t: f64,
) -> Result<(VerificationRecord, VerificationRecord)> {
    same_dim(a, b)?;
    check_t(t)?;
    let n = a.n();
    let mut recs = with_recheck(|opts| {
        let c = mean_expression(a.matrix(), b.matrix(), t);
        let sc = sv(&c, opts)?;
        let re = sv(re_part(&c).matrix(), opts)?;
        let sq = scaled(sv(&sum_squared(a.matrix(), b.matrix()), opts)?, (2.0 + t) / 4.0);
        Ok(vec![
            VerificationRecord::compare(CheckKind::MeanComparisonRe, n, re, sc.clone()).with_t(t),
            VerificationRecord::compare(CheckKind::MeanComparisonSquare, n, sq, sc).with_t(t),
        ])
    })?;
    let second = recs.pop().expect("two records");
    Ok((recs.pop().expect("two records"), second))
}

/// `M(t) = A² + B² + (t/2)(AB + BA)`, the Hermitian part of `A² + tAB + B²`.
pub fn mean_matrix(a: &PsdMatrix, b: &PsdMatrix, t: f64) -> HermitianMatrix {
    re_part(&mean_expression(a.matrix(), b.matrix(), t))
}

/// Returns
/// 1. `λ_j(M(t)) ≥ 0` (lhs zero, rhs the eigenvalues), and
/// 2. `s_j(M(t))/(2+t) ≥ s_j((A+B)²)/4`.
pub fn corollary2_check(
    a: &PsdMatrix,
    b: &PsdMatrix,
    t: f64,
) -> Result<(VerificationRecord, VerificationRecord)> {
    same_dim(a, b)?;
    check_t(t)?;
    let n = a.n();
    let mut recs = with_recheck(|opts| {
        let m = mean_matrix(a, b, t);
        let eig = eigh_with(&m, opts)?.values().to_vec();
        let sm = scaled(sv(m.matrix(), opts)?, 1.0 / (2.0 + t));
        let quarter = scaled(sv(&sum_squared(a.matrix(), b.matrix()), opts)?, 0.25);
        Ok(vec![
            VerificationRecord::compare(CheckKind::Corollary2Psd, n, vec![0.0; n], eig).with_t(t),
            VerificationRecord::compare(CheckKind::Corollary2Bound, n, quarter, sm).with_t(t),
        ])
    })?;
    let second = recs.pop().expect("two records");
    Ok((recs.pop().expect("two records"), second))
}

fn same_dim(a: &PsdMatrix, b: &PsdMatrix) -> Result<()> {
    a.matrix().check_same_dim(b.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn psd(rows: &[Vec<f64>]) -> PsdMatrix {
        PsdMatrix::from_matrix(MatrixC::from_real_rows(rows).unwrap()).unwrap()
    }

    fn diag(v: &[f64]) -> PsdMatrix {
        PsdMatrix::from_diag(v).unwrap()
    }

    fn assert_vec(got: &[f64], want: &[f64], eps: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= eps, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn zhan_identity_equality() {
        for &(r, t) in &[(0.5, -1.9), (1.0, 0.0), (1.5, 2.0), (0.3, 1.1)] {
            let id = PsdMatrix::identity(3);
            let rec = zhan_singular_value_check(&InequalityCase::new(id.clone(), id, r, t).unwrap())
                .unwrap();
            assert_vec(&rec.lhs, &[2.0 * (2.0 + t); 3], 1e-13);
            assert_vec(&rec.margins, &[0.0; 3], 1e-13);
            assert!(rec.pass);
        }
    }

    #[test]
    fn zhan_diagonal_example() {
        let c = InequalityCase::new(diag(&[2.0, 1.0]), PsdMatrix::identity(2), 1.0, 2.0).unwrap();
        let rec = zhan_singular_value_check(&c).unwrap();
        assert_vec(&rec.lhs, &[16.0, 8.0], 1e-13);
        assert_vec(&rec.rhs, &[18.0, 8.0], 1e-13);
        assert_vec(&rec.margins, &[2.0, 0.0], 1e-13);
        assert!(rec.pass && rec.proven);
    }

    #[test]
    fn zhan_fixed_two_by_two_against_high_precision_oracle() {
        // 60-digit mpmath evaluation of the same instance
        let c = InequalityCase::new(
            psd(&[vec![2.0, 1.0], vec![1.0, 1.0]]),
            diag(&[1.0, 2.0]),
            0.5,
            -1.0,
        )
        .unwrap();
        let rec = zhan_singular_value_check(&c).unwrap();
        assert_vec(&rec.lhs, &[7.532878961701864132766068, 1.501910299701498604820221], 1e-12);
        assert_vec(&rec.rhs, &[11.06225774829854965236661, 5.062257748298549652366613], 1e-12);
        assert_vec(
            &rec.margins,
            &[3.529378786596685519600545, 3.560347448597051047546393],
            1e-12,
        );
    }

    #[test]
    fn zhan_proven_marker() {
        assert!(zhan_is_proven(0.5, 1.3));
        assert!(zhan_is_proven(1.7, 0.0));
        assert!(!zhan_is_proven(0.75, 1.0));
        assert!(!zhan_is_proven(1.0, -2.0));
        let id = PsdMatrix::identity(2);
        let rec = zhan_singular_value_check(&InequalityCase::new(id.clone(), id, 0.75, 1.0).unwrap())
            .unwrap();
        assert!(!rec.proven);
    }

    #[test]
    fn norm_check_identity_and_hypothesis() {
        let id = PsdMatrix::identity(3);
        let c = InequalityCase::new(id.clone(), id.clone(), 1.0, 0.5)
            .unwrap()
            .with_x(MatrixC::identity(3))
            .unwrap();
        for k in 1..=3 {
            let rec = zhan_norm_check(&c, k).unwrap();
            assert_abs_diff_eq!(rec.margins[0], 0.0, epsilon = 1e-13);
            assert_eq!(rec.k, Some(k));
        }
        assert!(zhan_norm_check(&c, 0).is_err());
        assert!(zhan_norm_check(&c, 4).is_err());
        let outside = InequalityCase::new(id.clone(), id, 0.25, 0.5)
            .unwrap()
            .with_x(MatrixC::identity(3))
            .unwrap();
        assert!(zhan_norm_check(&outside, 1).is_err());
        assert!(!zhan_norm_explore(&outside, 1).unwrap().proven);
        let no_x = InequalityCase::new(PsdMatrix::identity(2), PsdMatrix::identity(2), 1.0, 0.0).unwrap();
        assert!(zhan_norm_check(&no_x, 1).is_err());
    }

    #[test]
    fn norm_check_diagonal_trace_norm() {
        let (a, b, x) = ([2.0, 0.5, 1.0], [1.0, 3.0, 0.25], [1.0, -2.0, 0.5]);
        let (r, t) = (1.5, -1.5);
        let c = InequalityCase::new(diag(&a), diag(&b), r, t)
            .unwrap()
            .with_x(MatrixC::from_real_diag(&x))
            .unwrap();
        let rec = zhan_norm_check(&c, 3).unwrap();
        let lhs: f64 = (0..3)
            .map(|i| {
                ((2.0 + t) * (a[i].powf(r) * x[i] * b[i].powf(2.0 - r) + a[i].powf(2.0 - r) * x[i] * b[i].powf(r))).abs()
            })
            .sum();
        let rhs: f64 = (0..3)
            .map(|i| (2.0 * (a[i] * a[i] * x[i] + t * a[i] * x[i] * b[i] + x[i] * b[i] * b[i])).abs())
            .sum();
        assert_abs_diff_eq!(rec.lhs[0], lhs, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.rhs[0], rhs, epsilon = 1e-12);
        assert!(rec.pass);
    }

    #[test]
    fn ag_mean_examples() {
        let a = MatrixC::from_real_rows(&[vec![1.0, 2.0], vec![-0.5, 3.0]]).unwrap();
        let rec = ag_mean_check(&a, &a).unwrap();
        assert_vec(&rec.margins, &[0.0, 0.0], 1e-12);
        let rec = ag_mean_check(&MatrixC::from_real_diag(&[1.0, 0.0]), &MatrixC::from_real_diag(&[0.0, 1.0]))
            .unwrap();
        assert_vec(&rec.lhs, &[0.0, 0.0], 1e-15);
        assert_vec(&rec.rhs, &[1.0, 1.0], 1e-15);
        assert!(ag_mean_check(&a, &MatrixC::identity(3)).is_err());
    }

    #[test]
    fn bhatia_kittaneh_examples() {
        let id = PsdMatrix::identity(2);
        let rec = bhatia_kittaneh_check(&id, &id).unwrap();
        assert_vec(&rec.lhs, &[4.0, 4.0], 1e-13);
        assert_vec(&rec.rhs, &[4.0, 4.0], 1e-13);
        let rec = bhatia_kittaneh_check(&id, &PsdMatrix::zeros(2)).unwrap();
        assert_vec(&rec.lhs, &[0.0, 0.0], 1e-15);
        assert_vec(&rec.rhs, &[1.0, 1.0], 1e-15);
    }

    #[test]
    fn drury_examples() {
        let id = PsdMatrix::identity(2);
        let rec = drury_check(&id, &id).unwrap();
        assert_vec(&rec.margins, &[0.0, 0.0], 1e-13);
        let rec = drury_check(&diag(&[4.0, 1.0]), &id).unwrap();
        assert_vec(&rec.lhs, &[16.0, 4.0], 1e-13);
        assert_vec(&rec.rhs, &[25.0, 4.0], 1e-13);
        assert!(rec.pass);
    }

    #[test]
    fn mean_comparison_examples() {
        let id = PsdMatrix::identity(2);
        let (r1, r2) = mean_comparison_check(&id, &id, 0.7).unwrap();
        assert_vec(&r1.margins, &[0.0, 0.0], 1e-13);
        assert_vec(&r2.margins, &[0.0, 0.0], 1e-13);
        // commuting: C is Hermitian, record 1 is exact
        let (r1, _) = mean_comparison_check(&diag(&[3.0, 0.5]), &diag(&[1.0, 2.0]), -1.2).unwrap();
        assert_vec(&r1.margins, &[0.0, 0.0], 0.0);
        assert!(mean_comparison_check(&id, &id, -2.0).is_err());
        assert!(mean_comparison_check(&id, &id, 2.1).is_err());
    }

    #[test]
    fn corollary2_examples() {
        let a = psd(&[vec![2.0, 1.0], vec![1.0, 1.0]]);
        let b = diag(&[1.0, 2.0]);
        let (_, r2) = corollary2_check(&a, &b, 2.0).unwrap();
        assert_vec(&r2.margins, &[0.0, 0.0], 1e-12);
        let id = PsdMatrix::identity(2);
        let (r1, r2) = corollary2_check(&id, &id, -1.9).unwrap();
        assert_vec(&r1.rhs, &[0.1, 0.1], 1e-13);
        assert_vec(&r2.margins, &[0.0, 0.0], 1e-13);
        assert!(corollary2_check(&id, &id, -2.0).is_err());
    }

    #[test]
    fn proposition4_matches_zhan_at_r_one() {
        let a = psd(&[vec![2.0, 1.0], vec![1.0, 1.0]]);
        let b = diag(&[1.0, 2.0]);
        let p4 = proposition4_check(&a, &b, 0.3).unwrap();
        let z = zhan_singular_value_check(&InequalityCase::new(a, b, 1.0, 0.3).unwrap()).unwrap();
        for j in 0..2 {
            assert_abs_diff_eq!(2.0 * p4.lhs[j], z.lhs[j], epsilon = 1e-12);
            assert_abs_diff_eq!(2.0 * p4.rhs[j], z.rhs[j], epsilon = 1e-12);
        }
    }
}
