use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::inequalities::VerificationRecord;
use crate::linalg::{eigh, re_part, HermitianMatrix, MatrixC};

use super::campaign::{evaluate_case, recheck, RecheckStatus, Violation};
use super::family::TrialCase;

/// Weight of `B` in the Hermitian matrix whose eigenframe is used to cut
/// dimensions.
const FRAME_MIX: f64 = 0.618;
const MAX_ROUNDS: usize = 64;
const SNAP_STEPS: [f64; 4] = [1.0, 0.5, 0.25, 0.1];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ShrinkMarker {
    /// The input did not satisfy the predicate.
    NoOp,
    /// `steps` successful moves from the original case.
    Shrunk {
        steps: usize,
        from_n: usize,
        from_r: Option<f64>,
        from_t: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
struct Candidate {
    case: TrialCase,
    r: Option<f64>,
    t: Option<f64>,
}

fn conjugate(q: &MatrixC, m: &MatrixC) -> MatrixC {
    &(&q.adjoint() * m) * q
}

fn smaller_cases(c: &Candidate) -> Vec<Candidate> {
    let n = c.case.n();
    if n < 2 {
        return Vec::new();
    }
    let mix = &c.case.a + &c.case.b.scale(FRAME_MIX);
    let Ok(s) = eigh(&re_part(&mix)) else {
        return Vec::new();
    };
    let q = s.frame();
    let a = conjugate(q, &c.case.a);
    let b = conjugate(q, &c.case.b);
    let x = c.case.x.as_ref().map(|x| conjugate(q, x));
    (0..n)
        .filter_map(|i| {
            Some(Candidate {
                case: TrialCase {
                    a: a.without_index(i).ok()?,
                    b: b.without_index(i).ok()?,
                    x: match &x {
                        Some(x) => Some(x.without_index(i).ok()?),
                        None => None,
                    },
                },
                ..c.clone()
            })
        })
        .collect()
}

fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let q = 10f64.powi(x.abs().log10().floor() as i32 - digits + 1);
    (x / q).round() * q
}

fn rounded_matrix(m: &MatrixC, digits: i32) -> Option<MatrixC> {
    let scale = m.as_slice().iter().fold(0.0_f64, |s, z| s.max(z.norm()));
    if scale == 0.0 {
        return None;
    }
    let floor = 1e-12 * scale;
    let snap = |v: f64| if v.abs() < floor { 0.0 } else { round_sig(v, digits) };
    let (out, change) = if m.hermitian_defect() == 0.0 {
        let s = eigh(&HermitianMatrix::new(m.clone()).ok()?).ok()?;
        let rounded: Vec<f64> = s.values().iter().map(|&l| snap(l)).collect();
        let change = rounded
            .iter()
            .zip(s.values())
            .fold(0.0_f64, |d, (x, y)| d.max((x - y).abs()));
        let frame = s.frame();
        let out = MatrixC::from_fn(m.n(), |i, j| {
            (0..m.n())
                .map(|k| frame[(i, k)] * frame[(j, k)].conj() * rounded[k])
                .sum::<Complex64>()
        });
        (HermitianMatrix::new(out).ok()?.into_matrix(), change)
    } else {
        let out = MatrixC::from_fn(m.n(), |i, j| {
            Complex64::new(snap(m[(i, j)].re), snap(m[(i, j)].im))
        });
        let change = (&out - m)
            .as_slice()
            .iter()
            .fold(0.0_f64, |d, z| d.max(z.norm()));
        (out, change)
    };
    (change > 1e-9 * scale).then_some(out)
}

fn rounded_cases(c: &Candidate) -> Vec<Candidate> {
    (1..=3)
        .flat_map(|digits| {
            let a = rounded_matrix(&c.case.a, digits);
            let b = rounded_matrix(&c.case.b, digits);
            let mut out = Vec::new();
            if a.is_some() || b.is_some() {
                out.push(Candidate {
                    case: TrialCase {
                        a: a.clone().unwrap_or_else(|| c.case.a.clone()),
                        b: b.clone().unwrap_or_else(|| c.case.b.clone()),
                        x: c.case.x.clone(),
                    },
                    ..c.clone()
                });
            }
            out
        })
        .collect()
}

fn snapped(v: Option<f64>, ok: impl Fn(f64) -> bool) -> Vec<f64> {
    let Some(v) = v else {
        return Vec::new();
    };
    SNAP_STEPS
        .iter()
        .map(|s| (v / s).round() * s)
        .filter(|&w| (w - v).abs() > 1e-12 && ok(w))
        .collect()
}

fn snapped_cases(c: &Candidate) -> Vec<Candidate> {
    let ts = snapped(c.t, |t| t > -2.0 && t <= 2.0)
        .into_iter()
        .map(|t| Candidate {
            t: Some(t),
            ..c.clone()
        });
    let rs = snapped(c.r, |r| (0.0..=2.0).contains(&r))
        .into_iter()
        .map(|r| Candidate {
            r: Some(r),
            ..c.clone()
        });
    ts.chain(rs).collect()
}

fn apply(v: &Violation, c: &Candidate, recs: &[VerificationRecord]) -> Violation {
    let worst = recs
        .iter()
        .min_by(|x, y| x.min_margin().total_cmp(&y.min_margin()))
        .expect("at least one record");
    Violation {
        record: worst.check,
        n: c.case.n(),
        r: c.r,
        t: c.t,
        k: worst.k,
        case: c.case.clone(),
        margins: worst.margins.clone(),
        tol: worst.tol,
        proven: recs.iter().all(|rec| rec.proven),
        hp_margins: None,
        ..v.clone()
    }
}

/// Greedy shrinking under an arbitrary predicate on the case's records.
///
/// Moves, tried in order until none applies: drop one dimension in the
/// joint eigenframe, snap `t` then `r` to multiples of 1, 1/2, 1/4, 1/10,
/// round spectra to 1–3 significant digits. The returned violation keeps
/// the original seed and records the move count.
pub fn shrink_with(v: &Violation, pred: impl Fn(&[VerificationRecord]) -> bool) -> Violation {
    let eval = |c: &Candidate| -> Option<Vec<VerificationRecord>> {
        let mut recs = evaluate_case(v.check, &c.case, c.r, c.t, &v.grid).ok()?;
        for rec in &mut recs {
            rec.apply_tol_factor(v.tol_factor);
        }
        pred(&recs).then_some(recs)
    };
    let mut cur = Candidate {
        case: v.case.clone(),
        r: v.r,
        t: v.t,
    };
    let Some(mut recs) = eval(&cur) else {
        return Violation {
            shrink: Some(ShrinkMarker::NoOp),
            ..v.clone()
        };
    };
    let mut steps = 0;
    for _ in 0..MAX_ROUNDS {
        let next = smaller_cases(&cur)
            .into_iter()
            .chain(snapped_cases(&cur))
            .chain(rounded_cases(&cur))
            .find_map(|c| eval(&c).map(|r| (c, r)));
        match next {
            Some((c, r)) => {
                cur = c;
                recs = r;
                steps += 1;
            }
            None => break,
        }
    }
    if steps == 0 {
        if v.shrink.is_some() {
            return v.clone();
        }
        return Violation {
            shrink: Some(ShrinkMarker::Shrunk {
                steps: 0,
                from_n: v.n,
                from_r: v.r,
                from_t: v.t,
            }),
            ..v.clone()
        };
    }
    let (from_n, from_r, from_t) = match &v.shrink {
        Some(ShrinkMarker::Shrunk {
            from_n,
            from_r,
            from_t,
            ..
        }) => (*from_n, *from_r, *from_t),
        _ => (v.n, v.r, v.t),
    };
    let prior = match &v.shrink {
        Some(ShrinkMarker::Shrunk { steps, .. }) => *steps,
        _ => 0,
    };
    Violation {
        shrink: Some(ShrinkMarker::Shrunk {
            steps: prior + steps,
            from_n,
            from_r,
            from_t,
        }),
        ..apply(v, &cur, &recs)
    }
}

/// Shrinks while some record still fails the tolerance test, then re-runs
/// the high-precision check on the result. If that clears the smaller case
/// the original is kept.
pub fn shrink_counterexample(v: &Violation) -> Violation {
    let mut out = shrink_with(v, |recs| recs.iter().any(|rec| !rec.pass));
    if out.case == v.case && out.r == v.r && out.t == v.t {
        return out;
    }
    recheck(&mut out, true);
    if out.status == RecheckStatus::Cleared {
        return Violation {
            shrink: Some(ShrinkMarker::Shrunk {
                steps: 0,
                from_n: v.n,
                from_r: v.r,
                from_t: v.t,
            }),
            ..v.clone()
        };
    }
    out
}
