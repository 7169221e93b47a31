//! Acceptance gate: runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each. Criteria 1-8 must pass. Criterion 9 is reported
//! as measured; its structural requirements (labels, note) are asserted.

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use sha2::{Digest, Sha256};

use specheck::explorer::{
    generate_case, run_campaign, CampaignCheck, CampaignReport, CampaignSpec, Family,
};
use specheck::inequalities::{
    ag_mean_check, bhatia_kittaneh_check, corollary2_check, drury_check, mean_comparison_check,
    monotonicity_trace, proposition4_check, zhan_norm_all_orders, zhan_norm_check,
    zhan_singular_value_check, InequalityCase, VerificationRecord,
};
use specheck::linalg::random::{derive_seed, random_hermitian, rng_from_seed};
use specheck::linalg::{eigh, MatrixC, PsdMatrix};
use specheck::pencil::{
    eigen_derivative_projector, eigen_derivative_simple, track_branches, weyl_envelope_check,
    DegenerateCluster, HermitianPencil,
};

const MASTER: u64 = 20_240_601;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn emit(o: &Outcome) {
    // Written to the raw handle so the line shows without --nocapture.
    let line = format!(
        "acceptance {}: {} [{}] {}\n",
        o.id,
        if o.pass { "PASS" } else { "FAIL" },
        o.name,
        o.detail
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn seed(criterion: u64, i: usize) -> u64 {
    derive_seed(MASTER, &[criterion, i as u64])
}

fn pair(criterion: u64, i: usize) -> (PsdMatrix, PsdMatrix, u64) {
    let s = seed(criterion, i);
    let family = Family::DEFAULTS[i % Family::DEFAULTS.len()];
    let n = 2 + i % 5;
    let case = generate_case(family, n, s, false, false).unwrap();
    let (a, b) = case.psd_pair().unwrap();
    (a, b, s)
}

fn cell_clean(report: &CampaignReport) -> bool {
    report
        .cells
        .iter()
        .all(|c| c.failures == 0 && c.cleared == 0 && c.violations == 0)
}

fn worst(recs: &[VerificationRecord]) -> f64 {
    recs.iter()
        .map(|r| r.min_margin() / r.tol)
        .fold(f64::INFINITY, f64::min)
}

fn criterion_1() -> Outcome {
    let mut spec = CampaignSpec::new(CampaignCheck::Zhan);
    spec.dims = (2..=8).collect();
    spec.r_grid = vec![0.5, 1.0, 1.5];
    spec.t_grid = vec![-1.9, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];
    spec.trials = 60;
    spec.families = Family::DEFAULTS.to_vec();
    spec.seed = seed(1, 0);
    let start = Instant::now();
    let report = run_campaign(&spec).unwrap();
    let proven = report.cells.iter().all(|c| c.proven);
    Outcome {
        id: 1,
        name: "zhan, proven region",
        pass: report.total_trials() >= 10_000 && cell_clean(&report) && proven,
        detail: format!(
            "trials={} failing_cells={} min_margin={:.3e} elapsed={:.1}s",
            report.total_trials(),
            report.cells.iter().filter(|c| c.violations + c.cleared + c.failures > 0).count(),
            report.min_margin().unwrap_or(f64::NAN),
            start.elapsed().as_secs_f64()
        ),
    }
}

fn criterion_2() -> Outcome {
    let grid: Vec<f64> = (0..60).map(|k| -1.9 + 5.9 * k as f64 / 59.0).collect();
    let (mut violations, mut mismatch, mut max_deriv, mut samples) = (0, 0.0f64, f64::MIN, 0);
    for i in 0..1000 {
        let (a, b, _) = pair(2, i);
        let tr = monotonicity_trace(&a, &b, &grid).unwrap();
        violations += tr.violations.len();
        samples += tr.derivative_samples.len();
        mismatch = mismatch.max(tr.max_derivative_mismatch());
        max_deriv = max_deriv.max(tr.max_derivative());
    }
    Outcome {
        id: 2,
        name: "monotonicity of lambda_j/(2+t)",
        pass: violations == 0 && mismatch <= 1e-8 && max_deriv <= 1e-9,
        detail: format!(
            "traces=1000 violations={violations} samples={samples} \
             max_mismatch={mismatch:.2e} max_derivative={max_deriv:.2e}"
        ),
    }
}

fn criterion_3() -> Outcome {
    let (mut failed, mut worst_eq, mut at_two) = (0, 0.0f64, 0);
    for i in 0..1000 {
        let (a, b, s) = pair(3, i);
        let t = if i % 10 == 0 {
            2.0
        } else {
            // (-2, 2]: 2 - u·4 with u in [0, 1).
            2.0 - 4.0 * rng_from_seed(s ^ 0x7).gen::<f64>()
        };
        let t = if t <= -2.0 { 2.0 } else { t };
        let (psd, bound) = corollary2_check(&a, &b, t).unwrap();
        if !psd.pass || !bound.pass {
            failed += 1;
        }
        if t == 2.0 {
            at_two += 1;
            let scale = bound.rhs.iter().fold(1.0f64, |m, &v| m.max(v));
            for m in &bound.margins {
                worst_eq = worst_eq.max(m.abs() / scale);
            }
        }
    }
    Outcome {
        id: 3,
        name: "corollary records",
        pass: failed == 0 && at_two > 0 && worst_eq <= 1e-9,
        detail: format!("pairs=1000 failed={failed} t2_pairs={at_two} t2_max_gap={worst_eq:.2e}"),
    }
}

fn criterion_4() -> Outcome {
    let mut failed = [0usize; 4];
    for i in 0..1000 {
        let s = seed(4, i);
        let n = 2 + i % 5;
        let g = generate_case(Family::Generic, n, s, true, false).unwrap();
        if !ag_mean_check(&g.a, &g.b).unwrap().pass {
            failed[0] += 1;
        }
        let (a, b, s) = pair(4, i);
        if !drury_check(&a, &b).unwrap().pass {
            failed[1] += 1;
        }
        if !bhatia_kittaneh_check(&a, &b).unwrap().pass {
            failed[2] += 1;
        }
        let t = 2.0 - 3.9 * rng_from_seed(s ^ 0x4).gen::<f64>();
        let (x, y) = mean_comparison_check(&a, &b, t).unwrap();
        if !x.pass || !y.pass {
            failed[3] += 1;
        }
    }
    let mut eq = 0.0f64;
    for n in 1..=6 {
        let i = PsdMatrix::identity(n);
        let mut recs = vec![
            ag_mean_check(i.matrix(), i.matrix()).unwrap(),
            drury_check(&i, &i).unwrap(),
            bhatia_kittaneh_check(&i, &i).unwrap(),
        ];
        for t in [-1.9, 0.0, 2.0] {
            let (x, y) = mean_comparison_check(&i, &i, t).unwrap();
            recs.push(x);
            recs.push(y);
        }
        for r in &recs {
            for m in &r.margins {
                eq = eq.max(m.abs());
            }
        }
    }
    Outcome {
        id: 4,
        name: "supporting inequalities",
        pass: failed.iter().all(|&f| f == 0) && eq <= 1e-10,
        detail: format!(
            "instances=1000 each failed(ag,drury,bk,mean)={failed:?} identity_max_margin={eq:.2e}"
        ),
    }
}

fn criterion_5() -> Outcome {
    let rs = [0.5, 1.0, 1.5];
    let ts = [-1.5, 0.0, 2.0];
    let mut failed = 0;
    let mut min_scaled = f64::INFINITY;
    for i in 0..500 {
        let s = seed(5, i);
        let family = Family::DEFAULTS[i % Family::DEFAULTS.len()];
        let case = generate_case(family, 5, s, false, true).unwrap();
        let (a, b) = case.psd_pair().unwrap();
        let (r, t) = (rs[i % 3], ts[(i / 3) % 3]);
        let c = InequalityCase::new(a, b, r, t)
            .unwrap()
            .with_x(case.x.unwrap())
            .unwrap();
        let all = zhan_norm_all_orders(&c).unwrap();
        for k in 1..=5 {
            let rec = zhan_norm_check(&c, k).unwrap();
            assert_eq!(rec.margins, all[k - 1].margins);
            if !rec.pass {
                failed += 1;
            }
        }
        min_scaled = min_scaled.min(worst(&all));
    }
    Outcome {
        id: 5,
        name: "Ky Fan norm form",
        pass: failed == 0,
        detail: format!("triples=500 orders=5 failed={failed} min_margin/tol={min_scaled:.3e}"),
    }
}

fn min_gap(v: &[f64]) -> f64 {
    v.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
}

fn criterion_6() -> Outcome {
    let h = 1e-5;
    let (mut fd_err, mut proj_err, mut pencils, mut draws) = (0.0f64, 0.0f64, 0, 0);
    while pencils < 500 {
        let mut rng = rng_from_seed(seed(6, draws));
        draws += 1;
        let n = 2 + draws % 5;
        let p = HermitianPencil::new(random_hermitian(n, &mut rng), random_hermitian(n, &mut rng))
            .unwrap();
        let t: f64 = rng.gen_range(-2.0..2.0);
        let (lo, mid, hi) = (
            p.spectrum_at(t - h).unwrap(),
            p.spectrum_at(t).unwrap(),
            p.spectrum_at(t + h).unwrap(),
        );
        if [&lo, &mid, &hi].iter().any(|s| min_gap(s.values()) < 0.1) {
            continue;
        }
        pencils += 1;
        for j in 0..n {
            let d = eigen_derivative_simple(&p, t, j, None).unwrap();
            let fd = (hi.values()[j] - lo.values()[j]) / (2.0 * h);
            fd_err = fd_err.max((d - fd).abs());
            let cluster = DegenerateCluster::from_spectrum(&mid, vec![j]).unwrap();
            let dp = eigen_derivative_projector(&p, &cluster).unwrap();
            proj_err = proj_err.max((d - dp).abs());
        }
    }

    let mut weyl = f64::INFINITY;
    for i in 0..1000 {
        let mut rng = rng_from_seed(seed(61, i));
        let n = 1 + i % 6;
        let p = HermitianPencil::new(random_hermitian(n, &mut rng), random_hermitian(n, &mut rng))
            .unwrap();
        let t: f64 = rng.gen_range(-4.0..4.0);
        weyl = weyl.min(weyl_envelope_check(&p, t).unwrap().min_slack());
    }

    let grid: Vec<f64> = (0..80).map(|k| -2.0 + 4.0 * k as f64 / 79.0).collect();
    let mut multiset = 0.0f64;
    for i in 0..200 {
        let mut rng = rng_from_seed(seed(62, i));
        let n = 1 + i % 6;
        let m0 = random_hermitian(n, &mut rng);
        // Every fourth pencil commutes, so branches cross.
        let m1 = if i % 4 == 0 {
            let s = eigh(&m0).unwrap();
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q = s.frame();
            specheck::linalg::HermitianMatrix::new(
                &(q * &MatrixC::from_real_diag(&w)) * &q.adjoint(),
            )
            .unwrap()
        } else {
            random_hermitian(n, &mut rng)
        };
        let p = HermitianPencil::new(m0, m1).unwrap();
        let set = track_branches(&p, &grid, None).unwrap();
        for (k, &t) in set.grid().iter().enumerate() {
            let mut got = set.values_at(k);
            got.sort_by(|x, y| y.total_cmp(x));
            let want = eigh(&p.at(t)).unwrap();
            for (g, w) in got.iter().zip(want.values()) {
                multiset = multiset.max((g - w).abs());
            }
        }
    }

    Outcome {
        id: 6,
        name: "perturbation machinery",
        pass: fd_err <= 1e-6 && proj_err <= 1e-10 && weyl >= -1e-9 && multiset <= 1e-10,
        detail: format!(
            "pencils=500 fd_err={fd_err:.2e} projector_err={proj_err:.2e} \
             weyl_min_slack={weyl:.2e} branch_multiset_err={multiset:.2e}"
        ),
    }
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs() / w.abs().max(1.0))
        .fold(0.0, f64::max)
}

fn criterion_7() -> Outcome {
    let mut err = 0.0f64;
    let grid: Vec<f64> = (0..12).map(|k| -1.9 + 0.35 * k as f64).collect();
    for i in 0..200 {
        let mut rng = rng_from_seed(seed(7, i));
        let n = 1 + i % 6;
        let da: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let db: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let dx: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r: f64 = rng.gen_range(0.0..=2.0);
        let t: f64 = 2.0 - rng.gen_range(0.0..3.99);
        let (a, b) = (PsdMatrix::from_diag(&da).unwrap(), PsdMatrix::from_diag(&db).unwrap());
        let map = |f: &dyn Fn(f64, f64, f64) -> f64| -> Vec<f64> {
            (0..n).map(|j| f(da[j], db[j], dx[j])).collect()
        };
        let c = |x: f64, y: f64| x * x + t * x * y + y * y;
        let mut check = |rec: &VerificationRecord, lhs: Vec<f64>, rhs: Vec<f64>| {
            err = err.max(rel_err(&rec.lhs, &lhs)).max(rel_err(&rec.rhs, &rhs));
        };

        let zc = InequalityCase::new(a.clone(), b.clone(), r, t).unwrap();
        check(
            &zhan_singular_value_check(&zc).unwrap(),
            sorted_desc(map(&|x, y, _| {
                (2.0 + t) * (x.powf(r) * y.powf(2.0 - r) + x.powf(2.0 - r) * y.powf(r))
            })),
            sorted_desc(map(&|x, y, _| 2.0 * c(x, y).abs())),
        );

        let rn = rng.gen_range(0.5..=1.5);
        let nc = InequalityCase::new(a.clone(), b.clone(), rn, t)
            .unwrap()
            .with_x(MatrixC::from_real_diag(&dx))
            .unwrap();
        let left = sorted_desc(map(&|x, y, z| {
            (z * (x.powf(rn) * y.powf(2.0 - rn) + x.powf(2.0 - rn) * y.powf(rn))).abs()
        }));
        let right = sorted_desc(map(&|x, y, z| (z * c(x, y)).abs()));
        for (k, rec) in zhan_norm_all_orders(&nc).unwrap().iter().enumerate() {
            check(
                rec,
                vec![(2.0 + t) * left[..=k].iter().sum::<f64>()],
                vec![2.0 * right[..=k].iter().sum::<f64>()],
            );
        }

        check(
            &proposition4_check(&a, &b, t).unwrap(),
            sorted_desc(map(&|x, y, _| (2.0 + t) * x * y)),
            sorted_desc(map(&|x, y, _| c(x, y).abs())),
        );
        check(
            &ag_mean_check(a.matrix(), b.matrix()).unwrap(),
            sorted_desc(map(&|x, y, _| 2.0 * x * y)),
            sorted_desc(map(&|x, y, _| x * x + y * y)),
        );
        check(
            &bhatia_kittaneh_check(&a, &b).unwrap(),
            sorted_desc(map(&|x, y, _| 2.0 * (x.sqrt() * y.powf(1.5) + x.powf(1.5) * y.sqrt()))),
            sorted_desc(map(&|x, y, _| (x + y) * (x + y))),
        );
        check(
            &drury_check(&a, &b).unwrap(),
            sorted_desc(map(&|x, y, _| 4.0 * x * y)),
            sorted_desc(map(&|x, y, _| (x + y) * (x + y))),
        );
        let (re, sq) = mean_comparison_check(&a, &b, t).unwrap();
        let abs_c = sorted_desc(map(&|x, y, _| c(x, y).abs()));
        check(&re, abs_c.clone(), abs_c.clone());
        check(
            &sq,
            sorted_desc(map(&|x, y, _| (2.0 + t) / 4.0 * (x + y) * (x + y))),
            abs_c.clone(),
        );
        let (psd, bound) = corollary2_check(&a, &b, t).unwrap();
        check(&psd, vec![0.0; n], sorted_desc(map(&|x, y, _| c(x, y))));
        check(
            &bound,
            sorted_desc(map(&|x, y, _| (x + y) * (x + y) / 4.0)),
            sorted_desc(map(&|x, y, _| c(x, y).abs() / (2.0 + t))),
        );

        let tr = monotonicity_trace(&a, &b, &grid).unwrap();
        for (k, &s) in grid.iter().enumerate() {
            let got: Vec<f64> = (0..n).map(|j| tr.f_values[j][k]).collect();
            let want = sorted_desc(map(&|x, y, _| (x * x + s * x * y + y * y) / (2.0 + s)));
            err = err.max(rel_err(&got, &want));
        }
    }
    Outcome {
        id: 7,
        name: "diagonal oracle",
        pass: err <= 1e-12,
        detail: format!("pairs=200 max_rel_err={err:.2e}"),
    }
}

fn digest(report: &CampaignReport) -> String {
    let mut h = Sha256::new();
    h.update(report.to_canonical_json().as_bytes());
    h.update(report.to_csv().as_bytes());
    format!("{:x}", h.finalize())
}

fn criterion_8() -> Outcome {
    let mut hashes = Vec::new();
    let mut all_equal = true;
    for check in [CampaignCheck::Zhan, CampaignCheck::Monotonicity, CampaignCheck::Corollary2] {
        let mut spec = CampaignSpec::new(check);
        spec.dims = vec![2, 3, 5];
        spec.trials = 12;
        spec.seed = seed(8, 0);
        spec.shrink = true;
        if check == CampaignCheck::Zhan {
            spec.r_grid = vec![0.25, 1.0];
        }
        if check == CampaignCheck::Monotonicity {
            spec.t_grid = (0..20).map(|k| -1.9 + 0.3 * k as f64).collect();
        }
        let first = digest(&run_campaign(&spec).unwrap());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let second = pool.install(|| digest(&run_campaign(&spec).unwrap()));
        all_equal &= first == second;
        hashes.push(first[..16].to_string());
    }
    Outcome {
        id: 8,
        name: "determinism",
        pass: all_equal,
        detail: format!("sha256 prefixes={hashes:?} identical_across_runs={all_equal}"),
    }
}

fn criterion_9() -> (Outcome, CampaignReport) {
    let mut spec = CampaignSpec::new(CampaignCheck::Zhan);
    spec.dims = vec![2, 3, 4];
    spec.r_grid = vec![0.25, 0.75, 1.25, 1.75];
    spec.t_grid = vec![-1.9, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0];
    spec.trials = 100;
    spec.seed = seed(9, 0);
    let report = run_campaign(&spec).unwrap();
    let confirmed: Vec<_> = report.confirmed().collect();
    let mut at: Vec<String> = confirmed
        .iter()
        .map(|v| format!("(r={},t={})", v.r.unwrap(), v.t.unwrap()))
        .collect();
    at.sort();
    at.dedup();
    let labelled = report.cells.iter().all(|c| !c.proven)
        && report.violations.iter().all(|v| !v.proven);
    let outcome = Outcome {
        id: 9,
        name: "exploration region",
        pass: labelled && confirmed.is_empty() && report.evidence_note.is_some(),
        detail: format!(
            "trials={} all_unproven={labelled} confirmed={} at {}",
            report.total_trials(),
            confirmed.len(),
            if at.is_empty() { "-".into() } else { at.join(" ") }
        ),
    };
    (outcome, report)
}

#[test]
fn acceptance() {
    let mut outcomes = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    for o in &outcomes {
        emit(o);
    }
    let (c9, report) = criterion_9();
    emit(&c9);

    // Criterion 9 cannot pass: for scalars a = 1, b = 4.389 with r = 1/4,
    // t = 2 the left side exceeds the right by about 0.94. What must hold is
    // the labelling and the evidence note.
    assert!(report.cells.iter().all(|c| !c.proven));
    assert!(report.evidence_note.is_some());
    if !c9.pass {
        assert!(report
            .confirmed()
            .all(|v| v.record == specheck::inequalities::CheckKind::Zhan && !v.proven));
    }

    outcomes.retain(|o| !o.pass);
    let failed: Vec<usize> = outcomes.iter().map(|o| o.id).collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
