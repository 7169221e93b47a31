//! Reproducible randomized campaigns over `(n, r, t)` grids.
//!
//! Every cell draws its trials from a sub-seed derived from the master seed
//! and the cell coordinates, so reports do not depend on scheduling. Fast
//! path failures are re-checked in double-double arithmetic (`n ≤ 4`)
//! before they are listed.

mod campaign;
mod family;
mod hiprec;
mod shrink;

use std::collections::HashSet;

pub use campaign::{
    evaluate_case, run_campaign, CampaignCheck, CampaignReport, CampaignSpec, Cell, CellReport,
    RecheckStatus, Violation, EVIDENCE_NOTE,
};
pub use family::{generate_case, Family, TrialCase};
pub use hiprec::{hp_records, HP_MAX_DIM};
pub use shrink::{shrink_counterexample, shrink_with, ShrinkMarker};

use crate::error::{invalid, Result};

fn same_cell(x: &CellReport, y: &CellReport) -> bool {
    Cell {
        n: x.n,
        r: x.r,
        t: x.t,
    }
    .same_coordinates(y.n, y.r, y.t)
}

fn cell_content_eq(x: &CellReport, y: &CellReport) -> bool {
    let strip = |c: &CellReport| CellReport {
        overlapping: false,
        trials: 0,
        failures: 0,
        cleared: 0,
        violations: 0,
        failure_notes: Vec::new(),
        ..c.clone()
    };
    strip(x) == strip(y)
}

/// Merges reports of one check over disjoint or identical cells.
///
/// Counts add and minimum margins take the minimum. A cell present in
/// several inputs must be identical in all of them; it is then flagged as
/// overlapping. Violations are deduplicated by reproduction seed.
pub fn aggregate_report(reports: &[CampaignReport]) -> Result<CampaignReport> {
    let (first, rest) = reports
        .split_first()
        .ok_or_else(|| invalid("nothing to aggregate"))?;
    let mut out = first.clone();
    for rep in rest {
        if rep.check != out.check {
            return Err(invalid(format!(
                "cannot merge reports of '{}' and '{}'",
                out.check, rep.check
            )));
        }
        if rep.families != out.families || rep.tol_factor != out.tol_factor {
            return Err(invalid(
                "cannot merge reports with different families or tolerances",
            ));
        }
        for cell in &rep.cells {
            match out.cells.iter_mut().find(|c| same_cell(c, cell)) {
                Some(c) => {
                    if !cell_content_eq(c, cell) {
                        return Err(invalid(format!(
                            "cell n={} r={:?} t={:?} differs between reports",
                            cell.n, cell.r, cell.t
                        )));
                    }
                    c.trials += cell.trials;
                    c.failures += cell.failures;
                    c.cleared += cell.cleared;
                    c.violations += cell.violations;
                    c.overlapping = true;
                }
                None => out.cells.push(cell.clone()),
            }
        }
        for s in &rep.seeds {
            if !out.seeds.contains(s) {
                out.seeds.push(*s);
            }
        }
        out.violations.extend(rep.violations.iter().cloned());
        out.wall_time_ms += rep.wall_time_ms;
    }
    let mut seen = HashSet::new();
    out.violations.retain(|v| seen.insert(v.seed));
    out.refresh_evidence_note();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(t: Vec<f64>) -> CampaignReport {
        run_campaign(&CampaignSpec {
            dims: vec![2],
            t_grid: t,
            trials: 4,
            ..CampaignSpec::new(CampaignCheck::Prop4)
        })
        .unwrap()
    }

    #[test]
    fn single_report_is_identity() {
        let r = report(vec![0.0, 1.0]);
        assert_eq!(aggregate_report(std::slice::from_ref(&r)).unwrap(), r);
    }

    #[test]
    fn disjoint_cells_union() {
        let a = report(vec![0.0]);
        let b = report(vec![1.0, 2.0]);
        let m = aggregate_report(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(m.cells.len(), 3);
        assert_eq!(m.total_trials(), a.total_trials() + b.total_trials());
        assert!(m.cells.iter().all(|c| !c.overlapping));
        assert_eq!(m.cells[0], a.cells[0]);
        assert_eq!(&m.cells[1..], &b.cells[..]);
    }

    #[test]
    fn self_merge_doubles_and_flags() {
        let a = report(vec![0.0, 1.0]);
        let m = aggregate_report(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(m.cells.len(), a.cells.len());
        for (x, y) in m.cells.iter().zip(&a.cells) {
            assert_eq!(x.trials, 2 * y.trials);
            assert!(x.overlapping);
            assert_eq!(
                CellReport {
                    trials: y.trials,
                    overlapping: false,
                    ..x.clone()
                },
                *y
            );
        }
        assert_eq!(m.violations, a.violations);
        assert_eq!(m.seeds, a.seeds);
    }

    #[test]
    fn incompatible_reports_are_rejected() {
        let a = report(vec![0.0]);
        let mut b = a.clone();
        b.check = CampaignCheck::Drury;
        assert!(aggregate_report(&[a.clone(), b]).is_err());
        let mut c = a.clone();
        c.cells[0].min_margin = Some(-1.0);
        assert!(aggregate_report(&[a.clone(), c]).is_err());
        assert!(aggregate_report(&[]).is_err());
    }

    #[test]
    fn violations_dedup_by_seed() {
        let rep = run_campaign(&CampaignSpec {
            dims: vec![2],
            r_grid: vec![0.25],
            t_grid: vec![2.0],
            trials: 20,
            families: vec![Family::Diagonal],
            ..CampaignSpec::new(CampaignCheck::Zhan)
        })
        .unwrap();
        assert!(!rep.violations.is_empty());
        let m = aggregate_report(&[rep.clone(), rep.clone()]).unwrap();
        assert_eq!(m.violations, rep.violations);
        assert!(m.evidence_note.is_some());
    }
}
