use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::inequalities::{
    ag_mean_check, bhatia_kittaneh_check, corollary2_check, drury_check, mean_comparison_check,
    monotonicity_trace, proposition4_check, zhan_is_proven, zhan_norm_all_orders,
    zhan_norm_is_proven, zhan_singular_value_check, CheckKind, InequalityCase,
    VerificationRecord, TOL_FACTOR,
};
use crate::linalg::random::derive_seed;

use super::family::{generate_case, Family, TrialCase};
use super::hiprec::{hp_records, HP_MAX_DIM};
use super::shrink::{shrink_counterexample, ShrinkMarker};

/// Inequality exercised by a campaign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignCheck {
    Zhan,
    ZhanNorm,
    Prop4,
    AgMean,
    BhatiaKittaneh,
    Drury,
    MeanComparison,
    Corollary2,
    Monotonicity,
}

impl CampaignCheck {
    pub const ALL: [CampaignCheck; 9] = [
        CampaignCheck::Zhan,
        CampaignCheck::ZhanNorm,
        CampaignCheck::Prop4,
        CampaignCheck::AgMean,
        CampaignCheck::BhatiaKittaneh,
        CampaignCheck::Drury,
        CampaignCheck::MeanComparison,
        CampaignCheck::Corollary2,
        CampaignCheck::Monotonicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CampaignCheck::Zhan => "zhan",
            CampaignCheck::ZhanNorm => "zhan-norm",
            CampaignCheck::Prop4 => "prop4",
            CampaignCheck::AgMean => "ag-mean",
            CampaignCheck::BhatiaKittaneh => "bhatia-kittaneh",
            CampaignCheck::Drury => "drury",
            CampaignCheck::MeanComparison => "mean-comparison",
            CampaignCheck::Corollary2 => "corollary2",
            CampaignCheck::Monotonicity => "monotonicity",
        }
    }

    /// The r grid is a cell axis.
    pub fn uses_r(self) -> bool {
        matches!(self, CampaignCheck::Zhan | CampaignCheck::ZhanNorm)
    }

    /// The t grid is a cell axis. For monotonicity it is instead the
    /// sampling grid of every trace.
    pub fn uses_t(self) -> bool {
        matches!(
            self,
            CampaignCheck::Zhan
                | CampaignCheck::ZhanNorm
                | CampaignCheck::Prop4
                | CampaignCheck::MeanComparison
                | CampaignCheck::Corollary2
        )
    }

    /// Draws arbitrary (non-Hermitian) matrices on the generic family.
    pub fn arbitrary(self) -> bool {
        self == CampaignCheck::AgMean
    }

    pub fn needs_x(self) -> bool {
        self == CampaignCheck::ZhanNorm
    }

    pub fn is_proven(self, r: Option<f64>, t: Option<f64>) -> bool {
        match self {
            CampaignCheck::Zhan => zhan_is_proven(r.unwrap_or(f64::NAN), t.unwrap_or(f64::NAN)),
            CampaignCheck::ZhanNorm => zhan_norm_is_proven(r.unwrap_or(f64::NAN)),
            _ => true,
        }
    }
}

impl fmt::Display for CampaignCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CampaignCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CampaignCheck::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| invalid(format!("unknown check '{s}'")))
    }
}

fn default_dims() -> Vec<usize> {
    (2..=6).collect()
}

fn default_r_grid() -> Vec<f64> {
    vec![0.5, 1.0, 1.5]
}

fn default_t_grid() -> Vec<f64> {
    vec![-1.9, -1.0, 0.0, 1.0, 2.0]
}

fn default_trials() -> usize {
    200
}

fn default_families() -> Vec<Family> {
    Family::DEFAULTS.to_vec()
}

fn default_true() -> bool {
    true
}

/// A randomized campaign over `(n, r, t)` cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub check: CampaignCheck,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_r_grid")]
    pub r_grid: Vec<f64>,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Trial `i` of every cell uses `families[i % families.len()]`.
    #[serde(default = "default_families")]
    pub families: Vec<Family>,
    #[serde(default)]
    pub seed: u64,
    /// Replaces the 1e-9 relative tolerance factor.
    #[serde(default)]
    pub tol_factor: Option<f64>,
    #[serde(default = "default_true")]
    pub high_precision: bool,
    /// Shrink confirmed violations before listing them.
    #[serde(default)]
    pub shrink: bool,
}

impl CampaignSpec {
    pub fn new(check: CampaignCheck) -> Self {
        CampaignSpec {
            check,
            dims: default_dims(),
            r_grid: default_r_grid(),
            t_grid: default_t_grid(),
            trials: default_trials(),
            families: default_families(),
            seed: 0,
            tol_factor: None,
            high_precision: true,
            shrink: false,
        }
    }

    pub fn tol_factor(&self) -> f64 {
        self.tol_factor.unwrap_or(TOL_FACTOR)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&n| n == 0) {
            return Err(invalid("dimensions must be at least 1"));
        }
        if self.families.is_empty() {
            return Err(invalid("at least one matrix family is required"));
        }
        if let Some(f) = self.tol_factor {
            if !(f > 0.0 && f.is_finite()) {
                return Err(invalid("tolerance factor must be positive"));
            }
        }
        if self.check.uses_r() {
            for &r in &self.r_grid {
                if !(0.0..=2.0).contains(&r) {
                    return Err(invalid(format!("r must lie in [0, 2], got {r}")));
                }
            }
        }
        if self.check.uses_t() {
            for &t in &self.t_grid {
                crate::inequalities::check_t(t)?;
            }
        }
        if self.check == CampaignCheck::Monotonicity {
            if self.t_grid.iter().any(|&t| !t.is_finite() || t <= -2.0) {
                return Err(invalid("t must exceed -2"));
            }
            if self.t_grid.len() == 1 {
                return Err(invalid("a monotonicity grid needs at least two points"));
            }
            if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("the t grid must be strictly increasing"));
            }
        }
        Ok(())
    }

    /// Cells in `dims × r_grid × t_grid` order, restricted to the axes the
    /// check uses.
    pub fn cells(&self) -> Vec<Cell> {
        let rs: Vec<Option<f64>> = if self.check.uses_r() {
            self.r_grid.iter().map(|&r| Some(r)).collect()
        } else {
            vec![None]
        };
        let ts: Vec<Option<f64>> = if self.check.uses_t() {
            self.t_grid.iter().map(|&t| Some(t)).collect()
        } else if self.check == CampaignCheck::Monotonicity && self.t_grid.is_empty() {
            Vec::new()
        } else {
            vec![None]
        };
        let mut out = Vec::new();
        for &n in &self.dims {
            for &r in &rs {
                for &t in &ts {
                    out.push(Cell { n, r, t });
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub r: Option<f64>,
    pub t: Option<f64>,
}

fn coordinate_bits(x: Option<f64>) -> u64 {
    x.map_or(u64::MAX, |v| (v + 0.0).to_bits())
}

impl Cell {
    /// Sub-seed of this cell, a function of the master seed and the cell's
    /// coordinates only.
    pub fn seed(&self, master: u64) -> u64 {
        derive_seed(
            master,
            &[self.n as u64, coordinate_bits(self.r), coordinate_bits(self.t)],
        )
    }

    pub fn same_coordinates(&self, n: usize, r: Option<f64>, t: Option<f64>) -> bool {
        self.n == n && coordinate_bits(self.r) == coordinate_bits(r) && coordinate_bits(self.t) == coordinate_bits(t)
    }
}

/// Fast-path records of `check` on one case. `grid` is only read by the
/// monotonicity check.
pub fn evaluate_case(
    check: CampaignCheck,
    case: &TrialCase,
    r: Option<f64>,
    t: Option<f64>,
    grid: &[f64],
) -> Result<Vec<VerificationRecord>> {
    let t0 = t.unwrap_or(0.0);
    if check == CampaignCheck::AgMean {
        return Ok(vec![ag_mean_check(&case.a, &case.b)?]);
    }
    let (a, b) = case.psd_pair()?;
    Ok(match check {
        CampaignCheck::Zhan => {
            vec![zhan_singular_value_check(&InequalityCase::new(a, b, r.unwrap_or(1.0), t0)?)?]
        }
        CampaignCheck::ZhanNorm => {
            let x = case
                .x
                .clone()
                .ok_or_else(|| invalid("the norm check needs a matrix X"))?;
            zhan_norm_all_orders(&InequalityCase::new(a, b, r.unwrap_or(1.0), t0)?.with_x(x)?)?
        }
        CampaignCheck::Prop4 => vec![proposition4_check(&a, &b, t0)?],
        CampaignCheck::BhatiaKittaneh => vec![bhatia_kittaneh_check(&a, &b)?],
        CampaignCheck::Drury => vec![drury_check(&a, &b)?],
        CampaignCheck::MeanComparison => {
            let (x, y) = mean_comparison_check(&a, &b, t0)?;
            vec![x, y]
        }
        CampaignCheck::Corollary2 => {
            let (x, y) = corollary2_check(&a, &b, t0)?;
            vec![x, y]
        }
        CampaignCheck::Monotonicity => vec![monotonicity_trace(&a, &b, grid)?.to_record()],
        CampaignCheck::AgMean => unreachable!(),
    })
}

/// Outcome of re-checking a fast-path violation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecheckStatus {
    /// Still violated in double-double arithmetic.
    Confirmed,
    /// Not re-checked (dimension above the high-precision limit, path
    /// disabled, or the slow path failed).
    Unconfirmed,
    /// Cleared by the high-precision path; counted, never listed.
    Cleared,
}

/// A failing trial with everything needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: CampaignCheck,
    /// The record that failed.
    pub record: CheckKind,
    pub n: usize,
    pub r: Option<f64>,
    pub t: Option<f64>,
    pub k: Option<usize>,
    pub family: Family,
    /// Trial seed: `generate_case(family, n, seed, ..)` rebuilds the case.
    pub seed: u64,
    pub trial: usize,
    pub case: TrialCase,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<f64>,
    pub margins: Vec<f64>,
    pub tol: f64,
    pub tol_factor: f64,
    pub proven: bool,
    pub status: RecheckStatus,
    pub hp_margins: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shrink: Option<ShrinkMarker>,
}

impl Violation {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn is_confirmed(&self) -> bool {
        self.status == RecheckStatus::Confirmed
    }
}

/// Aggregates of one `(n, r, t)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub n: usize,
    pub r: Option<f64>,
    pub t: Option<f64>,
    pub seed: u64,
    pub proven: bool,
    /// Completed trials (numerical failures excluded).
    pub trials: usize,
    pub failures: usize,
    /// Fast-path violations cleared by the high-precision re-check.
    pub cleared: usize,
    /// Listed violations (confirmed or unconfirmed).
    pub violations: usize,
    pub min_margin: Option<f64>,
    pub argmin_seed: Option<u64>,
    /// SHA-256 of the JSON form of the argmin case.
    pub argmin_digest: Option<String>,
    #[serde(default)]
    pub overlapping: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failure_notes: Vec<String>,
}

pub const EVIDENCE_NOTE: &str = "cells with proven = false lie outside the region where the \
inequality is a theorem; their margins are numerical evidence only";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub check: CampaignCheck,
    pub version: String,
    /// Master seeds of the merged campaigns.
    pub seeds: Vec<u64>,
    pub families: Vec<Family>,
    pub tol_factor: f64,
    pub cells: Vec<CellReport>,
    pub violations: Vec<Violation>,
    pub evidence_note: Option<String>,
    pub wall_time_ms: u64,
}

impl CampaignReport {
    pub fn total_trials(&self) -> usize {
        self.cells.iter().map(|c| c.trials).sum()
    }

    pub fn total_failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures).sum()
    }

    pub fn confirmed(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.is_confirmed())
    }

    pub fn has_confirmed(&self) -> bool {
        self.confirmed().next().is_some()
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.cells
            .iter()
            .filter_map(|c| c.min_margin)
            .reduce(f64::min)
    }

    pub(crate) fn refresh_evidence_note(&mut self) {
        self.evidence_note = self
            .cells
            .iter()
            .any(|c| !c.proven)
            .then(|| EVIDENCE_NOTE.to_string());
    }

    /// Pretty JSON with the wall-time field zeroed: a pure function of the
    /// campaign spec.
    pub fn to_canonical_json(&self) -> String {
        let mut c = self.clone();
        c.wall_time_ms = 0;
        serde_json::to_string_pretty(&c).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `check,n,r,t,trials,min_margin,violations`, one row per cell; absent
    /// values are left empty.
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("check,n,r,t,trials,min_margin,violations\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.check,
                c.n,
                opt(c.r),
                opt(c.t),
                c.trials,
                opt(c.min_margin),
                c.violations
            ));
        }
        out
    }
}

pub(crate) fn case_digest(case: &TrialCase) -> String {
    let json = serde_json::to_vec(case).expect("case serializes");
    Sha256::digest(&json)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Re-checks a fast-path failure and fills in status and high-precision
/// margins.
pub(crate) fn recheck(v: &mut Violation, enabled: bool) {
    if !enabled {
        v.status = RecheckStatus::Unconfirmed;
        v.note = Some("high-precision re-check disabled".into());
        return;
    }
    if v.n > HP_MAX_DIM {
        v.status = RecheckStatus::Unconfirmed;
        v.note = Some(format!("n = {} exceeds the high-precision limit {HP_MAX_DIM}", v.n));
        return;
    }
    match hp_records(v.check, &v.case, v.r, v.t, &v.grid) {
        Ok(mut recs) => {
            for rec in &mut recs {
                rec.apply_tol_factor(v.tol_factor);
            }
            let same = recs
                .iter()
                .find(|rec| rec.check == v.record && rec.k == v.k)
                .or_else(|| recs.first());
            v.hp_margins = same.map(|rec| rec.margins.clone());
            v.status = if recs.iter().any(|rec| !rec.pass) {
                RecheckStatus::Confirmed
            } else {
                RecheckStatus::Cleared
            };
        }
        Err(e) => {
            v.status = RecheckStatus::Unconfirmed;
            v.note = Some(format!("high-precision re-check failed: {e}"));
        }
    }
}

struct CellOutcome {
    report: CellReport,
    violations: Vec<Violation>,
}

fn run_cell(spec: &CampaignSpec, cell: &Cell) -> CellOutcome {
    let check = spec.check;
    let cell_seed = cell.seed(spec.seed);
    let factor = spec.tol_factor();
    let grid: &[f64] = if check == CampaignCheck::Monotonicity {
        &spec.t_grid
    } else {
        &[]
    };
    let mut report = CellReport {
        n: cell.n,
        r: cell.r,
        t: cell.t,
        seed: cell_seed,
        proven: check.is_proven(cell.r, cell.t),
        trials: 0,
        failures: 0,
        cleared: 0,
        violations: 0,
        min_margin: None,
        argmin_seed: None,
        argmin_digest: None,
        overlapping: false,
        failure_notes: Vec::new(),
    };
    let mut violations = Vec::new();
    let mut argmin_case = None;

    for trial in 0..spec.trials {
        let family = spec.families[trial % spec.families.len()];
        let seed = derive_seed(cell_seed, &[trial as u64]);
        let outcome = generate_case(family, cell.n, seed, check.arbitrary(), check.needs_x())
            .and_then(|case| {
                let recs = evaluate_case(check, &case, cell.r, cell.t, grid)?;
                Ok((case, recs))
            });
        let (case, mut recs) = match outcome {
            Ok(x) => x,
            Err(e) => {
                report.failures += 1;
                if report.failure_notes.len() < 3 {
                    report.failure_notes.push(format!("trial {trial}: {e}"));
                }
                continue;
            }
        };
        report.trials += 1;
        for rec in &mut recs {
            rec.apply_tol_factor(factor);
            rec.seed = Some(seed);
        }
        let trial_min = recs
            .iter()
            .map(VerificationRecord::min_margin)
            .fold(f64::INFINITY, f64::min);
        if report.min_margin.map_or(true, |m| trial_min < m) {
            report.min_margin = Some(trial_min);
            report.argmin_seed = Some(seed);
            argmin_case = Some(case.clone());
        }
        let Some(worst) = recs
            .iter()
            .filter(|rec| !rec.pass)
            .min_by(|x, y| x.min_margin().total_cmp(&y.min_margin()))
        else {
            continue;
        };
        let mut v = Violation {
            check,
            record: worst.check,
            n: cell.n,
            r: cell.r,
            t: cell.t,
            k: worst.k,
            family,
            seed,
            trial,
            case,
            grid: grid.to_vec(),
            margins: worst.margins.clone(),
            tol: worst.tol,
            tol_factor: factor,
            proven: recs.iter().all(|rec| rec.proven),
            status: RecheckStatus::Unconfirmed,
            hp_margins: None,
            note: None,
            shrink: None,
        };
        recheck(&mut v, spec.high_precision);
        if v.status == RecheckStatus::Cleared {
            report.cleared += 1;
            continue;
        }
        if spec.shrink && v.is_confirmed() {
            v = shrink_counterexample(&v);
        }
        report.violations += 1;
        violations.push(v);
    }
    report.argmin_digest = argmin_case.as_ref().map(case_digest);
    CellOutcome { report, violations }
}

/// Runs every cell of `spec` (in parallel) and folds the results in cell
/// order.
pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignReport> {
    spec.validate()?;
    let start = Instant::now();
    let outcomes: Vec<CellOutcome> = spec
        .cells()
        .par_iter()
        .map(|cell| run_cell(spec, cell))
        .collect();
    let mut cells = Vec::with_capacity(outcomes.len());
    let mut violations = Vec::new();
    for o in outcomes {
        cells.push(o.report);
        violations.extend(o.violations);
    }
    let mut report = CampaignReport {
        check: spec.check,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seeds: vec![spec.seed],
        families: spec.families.clone(),
        tol_factor: spec.tol_factor(),
        cells,
        violations,
        evidence_note: None,
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    report.refresh_evidence_note();
    Ok(report)
}
