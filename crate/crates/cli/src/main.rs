mod grid;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use specheck::explorer::{
    aggregate_report, evaluate_case, generate_case, hp_records, run_campaign, CampaignCheck,
    CampaignReport, CampaignSpec, Family, TrialCase, HP_MAX_DIM,
};
use specheck::inequalities::{VerificationRecord, TOL_FACTOR};
use specheck::linalg::random::derive_seed;
use specheck::pencil::{track_branches, HermitianPencil};

use crate::grid::{parse_dims, parse_real_grid};
use crate::output::{read_input, records_to_csv, write_atomic};

const EXIT_OK: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "specheck", version, about = "Numerical checks of singular value inequalities for matrix means")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one (n, r, t) point on random or given matrices.
    Verify(VerifyArgs),
    /// Run a randomized campaign over an (n, r, t) grid.
    Scan(ScanArgs),
    /// Track the eigenvalue branches of a Hermitian pencil.
    Track(TrackArgs),
    /// Convert a JSON output to CSV, or merge several campaign reports.
    Report(ReportArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    check: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    r: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t: f64,
    /// Sampling grid of the monotonicity trace.
    #[arg(long, default_value = "-1.9:4:0.1", allow_hyphen_values = true)]
    t_grid: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated matrix families; trial i uses family i mod count.
    #[arg(long)]
    families: Option<String>,
    /// JSON file with fields `a`, `b` (and `x` for zhan-norm) to check
    /// instead of random trials.
    #[arg(long)]
    case: Option<PathBuf>,
    #[arg(long)]
    tol_factor: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    check: String,
    #[arg(long, default_value = "2:6")]
    n: String,
    #[arg(long, default_value = "0.5,1,1.5", allow_hyphen_values = true)]
    r_grid: String,
    #[arg(long, default_value = "-1.9,-1,0,1,2", allow_hyphen_values = true)]
    t_grid: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    families: Option<String>,
    #[arg(long)]
    tol_factor: Option<f64>,
    /// Skip the double-double re-check of fast-path violations.
    #[arg(long)]
    no_high_precision: bool,
    /// Shrink confirmed violations.
    #[arg(long)]
    shrink: bool,
    /// JSON report.
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV summary.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct TrackArgs {
    /// JSON file `{"M0": matrix, "M1": matrix}`.
    #[arg(long)]
    pencil: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    t_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    t_max: f64,
    /// Number of grid intervals.
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long)]
    gap_tol: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Input JSON (repeat to merge campaign reports).
    #[arg(long, required = true)]
    from: Vec<PathBuf>,
    /// Output path; `.csv` selects CSV, anything else JSON.
    #[arg(long)]
    to: PathBuf,
}

/// Failure of a command: usage/input problems (exit 2) are separated from
/// confirmed violations (exit 1).
enum Failure {
    Usage(String),
    Violation(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn check_output(path: &Path) -> Result<(), Failure> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(usage(format!(
            "output directory {} does not exist",
            parent.display()
        )));
    }
    if path.is_dir() {
        return Err(usage(format!("{} is a directory", path.display())));
    }
    Ok(())
}

fn check_input(path: &Path) -> Result<(), Failure> {
    if !path.is_file() {
        return Err(usage(format!("cannot read {}", path.display())));
    }
    Ok(())
}

fn parse_families(s: &Option<String>) -> Result<Vec<Family>, Failure> {
    match s {
        None => Ok(Family::DEFAULTS.to_vec()),
        Some(s) => Ok(s
            .split(',')
            .map(|f| f.trim().parse::<Family>())
            .collect::<Result<Vec<_>, _>>()?),
    }
}

fn parse_check(s: &str) -> Result<CampaignCheck, Failure> {
    Ok(s.parse::<CampaignCheck>()?)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("SPECHECK_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| usage(format!("SPECHECK_THREADS must be a non-negative integer, got '{v}'")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let check = parse_check(&a.check)?;
    let families = parse_families(&a.families)?;
    check_output(&a.out)?;
    if let Some(p) = &a.case {
        check_input(p)?;
    }
    let grid = if check == CampaignCheck::Monotonicity {
        parse_real_grid(&a.t_grid).map_err(usage)?
    } else {
        Vec::new()
    };
    // Reuse the campaign validation for n, r, t and the grid.
    CampaignSpec {
        dims: vec![a.n],
        r_grid: vec![a.r],
        t_grid: if check == CampaignCheck::Monotonicity {
            grid.clone()
        } else {
            vec![a.t]
        },
        families: families.clone(),
        tol_factor: a.tol_factor,
        ..CampaignSpec::new(check)
    }
    .validate()?;
    let factor = a.tol_factor.unwrap_or(TOL_FACTOR);
    let (r, t) = (
        check.uses_r().then_some(a.r),
        check.uses_t().then_some(a.t),
    );

    let cases: Vec<(Option<u64>, TrialCase)> = match &a.case {
        Some(p) => {
            let case: TrialCase = serde_json::from_str(&read_input(p)?)
                .map_err(|e| usage(format!("malformed case file {}: {e}", p.display())))?;
            vec![(None, case)]
        }
        None => (0..a.trials)
            .map(|i| {
                let seed = derive_seed(a.seed, &[i as u64]);
                let fam = families[i % families.len()];
                generate_case(fam, a.n, seed, check.arbitrary(), check.needs_x())
                    .map(|c| (Some(seed), c))
            })
            .collect::<Result<_, _>>()?,
    };

    let mut records: Vec<VerificationRecord> = Vec::new();
    let mut confirmed = 0;
    let mut unconfirmed = 0;
    for (seed, case) in &cases {
        let mut recs = evaluate_case(check, case, r, t, &grid)?;
        for rec in &mut recs {
            rec.apply_tol_factor(factor);
            rec.seed = *seed;
        }
        if recs.iter().any(|rec| !rec.pass) {
            if case.n() <= HP_MAX_DIM {
                let mut hp = hp_records(check, case, r, t, &grid)?;
                for rec in &mut hp {
                    rec.apply_tol_factor(factor);
                }
                if hp.iter().any(|rec| !rec.pass) {
                    confirmed += 1;
                }
            } else {
                unconfirmed += 1;
            }
        }
        records.extend(recs);
    }
    let json = serde_json::to_string_pretty(&records)? + "\n";
    write_atomic(&a.out, json.as_bytes())?;
    let min = records
        .iter()
        .map(VerificationRecord::min_margin)
        .fold(f64::INFINITY, f64::min);
    eprintln!(
        "{check}: {} case(s), min margin {min:e}, {confirmed} confirmed and {unconfirmed} unconfirmed violation(s)",
        cases.len()
    );
    if confirmed > 0 {
        return Err(Failure::Violation(format!(
            "{confirmed} confirmed violation(s) of {check}"
        )));
    }
    Ok(())
}

fn cmd_scan(a: ScanArgs) -> CmdResult {
    let check = parse_check(&a.check)?;
    check_output(&a.out)?;
    if let Some(p) = &a.csv {
        check_output(p)?;
    }
    let spec = CampaignSpec {
        check,
        dims: parse_dims(&a.n).map_err(usage)?,
        r_grid: parse_real_grid(&a.r_grid).map_err(usage)?,
        t_grid: parse_real_grid(&a.t_grid).map_err(usage)?,
        trials: a.trials,
        families: parse_families(&a.families)?,
        seed: a.seed,
        tol_factor: a.tol_factor,
        high_precision: !a.no_high_precision,
        shrink: a.shrink,
    };
    spec.validate()?;
    let report = run_campaign(&spec)?;
    write_atomic(&a.out, (report.to_json() + "\n").as_bytes())?;
    if let Some(p) = &a.csv {
        write_atomic(p, report.to_csv().as_bytes())?;
    }
    let confirmed = report.confirmed().count();
    eprintln!(
        "{check}: {} cells, {} trials, {} failures, min margin {}, {} listed violation(s), {confirmed} confirmed",
        report.cells.len(),
        report.total_trials(),
        report.total_failures(),
        report
            .min_margin()
            .map_or_else(|| "n/a".to_string(), |m| format!("{m:e}")),
        report.violations.len(),
    );
    if let Some(note) = &report.evidence_note {
        eprintln!("note: {note}");
    }
    if confirmed > 0 {
        return Err(Failure::Violation(format!(
            "{confirmed} confirmed violation(s) of {check}"
        )));
    }
    Ok(())
}

fn cmd_track(a: TrackArgs) -> CmdResult {
    check_input(&a.pencil)?;
    check_output(&a.out)?;
    if a.steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    if !(a.t_min.is_finite() && a.t_max.is_finite() && a.t_min < a.t_max) {
        return Err(usage("need finite --t-min < --t-max"));
    }
    let pencil: HermitianPencil = serde_json::from_str(&read_input(&a.pencil)?)
        .map_err(|e| usage(format!("malformed pencil file {}: {e}", a.pencil.display())))?;
    let h = (a.t_max - a.t_min) / a.steps as f64;
    let grid: Vec<f64> = (0..=a.steps)
        .map(|k| {
            if k == a.steps {
                a.t_max
            } else {
                a.t_min + k as f64 * h
            }
        })
        .collect();
    let set = track_branches(&pencil, &grid, a.gap_tol)?;
    write_atomic(&a.out, set.to_csv().as_bytes())?;
    eprintln!(
        "tracked {} branches over {} points ({} refinements)",
        set.n(),
        grid.len(),
        set.refinements()
    );
    Ok(())
}

enum Loaded {
    Report(Box<CampaignReport>),
    Records(Vec<VerificationRecord>),
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = read_input(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("malformed JSON in {}: {e}", path.display())))?;
    if value.is_array() {
        return serde_json::from_value(value)
            .map(Loaded::Records)
            .map_err(|e| usage(format!("{} is not a record list: {e}", path.display())));
    }
    if value.get("cells").is_some() {
        return serde_json::from_value(value)
            .map(|r| Loaded::Report(Box::new(r)))
            .map_err(|e| usage(format!("{} is not a campaign report: {e}", path.display())));
    }
    serde_json::from_value(value)
        .map(|r| Loaded::Records(vec![r]))
        .map_err(|e| usage(format!("{} is neither a report nor a record: {e}", path.display())))
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    for p in &a.from {
        check_input(p)?;
    }
    check_output(&a.to)?;
    let csv = a
        .to
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let loaded = a.from.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let mut reports = Vec::new();
    let mut records = Vec::new();
    for l in loaded {
        match l {
            Loaded::Report(r) => reports.push(*r),
            Loaded::Records(r) => records.extend(r),
        }
    }
    let bytes = match (reports.is_empty(), records.is_empty()) {
        (false, true) => {
            let merged = aggregate_report(&reports)?;
            if csv {
                merged.to_csv()
            } else {
                merged.to_json() + "\n"
            }
        }
        (true, false) => {
            if csv {
                records_to_csv(&records)
            } else {
                serde_json::to_string_pretty(&records)? + "\n"
            }
        }
        _ => return Err(usage("cannot mix campaign reports and record lists")),
    };
    write_atomic(&a.to, bytes.as_bytes())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Track(a) => cmd_track(a),
        Command::Report(a) => cmd_report(a),
    });
    match result {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {}", msg.lines().next().unwrap_or_default());
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_VIOLATION)
        }
    }
}
