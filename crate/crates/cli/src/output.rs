use std::io::Write;
use std::path::Path;

use specheck::inequalities::VerificationRecord;

pub fn read_input(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

/// Writes to a temporary file next to `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), String> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| format!("cannot write {}: {e}", path.display());
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.flush().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub const RECORD_CSV_HEADER: &str = "check,n,r,t,k,seed,proven,pass,tol,j,lhs,rhs,margin";

/// One row per record and index `j` (1-based).
pub fn records_to_csv(records: &[VerificationRecord]) -> String {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut out = format!("{RECORD_CSV_HEADER}\n");
    for rec in records {
        for j in 0..rec.margins.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                rec.check,
                rec.n,
                opt(rec.r),
                opt(rec.t),
                rec.k.map(|k| k.to_string()).unwrap_or_default(),
                rec.seed.map(|s| s.to_string()).unwrap_or_default(),
                rec.proven,
                rec.pass,
                rec.tol,
                j + 1,
                rec.lhs[j],
                rec.rhs[j],
                rec.margins[j]
            ));
        }
    }
    out
}
