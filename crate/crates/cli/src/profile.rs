//! `profile` subcommand: Dolan-More performance profiles computed from an
//! experiment's trace files, with optional externally supplied baseline
//! costs (deterministic solvers appear as a single vertical line).

use crate::{CliError, CliResult};
use ssd_core::{performance_profile, SolverRuns};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Extracts the solver id from a `trace_<id>_r<nnnn>.csv` filename.
fn solver_id_of(filename: &str) -> Option<&str> {
    let stem = filename.strip_prefix("trace_")?.strip_suffix(".csv")?;
    let (id, rep) = stem.rsplit_once("_r")?;
    if rep.is_empty() || !rep.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(id)
}

fn fevals_to_threshold(path: &Path, threshold: f64) -> CliResult<Option<u64>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Input(format!("missing trace {}: {e}", path.display())))?;
    let mut first_rel: Option<f64> = None;
    for record in reader.records() {
        let record = record?;
        let fevals: u64 = record
            .get(2)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::Input(format!("bad fevals field in {}", path.display())))?;
        let rel: f64 = record
            .get(4)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::Input(format!("bad rel_error field in {}", path.display())))?;
        let r0 = *first_rel.get_or_insert(rel);
        if rel <= r0 * (1.0 - threshold) {
            return Ok(Some(fevals));
        }
    }
    if first_rel.is_none() {
        return Err(CliError::Input(format!(
            "trace {} contains no records",
            path.display()
        )));
    }
    Ok(None)
}

/// Builds the profile CSV from every trace in `dir`. Returns the output
/// path.
pub fn profile_dir(
    dir: &Path,
    threshold: f64,
    baselines: &[(String, u64)],
    output: Option<PathBuf>,
) -> CliResult<PathBuf> {
    if !(0.0 < threshold && threshold < 1.0) {
        return Err(CliError::Input(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let mut by_solver: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", dir.display())))?;
    for entry in entries {
        let entry = entry?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if let Some(id) = solver_id_of(name) {
            by_solver.entry(id.to_string()).or_default().push(entry.path());
        }
    }
    if by_solver.is_empty() {
        return Err(CliError::Input(format!(
            "no trace files found under {}",
            dir.display()
        )));
    }

    let mut runs = Vec::new();
    for (solver, mut paths) in by_solver {
        paths.sort();
        let mut fevals = Vec::with_capacity(paths.len());
        for path in &paths {
            fevals.push(fevals_to_threshold(path, threshold)?);
        }
        runs.push(SolverRuns { solver, fevals });
    }
    for (name, cost) in baselines {
        runs.push(SolverRuns {
            solver: name.clone(),
            fevals: vec![Some(*cost)],
        });
    }

    let curves = performance_profile(&runs)?;
    let out = output.unwrap_or_else(|| dir.join("profile.csv"));
    let mut writer = csv::Writer::from_path(&out)?;
    writer.write_record(["solver", "tau", "fraction"])?;
    for curve in &curves {
        for point in &curve.points {
            writer.write_record([
                curve.solver.clone(),
                format!("{}", point.tau),
                format!("{}", point.fraction),
            ])?;
        }
    }
    writer.flush().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_ids_parse_from_filenames() {
        assert_eq!(
            solver_id_of("trace_ssd-haar-l3-armijo_r0007.csv"),
            Some("ssd-haar-l3-armijo")
        );
        assert_eq!(solver_id_of("trace_gd-fixed_r0000.csv"), Some("gd-fixed"));
        assert_eq!(solver_id_of("summary.json"), None);
        assert_eq!(solver_id_of("trace_x_rabc.csv"), None);
    }
}
