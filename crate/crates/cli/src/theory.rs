//! `theory` subcommand: closed-form report plus the embedding-probability
//! grid over (l, d) for a fixed distortion.

use crate::{CliError, CliResult};
use serde::Deserialize;
use ssd_core::{embedding_probability, theory_report, TheoryParams};
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryFile {
    pub d: usize,
    pub ell: usize,
    pub eps: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub horizon: usize,
    /// Tail offset; defaults to half the embedding probability.
    #[serde(default)]
    pub t: Option<f64>,
    /// Initial error feeding the bound curves; defaults to 1.
    #[serde(default)]
    pub f0_err: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub grid_d: Option<Vec<usize>>,
    #[serde(default)]
    pub grid_ell: Option<Vec<usize>>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

const DEFAULT_GRID_D: [usize; 7] = [10, 20, 50, 100, 200, 500, 1000];
const DEFAULT_GRID_ELL: [usize; 11] = [1, 2, 3, 5, 10, 20, 50, 100, 200, 500, 1000];

/// Writes `theory_report.json` and `embedding_grid.csv`, returning their
/// paths.
pub fn run_theory(params_path: &Path) -> CliResult<(PathBuf, PathBuf)> {
    let raw = std::fs::read_to_string(params_path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", params_path.display())))?;
    let file: TheoryFile = serde_json::from_str(&raw)?;

    let delta = embedding_probability(file.d, file.ell, file.eps)?;
    let params = TheoryParams {
        d: file.d,
        ell: file.ell,
        eps: file.eps,
        gamma: file.gamma,
        lambda: file.lambda,
        horizon: file.horizon,
        t: file.t.unwrap_or(delta / 2.0),
        radius: file.radius,
    };
    let report = theory_report(&params, file.f0_err.unwrap_or(1.0))?;

    let base = params_path.parent().unwrap_or_else(|| Path::new("."));
    let out_dir = match &file.output_dir {
        Some(dir) if dir.is_absolute() => dir.clone(),
        Some(dir) => base.join(dir),
        None => base.to_path_buf(),
    };
    std::fs::create_dir_all(&out_dir)?;

    let report_path = out_dir.join("theory_report.json");
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    std::fs::write(&report_path, bytes)?;

    let grid_d = file.grid_d.unwrap_or_else(|| DEFAULT_GRID_D.to_vec());
    let grid_ell = file.grid_ell.unwrap_or_else(|| DEFAULT_GRID_ELL.to_vec());
    let grid_path = out_dir.join("embedding_grid.csv");
    let mut writer = csv::Writer::from_path(&grid_path)?;
    writer.write_record(["d", "ell", "eps", "delta"])?;
    for &d in &grid_d {
        for &ell in &grid_ell {
            if ell > d {
                continue;
            }
            let delta = embedding_probability(d, ell, file.eps)?;
            writer.write_record([
                d.to_string(),
                ell.to_string(),
                format!("{}", file.eps),
                format!("{delta}"),
            ])?;
        }
    }
    writer.flush().map_err(|e| CliError::Input(e.to_string()))?;

    Ok((report_path, grid_path))
}
