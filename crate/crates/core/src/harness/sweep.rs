//! Parameter sweeps over the step sizes and the sharing mass.
//!
//! Grid cells are independent scenario runs over the same test days and
//! execute in parallel; results are collected in grid order so the emitted
//! CSVs are deterministic.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::dfs::DfsConfig;
use crate::error::Result;
use crate::harness::bundle::ModelBundle;
use crate::harness::config::ScenarioConfig;
use crate::harness::csv_io::create;
use crate::harness::pipeline::DayData;
use crate::harness::scenario::run_scenario_on;

pub const SWEEP_ETA_HEADER: &str = "eta_s,eta_r,mean_ac_rmse_kw";
pub const SWEEP_LAMBDA_HEADER: &str = "lambda,mean_ac_rmse_kw";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaCell {
    pub eta_s: f64,
    pub eta_r: f64,
    pub mean_ac_rmse_kw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaCell {
    pub lambda: f64,
    pub mean_ac_rmse_kw: f64,
}

fn mean_ac_rmse(dfs_cfg: &DfsConfig, bundle: &ModelBundle, days: &[DayData]) -> Result<f64> {
    Ok(run_scenario_on(dfs_cfg, bundle, days)?.metrics.ac.mean)
}

/// Mean AC RMSE for every (eta_s, eta_r) combination of the config's grids.
pub fn sweep_eta(
    cfg: &ScenarioConfig,
    bundle: &ModelBundle,
    days: &[DayData],
) -> Result<Vec<EtaCell>> {
    let mut grid = Vec::new();
    for &eta_s in &cfg.sweep_eta_s {
        for &eta_r in &cfg.sweep_eta_r {
            grid.push((eta_s, eta_r));
        }
    }
    grid.par_iter()
        .map(|&(eta_s, eta_r)| {
            let dfs_cfg = DfsConfig {
                eta_s,
                eta_r,
                ..cfg.dfs()
            };
            Ok(EtaCell {
                eta_s,
                eta_r,
                mean_ac_rmse_kw: mean_ac_rmse(&dfs_cfg, bundle, days)?,
            })
        })
        .collect()
}

/// Mean AC RMSE for every sharing mass in the config's lambda grid.
pub fn sweep_lambda(
    cfg: &ScenarioConfig,
    bundle: &ModelBundle,
    days: &[DayData],
) -> Result<Vec<LambdaCell>> {
    cfg.sweep_lambda
        .par_iter()
        .map(|&lambda| {
            let dfs_cfg = DfsConfig {
                lambda,
                ..cfg.dfs()
            };
            Ok(LambdaCell {
                lambda,
                mean_ac_rmse_kw: mean_ac_rmse(&dfs_cfg, bundle, days)?,
            })
        })
        .collect()
}

/// Writes `sweep_eta.csv` in long format (one row per grid cell).
pub fn write_eta_sweep(dir: &Path, cells: &[EtaCell]) -> Result<PathBuf> {
    let path = dir.join("sweep_eta.csv");
    let mut w = create(&path)?;
    writeln!(w, "{SWEEP_ETA_HEADER}")?;
    for c in cells {
        writeln!(w, "{},{},{}", c.eta_s, c.eta_r, c.mean_ac_rmse_kw)?;
    }
    w.flush()?;
    Ok(path)
}

/// Writes `sweep_lambda.csv`.
pub fn write_lambda_sweep(dir: &Path, cells: &[LambdaCell]) -> Result<PathBuf> {
    let path = dir.join("sweep_lambda.csv");
    let mut w = create(&path)?;
    writeln!(w, "{SWEEP_LAMBDA_HEADER}")?;
    for c in cells {
        writeln!(w, "{},{}", c.lambda, c.mean_ac_rmse_kw)?;
    }
    w.flush()?;
    Ok(path)
}
