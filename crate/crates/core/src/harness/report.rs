//! Aggregation of emitted CSVs into a metrics table.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::csv_io::{create, CsvTable, DFS_DAY_HEADER, KF_SUMMARY_HEADER};
use crate::harness::metrics::{rmse, MetricRange};

pub const REPORT_HEADER: &str = "metric,min_kw,mean_kw,max_kw";

/// One aggregated row of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub metric: String,
    pub range: MetricRange,
}

/// Recomputes per-day RMSEs from `dfs/dfs_day_<d>.csv` files and summarizes
/// `kf/kf_summary.csv` when present.
pub fn build_report(out_dir: &Path) -> Result<Vec<ReportRow>> {
    let dfs_dir = out_dir.join("dfs");
    let mut day_files: Vec<(usize, PathBuf)> = Vec::new();
    if dfs_dir.is_dir() {
        for entry in std::fs::read_dir(&dfs_dir)? {
            let path = entry?.path();
            let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
            if let Some(day) = name
                .strip_prefix("dfs_day_")
                .and_then(|s| s.strip_suffix(".csv"))
                .and_then(|s| s.parse().ok())
            {
                day_files.push((day, path));
            }
        }
    }
    day_files.sort();
    if day_files.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no dfs_day_<d>.csv files under {}",
            dfs_dir.display()
        )));
    }

    let mut total = Vec::new();
    let mut ac = Vec::new();
    let mut ol = Vec::new();
    for (_, path) in &day_files {
        let table = CsvTable::read(path, DFS_DAY_HEADER)?;
        let mut cols: [Vec<f64>; 6] = Default::default();
        for (line, row) in &table.rows {
            table.expect_width(*line, row, 7)?;
            for (j, col) in cols.iter_mut().enumerate() {
                col.push(table.field(*line, row, j + 1, "value")?);
            }
        }
        let [ac_true, ac_hat, ol_true, ol_hat, y_total, total_hat] = cols;
        total.push(rmse(&total_hat, &y_total)?);
        ac.push(rmse(&ac_hat, &ac_true)?);
        ol.push(rmse(&ol_hat, &ol_true)?);
    }
    let mut rows = vec![
        ReportRow {
            metric: "dfs_total".into(),
            range: MetricRange::over(total).expect("nonempty"),
        },
        ReportRow {
            metric: "dfs_ac".into(),
            range: MetricRange::over(ac).expect("nonempty"),
        },
        ReportRow {
            metric: "dfs_ol".into(),
            range: MetricRange::over(ol).expect("nonempty"),
        },
    ];

    let kf_summary = out_dir.join("kf").join("kf_summary.csv");
    if kf_summary.is_file() {
        let table = CsvTable::read(&kf_summary, KF_SUMMARY_HEADER)?;
        // day -> (bkf, sum, count)
        let mut per_day: Vec<(usize, f64, f64, usize)> = Vec::new();
        for (line, row) in &table.rows {
            table.expect_width(*line, row, 4)?;
            let day: usize = table.field(*line, row, 0, "day")?;
            let rmse_kw: f64 = table.field(*line, row, 2, "rmse_kw")?;
            match per_day.iter_mut().find(|(d, ..)| *d == day) {
                Some((_, bkf, sum, count)) => {
                    *bkf = bkf.min(rmse_kw);
                    *sum += rmse_kw;
                    *count += 1;
                }
                None => per_day.push((day, rmse_kw, rmse_kw, 1)),
            }
        }
        if !per_day.is_empty() {
            let bkf = MetricRange::over(per_day.iter().map(|(_, b, ..)| *b)).expect("nonempty");
            let akf = MetricRange::over(per_day.iter().map(|(_, _, s, c)| s / *c as f64))
                .expect("nonempty");
            rows.push(ReportRow {
                metric: "bkf_ac".into(),
                range: bkf,
            });
            rows.push(ReportRow {
                metric: "akf_ac".into(),
                range: akf,
            });
        }
    }
    Ok(rows)
}

/// Writes `report.csv` and returns a printable table.
pub fn write_report(out_dir: &Path, rows: &[ReportRow]) -> Result<String> {
    let path = out_dir.join("report.csv");
    let mut w = create(&path)?;
    writeln!(w, "{REPORT_HEADER}")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{}",
            row.metric, row.range.min, row.range.mean, row.range.max
        )?;
    }
    w.flush()?;

    let mut table = format!("{:<12} {:>12} {:>12} {:>12}\n", "metric", "min kW", "mean kW", "max kW");
    for row in rows {
        table.push_str(&format!(
            "{:<12} {:>12.1} {:>12.1} {:>12.1}\n",
            row.metric, row.range.min, row.range.mean, row.range.max
        ));
    }
    Ok(table)
}
