//! CSV emission and strict parsing for every file the pipeline exchanges.
//!
//! Numeric output uses the shortest round-trip decimal representation (the
//! standard float formatter), lines end with LF, and readers reject
//! malformed content naming the file, line and field.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::dfs::DayResult;
use crate::error::{Error, Result};
use crate::kalman::KfBankDay;
use crate::plant::{DeviceTrace, PlantDay};
use crate::series::{TimeSeries, Weekday};

pub const PLANT_DAY_HEADER: &str =
    "step,y_total_kw,y_ac_kw,y_ol_res_kw,y_ol_com_kw,temp_res_f,temp_com_f";
pub const DEVICE_TRACES_HEADER: &str = "step,device_id,on,power_kw";
pub const DFS_DAY_HEADER: &str =
    "step,y_ac_true_kw,y_ac_hat_kw,y_ol_true_kw,y_ol_hat_kw,y_total_kw,y_total_hat_kw";
pub const KF_DAY_HEADER: &str = "step,pair_id,y_ac_hat_kw";
pub const KF_SUMMARY_HEADER: &str = "day,pair_id,rmse_kw,is_bkf";

pub fn csv_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Csv {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Creates the file (and its parent directories) with a buffered writer.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_row<W: Write>(w: &mut W, fields: &[&dyn Display]) -> Result<()> {
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            w.write_all(b",")?;
        }
        write!(w, "{f}")?;
    }
    w.write_all(b"\n")?;
    Ok(())
}

/// A parsed CSV file: data rows with their 1-based line numbers. Lines
/// starting with `#` are treated as comments.
pub struct CsvTable {
    pub path: PathBuf,
    pub rows: Vec<(usize, Vec<String>)>,
}

impl CsvTable {
    /// Reads a file and checks its header line.
    pub fn read(path: &Path, expect_header: &str) -> Result<Self> {
        let file = File::open(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingModel(path.display().to_string())
            } else {
                Error::Io(e)
            }
        })?;
        let reader = BufReader::new(file);
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            if !header_seen {
                if line != expect_header {
                    return Err(csv_error(
                        path,
                        line_no,
                        format!("bad header: expected `{expect_header}`, got `{line}`"),
                    ));
                }
                header_seen = true;
                continue;
            }
            rows.push((line_no, line.split(',').map(str::to_owned).collect()));
        }
        if !header_seen {
            return Err(csv_error(path, 1, "missing header"));
        }
        Ok(Self {
            path: path.to_path_buf(),
            rows,
        })
    }

    pub fn field<T: std::str::FromStr>(&self, line: usize, row: &[String], idx: usize, name: &str) -> Result<T> {
        let raw = row
            .get(idx)
            .ok_or_else(|| csv_error(&self.path, line, format!("missing field `{name}`")))?;
        raw.parse().map_err(|_| {
            csv_error(
                &self.path,
                line,
                format!("cannot parse field `{name}` from `{raw}`"),
            )
        })
    }

    pub fn expect_width(&self, line: usize, row: &[String], width: usize) -> Result<()> {
        if row.len() != width {
            return Err(csv_error(
                &self.path,
                line,
                format!("expected {width} fields, got {}", row.len()),
            ));
        }
        Ok(())
    }
}

pub fn plant_day_path(dir: &Path, day: usize) -> PathBuf {
    dir.join(format!("plant_day_{day}.csv"))
}

pub fn device_traces_path(dir: &Path, day: usize) -> PathBuf {
    dir.join(format!("device_traces_{day}.csv"))
}

/// Writes `plant_day_<d>.csv`.
pub fn write_plant_day(dir: &Path, day: usize, plant: &PlantDay) -> Result<PathBuf> {
    let path = plant_day_path(dir, day);
    let mut w = create(&path)?;
    writeln!(w, "{PLANT_DAY_HEADER}")?;
    for t in 0..plant.y_total.len() {
        write_row(
            &mut w,
            &[
                &t,
                &plant.y_total.values[t],
                &plant.y_ac.values[t],
                &plant.y_ol_res.values[t],
                &plant.y_ol_com.values[t],
                &plant.temp_res.values[t],
                &plant.temp_com.values[t],
            ],
        )?;
    }
    w.flush()?;
    Ok(path)
}

/// Reads a `plant_day_<d>.csv`; the weekday comes from the day index.
pub fn read_plant_day(path: &Path, day: usize) -> Result<PlantDay> {
    let table = CsvTable::read(path, PLANT_DAY_HEADER)?;
    let n = table.rows.len();
    let mut cols: [Vec<f64>; 6] = Default::default();
    for c in cols.iter_mut() {
        c.reserve(n);
    }
    for (i, (line, row)) in table.rows.iter().enumerate() {
        table.expect_width(*line, row, 7)?;
        let step: usize = table.field(*line, row, 0, "step")?;
        if step != i {
            return Err(csv_error(&table.path, *line, format!("expected step {i}, got {step}")));
        }
        let names = [
            "y_total_kw",
            "y_ac_kw",
            "y_ol_res_kw",
            "y_ol_com_kw",
            "temp_res_f",
            "temp_com_f",
        ];
        for (j, name) in names.iter().enumerate() {
            cols[j].push(table.field(*line, row, j + 1, name)?);
        }
    }
    let [y_total, y_ac, y_ol_res, y_ol_com, temp_res, temp_com] = cols;
    Ok(PlantDay {
        y_total: TimeSeries::from_day(y_total),
        y_ac: TimeSeries::from_day(y_ac),
        y_ol_res: TimeSeries::from_day(y_ol_res),
        y_ol_com: TimeSeries::from_day(y_ol_com),
        temp_res: TimeSeries::from_day(temp_res),
        temp_com: TimeSeries::from_day(temp_com),
        day_of_week: Weekday::from_day_index(day),
    })
}

/// Writes `device_traces_<d>.csv`, step-major.
pub fn write_device_traces(dir: &Path, day: usize, traces: &[DeviceTrace]) -> Result<PathBuf> {
    let path = device_traces_path(dir, day);
    let mut w = create(&path)?;
    writeln!(w, "{DEVICE_TRACES_HEADER}")?;
    let n = traces.first().map(|t| t.on.len()).unwrap_or(0);
    for t in 0..n {
        for trace in traces {
            let on = trace.on[t] as u8;
            write_row(&mut w, &[&t, &trace.device_id, &on, &trace.power_kw[t]])?;
        }
    }
    w.flush()?;
    Ok(path)
}

/// Writes `dfs_day_<d>.csv` pairing the estimates with the truth.
pub fn write_dfs_day(dir: &Path, day: usize, plant: &PlantDay, result: &DayResult) -> Result<PathBuf> {
    let path = dir.join(format!("dfs_day_{day}.csv"));
    let mut w = create(&path)?;
    writeln!(w, "{DFS_DAY_HEADER}")?;
    for t in 0..result.y_ac_hat.len() {
        let ol_true = plant.y_ol_res.values[t] + plant.y_ol_com.values[t];
        write_row(
            &mut w,
            &[
                &t,
                &plant.y_ac.values[t],
                &result.y_ac_hat[t],
                &ol_true,
                &result.y_ol_hat[t],
                &plant.y_total.values[t],
                &result.y_total_hat[t],
            ],
        )?;
    }
    w.flush()?;
    Ok(path)
}

/// Writes `weights_day_<d>.csv` with one column per model pair.
pub fn write_weights_day(dir: &Path, day: usize, result: &DayResult) -> Result<PathBuf> {
    let path = dir.join(format!("weights_day_{day}.csv"));
    let mut w = create(&path)?;
    write!(w, "step")?;
    for pair in &result.pair_ids {
        write!(w, ",{pair}")?;
    }
    writeln!(w)?;
    for (t, weights) in result.weights.iter().enumerate() {
        write!(w, "{t}")?;
        for v in weights {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(path)
}

/// Writes `kf_day_<d>.csv` with per-step estimates of every filter.
pub fn write_kf_day(dir: &Path, day: usize, bank: &KfBankDay) -> Result<PathBuf> {
    let path = dir.join(format!("kf_day_{day}.csv"));
    let mut w = create(&path)?;
    writeln!(w, "{KF_DAY_HEADER}")?;
    let n = bank.runs.first().map(|r| r.y_ac_hat.len()).unwrap_or(0);
    for t in 0..n {
        for run in &bank.runs {
            let id = run.pair.to_string();
            write_row(&mut w, &[&t, &id, &run.y_ac_hat[t]])?;
        }
    }
    w.flush()?;
    Ok(path)
}

/// Writes `kf_summary.csv` across all days.
pub fn write_kf_summary(dir: &Path, days: &[(usize, KfBankDay)]) -> Result<PathBuf> {
    let path = dir.join("kf_summary.csv");
    let mut w = create(&path)?;
    writeln!(w, "{KF_SUMMARY_HEADER}")?;
    for (day, bank) in days {
        for run in &bank.runs {
            let is_bkf = (run.rmse_kw == bank.bkf_rmse_kw) as u8;
            let id = run.pair.to_string();
            write_row(&mut w, &[day, &id, &run.rmse_kw, &is_bkf])?;
        }
    }
    w.flush()?;
    Ok(path)
}
