//! Scenario configuration and the line-oriented config file format.
//!
//! Files are `key = value` lines with `#` comments. Unknown keys are
//! rejected by name; every key has a default, so an empty file (or no file)
//! is a valid scenario.

use std::path::Path;

use crate::dfs::{DfsConfig, ModelSet, UpdateMethod};
use crate::error::{Error, Result};
use crate::plant::PopulationSpec;

/// Step-size defaults per (model set, update method).
pub fn default_eta_s(set: ModelSet, method: UpdateMethod) -> f64 {
    match (set, method) {
        (ModelSet::Full, UpdateMethod::M1) => 0.013,
        (ModelSet::Full, UpdateMethod::M2) => 0.015,
        (ModelSet::Red, UpdateMethod::M1) => 0.4,
        (ModelSet::Red, UpdateMethod::M2) => 0.013,
        (ModelSet::Kf, UpdateMethod::M1) => 0.4,
        (ModelSet::Kf, UpdateMethod::M2) => 0.5,
    }
}

/// Everything a run needs: engine parameters, population, day list, feature
/// settings and sweep grids.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub eta_s: Option<f64>,
    pub eta_r: f64,
    pub lambda: f64,
    pub update_method: UpdateMethod,
    pub model_set: ModelSet,
    pub clamp_nonneg: bool,
    pub project_simplex: bool,
    pub seed: u64,
    /// Test days; model-fitting windows end just before the earliest one.
    pub days: Vec<usize>,
    pub n_houses: usize,
    pub n_ac: usize,
    pub res_mean_kw: f64,
    pub com_mean_kw: f64,
    pub tow_bin_minutes: usize,
    pub ridge: f64,
    pub sweep_eta_s: Vec<f64>,
    pub sweep_eta_r: Vec<f64>,
    pub sweep_lambda: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            eta_s: None,
            eta_r: 1e-5,
            lambda: 1e-5,
            update_method: UpdateMethod::M1,
            model_set: ModelSet::Red,
            clamp_nonneg: false,
            project_simplex: false,
            seed: 42,
            days: vec![95, 96, 97, 98, 99],
            n_houses: 2499,
            n_ac: 2269,
            res_mean_kw: 5800.0,
            com_mean_kw: 2100.0,
            tow_bin_minutes: 15,
            ridge: 1e-6,
            sweep_eta_s: (0..10).map(|i| i as f64 * 0.1).collect(),
            sweep_eta_r: vec![1e-7, 1e-6, 1e-5, 1e-4, 1e-3],
            sweep_lambda: vec![1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0],
        }
    }
}

impl ScenarioConfig {
    /// The measurement-update step size, falling back to the per-set default.
    pub fn eta_s(&self) -> f64 {
        self.eta_s
            .unwrap_or_else(|| default_eta_s(self.model_set, self.update_method))
    }

    pub fn dfs(&self) -> DfsConfig {
        DfsConfig {
            eta_s: self.eta_s(),
            eta_r: self.eta_r,
            lambda: self.lambda,
            update_method: self.update_method,
            model_set: self.model_set,
            clamp_nonneg: self.clamp_nonneg,
            project_simplex: self.project_simplex,
        }
    }

    pub fn population(&self) -> PopulationSpec {
        let mut spec = PopulationSpec::feeder_default(self.seed);
        spec.n_houses = self.n_houses;
        spec.n_ac = self.n_ac;
        spec.target_res_mean_kw = self.res_mean_kw;
        spec.target_com_mean_kw = self.com_mean_kw;
        spec
    }

    pub fn validate(&self) -> Result<()> {
        if self.days.is_empty() {
            return Err(Error::InvalidInput("day list is empty".into()));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "lambda must be in (0, 1], got {}",
                self.lambda
            )));
        }
        self.dfs().validate()?;
        self.population().validate()?;
        if self.ridge < 0.0 {
            return Err(Error::InvalidInput("ridge must be nonnegative".into()));
        }
        crate::models::FeatureSpec::new(crate::models::FeatureKind::OlRes, self.tow_bin_minutes, 0)?;
        Ok(())
    }
}

fn parse_list<T, F>(value: &str, line: usize, parse: F) -> Result<Vec<T>>
where
    F: Fn(&str) -> Option<T>,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            parse(item).ok_or_else(|| Error::ConfigParse {
                line,
                msg: format!("cannot parse list item `{item}`"),
            })
        })
        .collect()
}

fn parse_value<T: std::str::FromStr>(value: &str, line: usize, key: &str) -> Result<T> {
    value.parse().map_err(|_| Error::ConfigParse {
        line,
        msg: format!("cannot parse value `{value}` for key `{key}`"),
    })
}

/// Parses a config file, starting from the defaults.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

/// Parses config text; strict about unknown keys.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::ConfigParse {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "eta_s" => cfg.eta_s = Some(parse_value(value, line_no, key)?),
            "eta_r" => cfg.eta_r = parse_value(value, line_no, key)?,
            "lambda" => cfg.lambda = parse_value(value, line_no, key)?,
            "update_method" => {
                cfg.update_method = UpdateMethod::parse(value).ok_or(Error::ConfigParse {
                    line: line_no,
                    msg: format!("update_method must be 1 or 2, got `{value}`"),
                })?
            }
            "model_set" => {
                cfg.model_set = ModelSet::parse(value).ok_or(Error::ConfigParse {
                    line: line_no,
                    msg: format!("model_set must be full, red or kf, got `{value}`"),
                })?
            }
            "seed" => cfg.seed = parse_value(value, line_no, key)?,
            "days" => cfg.days = parse_list(value, line_no, |s| s.parse().ok())?,
            "n_houses" => cfg.n_houses = parse_value(value, line_no, key)?,
            "n_ac" => cfg.n_ac = parse_value(value, line_no, key)?,
            "res_mean_kw" => cfg.res_mean_kw = parse_value(value, line_no, key)?,
            "com_mean_kw" => cfg.com_mean_kw = parse_value(value, line_no, key)?,
            "tow_bin_minutes" => cfg.tow_bin_minutes = parse_value(value, line_no, key)?,
            "ridge" => cfg.ridge = parse_value(value, line_no, key)?,
            "clamp_nonneg" => cfg.clamp_nonneg = parse_value(value, line_no, key)?,
            "project_simplex" => cfg.project_simplex = parse_value(value, line_no, key)?,
            "sweep_eta_s" => cfg.sweep_eta_s = parse_list(value, line_no, |s| s.parse().ok())?,
            "sweep_eta_r" => cfg.sweep_eta_r = parse_list(value, line_no, |s| s.parse().ok())?,
            "sweep_lambda" => cfg.sweep_lambda = parse_list(value, line_no, |s| s.parse().ok())?,
            other => {
                return Err(Error::ConfigParse {
                    line: line_no,
                    msg: format!("unknown key `{other}`"),
                })
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
