//! The identified model bundle: on-disk format and model-set construction.
//!
//! A bundle directory holds `tod_<weekday>.csv`, `mlr_ol_res.csv`,
//! `mlr_ol_com.csv`, `mlr_ac.csv`, `lti_bank.csv` and `ltv.csv`. Values
//! round-trip bit-exactly, so a reloaded bundle reproduces the same
//! estimates as a freshly fitted one.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use nalgebra::Matrix2;

use crate::dfs::ModelSet;
use crate::error::{Error, Result};
use crate::harness::csv_io::{create, csv_error, CsvTable};
use crate::models::{
    AcId, AcModel, FeatureKind, FeatureSpec, LtiBank, LtiModel, LtvMode, LtvModel, MlrModel, OlId,
    OlPredictor, PairId, TodModel,
};
use crate::series::{Weekday, STEPS_PER_DAY};

pub const TOD_HEADER: &str = "minute,alpha_kw";
pub const MLR_HEADER: &str = "index,coefficient";
pub const LTI_BANK_HEADER: &str = "bin_temp_f,a00,a01,a10,a11,p_bar_kw,n_ac";
pub const LTV_HEADER: &str = "mode,tau_steps";

/// Every identified model of one training run.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    /// One lookup per weekday, Monday first.
    pub tod: Vec<TodModel>,
    pub ol_res: MlrModel,
    pub ol_com: MlrModel,
    pub ac_mlr: MlrModel,
    pub lti: LtiBank,
    /// Cross-correlation lag of the AC demand behind temperature, steps.
    pub tau_l: usize,
    /// Trailing-mean window maximizing the same correlation, steps.
    pub tau_w: usize,
}

impl ModelBundle {
    pub fn ltv1(&self) -> LtvModel {
        LtvModel::new(self.lti.clone(), LtvMode::Lagged(self.tau_l))
    }

    pub fn ltv2(&self) -> LtvModel {
        LtvModel::new(self.lti.clone(), LtvMode::MovingAvg(self.tau_w))
    }

    /// OL models in bank order: the five weekday lookups, then the
    /// regression.
    pub fn ol_models(&self) -> Vec<(OlId, OlPredictor)> {
        let mut out: Vec<(OlId, OlPredictor)> = self
            .tod
            .iter()
            .map(|m| (OlId::Tod(m.label), OlPredictor::Tod(m.clone())))
            .collect();
        out.push((
            OlId::Mlr,
            OlPredictor::Mlr {
                res: self.ol_res.clone(),
                com: self.ol_com.clone(),
            },
        ));
        out
    }

    /// AC models of one model set, in bank order: bin models by rising
    /// temperature (full set only), the regression, then the two
    /// temperature-tracking chains (the regression is dropped from the KF
    /// set, which must run inside a Kalman filter).
    pub fn ac_models(&self, set: ModelSet) -> Vec<(AcId, AcModel)> {
        let mut out = Vec::new();
        if set == ModelSet::Full {
            for model in &self.lti.models {
                out.push((
                    AcId::Lti(model.bin_temp.round() as i32),
                    AcModel::Lti(model.clone()),
                ));
            }
        }
        if set != ModelSet::Kf {
            out.push((AcId::Mlr, AcModel::Mlr(self.ac_mlr.clone())));
        }
        out.push((AcId::Ltv1, AcModel::Ltv(self.ltv1())));
        out.push((AcId::Ltv2, AcModel::Ltv(self.ltv2())));
        out
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for model in &self.tod {
            let mut w = create(&dir.join(format!("tod_{}.csv", model.label)))?;
            writeln!(w, "{TOD_HEADER}")?;
            for (minute, alpha) in model.alpha.iter().enumerate() {
                writeln!(w, "{minute},{alpha}")?;
            }
            w.flush()?;
        }
        for (name, model) in [
            ("ol_res", &self.ol_res),
            ("ol_com", &self.ol_com),
            ("ac", &self.ac_mlr),
        ] {
            let mut w = create(&dir.join(format!("mlr_{name}.csv")))?;
            writeln!(
                w,
                "# feature_spec={} tow_bin_minutes={} lag_steps={} ridge={}",
                model.spec.kind.name(),
                model.spec.tow_bin_minutes,
                model.spec.lag_steps,
                model.ridge_weight
            )?;
            writeln!(w, "{MLR_HEADER}")?;
            for (i, c) in model.coefficients.iter().enumerate() {
                writeln!(w, "{i},{c}")?;
            }
            w.flush()?;
        }
        let mut w = create(&dir.join("lti_bank.csv"))?;
        writeln!(w, "{LTI_BANK_HEADER}")?;
        for m in &self.lti.models {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                m.bin_temp,
                m.a[(0, 0)],
                m.a[(0, 1)],
                m.a[(1, 0)],
                m.a[(1, 1)],
                m.p_bar,
                m.n_ac
            )?;
        }
        w.flush()?;
        let mut w = create(&dir.join("ltv.csv"))?;
        writeln!(w, "{LTV_HEADER}")?;
        writeln!(w, "lagged,{}", self.tau_l)?;
        writeln!(w, "moving_avg,{}", self.tau_w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let mut tod = Vec::with_capacity(5);
        for weekday in Weekday::ALL {
            let path = dir.join(format!("tod_{weekday}.csv"));
            let table = CsvTable::read(&path, TOD_HEADER)?;
            if table.rows.len() != STEPS_PER_DAY {
                return Err(csv_error(
                    &path,
                    1,
                    format!("expected {STEPS_PER_DAY} rows, got {}", table.rows.len()),
                ));
            }
            let mut alpha = Vec::with_capacity(STEPS_PER_DAY);
            for (i, (line, row)) in table.rows.iter().enumerate() {
                table.expect_width(*line, row, 2)?;
                let minute: usize = table.field(*line, row, 0, "minute")?;
                if minute != i {
                    return Err(csv_error(&path, *line, format!("expected minute {i}")));
                }
                alpha.push(table.field(*line, row, 1, "alpha_kw")?);
            }
            tod.push(TodModel {
                alpha,
                label: weekday,
            });
        }

        let ol_res = load_mlr(&dir.join("mlr_ol_res.csv"), FeatureKind::OlRes)?;
        let ol_com = load_mlr(&dir.join("mlr_ol_com.csv"), FeatureKind::OlCom)?;
        let ac_mlr = load_mlr(&dir.join("mlr_ac.csv"), FeatureKind::Ac)?;

        let path = dir.join("lti_bank.csv");
        let table = CsvTable::read(&path, LTI_BANK_HEADER)?;
        if table.rows.is_empty() {
            return Err(csv_error(&path, 1, "empty bank"));
        }
        let mut models = Vec::with_capacity(table.rows.len());
        for (line, row) in &table.rows {
            table.expect_width(*line, row, 7)?;
            let bin_temp: f64 = table.field(*line, row, 0, "bin_temp_f")?;
            let a00: f64 = table.field(*line, row, 1, "a00")?;
            let a01: f64 = table.field(*line, row, 2, "a01")?;
            let a10: f64 = table.field(*line, row, 3, "a10")?;
            let a11: f64 = table.field(*line, row, 4, "a11")?;
            let p_bar: f64 = table.field(*line, row, 5, "p_bar_kw")?;
            let n_ac: usize = table.field(*line, row, 6, "n_ac")?;
            models.push(LtiModel {
                a: Matrix2::new(a00, a01, a10, a11),
                bin_temp,
                p_bar,
                n_ac,
            });
        }
        let t_min = models.first().unwrap().bin_temp;
        let t_max = models.last().unwrap().bin_temp;
        let delta_t = if models.len() > 1 {
            models[1].bin_temp - models[0].bin_temp
        } else {
            1.0
        };
        let lti = LtiBank {
            models,
            t_min,
            t_max,
            delta_t,
        };
        lti.validate()?;

        let path = dir.join("ltv.csv");
        let table = CsvTable::read(&path, LTV_HEADER)?;
        let mut tau_l = None;
        let mut tau_w = None;
        for (line, row) in &table.rows {
            table.expect_width(*line, row, 2)?;
            let tau: usize = table.field(*line, row, 1, "tau_steps")?;
            match row[0].as_str() {
                "lagged" => tau_l = Some(tau),
                "moving_avg" => tau_w = Some(tau),
                other => {
                    return Err(csv_error(&path, *line, format!("unknown mode `{other}`")));
                }
            }
        }
        let (Some(tau_l), Some(tau_w)) = (tau_l, tau_w) else {
            return Err(csv_error(&path, 1, "need both `lagged` and `moving_avg` rows"));
        };

        Ok(Self {
            tod,
            ol_res,
            ol_com,
            ac_mlr,
            lti,
            tau_l,
            tau_w,
        })
    }
}

fn load_mlr(path: &PathBuf, expect_kind: FeatureKind) -> Result<MlrModel> {
    // The first line is a comment row carrying the feature-spec parameters.
    let file = std::fs::File::open(path)
        .map_err(|_| Error::MissingModel(path.display().to_string()))?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first)?;
    let first = first.trim();
    let Some(params) = first.strip_prefix("# ") else {
        return Err(csv_error(path, 1, "expected a `# key=value ...` comment row"));
    };
    let mut kind = None;
    let mut bin = None;
    let mut lag = None;
    let mut ridge = None;
    for token in params.split_whitespace() {
        let Some((k, v)) = token.split_once('=') else {
            return Err(csv_error(path, 1, format!("bad spec token `{token}`")));
        };
        match k {
            "feature_spec" => kind = FeatureKind::parse(v),
            "tow_bin_minutes" => bin = v.parse().ok(),
            "lag_steps" => lag = v.parse().ok(),
            "ridge" => ridge = v.parse().ok(),
            other => return Err(csv_error(path, 1, format!("unknown spec key `{other}`"))),
        }
    }
    let (Some(kind), Some(bin), Some(lag), Some(ridge)) = (kind, bin, lag, ridge) else {
        return Err(csv_error(path, 1, "incomplete feature-spec comment row"));
    };
    if kind != expect_kind {
        return Err(csv_error(
            path,
            1,
            format!("expected feature_spec={}, got {}", expect_kind.name(), kind.name()),
        ));
    }
    let spec = FeatureSpec::new(kind, bin, lag)?;

    let table = CsvTable::read(path, MLR_HEADER)?;
    if table.rows.len() != spec.dim() {
        return Err(csv_error(
            path,
            1,
            format!("expected {} coefficients, got {}", spec.dim(), table.rows.len()),
        ));
    }
    let mut coefficients = Vec::with_capacity(spec.dim());
    for (i, (line, row)) in table.rows.iter().enumerate() {
        table.expect_width(*line, row, 2)?;
        let idx: usize = table.field(*line, row, 0, "index")?;
        if idx != i {
            return Err(csv_error(path, *line, format!("expected index {i}, got {idx}")));
        }
        coefficients.push(table.field(*line, row, 1, "coefficient")?);
    }
    Ok(MlrModel {
        coefficients,
        spec,
        ridge_weight: ridge,
    })
}

/// The (AC, OL) pairs of one model set, in deterministic bank order.
pub fn build_model_sets(
    bundle: &ModelBundle,
    set: ModelSet,
) -> Vec<(PairId, AcModel, OlPredictor)> {
    let mut pairs = Vec::new();
    for (ac_id, ac) in bundle.ac_models(set) {
        for (ol_id, ol) in bundle.ol_models() {
            pairs.push((
                PairId {
                    ac: ac_id,
                    ol: ol_id,
                },
                ac.clone(),
                ol,
            ));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_bundle() -> ModelBundle {
        let tod = Weekday::ALL
            .iter()
            .map(|&w| TodModel {
                alpha: (0..STEPS_PER_DAY)
                    .map(|k| 100.0 + w.index() as f64 + (k as f64) / 7.0)
                    .collect(),
                label: w,
            })
            .collect();
        let mk_mlr = |kind, lag| {
            let spec = FeatureSpec::new(kind, 1440, lag).unwrap();
            MlrModel {
                coefficients: (0..spec.dim()).map(|i| (i as f64 + 1.0) * 0.123456789).collect(),
                spec,
                ridge_weight: 1e-6,
            }
        };
        let models = (74..=76)
            .map(|t| LtiModel {
                a: Matrix2::new(0.9, 0.25, 0.1, 0.75),
                bin_temp: t as f64,
                p_bar: 3.5,
                n_ac: 50,
            })
            .collect();
        ModelBundle {
            tod,
            ol_res: mk_mlr(FeatureKind::OlRes, 0),
            ol_com: mk_mlr(FeatureKind::OlCom, 0),
            ac_mlr: mk_mlr(FeatureKind::Ac, 7),
            lti: LtiBank {
                models,
                t_min: 74.0,
                t_max: 76.0,
                delta_t: 1.0,
            },
            tau_l: 119,
            tau_w: 270,
        }
    }

    #[test]
    fn save_load_round_trip() {
        let bundle = tiny_bundle();
        let dir = tempfile::tempdir().unwrap();
        bundle.save(dir.path()).unwrap();
        let back = ModelBundle::load(dir.path()).unwrap();
        assert_eq!(back.tau_l, 119);
        assert_eq!(back.tau_w, 270);
        for (a, b) in bundle.tod.iter().zip(&back.tod) {
            assert_eq!(a.alpha, b.alpha);
            assert_eq!(a.label, b.label);
        }
        assert_eq!(bundle.ol_res.coefficients, back.ol_res.coefficients);
        assert_eq!(bundle.ac_mlr.spec, back.ac_mlr.spec);
        assert_eq!(bundle.lti, back.lti);
    }

    #[test]
    fn model_set_sizes() {
        // With a 3-bin bank: full = (3 + 3) * 6, red = 3 * 6, kf = 2 * 6.
        let bundle = tiny_bundle();
        assert_eq!(build_model_sets(&bundle, ModelSet::Full).len(), 36);
        assert_eq!(build_model_sets(&bundle, ModelSet::Red).len(), 18);
        assert_eq!(build_model_sets(&bundle, ModelSet::Kf).len(), 12);
    }

    #[test]
    fn reduced_set_contains_no_bin_models_and_sets_nest() {
        let bundle = tiny_bundle();
        let red = build_model_sets(&bundle, ModelSet::Red);
        assert!(red.iter().all(|(id, _, _)| !matches!(id.ac, AcId::Lti(_))));
        let ids = |set| -> Vec<PairId> {
            build_model_sets(&bundle, set)
                .iter()
                .map(|(id, _, _)| *id)
                .collect()
        };
        let full = ids(ModelSet::Full);
        let red = ids(ModelSet::Red);
        let kf = ids(ModelSet::Kf);
        assert!(kf.iter().all(|p| red.contains(p)));
        assert!(red.iter().all(|p| full.contains(p)));
    }

    #[test]
    fn missing_model_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        match ModelBundle::load(dir.path()) {
            Err(Error::MissingModel(_)) => {}
            other => panic!("expected MissingModel, got {other:?}"),
        }
    }
}
