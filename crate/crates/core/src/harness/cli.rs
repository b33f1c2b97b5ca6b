//! Command-line interface over the pipeline stages.
//!
//! Every stage works inside one output directory: `plant` writes ground
//! truth under `<out>/plant`, `fit` writes the model bundle under
//! `<out>/bundle`, `dfs` and `kf` write their runs under `<out>/dfs` and
//! `<out>/kf`, `sweep` under `<out>/sweep`, and `report` aggregates what it
//! finds. Stages that need a bundle fit one on the fly when none is saved.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::dfs::{ModelSet, UpdateMethod};
use crate::error::{Error, Result};
use crate::harness::bundle::ModelBundle;
use crate::harness::config::{parse_config, ScenarioConfig};
use crate::harness::pipeline::{estimate_noise, fit_bundle, load_test_days};
use crate::harness::report::{build_report, write_report};
use crate::harness::scenario::{run_kf_benchmark, run_scenario_on, write_scenario_outputs};
use crate::harness::sweep::{sweep_eta, sweep_lambda, write_eta_sweep, write_lambda_sweep};
use crate::harness::csv_io;
use crate::plant::PlantGenerator;

#[derive(Debug, Parser)]
#[command(
    name = "feeder-disagg",
    about = "Disaggregate a feeder's total demand into AC and other-load components"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate ground-truth days and device traces.
    Plant(RunArgs),
    /// Identify the model bundle from the history before the test days.
    Fit(RunArgs),
    /// Run the online estimation scenario over the test days.
    Dfs(RunArgs),
    /// Run the Kalman-filter benchmark bank over the test days.
    Kf(RunArgs),
    /// Run the step-size and sharing-mass sweeps.
    Sweep(RunArgs),
    /// Aggregate emitted CSVs into a metrics table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario config file (`key = value` lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the test days, e.g. `95,96,97`.
    #[arg(long)]
    days: Option<String>,
    /// Override the model set.
    #[arg(long, value_parser = ["full", "red", "kf"])]
    set: Option<String>,
    /// Override the update method.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    method: Option<u8>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Output directory holding earlier stage results.
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn scenario(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => parse_config(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(days) = &self.days {
            cfg.days = days
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|_| Error::InvalidInput(format!("bad day `{s}` in --days")))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(set) = &self.set {
            cfg.model_set = ModelSet::parse(set).expect("validated by clap");
        }
        if let Some(method) = self.method {
            cfg.update_method = UpdateMethod::parse(&method.to_string()).expect("1 or 2");
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_or_fit_bundle(cfg: &ScenarioConfig, gen: &PlantGenerator, out: &PathBuf) -> Result<ModelBundle> {
    let bundle_dir = out.join("bundle");
    if bundle_dir.join("ltv.csv").is_file() {
        println!("loading model bundle from {}", bundle_dir.display());
        ModelBundle::load(&bundle_dir)
    } else {
        println!("no saved bundle found; fitting one (this can take a while)");
        let bundle = fit_bundle(cfg, gen)?;
        bundle.save(&bundle_dir)?;
        Ok(bundle)
    }
}

/// Runs one parsed invocation. Returns only after all files are flushed.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plant(args) => {
            let cfg = args.scenario()?;
            let gen = PlantGenerator::calibrated(cfg.population())?;
            let scale = gen.scale();
            println!(
                "calibration: res_ol_scale={:.6} com_scale={:.6} ac_power_scale={:.6}",
                scale.res_ol_scale, scale.com_scale, scale.ac_power_scale
            );
            let dir = args.out.join("plant");
            for &day in &cfg.days {
                let (plant, traces) = gen.day_with_traces(day)?;
                csv_io::write_plant_day(&dir, day, &plant)?;
                csv_io::write_device_traces(&dir, day, &traces)?;
                println!(
                    "day {day} ({}): mean total {:.1} kW, mean AC {:.1} kW",
                    plant.day_of_week,
                    plant.y_total.mean(),
                    plant.y_ac.mean()
                );
            }
            println!("wrote {} day(s) to {}", cfg.days.len(), dir.display());
            Ok(())
        }
        Command::Fit(args) => {
            let cfg = args.scenario()?;
            let gen = PlantGenerator::calibrated(cfg.population())?;
            let bundle = fit_bundle(&cfg, &gen)?;
            let dir = args.out.join("bundle");
            bundle.save(&dir)?;
            println!(
                "identified bundle: tau_l={} steps, tau_w={} steps, {} bin models",
                bundle.tau_l,
                bundle.tau_w,
                bundle.lti.models.len()
            );
            println!("wrote bundle to {}", dir.display());
            Ok(())
        }
        Command::Dfs(args) => {
            let cfg = args.scenario()?;
            let gen = PlantGenerator::calibrated(cfg.population())?;
            let bundle = load_or_fit_bundle(&cfg, &gen, &args.out)?;
            let days = load_test_days(&gen, &cfg.days)?;
            let outcome = run_scenario_on(&cfg.dfs(), &bundle, &days)?;
            write_scenario_outputs(&args.out.join("dfs"), &outcome, &days)?;
            println!(
                "scenario set={} method={} eta_s={} eta_r={} lambda={}",
                cfg.model_set,
                cfg.update_method,
                cfg.eta_s(),
                cfg.eta_r,
                cfg.lambda
            );
            for m in &outcome.metrics.per_day {
                println!(
                    "day {}: rmse total {:.1} kW, AC {:.1} kW, OL {:.1} kW",
                    m.day, m.rmse_total_kw, m.rmse_ac_kw, m.rmse_ol_kw
                );
            }
            let ac = outcome.metrics.ac;
            println!("AC rmse min/mean/max: {:.1}/{:.1}/{:.1} kW", ac.min, ac.mean, ac.max);
            println!("top pairs by final weight:");
            for (pair, w) in outcome.top_final_weights(3) {
                println!("  {pair}: {w:.4}");
            }
            Ok(())
        }
        Command::Kf(args) => {
            let cfg = args.scenario()?;
            let gen = PlantGenerator::calibrated(cfg.population())?;
            let bundle = load_or_fit_bundle(&cfg, &gen, &args.out)?;
            let noise = estimate_noise(&cfg, &gen, &bundle)?;
            let days = load_test_days(&gen, &cfg.days)?;
            let outcome = run_kf_benchmark(&bundle, &noise, &days)?;
            let dir = args.out.join("kf");
            for (day, bank) in &outcome.days {
                csv_io::write_kf_day(&dir, *day, bank)?;
            }
            csv_io::write_kf_summary(&dir, &outcome.days)?;
            for (day, bank) in &outcome.days {
                println!(
                    "day {day}: BKF {:.1} kW, AKF {:.1} kW",
                    bank.bkf_rmse_kw, bank.akf_rmse_kw
                );
            }
            println!(
                "BKF mean {:.1} kW, AKF mean {:.1} kW over {} day(s)",
                outcome.bkf.mean,
                outcome.akf.mean,
                outcome.days.len()
            );
            Ok(())
        }
        Command::Sweep(args) => {
            let cfg = args.scenario()?;
            let gen = PlantGenerator::calibrated(cfg.population())?;
            let bundle = load_or_fit_bundle(&cfg, &gen, &args.out)?;
            let days = load_test_days(&gen, &cfg.days)?;
            let dir = args.out.join("sweep");
            let eta = sweep_eta(&cfg, &bundle, &days)?;
            write_eta_sweep(&dir, &eta)?;
            let lambda = sweep_lambda(&cfg, &bundle, &days)?;
            write_lambda_sweep(&dir, &lambda)?;
            let best_eta = eta
                .iter()
                .min_by(|a, b| a.mean_ac_rmse_kw.total_cmp(&b.mean_ac_rmse_kw))
                .expect("nonempty grid");
            println!(
                "eta grid: {} cells; best mean AC rmse {:.1} kW at eta_s={} eta_r={}",
                eta.len(),
                best_eta.mean_ac_rmse_kw,
                best_eta.eta_s,
                best_eta.eta_r
            );
            let best_lambda = lambda
                .iter()
                .min_by(|a, b| a.mean_ac_rmse_kw.total_cmp(&b.mean_ac_rmse_kw))
                .expect("nonempty grid");
            println!(
                "lambda curve: {} points; best mean AC rmse {:.1} kW at lambda={}",
                lambda.len(),
                best_lambda.mean_ac_rmse_kw,
                best_lambda.lambda
            );
            println!("wrote sweeps to {}", dir.display());
            Ok(())
        }
        Command::Report(args) => {
            let rows = build_report(&args.out)?;
            let table = write_report(&args.out, &rows)?;
            print!("{table}");
            println!("wrote {}", args.out.join("report.csv").display());
            Ok(())
        }
    }
}

/// Parses and runs arguments (first element is the binary name); the entry
/// point used by both `main` and the end-to-end tests.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    run(cli)
}
