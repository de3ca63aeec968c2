//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 a failed `verify` property.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::harness::{
    drift, order_sweep, run_trajectory, write_drift, write_order, write_order_components,
    write_trajectory, ExperimentConfig, Output, Quantity, SweepMeasure,
};
use crate::oracle::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "forced-ep", version, about = "Variational integrators for forced rigid bodies")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Integrate one trajectory and write trajectory.csv.
    Simulate(RunArgs),
    /// Convergence sweep against a reference run; writes order_<method>.csv.
    Sweep(RunArgs),
    /// Integrate and write drift_<quantity>.csv for energy and Casimir.
    Drift(RunArgs),
    /// Run the finite-difference oracle suite.
    Verify,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment file; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value`, applied after the file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, env = "FORCED_EP_OUT", default_value = ".")]
    out_dir: PathBuf,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        for o in &self.overrides {
            s.apply_override(o)?;
        }
        Ok(s)
    }

    fn out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out_dir).map_err(|source| Error::Io {
            path: self.out_dir.clone(),
            source,
        })?;
        Ok(&self.out_dir)
    }
}

/// Parses `argv` (program name first) and runs the verb.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match &cli.verb {
        Verb::Simulate(args) => simulate(args),
        Verb::Sweep(args) => sweep(args),
        Verb::Drift(args) => drift_files(args),
        Verb::Verify => return verify(),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_CONFIG
            }
        }
    }
}

fn write_drifts(cfg: &ExperimentConfig, records: &[crate::rkmk::StepRecord], dir: &Path) -> Result<()> {
    let mut quantities = Vec::new();
    if cfg.outputs.contains(&Output::Energy) {
        quantities.push(Quantity::Energy);
    }
    if cfg.outputs.contains(&Output::Casimir) {
        let count = records.first().map_or(0, |r| r.casimirs.len());
        quantities.extend((0..count).map(Quantity::Casimir));
    }
    for q in quantities {
        let series = drift(records, q);
        let path = dir.join(format!("drift_{}.csv", q.label()));
        write_drift(&path, &series)?;
        println!("{}: final drift {:.3e}, max |drift| {:.3e}", path.display(), series.last(), series.max_abs());
    }
    Ok(())
}

fn simulate(args: &RunArgs) -> Result<()> {
    let cfg = args.settings()?.experiment()?;
    let records = run_trajectory(&cfg)?;
    let dir = args.out_dir()?;
    let path = dir.join("trajectory.csv");
    write_trajectory(&path, &records)?;
    let max_iters = records.iter().map(|r| r.newton_iters).max().unwrap_or(0);
    println!("{}: {} records, max Newton iterations {max_iters}", path.display(), records.len());
    write_drifts(&cfg, &records, dir)
}

fn drift_files(args: &RunArgs) -> Result<()> {
    let mut cfg = args.settings()?.experiment()?;
    if !cfg.outputs.iter().any(|o| matches!(o, Output::Energy | Output::Casimir)) {
        cfg.outputs = vec![Output::Energy, Output::Casimir];
    }
    let records = run_trajectory(&cfg)?;
    write_drifts(&cfg, &records, args.out_dir()?)
}

fn sweep(args: &RunArgs) -> Result<()> {
    let settings = args.settings()?;
    let cfg = settings.experiment()?;
    let measure = settings.sweep_measure()?;
    let table = order_sweep(&cfg, measure)?;
    let dir = args.out_dir()?;
    let stem = match measure {
        SweepMeasure::Momentum => format!("order_{}", table.method),
        SweepMeasure::Energy => format!("order_{}_energy", table.method),
    };
    let path = dir.join(format!("{stem}.csv"));
    write_order(&path, &table)?;
    write_order_components(&dir.join(format!("{stem}_components.csv")), &table)?;
    for row in &table.rows {
        match row.error {
            Some(e) => println!("h = {:<10} error = {e:.3e}", row.h),
            None => println!("h = {:<10} failed", row.h),
        }
    }
    match table.fitted_slope {
        Some(p) => println!("{}: fitted slope {p:.3}", path.display()),
        None => println!("{}: too few points above the roundoff floor to fit a slope", path.display()),
    }
    Ok(())
}

fn verify() -> i32 {
    let checks = run_suite();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if checks.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}
