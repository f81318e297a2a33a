use std::io;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ssdf_core::harness::{
    emit_csv, prepare_table, run_point, run_scenario, write_csv, OperatingMode, ScenarioConfig, SweepPoint,
};
use ssdf_core::outlier::CriticalValueTable;

const DEFAULT_TABLE: &str = "ssdf-critical-values.txt";

#[derive(Parser)]
#[command(
    name = "ssdf",
    version,
    about = "Cooperative spectrum sensing under falsified reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one operating point of a scenario.
    Run {
        #[command(flatten)]
        common: Common,
        /// SNR in dB; defaults to the first `snr_db` of the config.
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<f64>,
        /// Fixed detector threshold; defaults to the `target_qd` operating point.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Build or refresh the critical-value cache for a scenario.
    Table {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate every point of a sweep.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Override the swept variable with an evenly spaced range.
        #[arg(long, value_enum, requires_all = ["from", "to", "points"])]
        var: Option<SweepVar>,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepVar {
    Snr,
    Threshold,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML key = value).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// CSV output for run/sweep, cache path for table. Stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Critical-value cache.
    #[arg(long, default_value = DEFAULT_TABLE)]
    table: PathBuf,
    /// Fail instead of building missing critical values.
    #[arg(long)]
    no_build: bool,
}

impl Common {
    fn config(&self) -> Result<ScenarioConfig> {
        let mut config = match &self.config {
            Some(path) => ScenarioConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        config.validate()?;
        Ok(config)
    }

    fn workers(&self) -> usize {
        if self.threads == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            self.threads
        }
    }

    fn table_for(&self, config: &ScenarioConfig, cache: &Path) -> Result<CriticalValueTable> {
        let mut table = if cache.exists() {
            CriticalValueTable::load(cache)?
        } else {
            CriticalValueTable::new()
        };
        if self.no_build {
            if let Some(spec) = config.table_specs().iter().find(|s| !table.covers(s)) {
                bail!(
                    "{} lacks critical values for n = {}..={}",
                    cache.display(),
                    spec.n_min,
                    spec.n_max
                );
            }
            return Ok(table);
        }
        if prepare_table(config, &mut table)? {
            eprintln!("critical values rebuilt, saving {}", cache.display());
            table.save(cache)?;
        }
        Ok(table)
    }

    fn emit(&self, points: &[SweepPoint], seed: u64) -> Result<()> {
        match &self.out {
            Some(path) => emit_csv(points, seed, path).with_context(|| format!("writing {}", path.display()))?,
            None => write_csv(points, seed, io::stdout().lock())?,
        }
        Ok(())
    }
}

fn linspace(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    match points {
        0 => bail!("--points must be positive"),
        1 => Ok(vec![from]),
        _ => Ok((0..points)
            .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
            .collect()),
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            common,
            snr_db,
            threshold,
        } => {
            let config = common.config()?;
            let table = common.table_for(&config, &common.table)?;
            let snr = snr_db.unwrap_or(config.snr_db[0]);
            let metrics = run_point(&config, snr, threshold, &table, common.workers())?;
            let value = threshold.unwrap_or(snr);
            common.emit(&[SweepPoint { value, metrics }], config.seed)
        }
        Command::Table { common } => {
            let config = common.config()?;
            let path = common.out.clone().unwrap_or_else(|| common.table.clone());
            let table = common.table_for(&config, &path)?;
            if !path.exists() {
                table.save(&path)?;
            }
            eprintln!("{}: {} entries", path.display(), table.len());
            Ok(())
        }
        Command::Sweep {
            common,
            var,
            from,
            to,
            points,
        } => {
            let mut config = common.config()?;
            if let (Some(var), Some(from), Some(to), Some(points)) = (var, from, to, points) {
                let values = linspace(from, to, points)?;
                match var {
                    SweepVar::Snr => {
                        config.operating_point = OperatingMode::TargetQd;
                        config.snr_db = values;
                    }
                    SweepVar::Threshold => {
                        config.operating_point = OperatingMode::ThresholdSweep;
                        config.thresholds = values;
                    }
                }
                config.validate()?;
            }
            let table = common.table_for(&config, &common.table)?;
            let points = run_scenario(&config, &table, common.workers())?;
            common.emit(&points, config.seed)
        }
    }
}
