use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use agemeasure::confidence::{self, Grid, Mode};
use agemeasure::estimators::estimate;
use agemeasure::harness::{
    builtin_configs, format_tables, resolve_seed, run_experiment, simulate_replicate, write_all, ExperimentConfig,
    RunOptions, SEED_ENV,
};
use agemeasure::sim::fmt17;
use agemeasure::EventLog;

#[derive(Parser)]
#[command(
    version,
    about = "Simulate age-structured birth-death paths and estimate their rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config and AGEMEASURE_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replicate runs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Confidence mode: direct or plugin.
    #[arg(long, global = true)]
    mode: Option<Mode>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate replicate paths and write them as event logs.
    Simulate {
        /// Replicates per K to write.
        #[arg(long, default_value_t = 1)]
        replicates: usize,
    },
    /// Estimate the config's model parameters from event logs.
    Estimate { logs: Vec<PathBuf> },
    /// Confidence intervals (constant and population-linear families).
    Ci {
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        logs: Vec<PathBuf>,
    },
    /// 2-D confidence regions (two-cell families), one CSV per parameter pair.
    Region {
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        log: PathBuf,
    },
    /// Run a full Monte Carlo experiment and write every CSV.
    Experiment,
    /// Reproduce the summary tables of the checked-in experiments.
    Tables,
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let path = common
        .config
        .as_ref()
        .context("--config is required for this command")?;
    Ok(ExperimentConfig::load(path)?)
}

fn run_options(common: &Common) -> RunOptions {
    RunOptions {
        jobs: common.jobs,
        seed: common.seed,
        modes: common.mode.map(|m| vec![m]),
    }
}

fn read_logs(paths: &[PathBuf]) -> Result<Vec<(&Path, EventLog)>> {
    if paths.is_empty() {
        bail!("no event logs given");
    }
    paths
        .iter()
        .map(|p| {
            Ok((
                p.as_path(),
                EventLog::read_from(p).with_context(|| p.display().to_string())?,
            ))
        })
        .collect()
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let common = &cli.common;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Command::Simulate { replicates } => {
            let config = load_config(common)?;
            let env = std::env::var(SEED_ENV).ok();
            let base = resolve_seed(common.seed, config.base_seed, env.as_deref())?;
            let dir = common.out.join(&config.name).join("logs");
            std::fs::create_dir_all(&dir)?;
            for &k in &config.k_values {
                for r in 0..*replicates {
                    let log = simulate_replicate(&config, base, k, r)?;
                    let path = dir.join(format!("K{k}_r{r}.log"));
                    log.write_to(&path)?;
                    writeln!(out, "{}", path.display())?;
                }
            }
        }
        Command::Estimate { logs } => {
            let config = load_config(common)?;
            let names = config.parameter_names();
            writeln!(out, "log,{},death_condition,birth_condition", names.join(","))?;
            for (path, log) in read_logs(logs)? {
                let r = estimate(&log, &config.model)?;
                let values: Vec<String> = r.estimates.iter().map(|&x| fmt17(x)).collect();
                writeln!(
                    out,
                    "{},{},{},{}",
                    path.display(),
                    values.join(","),
                    fmt17(r.death_condition),
                    fmt17(r.birth_condition)
                )?;
            }
        }
        Command::Ci { alpha, logs } => {
            let config = load_config(common)?;
            let modes = common.mode.map_or(Mode::ALL.to_vec(), |m| vec![m]);
            writeln!(out, "log,parameter,mode,alpha,estimate,lower,upper")?;
            for (path, log) in read_logs(logs)? {
                for &mode in &modes {
                    for ci in confidence::ci(&log, &config.model, *alpha, mode)? {
                        writeln!(
                            out,
                            "{},{},{},{},{},{},{}",
                            path.display(),
                            ci.parameter,
                            ci.mode,
                            fmt17(ci.alpha),
                            fmt17(ci.estimate),
                            fmt17(ci.lower),
                            fmt17(ci.upper)
                        )?;
                    }
                }
            }
        }
        Command::Region { alpha, grid, log } => {
            let config = load_config(common)?;
            let parsed = EventLog::read_from(log).with_context(|| log.display().to_string())?;
            let modes = common.mode.map_or(Mode::ALL.to_vec(), |m| vec![m]);
            std::fs::create_dir_all(&common.out)?;
            let grid = Grid::with_resolution(*grid);
            for mode in modes {
                let (death, birth) = confidence::region(&parsed, &config.model, *alpha, mode, &grid)?;
                for r in [death, birth] {
                    let path = common
                        .out
                        .join(format!("region_{}_{}_{}.csv", mode, r.names[0], r.names[1]));
                    r.write_csv_file(&path)?;
                    writeln!(out, "{}", path.display())?;
                }
            }
        }
        Command::Experiment => {
            let config = load_config(common)?;
            let result = run_experiment(&config, &run_options(common))?;
            write_all(&result, &common.out)?;
            writeln!(out, "{}", format_tables(&result))?;
        }
        Command::Tables => {
            let configs = match &common.config {
                Some(p) => vec![ExperimentConfig::load(p)?],
                None => builtin_configs()?,
            };
            for config in configs {
                let result = run_experiment(&config, &run_options(common))?;
                write_all(&result, &common.out)?;
                writeln!(out, "{}", format_tables(&result))?;
            }
        }
    }
    Ok(())
}
