//! Config-driven Monte Carlo experiments.
//!
//! Replicate `r` at carrying capacity `K` uses the seed
//! `base_seed ⊕ splitmix64((K << 32) | r)`. The finaliser is a bijection of
//! `u64`, so distinct `(K, r)` pairs never share a seed. Initial ages are
//! drawn from ChaCha stream 1 of that seed and the path from stream 0.
//! Replicates run in parallel but results are always collected and written
//! in replicate order, so outputs are byte-identical across runs and thread
//! counts.

mod config;
mod output;

pub use config::{ConfidenceConfig, ExperimentConfig, InitialAgeLaw};
pub use output::{
    emit_figure_data, format_tables, write_all, write_coverage, write_replicates, write_summary, FigureKind,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::confidence::{critical_value, intervals, CltSystem, ConfRegion2D, ConfidenceInterval, Grid, Mode};
use crate::error::{Error, Result};
use crate::estimators::{Design, Equations, EstimateReport};
use crate::sim::{simulate, EventLog};

/// Environment variable consulted for the base seed when neither the command
/// line nor the config supplies one.
pub const SEED_ENV: &str = "AGEMEASURE_SEED";

/// The checked-in experiment configs, by file name.
pub const BUILTIN_CONFIGS: [(&str, &str); 4] = [
    (
        "table1_2_constant.toml",
        include_str!("../../configs/table1_2_constant.toml"),
    ),
    (
        "table3_4_popdep.toml",
        include_str!("../../configs/table3_4_popdep.toml"),
    ),
    (
        "table5_6_agedep.toml",
        include_str!("../../configs/table5_6_agedep.toml"),
    ),
    (
        "table7_8_popage.toml",
        include_str!("../../configs/table7_8_popage.toml"),
    ),
];

pub fn builtin_configs() -> Result<Vec<ExperimentConfig>> {
    BUILTIN_CONFIGS
        .iter()
        .map(|(_, text)| ExperimentConfig::from_toml(text))
        .collect()
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn replicate_seed(base_seed: u64, k: u32, replicate: usize) -> u64 {
    base_seed ^ splitmix64(((k as u64) << 32) | replicate as u64)
}

/// `cli` > `config` > `env` > 0.
pub fn resolve_seed(cli: Option<u64>, config: Option<u64>, env: Option<&str>) -> Result<u64> {
    if let Some(s) = cli.or(config) {
        return Ok(s);
    }
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => s
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}={s:?} is not a u64"))),
        None => Ok(0),
    }
}

/// `K` initial ages drawn under `law` (an explicit list is returned as is).
pub fn sample_initial_ages(law: &InitialAgeLaw, k: u32, seed: u64) -> Vec<f64> {
    match law {
        InitialAgeLaw::Explicit { ages } => ages.clone(),
        InitialAgeLaw::Uniform { lo, hi } if lo == hi => vec![*lo; k as usize],
        InitialAgeLaw::Uniform { lo, hi } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            (0..k).map(|_| rng.random_range(*lo..*hi)).collect()
        }
    }
}

/// Simulates the path of one replicate.
pub fn simulate_replicate(config: &ExperimentConfig, base_seed: u64, k: u32, replicate: usize) -> Result<EventLog> {
    let seed = replicate_seed(base_seed, k, replicate);
    let ages = sample_initial_ages(&config.initial_ages, k, seed);
    simulate(&config.model, &ages, k, config.horizon, seed)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; the global pool when `None`.
    pub jobs: Option<usize>,
    /// Overrides the config's base seed.
    pub seed: Option<u64>,
    /// Overrides the config's confidence modes.
    pub modes: Option<Vec<Mode>>,
}

#[derive(Debug, Clone)]
pub struct ReplicateOutcome {
    pub k: u32,
    pub replicate: usize,
    pub seed: u64,
    pub estimate: std::result::Result<EstimateReport, String>,
    pub extinction_time: Option<f64>,
    pub events: usize,
    pub intervals: Vec<ConfidenceInterval>,
    pub regions: Vec<ConfRegion2D>,
    /// Messages from interval or region computations that failed.
    pub confidence_errors: Vec<String>,
}

impl ReplicateOutcome {
    pub fn ok(&self) -> Option<&EstimateReport> {
        self.estimate.as_ref().ok()
    }

    pub fn extinct(&self) -> bool {
        self.extinction_time.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    All,
    NonExtinct,
}

impl Subset {
    pub fn label(self) -> &'static str {
        match self {
            Subset::All => "all",
            Subset::NonExtinct => "non_extinct",
        }
    }
}

/// Summary of one parameter's estimates at one `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub subset: Subset,
    pub parameter: String,
    pub k: u32,
    pub truth: f64,
    /// Replicates with an estimate.
    pub n: usize,
    /// Replicates whose estimation failed.
    pub failed: usize,
    pub mean: Option<f64>,
    /// Divisor `n - 1`; undefined for `n < 2`.
    pub variance: Option<f64>,
    /// Divisor `n`.
    pub mse: Option<f64>,
    pub bias: Option<f64>,
}

impl SummaryStats {
    pub fn from_values(subset: Subset, parameter: &str, k: u32, truth: f64, values: &[f64], failed: usize) -> Self {
        let n = values.len();
        let (mean, variance, mse) = if n == 0 {
            (None, None, None)
        } else {
            let nf = n as f64;
            let mean = values.iter().sum::<f64>() / nf;
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            let mse = values.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / nf;
            (Some(mean), (n > 1).then(|| ss / (nf - 1.0)), Some(mse))
        };
        Self {
            subset,
            parameter: parameter.to_string(),
            k,
            truth,
            n,
            failed,
            mean,
            variance,
            mse,
            bias: mean.map(|m| m - truth),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    /// A parameter name, or `p1:p2` for a 2-D region.
    pub parameter: String,
    pub k: u32,
    pub mode: Mode,
    pub alpha: f64,
    pub covered: usize,
    pub n: usize,
}

impl CoverageRow {
    pub fn rate(&self) -> f64 {
        self.covered as f64 / self.n as f64
    }
}

#[derive(Debug, Clone)]
pub struct KBlock {
    pub k: u32,
    pub replicates: Vec<ReplicateOutcome>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub base_seed: u64,
    pub blocks: Vec<KBlock>,
    pub summaries: Vec<SummaryStats>,
    pub coverage: Vec<CoverageRow>,
}

impl ExperimentResult {
    pub fn block(&self, k: u32) -> Option<&KBlock> {
        self.blocks.iter().find(|b| b.k == k)
    }

    pub fn summary(&self, parameter: &str, k: u32) -> Option<&SummaryStats> {
        self.summary_of(parameter, k, Subset::All)
    }

    pub fn summary_of(&self, parameter: &str, k: u32, subset: Subset) -> Option<&SummaryStats> {
        self.summaries
            .iter()
            .find(|s| s.parameter == parameter && s.k == k && s.subset == subset)
    }

    /// Successful estimates of `parameter` at `K`, in replicate order.
    pub fn estimates(&self, parameter: &str, k: u32) -> Vec<f64> {
        let Some(i) = self.config.parameter_names().iter().position(|n| n == parameter) else {
            return Vec::new();
        };
        self.block(k)
            .map(|b| {
                b.replicates
                    .iter()
                    .filter_map(|r| r.ok().map(|e| e.estimates[i]))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn coverage_of(&self, parameter: &str, k: u32, mode: Mode, alpha: f64) -> Option<&CoverageRow> {
        self.coverage
            .iter()
            .find(|c| c.parameter == parameter && c.k == k && c.mode == mode && c.alpha == alpha)
    }
}

/// Runs every replicate at every `K` and summarises.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentResult> {
    config.validate()?;
    let env = std::env::var(SEED_ENV).ok();
    let base_seed = resolve_seed(options.seed, config.base_seed, env.as_deref())?;
    let design = Design::of(&config.model)?;

    let run = || {
        config
            .k_values
            .iter()
            .map(|&k| {
                let replicates = (0..config.replicates)
                    .into_par_iter()
                    .map(|r| run_replicate(config, &design, options, base_seed, k, r))
                    .collect();
                KBlock { k, replicates }
            })
            .collect::<Vec<_>>()
    };
    let blocks = match options.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let summaries = summarize(config, &blocks);
    let coverage = tally_coverage(config, &blocks);
    Ok(ExperimentResult {
        config: config.clone(),
        base_seed,
        blocks,
        summaries,
        coverage,
    })
}

fn run_replicate(
    config: &ExperimentConfig,
    design: &Design,
    options: &RunOptions,
    base_seed: u64,
    k: u32,
    replicate: usize,
) -> ReplicateOutcome {
    let seed = replicate_seed(base_seed, k, replicate);
    let mut out = ReplicateOutcome {
        k,
        replicate,
        seed,
        estimate: Err(String::new()),
        extinction_time: None,
        events: 0,
        intervals: Vec::new(),
        regions: Vec::new(),
        confidence_errors: Vec::new(),
    };
    let log = match simulate_replicate(config, base_seed, k, replicate) {
        Ok(log) => log,
        Err(e) => {
            out.estimate = Err(e.to_string());
            return out;
        }
    };
    out.extinction_time = log.extinction_time();
    out.events = log.events.len();

    let solved = Equations::assemble(&log, design).and_then(|eq| {
        let sol = eq.solve()?;
        Ok((eq, sol))
    });
    let (eq, sol) = match solved {
        Ok(x) => x,
        Err(e) => {
            out.estimate = Err(e.to_string());
            return out;
        }
    };
    let estimates: Vec<f64> = sol.death.iter().chain(&sol.birth).copied().collect();
    out.estimate = Ok(EstimateReport {
        family: design.family(),
        names: config.parameter_names(),
        negative: estimates.iter().any(|&x| x < 0.0),
        estimates,
        death_condition: eq.death.condition_estimate,
        birth_condition: sol.birth_system.condition_estimate,
        ill_conditioned_warning: eq.death.warns() || sol.birth_system.warns(),
        carrying_capacity: k,
        horizon: config.horizon,
        seed,
        extinction_time: out.extinction_time,
    });

    let Some(conf) = &config.confidence else { return out };
    let modes = options.modes.as_deref().unwrap_or(&conf.modes);
    if design.death.len() == 1 {
        for &alpha in &conf.alpha {
            let c = match critical_value(alpha) {
                Ok(c) => c,
                Err(e) => {
                    out.confidence_errors.push(e.to_string());
                    continue;
                }
            };
            for &mode in modes {
                match intervals(&eq, &sol, alpha, c, mode) {
                    Ok(v) => out.intervals.extend(v),
                    Err(e) => out.confidence_errors.push(format!("{mode} alpha={alpha}: {e}")),
                }
            }
        }
    } else if design.death.len() == 2 && replicate < conf.region_samples {
        let alpha = conf.alpha[0];
        let grid = Grid::with_resolution(conf.grid);
        let systems = CltSystem::death(&eq, &sol).and_then(|d| Ok((d, CltSystem::birth(&eq, &sol)?)));
        match (critical_value(alpha), systems) {
            (Ok(c), Ok((death, birth))) => {
                for &mode in modes {
                    for clt in [&death, &birth] {
                        match clt.region(c, 1.0 - alpha, mode, &grid) {
                            Ok(r) => out.regions.push(r),
                            Err(e) => out.confidence_errors.push(format!("{mode} region: {e}")),
                        }
                    }
                }
            }
            (Err(e), _) | (_, Err(e)) => out.confidence_errors.push(e.to_string()),
        }
    }
    out
}

fn summarize(config: &ExperimentConfig, blocks: &[KBlock]) -> Vec<SummaryStats> {
    let names = config.parameter_names();
    let truth = config.truth();
    let mut out = Vec::new();
    for block in blocks {
        let mut subsets = vec![Subset::All];
        if block.replicates.iter().any(ReplicateOutcome::extinct) {
            subsets.push(Subset::NonExtinct);
        }
        for subset in subsets {
            let members: Vec<&ReplicateOutcome> = block
                .replicates
                .iter()
                .filter(|r| subset == Subset::All || !r.extinct())
                .collect();
            let failed = members.iter().filter(|r| r.ok().is_none()).count();
            for (i, name) in names.iter().enumerate() {
                let values: Vec<f64> = members.iter().filter_map(|r| r.ok().map(|e| e.estimates[i])).collect();
                out.push(SummaryStats::from_values(
                    subset, name, block.k, truth[i], &values, failed,
                ));
            }
        }
    }
    out
}

fn tally_coverage(config: &ExperimentConfig, blocks: &[KBlock]) -> Vec<CoverageRow> {
    let names = config.parameter_names();
    let truth = config.truth();
    let truth_of = |name: &str| names.iter().position(|n| n == name).map(|i| truth[i]);
    let mut rows: Vec<CoverageRow> = Vec::new();
    let mut bump = |parameter: String, k: u32, mode: Mode, alpha: f64, covered: bool| match rows
        .iter_mut()
        .find(|r| r.parameter == parameter && r.k == k && r.mode == mode && r.alpha == alpha)
    {
        Some(r) => {
            r.n += 1;
            r.covered += covered as usize;
        }
        None => rows.push(CoverageRow {
            parameter,
            k,
            mode,
            alpha,
            covered: covered as usize,
            n: 1,
        }),
    };
    for block in blocks {
        for rep in &block.replicates {
            for ci in &rep.intervals {
                if let Some(t) = truth_of(&ci.parameter) {
                    bump(ci.parameter.clone(), block.k, ci.mode, ci.alpha, ci.contains(t));
                }
            }
            for region in &rep.regions {
                if let (Some(a), Some(b)) = (truth_of(&region.names[0]), truth_of(&region.names[1])) {
                    let label = format!("{}:{}", region.names[0], region.names[1]);
                    bump(label, block.k, region.mode, 1.0 - region.level, region.contains([a, b]));
                }
            }
        }
    }
    rows
}
