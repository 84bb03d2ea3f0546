//! `simulate`: realizations in parallel, outputs written per realization
//! with fixed names so the bytes do not depend on scheduling.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ExperimentConfig, OutputFormat};
use super::manifest::{config_hash, GridShape, RealizationRecord, RunManifest};
use crate::ambit_sim::{AmbitOptions, AmbitPlan, PhaseTimings};
use crate::direct_sim::{received_power_trace, simulate_direct_with, DirectOptions, ImpulseResponseGrid};
use crate::error::{Error, Result};
use crate::levy_field::{materialize_scatterers, realization_seed, sample_field};
use crate::scene::Scenario;
use crate::stats::narrowband_gain;

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "AMBIT_CHANNEL_WORKERS";

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl RunOverrides {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            config.run.base_seed = seed;
        }
        if let Some(out) = &self.out {
            config.output.directory = out.clone();
        }
        if let Some(format) = self.format {
            config.output.format = format;
        }
        if let Some(w) = self.workers {
            config.run.workers = Some(w);
        }
    }
}

/// Worker count: environment, then the config, then all cores.
pub fn resolve_workers(config_workers: Option<usize>) -> Result<usize> {
    if let Ok(raw) = std::env::var(WORKERS_ENV) {
        return match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::config(WORKERS_ENV, format!("expected a positive integer, got {raw:?}"))),
        };
    }
    match config_workers {
        Some(0) => Err(Error::config("run.workers", "must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub(crate) fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_power<W: Write>(h: &ImpulseResponseGrid, mut out: W) -> std::io::Result<()> {
    writeln!(out, "time_s,power")?;
    for (k, p) in received_power_trace(h).iter().enumerate() {
        writeln!(out, "{},{}", h.time_at(k), p)?;
    }
    out.flush()
}

fn write_gain<W: Write>(h: &ImpulseResponseGrid, mut out: W) -> std::io::Result<()> {
    writeln!(out, "time_s,re,im")?;
    for (k, g) in narrowband_gain(h).iter().enumerate() {
        writeln!(out, "{},{},{}", h.time_at(k), g.re, g.im)?;
    }
    out.flush()
}

/// Reads a `time_s,re,im` gain trace.
pub fn read_gain_csv(path: &Path) -> Result<Vec<Complex64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        let bad = || Error::Precondition(format!("{}:{}: malformed gain row", path.display(), n + 1));
        let mut parts = line.split(',');
        let _t = parts.next().ok_or_else(bad)?;
        let re: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let im: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

fn emit(
    dir: &Path,
    engine: &str,
    index: usize,
    seed: u64,
    format: OutputFormat,
    h: &ImpulseResponseGrid,
    seconds: f64,
    phases: Option<PhaseTimings>,
) -> Result<RealizationRecord> {
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Binary => "bin",
    };
    let impulse_response = format!("{engine}/h_{index:05}.{ext}");
    let power_trace = format!("{engine}/power_{index:05}.csv");
    let gain_trace = format!("{engine}/gain_{index:05}.csv");
    let mut w = create_file(&dir.join(&impulse_response))?;
    match format {
        OutputFormat::Csv => h.write_csv(&mut w)?,
        OutputFormat::Binary => h.write_binary(&mut w)?,
    }
    w.flush()?;
    write_power(h, create_file(&dir.join(&power_trace))?)?;
    write_gain(h, create_file(&dir.join(&gain_trace))?)?;
    Ok(RealizationRecord {
        index,
        seed,
        engine: engine.to_string(),
        impulse_response,
        power_trace,
        gain_trace,
        seconds,
        phases,
    })
}

fn run_one(
    scenario: &Scenario,
    config: &ExperimentConfig,
    plan: Option<&AmbitPlan>,
    dir: &Path,
    index: usize,
) -> Result<Vec<RealizationRecord>> {
    let Scenario { params, geo, traj, grid } = scenario;
    let seed = realization_seed(config.run.base_seed, index as u64);
    let field = sample_field(grid, geo, traj, seed);
    let format = config.output.format;
    let mut records = Vec::new();
    if config.run.engine.runs_direct() {
        let options = DirectOptions {
            include_los: config.run.include_los,
            quantization: config.run.delay_quantization,
            start_time_s: 0.0,
        };
        let set = materialize_scatterers(&field, grid, traj);
        let started = Instant::now();
        let h = simulate_direct_with(params, geo, traj, grid, &set, &options)?;
        let seconds = started.elapsed().as_secs_f64();
        records.push(emit(dir, "direct", index, seed, format, &h, seconds, None)?);
    }
    if let Some(plan) = plan {
        let started = Instant::now();
        let (h, phases) = plan.run(&field)?;
        let seconds = started.elapsed().as_secs_f64();
        records.push(emit(dir, "ambit", index, seed, format, &h, seconds, Some(phases))?);
    }
    Ok(records)
}

/// Runs every realization of `config` and writes outputs plus
/// `manifest.json` and `timing.json` under the output directory.
pub fn simulate(config: &ExperimentConfig) -> Result<RunManifest> {
    config.validate()?;
    let scenario = config.scenario()?;
    let workers = resolve_workers(config.run.workers)?;
    let dir = config.output.directory.clone();
    std::fs::create_dir_all(&dir)?;

    let plan = if config.run.engine.runs_ambit() {
        let options = AmbitOptions {
            include_los: config.run.include_los,
            shape: config.run.ambit_set,
        };
        Some(AmbitPlan::new(&scenario.params, &scenario.geo, &scenario.traj, &scenario.grid, options)?)
    } else {
        None
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("run.workers", e.to_string()))?;
    let per_realization: Vec<Vec<RealizationRecord>> = pool.install(|| {
        (0..config.run.realizations)
            .into_par_iter()
            .map(|i| run_one(&scenario, config, plan.as_ref(), &dir, i))
            .collect::<Result<_>>()
    })?;
    let realizations: Vec<RealizationRecord> = per_realization.into_iter().flatten().collect();

    let mut engines = Vec::new();
    if config.run.engine.runs_direct() {
        engines.push("direct".to_string());
    }
    if config.run.engine.runs_ambit() {
        engines.push("ambit".to_string());
    }

    let timing = TimingReport {
        plan_s: plan.as_ref().map(|p| p.plan_seconds()),
        realizations: realizations
            .iter()
            .map(|r| TimingEntry {
                index: r.index,
                engine: r.engine.clone(),
                seconds: r.seconds,
                phases: r.phases,
            })
            .collect(),
    };
    let timing_file = "timing.json".to_string();
    std::fs::write(dir.join(&timing_file), serde_json::to_string_pretty(&timing)?)?;

    let mut files: Vec<String> = realizations
        .iter()
        .flat_map(|r| [r.impulse_response.clone(), r.power_trace.clone(), r.gain_trace.clone()])
        .collect();
    files.push(timing_file);

    let grid = &scenario.grid;
    let manifest = RunManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: config_hash(config)?,
        config: config.clone(),
        base_seed: config.run.base_seed,
        seeds: (0..config.run.realizations)
            .map(|i| realization_seed(config.run.base_seed, i as u64))
            .collect(),
        engines,
        format: config.output.format,
        workers,
        grid: GridShape {
            time_steps: grid.p_count,
            delay_bins: grid.d_count,
            dt_s: grid.dt_s,
            dtau_s: grid.dtau_s,
        },
        realizations,
        files,
    };
    manifest.save(&dir)?;
    Ok(manifest)
}

#[derive(Debug, Clone, serde::Serialize)]
struct TimingEntry {
    index: usize,
    engine: String,
    seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    phases: Option<PhaseTimings>,
}

#[derive(Debug, Clone, serde::Serialize)]
struct TimingReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    plan_s: Option<f64>,
    realizations: Vec<TimingEntry>,
}
