use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, StatsConfig};
use super::manifest::RunManifest;
use super::run::{create_file, read_gain_csv};
use crate::error::{Error, Result};
use crate::scene::Scenario;
use crate::stats::{compare_engines, doppler_psd_with, temporal_acf, CdfSummary, ComparisonOptions};

/// Per-anchor results for one engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSummary {
    pub engine: String,
    pub anchor_time_s: f64,
    pub realization_count: usize,
    /// First lag with `|ρ| < 0.5`; `None` if the ACF stays above it.
    pub coherence_time_s: Option<f64>,
    pub acf_csv: String,
    pub psd_csv: String,
    pub psd_window_start_s: f64,
    pub psd_resolution_hz: f64,
    /// Symmetric band holding `mass_fraction` of the PSD.
    pub doppler_edge_hz: f64,
    pub mass_fraction: f64,
    pub max_doppler_hz: f64,
    /// PSD mass within the maximum Doppler shift at the anchor's speed plus
    /// one resolution bin.
    pub mass_within_max_doppler: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub anchors: Vec<AnchorSummary>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

fn anchor_tag(t: f64) -> String {
    format!("{:.3}", t).replace('.', "p")
}

/// Loads a manifest, checks its inventory and writes ACF and PSD CSVs per
/// engine and anchor into `out_dir` (the run directory by default), plus
/// `stats_summary.json`.
pub fn run_stats(manifest_path: &Path, stats: Option<&StatsConfig>, out_dir: Option<&Path>) -> Result<StatsSummary> {
    let manifest = RunManifest::load(manifest_path)?;
    let run_dir = manifest_path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    manifest.check_inventory(&run_dir)?;
    let stats = stats.unwrap_or(&manifest.config.stats).clone();
    let out_dir = out_dir.map_or_else(|| run_dir.clone(), Path::to_path_buf);
    let scenario = manifest.config.scenario()?;
    let dt = manifest.grid.dt_s;
    let horizon_s = manifest.grid.time_steps as f64 * dt;

    for &anchor in &stats.anchors_s {
        if anchor >= horizon_s {
            return Err(Error::Precondition(format!(
                "anchor {anchor} s is beyond the {horizon_s} s horizon"
            )));
        }
    }

    let mut warnings = Vec::new();
    let mut anchors = Vec::new();
    let mut files = Vec::new();
    for engine in &manifest.engines {
        let gains = manifest
            .records_for(engine)
            .map(|r| read_gain_csv(&run_dir.join(&r.gain_trace)))
            .collect::<Result<Vec<_>>>()?;
        if gains.len() < 2 {
            warnings.push(format!(
                "{engine}: degenerate ensemble of {} realization; ACF and PSD are single-path estimates",
                gains.len()
            ));
        }
        for &anchor in &stats.anchors_s {
            let max_lag = stats.max_lag_s.min(horizon_s - dt - anchor).max(0.0);
            let acf = temporal_acf(&gains, dt, anchor, max_lag)?;
            let psd = doppler_psd_with(&gains, dt, anchor, stats.window_length_s.min(horizon_s), stats.taper)?;

            let tag = anchor_tag(anchor);
            let acf_csv = format!("stats/{engine}/acf_t{tag}.csv");
            let psd_csv = format!("stats/{engine}/psd_t{tag}.csv");
            let mut w = create_file(&out_dir.join(&acf_csv))?;
            acf.write_csv(&mut w)?;
            w.flush()?;
            let mut w = create_file(&out_dir.join(&psd_csv))?;
            psd.write_csv(&mut w)?;
            w.flush()?;

            let max_doppler_hz = max_doppler_over_window(&scenario, &psd);
            anchors.push(AnchorSummary {
                engine: engine.clone(),
                anchor_time_s: anchor,
                realization_count: gains.len(),
                coherence_time_s: acf.coherence_time(),
                acf_csv: acf_csv.clone(),
                psd_csv: psd_csv.clone(),
                psd_window_start_s: psd.window_start_s,
                psd_resolution_hz: psd.resolution_hz(),
                doppler_edge_hz: psd.mass_edge(stats.mass_fraction),
                mass_fraction: stats.mass_fraction,
                max_doppler_hz,
                mass_within_max_doppler: psd.mass_within(max_doppler_hz + psd.resolution_hz()),
            });
            files.push(acf_csv);
            files.push(psd_csv);
        }
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let summary = StatsSummary { anchors, warnings, files };
    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(out_dir.join("stats_summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// Largest `f_c v / c` over the PSD window.
fn max_doppler_over_window(s: &Scenario, psd: &crate::stats::DopplerPsd) -> f64 {
    let end = psd.window_start_s + psd.window_length_s;
    let v = s.traj.speed(psd.window_start_s).abs().max(s.traj.speed(end).abs());
    s.params.max_doppler_hz(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub path_count: f64,
    pub realizations: usize,
    pub direct_s: Vec<f64>,
    pub ambit_s: Vec<f64>,
    pub runtime_ratio: CdfSummary,
    pub power_ratio_db: CdfSummary,
    pub runtime_ratio_csv: String,
    pub power_ratio_csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub t_max_s: f64,
    pub repetitions: usize,
    pub entries: Vec<BenchEntry>,
    /// Median runtime ratio never decreases as the path count grows.
    pub runtime_ratio_monotone: bool,
}

/// Engine comparison over the configured `N_s = R_s` sweep. Writes CDF CSVs
/// and `bench_summary.json` under the output directory.
pub fn run_bench(config: &ExperimentConfig) -> Result<BenchSummary> {
    config.validate()?;
    if config.run.engine != super::config::Engine::Both {
        return Err(Error::config("run.engine", "bench compares engines and needs \"both\""));
    }
    let dir = &config.output.directory;
    let mut counts = config.bench.path_counts.clone();
    counts.sort_by(f64::total_cmp);
    let mut entries = Vec::new();
    for count in counts {
        let scenario = config.bench_scenario(count)?;
        let options = ComparisonOptions {
            realizations: config.bench.realizations,
            base_seed: config.run.base_seed,
            repetitions: config.bench.repetitions,
        };
        let cmp = compare_engines(&scenario, &options)?;
        let tag = format!("{count}");
        let runtime_ratio_csv = format!("bench/runtime_ratio_ns{tag}.csv");
        let power_ratio_csv = format!("bench/power_ratio_db_ns{tag}.csv");
        let mut w = create_file(&dir.join(&runtime_ratio_csv))?;
        cmp.runtime_ratio.write_csv(&mut w)?;
        w.flush()?;
        let mut w = create_file(&dir.join(&power_ratio_csv))?;
        cmp.power_ratio_db.write_csv(&mut w)?;
        w.flush()?;
        entries.push(BenchEntry {
            path_count: count,
            realizations: config.bench.realizations,
            runtime_ratio: cmp.runtime_ratio.summary(),
            power_ratio_db: cmp.power_ratio_db.summary(),
            direct_s: cmp.direct_s,
            ambit_s: cmp.ambit_s,
            runtime_ratio_csv,
            power_ratio_csv,
        });
    }
    let runtime_ratio_monotone = entries
        .windows(2)
        .all(|w| w[1].runtime_ratio.median >= w[0].runtime_ratio.median);
    let summary = BenchSummary {
        t_max_s: config.bench.t_max_s,
        repetitions: config.bench.repetitions,
        entries,
        runtime_ratio_monotone,
    };
    std::fs::write(dir.join("bench_summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

impl BenchSummary {
    /// Fixed-width table of the sweep.
    pub fn table(&self) -> String {
        let mut s = String::from("  N_s=R_s   runtime ratio (median/std)   power ratio dB (median/std)\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{:>9}   {:>10.2} / {:<10.2}        {:>8.3} / {:<8.3}\n",
                e.path_count, e.runtime_ratio.median, e.runtime_ratio.std, e.power_ratio_db.median, e.power_ratio_db.std
            ));
        }
        s
    }
}

/// Derived quantities reported by `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub disc_radius_m: f64,
    pub scatterer_density_per_m2: f64,
    pub mean_path_count: f64,
    pub path_arrival_rate_per_s: f64,
    pub max_doppler_hz: f64,
    pub m_half: usize,
    pub n_half: usize,
    pub p_count: usize,
    pub d_count: usize,
    pub backbone_count: usize,
    pub config_sha256: String,
}

pub fn validate(config: &ExperimentConfig) -> Result<ValidationReport> {
    config.validate()?;
    let s = config.scenario()?;
    Ok(ValidationReport {
        disc_radius_m: s.geo.disc_radius_m,
        scatterer_density_per_m2: s.geo.scatterer_density_per_m2,
        mean_path_count: s.geo.mean_path_count,
        path_arrival_rate_per_s: s.geo.path_arrival_rate_per_s,
        max_doppler_hz: s.params.max_doppler_hz(s.traj.initial_speed_m_per_s),
        m_half: s.grid.m_half,
        n_half: s.grid.n_half,
        p_count: s.grid.p_count,
        d_count: s.grid.d_count,
        backbone_count: s.grid.backbone_count,
        config_sha256: super::manifest::config_hash(config)?,
    })
}
