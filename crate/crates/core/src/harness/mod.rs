//! Configuration, orchestration and persistence behind the command-line
//! tool.

mod analysis;
mod config;
mod manifest;
mod run;

pub use analysis::{run_bench, run_stats, validate, AnchorSummary, BenchEntry, BenchSummary, StatsSummary, ValidationReport};
pub use config::{
    BenchConfig, Engine, ExperimentConfig, OutputConfig, OutputFormat, RadioConfig, RunConfig, SceneConfig, StatsConfig,
};
pub use manifest::{config_hash, GridShape, RealizationRecord, RunManifest, MANIFEST_FILE};
pub use run::{read_gain_csv, resolve_workers, simulate, RunOverrides, WORKERS_ENV};
