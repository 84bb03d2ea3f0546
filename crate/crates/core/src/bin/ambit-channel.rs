use std::path::PathBuf;
use std::process::ExitCode;

use ambit_channel::harness::{self, ExperimentConfig, OutputFormat, RunOverrides, MANIFEST_FILE};
use anyhow::Context;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ambit-channel", version, about = "V2I channel simulation with direct and ambit engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed, overrides `run.base_seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; AMBIT_CHANNEL_WORKERS takes precedence.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Output directory, overrides `output.directory`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Impulse-response export format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

impl Common {
    fn overrides(&self) -> RunOverrides {
        RunOverrides {
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
            format: self.format,
        }
    }

    fn load(&self) -> anyhow::Result<ExperimentConfig> {
        let path = self.config.as_ref().context("--config PATH is required")?;
        let mut config =
            ExperimentConfig::from_path(path).with_context(|| format!("loading config {}", path.display()))?;
        self.overrides().apply(&mut config);
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured engine(s) over all realizations.
    Simulate(Common),
    /// ACF and Doppler PSD over a stored run.
    Stats {
        #[command(flatten)]
        common: Common,
        /// Run manifest; defaults to `<out>/manifest.json`.
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
    },
    /// Runtime and power-ratio CDFs across the configured path counts.
    Bench(Common),
    /// Check a configuration and print the derived grid.
    Validate(Common),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let config = common.load()?;
            let manifest = harness::simulate(&config)?;
            println!(
                "wrote {} files for {} realization(s) to {}",
                manifest.files.len() + 1,
                manifest.seeds.len(),
                config.output.directory.display()
            );
        }
        Command::Stats { common, manifest } => {
            let (stats, out) = match &common.config {
                Some(_) => {
                    let config = common.load()?;
                    (Some(config.stats), common.out.clone().or(Some(config.output.directory)))
                }
                None => (None, common.out.clone()),
            };
            let manifest = manifest
                .or_else(|| out.as_ref().map(|d| d.join(MANIFEST_FILE)))
                .context("give --manifest PATH, --out DIR or --config PATH")?;
            let summary = harness::run_stats(&manifest, stats.as_ref(), out.as_deref())?;
            for a in &summary.anchors {
                println!(
                    "{:>6} t0={:<6} coherence={:<10} doppler_edge={:.1} Hz",
                    a.engine,
                    a.anchor_time_s,
                    a.coherence_time_s.map_or("n/a".to_string(), |t| format!("{t:.4} s")),
                    a.doppler_edge_hz
                );
            }
        }
        Command::Bench(common) => {
            let config = common.load()?;
            let summary = harness::run_bench(&config)?;
            print!("{}", summary.table());
        }
        Command::Validate(common) => {
            let config = common.load()?;
            let report = harness::validate(&config)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
