//! Drives the harness from a JSON config: simulate, then statistics.
//!
//! Usage: `cargo run --release --example harness_run [OUT_DIR]`

use ambit_channel::harness::{run_stats, simulate, ExperimentConfig, MANIFEST_FILE};

const CONFIG: &str = r#"{
  "scene": { "mean_path_count": 100, "path_arrival_rate_per_s": 100, "initial_speed_kmh": 40 },
  "radio": { "carrier_frequency_ghz": 2.6, "path_loss_exponent": 1.7 },
  "grid": { "t_max_s": 0.5 },
  "run": { "engine": "both", "realizations": 4, "base_seed": 5, "include_los": true },
  "stats": { "anchors_s": [0.0, 0.25], "max_lag_s": 0.02, "window_length_s": 0.1 }
}"#;

fn main() -> anyhow::Result<()> {
    let mut config = ExperimentConfig::from_json_str(CONFIG)?;
    config.output.directory = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("ambit-channel-demo"), Into::into);
    let manifest = simulate(&config)?;
    println!("{} records, config sha256 {}", manifest.realizations.len(), manifest.config_sha256);
    let summary = run_stats(&config.output.directory.join(MANIFEST_FILE), None, None)?;
    for a in &summary.anchors {
        println!("{:>6} t0 = {:.2} s: coherence {:?}, Doppler edge {:.1} Hz", a.engine, a.anchor_time_s, a.coherence_time_s, a.doppler_edge_hz);
    }
    println!("outputs in {}", config.output.directory.display());
    Ok(())
}
