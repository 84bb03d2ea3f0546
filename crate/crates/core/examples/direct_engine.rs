//! Runs the per-path reference engine and writes the impulse response.
//!
//! Usage: `cargo run --release --example direct_engine [OUT.csv]`

use std::io::BufWriter;

use ambit_channel::direct_sim::{received_power_trace, simulate_direct};
use ambit_channel::levy_field::{materialize_scatterers, sample_field};
use ambit_channel::scene::{GridSteps, Scenario};

fn main() -> anyhow::Result<()> {
    let steps = GridSteps {
        t_max_s: 0.25,
        ..GridSteps::default()
    };
    let s = Scenario::v2i_reference(100.0, 100.0, 0.0, steps)?;
    let field = sample_field(&s.grid, &s.geo, &s.traj, 42);
    let set = materialize_scatterers(&field, &s.grid, &s.traj);
    let h = simulate_direct(&s.params, &s.geo, &s.traj, &s.grid, &set, true)?;

    let power = received_power_trace(&h);
    let mean = power.iter().sum::<f64>() / power.len() as f64;
    println!("{} x {} grid, mean received power {:.3} dB", h.time_steps(), h.delay_bins(), 10.0 * mean.log10());
    if let Some(path) = std::env::args().nth(1) {
        h.write_csv(BufWriter::new(std::fs::File::create(&path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
