//! Samples one Poisson field realization and lists the scatterers it holds.
//!
//! Usage: `cargo run --example field_sampling [SEED]`

use ambit_channel::levy_field::{materialize_scatterers, sample_field};
use ambit_channel::scene::{GridSteps, Scenario};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(1), |a| a.parse())?;
    let s = Scenario::v2i_reference(100.0, 100.0, 0.0, GridSteps::default())?;
    let field = sample_field(&s.grid, &s.geo, &s.traj, seed);
    let (rows, cols) = field.increments().dim();
    println!("field {rows} x {cols} cells of {:.4} m^2, {} scatterers", field.cell_area_m2(), field.total_count());

    let set = materialize_scatterers(&field, &s.grid, &s.traj);
    let r = s.geo.disc_radius_m;
    println!("inside the disc at t = 0: {} (mean {})", set.population_within(0.0, s.traj.initial_y_m, r), s.geo.mean_path_count);
    println!("fresh arrivals over 1 s: {} (rate {}/s)", set.fresh_arrivals(&s.traj, r, 1.0), s.geo.path_arrival_rate_per_s);
    for sc in set.x_window(-r, r).iter().take(5) {
        println!("  {sc:?}");
    }
    Ok(())
}
