//! Derives the scattering disc and discretization from path statistics.
//!
//! Usage: `cargo run --example scene_geometry [N_S] [R_S] [SPEED_KMH]`

use ambit_channel::scene::{derive_geometry, propagation_distance, GridSteps, Scenario};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let ns: f64 = args.next().map_or(Ok(100.0), |a| a.parse())?;
    let rs: f64 = args.next().map_or(Ok(100.0), |a| a.parse())?;
    let kmh: f64 = args.next().map_or(Ok(40.0), |a| a.parse())?;

    let (radius, density) = derive_geometry(ns, rs, kmh / 3.6)?;
    println!("disc radius {radius:.4} m, density {density:.4} scatterers/m^2");

    let s = Scenario::v2i_reference(ns, rs, 0.0, GridSteps::default())?;
    let g = &s.grid;
    println!("max Doppler {:.2} Hz", s.params.max_doppler_hz(s.traj.initial_speed_m_per_s));
    println!("grid: M = {}, N = {}, P = {}, D = {}, backbone B = {}", g.m_half, g.n_half, g.p_count, g.d_count, g.backbone_count);

    let d = propagation_distance(&s.geo, &s.traj, 0.0, 0.0, 5.0);
    println!("BS -> scatterer (0, 5) -> MU path length at t = 0: {d:.4} m");
    Ok(())
}
