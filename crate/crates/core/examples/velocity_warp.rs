//! Shows how an accelerating trajectory maps output steps onto the
//! constant-velocity backbone.
//!
//! Usage: `cargo run --example velocity_warp [ACCEL_M_PER_S2]`

use ambit_channel::ambit_sim::warp_weights;
use ambit_channel::scene::{GridSteps, Scenario};

fn main() -> anyhow::Result<()> {
    let accel: f64 = std::env::args().nth(1).map_or(Ok(2.0), |a| a.parse())?;
    let s = Scenario::v2i_reference(100.0, 100.0, accel, GridSteps::default())?;
    let rows = s.grid.backbone_count;
    println!("{} output steps over {} backbone rows", s.grid.p_count, rows);
    for step in [0, 1, 100, 500, s.grid.p_count - 1] {
        let (j, alpha) = warp_weights(&s.traj, &s.grid, rows, step)?;
        println!("step {step:>4} -> rows {j}/{} with weight {alpha:.4}", j + 1);
    }
    Ok(())
}
