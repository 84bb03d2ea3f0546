//! Builds an ambit plan once and reuses it across realizations, printing
//! the time spent in each phase.
//!
//! Usage: `cargo run --release --example ambit_engine [REALIZATIONS]`

use ambit_channel::ambit_sim::{AmbitOptions, AmbitPlan};
use ambit_channel::direct_sim::received_power_trace;
use ambit_channel::levy_field::{realization_seed, sample_field};
use ambit_channel::scene::{GridSteps, Scenario};

fn main() -> anyhow::Result<()> {
    let realizations: u64 = std::env::args().nth(1).map_or(Ok(3), |a| a.parse())?;
    let s = Scenario::v2i_reference(100.0, 100.0, 1.0, GridSteps::default())?;
    let options = AmbitOptions {
        include_los: true,
        ..AmbitOptions::default()
    };
    let plan = AmbitPlan::new(&s.params, &s.geo, &s.traj, &s.grid, options)?;
    println!("plan built in {:.1} ms", plan.plan_seconds() * 1e3);
    for r in 0..realizations {
        let field = sample_field(&s.grid, &s.geo, &s.traj, realization_seed(9, r));
        let (h, t) = plan.run(&field)?;
        let power = received_power_trace(&h);
        let mean = power.iter().sum::<f64>() / power.len() as f64;
        println!(
            "realization {r}: {:.3} dB mean power, build {:.1} ms, convolve {:.1} ms, warp {:.1} ms",
            10.0 * mean.log10(),
            t.build_s * 1e3,
            t.convolve_s * 1e3,
            t.warp_s * 1e3
        );
    }
    Ok(())
}
