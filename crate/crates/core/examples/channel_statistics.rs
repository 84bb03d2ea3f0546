//! Ensemble ACF and Doppler PSD at two anchors of an accelerating run.
//!
//! Usage: `cargo run --release --example channel_statistics [REALIZATIONS]`

use ambit_channel::ambit_sim::{AmbitOptions, AmbitPlan};
use ambit_channel::levy_field::{realization_seed, sample_field};
use ambit_channel::scene::{GridSteps, Scenario};
use ambit_channel::stats::{doppler_psd, narrowband_gain, temporal_acf};

fn main() -> anyhow::Result<()> {
    let realizations: u64 = std::env::args().nth(1).map_or(Ok(40), |a| a.parse())?;
    let steps = GridSteps {
        t_max_s: 2.0,
        ..GridSteps::default()
    };
    let s = Scenario::v2i_reference(100.0, 100.0, 3.0, steps)?;
    let plan = AmbitPlan::new(&s.params, &s.geo, &s.traj, &s.grid, AmbitOptions::default())?;
    let gains = (0..realizations)
        .map(|r| {
            let field = sample_field(&s.grid, &s.geo, &s.traj, realization_seed(1, r));
            plan.run(&field).map(|(h, _)| narrowband_gain(&h))
        })
        .collect::<Result<Vec<_>, _>>()?;

    for anchor in [0.0, 1.8] {
        let acf = temporal_acf(&gains, s.grid.dt_s, anchor, 0.02)?;
        let psd = doppler_psd(&gains, s.grid.dt_s, anchor, 0.1)?;
        println!(
            "t0 = {anchor} s: speed {:.1} m/s, f_D {:.1} Hz, coherence {:?} s, 99% Doppler edge {:.1} Hz",
            s.traj.speed(anchor),
            s.params.max_doppler_hz(s.traj.speed(anchor)),
            acf.coherence_time(),
            psd.mass_edge(0.99)
        );
    }
    Ok(())
}
