//! Times both engines on the same realizations and prints the runtime and
//! power-ratio CDF summaries.
//!
//! Usage: `cargo run --release --example engine_speedup [N_S] [T_MAX_S] [REALIZATIONS]`

use ambit_channel::scene::{GridSteps, Scenario};
use ambit_channel::stats::{compare_engines, ComparisonOptions};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let ns: f64 = args.next().map_or(Ok(1000.0), |a| a.parse())?;
    let t_max_s: f64 = args.next().map_or(Ok(1.0), |a| a.parse())?;
    let realizations: usize = args.next().map_or(Ok(2), |a| a.parse())?;

    let steps = GridSteps {
        t_max_s,
        ..GridSteps::default()
    };
    let scenario = Scenario::v2i_reference(ns, ns, 0.0, steps)?;
    let options = ComparisonOptions {
        realizations,
        base_seed: 7,
        repetitions: 1,
    };
    let cmp = compare_engines(&scenario, &options)?;
    println!("N_s = R_s = {ns}, horizon {t_max_s} s, {realizations} realizations");
    for (d, a) in cmp.direct_s.iter().zip(&cmp.ambit_s) {
        println!("  direct {:8.3} ms   ambit {:8.3} ms   ratio {:6.2}", d * 1e3, a * 1e3, d / a);
    }
    let rt = cmp.runtime_ratio.summary();
    let pr = cmp.power_ratio_db.summary();
    println!("runtime ratio: median {:.2}, std {:.2}", rt.median, rt.std);
    println!("power ratio dB: median {:.3}, std {:.3}, max {:.3}", pr.median, pr.std, pr.max);
    Ok(())
}
