//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use ambit_channel::ambit_sim::{conv2d_fold_accumulate, AmbitOptions, AmbitPlan};
use ambit_channel::harness::{self, ExperimentConfig};
use ambit_channel::levy_field::{materialize_scatterers, realization_seed, sample_field};
use ambit_channel::scene::{GridSteps, Scenario};
use ambit_channel::stats::{
    compare_engines, doppler_psd_with, narrowband_gain, temporal_acf, ComparisonOptions, Taper,
};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { name, pass, detail }
}

fn failed(name: &'static str, err: impl std::fmt::Display) -> Outcome {
    outcome(name, false, format!("error: {err}"))
}

fn scenario(ns: f64, accel: f64, t_max_s: f64) -> Scenario {
    let steps = GridSteps {
        t_max_s,
        ..GridSteps::default()
    };
    Scenario::v2i_reference(ns, ns, accel, steps).expect("reference scenario")
}

fn ambit_gains(s: &Scenario, realizations: usize, base_seed: u64) -> ambit_channel::Result<Vec<Vec<Complex64>>> {
    let plan = AmbitPlan::new(&s.params, &s.geo, &s.traj, &s.grid, AmbitOptions::default())?;
    (0..realizations)
        .map(|r| {
            let field = sample_field(&s.grid, &s.geo, &s.traj, realization_seed(base_seed, r as u64));
            plan.run(&field).map(|(h, _)| narrowband_gain(&h))
        })
        .collect()
}

fn oracle_equivalence() -> Outcome {
    const NAME: &str = "oracle equivalence";
    let s = scenario(100.0, 0.0, 1.0);
    let options = ComparisonOptions {
        realizations: 100,
        base_seed: 2024,
        repetitions: 1,
    };
    match compare_engines(&s, &options) {
        Ok(cmp) => {
            let p = cmp.power_ratio_db.summary();
            let pass = (-0.46..=-0.16).contains(&p.median) && p.std < 0.3 && p.max <= 0.0;
            outcome(
                NAME,
                pass,
                format!(
                    "median {:.3} dB in [-0.46, -0.16], std {:.3} dB < 0.3, max {:.3} dB <= 0 over {} steps",
                    p.median, p.std, p.max, p.count
                ),
            )
        }
        Err(e) => failed(NAME, e),
    }
}

fn speedup() -> Outcome {
    const NAME: &str = "speedup";
    let mut medians = Vec::new();
    for ns in [100.0, 1000.0, 5000.0] {
        let s = scenario(ns, 0.0, 4.0);
        let options = ComparisonOptions {
            realizations: 3,
            base_seed: 11,
            repetitions: 3,
        };
        match compare_engines(&s, &options) {
            Ok(cmp) => medians.push((ns, cmp.runtime_ratio.median())),
            Err(e) => return failed(NAME, e),
        }
    }
    let monotone = medians.windows(2).all(|w| w[1].1 >= w[0].1);
    let at_5000 = medians.last().map_or(0.0, |m| m.1);
    let detail = medians
        .iter()
        .map(|(ns, r)| format!("N_s={ns}: {r:.2}x"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        NAME,
        at_5000 > 2.0 && monotone,
        format!("{detail}; need > 2x at 5000 and non-decreasing (monotone: {monotone})"),
    )
}

const WINDOW_S: f64 = 0.1;
const TAPER: Taper = Taper::Kaiser { beta: 4.0 };

fn doppler_constant_velocity() -> Outcome {
    const NAME: &str = "doppler support, constant velocity";
    let s = scenario(100.0, 0.0, 1.0);
    let gains = match ambit_gains(&s, 200, 77) {
        Ok(g) => g,
        Err(e) => return failed(NAME, e),
    };
    match doppler_psd_with(&gains, s.grid.dt_s, 0.5, WINDOW_S, TAPER) {
        Ok(psd) => {
            let fd = s.params.max_doppler_hz(s.traj.initial_speed_m_per_s);
            let mass = psd.mass_within(fd + psd.resolution_hz());
            outcome(
                NAME,
                mass >= 0.99,
                format!(
                    "{:.4} of PSD mass within {:.1} Hz + {:.1} Hz (>= 0.99), 200 realizations",
                    mass,
                    fd,
                    psd.resolution_hz()
                ),
            )
        }
        Err(e) => failed(NAME, e),
    }
}

fn non_stationarity() -> (Outcome, Outcome) {
    const DOPPLER: &str = "doppler support, accelerating";
    const ACF: &str = "acf non-stationarity";
    let s = scenario(100.0, 3.0, 3.2);
    let gains = match ambit_gains(&s, 200, 303) {
        Ok(g) => g,
        Err(e) => return (failed(DOPPLER, &e), failed(ACF, e)),
    };
    let dt = s.grid.dt_s;

    let doppler = match (
        doppler_psd_with(&gains, dt, 0.0, WINDOW_S, TAPER),
        doppler_psd_with(&gains, dt, 3.0, WINDOW_S, TAPER),
    ) {
        (Ok(early), Ok(late)) => {
            let (e0, e3) = (early.mass_edge(0.99), late.mass_edge(0.99));
            outcome(DOPPLER, e3 > e0, format!("99% edge {e3:.1} Hz at 3 s vs {e0:.1} Hz at 0 s, a = 3 m/s^2"))
        }
        (Err(e), _) | (_, Err(e)) => failed(DOPPLER, e),
    };

    let acf = match (temporal_acf(&gains, dt, 0.0, 0.05), temporal_acf(&gains, dt, 3.0, 0.05)) {
        (Ok(a0), Ok(a3)) => {
            let unit = a0.values[0] == Complex64::new(1.0, 0.0) && a3.values[0] == Complex64::new(1.0, 0.0);
            match (a0.coherence_time(), a3.coherence_time()) {
                (Some(c0), Some(c3)) => outcome(
                    ACF,
                    c3 < c0 && unit,
                    format!(
                        "coherence {:.1} ms at 3 s vs {:.1} ms at 0 s, rho(0) = 1 exactly: {unit}",
                        c3 * 1e3,
                        c0 * 1e3
                    ),
                ),
                (c0, c3) => outcome(ACF, false, format!("coherence time not reached: {c0:?} / {c3:?}")),
            }
        }
        (Err(e), _) | (_, Err(e)) => failed(ACF, e),
    };
    (doppler, acf)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn poisson_statistics() -> Outcome {
    const NAME: &str = "poisson statistics";
    let s = scenario(100.0, 0.0, 1.0);
    let mut counts = Vec::new();
    let mut arrivals = Vec::new();
    for seed in 0..200u64 {
        let field = sample_field(&s.grid, &s.geo, &s.traj, realization_seed(5, seed));
        let set = materialize_scatterers(&field, &s.grid, &s.traj);
        counts.push(set.population_within(0.0, s.traj.initial_y_m, s.geo.disc_radius_m) as f64);
        arrivals.push(set.fresh_arrivals(&s.traj, s.geo.disc_radius_m, 1.0) as f64);
    }
    let (mc, sc) = mean_and_se(&counts);
    let (ma, sa) = mean_and_se(&arrivals);
    let ok_count = (mc - s.geo.mean_path_count).abs() <= 3.0 * sc;
    let ok_rate = (ma - s.geo.path_arrival_rate_per_s).abs() <= 3.0 * sa;
    outcome(
        NAME,
        ok_count && ok_rate,
        format!(
            "in-disc count {mc:.2} ± {sc:.2} vs N_s = 100, arrivals {ma:.2} ± {sa:.2} /s vs R_s = 100 (3 SE), 200 seeds"
        ),
    )
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    Array2::from_shape_simple_fn((rows, cols), || {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn quad_loop(x: &Array2<Complex64>, y: &Array2<Complex64>) -> Array2<Complex64> {
    let (xr, xc) = x.dim();
    let (yr, yc) = y.dim();
    let mut z = Array2::zeros((yr + xr - 1, yc + xc - 1));
    for q in 0..yr {
        for b2 in 0..yc {
            for p in 0..xr {
                for b1 in 0..xc {
                    z[(q + xr - 1 - p, b2 + b1)] += y[(q, b2)] * x[(p, b1)];
                }
            }
        }
    }
    z
}

fn convolution_correctness() -> Outcome {
    const NAME: &str = "convolution correctness";
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = random_matrix(5, 7, &mut rng);
        let y = random_matrix(5, 7, &mut rng);
        let mut z = Array2::zeros((9, 13));
        if let Err(e) = conv2d_fold_accumulate(&x, &y, &mut z) {
            return failed(NAME, e);
        }
        worst = worst.max(z.iter().zip(&quad_loop(&x, &y)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }

    let mut impulses_ok = true;
    for (b1, b2, phi1, phi2, amp) in [(0, 0, 0.3, -1.2, 1.0), (2, 5, 1.1, 2.9, 0.25), (6, 1, -3.0, 0.4, 7.5)] {
        let mut x = Array2::zeros((1, 7));
        x[(0, b1)] = Complex64::from_polar(1.0, phi1);
        let mut y = Array2::zeros((1, 7));
        y[(0, b2)] = Complex64::from_polar(amp, phi2);
        let mut z = Array2::zeros((1, 13));
        if let Err(e) = conv2d_fold_accumulate(&x, &y, &mut z) {
            return failed(NAME, e);
        }
        let want = Complex64::from_polar(amp, phi1 + phi2);
        for (b, v) in z.iter().enumerate() {
            let expected = if b == b1 + b2 { want } else { Complex64::new(0.0, 0.0) };
            impulses_ok &= (v - expected).norm() <= 1e-12 * amp;
        }
    }
    outcome(
        NAME,
        worst <= 1e-12 && impulses_ok,
        format!("max abs error {worst:.2e} vs quadruple loop on 5x7 (<= 1e-12); impulse composition: {impulses_ok}"),
    )
}

fn csv_bytes(dir: &Path) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "csv") {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path)?));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn determinism() -> Outcome {
    const NAME: &str = "determinism";
    let tmp = match tempfile::tempdir() {
        Ok(t) => t,
        Err(e) => return failed(NAME, e),
    };
    let text = r#"{
        "radio": { "carrier_frequency_ghz": 2.6, "path_loss_exponent": 1.7 },
        "grid": { "t_max_s": 0.3 },
        "run": { "engine": "both", "realizations": 8, "base_seed": 99, "include_los": true }
    }"#;
    let mut dirs = Vec::new();
    for (tag, workers) in [("a", 1), ("b", 4), ("c", 1)] {
        let mut config = match ExperimentConfig::from_json_str(text) {
            Ok(c) => c,
            Err(e) => return failed(NAME, e),
        };
        config.run.workers = Some(workers);
        config.output.directory = tmp.path().join(tag);
        if let Err(e) = harness::simulate(&config) {
            return failed(NAME, e);
        }
        dirs.push(config.output.directory);
    }
    let snapshots: Result<Vec<_>, _> = dirs.iter().map(|d| csv_bytes(d)).collect();
    match snapshots {
        Ok(s) => {
            let identical = s[0] == s[1] && s[0] == s[2];
            outcome(
                NAME,
                identical && !s[0].is_empty(),
                format!("{} CSV files bit-identical across 3 runs with 1, 4, 1 workers: {identical}", s[0].len()),
            )
        }
        Err(e) => failed(NAME, e),
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut outcomes = Vec::new();
    let mut record = |o: Outcome| {
        println!("[{}] {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
        outcomes.push(o.pass);
    };
    record(oracle_equivalence());
    record(speedup());
    record(doppler_constant_velocity());
    let (doppler, acf) = non_stationarity();
    record(doppler);
    record(acf);
    record(poisson_statistics());
    record(convolution_correctness());
    record(determinism());
    let failures = outcomes.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} passed, {} failed in {:.1} s",
        outcomes.len() - failures,
        failures,
        started.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
