//! Reference engine: explicit single-bounce geometry for every active
//! scatterer at every time step.

use std::io::{Read, Write};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::levy_field::ScattererSet;
use crate::scene::{euclidean_distance, ChannelParams, GridSpec, SceneGeometry, TrajectoryModel};

/// Complex channel impulse response over (time step, delay bin).
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponseGrid {
    pub values: Array2<Complex64>,
    pub dt_s: f64,
    pub dtau_s: f64,
    pub t0_s: f64,
}

impl ImpulseResponseGrid {
    pub fn zeros(time_steps: usize, delay_bins: usize, dt_s: f64, dtau_s: f64) -> Self {
        Self {
            values: Array2::zeros((time_steps, delay_bins)),
            dt_s,
            dtau_s,
            t0_s: 0.0,
        }
    }

    pub fn time_steps(&self) -> usize {
        self.values.nrows()
    }

    pub fn delay_bins(&self) -> usize {
        self.values.ncols()
    }

    pub fn time_at(&self, step: usize) -> f64 {
        self.t0_s + step as f64 * self.dt_s
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Dense CSV export with columns `time_s,delay_s,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "time_s,delay_s,re,im")?;
        for ((k, b), z) in self.values.indexed_iter() {
            writeln!(out, "{},{},{},{}", self.time_at(k), b as f64 * self.dtau_s, z.re, z.im)?;
        }
        Ok(())
    }

    /// Column-major dump of little-endian `f64` pairs `(re, im)`: all time
    /// steps of delay bin 0, then bin 1, and so on. No header; the shape
    /// lives in the run manifest.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for b in 0..self.delay_bins() {
            for k in 0..self.time_steps() {
                let z = self.values[(k, b)];
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Inverse of [`write_binary`](Self::write_binary).
    pub fn read_binary<R: Read>(
        mut input: R,
        time_steps: usize,
        delay_bins: usize,
        dt_s: f64,
        dtau_s: f64,
    ) -> std::io::Result<Self> {
        let mut grid = Self::zeros(time_steps, delay_bins, dt_s, dtau_s);
        let mut buf = [0u8; 16];
        for b in 0..delay_bins {
            for k in 0..time_steps {
                input.read_exact(&mut buf)?;
                let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
                let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
                grid.values[(k, b)] = Complex64::new(re, im);
            }
        }
        Ok(grid)
    }
}

/// How a path length maps to a delay bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayQuantization {
    /// `⌊d_s / (c δτ)⌋` on the full path length.
    #[default]
    TotalPath,
    /// `⌊d_MU / (c δτ)⌋ + ⌊d_BS / (c δτ)⌋`, the binning the convolution
    /// engine produces. Use it when comparing the two engines bin by bin.
    PerLeg,
}

impl DelayQuantization {
    #[inline]
    pub(crate) fn bin(self, bs_leg_m: f64, mu_leg_m: f64, bin_length_m: f64) -> usize {
        match self {
            DelayQuantization::TotalPath => ((bs_leg_m + mu_leg_m) / bin_length_m).floor() as usize,
            DelayQuantization::PerLeg => {
                (mu_leg_m / bin_length_m).floor() as usize + (bs_leg_m / bin_length_m).floor() as usize
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DirectOptions {
    pub include_los: bool,
    pub quantization: DelayQuantization,
    /// Time of output row 0.
    pub start_time_s: f64,
}

/// Direct simulation with total-path binning starting at t = 0.
pub fn simulate_direct(
    params: &ChannelParams,
    geo: &SceneGeometry,
    traj: &TrajectoryModel,
    grid: &GridSpec,
    scatterers: &ScattererSet,
    include_los: bool,
) -> Result<ImpulseResponseGrid> {
    let options = DirectOptions {
        include_los,
        ..DirectOptions::default()
    };
    simulate_direct_with(params, geo, traj, grid, scatterers, &options)
}

pub fn simulate_direct_with(
    params: &ChannelParams,
    geo: &SceneGeometry,
    traj: &TrajectoryModel,
    grid: &GridSpec,
    scatterers: &ScattererSet,
    options: &DirectOptions,
) -> Result<ImpulseResponseGrid> {
    let steps = grid.p_count;
    let bins = grid.d_count;
    traj.validate_horizon(options.start_time_s + (steps as f64 - 1.0) * grid.dt_s)?;
    let mut out = ImpulseResponseGrid::zeros(steps, bins, grid.dt_s, grid.dtau_s);
    out.t0_s = options.start_time_s;

    let radius = geo.disc_radius_m;
    let bin_len = grid.bin_length_m(params);
    let k = params.wave_number_per_m;
    let gain = params.ref_gain_scatter;
    let half_gamma = 0.5 * params.path_loss_exponent;
    let mu_y = traj.initial_y_m;

    for step in 0..steps {
        let t = out.time_at(step);
        let mu_x = traj.position_x(t);
        let mut row = out.values.row_mut(step);
        for s in scatterers.x_window(mu_x - radius, mu_x + radius) {
            let mu_leg = euclidean_distance(mu_x, mu_y, s.x_m, s.y_m);
            if mu_leg > radius {
                continue;
            }
            let bs_leg = euclidean_distance(geo.bs_x_m, geo.bs_y_m, s.x_m, s.y_m);
            let d = bs_leg + mu_leg;
            let bin = options.quantization.bin(bs_leg, mu_leg, bin_len);
            if bin >= bins {
                return Err(Error::DelayOverflow {
                    engine: "direct",
                    step,
                    bin,
                    limit: bins,
                });
            }
            let amp = gain.sqrt() * s.weight * d.powf(-half_gamma);
            row[bin] += Complex64::from_polar(amp, k * d);
        }
        if options.include_los {
            let (bin, z) = los_component(params, geo, traj, grid, t);
            if bin >= bins {
                return Err(Error::DelayOverflow {
                    engine: "direct",
                    step,
                    bin,
                    limit: bins,
                });
            }
            row[bin] += z;
        }
    }
    Ok(out)
}

/// LoS term `G_L^{1/2} d_L^{-γ/2} e^{j k d_L}` at time `t` and its bin.
pub fn los_component(
    params: &ChannelParams,
    geo: &SceneGeometry,
    traj: &TrajectoryModel,
    grid: &GridSpec,
    t: f64,
) -> (usize, Complex64) {
    let d = euclidean_distance(geo.bs_x_m, geo.bs_y_m, traj.position_x(t), traj.initial_y_m);
    let amp = params.amplitude(params.ref_gain_los, d);
    let bin = (d / grid.bin_length_m(params)).floor() as usize;
    (bin, Complex64::from_polar(amp, params.wave_number_per_m * d))
}

/// `P(t_k) = Σ_bins |h(t_k, bin)|²`.
pub fn received_power_trace(h: &ImpulseResponseGrid) -> Vec<f64> {
    h.values.rows().into_iter().map(|row| row.iter().map(|z| z.norm_sqr()).sum()).collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::levy_field::Scatterer;
    use crate::scene::{propagation_distance, GridSteps, Scenario};

    fn scenario() -> Scenario {
        Scenario::v2i_reference(100.0, 100.0, 0.0, GridSteps::default()).unwrap()
    }

    fn one(x: f64, y: f64, weight: f64) -> ScattererSet {
        ScattererSet::new(vec![Scatterer { x_m: x, y_m: y, weight, count: 1 }])
    }

    #[test]
    fn empty_set_gives_zero_grid() {
        let s = scenario();
        let h = simulate_direct(&s.params, &s.geo, &s.traj, &s.grid, &ScattererSet::default(), false).unwrap();
        assert_eq!(h.values.dim(), (s.grid.p_count, s.grid.d_count));
        assert!(h.values.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert!(received_power_trace(&h).iter().all(|&p| p == 0.0));
    }

    #[test]
    fn single_scatterer_hand_values() {
        let s = scenario();
        let h = simulate_direct(&s.params, &s.geo, &s.traj, &s.grid, &one(0.0, 5.0, 1.0), false).unwrap();
        let d = 10225.0_f64.sqrt() + 5.0;
        let bin = (d / (s.params.light_speed_m_per_s * s.grid.dtau_s)).floor() as usize;
        let row = h.values.row(0);
        for (b, z) in row.iter().enumerate() {
            if b == bin {
                assert_relative_eq!(z.norm(), s.params.ref_gain_scatter.sqrt() * d.powf(-0.85), max_relative = 1e-12);
            } else {
                assert_eq!(z.norm(), 0.0);
            }
        }
        let p = received_power_trace(&h);
        for (k, &pk) in p.iter().enumerate().take(300) {
            let t = k as f64 * s.grid.dt_s;
            let d = propagation_distance(&s.geo, &s.traj, t, 0.0, 5.0);
            if (s.traj.position_x(t) - 0.0).hypot(5.0) <= s.geo.disc_radius_m {
                assert_relative_eq!(pk, s.params.ref_gain_scatter * d.powf(-1.7), max_relative = 1e-12);
            } else {
                assert_eq!(pk, 0.0);
            }
        }
    }

    #[test]
    fn scatterer_outside_disc_is_silent() {
        let s = scenario();
        let r = s.geo.disc_radius_m;
        let h = simulate_direct(&s.params, &s.geo, &s.traj, &s.grid, &one(-1e-9, r + 1e-6, 1.0), false).unwrap();
        assert_eq!(received_power_trace(&h)[0], 0.0);
        let h = simulate_direct(&s.params, &s.geo, &s.traj, &s.grid, &one(0.0, r - 1e-6, 1.0), false).unwrap();
        assert!(received_power_trace(&h)[0] > 0.0);
    }

    #[test]
    fn power_trace_modulus_square() {
        let mut h = ImpulseResponseGrid::zeros(3, 4, 1e-3, 1e-8);
        h.values[(1, 2)] = Complex64::new(0.0, 2.0);
        assert_eq!(received_power_trace(&h), vec![0.0, 4.0, 0.0]);
    }

    #[test]
    fn los_only_grid() {
        let s = scenario();
        let h = simulate_direct(&s.params, &s.geo, &s.traj, &s.grid, &ScattererSet::default(), true).unwrap();
        let d0 = euclidean_distance(-100.0, 20.0, 0.0, 0.0);
        assert_relative_eq!(received_power_trace(&h)[0], s.params.ref_gain_los * d0.powf(-1.7), max_relative = 1e-12);
    }

    #[test]
    fn per_leg_binning_never_exceeds_total_path() {
        let bin_len = 3.0;
        for (bs, mu) in [(101.1187, 5.0), (99.0, 2.9), (3.0, 3.0)] {
            let total = DelayQuantization::TotalPath.bin(bs, mu, bin_len);
            let per_leg = DelayQuantization::PerLeg.bin(bs, mu, bin_len);
            assert!(per_leg <= total && total <= per_leg + 1);
        }
    }

    #[test]
    fn overflow_names_step() {
        let s = scenario();
        let steps = GridSteps {
            tau_max_s: 1e-6,
            ..GridSteps::default()
        };
        // a scatterer far away from the grid's bounding box
        let grid = crate::scene::GridSpec::new(steps, &s.params, &s.geo, &s.traj).unwrap();
        let far = one(5.0, 300.0, 1.0);
        let geo = SceneGeometry {
            disc_radius_m: 400.0,
            ..s.geo
        };
        let err = simulate_direct(&s.params, &geo, &s.traj, &grid, &far, false).unwrap_err();
        assert!(matches!(err, Error::DelayOverflow { step: 0, .. }), "{err}");
    }

    #[test]
    fn binary_round_trip() {
        let mut h = ImpulseResponseGrid::zeros(3, 2, 1e-3, 1e-8);
        h.values[(0, 1)] = Complex64::new(1.5, -2.0);
        h.values[(2, 0)] = Complex64::new(f64::MIN_POSITIVE, 3.0);
        let mut buf = Vec::new();
        h.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 3 * 2 * 16);
        // column-major: second entry is (t=1, bin 0)
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 0.0);
        let back = ImpulseResponseGrid::read_binary(&buf[..], 3, 2, 1e-3, 1e-8).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn receding_path_weakens() {
        // scatterer behind the MU: path length grows monotonically
        let s = scenario();
        let h = simulate_direct(&s.params, &s.geo, &s.traj, &s.grid, &one(-0.5, 1.0, 1.0), false).unwrap();
        let p = received_power_trace(&h);
        let alive: Vec<f64> = p.into_iter().take_while(|&x| x > 0.0).collect();
        assert!(alive.len() > 100);
        assert!(alive.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn phase_advances_with_path_length() {
        let s = scenario();
        let (x, y) = (3.0, -2.0);
        let h = simulate_direct(&s.params, &s.geo, &s.traj, &s.grid, &one(x, y, 1.0), false).unwrap();
        let gains: Vec<Complex64> = h.values.rows().into_iter().map(|r| r.sum()).collect();
        for k in 0..200 {
            let t0 = k as f64 * s.grid.dt_s;
            let d0 = propagation_distance(&s.geo, &s.traj, t0, x, y);
            let d1 = propagation_distance(&s.geo, &s.traj, t0 + s.grid.dt_s, x, y);
            let expected = s.params.wave_number_per_m * (d1 - d0);
            let got = (gains[k + 1] / gains[k]).arg();
            let diff = (expected - got + PI).rem_euclid(2.0 * PI) - PI;
            assert!(diff.abs() < 1e-9, "step {k}: {expected} vs {got}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn stationary_under_joint_translation(delta_steps in 1usize..400, seed in 0u64..1000) {
            let s = scenario();
            let field = crate::levy_field::sample_field(&s.grid, &s.geo, &s.traj, seed);
            let set = crate::levy_field::materialize_scatterers(&field, &s.grid, &s.traj);
            let delta = delta_steps as f64 * s.grid.dt_s;
            let shift = s.traj.initial_speed_m_per_s * delta;
            let a = simulate_direct(&s.params, &s.geo, &s.traj, &s.grid, &set, false).unwrap();
            let geo = SceneGeometry { bs_x_m: s.geo.bs_x_m + shift, ..s.geo };
            let opts = DirectOptions { start_time_s: delta, ..DirectOptions::default() };
            let b = simulate_direct_with(&s.params, &geo, &s.traj, &s.grid, &set.translated(shift, 0.0), &opts).unwrap();
            let pa = received_power_trace(&a);
            let pb = received_power_trace(&b);
            for (x, y) in pa.iter().zip(&pb) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-30));
            }
        }
    }
}
