//! Physical constants, scene geometry, MU trajectory and the shared
//! time/space/delay grid.
//!
//! Everything here is immutable once built and is shared by both engines.
//! Coordinates are SI throughout: metres, seconds, hertz. The MU starts at
//! `(0, initial_y_m)` and moves along +x.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light used for all delay computations.
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 2.997_924_58e8;

/// Relative slack applied to floor expressions so that ratios such as
/// `1.0 / 0.001` floor to 1000 rather than 999.
const FLOOR_SLACK: f64 = 1e-9;

pub(crate) fn floor_ratio(num: f64, den: f64) -> f64 {
    let r = num / den;
    (r + FLOOR_SLACK * r.abs().max(1.0)).floor()
}

fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::ParameterDomain {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::ParameterDomain {
            name,
            value,
            reason: "must be finite",
        })
    }
}

/// Reference power terms `G_s` and `G_L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ReferenceGains {
    /// `G_s = G_L = (λ/4π)²`, free-space isotropic antennas.
    Isotropic,
    Explicit { scatter: f64, los: f64 },
}

/// Radio parameters and physical constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub carrier_frequency_hz: f64,
    pub wavelength_m: f64,
    pub wave_number_per_m: f64,
    /// Path-loss exponent γ.
    pub path_loss_exponent: f64,
    /// `G_s`.
    pub ref_gain_scatter: f64,
    /// `G_L`.
    pub ref_gain_los: f64,
    pub light_speed_m_per_s: f64,
}

impl ChannelParams {
    pub fn new(
        carrier_frequency_hz: f64,
        path_loss_exponent: f64,
        gains: ReferenceGains,
    ) -> Result<Self> {
        require_positive("carrier_frequency_hz", carrier_frequency_hz)?;
        require_positive("path_loss_exponent", path_loss_exponent)?;
        let c = SPEED_OF_LIGHT_M_PER_S;
        let wavelength_m = c / carrier_frequency_hz;
        let (ref_gain_scatter, ref_gain_los) = match gains {
            ReferenceGains::Isotropic => {
                let g = (wavelength_m / (4.0 * PI)).powi(2);
                (g, g)
            }
            ReferenceGains::Explicit { scatter, los } => (
                require_positive("ref_gain_scatter", scatter)?,
                require_positive("ref_gain_los", los)?,
            ),
        };
        Ok(Self {
            carrier_frequency_hz,
            wavelength_m,
            wave_number_per_m: 2.0 * PI / wavelength_m,
            path_loss_exponent,
            ref_gain_scatter,
            ref_gain_los,
            light_speed_m_per_s: c,
        })
    }

    /// Isotropic reference gains at the given carrier.
    pub fn isotropic(carrier_frequency_hz: f64, path_loss_exponent: f64) -> Result<Self> {
        Self::new(carrier_frequency_hz, path_loss_exponent, ReferenceGains::Isotropic)
    }

    /// Maximum Doppler shift `f_c·v/c` at speed `v`.
    pub fn max_doppler_hz(&self, speed_m_per_s: f64) -> f64 {
        self.carrier_frequency_hz * speed_m_per_s / self.light_speed_m_per_s
    }

    /// Amplitude `G^{1/2} d^{-γ/2}` for a path of length `distance_m`.
    #[inline]
    pub(crate) fn amplitude(&self, gain: f64, distance_m: f64) -> f64 {
        gain.sqrt() * distance_m.powf(-0.5 * self.path_loss_exponent)
    }
}

/// Straight-line MU motion along +x with uniform acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryModel {
    pub initial_speed_m_per_s: f64,
    pub acceleration_m_per_s2: f64,
    pub initial_y_m: f64,
}

impl TrajectoryModel {
    pub fn new(initial_speed_m_per_s: f64, acceleration_m_per_s2: f64, initial_y_m: f64) -> Result<Self> {
        if !(initial_speed_m_per_s.is_finite() && initial_speed_m_per_s >= 0.0) {
            return Err(Error::ParameterDomain {
                name: "initial_speed_m_per_s",
                value: initial_speed_m_per_s,
                reason: "must be finite and non-negative",
            });
        }
        require_finite("acceleration_m_per_s2", acceleration_m_per_s2)?;
        require_finite("initial_y_m", initial_y_m)?;
        Ok(Self {
            initial_speed_m_per_s,
            acceleration_m_per_s2,
            initial_y_m,
        })
    }

    pub fn constant_speed(speed_m_per_s: f64) -> Result<Self> {
        Self::new(speed_m_per_s, 0.0, 0.0)
    }

    pub fn speed(&self, t: f64) -> f64 {
        self.initial_speed_m_per_s + self.acceleration_m_per_s2 * t
    }

    /// `∫_0^t v(ζ) dζ`, without the speed check.
    pub fn position_x(&self, t: f64) -> f64 {
        self.initial_speed_m_per_s * t + 0.5 * self.acceleration_m_per_s2 * t * t
    }

    /// Rejects trajectories whose speed turns negative before `horizon_s`.
    pub fn validate_horizon(&self, horizon_s: f64) -> Result<()> {
        // speed is affine in t, so the endpoints bound it
        for t in [0.0, horizon_s] {
            let v = self.speed(t);
            if v < 0.0 {
                return Err(Error::NegativeSpeed {
                    time_s: t,
                    speed_m_per_s: v,
                });
            }
        }
        Ok(())
    }
}

/// MU position at time `t`.
pub fn mu_position(traj: &TrajectoryModel, t: f64) -> Result<(f64, f64)> {
    let v = traj.speed(t);
    if v < 0.0 {
        return Err(Error::NegativeSpeed {
            time_s: t,
            speed_m_per_s: v,
        });
    }
    Ok((traj.position_x(t), traj.initial_y_m))
}

/// Base station, scattering disc and scatterer density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneGeometry {
    pub bs_x_m: f64,
    pub bs_y_m: f64,
    pub disc_radius_m: f64,
    pub scatterer_density_per_m2: f64,
    /// Mean number of resolvable paths `N_s`.
    pub mean_path_count: f64,
    /// Mean path arrival rate `R_s`.
    pub path_arrival_rate_per_s: f64,
}

impl SceneGeometry {
    /// Builds the scene from target path statistics `N_s`, `R_s`.
    pub fn from_path_statistics(
        bs: (f64, f64),
        mean_path_count: f64,
        path_arrival_rate_per_s: f64,
        initial_speed_m_per_s: f64,
    ) -> Result<Self> {
        let (disc_radius_m, scatterer_density_per_m2) =
            derive_geometry(mean_path_count, path_arrival_rate_per_s, initial_speed_m_per_s)?;
        Ok(Self {
            bs_x_m: require_finite("bs_x_m", bs.0)?,
            bs_y_m: require_finite("bs_y_m", bs.1)?,
            disc_radius_m,
            scatterer_density_per_m2,
            mean_path_count,
            path_arrival_rate_per_s,
        })
    }

    /// Builds the scene from an explicit radius and density. A zero density
    /// is allowed and yields an empty field.
    pub fn from_disc(
        bs: (f64, f64),
        disc_radius_m: f64,
        scatterer_density_per_m2: f64,
        initial_speed_m_per_s: f64,
    ) -> Result<Self> {
        require_positive("disc_radius_m", disc_radius_m)?;
        if !(scatterer_density_per_m2.is_finite() && scatterer_density_per_m2 >= 0.0) {
            return Err(Error::ParameterDomain {
                name: "scatterer_density_per_m2",
                value: scatterer_density_per_m2,
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self {
            bs_x_m: require_finite("bs_x_m", bs.0)?,
            bs_y_m: require_finite("bs_y_m", bs.1)?,
            disc_radius_m,
            scatterer_density_per_m2,
            mean_path_count: scatterer_density_per_m2 * PI * disc_radius_m * disc_radius_m,
            path_arrival_rate_per_s: 2.0 * disc_radius_m * initial_speed_m_per_s * scatterer_density_per_m2,
        })
    }
}

/// Solves `R = sqrt(N_s/(λ_s π))` and `λ_s = R_s/(2 R v_0)` for `(R, λ_s)`.
pub fn derive_geometry(
    mean_path_count: f64,
    path_arrival_rate_per_s: f64,
    initial_speed_m_per_s: f64,
) -> Result<(f64, f64)> {
    let ns = require_positive("mean_path_count", mean_path_count)?;
    let rs = require_positive("path_arrival_rate_per_s", path_arrival_rate_per_s)?;
    let v0 = require_positive("initial_speed_m_per_s", initial_speed_m_per_s)?;
    let radius = 2.0 * ns * v0 / (PI * rs);
    let density = rs / (2.0 * radius * v0);
    Ok((radius, density))
}

#[inline]
pub fn euclidean_distance(x1: f64, y1: f64, x2: f64, y2: f64) -> f64 {
    (x1 - x2).hypot(y1 - y2)
}

/// BS → scatterer → MU(t) single-bounce path length.
pub fn propagation_distance(
    scene: &SceneGeometry,
    traj: &TrajectoryModel,
    t: f64,
    scatterer_x_m: f64,
    scatterer_y_m: f64,
) -> f64 {
    let bs_leg = euclidean_distance(scene.bs_x_m, scene.bs_y_m, scatterer_x_m, scatterer_y_m);
    let mu_leg = euclidean_distance(
        traj.position_x(t),
        traj.initial_y_m,
        scatterer_x_m,
        scatterer_y_m,
    );
    bs_leg + mu_leg
}

/// User-chosen discretization steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSteps {
    /// Δ, time step.
    pub dt_s: f64,
    /// Λ, lateral space step.
    pub dy_m: f64,
    /// δτ, delay resolution.
    pub dtau_s: f64,
    pub tau_max_s: f64,
    pub t_max_s: f64,
}

impl Default for GridSteps {
    fn default() -> Self {
        Self {
            dt_s: 1e-3,
            dy_m: 0.25,
            dtau_s: 10e-9,
            tau_max_s: 1e-6,
            t_max_s: 1.0,
        }
    }
}

/// Discretization shared by both engines.
///
/// Field and kernel extents follow from the floor expressions
/// `M = ⌊R/Λ⌋`, `N = ⌊R/(v_0 Δ)⌋`, `P = ⌊T_max/Δ⌋`, `D = ⌊τ_max/δτ⌋`.
/// The lattice is laid on the constant-velocity backbone `x = j·v_0·Δ`;
/// `backbone_count` rows of that backbone cover the true (possibly
/// accelerated) trajectory over the `P` output steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dt_s: f64,
    pub dy_m: f64,
    pub dtau_s: f64,
    pub tau_max_s: f64,
    pub t_max_s: f64,
    pub m_half: usize,
    pub n_half: usize,
    pub p_count: usize,
    pub d_count: usize,
    pub backbone_count: usize,
    /// `v_0`, the speed the lattice is laid out with.
    pub backbone_speed_m_per_s: f64,
    /// Radius of the ambit set the kernels are truncated to.
    pub disc_radius_m: f64,
}

impl GridSpec {
    pub fn new(
        steps: GridSteps,
        params: &ChannelParams,
        geo: &SceneGeometry,
        traj: &TrajectoryModel,
    ) -> Result<Self> {
        let dt = require_positive("dt_s", steps.dt_s)?;
        let dy = require_positive("dy_m", steps.dy_m)?;
        let dtau = require_positive("dtau_s", steps.dtau_s)?;
        let tau_max = require_positive("tau_max_s", steps.tau_max_s)?;
        let t_max = require_positive("t_max_s", steps.t_max_s)?;
        let v0 = require_positive("initial_speed_m_per_s", traj.initial_speed_m_per_s)?;
        traj.validate_horizon(t_max)?;

        let r = geo.disc_radius_m;
        let m_half = floor_ratio(r, dy);
        let n_half = floor_ratio(r, v0 * dt);
        let p_count = floor_ratio(t_max, dt);
        let d_count = floor_ratio(tau_max, dtau);
        for (name, value) in [("m_half", m_half), ("n_half", n_half), ("p_count", p_count), ("d_count", d_count)] {
            if value < 1.0 {
                return Err(Error::config(
                    format!("grid.{name}"),
                    format!("derived index bound is {value}; refine the corresponding step"),
                ));
            }
        }
        let (m_half, n_half, p_count, d_count) =
            (m_half as usize, n_half as usize, p_count as usize, d_count as usize);

        let last_u = backbone_coordinate(traj, dt, p_count - 1);
        let backbone_count = (last_u + FLOOR_SLACK).floor() as usize + 2;

        let grid = Self {
            dt_s: dt,
            dy_m: dy,
            dtau_s: dtau,
            tau_max_s: tau_max,
            t_max_s: t_max,
            m_half,
            n_half,
            p_count,
            d_count,
            backbone_count,
            backbone_speed_m_per_s: v0,
            disc_radius_m: r,
        };

        let needed = grid.max_delay_bin(params, geo, traj);
        if needed >= d_count {
            let needed_tau = (needed + 1) as f64 * dtau;
            return Err(Error::config(
                "grid.tau_max_s",
                format!(
                    "delay grid has {d_count} bins but paths reach bin {needed}; tau_max_s must be at least {needed_tau:.3e}"
                ),
            ));
        }
        Ok(grid)
    }

    /// Backbone step `v_0 Δ` in metres.
    pub fn column_spacing_m(&self) -> f64 {
        self.backbone_speed_m_per_s * self.dt_s
    }

    pub fn cell_area_m2(&self) -> f64 {
        self.column_spacing_m() * self.dy_m
    }

    /// Time index of the first field column (`-N`).
    pub fn time_origin(&self) -> i64 {
        -(self.n_half as i64)
    }

    /// Field time columns `l ∈ [-N, B + N)`.
    pub fn field_time_columns(&self) -> usize {
        self.backbone_count + 2 * self.n_half
    }

    /// Lateral index of the first field column (`-M`).
    pub fn lateral_origin(&self) -> i64 {
        -(self.m_half as i64)
    }

    /// Lateral columns `i ∈ [-M, M]`.
    pub fn lateral_columns(&self) -> usize {
        2 * self.m_half + 1
    }

    /// Rows of the relative-offset kernel, offsets `j ∈ [-N, N]`.
    pub fn kernel_rows(&self) -> usize {
        2 * self.n_half + 1
    }

    /// x coordinate of field time index `l`.
    pub fn column_x(&self, time_index: i64) -> f64 {
        self.backbone_speed_m_per_s * (time_index as f64 * self.dt_s)
    }

    /// y coordinate of lateral index `i`.
    pub fn lateral_y(&self, traj: &TrajectoryModel, lateral_index: i64) -> f64 {
        traj.initial_y_m + lateral_index as f64 * self.dy_m
    }

    /// Delay-bin width in metres of path length, `c·δτ`.
    pub fn bin_length_m(&self, params: &ChannelParams) -> f64 {
        params.light_speed_m_per_s * self.dtau_s
    }

    /// Upper bound on any delay bin either engine can produce: per-leg floors
    /// over the bounding box of the field.
    fn max_delay_bin(&self, params: &ChannelParams, geo: &SceneGeometry, traj: &TrajectoryModel) -> usize {
        let bin = self.bin_length_m(params);
        let r = geo.disc_radius_m;
        let x_lo = self.column_x(self.time_origin()).min(-r);
        let x_hi = self
            .column_x(self.time_origin() + self.field_time_columns() as i64)
            .max(traj.position_x(self.t_max_s) + r);
        let y_lo = traj.initial_y_m - r - self.dy_m;
        let y_hi = traj.initial_y_m + r + self.dy_m;
        let far = [(x_lo, y_lo), (x_lo, y_hi), (x_hi, y_lo), (x_hi, y_hi)]
            .iter()
            .map(|&(x, y)| euclidean_distance(geo.bs_x_m, geo.bs_y_m, x, y))
            .fold(0.0, f64::max);
        // LoS distance is bounded by the same box
        let mu_leg_bins = (r / bin).floor() as usize;
        let bs_leg_bins = (far / bin).floor() as usize;
        let total_bins = ((far + r) / bin).floor() as usize;
        (mu_leg_bins + bs_leg_bins).max(total_bins)
    }
}

/// Position of output step `i` in backbone units (multiples of `v_0 Δ`),
/// following `x_i = x_{i-1} + v(iΔ)Δ`, `x_0 = 0`.
pub fn backbone_coordinate(traj: &TrajectoryModel, dt_s: f64, step: usize) -> f64 {
    let i = step as f64;
    i + traj.acceleration_m_per_s2 * dt_s * i * (i + 1.0) / (2.0 * traj.initial_speed_m_per_s)
}

/// Everything an engine run needs apart from the random field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub params: ChannelParams,
    pub geo: SceneGeometry,
    pub traj: TrajectoryModel,
    pub grid: GridSpec,
}

impl Scenario {
    pub fn new(
        params: ChannelParams,
        geo: SceneGeometry,
        traj: TrajectoryModel,
        steps: GridSteps,
    ) -> Result<Self> {
        let grid = GridSpec::new(steps, &params, &geo, &traj)?;
        Ok(Self {
            params,
            geo,
            traj,
            grid,
        })
    }

    /// The V2I reference scene: BS at (−100, 20), MU from the origin at
    /// 40 km/h, 2.6 GHz carrier, γ = 1.7, isotropic gains.
    pub fn v2i_reference(
        mean_path_count: f64,
        path_arrival_rate_per_s: f64,
        acceleration_m_per_s2: f64,
        steps: GridSteps,
    ) -> Result<Self> {
        let v0 = 40.0 / 3.6;
        let params = ChannelParams::isotropic(2.6e9, 1.7)?;
        let geo = SceneGeometry::from_path_statistics((-100.0, 20.0), mean_path_count, path_arrival_rate_per_s, v0)?;
        let traj = TrajectoryModel::new(v0, acceleration_m_per_s2, 0.0)?;
        Self::new(params, geo, traj, steps)
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    const V0: f64 = 11.111;

    #[test]
    fn derive_geometry_reference_scene() {
        let (r, lam) = derive_geometry(100.0, 100.0, V0).unwrap();
        assert_relative_eq!(r, 7.074, max_relative = 1e-3);
        assert_relative_eq!(lam, 0.6362, max_relative = 1e-3);
    }

    #[test]
    fn derive_geometry_unit_fixed_point() {
        // N_s = λπR² = π², R_s = 2Rv₀λ = 2π
        let (r, lam) = derive_geometry(PI * PI, 2.0 * PI, 1.0).unwrap();
        assert_relative_eq!(r, 1.0, max_relative = 1e-12);
        assert_relative_eq!(lam, PI, max_relative = 1e-12);
        let (r, lam) = derive_geometry(PI, 2.0 * PI, 1.0).unwrap();
        assert_relative_eq!(r, 1.0 / PI, max_relative = 1e-12);
        assert_relative_eq!(lam, PI * PI, max_relative = 1e-12);
    }

    #[test]
    fn derive_geometry_dense_scene_keeps_radius() {
        let (r, lam) = derive_geometry(5000.0, 5000.0, V0).unwrap();
        assert_relative_eq!(r, 7.074, max_relative = 1e-3);
        assert_relative_eq!(lam, 31.81, max_relative = 1e-3);
    }

    #[test]
    fn derive_geometry_rejects_non_positive() {
        for (n, r, v) in [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0), (f64::NAN, 1.0, 1.0)] {
            assert!(matches!(derive_geometry(n, r, v), Err(Error::ParameterDomain { .. })));
        }
    }

    #[test]
    fn distances() {
        assert_eq!(euclidean_distance(0.0, 0.0, 3.0, 4.0), 5.0);
        assert_eq!(euclidean_distance(1.5, -2.0, 1.5, -2.0), 0.0);
        assert_relative_eq!(euclidean_distance(-100.0, 20.0, 0.0, 5.0), 10225.0_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(euclidean_distance(-100.0, 20.0, 0.0, 5.0), 101.1187, max_relative = 1e-6);
    }

    fn reference_scene() -> SceneGeometry {
        SceneGeometry::from_path_statistics((-100.0, 20.0), 100.0, 100.0, V0).unwrap()
    }

    #[test]
    fn propagation_distance_examples() {
        let geo = reference_scene();
        let still = TrajectoryModel::new(V0, 0.0, 0.0).unwrap();
        let d = propagation_distance(&geo, &still, 0.0, 0.0, 5.0);
        assert_relative_eq!(d, 10225.0_f64.sqrt() + 5.0, max_relative = 1e-14);
        assert_relative_eq!(d, 106.1187, max_relative = 1e-6);

        // scatterer on top of the MU: only the BS leg remains
        let d = propagation_distance(&geo, &still, 0.0, 0.0, 0.0);
        assert_relative_eq!(d, euclidean_distance(-100.0, 20.0, 0.0, 0.0), max_relative = 1e-15);

        let d = propagation_distance(&geo, &still, 1.0, V0, 5.0);
        assert_relative_eq!(d, euclidean_distance(-100.0, 20.0, V0, 5.0) + 5.0, max_relative = 1e-14);
    }

    #[test]
    fn mu_position_examples() {
        let t = TrajectoryModel::new(V0, 0.0, 1.5).unwrap();
        assert_eq!(mu_position(&t, 0.0).unwrap(), (0.0, 1.5));
        let (x, y) = mu_position(&t, 2.0).unwrap();
        assert_relative_eq!(x, 22.222, max_relative = 1e-14);
        assert_eq!(y, 1.5);
        let t = TrajectoryModel::new(10.0, 2.0, 0.0).unwrap();
        assert_relative_eq!(mu_position(&t, 3.0).unwrap().0, 39.0, max_relative = 1e-15);
    }

    #[test]
    fn negative_speed_is_rejected() {
        let t = TrajectoryModel::new(1.0, -1.0, 0.0).unwrap();
        assert!(matches!(mu_position(&t, 2.0), Err(Error::NegativeSpeed { .. })));
        assert!(t.validate_horizon(0.5).is_ok());
        assert!(matches!(t.validate_horizon(1.5), Err(Error::NegativeSpeed { .. })));
    }

    #[test]
    fn isotropic_gains_and_wave_number() {
        let p = ChannelParams::isotropic(2.6e9, 1.7).unwrap();
        assert_relative_eq!(p.wavelength_m, SPEED_OF_LIGHT_M_PER_S / 2.6e9, max_relative = 1e-15);
        assert_relative_eq!(p.wave_number_per_m, 2.0 * PI / p.wavelength_m, max_relative = 1e-15);
        assert_relative_eq!(p.ref_gain_scatter, (p.wavelength_m / (4.0 * PI)).powi(2), max_relative = 1e-15);
        assert_eq!(p.ref_gain_scatter, p.ref_gain_los);
        assert_relative_eq!(p.max_doppler_hz(40.0 / 3.6), 96.35, max_relative = 1e-3);
    }

    #[test]
    fn grid_floor_expressions() {
        let s = Scenario::v2i_reference(100.0, 100.0, 0.0, GridSteps::default()).unwrap();
        let g = s.grid;
        let r = s.geo.disc_radius_m;
        assert_eq!(g.m_half, (r / 0.25).floor() as usize);
        assert_eq!(g.m_half, 28);
        assert_eq!(g.n_half, (r / (40.0 / 3.6 * 1e-3)).floor() as usize);
        assert_eq!(g.p_count, 1000);
        assert_eq!(g.d_count, 100);
        // constant velocity: backbone covers the P steps plus one guard row
        assert_eq!(g.backbone_count, 1001);
    }

    #[test]
    fn grid_rejects_short_delay_axis() {
        let steps = GridSteps {
            tau_max_s: 200e-9,
            ..GridSteps::default()
        };
        let err = Scenario::v2i_reference(100.0, 100.0, 0.0, steps).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "grid.tau_max_s"), "{err}");
    }

    #[test]
    fn grid_backbone_covers_acceleration() {
        let steps = GridSteps {
            t_max_s: 3.0,
            ..GridSteps::default()
        };
        let s = Scenario::v2i_reference(100.0, 100.0, 2.0, steps).unwrap();
        let last = backbone_coordinate(&s.traj, s.grid.dt_s, s.grid.p_count - 1);
        assert!(last < (s.grid.backbone_count - 1) as f64);
        assert!(s.grid.backbone_count > s.grid.p_count);
    }

    #[test]
    fn backbone_coordinate_matches_recursion() {
        let t = TrajectoryModel::new(10.0, 2.0, 0.0).unwrap();
        let dt = 0.1;
        let mut x = 0.0;
        for i in 1..50 {
            x += t.speed(i as f64 * dt) * dt;
            assert_relative_eq!(backbone_coordinate(&t, dt, i) * 10.0 * dt, x, max_relative = 1e-12);
        }
        assert_relative_eq!(backbone_coordinate(&t, dt, 1), 1.02, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn derived_geometry_round_trips(ns in 1.0f64..1e4, rs in 1.0f64..1e4, v0 in 0.5f64..60.0) {
            let (r, lam) = derive_geometry(ns, rs, v0).unwrap();
            let r_back = (ns / (lam * PI)).sqrt();
            let lam_back = rs / (2.0 * r * v0);
            prop_assert!(((r_back - r) / r).abs() < 1e-9);
            prop_assert!(((lam_back - lam) / lam).abs() < 1e-9);
        }

        #[test]
        fn path_never_shorter_than_los(sx in -50.0f64..50.0, sy in -50.0f64..50.0, t in 0.0f64..5.0) {
            let geo = reference_scene();
            let traj = TrajectoryModel::new(V0, 1.0, 0.0).unwrap();
            let (mx, my) = mu_position(&traj, t).unwrap();
            let los = euclidean_distance(geo.bs_x_m, geo.bs_y_m, mx, my);
            prop_assert!(propagation_distance(&geo, &traj, t, sx, sy) >= los - 1e-9);
        }

        #[test]
        fn halving_steps_doubles_counts(dt in 1e-4f64..1e-2, dtau in 1e-9f64..2e-8) {
            let steps = GridSteps { dt_s: dt, dtau_s: dtau, tau_max_s: 2e-6, ..GridSteps::default() };
            let half = GridSteps { dt_s: dt / 2.0, dtau_s: dtau / 2.0, ..steps };
            let a = Scenario::v2i_reference(100.0, 100.0, 0.0, steps).unwrap().grid;
            let b = Scenario::v2i_reference(100.0, 100.0, 0.0, half).unwrap().grid;
            prop_assert!(b.p_count >= 2 * a.p_count);
            prop_assert!(b.d_count >= 2 * a.d_count);
        }
    }
}
