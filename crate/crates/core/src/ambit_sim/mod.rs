//! Fast engine: the channel as a discretized ambit integral, evaluated by
//! per-lateral-column 2D convolutions on a constant-velocity backbone and
//! resampled at the true MU positions.
//!
//! Alignment: field row `q` is time column `l = q - N`, kernel row `p` is
//! offset `j = p - N`, and the full convolution row `r` collects
//! `Σ_l y[l]·x[l - (r - 2N)]`. Row `r` is therefore the MU at backbone
//! index `k = r - 2N`, and the backbone is the crop `[2N, 2N + B)`.

mod conv;
mod kernel;
mod warp;

use std::time::Instant;

use ndarray::s;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use conv::{conv2d_fold_accumulate, FftSetup, FoldConvolver, KernelSpectrum};
pub use kernel::{build_xmat, build_xmat_with, build_ymat, AmbitSetShape, ImpulseMatrix, KernelMatrices};
pub use warp::{velocity_warp, warp_weights};

use crate::direct_sim::{los_component, ImpulseResponseGrid};
use crate::error::{Error, Result};
use crate::levy_field::LevyFieldRealization;
use crate::scene::{ChannelParams, GridSpec, SceneGeometry, TrajectoryModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AmbitOptions {
    pub include_los: bool,
    pub shape: AmbitSetShape,
}

/// Wall-clock seconds per phase of one run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseTimings {
    /// Kernel spectra and geometry, amortized over realizations.
    pub plan_s: f64,
    /// Field-weighted `y_mat` columns.
    pub build_s: f64,
    pub convolve_s: f64,
    pub warp_s: f64,
}

impl PhaseTimings {
    pub fn total_s(&self) -> f64 {
        self.plan_s + self.build_s + self.convolve_s + self.warp_s
    }
}

impl std::ops::AddAssign for PhaseTimings {
    fn add_assign(&mut self, rhs: Self) {
        self.plan_s += rhs.plan_s;
        self.build_s += rhs.build_s;
        self.convolve_s += rhs.convolve_s;
        self.warp_s += rhs.warp_s;
    }
}

struct LateralColumn {
    index: i64,
    kernel: KernelSpectrum,
    /// Per field row: bin and field-independent BS-leg factor.
    geometry: Vec<(usize, Complex64)>,
}

/// Field-independent state of the engine for one scenario. Build once, run
/// for many realizations.
pub struct AmbitPlan {
    params: ChannelParams,
    geo: SceneGeometry,
    traj: TrajectoryModel,
    grid: GridSpec,
    options: AmbitOptions,
    setup: FftSetup,
    columns: Vec<LateralColumn>,
    plan_s: f64,
}

impl AmbitPlan {
    pub fn new(
        params: &ChannelParams,
        geo: &SceneGeometry,
        traj: &TrajectoryModel,
        grid: &GridSpec,
        options: AmbitOptions,
    ) -> Result<Self> {
        let started = Instant::now();
        traj.validate_horizon(grid.t_max_s)?;
        let setup = FftSetup::new(grid.kernel_rows());
        let m = grid.m_half as i64;
        let columns = (-m..=m)
            .map(|i| {
                let x = build_xmat_with(params, grid, traj, i, options.shape)?;
                Ok(LateralColumn {
                    index: i,
                    kernel: setup.kernel_from_impulses(&x)?,
                    geometry: kernel::ymat_geometry(params, geo, grid, traj, i)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: *params,
            geo: *geo,
            traj: *traj,
            grid: *grid,
            options,
            setup,
            columns,
            plan_s: started.elapsed().as_secs_f64(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Seconds spent building the plan.
    pub fn plan_seconds(&self) -> f64 {
        self.plan_s
    }

    /// Convolution output on the backbone, `B × D`, before warping.
    pub fn backbone_response(&self, field: &LevyFieldRealization) -> Result<(ndarray::Array2<Complex64>, PhaseTimings)> {
        field.check_grid(&self.grid)?;
        let mut timings = PhaseTimings::default();
        let rows = self.grid.field_time_columns();
        let d = self.grid.d_count;
        let mut conv = FoldConvolver::new(self.setup.clone(), rows, d);
        let mut slots: Vec<Option<Vec<Complex64>>> = vec![None; d];
        for col in &self.columns {
            let started = Instant::now();
            for (r, &(bin, g)) in col.geometry.iter().enumerate() {
                let (count, sigma) = field.cell(self.grid.time_origin() + r as i64, col.index);
                if count == 0 || sigma == 0.0 {
                    continue;
                }
                slots[bin].get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); rows])[r] = g * (f64::from(count) * sigma);
            }
            let y_cols: Vec<(usize, Vec<Complex64>)> = slots
                .iter_mut()
                .enumerate()
                .filter_map(|(b, c)| c.take().map(|c| (b, c)))
                .collect();
            timings.build_s += started.elapsed().as_secs_f64();

            let started = Instant::now();
            conv.accumulate(&col.kernel, &y_cols)?;
            timings.convolve_s += started.elapsed().as_secs_f64();
        }
        let started = Instant::now();
        let full = conv.finish();
        let n2 = 2 * self.grid.n_half;
        let backbone = full.slice(s![n2..n2 + self.grid.backbone_count, ..]).to_owned();
        timings.convolve_s += started.elapsed().as_secs_f64();
        Ok((backbone, timings))
    }

    /// One realization: convolve, warp to the true trajectory, add LoS.
    pub fn run(&self, field: &LevyFieldRealization) -> Result<(ImpulseResponseGrid, PhaseTimings)> {
        let (backbone, mut timings) = self.backbone_response(field)?;
        let started = Instant::now();
        let mut h = velocity_warp(&backbone, &self.traj, &self.grid)?;
        if self.options.include_los {
            for step in 0..self.grid.p_count {
                let (bin, z) = los_component(&self.params, &self.geo, &self.traj, &self.grid, h.time_at(step));
                if bin >= self.grid.d_count {
                    return Err(Error::DelayOverflow {
                        engine: "ambit",
                        step,
                        bin,
                        limit: self.grid.d_count,
                    });
                }
                h.values[(step, bin)] += z;
            }
        }
        timings.warp_s = started.elapsed().as_secs_f64();
        Ok((h, timings))
    }
}

/// One-shot run over the full disc.
pub fn simulate_ambit(
    params: &ChannelParams,
    geo: &SceneGeometry,
    traj: &TrajectoryModel,
    grid: &GridSpec,
    field: &LevyFieldRealization,
    include_los: bool,
) -> Result<ImpulseResponseGrid> {
    let options = AmbitOptions {
        include_los,
        ..AmbitOptions::default()
    };
    simulate_ambit_with(params, geo, traj, grid, field, options).map(|(h, _)| h)
}

pub fn simulate_ambit_with(
    params: &ChannelParams,
    geo: &SceneGeometry,
    traj: &TrajectoryModel,
    grid: &GridSpec,
    field: &LevyFieldRealization,
    options: AmbitOptions,
) -> Result<(ImpulseResponseGrid, PhaseTimings)> {
    let plan = AmbitPlan::new(params, geo, traj, grid, options)?;
    let (h, mut timings) = plan.run(field)?;
    timings.plan_s = plan.plan_seconds();
    Ok((h, timings))
}
