use ndarray::Array2;
use num_complex::Complex64;

use crate::direct_sim::ImpulseResponseGrid;
use crate::error::{Error, Result};
use crate::scene::{backbone_coordinate, GridSpec, TrajectoryModel};

/// Slack for landing exactly on a backbone point.
const SNAP: f64 = 1e-9;

/// Backbone row index and interpolation weight for output step `step`.
pub fn warp_weights(traj: &TrajectoryModel, grid: &GridSpec, backbone_rows: usize, step: usize) -> Result<(usize, f64)> {
    let u = backbone_coordinate(traj, grid.dt_s, step);
    let mut j = u.floor();
    let mut alpha = u - j;
    if alpha > 1.0 - SNAP {
        j += 1.0;
        alpha = 0.0;
    } else if alpha < SNAP {
        alpha = 0.0;
    }
    let span = backbone_rows.saturating_sub(1) as f64;
    if j < 0.0 || j > span || (j == span && alpha > 0.0) {
        return Err(Error::HorizonExceeded {
            step,
            position: u,
            span,
        });
    }
    Ok((j as usize, alpha))
}

/// Resamples backbone rows (MU at `k·v_0Δ` for row `k`) at the true MU
/// positions by linear interpolation between neighbouring rows.
pub fn velocity_warp(backbone: &Array2<Complex64>, traj: &TrajectoryModel, grid: &GridSpec) -> Result<ImpulseResponseGrid> {
    let rows = backbone.nrows();
    let mut out = ImpulseResponseGrid::zeros(grid.p_count, backbone.ncols(), grid.dt_s, grid.dtau_s);
    for step in 0..grid.p_count {
        let (j, alpha) = warp_weights(traj, grid, rows, step)?;
        let mut dst = out.values.row_mut(step);
        if alpha == 0.0 {
            dst.assign(&backbone.row(j));
        } else {
            let (lo, hi) = (backbone.row(j), backbone.row(j + 1));
            for ((d, a), b) in dst.iter_mut().zip(lo).zip(hi) {
                *d = b * alpha + a * (1.0 - alpha);
            }
        }
    }
    Ok(out)
}
