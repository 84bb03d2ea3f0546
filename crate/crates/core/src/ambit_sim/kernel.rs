//! Kernel matrices of the discretized ambit integral.
//!
//! `x_mat` holds the unit-modulus MU-leg kernel over relative offsets
//! `j ∈ [-N, N]`, `y_mat` the BS-leg kernel weighted by the field over the
//! absolute field columns `l ∈ [-N, B + N)`. Every row of either matrix
//! carries at most one delay impulse, so both are stored as one optional
//! `(bin, value)` per row.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_field::LevyFieldRealization;
use crate::scene::{euclidean_distance, ChannelParams, GridSpec, SceneGeometry, TrajectoryModel};

/// Truncation of the MU-leg kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbitSetShape {
    /// Offsets within the disc of radius `R` around the MU.
    #[default]
    Disc,
    /// The disc restricted to scatterers strictly behind the MU.
    CausalHalfDisc,
}

/// A matrix with at most one nonzero per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseMatrix {
    row_origin: i64,
    cols: usize,
    entries: Vec<Option<(usize, Complex64)>>,
}

impl ImpulseMatrix {
    pub fn zeros(row_origin: i64, rows: usize, cols: usize) -> Self {
        Self {
            row_origin,
            cols,
            entries: vec![None; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Index (offset or time column) of row 0.
    pub fn row_origin(&self) -> i64 {
        self.row_origin
    }

    /// Entry of the row with absolute index `index`.
    pub fn entry(&self, index: i64) -> Option<(usize, Complex64)> {
        usize::try_from(index - self.row_origin)
            .ok()
            .and_then(|r| self.entries.get(r).copied().flatten())
    }

    pub fn entries(&self) -> &[Option<(usize, Complex64)>] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.rows(), self.cols));
        for (r, e) in self.entries.iter().enumerate() {
            if let Some((b, z)) = e {
                out[(r, *b)] = *z;
            }
        }
        out
    }

    /// Nonzero columns as dense time vectors, ordered by column.
    pub fn columns(&self) -> Vec<(usize, Vec<Complex64>)> {
        let mut cols: Vec<Option<Vec<Complex64>>> = vec![None; self.cols];
        for (r, e) in self.entries.iter().enumerate() {
            if let Some((b, z)) = e {
                if *z != Complex64::new(0.0, 0.0) {
                    cols[*b].get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); self.rows()])[r] = *z;
                }
            }
        }
        cols.into_iter().enumerate().filter_map(|(b, c)| c.map(|c| (b, c))).collect()
    }

    fn set(&mut self, row: usize, bin: usize, value: Complex64) -> Result<()> {
        if bin >= self.cols {
            return Err(Error::DelayOverflow {
                engine: "ambit",
                step: row,
                bin,
                limit: self.cols,
            });
        }
        self.entries[row] = Some((bin, value));
        Ok(())
    }
}

/// The two kernels of one lateral column.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrices {
    pub x_mat: ImpulseMatrix,
    pub y_mat: ImpulseMatrix,
    pub lateral_index: i64,
}

impl KernelMatrices {
    pub fn build(
        params: &ChannelParams,
        geo: &SceneGeometry,
        grid: &GridSpec,
        traj: &TrajectoryModel,
        field: &LevyFieldRealization,
        lateral_index: i64,
    ) -> Result<Self> {
        Ok(Self {
            x_mat: build_xmat(params, grid, traj, lateral_index)?,
            y_mat: build_ymat(params, geo, grid, traj, field, lateral_index)?,
            lateral_index,
        })
    }
}

fn check_lateral(grid: &GridSpec, lateral_index: i64) -> Result<()> {
    if lateral_index.unsigned_abs() as usize > grid.m_half {
        return Err(Error::Precondition(format!(
            "lateral index {lateral_index} outside [-{m}, {m}]",
            m = grid.m_half
        )));
    }
    Ok(())
}

/// MU-leg kernel over the full disc.
pub fn build_xmat(params: &ChannelParams, grid: &GridSpec, traj: &TrajectoryModel, lateral_index: i64) -> Result<ImpulseMatrix> {
    build_xmat_with(params, grid, traj, lateral_index, AmbitSetShape::Disc)
}

/// Row `j + N` holds `e^{j k d_1}` at bin `⌊d_1/(c δτ)⌋`, with
/// `d_1 = |(j v_0 Δ, iΛ)|`, for offsets inside the ambit set.
pub fn build_xmat_with(
    params: &ChannelParams,
    grid: &GridSpec,
    _traj: &TrajectoryModel,
    lateral_index: i64,
    shape: AmbitSetShape,
) -> Result<ImpulseMatrix> {
    check_lateral(grid, lateral_index)?;
    let n = grid.n_half as i64;
    let bin_len = grid.bin_length_m(params);
    let dy = lateral_index as f64 * grid.dy_m;
    let mut x = ImpulseMatrix::zeros(-n, grid.kernel_rows(), grid.d_count);
    for j in -n..=n {
        if shape == AmbitSetShape::CausalHalfDisc && j >= 0 {
            continue;
        }
        let d1 = euclidean_distance(0.0, 0.0, grid.column_x(j), dy);
        if d1 > grid.disc_radius_m {
            continue;
        }
        let bin = (d1 / bin_len).floor() as usize;
        x.set((j + n) as usize, bin, Complex64::from_polar(1.0, params.wave_number_per_m * d1))?;
    }
    Ok(x)
}

/// Field-independent part of `y_mat`: bin and `G_s^{1/2} d_2^{-γ/2} e^{j k d_2}`
/// for every field column.
pub(crate) fn ymat_geometry(
    params: &ChannelParams,
    geo: &SceneGeometry,
    grid: &GridSpec,
    traj: &TrajectoryModel,
    lateral_index: i64,
) -> Result<Vec<(usize, Complex64)>> {
    check_lateral(grid, lateral_index)?;
    let bin_len = grid.bin_length_m(params);
    let y = grid.lateral_y(traj, lateral_index);
    (0..grid.field_time_columns())
        .map(|r| {
            let l = grid.time_origin() + r as i64;
            let d2 = euclidean_distance(geo.bs_x_m, geo.bs_y_m, grid.column_x(l), y);
            let bin = (d2 / bin_len).floor() as usize;
            if bin >= grid.d_count {
                return Err(Error::DelayOverflow {
                    engine: "ambit",
                    step: r,
                    bin,
                    limit: grid.d_count,
                });
            }
            let amp = params.amplitude(params.ref_gain_scatter, d2);
            Ok((bin, Complex64::from_polar(amp, params.wave_number_per_m * d2)))
        })
        .collect()
}

/// BS-leg kernel weighted by `σ·∇L`. Row `l + N` corresponds to field time
/// column `l`; rows with an empty cell stay zero.
pub fn build_ymat(
    params: &ChannelParams,
    geo: &SceneGeometry,
    grid: &GridSpec,
    traj: &TrajectoryModel,
    field: &LevyFieldRealization,
    lateral_index: i64,
) -> Result<ImpulseMatrix> {
    field.check_grid(grid)?;
    let geometry = ymat_geometry(params, geo, grid, traj, lateral_index)?;
    let mut y = ImpulseMatrix::zeros(grid.time_origin(), geometry.len(), grid.d_count);
    for (r, &(bin, g)) in geometry.iter().enumerate() {
        let (count, sigma) = field.cell(grid.time_origin() + r as i64, lateral_index);
        if count == 0 {
            continue;
        }
        y.set(r, bin, g * (f64::from(count) * sigma))?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::scene::{GridSteps, Scenario};

    fn scenario() -> Scenario {
        Scenario::v2i_reference(100.0, 100.0, 0.0, GridSteps::default()).unwrap()
    }

    #[test]
    fn xmat_coincident_point() {
        let s = scenario();
        let x = build_xmat(&s.params, &s.grid, &s.traj, 0).unwrap();
        assert_eq!(x.entry(0), Some((0, Complex64::new(1.0, 0.0))));
        assert_eq!(x.rows(), 2 * s.grid.n_half + 1);
    }

    #[test]
    fn xmat_lateral_five_metres() {
        let s = scenario();
        let x = build_xmat(&s.params, &s.grid, &s.traj, 20).unwrap();
        let (bin, z) = x.entry(0).unwrap();
        assert_eq!(bin, (5.0 / s.grid.bin_length_m(&s.params)).floor() as usize);
        assert_relative_eq!(z.re, (s.params.wave_number_per_m * 5.0).cos(), epsilon = 1e-12);
        assert_relative_eq!(z.im, (s.params.wave_number_per_m * 5.0).sin(), epsilon = 1e-12);
    }

    #[test]
    fn xmat_unit_modulus_and_disc() {
        let s = scenario();
        for i in [-28, -7, 0, 13, 28] {
            let x = build_xmat(&s.params, &s.grid, &s.traj, i).unwrap();
            for (r, e) in x.entries().iter().enumerate() {
                let j = r as i64 + x.row_origin();
                let inside = s.grid.column_x(j).hypot(i as f64 * s.grid.dy_m) <= s.grid.disc_radius_m;
                assert_eq!(e.is_some(), inside);
                if let Some((_, z)) = e {
                    assert_relative_eq!(z.norm(), 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn causal_half_disc_drops_forward_offsets() {
        let s = scenario();
        let x = build_xmat_with(&s.params, &s.grid, &s.traj, 3, AmbitSetShape::CausalHalfDisc).unwrap();
        let full = build_xmat(&s.params, &s.grid, &s.traj, 3).unwrap();
        for j in -(s.grid.n_half as i64)..=s.grid.n_half as i64 {
            if j < 0 {
                assert_eq!(x.entry(j), full.entry(j));
            } else {
                assert_eq!(x.entry(j), None);
            }
        }
    }

    #[test]
    fn lateral_index_out_of_range() {
        let s = scenario();
        assert!(build_xmat(&s.params, &s.grid, &s.traj, 29).is_err());
    }

    #[test]
    fn ymat_empty_field_is_zero() {
        let s = scenario();
        let field = LevyFieldRealization::empty(&s.grid);
        let y = build_ymat(&s.params, &s.geo, &s.grid, &s.traj, &field, 4).unwrap();
        assert_eq!(y.nnz(), 0);
    }

    #[test]
    fn ymat_hand_value_and_linearity() {
        let s = scenario();
        let mut field = LevyFieldRealization::empty(&s.grid);
        field.set_cell(0, 20, 1, 1.0).unwrap();
        let y = build_ymat(&s.params, &s.geo, &s.grid, &s.traj, &field, 20).unwrap();
        let (bin, z) = y.entry(0).unwrap();
        let d2 = 10225.0_f64.sqrt();
        assert_relative_eq!(d2, 101.1187, max_relative = 1e-6);
        assert_eq!(bin, (d2 / s.grid.bin_length_m(&s.params)).floor() as usize);
        assert_relative_eq!(z.norm(), s.params.ref_gain_scatter.sqrt() * d2.powf(-0.85), max_relative = 1e-12);
        assert_eq!(y.nnz(), 1);

        field.set_cell(0, 20, 2, 1.0).unwrap();
        let y2 = build_ymat(&s.params, &s.geo, &s.grid, &s.traj, &field, 20).unwrap();
        assert_relative_eq!(y2.entry(0).unwrap().1.norm(), 2.0 * z.norm(), max_relative = 1e-12);
    }

    #[test]
    fn columns_match_dense() {
        let s = scenario();
        let x = build_xmat(&s.params, &s.grid, &s.traj, 5).unwrap();
        let dense = x.to_dense();
        for (b, col) in x.columns() {
            for (r, z) in col.iter().enumerate() {
                assert_eq!(*z, dense[(r, b)]);
            }
        }
        let total: usize = x.columns().iter().map(|(_, c)| c.iter().filter(|z| z.norm() > 0.0).count()).sum();
        assert_eq!(total, x.nnz());
    }
}
