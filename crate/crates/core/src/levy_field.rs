//! Poisson Lévy basis and Gaussian volatility sampled on the shared
//! time/space lattice, plus the discrete scatterer set it implies.
//!
//! Each field time column draws from its own ChaCha stream keyed by the
//! absolute time index, so a cell's value depends only on
//! `(seed, time index, lateral index)` and realizations can be produced in
//! any order or in parallel.

use std::io::Write;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::scene::{GridSpec, SceneGeometry, TrajectoryModel};

/// Options for [`sample_field_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOptions {
    /// Standard deviation of the per-cell volatility draw.
    pub volatility_std: f64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self { volatility_std: 1.0 }
    }
}

/// One realization of the Lévy basis on the grid.
///
/// Rows are time columns `l = time_origin + row`, columns are lateral
/// indices `i = lateral_origin + col`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyFieldRealization {
    increments: Array2<u32>,
    volatilities: Array2<f64>,
    time_origin: i64,
    lateral_origin: i64,
    cell_area_m2: f64,
    seed: u64,
}

impl LevyFieldRealization {
    /// Assembles a field from explicit matrices. Used for constructed test
    /// scenes and for merging realizations.
    pub fn from_parts(
        increments: Array2<u32>,
        volatilities: Array2<f64>,
        time_origin: i64,
        lateral_origin: i64,
        cell_area_m2: f64,
        seed: u64,
    ) -> Result<Self> {
        if increments.dim() != volatilities.dim() {
            return Err(Error::ShapeMismatch(format!(
                "increments {:?} vs volatilities {:?}",
                increments.dim(),
                volatilities.dim()
            )));
        }
        Ok(Self {
            increments,
            volatilities,
            time_origin,
            lateral_origin,
            cell_area_m2,
            seed,
        })
    }

    /// An all-zero field shaped for `grid`.
    pub fn empty(grid: &GridSpec) -> Self {
        let shape = (grid.field_time_columns(), grid.lateral_columns());
        Self {
            increments: Array2::zeros(shape),
            volatilities: Array2::zeros(shape),
            time_origin: grid.time_origin(),
            lateral_origin: grid.lateral_origin(),
            cell_area_m2: grid.cell_area_m2(),
            seed: 0,
        }
    }

    pub fn increments(&self) -> &Array2<u32> {
        &self.increments
    }

    pub fn volatilities(&self) -> &Array2<f64> {
        &self.volatilities
    }

    pub fn time_origin(&self) -> i64 {
        self.time_origin
    }

    pub fn lateral_origin(&self) -> i64 {
        self.lateral_origin
    }

    pub fn cell_area_m2(&self) -> f64 {
        self.cell_area_m2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Increment and volatility at absolute indices, zero outside the field.
    pub fn cell(&self, time_index: i64, lateral_index: i64) -> (u32, f64) {
        let r = time_index - self.time_origin;
        let c = lateral_index - self.lateral_origin;
        if r < 0 || c < 0 {
            return (0, 0.0);
        }
        let (r, c) = (r as usize, c as usize);
        match (self.increments.get((r, c)), self.volatilities.get((r, c))) {
            (Some(&n), Some(&s)) => (n, s),
            _ => (0, 0.0),
        }
    }

    /// Sets one cell. Indices are absolute.
    pub fn set_cell(&mut self, time_index: i64, lateral_index: i64, count: u32, volatility: f64) -> Result<()> {
        let r = usize::try_from(time_index - self.time_origin);
        let c = usize::try_from(lateral_index - self.lateral_origin);
        match (r, c) {
            (Ok(r), Ok(c)) if r < self.increments.nrows() && c < self.increments.ncols() => {
                self.increments[(r, c)] = count;
                self.volatilities[(r, c)] = volatility;
                Ok(())
            }
            _ => Err(Error::ShapeMismatch(format!(
                "cell ({time_index}, {lateral_index}) outside field"
            ))),
        }
    }

    pub fn total_count(&self) -> u64 {
        self.increments.iter().map(|&n| u64::from(n)).sum()
    }

    pub(crate) fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        let want = (grid.field_time_columns(), grid.lateral_columns());
        if self.increments.dim() != want
            || self.time_origin != grid.time_origin()
            || self.lateral_origin != grid.lateral_origin()
        {
            return Err(Error::ShapeMismatch(format!(
                "field {:?} at origin ({}, {}) does not match grid {:?} at ({}, {})",
                self.increments.dim(),
                self.time_origin,
                self.lateral_origin,
                want,
                grid.time_origin(),
                grid.lateral_origin()
            )));
        }
        Ok(())
    }
}

/// Seed of realization `index` under `base_seed` (SplitMix64 finalizer).
pub fn realization_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples a field with unit-variance volatilities.
pub fn sample_field(grid: &GridSpec, geo: &SceneGeometry, traj: &TrajectoryModel, seed: u64) -> LevyFieldRealization {
    sample_field_with(grid, geo, traj, seed, &FieldOptions::default())
}

/// Samples Poisson counts with mean `λ_s·v_0Δ·Λ` and independent
/// zero-mean Gaussian volatilities for every cell.
pub fn sample_field_with(
    grid: &GridSpec,
    geo: &SceneGeometry,
    _traj: &TrajectoryModel,
    seed: u64,
    options: &FieldOptions,
) -> LevyFieldRealization {
    let rows = grid.field_time_columns();
    let cols = grid.lateral_columns();
    let cell_area = grid.cell_area_m2();
    let mean = geo.scatterer_density_per_m2 * cell_area;
    let poisson = (mean > 0.0).then(|| Poisson::new(mean).expect("finite positive mean"));

    let mut increments = Array2::<u32>::zeros((rows, cols));
    let mut volatilities = Array2::<f64>::zeros((rows, cols));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 0..rows {
        let time_index = grid.time_origin() + r as i64;
        rng.set_stream(time_index as u64);
        rng.set_word_pos(0);
        for c in 0..cols {
            let count = match &poisson {
                Some(p) => p.sample(&mut rng) as u32,
                None => 0,
            };
            let z: f64 = rng.sample(StandardNormal);
            increments[(r, c)] = count;
            volatilities[(r, c)] = options.volatility_std * z;
        }
    }
    LevyFieldRealization {
        increments,
        volatilities,
        time_origin: grid.time_origin(),
        lateral_origin: grid.lateral_origin(),
        cell_area_m2: cell_area,
        seed,
    }
}

/// A point scatterer at a cell corner. `weight` folds the cell's count into
/// its volatility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub x_m: f64,
    pub y_m: f64,
    pub weight: f64,
    pub count: u32,
}

/// The scatterers implied by a field, ordered by x.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScattererSet {
    scatterers: Vec<Scatterer>,
}

impl ScattererSet {
    pub fn new(mut scatterers: Vec<Scatterer>) -> Self {
        scatterers.sort_by(|a, b| a.x_m.total_cmp(&b.x_m).then(a.y_m.total_cmp(&b.y_m)));
        Self { scatterers }
    }

    pub fn as_slice(&self) -> &[Scatterer] {
        &self.scatterers
    }

    pub fn len(&self) -> usize {
        self.scatterers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scatterers.is_empty()
    }

    /// Scatterers with `x ∈ [x_lo, x_hi]`.
    pub fn x_window(&self, x_lo: f64, x_hi: f64) -> &[Scatterer] {
        let start = self.scatterers.partition_point(|s| s.x_m < x_lo);
        let end = self.scatterers.partition_point(|s| s.x_m <= x_hi);
        &self.scatterers[start..end.max(start)]
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self::new(
            self.scatterers
                .iter()
                .map(|s| Scatterer {
                    x_m: s.x_m + dx,
                    y_m: s.y_m + dy,
                    ..*s
                })
                .collect(),
        )
    }

    /// Writes `x_m,y_m,weight` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x_m,y_m,weight")?;
        for s in &self.scatterers {
            writeln!(out, "{},{},{}", s.x_m, s.y_m, s.weight)?;
        }
        Ok(())
    }

    /// Scatterer count (with multiplicity) within `radius` of a point.
    pub fn population_within(&self, x: f64, y: f64, radius: f64) -> u64 {
        self.x_window(x - radius, x + radius)
            .iter()
            .filter(|s| (s.x_m - x).hypot(s.y_m - y) <= radius)
            .map(|s| u64::from(s.count))
            .sum()
    }

    /// Scatterers (with multiplicity) that enter the MU's disc during
    /// `(0, t_end]`: outside the disc at t = 0 and inside it later.
    pub fn fresh_arrivals(&self, traj: &TrajectoryModel, radius: f64, t_end: f64) -> u64 {
        let x_start = traj.position_x(0.0);
        let x_end = traj.position_x(t_end);
        self.x_window(x_start - radius, x_end + radius)
            .iter()
            .filter_map(|s| {
                let dy = s.y_m - traj.initial_y_m;
                let half_chord2 = radius * radius - dy * dy;
                (half_chord2 >= 0.0).then(|| (s, s.x_m - half_chord2.sqrt()))
            })
            .filter(|&(_, entry_x)| entry_x > x_start && entry_x <= x_end)
            .map(|(s, _)| u64::from(s.count))
            .sum()
    }
}

/// One scatterer per non-empty cell, at the cell's lower corner
/// `(l·v_0Δ, y_i + i·Λ)`, with weight `count × volatility`.
pub fn materialize_scatterers(
    field: &LevyFieldRealization,
    grid: &GridSpec,
    traj: &TrajectoryModel,
) -> ScattererSet {
    let mut out = Vec::new();
    for ((r, c), &count) in field.increments.indexed_iter() {
        if count == 0 {
            continue;
        }
        let time_index = field.time_origin + r as i64;
        let lateral_index = field.lateral_origin + c as i64;
        out.push(Scatterer {
            x_m: grid.column_x(time_index),
            y_m: grid.lateral_y(traj, lateral_index),
            weight: f64::from(count) * field.volatilities[(r, c)],
            count,
        });
    }
    ScattererSet::new(out)
}
