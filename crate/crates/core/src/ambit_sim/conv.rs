//! Time-axis FFT convolution with delay-axis impulse composition.
//!
//! Along delay, kernels are sums of impulses, so a pair of occupied columns
//! `(b1, b2)` lands in column `b1 + b2` and only occupied columns are ever
//! transformed. Along time the y columns are cut into overlap-add blocks;
//! spectra for the same (block, output column) accumulate across lateral
//! columns and are inverted once at the end.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::kernel::ImpulseMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MIN_FFT_LEN: usize = 16;

/// Block layout and FFT plans for kernels with `x_rows` rows.
#[derive(Clone)]
pub struct FftSetup {
    x_rows: usize,
    fft_len: usize,
    block_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftSetup")
            .field("x_rows", &self.x_rows)
            .field("fft_len", &self.fft_len)
            .field("block_len", &self.block_len)
            .finish()
    }
}

impl FftSetup {
    pub fn new(x_rows: usize) -> Self {
        let x_rows = x_rows.max(1);
        let fft_len = (4 * x_rows).next_power_of_two().max(MIN_FFT_LEN);
        let mut planner = FftPlanner::new();
        Self {
            x_rows,
            fft_len,
            block_len: fft_len - x_rows + 1,
            forward: planner.plan_fft_forward(fft_len),
            inverse: planner.plan_fft_inverse(fft_len),
        }
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Spectra of the time-reversed occupied columns of a sparse kernel.
    pub fn kernel_from_impulses(&self, x: &ImpulseMatrix) -> Result<KernelSpectrum> {
        self.kernel_from_columns(x.rows(), x.columns())
    }

    /// Spectra of the time-reversed nonzero columns of a dense kernel.
    pub fn kernel_from_dense(&self, x: &Array2<Complex64>) -> Result<KernelSpectrum> {
        let cols = x
            .columns()
            .into_iter()
            .enumerate()
            .filter(|(_, c)| c.iter().any(|z| *z != ZERO))
            .map(|(b, c)| (b, c.to_vec()))
            .collect();
        self.kernel_from_columns(x.nrows(), cols)
    }

    fn kernel_from_columns(&self, rows: usize, cols: Vec<(usize, Vec<Complex64>)>) -> Result<KernelSpectrum> {
        if rows != self.x_rows {
            return Err(Error::ShapeMismatch(format!(
                "kernel has {rows} rows, setup expects {}",
                self.x_rows
            )));
        }
        let mut scratch = vec![ZERO; self.forward.get_inplace_scratch_len()];
        let columns = cols
            .into_iter()
            .map(|(b, col)| {
                let mut buf = vec![ZERO; self.fft_len];
                for (r, z) in col.iter().rev().enumerate() {
                    buf[r] = *z;
                }
                self.forward.process_with_scratch(&mut buf, &mut scratch);
                (b, buf)
            })
            .collect();
        Ok(KernelSpectrum { columns })
    }
}

/// Transformed kernel columns, reusable across realizations.
#[derive(Debug, Clone)]
pub struct KernelSpectrum {
    columns: Vec<(usize, Vec<Complex64>)>,
}

impl KernelSpectrum {
    pub fn occupied_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.columns.iter().map(|(b, _)| *b)
    }
}

/// Accumulates `Σ_i conv(y_i, reverse(x_i))` for a fixed output shape.
pub struct FoldConvolver {
    setup: FftSetup,
    y_rows: usize,
    out_cols: usize,
    blocks: usize,
    spectra: Vec<Option<Vec<Complex64>>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl FoldConvolver {
    pub fn new(setup: FftSetup, y_rows: usize, out_cols: usize) -> Self {
        let blocks = y_rows.div_ceil(setup.block_len);
        let scratch_len = setup
            .forward
            .get_inplace_scratch_len()
            .max(setup.inverse.get_inplace_scratch_len());
        Self {
            y_rows,
            out_cols,
            blocks,
            spectra: vec![None; blocks * out_cols],
            buf: vec![ZERO; setup.fft_len],
            scratch: vec![ZERO; scratch_len],
            setup,
        }
    }

    /// Rows of the full convolution, `y_rows + x_rows - 1`.
    pub fn out_rows(&self) -> usize {
        self.y_rows + self.setup.x_rows - 1
    }

    /// Adds one lateral column. `y_cols` are the occupied delay columns of
    /// `y_mat` as dense time vectors of length `y_rows`.
    pub fn accumulate(&mut self, kernel: &KernelSpectrum, y_cols: &[(usize, Vec<Complex64>)]) -> Result<()> {
        let block_len = self.setup.block_len;
        for (b2, col) in y_cols {
            if col.len() != self.y_rows {
                return Err(Error::ShapeMismatch(format!(
                    "y column has {} rows, expected {}",
                    col.len(),
                    self.y_rows
                )));
            }
            for block in 0..self.blocks {
                let start = block * block_len;
                let seg = &col[start..(start + block_len).min(self.y_rows)];
                if seg.iter().all(|z| *z == ZERO) {
                    continue;
                }
                self.buf[..seg.len()].copy_from_slice(seg);
                self.buf[seg.len()..].fill(ZERO);
                self.setup.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
                for (b1, xs) in &kernel.columns {
                    let ob = b1 + b2;
                    if ob >= self.out_cols {
                        return Err(Error::DelayOverflow {
                            engine: "ambit",
                            step: start,
                            bin: ob,
                            limit: self.out_cols,
                        });
                    }
                    let fft_len = self.setup.fft_len;
                    let acc = self.spectra[block * self.out_cols + ob].get_or_insert_with(|| vec![ZERO; fft_len]);
                    for ((a, y), x) in acc.iter_mut().zip(&self.buf).zip(xs) {
                        *a += y * x;
                    }
                }
            }
        }
        Ok(())
    }

    /// Inverts the accumulated spectra and overlap-adds them into a
    /// `out_rows × out_cols` matrix. Resets the accumulator.
    pub fn finish(&mut self) -> Array2<Complex64> {
        let out_rows = self.out_rows();
        let mut out = Array2::zeros((out_rows, self.out_cols));
        let scale = 1.0 / self.setup.fft_len as f64;
        let span = self.setup.block_len + self.setup.x_rows - 1;
        for (idx, slot) in self.spectra.iter_mut().enumerate() {
            let Some(mut spectrum) = slot.take() else { continue };
            let (block, col) = (idx / self.out_cols, idx % self.out_cols);
            self.setup.inverse.process_with_scratch(&mut spectrum, &mut self.scratch);
            let start = block * self.setup.block_len;
            for (r, z) in spectrum.iter().take(span).enumerate() {
                if start + r >= out_rows {
                    break;
                }
                out[(start + r, col)] += z * scale;
            }
        }
        out
    }
}

/// `z += y ⊛ reverse_rows(x)`: full linear 2D convolution of `y_mat` with
/// `x_mat` flipped along time, so that output row `r` collects
/// `Σ_q y[q]·x[q - r + x_rows - 1]` and delay bins add.
pub fn conv2d_fold_accumulate(
    x_mat: &Array2<Complex64>,
    y_mat: &Array2<Complex64>,
    z_mat: &mut Array2<Complex64>,
) -> Result<()> {
    let (xr, xc) = x_mat.dim();
    let (yr, yc) = y_mat.dim();
    if xr == 0 || xc == 0 || yr == 0 || yc == 0 {
        return Err(Error::ShapeMismatch("empty kernel matrix".into()));
    }
    let want = (yr + xr - 1, yc + xc - 1);
    if z_mat.dim() != want {
        return Err(Error::ShapeMismatch(format!(
            "z_mat is {:?}, expected {:?}",
            z_mat.dim(),
            want
        )));
    }
    let setup = FftSetup::new(xr);
    let kernel = setup.kernel_from_dense(x_mat)?;
    let y_cols: Vec<(usize, Vec<Complex64>)> = y_mat
        .columns()
        .into_iter()
        .enumerate()
        .filter(|(_, c)| c.iter().any(|z| *z != ZERO))
        .map(|(b, c)| (b, c.to_vec()))
        .collect();
    let mut conv = FoldConvolver::new(setup, yr, want.1);
    conv.accumulate(&kernel, &y_cols)?;
    *z_mat += &conv.finish();
    Ok(())
}
