//! Ensemble statistics over realization outputs: time-anchored ACF,
//! windowed Doppler PSD, empirical CDFs and the engine comparison.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::ambit_sim::{AmbitOptions, AmbitPlan};
use crate::direct_sim::{received_power_trace, simulate_direct_with, DelayQuantization, DirectOptions, ImpulseResponseGrid};
use crate::error::{Error, Result};
use crate::levy_field::{materialize_scatterers, realization_seed, sample_field};
use crate::scene::Scenario;

/// `g(t_k) = Σ_bins h(t_k, bin)`.
pub fn narrowband_gain(h: &ImpulseResponseGrid) -> Vec<Complex64> {
    h.values.rows().into_iter().map(|r| r.sum()).collect()
}

fn step_index(time_s: f64, dt_s: f64) -> Result<usize> {
    let k = (time_s / dt_s).round();
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::Precondition(format!("time {time_s} s is not a non-negative grid time")));
    }
    Ok(k as usize)
}

fn common_len(gains: &[Vec<Complex64>]) -> Result<usize> {
    let first = gains
        .first()
        .ok_or_else(|| Error::Precondition("no realizations".into()))?
        .len();
    if gains.iter().any(|g| g.len() != first) {
        return Err(Error::ShapeMismatch("realizations have different lengths".into()));
    }
    Ok(first)
}

/// Ensemble ACF anchored at `anchor_time_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfEstimate {
    pub anchor_time_s: f64,
    pub lags_s: Vec<f64>,
    pub values: Vec<Complex64>,
    pub realization_count: usize,
}

impl AcfEstimate {
    /// First non-negative lag with `|ρ| < 0.5`.
    pub fn coherence_time(&self) -> Option<f64> {
        self.coherence_time_at(0.5)
    }

    pub fn coherence_time_at(&self, level: f64) -> Option<f64> {
        self.lags_s
            .iter()
            .zip(&self.values)
            .filter(|(lag, _)| **lag >= 0.0)
            .find(|(_, v)| v.norm() < level)
            .map(|(lag, _)| *lag)
    }

    /// Value at lag zero.
    pub fn at_zero(&self) -> Option<Complex64> {
        self.lags_s.iter().position(|&l| l == 0.0).map(|i| self.values[i])
    }

    /// Rows `lag_s,re,im,abs`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "lag_s,re,im,abs")?;
        for (lag, v) in self.lags_s.iter().zip(&self.values) {
            writeln!(out, "{},{},{},{}", lag, v.re, v.im, v.norm())?;
        }
        Ok(())
    }
}

/// `ρ(Δt; t₀) = ⟨g(t₀) g*(t₀+Δt)⟩ / sqrt(⟨|g(t₀)|²⟩ ⟨|g(t₀+Δt)|²⟩)` for
/// `Δt ∈ [0, max_lag_s]`.
pub fn temporal_acf(gains: &[Vec<Complex64>], dt_s: f64, anchor_time_s: f64, max_lag_s: f64) -> Result<AcfEstimate> {
    acf_over(gains, dt_s, anchor_time_s, max_lag_s, false)
}

/// As [`temporal_acf`] with lags in `[-max_lag_s, max_lag_s]`.
pub fn temporal_acf_two_sided(gains: &[Vec<Complex64>], dt_s: f64, anchor_time_s: f64, max_lag_s: f64) -> Result<AcfEstimate> {
    acf_over(gains, dt_s, anchor_time_s, max_lag_s, true)
}

fn acf_over(gains: &[Vec<Complex64>], dt_s: f64, anchor_time_s: f64, max_lag_s: f64, two_sided: bool) -> Result<AcfEstimate> {
    let len = common_len(gains)?;
    let anchor = step_index(anchor_time_s, dt_s)?;
    let max_lag = step_index(max_lag_s, dt_s)? as i64;
    let lo = if two_sided { -max_lag } else { 0 };
    if anchor as i64 + lo < 0 || anchor as i64 + max_lag >= len as i64 {
        return Err(Error::Precondition(format!(
            "anchor {anchor_time_s} s with lags up to {max_lag_s} s leaves the {len}-step horizon"
        )));
    }
    let mean_power = |k: usize| gains.iter().map(|g| g[k].norm_sqr()).sum::<f64>() / gains.len() as f64;
    let p0 = mean_power(anchor);
    if p0 == 0.0 {
        return Err(Error::DegenerateAnchor { anchor_s: anchor_time_s });
    }
    let mut lags_s = Vec::new();
    let mut values = Vec::new();
    for lag in lo..=max_lag {
        let k = (anchor as i64 + lag) as usize;
        let value = if lag == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            let pk = mean_power(k);
            let cross: Complex64 = gains.iter().map(|g| g[anchor] * g[k].conj()).sum::<Complex64>() / gains.len() as f64;
            if pk == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                cross / (p0 * pk).sqrt()
            }
        };
        lags_s.push(lag as f64 * dt_s);
        values.push(value);
    }
    Ok(AcfEstimate {
        anchor_time_s,
        lags_s,
        values,
        realization_count: gains.len(),
    })
}

/// Data taper for the periodogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Taper {
    Rectangular,
    Hann,
    Kaiser { beta: f64 },
}

impl Default for Taper {
    fn default() -> Self {
        Taper::Kaiser { beta: 4.0 }
    }
}

/// Modified Bessel function of the first kind, order zero.
fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

impl Taper {
    pub fn weights(&self, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![1.0];
        }
        let m = (n - 1) as f64;
        (0..n)
            .map(|k| {
                let k = k as f64;
                match *self {
                    Taper::Rectangular => 1.0,
                    Taper::Hann => 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k / m).cos(),
                    Taper::Kaiser { beta } => {
                        let r = 2.0 * k / m - 1.0;
                        bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / bessel_i0(beta)
                    }
                }
            })
            .collect()
    }
}

/// Averaged tapered periodogram around an anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DopplerPsd {
    pub anchor_time_s: f64,
    /// Start of the analysed window.
    pub window_start_s: f64,
    pub window_length_s: f64,
    pub freqs_hz: Vec<f64>,
    pub psd: Vec<f64>,
    pub taper: Taper,
    pub realization_count: usize,
}

impl DopplerPsd {
    /// Frequency resolution `1 / window_length`.
    pub fn resolution_hz(&self) -> f64 {
        1.0 / self.window_length_s
    }

    pub fn bin_width_hz(&self) -> f64 {
        if self.freqs_hz.len() > 1 {
            self.freqs_hz[1] - self.freqs_hz[0]
        } else {
            0.0
        }
    }

    /// `Σ psd · df`.
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.bin_width_hz()
    }

    /// Fraction of total mass with `|f| ≤ limit_hz`.
    pub fn mass_within(&self, limit_hz: f64) -> f64 {
        let total: f64 = self.psd.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        let tol = 1e-9 * self.bin_width_hz();
        let inside: f64 = self
            .freqs_hz
            .iter()
            .zip(&self.psd)
            .filter(|(f, _)| f.abs() <= limit_hz + tol)
            .map(|(_, p)| p)
            .sum();
        inside / total
    }

    /// Smallest `|f|` on the frequency grid whose symmetric band holds at
    /// least `fraction` of the mass.
    pub fn mass_edge(&self, fraction: f64) -> f64 {
        let total: f64 = self.psd.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut by_abs: Vec<(f64, f64)> = self.freqs_hz.iter().map(|f| f.abs()).zip(self.psd.iter().copied()).collect();
        by_abs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let mut i = 0;
        while i < by_abs.len() {
            let f = by_abs[i].0;
            while i < by_abs.len() && by_abs[i].0 == f {
                acc += by_abs[i].1;
                i += 1;
            }
            if acc >= fraction * total {
                return f;
            }
        }
        by_abs.last().map_or(0.0, |p| p.0)
    }

    /// Rows `freq_hz,psd`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "freq_hz,psd")?;
        for (f, p) in self.freqs_hz.iter().zip(&self.psd) {
            writeln!(out, "{f},{p}")?;
        }
        Ok(())
    }
}

/// First sample of a window of `n` samples centred at `anchor`, shifted to
/// lie inside `[0, len)`.
fn window_start(anchor: usize, n: usize, len: usize) -> usize {
    anchor.saturating_sub(n / 2).min(len - n)
}

/// PSD with the default Kaiser taper.
pub fn doppler_psd(gains: &[Vec<Complex64>], dt_s: f64, anchor_time_s: f64, window_length_s: f64) -> Result<DopplerPsd> {
    doppler_psd_with(gains, dt_s, anchor_time_s, window_length_s, Taper::default())
}

/// Periodogram of the tapered window averaged over realizations, scaled
/// so that `Σ psd·df` equals the mean of `Σ|w g|² / Σ w²`.
pub fn doppler_psd_with(
    gains: &[Vec<Complex64>],
    dt_s: f64,
    anchor_time_s: f64,
    window_length_s: f64,
    taper: Taper,
) -> Result<DopplerPsd> {
    let len = common_len(gains)?;
    let n = (window_length_s / dt_s).round() as usize;
    if n < 2 {
        return Err(Error::Precondition(format!(
            "window of {window_length_s} s holds fewer than two samples at {dt_s} s"
        )));
    }
    if n > len {
        return Err(Error::Precondition(format!(
            "window of {n} samples exceeds the {len}-sample horizon"
        )));
    }
    let anchor = step_index(anchor_time_s, dt_s)?;
    if anchor >= len {
        return Err(Error::Precondition(format!("anchor {anchor_time_s} s is beyond the horizon")));
    }
    let start = window_start(anchor, n, len);
    let w = taper.weights(n);
    let w2: f64 = w.iter().map(|x| x * x).sum();
    let nfft = if n % 2 == 1 { n } else { n + 1 };
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let fs = 1.0 / dt_s;
    let mut acc = vec![0.0; nfft];
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for g in gains {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = if k < n { g[start + k] * w[k] } else { Complex64::new(0.0, 0.0) };
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let scale = 1.0 / (gains.len() as f64 * fs * w2);
    let half = (nfft - 1) / 2;
    let df = fs / nfft as f64;
    let mut freqs_hz = Vec::with_capacity(nfft);
    let mut psd = Vec::with_capacity(nfft);
    for k in 0..nfft {
        // fftshift: index k ↔ frequency (k - half)·df
        let src = (k + nfft - half) % nfft;
        freqs_hz.push((k as f64 - half as f64) * df);
        psd.push(acc[src] * scale);
    }
    Ok(DopplerPsd {
        anchor_time_s,
        window_start_s: start as f64 * dt_s,
        window_length_s: n as f64 * dt_s,
        freqs_hz,
        psd,
        taper,
        realization_count: gains.len(),
    })
}

/// Sorted sample with cumulative probabilities `i/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Precondition("empirical CDF of an empty sample".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Precondition("empirical CDF sample contains NaN".into()));
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let probs = (1..=samples.len()).map(|i| i as f64 / n).collect();
        Ok(Self { values: samples, probs })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nearest-rank quantile.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.values.len();
        let rank = (p.clamp(0.0, 1.0) * n as f64).ceil() as usize;
        self.values[rank.clamp(1, n) - 1]
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Sample standard deviation (zero for a single sample).
    pub fn std(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        (self.values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn summary(&self) -> CdfSummary {
        CdfSummary {
            count: self.len(),
            median: self.median(),
            mean: self.mean(),
            std: self.std(),
            min: self.min(),
            max: self.max(),
        }
    }

    /// Rows `value,prob`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "value,prob")?;
        for (v, p) in self.values.iter().zip(&self.probs) {
            writeln!(out, "{v},{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfSummary {
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Per-step `10·log10(P_direct / P_ambit)` over steps where both engines
/// see power.
pub fn power_ratio_db(direct: &ImpulseResponseGrid, ambit: &ImpulseResponseGrid) -> Result<Vec<f64>> {
    if direct.values.dim() != ambit.values.dim() {
        return Err(Error::ShapeMismatch(format!(
            "direct {:?} vs ambit {:?}",
            direct.values.dim(),
            ambit.values.dim()
        )));
    }
    Ok(received_power_trace(direct)
        .into_iter()
        .zip(received_power_trace(ambit))
        .filter(|&(pd, pa)| pd > 0.0 && pa > 0.0)
        .map(|(pd, pa)| 10.0 * (pd / pa).log10())
        .collect())
}

/// Settings for [`compare_engines`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOptions {
    pub realizations: usize,
    pub base_seed: u64,
    /// Each engine is timed this many times per realization; the minimum
    /// is kept.
    pub repetitions: usize,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        Self {
            realizations: 10,
            base_seed: 0,
            repetitions: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineComparison {
    pub direct_s: Vec<f64>,
    pub ambit_s: Vec<f64>,
    /// Per-realization `direct / ambit` wall-clock ratio.
    pub runtime_ratio: EmpiricalCdf,
    /// Pooled per-step power ratio in dB.
    pub power_ratio_db: EmpiricalCdf,
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..reps.max(1) {
        let started = Instant::now();
        let value = f()?;
        best = best.min(started.elapsed().as_secs_f64());
        out = Some(value);
    }
    Ok((out.expect("at least one repetition"), best))
}

/// Runs both engines on the same field for each realization, without LoS.
/// The direct engine uses per-leg delay binning so both engines quantize
/// delays identically. Runs are sequential so timings are comparable.
pub fn compare_engines(scenario: &Scenario, options: &ComparisonOptions) -> Result<EngineComparison> {
    let Scenario { params, geo, traj, grid } = scenario;
    let direct_opts = DirectOptions {
        quantization: DelayQuantization::PerLeg,
        ..DirectOptions::default()
    };
    let mut direct_s = Vec::with_capacity(options.realizations);
    let mut ambit_s = Vec::with_capacity(options.realizations);
    let mut ratios = Vec::new();
    for r in 0..options.realizations {
        let field = sample_field(grid, geo, traj, realization_seed(options.base_seed, r as u64));
        let (hd, td) = best_of(options.repetitions, || {
            let set = materialize_scatterers(&field, grid, traj);
            simulate_direct_with(params, geo, traj, grid, &set, &direct_opts)
        })?;
        let (ha, ta) = best_of(options.repetitions, || {
            let plan = AmbitPlan::new(params, geo, traj, grid, AmbitOptions::default())?;
            plan.run(&field).map(|(h, _)| h)
        })?;
        ratios.extend(power_ratio_db(&hd, &ha)?);
        direct_s.push(td);
        ambit_s.push(ta);
    }
    let runtime = direct_s.iter().zip(&ambit_s).map(|(d, a)| d / a).collect();
    if ratios.is_empty() {
        return Err(Error::Precondition("no time step with power in both engines".into()));
    }
    Ok(EngineComparison {
        runtime_ratio: EmpiricalCdf::from_samples(runtime)?,
        power_ratio_db: EmpiricalCdf::from_samples(ratios)?,
        direct_s,
        ambit_s,
    })
}
