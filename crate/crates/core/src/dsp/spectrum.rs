//! Windowed FFT spectra and spectral peak estimation.

use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
}

impl Window {
    /// Periodic form, so a coherent tone lands on exactly three Hann bins.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hann => (0..len)
                .map(|n| 0.5 * (1.0 - (TAU * n as f64 / len as f64).cos()))
                .collect(),
        }
    }
}

/// One-sided amplitude spectrum.
///
/// `record_length` is the transform length, so bins are `fs / record_length`
/// apart. It exceeds `signal_length` when the record was zero-padded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub sample_rate: f64,
    pub frequency_axis: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub phase: Vec<f64>,
    pub window: Window,
    pub record_length: usize,
    pub signal_length: usize,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.sample_rate / self.record_length as f64
    }

    /// Bin spacing of the unpadded record.
    pub fn resolution(&self) -> f64 {
        self.sample_rate / self.signal_length as f64
    }

    pub fn len(&self) -> usize {
        self.magnitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitude.is_empty()
    }
}

/// Two-sided DFT `X_k = Σ x_n e^{-i2πkn/N}` of a real sequence.
pub fn dft(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    }
    buf
}

pub fn compute_spectrum(series: &TimeSeries, window: Window) -> Result<Spectrum> {
    compute_spectrum_padded(series, window, 1)
}

/// Spectrum of the windowed record zero-padded to `pad_factor` times its
/// length. Padding interpolates the same underlying spectrum more densely.
pub fn compute_spectrum_padded(series: &TimeSeries, window: Window, pad_factor: usize) -> Result<Spectrum> {
    let len = series.len();
    ensure!(len >= 2, InvalidInput, "spectrum needs at least two samples, got {len}");
    ensure!(pad_factor >= 1, InvalidInput, "pad factor must be at least 1");
    let w = window.coefficients(len);
    let gain: f64 = w.iter().sum();
    let n = len * pad_factor;
    let mut buf: Vec<Complex64> = series
        .samples
        .iter()
        .zip(&w)
        .map(|(x, w)| Complex64::new(x * w, 0.0))
        .collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bins = n / 2 + 1;
    let df = series.sample_rate / n as f64;
    let mut magnitude = Vec::with_capacity(bins);
    let mut phase = Vec::with_capacity(bins);
    for (k, z) in buf[..bins].iter().enumerate() {
        let edge = k == 0 || (n % 2 == 0 && k == n / 2);
        let scale = if edge { 1.0 } else { 2.0 };
        magnitude.push(scale * z.norm() / gain);
        phase.push(if z.norm() == 0.0 { 0.0 } else { z.arg() });
    }
    Ok(Spectrum {
        sample_rate: series.sample_rate,
        frequency_axis: (0..bins).map(|k| k as f64 * df).collect(),
        magnitude,
        phase,
        window,
        record_length: n,
        signal_length: len,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    pub frequency: f64,
    pub amplitude: f64,
    pub bin_index: usize,
    pub interpolated: bool,
}

/// Largest bin with frequency in `[band.0, band.1]`, refined by a parabola
/// through the log magnitudes of it and its two neighbours.
pub fn peak_frequency(spec: &Spectrum, band: (f64, f64)) -> Result<PeakEstimate> {
    let (lo, hi) = band;
    ensure!(lo <= hi, InvalidInput, "search band {lo}..{hi} Hz is inverted");
    let mut best: Option<usize> = None;
    for (k, &f) in spec.frequency_axis.iter().enumerate() {
        if f >= lo && f <= hi && best.is_none_or(|b| spec.magnitude[k] > spec.magnitude[b]) {
            best = Some(k);
        }
    }
    let Some(k) = best else {
        return Err(crate::Error::InvalidInput(format!(
            "search band {lo}..{hi} Hz holds no spectrum bins"
        )));
    };
    let df = spec.bin_width();
    let peak = spec.magnitude[k];
    let plain = PeakEstimate {
        frequency: k as f64 * df,
        amplitude: peak,
        bin_index: k,
        interpolated: false,
    };
    if k == 0 || k + 1 >= spec.len() {
        return Ok(plain);
    }
    let (a, b, c) = (spec.magnitude[k - 1], peak, spec.magnitude[k + 1]);
    if a <= 0.0 || b <= 0.0 || c <= 0.0 {
        return Ok(plain);
    }
    let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
    let curvature = la - 2.0 * lb + lc;
    if curvature >= 0.0 {
        return Ok(plain);
    }
    let delta = (0.5 * (la - lc) / curvature).clamp(-0.5, 0.5);
    Ok(PeakEstimate {
        frequency: (k as f64 + delta) * df,
        amplitude: (lb - 0.25 * (la - lc) * delta).exp(),
        bin_index: k,
        interpolated: true,
    })
}

/// Least-squares fit of `a cos(2πft) + b sin(2πft) + c`; returns the tone
/// amplitude `√(a² + b²)` and phase of the sine form `A sin(2πft + θ)`.
pub fn fit_sinusoid(series: &TimeSeries, frequency: f64) -> Result<(f64, f64)> {
    ensure!(
        series.len() >= 3,
        InvalidInput,
        "sinusoid fit needs at least three samples"
    );
    // Normal equations for the basis (cos, sin, 1).
    let mut g = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for (n, &x) in series.samples.iter().enumerate() {
        let (s, c) = (TAU * frequency * n as f64 / series.sample_rate).sin_cos();
        let basis = [c, s, 1.0];
        for i in 0..3 {
            r[i] += basis[i] * x;
            for j in 0..3 {
                g[i][j] += basis[i] * basis[j];
            }
        }
    }
    let [a, b, _] = solve3(g, r)
        .ok_or_else(|| crate::Error::InvalidInput(format!("sinusoid fit at {frequency} Hz is singular")))?;
    Ok(((a * a + b * b).sqrt(), a.atan2(b)))
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (a, b) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *a -= f * b;
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (v[row] - tail) / m[row][row];
    }
    Some(x)
}
