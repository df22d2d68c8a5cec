//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's own DSP.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// Test-side random source, deliberately a different generator from the
/// one the crate uses.
pub struct TestRng(ChaCha20Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha20Rng::seed_from_u64(seed))
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn gaussian(&mut self) -> f64 {
        let u = 1.0 - self.uniform();
        let v = self.uniform();
        (-2.0 * u.ln()).sqrt() * (TAU * v).cos()
    }
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Naive O(N²) DFT, the reference for the FFT-backed transforms.
pub fn naive_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (j, &v)| {
                let a = -TAU * ((k * j) % n) as f64 / n as f64;
                (re + v * a.cos(), im + v * a.sin())
            })
        })
        .collect()
}

/// Welch one-sided PSD estimate with periodic Hann segments and 50 %
/// overlap. Returns (frequencies, density).
pub fn welch_psd(x: &[f64], fs: f64, segment: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(segment.is_power_of_two() && segment <= x.len());
    let w: Vec<f64> = (0..segment)
        .map(|n| 0.5 - 0.5 * (TAU * n as f64 / segment as f64).cos())
        .collect();
    let u: f64 = w.iter().map(|v| v * v).sum();
    let mut planner = rustfft::FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(segment);
    let bins = segment / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut count = 0usize;
    let mut start = 0;
    while start + segment <= x.len() {
        let seg = &x[start..start + segment];
        let m = mean(seg);
        let mut buf: Vec<rustfft::num_complex::Complex64> = seg
            .iter()
            .zip(&w)
            .map(|(v, w)| rustfft::num_complex::Complex64::new((v - m) * w, 0.0))
            .collect();
        fft.process(&mut buf);
        for (a, z) in acc.iter_mut().zip(&buf[..bins]) {
            *a += z.norm_sqr();
        }
        count += 1;
        start += segment / 2;
    }
    let freqs = (0..bins).map(|k| k as f64 * fs / segment as f64).collect();
    let psd = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || k == bins - 1 { 1.0 } else { 2.0 };
            one_sided * a / (count as f64 * fs * u)
        })
        .collect();
    (freqs, psd)
}

/// Ordinary least-squares slope of y on x.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Log-log slope of a PSD fitted over `[f_lo, f_hi]`, with bins averaged in
/// log-spaced groups so the dense high band does not dominate.
pub fn psd_slope(freqs: &[f64], psd: &[f64], f_lo: f64, f_hi: f64) -> f64 {
    let groups = 24;
    let (l_lo, l_hi) = (f_lo.ln(), f_hi.ln());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for g in 0..groups {
        let a = (l_lo + (l_hi - l_lo) * g as f64 / groups as f64).exp();
        let b = (l_lo + (l_hi - l_lo) * (g + 1) as f64 / groups as f64).exp();
        let sel: Vec<(f64, f64)> = freqs
            .iter()
            .zip(psd)
            .filter(|(f, _)| **f >= a && **f < b)
            .map(|(f, p)| (f.ln(), *p))
            .collect();
        if sel.is_empty() {
            continue;
        }
        xs.push(sel.iter().map(|s| s.0).sum::<f64>() / sel.len() as f64);
        ys.push((sel.iter().map(|s| s.1).sum::<f64>() / sel.len() as f64).ln());
    }
    ols_slope(&xs, &ys)
}

/// Kolmogorov-Smirnov distance between a sample and the unit-mean
/// exponential law.
pub fn ks_exponential(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-x).exp();
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max)
}

/// Wraps into (−π, π].
pub fn wrap(p: f64) -> f64 {
    let w = p - TAU * (p / TAU).round();
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Henderson weights from their defining property: the symmetric filter of
/// least third-difference roughness that passes cubics. Solved as a
/// constrained least-squares problem with a KKT system.
pub fn henderson_oracle(terms: usize) -> Vec<f64> {
    use nalgebra::{DMatrix, DVector};
    let m = (terms as i64 - 1) / 2;
    // Weights w_{-m-3}..w_{m+3}; the outer three on each side are pinned to
    // zero, leaving `terms` free values and a roughness over third differences.
    let width = terms + 6;
    let mut d3 = DMatrix::<f64>::zeros(width - 3, width);
    for r in 0..width - 3 {
        d3[(r, r)] = -1.0;
        d3[(r, r + 1)] = 3.0;
        d3[(r, r + 2)] = -3.0;
        d3[(r, r + 3)] = 1.0;
    }
    let q = d3.transpose() * &d3;
    let mut cons: Vec<DVector<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for p in 0..4 {
        let mut row = DVector::<f64>::zeros(width);
        for j in -m..=m {
            row[(j + m + 3) as usize] = (j as f64).powi(p);
        }
        cons.push(row);
        rhs.push(if p == 0 { 1.0 } else { 0.0 });
    }
    for idx in (0..3).chain(width - 3..width) {
        let mut row = DVector::<f64>::zeros(width);
        row[idx] = 1.0;
        cons.push(row);
        rhs.push(0.0);
    }
    let c = cons.len();
    let mut kkt = DMatrix::<f64>::zeros(width + c, width + c);
    kkt.view_mut((0, 0), (width, width)).copy_from(&(2.0 * q));
    for (i, row) in cons.iter().enumerate() {
        for j in 0..width {
            kkt[(width + i, j)] = row[j];
            kkt[(j, width + i)] = row[j];
        }
    }
    let mut b = DVector::<f64>::zeros(width + c);
    for (i, v) in rhs.iter().enumerate() {
        b[width + i] = *v;
    }
    let sol = kkt.lu().solve(&b).expect("KKT system is regular");
    (3..3 + terms).map(|i| sol[i]).collect()
}
