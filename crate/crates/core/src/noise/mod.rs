//! Detector noise: shot, thermal (Johnson), flicker (1/f) and speckle.
//!
//! Shot and thermal noise are white Gaussian currents whose RMS follows the
//! closed forms in [`shot_noise_rms`] and [`thermal_noise_rms`] evaluated over
//! the Nyquist bandwidth `fs / 2`. Flicker noise is synthesized in the
//! frequency domain. Speckle is a piecewise-constant, unit-mean exponential
//! multiplier on the measurement-beam intensity, so it scales the
//! interference term by its square root.

mod rng;

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, ELEMENTARY_CHARGE};
use crate::error::{ensure, Result};
use crate::optics::{DetectorConfig, Interferometer, OpticalConfig};
use crate::series::TimeSeries;

pub(crate) use rng::IndexedStream;
pub use rng::RandomSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Shot,
    Thermal,
    Flicker,
    Speckle,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::Shot,
        NoiseKind::Thermal,
        NoiseKind::Flicker,
        NoiseKind::Speckle,
    ];

    fn stream_label(self) -> u64 {
        match self {
            NoiseKind::Shot => 1,
            NoiseKind::Thermal => 2,
            NoiseKind::Flicker => 3,
            NoiseKind::Speckle => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Absolute temperature (K).
    pub temperature: f64,
    /// Amplifier input resistance R_i (Ω).
    pub amp_input_resistance: f64,
    /// Detector resistance R_d (Ω).
    pub detector_resistance: f64,
    /// Flicker constant K (A²·Hz^(β−1)/A^α).
    pub flicker_k: f64,
    pub flicker_alpha: f64,
    pub flicker_beta: f64,
    /// Mean speckle intensity Ī (W).
    pub speckle_mean: f64,
    /// Time over which one speckle realization persists (s).
    pub speckle_correlation_time: f64,
    pub enabled: BTreeSet<NoiseKind>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            temperature: 290.0,
            amp_input_resistance: 100.0,
            detector_resistance: 100.0,
            flicker_k: 1e-24,
            flicker_alpha: 1.0,
            flicker_beta: 1.0,
            speckle_mean: 1e-3,
            speckle_correlation_time: 1e-3,
            enabled: [NoiseKind::Shot, NoiseKind::Thermal, NoiseKind::Flicker]
                .into_iter()
                .collect(),
        }
    }
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self {
            enabled: BTreeSet::new(),
            ..Self::default()
        }
    }

    /// Default parameters with every noise process switched on.
    pub fn all_enabled() -> Self {
        Self {
            enabled: NoiseKind::ALL.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn only(kinds: &[NoiseKind]) -> Self {
        Self {
            enabled: kinds.iter().copied().collect(),
            ..Self::default()
        }
    }

    pub fn is_enabled(&self, kind: NoiseKind) -> bool {
        self.enabled.contains(&kind)
    }

    /// Parallel combination R_i·R_d / (R_i + R_d).
    pub fn load_resistance(&self) -> f64 {
        self.amp_input_resistance * self.detector_resistance / (self.amp_input_resistance + self.detector_resistance)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        ensure!(pos(self.temperature), InvalidConfig, "temperature must be positive");
        ensure!(
            pos(self.amp_input_resistance) && pos(self.detector_resistance),
            InvalidConfig,
            "resistances must be positive"
        );
        ensure!(
            self.flicker_k.is_finite() && self.flicker_k >= 0.0,
            InvalidConfig,
            "flicker constant must be non-negative"
        );
        ensure!(
            self.flicker_alpha.is_finite(),
            InvalidConfig,
            "flicker alpha must be finite"
        );
        ensure!(pos(self.flicker_beta), InvalidConfig, "flicker beta must be positive");
        ensure!(pos(self.speckle_mean), InvalidConfig, "speckle mean must be positive");
        ensure!(
            pos(self.speckle_correlation_time),
            InvalidConfig,
            "speckle correlation time must be positive"
        );
        Ok(())
    }
}

/// Shot-noise current `√(2 e i Δf)`.
pub fn shot_noise_rms(signal_current: f64, bandwidth: f64) -> Result<f64> {
    ensure!(
        signal_current.is_finite() && signal_current >= 0.0,
        InvalidInput,
        "signal current must be non-negative, got {signal_current}"
    );
    ensure!(
        bandwidth.is_finite() && bandwidth >= 0.0,
        InvalidInput,
        "bandwidth must be non-negative"
    );
    Ok((2.0 * ELEMENTARY_CHARGE * signal_current * bandwidth).sqrt())
}

/// Johnson-noise current `√(4 k_B T Δf (R_i + R_d) / (R_i R_d))`.
pub fn thermal_noise_rms(
    temperature: f64,
    amp_input_resistance: f64,
    detector_resistance: f64,
    bandwidth: f64,
) -> Result<f64> {
    ensure!(
        amp_input_resistance > 0.0 && detector_resistance > 0.0,
        InvalidInput,
        "resistances must be positive"
    );
    ensure!(temperature > 0.0, InvalidInput, "temperature must be positive");
    ensure!(bandwidth >= 0.0, InvalidInput, "bandwidth must be non-negative");
    let conductance = (amp_input_resistance + detector_resistance) / (amp_input_resistance * detector_resistance);
    Ok((4.0 * BOLTZMANN * temperature * bandwidth * conductance).sqrt())
}

/// Zero-mean white Gaussian series with population standard deviation `rms`.
pub fn gen_white_noise(rms: f64, n: usize, sample_rate: f64, seed: RandomSeed) -> Result<TimeSeries> {
    ensure!(rms.is_finite() && rms >= 0.0, InvalidInput, "rms must be non-negative");
    let mut samples = vec![0.0; n];
    if rms > 0.0 {
        IndexedStream::new(seed).fill_gaussian(0, rms, &mut samples);
    }
    TimeSeries::new(sample_rate, samples)
}

/// One-sided flicker PSD `K i^α / f^β` integrated over `[f_lo, f_hi]`.
pub fn flicker_band_power(signal_current: f64, cfg: &NoiseConfig, f_lo: f64, f_hi: f64) -> f64 {
    if f_hi <= f_lo {
        return 0.0;
    }
    let scale = cfg.flicker_k * signal_current.powf(cfg.flicker_alpha);
    let beta = cfg.flicker_beta;
    if (beta - 1.0).abs() < 1e-12 {
        scale * (f_hi / f_lo).ln()
    } else {
        scale * (f_hi.powf(1.0 - beta) - f_lo.powf(1.0 - beta)) / (1.0 - beta)
    }
}

/// Flicker current of length `n` (a power of two) whose one-sided PSD
/// follows `K i^α / f^β` on `[fs/n, fs/4]` and vanishes elsewhere.
///
/// Each DFT bin carries exactly the PSD integrated over its width, with a
/// uniformly random phase, so the series power equals the band integral.
pub fn gen_flicker_noise(
    signal_current: f64,
    cfg: &NoiseConfig,
    n: usize,
    sample_rate: f64,
    seed: RandomSeed,
) -> Result<TimeSeries> {
    ensure!(
        signal_current.is_finite() && signal_current >= 0.0,
        InvalidInput,
        "signal current must be non-negative"
    );
    ensure!(
        n.is_power_of_two(),
        InvalidInput,
        "flicker length must be a power of two, got {n}"
    );
    cfg.validate()?;
    ensure!(
        sample_rate.is_finite() && sample_rate > 0.0,
        InvalidInput,
        "sample rate must be positive"
    );
    if cfg.flicker_k == 0.0 || signal_current == 0.0 || n < 4 {
        return TimeSeries::zeros(sample_rate, n);
    }

    let df = sample_rate / n as f64;
    let (band_lo, band_hi) = (df, sample_rate / 4.0);
    let top_bin = n / 4;
    let phases = IndexedStream::new(seed).uniforms(top_bin + 1);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..=top_bin {
        let lo = ((k as f64 - 0.5) * df).max(band_lo);
        let hi = ((k as f64 + 0.5) * df).min(band_hi);
        let power = flicker_band_power(signal_current, cfg, lo, hi);
        // A cosine of amplitude a has power a²/2; its two DFT lines hold n·a/2.
        let line = Complex64::from_polar(0.5 * n as f64 * (2.0 * power).sqrt(), TAU * phases[k]);
        spectrum[k] = line;
        spectrum[n - k] = line.conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    let inv_n = 1.0 / n as f64;
    TimeSeries::new(sample_rate, spectrum.iter().map(|z| z.re * inv_n).collect())
}

/// Number of detector samples a speckle realization persists.
pub fn speckle_interval(cfg: &NoiseConfig, sample_rate: f64) -> Result<usize> {
    let samples = sample_rate * cfg.speckle_correlation_time;
    ensure!(
        samples.is_finite() && samples >= 1.0,
        InvalidConfig,
        "speckle correlation time spans {samples} samples; at least one is required"
    );
    Ok(samples.ceil() as usize)
}

/// Piecewise-constant speckle multiplier `I / Ī`, drawn i.i.d. from the unit
/// mean negative-exponential law once per correlation interval. All ones when
/// speckle is disabled.
pub fn gen_speckle_multiplier(cfg: &NoiseConfig, n: usize, sample_rate: f64, seed: RandomSeed) -> Result<TimeSeries> {
    cfg.validate()?;
    if !cfg.is_enabled(NoiseKind::Speckle) {
        return TimeSeries::new(sample_rate, vec![1.0; n]);
    }
    let interval = speckle_interval(cfg, sample_rate)?;
    let mut samples = vec![0.0; n];
    fill_speckle(&mut IndexedStream::new(seed), interval, 0, &mut samples);
    TimeSeries::new(sample_rate, samples)
}

fn fill_speckle(stream: &mut IndexedStream, interval: usize, n0: i64, out: &mut [f64]) {
    let interval = interval as i64;
    let mut i = 0usize;
    while i < out.len() {
        let n = n0 + i as i64;
        let block = n.div_euclid(interval);
        let block_end = (block + 1) * interval;
        let value = stream.exponential_at(block);
        let stop = ((block_end - n0) as usize).min(out.len());
        out[i..stop].fill(value);
        i = stop;
    }
}

// Flicker tracks longer than this are synthesized at a reduced rate and
// linearly interpolated; the discarded band sits far above the 1/f corner.
const MAX_FLICKER_TRACK: usize = 1 << 21;

#[derive(Debug, Clone)]
struct FlickerTrack {
    origin: i64,
    step: usize,
    values: Vec<f64>,
}

impl FlickerTrack {
    fn new(
        signal_current: f64,
        cfg: &NoiseConfig,
        sample_rate: f64,
        origin: i64,
        len: usize,
        seed: RandomSeed,
    ) -> Result<Self> {
        let mut step = 1usize;
        while (len.div_ceil(step) + 2).next_power_of_two() > MAX_FLICKER_TRACK {
            step += 1;
        }
        let n = if step == 1 {
            len.next_power_of_two()
        } else {
            (len.div_ceil(step) + 2).next_power_of_two()
        };
        let series = gen_flicker_noise(signal_current, cfg, n, sample_rate / step as f64, seed)?;
        Ok(Self {
            origin,
            step,
            values: series.samples,
        })
    }

    #[inline]
    fn at(&self, n: i64) -> f64 {
        let offset = (n - self.origin).max(0) as usize;
        if self.step == 1 {
            return self.values.get(offset).copied().unwrap_or(0.0);
        }
        let k = offset / self.step;
        let frac = (offset % self.step) as f64 / self.step as f64;
        let a = self.values.get(k).copied().unwrap_or(0.0);
        let b = self.values.get(k + 1).copied().unwrap_or(a);
        a + (b - a) * frac
    }
}

/// Individual noise contributions over a sample range.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NoiseComponents {
    pub shot: Vec<f64>,
    pub thermal: Vec<f64>,
    pub flicker: Vec<f64>,
    /// Speckle intensity multiplier (ones when disabled).
    pub speckle: Vec<f64>,
}

/// Seeded noise generator for one detector record.
///
/// Every sample is addressed by its index, so [`NoiseSource::apply_range`]
/// may be called on disjoint chunks in any order.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    cfg: NoiseConfig,
    dc_current: f64,
    shot_rms: f64,
    thermal_rms: f64,
    seed: RandomSeed,
    speckle_interval: usize,
    flicker: Option<FlickerTrack>,
}

impl NoiseSource {
    /// Noise for samples `origin..origin + len` at `sample_rate`, with the shot
    /// and flicker levels set by the DC photocurrent `dc_current`.
    pub fn new(
        cfg: &NoiseConfig,
        dc_current: f64,
        sample_rate: f64,
        origin: i64,
        len: usize,
        seed: RandomSeed,
    ) -> Result<Self> {
        cfg.validate()?;
        let bandwidth = sample_rate / 2.0;
        let flicker = if cfg.is_enabled(NoiseKind::Flicker) {
            Some(FlickerTrack::new(
                dc_current,
                cfg,
                sample_rate,
                origin,
                len,
                seed.substream(NoiseKind::Flicker.stream_label()),
            )?)
        } else {
            None
        };
        let speckle_interval = if cfg.is_enabled(NoiseKind::Speckle) {
            speckle_interval(cfg, sample_rate)?
        } else {
            1
        };
        Ok(Self {
            shot_rms: shot_noise_rms(dc_current, bandwidth)?,
            thermal_rms: thermal_noise_rms(
                cfg.temperature,
                cfg.amp_input_resistance,
                cfg.detector_resistance,
                bandwidth,
            )?,
            cfg: cfg.clone(),
            dc_current,
            seed,
            speckle_interval,
            flicker,
        })
    }

    pub fn shot_rms(&self) -> f64 {
        self.shot_rms
    }

    pub fn thermal_rms(&self) -> f64 {
        self.thermal_rms
    }

    fn stream(&self, kind: NoiseKind) -> IndexedStream {
        IndexedStream::new(self.seed.substream(kind.stream_label()))
    }

    /// Component series for samples `n0..n0 + len`; disabled additive
    /// components come back as zeros.
    pub fn components(&self, n0: i64, len: usize) -> NoiseComponents {
        let mut c = NoiseComponents {
            shot: vec![0.0; len],
            thermal: vec![0.0; len],
            flicker: vec![0.0; len],
            speckle: vec![1.0; len],
        };
        if self.cfg.is_enabled(NoiseKind::Shot) {
            self.stream(NoiseKind::Shot)
                .fill_gaussian(n0, self.shot_rms, &mut c.shot);
        }
        if self.cfg.is_enabled(NoiseKind::Thermal) {
            self.stream(NoiseKind::Thermal)
                .fill_gaussian(n0, self.thermal_rms, &mut c.thermal);
        }
        if let Some(track) = &self.flicker {
            for (i, v) in c.flicker.iter_mut().enumerate() {
                *v = track.at(n0 + i as i64);
            }
        }
        if self.cfg.is_enabled(NoiseKind::Speckle) {
            fill_speckle(
                &mut self.stream(NoiseKind::Speckle),
                self.speckle_interval,
                n0,
                &mut c.speckle,
            );
        }
        c
    }

    /// Corrupts clean photocurrent samples `n0..n0 + clean.len()` in place:
    /// the interference term is scaled by `√speckle` and the additive
    /// currents are summed on top.
    pub fn apply_range(&self, n0: i64, clean: &mut [f64]) {
        if self.cfg.enabled.is_empty() {
            return;
        }
        let c = self.components(n0, clean.len());
        let speckled = self.cfg.is_enabled(NoiseKind::Speckle);
        for (i, x) in clean.iter_mut().enumerate() {
            let ac = *x - self.dc_current;
            let ac = if speckled { ac * c.speckle[i].sqrt() } else { ac };
            *x = self.dc_current + ac + c.shot[i] + c.thermal[i] + c.flicker[i];
        }
    }
}

/// Adds the enabled noise processes to a clean detector signal.
///
/// `dc_signal_current` must be the DC photocurrent of the configuration that
/// produced `clean`; it sets the shot and flicker levels and separates the
/// interference term for speckle scaling.
pub fn apply_noise(
    clean: &TimeSeries,
    dc_signal_current: f64,
    optical: &OpticalConfig,
    detector: &DetectorConfig,
    cfg: &NoiseConfig,
    seed: RandomSeed,
) -> Result<TimeSeries> {
    let model = Interferometer::new(optical, detector)?;
    ensure!(
        clean.sample_rate == detector.sample_rate,
        InvalidInput,
        "signal rate {} Hz does not match detector rate {} Hz",
        clean.sample_rate,
        detector.sample_rate
    );
    ensure!(
        (detector.bandwidth - detector.sample_rate / 2.0).abs() <= 1e-9 * detector.sample_rate,
        InvalidInput,
        "sampled noise needs a Nyquist bandwidth of {} Hz, detector declares {} Hz",
        detector.sample_rate / 2.0,
        detector.bandwidth
    );
    ensure!(
        (dc_signal_current - model.dc_current()).abs() <= 1e-9 * model.dc_current(),
        InvalidInput,
        "DC current {dc_signal_current} A does not match the optical configuration ({} A)",
        model.dc_current()
    );
    let source = NoiseSource::new(cfg, dc_signal_current, clean.sample_rate, 0, clean.len(), seed)?;
    let mut out = clean.clone();
    source.apply_range(0, &mut out.samples);
    Ok(out)
}
