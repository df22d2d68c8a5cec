//! Reference accelerometer channel.
//!
//! Output voltage is the sensitivity times band-limited acceleration plus
//! white Gaussian noise whose density is referred to the input.

use serde::{Deserialize, Serialize};

use crate::constants::DEFAULT_OUTPUT_RATE;
use crate::dsp::fir::{apply_fir_extended, design_fir, FilterSpec};
use crate::dsp::{compute_spectrum_padded, peak_frequency, PeakEstimate, Window, ANALYSIS_PAD};
use crate::error::{ensure, Result};
use crate::motion::SampledKinematics;
use crate::noise::{IndexedStream, RandomSeed};
use crate::series::TimeSeries;

/// Transition width and stopband of the bandwidth-limiting low-pass.
const BANDLIMIT_TRANSITION: f64 = 1e3;
const BANDLIMIT_ATTEN_DB: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AccelerometerConfig {
    /// V per m/s².
    pub sensitivity: f64,
    /// Input-referred noise density, (m/s²)/√Hz. Zero gives a noiseless channel.
    pub noise_floor_density: f64,
    pub bandwidth: f64,
    pub sample_rate: f64,
}

impl Default for AccelerometerConfig {
    fn default() -> Self {
        Self {
            sensitivity: 0.1,
            noise_floor_density: 1e-4,
            bandwidth: 5e3,
            sample_rate: DEFAULT_OUTPUT_RATE,
        }
    }
}

impl AccelerometerConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.sensitivity.is_finite() && self.sensitivity > 0.0,
            InvalidConfig,
            "sensitivity must be positive"
        );
        ensure!(
            self.noise_floor_density.is_finite() && self.noise_floor_density >= 0.0,
            InvalidConfig,
            "noise floor density must be non-negative"
        );
        ensure!(
            self.sample_rate.is_finite() && self.sample_rate > 0.0,
            InvalidConfig,
            "sample rate must be positive"
        );
        ensure!(
            self.bandwidth > 0.0 && self.bandwidth < self.sample_rate / 2.0,
            InvalidConfig,
            "bandwidth {} Hz must lie below the Nyquist frequency {} Hz",
            self.bandwidth,
            self.sample_rate / 2.0
        );
        Ok(())
    }

    /// Per-sample noise voltage over the Nyquist band.
    pub fn noise_rms(&self) -> f64 {
        self.noise_floor_density * self.sensitivity * (self.sample_rate / 2.0).sqrt()
    }
}

/// Accelerometer voltage at `cfg.sample_rate`. The kinematics rate must be
/// an integer multiple of it; the band-limiting filter runs at the input
/// rate and doubles as the anti-alias filter.
pub fn simulate_accelerometer(
    kin: &SampledKinematics,
    cfg: &AccelerometerConfig,
    seed: RandomSeed,
) -> Result<TimeSeries> {
    cfg.validate()?;
    ensure!(!kin.is_empty(), InvalidInput, "empty kinematics");
    let ratio = kin.sample_rate / cfg.sample_rate;
    let m = ratio.round();
    ensure!(
        m >= 1.0 && (ratio - m).abs() <= 1e-9 * ratio,
        InvalidConfig,
        "kinematics at {} Hz cannot be decimated to {} Hz by an integer factor",
        kin.sample_rate,
        cfg.sample_rate
    );
    let m = m as usize;
    // The filter's own stop edge must clear the output Nyquist frequency.
    let transition = BANDLIMIT_TRANSITION.min(0.5 * (cfg.sample_rate - 2.0 * cfg.bandwidth));
    let taps = design_fir(
        &FilterSpec::lowpass(cfg.bandwidth, transition, BANDLIMIT_ATTEN_DB),
        kin.sample_rate,
    )?;
    let filtered = apply_fir_extended(&taps, &kin.acceleration);
    let mut volts: Vec<f64> = filtered.iter().step_by(m).map(|a| cfg.sensitivity * a).collect();
    let sigma = cfg.noise_rms();
    if sigma > 0.0 {
        let mut noise = vec![0.0; volts.len()];
        IndexedStream::new(seed).fill_gaussian(0, sigma, &mut noise);
        for (v, n) in volts.iter_mut().zip(noise) {
            *v += n;
        }
    }
    TimeSeries::new(cfg.sample_rate, volts)
}

/// Peak of the Hann analysis spectrum of an accelerometer record in `band`.
pub fn accel_peak_frequency(signal: &TimeSeries, band: (f64, f64)) -> Result<PeakEstimate> {
    let spec = compute_spectrum_padded(signal, Window::Hann, ANALYSIS_PAD)?;
    peak_frequency(&spec, band)
}
