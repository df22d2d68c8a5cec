//! Heterodyne interferometer model: Doppler shift, interferometric phase,
//! beam fields and the detected photocurrent.
//!
//! The optical carrier is factored out of both fields, so the synthesized
//! signals live at the beat frequency `f_b - f_d` only. A sample at index `n`
//! (which may be negative for filter pre-roll) is a pure function of `n`, so
//! any sample range can be synthesized independently of any other.

use std::f64::consts::{PI, TAU};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::DEFAULT_OUTPUT_RATE;
use crate::error::{ensure, Error, Result};
use crate::motion::{MotionProfile, SampledKinematics};
use crate::series::TimeSeries;

/// HeNe line.
pub const DEFAULT_WAVELENGTH: f64 = 632.8e-9;
pub const DEFAULT_RESPONSIVITY: f64 = 0.5;

/// Doppler shift `2 v / λ` of light retro-reflected from a surface moving
/// at `v` (positive towards the interferometer).
pub fn doppler_shift(velocity: f64, wavelength: f64) -> Result<f64> {
    check_wavelength(wavelength)?;
    Ok(2.0 * velocity / wavelength)
}

/// Round-trip interferometric phase `4π ΔL / λ`.
pub fn phase_from_displacement(displacement: f64, wavelength: f64) -> Result<f64> {
    check_wavelength(wavelength)?;
    Ok(4.0 * PI * displacement / wavelength)
}

fn check_wavelength(wavelength: f64) -> Result<()> {
    ensure!(
        wavelength.is_finite() && wavelength > 0.0,
        InvalidConfig,
        "wavelength must be positive, got {wavelength}"
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalConfig {
    /// Laser wavelength (m).
    pub wavelength: f64,
    /// Bragg-cell frequency shift of the measurement arm (Hz).
    pub bragg_shift: f64,
    /// Mixing efficiency K in (0, 1].
    pub mixing_efficiency: f64,
    /// Effective surface reflectivity R in (0, 1].
    pub reflectivity: f64,
    /// Measurement-beam intensity I_m (W).
    pub intensity_measurement: f64,
    /// Reference-beam intensity I_r (W).
    pub intensity_reference: f64,
    /// Reference-arm transmission L_r in (0, 1].
    pub loss_reference: f64,
    /// Measurement-arm transmission L_m in (0, 1].
    pub loss_measurement: f64,
}

impl OpticalConfig {
    /// Default optical bench at the given carrier.
    pub fn with_carrier(bragg_shift: f64) -> Self {
        Self {
            wavelength: DEFAULT_WAVELENGTH,
            bragg_shift,
            mixing_efficiency: 0.9,
            reflectivity: 0.5,
            intensity_measurement: 1e-3,
            intensity_reference: 1e-3,
            loss_reference: 0.9,
            loss_measurement: 0.8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_wavelength(self.wavelength)?;
        let unit = |v: f64| v.is_finite() && v > 0.0 && v <= 1.0;
        ensure!(
            self.bragg_shift.is_finite() && self.bragg_shift >= 0.0,
            InvalidConfig,
            "Bragg shift must be non-negative, got {}",
            self.bragg_shift
        );
        ensure!(
            unit(self.mixing_efficiency),
            InvalidConfig,
            "mixing efficiency must lie in (0, 1]"
        );
        ensure!(
            unit(self.reflectivity),
            InvalidConfig,
            "reflectivity must lie in (0, 1]"
        );
        ensure!(
            unit(self.loss_reference),
            InvalidConfig,
            "reference loss must lie in (0, 1]"
        );
        ensure!(
            unit(self.loss_measurement),
            InvalidConfig,
            "measurement loss must lie in (0, 1]"
        );
        ensure!(
            self.intensity_measurement.is_finite() && self.intensity_measurement > 0.0,
            InvalidConfig,
            "measurement intensity must be positive"
        );
        ensure!(
            self.intensity_reference.is_finite() && self.intensity_reference > 0.0,
            InvalidConfig,
            "reference intensity must be positive"
        );
        Ok(())
    }

    /// Measurement-arm intensity at the detector, I_m·L_m·R.
    pub fn measurement_arm_intensity(&self) -> f64 {
        self.intensity_measurement * self.loss_measurement * self.reflectivity
    }

    /// Reference-arm intensity at the detector, I_r·L_r.
    pub fn reference_arm_intensity(&self) -> f64 {
        self.intensity_reference * self.loss_reference
    }

    pub fn dc_intensity(&self) -> f64 {
        self.measurement_arm_intensity() + self.reference_arm_intensity()
    }

    /// Peak of the interference term, 2K·√(I_m L_m R · I_r L_r).
    pub fn ac_intensity(&self) -> f64 {
        2.0 * self.mixing_efficiency * (self.measurement_arm_intensity() * self.reference_arm_intensity()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Photodiode responsivity (A/W).
    pub responsivity: f64,
    /// Noise bandwidth Δf (Hz). The sampled noise model requires fs/2.
    pub bandwidth: f64,
    /// Detector sample rate (Hz).
    pub sample_rate: f64,
}

impl DetectorConfig {
    pub fn new(sample_rate: f64) -> Self {
        Self {
            responsivity: DEFAULT_RESPONSIVITY,
            bandwidth: sample_rate / 2.0,
            sample_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.responsivity.is_finite() && self.responsivity > 0.0,
            InvalidConfig,
            "responsivity must be positive"
        );
        ensure!(
            self.bandwidth.is_finite() && self.bandwidth > 0.0,
            InvalidConfig,
            "bandwidth must be positive"
        );
        ensure!(
            self.sample_rate.is_finite() && self.sample_rate > 0.0,
            InvalidConfig,
            "sample rate must be positive"
        );
        Ok(())
    }

    pub fn dc_current(&self, optical: &OpticalConfig) -> f64 {
        self.responsivity * optical.dc_intensity()
    }

    pub fn ac_current(&self, optical: &OpticalConfig) -> f64 {
        self.responsivity * optical.ac_intensity()
    }
}

/// Carrier frequency and detector rate chosen for a given peak target speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierPlan {
    pub bragg_shift: f64,
    pub sample_rate: f64,
    pub max_doppler: f64,
}

impl CarrierPlan {
    /// Sizes the carrier at `1.5 × f_d,max + 100 kHz` and the detector at four
    /// times that, then rounds the detector rate up to `output_rate × D`
    /// with D even and 5-smooth so the demodulator decimates in small integer
    /// stages. The carrier is then exactly a quarter of the detector rate.
    pub fn for_peak_speed(peak_speed: f64, wavelength: f64, output_rate: f64) -> Result<Self> {
        let max_doppler = doppler_shift(peak_speed.abs(), wavelength)?;
        ensure!(
            output_rate.is_finite() && output_rate > 0.0,
            InvalidConfig,
            "output rate must be positive"
        );
        let min_rate = 4.0 * (1.5 * max_doppler + 100e3);
        let factor = smooth_even_at_least((min_rate / output_rate).ceil() as u64);
        let sample_rate = output_rate * factor as f64;
        Ok(Self {
            bragg_shift: sample_rate / 4.0,
            sample_rate,
            max_doppler,
        })
    }

    pub fn for_profile(profile: &MotionProfile, wavelength: f64) -> Result<Self> {
        Self::for_peak_speed(profile.peak_speed(), wavelength, DEFAULT_OUTPUT_RATE)
    }

    pub fn decimation(&self, output_rate: f64) -> f64 {
        self.sample_rate / output_rate
    }
}

/// Smallest even 5-smooth integer ≥ `n`.
pub(crate) fn smooth_even_at_least(n: u64) -> u64 {
    let mut m = n.max(2);
    loop {
        if m % 2 == 0 {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
        }
        m += 1;
    }
}

pub(crate) fn check_heterodyne_nyquist(sample_rate: f64, bragg_shift: f64, max_doppler: f64) -> Result<()> {
    let top = bragg_shift + max_doppler.abs();
    // Negated so that NaN rates are rejected.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(sample_rate > 2.0 * top) {
        return Err(Error::SamplingViolation(format!(
            "sample rate {sample_rate} Hz does not cover carrier {bragg_shift} Hz + Doppler {} Hz",
            max_doppler.abs()
        )));
    }
    Ok(())
}

/// Complex reference and measurement fields with the optical carrier removed.
/// `|E|²` is in W.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub sample_rate: f64,
    pub reference: Vec<Complex64>,
    pub measurement: Vec<Complex64>,
}

impl FieldPair {
    /// Detected intensity `|E_m + E_r|²` per sample.
    pub fn superposed_intensity(&self) -> Vec<f64> {
        self.reference
            .iter()
            .zip(&self.measurement)
            .map(|(r, m)| (r + m).norm_sqr())
            .collect()
    }
}

/// Per-sample evaluator shared by whole-signal and range synthesis.
#[derive(Debug, Clone, Copy)]
pub struct Interferometer {
    carrier_ratio: f64,
    phase_per_meter: f64,
    dc_current: f64,
    ac_current: f64,
    sample_rate: f64,
}

impl Interferometer {
    pub fn new(optical: &OpticalConfig, detector: &DetectorConfig) -> Result<Self> {
        optical.validate()?;
        detector.validate()?;
        Ok(Self {
            carrier_ratio: optical.bragg_shift / detector.sample_rate,
            phase_per_meter: 4.0 * PI / optical.wavelength,
            dc_current: detector.dc_current(optical),
            ac_current: detector.ac_current(optical),
            sample_rate: detector.sample_rate,
        })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn dc_current(&self) -> f64 {
        self.dc_current
    }

    pub fn ac_current(&self) -> f64 {
        self.ac_current
    }

    /// Beat argument `2π f_b t − φ(t)` at sample `n`.
    #[inline]
    pub fn beat_argument(&self, n: i64, displacement: f64) -> f64 {
        TAU * carrier_cycles(n, self.carrier_ratio) - self.phase_per_meter * displacement
    }

    #[inline]
    pub fn current(&self, n: i64, displacement: f64) -> f64 {
        self.dc_current + self.ac_current * self.beat_argument(n, displacement).cos()
    }

    /// Clean photocurrent for samples `n0..n0 + out.len()` driven directly by
    /// `profile`. Bit-identical to [`synth_detector_signal`] on the same grid.
    pub fn fill_range(&self, profile: &MotionProfile, n0: i64, out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            let n = n0 + i as i64;
            let x = profile.displacement_at(n as f64 / self.sample_rate);
            *slot = self.current(n, x);
        }
    }
}

/// Fractional carrier cycles at sample `n`, in [0, 1).
#[inline]
pub(crate) fn carrier_cycles(n: i64, ratio: f64) -> f64 {
    (n as f64 * ratio).rem_euclid(1.0)
}

/// Reference field `√(I_r L_r)` at constant phase and measurement field
/// `√(I_m L_m R)·exp(i(2π f_b t − φ(t)))`.
pub fn synth_fields(kin: &SampledKinematics, optical: &OpticalConfig) -> Result<FieldPair> {
    optical.validate()?;
    check_heterodyne_nyquist(
        kin.sample_rate,
        optical.bragg_shift,
        doppler_shift(kin.max_abs_velocity(), optical.wavelength)?,
    )?;
    let e_ref = Complex64::new(optical.reference_arm_intensity().sqrt(), 0.0);
    let e_meas = optical.measurement_arm_intensity().sqrt();
    let ratio = optical.bragg_shift / kin.sample_rate;
    let k = 4.0 * PI / optical.wavelength;
    let measurement = kin
        .displacement
        .iter()
        .enumerate()
        .map(|(n, &x)| Complex64::from_polar(e_meas, TAU * carrier_cycles(n as i64, ratio) - k * x))
        .collect();
    Ok(FieldPair {
        sample_rate: kin.sample_rate,
        reference: vec![e_ref; kin.len()],
        measurement,
    })
}

/// Photocurrent `ρ·[I_m L_m R + I_r L_r + 2K√(I_m L_m R I_r L_r)·cos(2π f_b t − φ(t))]`.
pub fn synth_detector_signal(
    kin: &SampledKinematics,
    optical: &OpticalConfig,
    detector: &DetectorConfig,
) -> Result<TimeSeries> {
    let model = Interferometer::new(optical, detector)?;
    ensure!(
        kin.sample_rate == detector.sample_rate,
        InvalidConfig,
        "kinematics sampled at {} Hz but detector runs at {} Hz",
        kin.sample_rate,
        detector.sample_rate
    );
    check_heterodyne_nyquist(
        detector.sample_rate,
        optical.bragg_shift,
        doppler_shift(kin.max_abs_velocity(), optical.wavelength)?,
    )?;
    let samples = kin
        .displacement
        .iter()
        .enumerate()
        .map(|(n, &x)| model.current(n as i64, x))
        .collect();
    TimeSeries::new(detector.sample_rate, samples)
}
