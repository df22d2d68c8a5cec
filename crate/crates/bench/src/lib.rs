//! Shared fixtures for the pipeline benchmarks.

use ldv_core::demod::DemodConfig;
use ldv_core::motion::synth_kinematics;
use ldv_core::optics::{synth_detector_signal, CarrierPlan, Interferometer, DEFAULT_WAVELENGTH};
use ldv_core::{DetectorConfig, MotionProfile, OpticalConfig, TimeSeries};

/// A 10 Hz, 163 µm vibration: the first calibration point.
pub fn calibration_motion() -> MotionProfile {
    MotionProfile::sinusoid(163e-6, 10.0)
}

/// Detector model, demodulator settings and motion for one carrier plan.
pub struct Fixture {
    pub motion: MotionProfile,
    pub model: Interferometer,
    pub demod: DemodConfig,
    pub optical: OpticalConfig,
    pub detector: DetectorConfig,
}

impl Fixture {
    pub fn new(motion: MotionProfile) -> Self {
        let plan = CarrierPlan::for_profile(&motion, DEFAULT_WAVELENGTH).expect("valid motion");
        let optical = OpticalConfig::with_carrier(plan.bragg_shift);
        let detector = DetectorConfig::new(plan.sample_rate);
        Self {
            model: Interferometer::new(&optical, &detector).expect("valid optics"),
            demod: DemodConfig::new(plan.bragg_shift, plan.sample_rate),
            motion,
            optical,
            detector,
        }
    }

    /// Noiseless detector current for the first `duration` seconds.
    pub fn detector_signal(&self, duration: f64) -> TimeSeries {
        let kin = synth_kinematics(&self.motion, self.detector.sample_rate, duration).expect("valid duration");
        synth_detector_signal(&kin, &self.optical, &self.detector).expect("valid plan")
    }
}

/// Unit tone plus a little deterministic dither, `n` samples at `fs`.
pub fn test_tone(fs: f64, n: usize, f: f64) -> TimeSeries {
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            (std::f64::consts::TAU * f * t).sin() + 1e-3 * ((i * 7919 % 1000) as f64 / 500.0 - 1.0)
        })
        .collect();
    TimeSeries::new(fs, samples).expect("positive rate")
}
