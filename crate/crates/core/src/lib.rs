//! Simulation and analysis of a heterodyne laser Doppler vibrometer.
//!
//! The chain runs target kinematics ([`motion`]) through the interferometer
//! ([`optics`]), adds detector noise ([`noise`]), demodulates the photocurrent
//! back to displacement and velocity ([`demod`]) and estimates vibration
//! frequencies ([`dsp`]). A simulated accelerometer ([`reference`]) provides
//! the cross-check channel, and [`harness`] runs whole scenarios and writes
//! reports.

pub mod demod;
pub mod dsp;
pub mod error;
pub mod harness;
pub mod motion;
pub mod noise;
pub mod optics;
pub mod reference;
pub mod series;

pub use error::{Error, Result};
pub use motion::{MotionProfile, SampledKinematics, Tone};
pub use noise::{NoiseConfig, NoiseKind, RandomSeed};
pub use optics::{DetectorConfig, OpticalConfig};
pub use series::{ComplexSeries, TimeSeries};

/// Fixed physical constants (SI).
pub mod constants {
    pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const BOLTZMANN: f64 = 1.380_649e-23;

    /// Vibration-analysis sample rate.
    pub const DEFAULT_OUTPUT_RATE: f64 = 20e3;
}
