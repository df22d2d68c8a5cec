//! Prescribed target kinematics.
//!
//! A [`MotionProfile`] describes the out-of-plane displacement of the target
//! surface as a closed-form function of time. Velocity and acceleration are
//! the analytic derivatives, so all three series of a [`SampledKinematics`]
//! are mutually consistent to rounding error.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::series::TimeSeries;

/// One sinusoidal displacement component `amplitude * sin(2π f t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    /// Displacement amplitude in meters.
    pub amplitude: f64,
    /// Frequency in Hz.
    pub frequency: f64,
    /// Phase in radians.
    #[serde(default)]
    pub phase: f64,
}

impl Tone {
    pub fn new(amplitude: f64, frequency: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase: 0.0,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }
}

/// Linear frequency sweep of constant displacement amplitude.
///
/// The instantaneous frequency ramps from `f_start` at t = 0 to `f_end` at
/// `t = sweep_time`, and holds the end value outside that window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chirp {
    pub amplitude: f64,
    pub f_start: f64,
    pub f_end: f64,
    pub sweep_time: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MotionProfile {
    Sinusoid(Tone),
    MultiTone { components: Vec<Tone> },
    Chirp(Chirp),
}

/// Displacement, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KinematicState {
    pub displacement: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

impl MotionProfile {
    pub fn sinusoid(amplitude: f64, frequency: f64) -> Self {
        MotionProfile::Sinusoid(Tone::new(amplitude, frequency))
    }

    pub fn multi_tone(components: Vec<Tone>) -> Self {
        MotionProfile::MultiTone { components }
    }

    pub fn validate(&self) -> Result<()> {
        let check_tone = |t: &Tone| -> Result<()> {
            ensure!(
                t.amplitude.is_finite() && t.amplitude >= 0.0,
                InvalidProfile,
                "amplitude must be finite and non-negative, got {}",
                t.amplitude
            );
            ensure!(
                t.frequency.is_finite() && t.frequency > 0.0,
                InvalidProfile,
                "frequency must be positive, got {}",
                t.frequency
            );
            ensure!(t.phase.is_finite(), InvalidProfile, "phase must be finite");
            Ok(())
        };
        match self {
            MotionProfile::Sinusoid(t) => check_tone(t),
            MotionProfile::MultiTone { components } => {
                ensure!(!components.is_empty(), InvalidProfile, "profile has no components");
                components.iter().try_for_each(check_tone)?;
                ensure!(
                    components.windows(2).all(|w| w[0].frequency < w[1].frequency),
                    InvalidProfile,
                    "multi-tone frequencies must be strictly increasing"
                );
                Ok(())
            }
            MotionProfile::Chirp(c) => {
                ensure!(
                    c.amplitude.is_finite() && c.amplitude >= 0.0,
                    InvalidProfile,
                    "chirp amplitude must be non-negative"
                );
                ensure!(
                    c.f_start > 0.0 && c.f_end > 0.0 && c.f_start.is_finite() && c.f_end.is_finite(),
                    InvalidProfile,
                    "chirp frequencies must be positive"
                );
                ensure!(
                    c.sweep_time.is_finite() && c.sweep_time > 0.0,
                    InvalidProfile,
                    "chirp sweep time must be positive"
                );
                ensure!(c.phase.is_finite(), InvalidProfile, "phase must be finite");
                Ok(())
            }
        }
    }

    /// Sinusoidal components, or `None` for a chirp.
    pub fn tones(&self) -> Option<&[Tone]> {
        match self {
            MotionProfile::Sinusoid(t) => Some(std::slice::from_ref(t)),
            MotionProfile::MultiTone { components } => Some(components),
            MotionProfile::Chirp(_) => None,
        }
    }

    pub fn max_frequency(&self) -> f64 {
        match self {
            MotionProfile::Chirp(c) => c.f_start.max(c.f_end),
            _ => self
                .tones()
                .unwrap_or_default()
                .iter()
                .map(|t| t.frequency)
                .fold(0.0, f64::max),
        }
    }

    pub fn min_frequency(&self) -> f64 {
        match self {
            MotionProfile::Chirp(c) => c.f_start.min(c.f_end),
            _ => self
                .tones()
                .unwrap_or_default()
                .iter()
                .map(|t| t.frequency)
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Upper bound on `|v(t)|`: the sum of per-component peak speeds `2π f A`.
    /// Exact for a single tone.
    pub fn peak_speed(&self) -> f64 {
        match self {
            MotionProfile::Chirp(c) => TAU * c.f_start.max(c.f_end) * c.amplitude,
            _ => self
                .tones()
                .unwrap_or_default()
                .iter()
                .map(|t| TAU * t.frequency * t.amplitude)
                .sum(),
        }
    }

    pub fn displacement_at(&self, t: f64) -> f64 {
        match self {
            MotionProfile::Chirp(c) => c.amplitude * chirp_phase(c, t).0.sin(),
            _ => self
                .tones()
                .unwrap_or_default()
                .iter()
                .map(|tone| tone.amplitude * (TAU * tone.frequency * t + tone.phase).sin())
                .sum(),
        }
    }

    pub fn state_at(&self, t: f64) -> KinematicState {
        match self {
            MotionProfile::Chirp(c) => {
                let (theta, rate, accel) = chirp_phase(c, t);
                let (s, co) = theta.sin_cos();
                KinematicState {
                    displacement: c.amplitude * s,
                    velocity: c.amplitude * co * rate,
                    acceleration: c.amplitude * (co * accel - s * rate * rate),
                }
            }
            _ => {
                let mut state = KinematicState::default();
                for tone in self.tones().unwrap_or_default() {
                    let w = TAU * tone.frequency;
                    let (s, co) = (w * t + tone.phase).sin_cos();
                    state.displacement += tone.amplitude * s;
                    state.velocity += tone.amplitude * w * co;
                    state.acceleration -= tone.amplitude * w * w * s;
                }
                state
            }
        }
    }
}

/// Returns (phase, dphase/dt, d²phase/dt²) of the chirp at time `t`.
fn chirp_phase(c: &Chirp, t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        (TAU * c.f_start * t + c.phase, TAU * c.f_start, 0.0)
    } else if t <= c.sweep_time {
        let slope = (c.f_end - c.f_start) / c.sweep_time;
        let theta = TAU * (c.f_start * t + 0.5 * slope * t * t) + c.phase;
        (theta, TAU * (c.f_start + slope * t), TAU * slope)
    } else {
        let at_end = TAU * 0.5 * (c.f_start + c.f_end) * c.sweep_time + c.phase;
        (at_end + TAU * c.f_end * (t - c.sweep_time), TAU * c.f_end, 0.0)
    }
}

/// Displacement (m), velocity (m/s) and acceleration (m/s²) sampled on a
/// common grid starting at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledKinematics {
    pub sample_rate: f64,
    pub displacement: Vec<f64>,
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
}

impl SampledKinematics {
    pub fn len(&self) -> usize {
        self.displacement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.displacement.is_empty()
    }

    pub fn displacement_series(&self) -> TimeSeries {
        TimeSeries {
            sample_rate: self.sample_rate,
            samples: self.displacement.clone(),
        }
    }

    pub fn velocity_series(&self) -> TimeSeries {
        TimeSeries {
            sample_rate: self.sample_rate,
            samples: self.velocity.clone(),
        }
    }

    pub fn acceleration_series(&self) -> TimeSeries {
        TimeSeries {
            sample_rate: self.sample_rate,
            samples: self.acceleration.clone(),
        }
    }

    pub fn max_abs_velocity(&self) -> f64 {
        self.velocity.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Number of samples covering `duration` seconds at `sample_rate`.
pub fn sample_count(sample_rate: f64, duration: f64) -> usize {
    ((duration * sample_rate).round() as usize).max(1)
}

/// Samples `profile` at `n / sample_rate` for `n` in `0..round(duration * sample_rate)`.
pub fn synth_kinematics(profile: &MotionProfile, sample_rate: f64, duration: f64) -> Result<SampledKinematics> {
    profile.validate()?;
    ensure!(
        duration.is_finite() && duration > 0.0,
        InvalidInput,
        "duration must be positive, got {duration}"
    );
    let f_max = profile.max_frequency();
    if !(sample_rate.is_finite() && sample_rate > 10.0 * f_max) {
        return Err(Error::SamplingViolation(format!(
            "sample rate {sample_rate} Hz must exceed 10x the highest motion frequency ({f_max} Hz)"
        )));
    }
    let n = sample_count(sample_rate, duration);
    let mut kin = SampledKinematics {
        sample_rate,
        displacement: Vec::with_capacity(n),
        velocity: Vec::with_capacity(n),
        acceleration: Vec::with_capacity(n),
    };
    for i in 0..n {
        let t = i as f64 / sample_rate;
        let s = profile.state_at(t);
        // `sin_cos` may round differently from `sin`; displacement must match
        // `displacement_at` exactly so range synthesis agrees with this grid.
        kin.displacement.push(profile.displacement_at(t));
        kin.velocity.push(s.velocity);
        kin.acceleration.push(s.acceleration);
    }
    Ok(kin)
}
