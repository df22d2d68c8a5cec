mod common;

use std::f64::consts::TAU;

use common::{mean, rms};
use ldv_core::dsp::fit_sinusoid;
use ldv_core::motion::synth_kinematics;
use ldv_core::reference::{accel_peak_frequency, simulate_accelerometer, AccelerometerConfig};
use ldv_core::{MotionProfile, RandomSeed, Tone};
use proptest::prelude::*;

fn noiseless() -> AccelerometerConfig {
    AccelerometerConfig {
        noise_floor_density: 0.0,
        ..AccelerometerConfig::default()
    }
}

#[test]
fn noise_floor_matches_density() {
    let kin = synth_kinematics(&MotionProfile::sinusoid(0.0, 10.0), 80e3, 10.0).unwrap();
    let cfg = AccelerometerConfig::default();
    let v = simulate_accelerometer(&kin, &cfg, RandomSeed::new(3)).unwrap();
    let expect = 1e-4 * 0.1 * (10e3f64).sqrt();
    assert!((cfg.noise_rms() - expect).abs() < 1e-15);
    assert!((rms(&v.samples) / expect - 1.0).abs() < 0.01);
    assert!(mean(&v.samples).abs() < 1e-5);
}

/// Twice-differentiated displacement drives the same channel output as the
/// analytic acceleration, up to the difference-operator error.
#[test]
fn analytic_and_differentiated_acceleration_agree() {
    let fs = 80e3;
    let profile = MotionProfile::multi_tone(vec![Tone::new(1e-4, 76.0), Tone::new(5e-5, 85.0)]);
    let kin = synth_kinematics(&profile, fs, 1.0).unwrap();
    let mut numeric = kin.clone();
    let x = &kin.displacement;
    for i in 1..x.len() - 1 {
        numeric.acceleration[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) * fs * fs;
    }
    let (first, last) = (numeric.acceleration[1], numeric.acceleration[x.len() - 2]);
    numeric.acceleration[0] = first;
    *numeric.acceleration.last_mut().unwrap() = last;
    let a = simulate_accelerometer(&kin, &noiseless(), RandomSeed::new(0)).unwrap();
    let b = simulate_accelerometer(&numeric, &noiseless(), RandomSeed::new(0)).unwrap();
    let skip = 200;
    let diff: Vec<f64> = a.samples[skip..a.len() - skip]
        .iter()
        .zip(&b.samples[skip..b.len() - skip])
        .map(|(p, q)| p - q)
        .collect();
    assert!(rms(&diff) < 1e-4 * rms(&a.samples), "{}", rms(&diff) / rms(&a.samples));
}

#[test]
fn gear_tone_is_located() {
    let profile = MotionProfile::multi_tone(vec![Tone::new(1e-4, 76.0), Tone::new(5e-5, 85.0)]);
    let kin = synth_kinematics(&profile, 80e3, 2.0).unwrap();
    let v = simulate_accelerometer(&kin, &AccelerometerConfig::default(), RandomSeed::new(12)).unwrap();
    let p = accel_peak_frequency(&v, (70.0, 80.5)).unwrap();
    assert!((p.frequency - 76.0).abs() <= 0.5, "{}", p.frequency);
}

#[test]
fn invalid_configs_are_rejected() {
    let kin = synth_kinematics(&MotionProfile::sinusoid(1e-4, 10.0), 80e3, 0.1).unwrap();
    for cfg in [
        AccelerometerConfig {
            sensitivity: 0.0,
            ..AccelerometerConfig::default()
        },
        AccelerometerConfig {
            noise_floor_density: -1.0,
            ..AccelerometerConfig::default()
        },
        AccelerometerConfig {
            bandwidth: 12e3,
            ..AccelerometerConfig::default()
        },
    ] {
        assert!(simulate_accelerometer(&kin, &cfg, RandomSeed::new(0)).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// In-band tones come out at sensitivity·(2πf)²·A.
    #[test]
    fn amplitude_law(f in 5.0f64..3000.0, a in 1e-7f64..1e-3) {
        let kin = synth_kinematics(&MotionProfile::sinusoid(a, f), 80e3, 0.5).unwrap();
        let v = simulate_accelerometer(&kin, &noiseless(), RandomSeed::new(1)).unwrap();
        let (amp, _) = fit_sinusoid(&v, f).unwrap();
        let expect = 0.1 * (TAU * f).powi(2) * a;
        prop_assert!((amp / expect - 1.0).abs() < 5e-3, "{} vs {}", amp, expect);
    }

    #[test]
    fn accelerometer_is_deterministic(seed in any::<u64>()) {
        let kin = synth_kinematics(&MotionProfile::sinusoid(1e-4, 32.0), 80e3, 0.1).unwrap();
        let cfg = AccelerometerConfig::default();
        let a = simulate_accelerometer(&kin, &cfg, RandomSeed::new(seed)).unwrap();
        let b = simulate_accelerometer(&kin, &cfg, RandomSeed::new(seed)).unwrap();
        prop_assert_eq!(a, b);
    }
}
