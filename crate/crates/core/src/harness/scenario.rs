//! Scenario definitions, TOML loading and the built-in suites.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::DEFAULT_OUTPUT_RATE;
use crate::demod::DemodConfig;
use crate::error::{ensure, Error, Result};
use crate::motion::{MotionProfile, Tone};
use crate::noise::{NoiseConfig, RandomSeed};
use crate::optics::{check_heterodyne_nyquist, CarrierPlan, DetectorConfig, OpticalConfig, DEFAULT_WAVELENGTH};
use crate::reference::AccelerometerConfig;

pub const DEFAULT_DURATION: f64 = 2.0;
pub const DEFAULT_HENDERSON_TERMS: usize = 13;

/// Optical parameters left `None` take the bench defaults; the carrier
/// defaults to the sizing rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticalOverrides {
    pub wavelength: Option<f64>,
    pub bragg_shift: Option<f64>,
    pub mixing_efficiency: Option<f64>,
    pub reflectivity: Option<f64>,
    pub intensity_measurement: Option<f64>,
    pub intensity_reference: Option<f64>,
    pub loss_reference: Option<f64>,
    pub loss_measurement: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorOverrides {
    pub responsivity: Option<f64>,
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemodOverrides {
    pub lowpass_cutoff: Option<f64>,
    pub output_rate: Option<f64>,
}

/// Pass/fail bands of a comparison run (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub ldv: f64,
    pub accel: f64,
    /// Largest allowed LDV/accelerometer disagreement.
    pub cross: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ldv: 0.15,
            accel: 0.5,
            cross: 1.0,
        }
    }
}

fn default_duration() -> f64 {
    DEFAULT_DURATION
}

fn default_henderson() -> usize {
    DEFAULT_HENDERSON_TERMS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Taken from the table key when loaded from a file.
    #[serde(default)]
    pub name: String,
    pub motion: MotionProfile,
    #[serde(default)]
    pub optical: OpticalOverrides,
    #[serde(default)]
    pub detector: DetectorOverrides,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub demod: DemodOverrides,
    #[serde(default)]
    pub accelerometer: AccelerometerConfig,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default)]
    pub seed: RandomSeed,
    /// Peak search band (Hz).
    pub analysis_band: (f64, f64),
    /// Henderson smoothing of the recovered displacement; 0 disables it.
    #[serde(default = "default_henderson")]
    pub henderson_terms: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Scenario {
    pub fn new(name: impl Into<String>, motion: MotionProfile, analysis_band: (f64, f64)) -> Self {
        Self {
            name: name.into(),
            motion,
            optical: OpticalOverrides::default(),
            detector: DetectorOverrides::default(),
            noise: NoiseConfig::default(),
            demod: DemodOverrides::default(),
            accelerometer: AccelerometerConfig::default(),
            duration: DEFAULT_DURATION,
            seed: RandomSeed::default(),
            analysis_band,
            henderson_terms: DEFAULT_HENDERSON_TERMS,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_noise(mut self, noise: NoiseConfig) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_seed(mut self, seed: RandomSeed) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    /// Ground truth: the largest-amplitude tone inside the analysis band.
    pub fn truth(&self) -> Result<Tone> {
        let tones = self
            .motion
            .tones()
            .ok_or_else(|| Error::InvalidProfile("chirp profiles have no single ground-truth frequency".into()))?;
        let (lo, hi) = self.analysis_band;
        tones
            .iter()
            .filter(|t| t.frequency >= lo && t.frequency <= hi)
            .copied()
            .max_by(|a, b| a.amplitude.total_cmp(&b.amplitude))
            .ok_or_else(|| Error::InvalidConfig(format!("no motion tone inside the analysis band {lo}..{hi} Hz")))
    }

    /// Applies defaults and the carrier-sizing rule, and checks every
    /// cross-module invariant.
    pub fn resolve(&self) -> Result<ResolvedScenario> {
        self.resolve_inner().map_err(|e| e.in_scenario(&self.name))
    }

    fn resolve_inner(&self) -> Result<ResolvedScenario> {
        self.motion.validate()?;
        let truth = self.truth()?;
        let f_min = self.motion.min_frequency();
        ensure!(
            self.duration.is_finite() && self.duration >= 16.0 / f_min,
            InvalidConfig,
            "duration {} s is shorter than 16 periods of the lowest tone ({} s)",
            self.duration,
            16.0 / f_min
        );
        let o = &self.optical;
        let wavelength = o.wavelength.unwrap_or(DEFAULT_WAVELENGTH);
        let output_rate = self.demod.output_rate.unwrap_or(DEFAULT_OUTPUT_RATE);
        let plan = CarrierPlan::for_peak_speed(self.motion.peak_speed(), wavelength, output_rate)?;
        let sample_rate = self.detector.sample_rate.unwrap_or(plan.sample_rate);
        let base = OpticalConfig::with_carrier(o.bragg_shift.unwrap_or(plan.bragg_shift));
        let optical = OpticalConfig {
            wavelength,
            bragg_shift: base.bragg_shift,
            mixing_efficiency: o.mixing_efficiency.unwrap_or(base.mixing_efficiency),
            reflectivity: o.reflectivity.unwrap_or(base.reflectivity),
            intensity_measurement: o.intensity_measurement.unwrap_or(base.intensity_measurement),
            intensity_reference: o.intensity_reference.unwrap_or(base.intensity_reference),
            loss_reference: o.loss_reference.unwrap_or(base.loss_reference),
            loss_measurement: o.loss_measurement.unwrap_or(base.loss_measurement),
        };
        optical.validate()?;
        let mut detector = DetectorConfig::new(sample_rate);
        if let Some(r) = self.detector.responsivity {
            detector.responsivity = r;
        }
        detector.validate()?;
        check_heterodyne_nyquist(sample_rate, optical.bragg_shift, plan.max_doppler)?;
        let mut demod = DemodConfig::new(optical.bragg_shift, sample_rate);
        demod.output_rate = output_rate;
        if let Some(c) = self.demod.lowpass_cutoff {
            demod.lowpass_cutoff = c;
        }
        demod.validate()?;
        self.noise.validate()?;
        self.accelerometer.validate()?;
        let (lo, hi) = self.analysis_band;
        ensure!(
            lo >= 0.0 && lo < hi && hi <= output_rate / 2.0,
            InvalidConfig,
            "analysis band {lo}..{hi} Hz must be increasing and below {} Hz",
            output_rate / 2.0
        );
        ensure!(
            self.henderson_terms == 0 || (self.henderson_terms >= 5 && self.henderson_terms % 2 == 1),
            InvalidConfig,
            "Henderson smoothing needs 0 (off) or an odd term count of at least 5"
        );
        Ok(ResolvedScenario {
            name: self.name.clone(),
            motion: self.motion.clone(),
            truth,
            optical,
            detector,
            demod,
            noise: self.noise.clone(),
            accelerometer: self.accelerometer,
            duration: self.duration,
            seed: self.seed,
            analysis_band: self.analysis_band,
            henderson_terms: self.henderson_terms,
            tolerances: self.tolerances,
        })
    }
}

/// A scenario with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScenario {
    pub name: String,
    pub motion: MotionProfile,
    pub truth: Tone,
    pub optical: OpticalConfig,
    pub detector: DetectorConfig,
    pub demod: DemodConfig,
    pub noise: NoiseConfig,
    pub accelerometer: AccelerometerConfig,
    pub duration: f64,
    pub seed: RandomSeed,
    pub analysis_band: (f64, f64),
    pub henderson_terms: usize,
    pub tolerances: Tolerances,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    scenario: BTreeMap<String, Scenario>,
}

/// Parses `[scenario.<name>]` tables.
pub fn parse_scenarios(text: &str, origin: &Path) -> Result<Vec<Scenario>> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(file
        .scenario
        .into_iter()
        .map(|(name, mut s)| {
            s.name = name;
            s
        })
        .collect())
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenarios(&text, path)
}

/// Looks `name` up in `config`, or among the built-ins when no file is given.
pub fn find_scenario(config: Option<&Path>, name: &str) -> Result<Scenario> {
    let all = match config {
        Some(p) => load_scenarios(p)?,
        None => builtin_scenarios(),
    };
    let known: Vec<String> = all.iter().map(|s| s.name.clone()).collect();
    all.into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario `{name}`; available: {}", known.join(", "))))
}

/// Applied (frequency Hz, displacement m, tolerance Hz) of the calibration sweep.
pub const CALIBRATION_ROWS: [(f64, f64, f64); 11] = [
    (10.0, 163e-6, 0.30),
    (20.0, 4.15e-3, 0.20),
    (30.0, 1.68e-3, 0.15),
    (40.0, 336e-6, 0.15),
    (50.0, 184e-6, 0.15),
    (60.0, 1.70e-3, 0.15),
    (70.0, 434e-6, 0.15),
    (80.0, 1.16e-3, 0.15),
    (90.0, 165e-6, 0.15),
    (100.0, 770e-6, 0.15),
    (130.0, 401e-6, 0.15),
];

/// One calibration row as a scenario; the LDV tolerance is the row's.
pub fn calibration_scenario(index: usize) -> Scenario {
    let (f, a, tol) = CALIBRATION_ROWS[index];
    let mut s = Scenario::new(
        format!("calibration-{:03}hz", f as u32),
        MotionProfile::sinusoid(a, f),
        (0.5 * f, 1.5 * f),
    );
    s.tolerances.ldv = tol;
    s
}

/// Rough automotive surfaces: speckle on.
fn component_noise() -> NoiseConfig {
    NoiseConfig::all_enabled()
}

/// Component scenarios compared across channels.
pub fn component_scenarios() -> Vec<Scenario> {
    // Both gear meshes show up in each record; the driven one dominates.
    let gear = |name: &str, main: f64, side: f64, band: (f64, f64)| {
        let mut tones = vec![Tone::new(1e-4, main), Tone::new(5e-5, side)];
        tones.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        Scenario::new(name, MotionProfile::multi_tone(tones), band).with_noise(component_noise())
    };
    vec![
        Scenario::new("pad", MotionProfile::sinusoid(5e-4, 6.0), (3.0, 9.0))
            .with_noise(component_noise())
            .with_duration(3.0),
        Scenario::new("air-filter", MotionProfile::sinusoid(2e-4, 32.0), (25.0, 39.0)).with_noise(component_noise()),
        gear("gear", 76.0, 85.0, (70.0, 80.5)),
        gear("gear-variant", 85.0, 76.0, (80.5, 90.0)),
    ]
}

/// The air filter excited at 40 Hz, cross-checked against the accelerometer.
pub fn air_filter_40hz() -> Scenario {
    Scenario::new("air-filter-40hz", MotionProfile::sinusoid(2e-4, 40.0), (33.0, 47.0)).with_noise(component_noise())
}

/// Every built-in scenario, for lookup by name.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let mut all = component_scenarios();
    all.push(air_filter_40hz());
    all.extend((0..CALIBRATION_ROWS.len()).map(calibration_scenario));
    all
}
