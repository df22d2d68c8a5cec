//! End-to-end scenario execution.

use rayon::prelude::*;

use crate::demod::{demodulate_source, input_span, VibrationRecord};
use crate::dsp::{
    compute_spectrum_padded, fit_sinusoid, henderson_smooth, peak_frequency, Spectrum, Window, ANALYSIS_PAD,
};
use crate::error::Result;
use crate::harness::report::{CalibrationRow, ComparisonReport};
use crate::harness::scenario::{
    calibration_scenario, component_scenarios, ResolvedScenario, Scenario, CALIBRATION_ROWS,
};
use crate::motion::{sample_count, synth_kinematics};
use crate::noise::{NoiseConfig, NoiseSource, RandomSeed};
use crate::optics::Interferometer;
use crate::reference::simulate_accelerometer;
use crate::series::TimeSeries;

/// Detector samples synthesized per streaming chunk.
const CHUNK: usize = 1 << 15;
/// Accelerometer kinematics are synthesized at this multiple of its rate.
const ACCEL_OVERSAMPLE: f64 = 4.0;

const LDV_STREAM: u64 = 1;
const ACCEL_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Full outcome of one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub report: ComparisonReport,
    pub record: VibrationRecord,
    pub ldv_spectrum: Spectrum,
    pub accel_spectrum: Spectrum,
    pub accelerometer: TimeSeries,
}

impl ScenarioRun {
    pub fn within(&self, tol: &crate::harness::Tolerances) -> bool {
        let r = &self.report;
        r.ldv_error().abs() <= tol.ldv && r.accel_error().abs() <= tol.accel && r.cross_channel_spread() <= tol.cross
    }
}

/// Streams the LDV channel: synthesis, noise and demodulation, chunk by chunk.
pub fn run_ldv_channel(s: &ResolvedScenario) -> Result<VibrationRecord> {
    let model = Interferometer::new(&s.optical, &s.detector)?;
    let count = sample_count(s.demod.output_rate, s.duration);
    let (first, end) = input_span(&s.demod, count)?;
    let noise = NoiseSource::new(
        &s.noise,
        model.dc_current(),
        s.detector.sample_rate,
        first,
        (end - first) as usize,
        s.seed.substream(LDV_STREAM),
    )?;
    demodulate_source(&s.demod, s.optical.wavelength, count, CHUNK, |n0, buf| {
        model.fill_range(&s.motion, n0, buf);
        noise.apply_range(n0, buf);
        Ok(())
    })
}

pub fn run_accel_channel(s: &ResolvedScenario) -> Result<TimeSeries> {
    let rate = s.accelerometer.sample_rate * ACCEL_OVERSAMPLE;
    let kin = synth_kinematics(&s.motion, rate, s.duration)?;
    simulate_accelerometer(&kin, &s.accelerometer, s.seed.substream(ACCEL_STREAM))
}

/// Analysis spectrum of recovered displacement, Henderson-smoothed first
/// when the scenario asks for it.
pub fn ldv_spectrum(record: &VibrationRecord, henderson_terms: usize) -> Result<Spectrum> {
    let disp = if henderson_terms > 0 {
        henderson_smooth(&record.displacement, henderson_terms)?
    } else {
        record.displacement.clone()
    };
    compute_spectrum_padded(&disp, Window::Hann, ANALYSIS_PAD)
}

pub fn run_scenario_detailed(s: &Scenario) -> Result<ScenarioRun> {
    let r = s.resolve()?;
    run_resolved(&r).map_err(|e| e.in_scenario(&s.name))
}

fn run_resolved(r: &ResolvedScenario) -> Result<ScenarioRun> {
    let record = run_ldv_channel(r)?;
    let ldv_spectrum = ldv_spectrum(&record, r.henderson_terms)?;
    let ldv = peak_frequency(&ldv_spectrum, r.analysis_band)?;
    let (amplitude, _) = fit_sinusoid(&record.displacement, ldv.frequency)?;
    let accelerometer = run_accel_channel(r)?;
    let accel_spectrum = compute_spectrum_padded(&accelerometer, Window::Hann, ANALYSIS_PAD)?;
    let accel = peak_frequency(&accel_spectrum, r.analysis_band)?;
    Ok(ScenarioRun {
        report: ComparisonReport {
            component: r.name.clone(),
            truth_frequency: r.truth.frequency,
            ldv_frequency: ldv.frequency,
            accel_frequency: accel.frequency,
            displacement_amplitude_recovered: amplitude,
        },
        record,
        ldv_spectrum,
        accel_spectrum,
        accelerometer,
    })
}

pub fn run_scenario(s: &Scenario) -> Result<ComparisonReport> {
    run_scenario_detailed(s).map(|run| run.report)
}

/// Worker count: `LDV_LAB_THREADS` when set to a positive integer, else
/// one per available core.
pub fn thread_count() -> usize {
    std::env::var("LDV_LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs scenarios in order or on a bounded pool; results keep input order
/// and do not depend on the schedule.
pub fn run_many(scenarios: &[Scenario], execution: Execution) -> Result<Vec<ScenarioRun>> {
    match execution {
        Execution::Serial => scenarios.iter().map(run_scenario_detailed).collect(),
        Execution::Parallel => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(thread_count())
                .build()
                .map_err(|e| crate::Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
            pool.install(|| scenarios.par_iter().map(run_scenario_detailed).collect())
        }
    }
}

/// Calibration sweep scenarios; row `i` draws from `seed.substream(i)`.
pub fn calibration_suite(seed: RandomSeed, noise: &NoiseConfig) -> Vec<Scenario> {
    (0..CALIBRATION_ROWS.len())
        .map(|i| {
            calibration_scenario(i)
                .with_noise(noise.clone())
                .with_seed(seed.substream(i as u64))
        })
        .collect()
}

/// Component scenarios with per-index seeds.
pub fn component_suite(seed: RandomSeed) -> Vec<Scenario> {
    component_scenarios()
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.with_seed(seed.substream(i as u64)))
        .collect()
}

pub fn calibration_rows(runs: &[ScenarioRun]) -> Vec<CalibrationRow> {
    runs.iter()
        .zip(CALIBRATION_ROWS)
        .map(|(run, (f, a, tol))| CalibrationRow {
            applied_frequency: f,
            applied_displacement: a,
            indicated_frequency: run.report.ldv_frequency,
            tolerance: tol,
            recovered_displacement: run.report.displacement_amplitude_recovered,
        })
        .collect()
}

pub fn run_calibration_table_with(
    seed: RandomSeed,
    noise: &NoiseConfig,
    execution: Execution,
) -> Result<Vec<CalibrationRow>> {
    Ok(calibration_rows(&run_many(&calibration_suite(seed, noise), execution)?))
}

/// The calibration sweep under the default noise model.
pub fn run_calibration_table(seed: RandomSeed) -> Result<Vec<CalibrationRow>> {
    run_calibration_table_with(seed, &NoiseConfig::default(), Execution::Parallel)
}

pub fn run_component_suite_with(seed: RandomSeed, execution: Execution) -> Result<Vec<ScenarioRun>> {
    run_many(&component_suite(seed), execution)
}

pub fn run_component_suite(seed: RandomSeed) -> Result<Vec<ComparisonReport>> {
    Ok(run_component_suite_with(seed, Execution::Parallel)?
        .into_iter()
        .map(|r| r.report)
        .collect())
}
