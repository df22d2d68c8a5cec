//! Heterodyne demodulation: quadrature mixing at the carrier, baseband
//! low-pass, arctangent phase, unwrapping, scaling to displacement and
//! decimation to the vibration-analysis rate.
//!
//! The streaming receiver ([`Receiver`]) and the whole-signal functions
//! share the same filters. In the receiver, output sample `k` is centred on
//! detector sample `k·D` (`D` the total decimation), so a source that can
//! synthesize the pre-roll `[-H, 0)` and the tail past the record end gives
//! outputs free of edge transients.

use std::f64::consts::{PI, TAU};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::DEFAULT_OUTPUT_RATE;
use crate::dsp::fir::{convolve_full, design_fir, odd_extend, FilterSpec};
use crate::dsp::stream::{Cascade, DecimationPlan, FirDecimator};
use crate::error::{ensure, Result};
use crate::optics::carrier_cycles;
use crate::series::{ComplexSeries, TimeSeries};

/// Stopband of the baseband low-pass (dB).
pub const BASEBAND_ATTEN_DB: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemodConfig {
    /// Carrier (Bragg) frequency f_b (Hz).
    pub carrier: f64,
    /// Detector sample rate (Hz).
    pub input_rate: f64,
    /// Baseband low-pass cutoff, centre of its transition band (Hz).
    pub lowpass_cutoff: f64,
    pub output_rate: f64,
}

impl DemodConfig {
    /// Default cutoff `0.8·f_b`: the carrier-sizing rule allows Doppler
    /// excursions up to `f_b / 1.5`, which a cutoff at `f_b / 2` would clip.
    pub fn new(carrier: f64, input_rate: f64) -> Self {
        Self {
            carrier,
            input_rate,
            lowpass_cutoff: 0.8 * carrier,
            output_rate: DEFAULT_OUTPUT_RATE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.carrier.is_finite() && self.carrier > 0.0,
            InvalidConfig,
            "carrier must be positive"
        );
        ensure!(
            self.lowpass_cutoff > 0.0 && self.lowpass_cutoff < self.carrier,
            InvalidConfig,
            "low-pass cutoff {} Hz must lie in (0, {}) Hz",
            self.lowpass_cutoff,
            self.carrier
        );
        ensure!(
            self.output_rate > 0.0 && self.output_rate <= self.input_rate,
            InvalidConfig,
            "output rate {} Hz must lie in (0, {}] Hz",
            self.output_rate,
            self.input_rate
        );
        self.decimation()?;
        Ok(())
    }

    /// Total decimation factor `input_rate / output_rate`.
    pub fn decimation(&self) -> Result<usize> {
        let ratio = self.input_rate / self.output_rate;
        let d = ratio.round();
        ensure!(
            d >= 1.0 && (ratio - d).abs() <= 1e-9 * ratio,
            InvalidConfig,
            "decimation factor {ratio} is not a positive integer"
        );
        Ok(d as usize)
    }

    /// Baseband low-pass with its transition band spanning
    /// `cutoff ± 0.8·(f_b − cutoff)`, so the stop edge stays below f_b.
    fn baseband_spec(&self) -> FilterSpec {
        FilterSpec::lowpass(
            self.lowpass_cutoff,
            1.6 * (self.carrier - self.lowpass_cutoff),
            BASEBAND_ATTEN_DB,
        )
    }
}

/// Recovered target motion at the output rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VibrationRecord {
    pub displacement: TimeSeries,
    pub velocity: TimeSeries,
    /// RMS phase removed by the final anti-alias stage at the kept samples.
    pub residual_phase_rms: f64,
}

/// Complex local oscillator `e^{-i2π f_b n / fs}`; tabulated when the
/// carrier is a simple fraction of the sample rate.
#[derive(Debug, Clone)]
struct Mixer {
    ratio: f64,
    table: Vec<Complex64>,
}

impl Mixer {
    fn new(carrier: f64, sample_rate: f64) -> Self {
        let ratio = carrier / sample_rate;
        let period = (1..=64).find(|&p| (ratio * p as f64).fract() == 0.0);
        let table = period
            .map(|p| (0..p).map(|n| Self::eval(ratio, n as i64)).collect())
            .unwrap_or_default();
        Self { ratio, table }
    }

    fn eval(ratio: f64, n: i64) -> Complex64 {
        Complex64::from_polar(1.0, -TAU * carrier_cycles(n, ratio))
    }

    #[inline]
    fn at(&self, n: i64) -> Complex64 {
        if self.table.is_empty() {
            Self::eval(self.ratio, n)
        } else {
            self.table[n.rem_euclid(self.table.len() as i64) as usize]
        }
    }
}

/// Quadrature downconversion and baseband low-pass at the full input rate.
/// The argument of the result is `-φ(t)` plus a constant. Edges are filtered
/// against zeros and need `taps / 2` samples to settle.
pub fn iq_demodulate(signal: &TimeSeries, cfg: &DemodConfig) -> Result<ComplexSeries> {
    cfg.validate()?;
    ensure!(
        signal.sample_rate == cfg.input_rate,
        InvalidInput,
        "signal sampled at {} Hz, demodulator expects {} Hz",
        signal.sample_rate,
        cfg.input_rate
    );
    let taps = design_fir(&cfg.baseband_spec(), cfg.input_rate)?;
    let mixer = Mixer::new(cfg.carrier, cfg.input_rate);
    let (re, im): (Vec<f64>, Vec<f64>) = signal
        .samples
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            let z = mixer.at(n as i64) * x;
            (z.re, z.im)
        })
        .unzip();
    let d = taps.len() / 2;
    let re = convolve_full(&re, &taps);
    let im = convolve_full(&im, &taps);
    Ok(ComplexSeries {
        sample_rate: signal.sample_rate,
        samples: (d..d + signal.len()).map(|k| Complex64::new(re[k], im[k])).collect(),
    })
}

/// Incremental unwrapper: each output differs from the previous one by the
/// raw difference plus a multiple of 2π chosen to land in (−π, π]. Steps of
/// exactly ±π are left alone.
#[derive(Debug, Clone, Default)]
pub struct PhaseUnwrapper {
    previous: Option<f64>,
    offset: f64,
}

impl PhaseUnwrapper {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, wrapped: f64) -> f64 {
        if let Some(prev) = self.previous {
            let d = wrapped - prev;
            if d.abs() > PI {
                self.offset -= TAU * ((d - PI) / TAU).ceil();
            }
        }
        self.previous = Some(wrapped);
        wrapped + self.offset
    }
}

pub fn unwrap_phase(wrapped: &TimeSeries) -> TimeSeries {
    let mut u = PhaseUnwrapper::new();
    TimeSeries {
        sample_rate: wrapped.sample_rate,
        samples: wrapped.samples.iter().map(|&p| u.push(p)).collect(),
    }
}

/// Second-order central differences with one-sided first-order ends.
pub fn central_difference(x: &[f64], sample_rate: f64) -> Vec<f64> {
    let n = x.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| match i {
                0 => (x[1] - x[0]) * sample_rate,
                i if i == n - 1 => (x[n - 1] - x[n - 2]) * sample_rate,
                i => (x[i + 1] - x[i - 1]) * sample_rate / 2.0,
            })
            .collect(),
    }
}

fn record_from_phase(phase: Vec<f64>, wavelength: f64, rate: f64, residual: f64) -> Result<VibrationRecord> {
    ensure!(
        wavelength.is_finite() && wavelength > 0.0,
        InvalidConfig,
        "wavelength must be positive"
    );
    let scale = wavelength / (4.0 * PI);
    let mut disp: Vec<f64> = phase.iter().map(|p| p * scale).collect();
    let mean = disp.iter().sum::<f64>() / disp.len().max(1) as f64;
    for d in &mut disp {
        *d -= mean;
    }
    let vel = central_difference(&disp, rate);
    Ok(VibrationRecord {
        displacement: TimeSeries::new(rate, disp)?,
        velocity: TimeSeries::new(rate, vel)?,
        residual_phase_rms: residual,
    })
}

/// Scales an unwrapped phase record to zero-mean displacement, decimates it
/// to `cfg.output_rate` and differentiates. The record ends are continued
/// odd-symmetrically through the anti-alias filters.
pub fn kinematics_from_phase(phase: &TimeSeries, wavelength: f64, cfg: &DemodConfig) -> Result<VibrationRecord> {
    let plan = DecimationPlan::new(phase.sample_rate, cfg.output_rate)?;
    let m = plan.factor();
    let h = plan.half_span();
    let ext = odd_extend(&phase.samples, h);
    let mut cascade = plan.cascade(-(h as i64))?;
    let mut out = Vec::new();
    cascade.push(&ext, &mut out);
    let count = (phase.len() - 1) / m + 1;
    out.truncate(count);
    record_from_phase(out, wavelength, cfg.output_rate, cascade.residual_rms())
}

/// Whole-signal chain: [`iq_demodulate`], unwrap, then [`kinematics_from_phase`].
pub fn demodulate(signal: &TimeSeries, wavelength: f64, cfg: &DemodConfig) -> Result<VibrationRecord> {
    let iq = iq_demodulate(signal, cfg)?;
    let mut phase = unwrap_phase(&iq.arg());
    for p in &mut phase.samples {
        *p = -*p;
    }
    kinematics_from_phase(&phase, wavelength, cfg)
}

/// Streaming demodulator fed consecutive detector samples from index
/// `-pre_roll()` onward.
#[derive(Debug, Clone)]
pub struct Receiver {
    mixer: Mixer,
    baseband: FirDecimator<Complex64>,
    unwrapper: PhaseUnwrapper,
    cascade: Cascade,
    output_rate: f64,
    pre_roll: usize,
    next_input: i64,
    phase: Vec<f64>,
    mixed: Vec<Complex64>,
    envelope: Vec<Complex64>,
    scratch: Vec<f64>,
}

impl Receiver {
    pub fn new(cfg: &DemodConfig) -> Result<Self> {
        cfg.validate()?;
        let total = cfg.decimation()?;
        let taps = design_fir(&cfg.baseband_spec(), cfg.input_rate)?;
        // Halving right after the low-pass is alias-free when the mirrored
        // transition bands do not overlap, i.e. cutoff ≤ fs/4.
        let first = if total % 2 == 0 && cfg.lowpass_cutoff <= cfg.input_rate / 4.0 {
            2
        } else {
            1
        };
        let plan = DecimationPlan::new(cfg.input_rate / first as f64, cfg.output_rate)?;
        let pre_roll = (taps.len() / 2 + first * plan.half_span()) as i64;
        let baseband = FirDecimator::new(taps, first, -pre_roll)?;
        let cascade = plan.cascade(baseband.next_output())?;
        Ok(Self {
            mixer: Mixer::new(cfg.carrier, cfg.input_rate),
            baseband,
            unwrapper: PhaseUnwrapper::new(),
            cascade,
            output_rate: cfg.output_rate,
            pre_roll: pre_roll as usize,
            next_input: -pre_roll,
            phase: Vec::new(),
            mixed: Vec::new(),
            envelope: Vec::new(),
            scratch: Vec::new(),
        })
    }

    /// Detector samples needed before index 0 (and after the last centre).
    pub fn pre_roll(&self) -> usize {
        self.pre_roll
    }

    /// Index the next pushed sample is taken to have.
    pub fn next_input(&self) -> i64 {
        self.next_input
    }

    pub fn push(&mut self, samples: &[f64]) {
        self.mixed.clear();
        self.mixed.extend(
            samples
                .iter()
                .enumerate()
                .map(|(i, &x)| self.mixer.at(self.next_input + i as i64) * x),
        );
        self.next_input += samples.len() as i64;
        self.envelope.clear();
        self.baseband.push(&self.mixed, &mut self.envelope);
        self.scratch.clear();
        for z in &self.envelope {
            self.scratch.push(-self.unwrapper.push(z.arg()));
        }
        self.cascade.push(&self.scratch, &mut self.phase);
    }

    /// Output samples produced so far.
    pub fn len(&self) -> usize {
        self.phase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase.is_empty()
    }

    /// Converts the first `count` phase samples into a record.
    pub fn finish(mut self, wavelength: f64, count: usize) -> Result<VibrationRecord> {
        ensure!(
            self.phase.len() >= count,
            InvalidInput,
            "receiver produced {} of {count} output samples; feed the full post-roll",
            self.phase.len()
        );
        self.phase.truncate(count);
        record_from_phase(self.phase, wavelength, self.output_rate, self.cascade.residual_rms())
    }
}

/// Detector sample range `[first, end)` a [`Receiver`] needs for `count`
/// output samples.
pub fn input_span(cfg: &DemodConfig, count: usize) -> Result<(i64, i64)> {
    let rx = Receiver::new(cfg)?;
    let h = rx.pre_roll() as i64;
    let d = cfg.decimation()? as i64;
    Ok((-h, (count as i64 - 1) * d + h + 1))
}

/// Runs a [`Receiver`] over `source`, which fills detector samples starting
/// at the given index, in chunks of `chunk` samples.
pub fn demodulate_source(
    cfg: &DemodConfig,
    wavelength: f64,
    count: usize,
    chunk: usize,
    mut source: impl FnMut(i64, &mut [f64]) -> Result<()>,
) -> Result<VibrationRecord> {
    ensure!(count >= 1, InvalidInput, "at least one output sample is required");
    let mut rx = Receiver::new(cfg)?;
    let (first, end) = input_span(cfg, count)?;
    let mut buf = vec![0.0; chunk.max(1)];
    let mut n = first;
    while n < end {
        let len = ((end - n) as usize).min(buf.len());
        source(n, &mut buf[..len])?;
        rx.push(&buf[..len]);
        n += len as i64;
    }
    rx.finish(wavelength, count)
}
