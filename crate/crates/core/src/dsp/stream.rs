//! Streaming polyphase decimation.
//!
//! Samples carry absolute integer indices. A decimator by `m` emits output
//! `j` centred on input `j·m`, so a cascade keeps every output aligned with
//! the input sample it describes and chunk boundaries never show up in the
//! result.

use std::ops::{Add, Mul};

use crate::dsp::fir::{design_fir, FilterSpec};
use crate::error::{ensure, Result};

pub trait Sample: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>> Sample for T {}

/// Symmetric FIR followed by keep-one-in-`factor`, fed in arbitrary chunks.
#[derive(Debug, Clone)]
pub struct FirDecimator<T> {
    taps: Vec<f64>,
    factor: usize,
    half: i64,
    buffer: Vec<T>,
    /// Input index of `buffer[0]`.
    buffer_start: i64,
    next_output: i64,
}

impl<T: Sample> FirDecimator<T> {
    /// `first_input` is the index of the first sample that will be pushed.
    pub fn new(taps: Vec<f64>, factor: usize, first_input: i64) -> Result<Self> {
        ensure!(taps.len() % 2 == 1, InvalidConfig, "decimator needs an odd tap count");
        ensure!(factor >= 1, InvalidConfig, "decimation factor must be at least 1");
        let half = (taps.len() / 2) as i64;
        let m = factor as i64;
        Ok(Self {
            factor,
            half,
            buffer: Vec::new(),
            buffer_start: first_input,
            next_output: (first_input + half).div_euclid(m) + i64::from((first_input + half).rem_euclid(m) != 0),
            taps,
        })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    /// Taps either side of the centre.
    pub fn half_span(&self) -> usize {
        self.half as usize
    }

    /// Index of the next output this decimator will emit.
    pub fn next_output(&self) -> i64 {
        self.next_output
    }

    /// Appends `input` and returns every output whose full window is now
    /// available, paired with its centre input sample.
    pub fn push_with_centres(&mut self, input: &[T], out: &mut Vec<(T, T)>) {
        self.buffer.extend_from_slice(input);
        let m = self.factor as i64;
        let end = self.buffer_start + self.buffer.len() as i64;
        while self.next_output * m + self.half < end {
            let centre = self.next_output * m;
            let lo = (centre - self.half - self.buffer_start) as usize;
            let window = &self.buffer[lo..lo + self.taps.len()];
            let mut acc = T::default();
            for (x, &h) in window.iter().zip(&self.taps) {
                acc = acc + *x * h;
            }
            out.push((acc, window[self.half as usize]));
            self.next_output += 1;
        }
        let keep_from = self.next_output * m - self.half;
        let drop = (keep_from - self.buffer_start).clamp(0, self.buffer.len() as i64) as usize;
        if drop > 0 {
            self.buffer.drain(..drop);
            self.buffer_start += drop as i64;
        }
    }

    pub fn push(&mut self, input: &[T], out: &mut Vec<T>) {
        let mut pairs = Vec::new();
        self.push_with_centres(input, &mut pairs);
        out.extend(pairs.into_iter().map(|(y, _)| y));
    }
}

/// Splits an integer rate change into small stages, largest factor first.
pub fn stage_factors(total: usize) -> Vec<usize> {
    let mut primes = Vec::new();
    let mut r = total;
    let mut p = 2;
    while r > 1 {
        while r % p == 0 {
            primes.push(p);
            r /= p;
        }
        p += 1;
    }
    primes.sort_unstable_by(|a, b| b.cmp(a));
    // Pair leading twos into fours but keep the final stage small.
    let twos = primes.iter().filter(|&&p| p == 2).count();
    let mut stages: Vec<usize> = primes.into_iter().filter(|&p| p != 2).collect();
    let (fours, rest) = if twos >= 2 {
        ((twos - 1) / 2, twos - 2 * ((twos - 1) / 2))
    } else {
        (0, twos)
    };
    stages.extend(std::iter::repeat_n(4, fours));
    stages.extend(std::iter::repeat_n(2, rest));
    stages
}

/// Multistage anti-alias decimation from `input_rate` to `output_rate`.
///
/// Every stage passes `[0, 0.4·output_rate]`. Intermediate stages only stop
/// what would alias into the final band; the last stage stops at the output
/// Nyquist frequency.
#[derive(Debug, Clone)]
pub struct DecimationPlan {
    pub input_rate: f64,
    pub output_rate: f64,
    pub stages: Vec<(usize, Vec<f64>)>,
}

pub const DECIMATION_ATTEN_DB: f64 = 80.0;

impl DecimationPlan {
    pub fn new(input_rate: f64, output_rate: f64) -> Result<Self> {
        ensure!(
            output_rate > 0.0 && input_rate >= output_rate,
            InvalidConfig,
            "cannot decimate {input_rate} Hz to {output_rate} Hz"
        );
        let ratio = input_rate / output_rate;
        let total = ratio.round();
        ensure!(
            (ratio - total).abs() <= 1e-9 * ratio,
            InvalidConfig,
            "decimation factor {ratio} is not an integer"
        );
        let factors = stage_factors(total as usize);
        let pass = 0.4 * output_rate;
        let mut rate = input_rate;
        let mut stages = Vec::with_capacity(factors.len());
        for (i, &m) in factors.iter().enumerate() {
            let out_rate = rate / m as f64;
            let stop = if i + 1 == factors.len() {
                output_rate / 2.0
            } else {
                out_rate - output_rate / 2.0
            };
            let spec = FilterSpec::lowpass((pass + stop) / 2.0, stop - pass, DECIMATION_ATTEN_DB);
            stages.push((m, design_fir(&spec, rate)?));
            rate = out_rate;
        }
        Ok(Self {
            input_rate,
            output_rate,
            stages,
        })
    }

    pub fn factor(&self) -> usize {
        self.stages.iter().map(|(m, _)| m).product()
    }

    /// Input samples needed either side of an output centre.
    pub fn half_span(&self) -> usize {
        let mut scale = 1;
        let mut span = 0;
        for (m, taps) in &self.stages {
            span += scale * (taps.len() / 2);
            scale *= m;
        }
        span
    }

    /// Streaming cascade whose first input sample has index `first_input`.
    pub fn cascade(&self, first_input: i64) -> Result<Cascade> {
        let mut stages = Vec::with_capacity(self.stages.len());
        let mut start = first_input;
        for (m, taps) in &self.stages {
            let d = FirDecimator::new(taps.clone(), *m, start)?;
            start = d.next_output();
            stages.push(d);
        }
        Ok(Cascade {
            stages,
            residual_sq: 0.0,
            residual_count: 0,
        })
    }
}

/// Running [`DecimationPlan`]. Also accumulates the power the final stage
/// removes at each kept sample.
#[derive(Debug, Clone)]
pub struct Cascade {
    stages: Vec<FirDecimator<f64>>,
    residual_sq: f64,
    residual_count: usize,
}

impl Cascade {
    /// Index of the next output the cascade will emit.
    pub fn next_output(&self) -> Option<i64> {
        self.stages.last().map(|s| s.next_output())
    }

    pub fn push(&mut self, input: &[f64], out: &mut Vec<f64>) {
        let Some((last, inner)) = self.stages.split_last_mut() else {
            out.extend_from_slice(input);
            return;
        };
        let mut data = input.to_vec();
        let mut next = Vec::new();
        for stage in inner {
            next.clear();
            stage.push(&data, &mut next);
            std::mem::swap(&mut data, &mut next);
        }
        let mut pairs = Vec::new();
        last.push_with_centres(&data, &mut pairs);
        for (y, centre) in pairs {
            let r = centre - y;
            self.residual_sq += r * r;
            self.residual_count += 1;
            out.push(y);
        }
    }

    /// RMS of input minus filtered output at the kept samples.
    pub fn residual_rms(&self) -> f64 {
        if self.residual_count == 0 {
            0.0
        } else {
            (self.residual_sq / self.residual_count as f64).sqrt()
        }
    }
}
