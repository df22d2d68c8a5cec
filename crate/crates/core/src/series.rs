//! Uniformly sampled signals.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// A uniformly sampled real signal. Sample `n` sits at time `n / sample_rate`.
///
/// Units are carried by context (A, V, W, m, m/s or rad).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
}

impl TimeSeries {
    pub fn new(sample_rate: f64, samples: Vec<f64>) -> Result<Self> {
        ensure!(
            sample_rate.is_finite() && sample_rate > 0.0,
            InvalidInput,
            "sample rate must be positive, got {sample_rate}"
        );
        ensure!(
            !samples.is_empty(),
            InvalidInput,
            "time series must hold at least one sample"
        );
        Ok(Self { sample_rate, samples })
    }

    pub fn zeros(sample_rate: f64, len: usize) -> Result<Self> {
        Self::new(sample_rate, vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 / self.sample_rate
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Root mean square of the raw samples (mean not removed).
    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }
}

/// A uniformly sampled complex signal, e.g. a baseband envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    pub sample_rate: f64,
    pub samples: Vec<Complex64>,
}

impl ComplexSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Per-sample argument in (-π, π].
    pub fn arg(&self) -> TimeSeries {
        TimeSeries {
            sample_rate: self.sample_rate,
            samples: self.samples.iter().map(|z| z.arg()).collect(),
        }
    }

    pub fn magnitude(&self) -> TimeSeries {
        TimeSeries {
            sample_rate: self.sample_rate,
            samples: self.samples.iter().map(|z| z.norm()).collect(),
        }
    }
}

pub(crate) fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}
