//! Seekable random streams.
//!
//! Every random draw is addressed by a sample (or interval) index, so a
//! series can be generated in arbitrary chunks, in any order, on any thread,
//! and still come out bit-identical.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// Root seed plus a stream selector. Distinct pairs give independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RandomSeed {
    pub seed: u64,
    #[serde(default)]
    pub stream_id: u64,
}

impl RandomSeed {
    pub const fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub const fn with_stream(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Child stream selected by `label`; the parent is left untouched.
    pub fn substream(self, label: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: mix64(self.stream_id ^ mix64(label.wrapping_add(0x9E37_79B9_7F4A_7C15))),
        }
    }
}

// Negative sample indices (filter pre-roll) are shifted into the unsigned
// counter space so the stream stays contiguous across n = 0.
const INDEX_OFFSET: i64 = 1 << 40;

pub(crate) struct IndexedStream {
    rng: ChaCha8Rng,
}

impl IndexedStream {
    pub(crate) fn new(seed: RandomSeed) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.seed);
        rng.set_stream(seed.stream_id);
        Self { rng }
    }

    fn seek_u64(&mut self, index: u64) {
        // Two 32-bit words per u64.
        self.rng.set_word_pos(u128::from(index) * 2);
    }

    /// Writes standard-normal draws for samples `n0..n0 + out.len()`, scaled
    /// by `scale`. Samples 2k and 2k+1 share one Box–Muller pair.
    pub(crate) fn fill_gaussian(&mut self, n0: i64, scale: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        let first = (n0 + INDEX_OFFSET) as u64;
        let mut pair = first / 2;
        self.seek_u64(pair * 2);
        let mut i = 0usize;
        let mut pos = first;
        while i < out.len() {
            let (z0, z1) = box_muller(self.rng.next_u64(), self.rng.next_u64());
            if pos == pair * 2 {
                out[i] = scale * z0;
                i += 1;
                pos += 1;
                if i == out.len() {
                    break;
                }
            }
            out[i] = scale * z1;
            i += 1;
            pos += 1;
            pair += 1;
        }
    }

    /// Unit-mean exponential draw addressed by `index`.
    pub(crate) fn exponential_at(&mut self, index: i64) -> f64 {
        self.seek_u64((index + INDEX_OFFSET) as u64);
        -open_unit(self.rng.next_u64()).ln()
    }

    /// Sequential uniform draws in [0, 1) from the start of the stream.
    pub(crate) fn uniforms(&mut self, count: usize) -> Vec<f64> {
        self.seek_u64(0);
        (0..count).map(|_| half_open_unit(self.rng.next_u64())).collect()
    }
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Uniform in (0, 1].
#[inline]
fn open_unit(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * INV_2_53
}

/// Uniform in [0, 1).
#[inline]
fn half_open_unit(x: u64) -> f64 {
    (x >> 11) as f64 * INV_2_53
}

#[inline]
fn box_muller(a: u64, b: u64) -> (f64, f64) {
    let r = (-2.0 * open_unit(a).ln()).sqrt();
    let (s, c) = (TAU * half_open_unit(b)).sin_cos();
    (r * c, r * s)
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
