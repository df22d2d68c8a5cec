//! Henderson moving average.
//!
//! The symmetric weights minimise the sum of squared third differences of
//! the kernel subject to passing cubics unchanged. Near the ends the kernel
//! is truncated to the available samples and renormalised to unit sum.

use crate::error::{ensure, Result};
use crate::series::TimeSeries;

/// The `terms` Henderson weights (odd, at least 5), index 0 at the far left.
pub fn henderson_weights(terms: usize) -> Result<Vec<f64>> {
    ensure!(
        terms % 2 == 1 && terms >= 5,
        InvalidInput,
        "Henderson filter needs an odd term count of at least 5, got {terms}"
    );
    let m = (terms as i64 - 1) / 2;
    let n = (m + 2) as f64;
    let (n2, n2m, n2p) = (n * n, (n - 1.0) * (n - 1.0), (n + 1.0) * (n + 1.0));
    let denom = 8.0 * n * (n2 - 1.0) * (4.0 * n2 - 1.0) * (4.0 * n2 - 9.0) * (4.0 * n2 - 25.0);
    Ok((-m..=m)
        .map(|j| {
            let j2 = (j * j) as f64;
            315.0 * (n2m - j2) * (n2 - j2) * (n2p - j2) * (3.0 * n2 - 16.0 - 11.0 * j2) / denom
        })
        .collect())
}

pub fn henderson_smooth(series: &TimeSeries, terms: usize) -> Result<TimeSeries> {
    let w = henderson_weights(terms)?;
    ensure!(
        terms <= series.len(),
        InvalidInput,
        "{terms}-term Henderson filter is longer than the {}-sample series",
        series.len()
    );
    let m = terms / 2;
    let x = &series.samples;
    let len = x.len();
    let out = (0..len)
        .map(|i| {
            let lo = i.saturating_sub(m);
            let hi = (i + m).min(len - 1);
            let kernel = &w[lo + m - i..=hi + m - i];
            let acc: f64 = kernel.iter().zip(&x[lo..=hi]).map(|(a, b)| a * b).sum();
            if hi - lo + 1 == terms {
                acc
            } else {
                acc / kernel.iter().sum::<f64>()
            }
        })
        .collect();
    TimeSeries::new(series.sample_rate, out)
}
