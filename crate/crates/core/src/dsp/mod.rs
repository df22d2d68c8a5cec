//! Vibration-domain analysis: FIR filtering, Henderson smoothing, spectra
//! and peak estimation.

pub mod fir;
pub mod henderson;
pub mod spectrum;
pub mod stream;

pub use fir::{apply_fir, design_fir, filtfilt, FilterKind, FilterSpec};
pub use henderson::{henderson_smooth, henderson_weights};
pub use spectrum::{
    compute_spectrum, compute_spectrum_padded, dft, fit_sinusoid, peak_frequency, PeakEstimate, Spectrum, Window,
};
pub use stream::{DecimationPlan, FirDecimator};

/// Zero-padding factor of the analysis spectrum. Log-parabolic refinement on
/// an unpadded Hann spectrum is biased by up to ~0.016 bin; doubling the
/// transform length brings that under 0.002 of an unpadded bin.
pub const ANALYSIS_PAD: usize = 2;
