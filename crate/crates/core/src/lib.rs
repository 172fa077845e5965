//! Analytic model of binaural tone-in-noise detection built on the complex
//! interaural correlation coefficient.
//!
//! The pipeline is:
//!
//! 1. [`periphery`]: a gammatone power spectrum models the auditory filter.
//! 2. [`stimulus`]: a parametric stimulus is reduced to its filtered
//!    cross-spectral terms.
//! 3. [`coherence`]: the complex coherence `γ` follows as a ratio of those
//!    integrals; its Fisher z-transform is the perceptual coordinate.
//! 4. [`detection`]: a binaural and a monaural branch combine into `d'`.
//! 5. [`threshold`] / [`fit`]: the SNR (or correlation change) at which `d'`
//!    hits its criterion is solved for, and model parameters are fitted to
//!    measured thresholds.
//! 6. [`experiments`]: the eight built-in studies.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the Monte-Carlo
//! waveform oracle and the command line live in the `binmodel` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod coherence;
pub mod detection;
mod error;
pub mod experiments;
pub mod fit;
pub mod periphery;
pub mod quad;
pub mod roots;
pub mod simplex;
pub mod stimulus;
pub mod threshold;

pub use coherence::{coherence_of, noise_delay_function, z_transform, Coherence, ZVector};
pub use detection::{
    dprime_binaural, dprime_monaural, dprime_total, ipd_discrimination_threshold, DetectionParams, IpdThreshold,
};
pub use error::{Error, Result};
pub use experiments::{ExperimentDef, ExperimentId, Ordinate};
pub use fit::{fit_params, r_squared, FitBounds, FitResult, Observation};
pub use num_complex::Complex64;
pub use periphery::PeripheryFilter;
pub use stimulus::{build_condition, Condition, CrossSpectrum, Family, FixedParams, PhaseSpectrum, StimulusSpec};
pub use threshold::{solve_threshold, PreparedCondition, ThresholdResult, ThresholdVariable};

/// Linear power ratio to decibels.
#[inline]
pub fn to_db(ratio: f64) -> f64 {
    10.0 * libm::log10(ratio)
}

/// Decibels to linear power ratio.
#[inline]
pub fn from_db(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}
