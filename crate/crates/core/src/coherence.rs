//! The complex interaural coherence `γ` and its Fisher z-transform.
//!
//! `γ` is the ratio of the filtered cross-spectral integral to the filtered
//! power per ear. Its modulus is the interaural coherence, its argument the
//! mean IPD.

use core::fmt;

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::periphery::PeripheryFilter;
use crate::quad::QuadSettings;
use crate::stimulus::{cross_spectrum_terms_with, CrossSpectrum, PhaseSpectrum, StimulusSpec};
use crate::{Error, Result};

/// Slack allowed on `|γ| ≤ 1` for rounding in the two independent integrals.
pub const MODULUS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence(pub Complex64);

impl Coherence {
    pub fn new(re: f64, im: f64) -> Self {
        Coherence(Complex64::new(re, im))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    /// Interaural coherence `|γ|`.
    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }

    /// Mean IPD `arg γ` in `(-π, π]`.
    pub fn argument(&self) -> f64 {
        self.0.arg()
    }

    /// `γ = (noise_integral + tone_term) / power_per_side`.
    pub fn from_cross_spectrum(cs: &CrossSpectrum) -> Result<Self> {
        let power = cs.power_per_side();
        if power.is_nan() || power <= 0.0 {
            return Err(Error::DegenerateStimulus);
        }
        let gamma = (cs.noise_integral + cs.tone_term) / power;
        let modulus = gamma.norm();
        if modulus.is_nan() || modulus > 1.0 + MODULUS_SLACK {
            return Err(Error::CoherenceOutOfRange { modulus });
        }
        Ok(Coherence(gamma))
    }
}

impl fmt::Display for Coherence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+.6}{:+.6}i", self.0.re, self.0.im)
    }
}

/// Expected coherence of `spec` after peripheral filtering.
pub fn coherence_of(spec: &StimulusSpec, filter: &PeripheryFilter) -> Result<Coherence> {
    coherence_of_with(spec, filter, &QuadSettings::default())
}

pub fn coherence_of_with(spec: &StimulusSpec, filter: &PeripheryFilter, settings: &QuadSettings) -> Result<Coherence> {
    Coherence::from_cross_spectrum(&cross_spectrum_terms_with(spec, filter, settings)?)
}

/// Coherence after Fisher's z-transform of the (scaled) modulus.
///
/// Modulus `artanh(ρ̂·|γ|)`, argument `arg γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZVector(pub Complex64);

impl ZVector {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }

    pub fn argument(&self) -> f64 {
        self.0.arg()
    }

    /// Euclidean distance in the z-plane.
    pub fn distance(&self, other: &ZVector) -> f64 {
        (self.0 - other.0).norm()
    }
}

pub fn z_transform(gamma: Coherence, rho_hat: f64) -> Result<ZVector> {
    if !(rho_hat > 0.0 && rho_hat < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rho_hat must lie in (0, 1), got {rho_hat}"
        )));
    }
    Ok(z_unchecked(gamma, rho_hat))
}

pub(crate) fn z_unchecked(gamma: Coherence, rho_hat: f64) -> ZVector {
    let modulus = gamma.modulus();
    if modulus == 0.0 {
        return ZVector(Complex64::new(0.0, 0.0));
    }
    // Scale the unit phasor rather than going through from_polar so that the
    // argument is carried over exactly for real inputs.
    let unit = gamma.0 / modulus;
    ZVector(unit * libm::atanh(rho_hat * modulus.min(1.0)))
}

/// `γ(τ)` of a tone-free stimulus with a whole-waveform delay `τ` (seconds)
/// substituted for its noise phase.
pub fn noise_delay_function(spec: &StimulusSpec, filter: &PeripheryFilter, tau_grid: &[f64]) -> Result<Vec<Coherence>> {
    if spec.tone_ipd.is_some() && spec.snr > 0.0 {
        return Err(Error::InvalidStimulus(
            "noise-delay function needs a tone-free stimulus".into(),
        ));
    }
    tau_grid
        .iter()
        .map(|&tau| {
            let delayed = StimulusSpec {
                noise_phase: PhaseSpectrum::WaveformItd(tau),
                ..*spec
            };
            coherence_of(&delayed, filter)
        })
        .collect()
}
