//! Two-branch signal-detection model.
//!
//! The binaural branch measures the distance between the z-transformed
//! coherences of reference and target; the monaural branch responds to the
//! effective SNR after filtering. The two combine as independent cues.

use core::f64::consts::PI;

use alloc::format;

use crate::coherence::{z_unchecked, Coherence};
use crate::{Error, Result};

/// Model parameters `ρ̂`, `σ_bin`, `σ_mon` and the criterion `d'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    rho_hat: f64,
    sigma_bin: f64,
    sigma_mon: Option<f64>,
    dprime_target: f64,
}

impl DetectionParams {
    pub const DEFAULT_DPRIME: f64 = 1.0;

    pub fn new(rho_hat: f64, sigma_bin: f64, sigma_mon: Option<f64>) -> Result<Self> {
        Self::with_target(rho_hat, sigma_bin, sigma_mon, Self::DEFAULT_DPRIME)
    }

    pub fn with_target(rho_hat: f64, sigma_bin: f64, sigma_mon: Option<f64>, dprime_target: f64) -> Result<Self> {
        if !(rho_hat > 0.0 && rho_hat < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rho_hat must lie in (0, 1), got {rho_hat}"
            )));
        }
        if !(sigma_bin > 0.0 && sigma_bin.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_bin must be positive, got {sigma_bin}"
            )));
        }
        if let Some(s) = sigma_mon {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(format!("sigma_mon must be positive, got {s}")));
            }
        }
        if !(dprime_target > 0.0 && dprime_target.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dprime_target must be positive, got {dprime_target}"
            )));
        }
        Ok(Self {
            rho_hat,
            sigma_bin,
            sigma_mon,
            dprime_target,
        })
    }

    pub fn rho_hat(&self) -> f64 {
        self.rho_hat
    }

    pub fn sigma_bin(&self) -> f64 {
        self.sigma_bin
    }

    pub fn sigma_mon(&self) -> Option<f64> {
        self.sigma_mon
    }

    pub fn dprime_target(&self) -> f64 {
        self.dprime_target
    }

    pub fn set_dprime_target(self, dprime_target: f64) -> Result<Self> {
        Self::with_target(self.rho_hat, self.sigma_bin, self.sigma_mon, dprime_target)
    }
}

/// `|z[ρ̂·γ_ref] − z[ρ̂·γ_target]| / σ_bin`.
pub fn dprime_binaural(gamma_ref: Coherence, gamma_target: Coherence, params: &DetectionParams) -> f64 {
    let zr = z_unchecked(gamma_ref, params.rho_hat);
    let zt = z_unchecked(gamma_target, params.rho_hat);
    zr.distance(&zt) / params.sigma_bin
}

/// `(SNR / g) / σ_mon`, zero when the monaural branch is disabled.
///
/// `g` is the filter's noise power gain; the tone passes the filter center at
/// unit gain.
pub fn dprime_monaural(snr: f64, noise_gain: f64, params: &DetectionParams) -> f64 {
    match params.sigma_mon {
        Some(sigma) if snr > 0.0 => snr / noise_gain / sigma,
        _ => 0.0,
    }
}

pub fn dprime_total(d_bin: f64, d_mon: f64) -> f64 {
    libm::hypot(d_bin, d_mon)
}

/// Smallest detectable IPD change for a pure-phase cue at full coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpdThreshold {
    pub radians: f64,
}

impl IpdThreshold {
    /// Equivalent ITD in microseconds at `frequency` Hz.
    pub fn microseconds_at(&self, frequency: f64) -> f64 {
        self.radians / (2.0 * PI * frequency) * 1e6
    }

    /// Equivalent ITD in microseconds at 500 Hz.
    pub fn microseconds(&self) -> f64 {
        self.microseconds_at(500.0)
    }
}

/// `Δσ = 2·arcsin(d'·σ_bin / (2·artanh ρ̂))` with `d'` the params' criterion.
pub fn ipd_discrimination_threshold(params: &DetectionParams) -> Result<IpdThreshold> {
    let ratio = params.dprime_target * params.sigma_bin / (2.0 * libm::atanh(params.rho_hat));
    if ratio > 1.0 {
        return Err(Error::SensitivityInsufficient { ratio });
    }
    Ok(IpdThreshold {
        radians: 2.0 * libm::asin(ratio),
    })
}
