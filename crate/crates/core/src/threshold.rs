//! Threshold solving: the SNR (or correlation increment) at which the combined
//! `d'` reaches its criterion.
//!
//! The noise integrals do not depend on the SNR, so a condition is prepared
//! once and the target coherence is then a closed-form function of the tone
//! level.

use num_complex::Complex64;

use crate::coherence::Coherence;
use crate::detection::{dprime_binaural, dprime_monaural, dprime_total, DetectionParams};
use crate::periphery::PeripheryFilter;
use crate::quad::QuadSettings;
use crate::roots::{brent, RootOptions};
use crate::stimulus::{cross_spectrum_terms_with, unit_noise_integral, Condition, CrossSpectrum};
use crate::{from_db, Error, Result};

/// Initial SNR search bracket in dB.
pub const SNR_BRACKET_DB: (f64, f64) = (-60.0, 20.0);
/// Upper-edge extension applied once when the initial bracket holds no root.
pub const SNR_EXPANSION_DB: f64 = 20.0;
/// Gap kept below a target correlation of exactly one.
pub const DELTA_RHO_MARGIN: f64 = 1e-9;

const ROOT_OPTIONS: RootOptions = RootOptions {
    xtol: 1e-9,
    ftol: 1e-10,
    max_iter: 200,
};

/// Quantity the solver varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdVariable {
    /// Tone level, in dB SNR.
    SnrDb,
    /// Increase of the noise correlation over the reference (no tone).
    DeltaRho,
}

impl ThresholdVariable {
    pub fn name(&self) -> &'static str {
        match self {
            ThresholdVariable::SnrDb => "snr_db",
            ThresholdVariable::DeltaRho => "delta_rho",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub sweep_value: f64,
    pub variable: ThresholdVariable,
    /// dB SNR, or `Δρ`.
    pub threshold: f64,
    pub d_bin: f64,
    pub d_mon: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `d'` already exceeded the criterion at the lower bracket edge.
    pub clamped: bool,
}

impl ThresholdResult {
    pub fn dprime(&self) -> f64 {
        dprime_total(self.d_bin, self.d_mon)
    }
}

/// A [`Condition`] with its quadratures done.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparedCondition {
    variable: ThresholdVariable,
    sweep_value: f64,
    reference: CrossSpectrum,
    gamma_ref: Coherence,
    target_noise: CrossSpectrum,
    /// Noise cross term of the target per unit correlation (`DeltaRho` only).
    unit_target_noise: Complex64,
    reference_rho: f64,
    tone_ipd: f64,
    tone_gain: f64,
}

impl PreparedCondition {
    pub fn new(condition: &Condition, filter: &PeripheryFilter) -> Result<Self> {
        Self::with_settings(condition, filter, &QuadSettings::default())
    }

    pub fn with_settings(condition: &Condition, filter: &PeripheryFilter, settings: &QuadSettings) -> Result<Self> {
        let reference = cross_spectrum_terms_with(&condition.reference, filter, settings)?;
        let gamma_ref = Coherence::from_cross_spectrum(&reference)?;
        let target_spec = condition.target.with_snr(0.0);
        let target_noise = cross_spectrum_terms_with(&target_spec, filter, settings)?;
        let (unit_target_noise, tone_ipd) = match condition.variable {
            ThresholdVariable::DeltaRho => (
                unit_noise_integral(
                    &target_spec.noise_phase,
                    target_spec.center_frequency,
                    target_spec.bandwidth,
                    filter,
                    settings,
                )?,
                0.0,
            ),
            ThresholdVariable::SnrDb => {
                let ipd = condition
                    .target
                    .tone_ipd
                    .ok_or_else(|| Error::InvalidStimulus("SNR threshold needs a target tone IPD".into()))?;
                (Complex64::new(0.0, 0.0), ipd)
            }
        };
        Ok(Self {
            variable: condition.variable,
            sweep_value: condition.sweep_value,
            reference,
            gamma_ref,
            target_noise,
            unit_target_noise,
            reference_rho: condition.reference.rho_n,
            tone_ipd,
            tone_gain: filter.power_response(condition.target.center_frequency),
        })
    }

    pub fn variable(&self) -> ThresholdVariable {
        self.variable
    }

    pub fn sweep_value(&self) -> f64 {
        self.sweep_value
    }

    pub fn reference(&self) -> &CrossSpectrum {
        &self.reference
    }

    pub fn reference_coherence(&self) -> Coherence {
        self.gamma_ref
    }

    /// Target cross-spectral terms at `x` (dB SNR or `Δρ`).
    pub fn target_cross_spectrum(&self, x: f64) -> CrossSpectrum {
        match self.variable {
            ThresholdVariable::SnrDb => self.target_noise.with_tone(from_db(x), self.tone_ipd, self.tone_gain),
            ThresholdVariable::DeltaRho => CrossSpectrum {
                noise_integral: self.unit_target_noise * (self.reference_rho + x),
                ..self.target_noise.without_tone()
            },
        }
    }

    pub fn target_coherence(&self, x: f64) -> Result<Coherence> {
        Coherence::from_cross_spectrum(&self.target_cross_spectrum(x))
    }

    /// `(d'_bin, d'_mon)` at `x`.
    pub fn dprime(&self, x: f64, params: &DetectionParams) -> Result<(f64, f64)> {
        let target = self.target_cross_spectrum(x);
        let gamma_t = Coherence::from_cross_spectrum(&target)?;
        let d_bin = dprime_binaural(self.gamma_ref, gamma_t, params);
        let d_mon = match self.variable {
            ThresholdVariable::SnrDb => dprime_monaural(target.tone_power, target.noise_power, params),
            ThresholdVariable::DeltaRho => 0.0,
        };
        Ok((d_bin, d_mon))
    }

    /// Initial search interval for the solver.
    pub fn bracket(&self) -> (f64, f64) {
        match self.variable {
            ThresholdVariable::SnrDb => SNR_BRACKET_DB,
            ThresholdVariable::DeltaRho => (0.0, 1.0 - self.reference_rho - DELTA_RHO_MARGIN),
        }
    }
}

/// Solves `d'(x) = params.dprime_target()`.
///
/// SNR thresholds are searched on [`SNR_BRACKET_DB`], extended once by
/// [`SNR_EXPANSION_DB`] at the top. If `d'` is already above criterion at the
/// bottom edge the edge is returned with `clamped` set.
pub fn solve_threshold(condition: &PreparedCondition, params: &DetectionParams) -> Result<ThresholdResult> {
    let target = params.dprime_target();
    // A non-finite d' (numerical failure) is mapped to NaN so that brent
    // reports it rather than silently converging on it.
    let objective = |x: f64| match condition.dprime(x, params) {
        Ok((b, m)) => dprime_total(b, m) - target,
        Err(_) => f64::NAN,
    };
    let finish = |x: f64, iterations: usize, converged: bool, clamped: bool| -> Result<ThresholdResult> {
        let (d_bin, d_mon) = condition.dprime(x, params)?;
        Ok(ThresholdResult {
            sweep_value: condition.sweep_value,
            variable: condition.variable,
            threshold: x,
            d_bin,
            d_mon,
            iterations,
            converged,
            clamped,
        })
    };

    let (lo, mut hi) = condition.bracket();
    if hi <= lo {
        return Err(Error::NoThreshold { lower: lo, upper: hi });
    }
    let f_lo = objective(lo);
    if f_lo >= 0.0 {
        return finish(lo, 0, false, true);
    }
    let mut f_hi = objective(hi);
    if f_hi < 0.0 && condition.variable == ThresholdVariable::SnrDb {
        hi += SNR_EXPANSION_DB;
        f_hi = objective(hi);
    }
    if f_hi.is_nan() || f_hi < 0.0 {
        return Err(Error::NoThreshold { lower: lo, upper: hi });
    }
    let root = brent(objective, lo, hi, f_lo, f_hi, &ROOT_OPTIONS)?;
    finish(root.x, root.iterations, root.converged, false)
}
