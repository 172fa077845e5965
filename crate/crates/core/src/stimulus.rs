//! Parametric stimuli and their filtered cross-spectral terms.
//!
//! Every stimulus is a rectangular noise band centered on the tone frequency,
//! with total noise power normalized to one, plus an optional tone whose power
//! equals the SNR. The interaural relation of the noise is an IPD spectrum
//! `Δφ(f)` scaled by the noise correlation `ρ_N`; the tone carries a fixed IPD
//! `Δψ`.

use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use alloc::format;
use alloc::string::ToString;

use num_complex::Complex64;

use crate::periphery::{band_edges, PeripheryFilter};
use crate::quad::{self, QuadSettings};
use crate::threshold::ThresholdVariable;
use crate::{Error, Result};

/// Interaural phase of the noise as a function of frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseSpectrum {
    /// Frequency-independent IPD in radians.
    Constant(f64),
    /// Whole-waveform delay in seconds: `Δφ(ω) = ω·Δt`.
    WaveformItd(f64),
    /// Envelope-only delay in seconds: `Δφ(ω) = (ω − ω0)·Δt`.
    EnvelopeItd(f64),
}

impl PhaseSpectrum {
    /// IPD in radians at frequency `f` (Hz) for a band centered at `center` (Hz).
    pub fn at(&self, f: f64, center: f64) -> f64 {
        match *self {
            PhaseSpectrum::Constant(phi) => phi,
            PhaseSpectrum::WaveformItd(dt) => 2.0 * PI * f * dt,
            PhaseSpectrum::EnvelopeItd(dt) => 2.0 * PI * (f - center) * dt,
        }
    }

    /// Delay in seconds, zero for a constant phase.
    pub fn delay(&self) -> f64 {
        match *self {
            PhaseSpectrum::Constant(_) => 0.0,
            PhaseSpectrum::WaveformItd(dt) | PhaseSpectrum::EnvelopeItd(dt) => dt,
        }
    }

    fn value(&self) -> f64 {
        match *self {
            PhaseSpectrum::Constant(v) | PhaseSpectrum::WaveformItd(v) | PhaseSpectrum::EnvelopeItd(v) => v,
        }
    }
}

/// One interaural stimulus condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StimulusSpec {
    pub noise_phase: PhaseSpectrum,
    /// Interaural noise correlation in `[-1, 1]`.
    pub rho_n: f64,
    /// Tone IPD `Δψ` in radians; `None` for tone-free stimuli.
    pub tone_ipd: Option<f64>,
    /// Noise bandwidth in Hz.
    pub bandwidth: f64,
    /// Band and tone frequency in Hz.
    pub center_frequency: f64,
    /// Tone-to-noise power ratio (linear).
    pub snr: f64,
}

impl StimulusSpec {
    pub const CENTER_HZ: f64 = 500.0;

    /// Tone-free noise centered at 500 Hz.
    pub fn noise(noise_phase: PhaseSpectrum, rho_n: f64, bandwidth: f64) -> Self {
        Self {
            noise_phase,
            rho_n,
            tone_ipd: None,
            bandwidth,
            center_frequency: Self::CENTER_HZ,
            snr: 0.0,
        }
    }

    pub fn with_tone(mut self, tone_ipd: f64) -> Self {
        self.tone_ipd = Some(tone_ipd);
        self
    }

    pub fn with_snr(mut self, snr: f64) -> Self {
        self.snr = snr;
        self
    }

    pub fn with_rho(mut self, rho_n: f64) -> Self {
        self.rho_n = rho_n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_n.is_finite() && self.rho_n.abs() <= 1.0) {
            return Err(Error::InvalidStimulus(format!(
                "noise correlation must lie in [-1, 1], got {}",
                self.rho_n
            )));
        }
        if !self.noise_phase.value().is_finite() {
            return Err(Error::InvalidStimulus("noise phase must be finite".to_string()));
        }
        if !(self.snr.is_finite() && self.snr >= 0.0) {
            return Err(Error::InvalidStimulus(format!("SNR must be >= 0, got {}", self.snr)));
        }
        if let Some(ipd) = self.tone_ipd {
            if !ipd.is_finite() {
                return Err(Error::InvalidStimulus("tone IPD must be finite".to_string()));
            }
        }
        band_edges(self.center_frequency, self.bandwidth)?;
        Ok(())
    }
}

/// Filtered cross-spectral terms of a stimulus, normalized to unit noise power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSpectrum {
    /// `(ρ_N/Δf)·∫_band e^{iΔφ(f)}·|H(f)|² df`.
    pub noise_integral: Complex64,
    /// Filtered noise power per ear, `g`.
    pub noise_power: f64,
    /// `SNR·e^{iΔψ}·|H(f0)|²`.
    pub tone_term: Complex64,
    /// Filtered tone power per ear, `SNR·|H(f0)|²`.
    pub tone_power: f64,
}

impl CrossSpectrum {
    /// Power per ear after filtering; the normalizer of the coherence.
    pub fn power_per_side(&self) -> f64 {
        self.noise_power + self.tone_power
    }

    /// The same noise with a tone of the given power and IPD replacing any
    /// existing tone. `tone_gain` is `|H|²` at the tone frequency.
    pub fn with_tone(&self, snr: f64, tone_ipd: f64, tone_gain: f64) -> Self {
        let tone_power = snr * tone_gain;
        Self {
            noise_integral: self.noise_integral,
            noise_power: self.noise_power,
            tone_term: Complex64::from_polar(tone_power, tone_ipd),
            tone_power,
        }
    }

    pub fn without_tone(&self) -> Self {
        Self {
            tone_term: Complex64::new(0.0, 0.0),
            tone_power: 0.0,
            ..*self
        }
    }
}

/// Quadrature settings for a band: at least 20 nodes per cycle of the phase
/// ramp and panels no wider than a quarter of the filter bandwidth.
pub(crate) fn band_settings(
    filter: &PeripheryFilter,
    phase: &PhaseSpectrum,
    lo: f64,
    hi: f64,
    base: &QuadSettings,
) -> QuadSettings {
    let width = hi - lo;
    let cycles = width * phase.delay().abs();
    let osc_panels = libm::ceil(20.0 * cycles / quad::NODES_PER_PANEL as f64) as usize;
    base.with_min_panels(filter.resolution_panels(width).max(osc_panels))
}

/// `(1/Δf)·∫_band e^{iΔφ(f)}·|H(f)|² df` for unit correlation.
pub fn unit_noise_integral(
    phase: &PhaseSpectrum,
    center: f64,
    bandwidth: f64,
    filter: &PeripheryFilter,
    settings: &QuadSettings,
) -> Result<Complex64> {
    let (lo, hi) = band_edges(center, bandwidth)?;
    let settings = band_settings(filter, phase, lo, hi, settings);
    let integral = quad::integrate(
        |f| Complex64::from_polar(filter.power_response(f), phase.at(f, center)),
        lo,
        hi,
        &settings,
    )?;
    Ok(integral.value / bandwidth)
}

/// Noise power through the filter, computed with the given settings.
pub(crate) fn noise_gain(
    center: f64,
    bandwidth: f64,
    filter: &PeripheryFilter,
    settings: &QuadSettings,
) -> Result<f64> {
    let (lo, hi) = band_edges(center, bandwidth)?;
    let settings = settings.with_min_panels(filter.resolution_panels(hi - lo));
    let g = quad::integrate_real(|f| filter.power_response(f), lo, hi, &settings)?;
    Ok(g / bandwidth)
}

/// Cross-spectral terms of `spec` after peripheral filtering.
pub fn cross_spectrum_terms(spec: &StimulusSpec, filter: &PeripheryFilter) -> Result<CrossSpectrum> {
    cross_spectrum_terms_with(spec, filter, &QuadSettings::default())
}

pub fn cross_spectrum_terms_with(
    spec: &StimulusSpec,
    filter: &PeripheryFilter,
    settings: &QuadSettings,
) -> Result<CrossSpectrum> {
    spec.validate()?;
    let noise_power = noise_gain(spec.center_frequency, spec.bandwidth, filter, settings)?;
    let noise_integral = if spec.rho_n == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        unit_noise_integral(
            &spec.noise_phase,
            spec.center_frequency,
            spec.bandwidth,
            filter,
            settings,
        )? * spec.rho_n
    };
    let noise = CrossSpectrum {
        noise_integral,
        noise_power,
        tone_term: Complex64::new(0.0, 0.0),
        tone_power: 0.0,
    };
    Ok(match spec.tone_ipd {
        Some(ipd) if spec.snr > 0.0 => noise.with_tone(spec.snr, ipd, filter.power_response(spec.center_frequency)),
        _ => noise,
    })
}

/// The eight stimulus families of the built-in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Detection of a correlation change, no tone. Sweep: reference `ρ`.
    PollackTrittipoe,
    /// `NρS0` / `NρSπ` in 900 Hz noise. Sweep: `ρ_N`.
    RobinsonJeffress,
    /// `NρSπ` at several bandwidths. Sweep: `ρ_N`.
    BernsteinTrahiotis2014,
    /// Noise ITD with `S0`/`Sπ`. Sweep: ITD in ms.
    LangfordJeffress,
    /// Like Langford & Jeffress on a finer ITD grid. Sweep: ITD in ms.
    VanDerHeijdenTrahiotis,
    /// Envelope-only noise ITD with `Sπ`. Sweep: ITD in ms.
    RabinerEtAl,
    /// ITD on noise and tone, tone IPD `ω0·Δt + π`. Sweep: ITD in ms.
    BernsteinTrahiotis2020,
    /// `N0S0`, `N0Sπ`, `NπS0` across bandwidth. Sweep: bandwidth in Hz.
    VanDeParKohlrausch,
}

/// Variable along which a family is swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Reference noise correlation.
    NoiseCorrelation,
    /// Interaural delay in milliseconds.
    ItdMs,
    /// Noise bandwidth in Hz.
    BandwidthHz,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::NoiseCorrelation => "rho_n",
            SweepVariable::ItdMs => "itd_ms",
            SweepVariable::BandwidthHz => "bandwidth_hz",
        }
    }
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::PollackTrittipoe,
        Family::RobinsonJeffress,
        Family::BernsteinTrahiotis2014,
        Family::LangfordJeffress,
        Family::VanDerHeijdenTrahiotis,
        Family::RabinerEtAl,
        Family::BernsteinTrahiotis2020,
        Family::VanDeParKohlrausch,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::PollackTrittipoe => "pollack",
            Family::RobinsonJeffress => "robinson",
            Family::BernsteinTrahiotis2014 => "bernstein2014",
            Family::LangfordJeffress => "langford",
            Family::VanDerHeijdenTrahiotis => "vanderheijden",
            Family::RabinerEtAl => "rabiner",
            Family::BernsteinTrahiotis2020 => "bernstein2020",
            Family::VanDeParKohlrausch => "vandepar",
        }
    }

    pub fn sweep_variable(&self) -> SweepVariable {
        match self {
            Family::PollackTrittipoe | Family::RobinsonJeffress | Family::BernsteinTrahiotis2014 => {
                SweepVariable::NoiseCorrelation
            }
            Family::LangfordJeffress
            | Family::VanDerHeijdenTrahiotis
            | Family::RabinerEtAl
            | Family::BernsteinTrahiotis2020 => SweepVariable::ItdMs,
            Family::VanDeParKohlrausch => SweepVariable::BandwidthHz,
        }
    }

    /// Inclusive sweep range; the Pollack family excludes `ρ = 1` since the
    /// target correlation `ρ + Δρ` must stay at or below one.
    pub fn sweep_range(&self) -> (f64, f64) {
        match self {
            Family::PollackTrittipoe => (-1.0, 1.0 - 1e-6),
            Family::RobinsonJeffress | Family::BernsteinTrahiotis2014 => (-1.0, 1.0),
            Family::LangfordJeffress
            | Family::VanDerHeijdenTrahiotis
            | Family::RabinerEtAl
            | Family::BernsteinTrahiotis2020 => (-20.0, 20.0),
            Family::VanDeParKohlrausch => (0.1, 10_000.0),
        }
    }

    /// Noise bandwidth used when [`FixedParams::bandwidth_hz`] is unset.
    pub fn default_bandwidth(&self) -> f64 {
        match self {
            Family::PollackTrittipoe | Family::VanDeParKohlrausch => 1000.0,
            Family::RabinerEtAl => 1100.0,
            _ => 900.0,
        }
    }

    pub fn threshold_variable(&self) -> ThresholdVariable {
        match self {
            Family::PollackTrittipoe => ThresholdVariable::DeltaRho,
            _ => ThresholdVariable::SnrDb,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Per-condition parameters held fixed along a sweep. Unset fields take the
/// family's defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FixedParams {
    pub bandwidth_hz: Option<f64>,
    pub rho_n: Option<f64>,
    /// Tone IPD in radians. For [`Family::BernsteinTrahiotis2020`] this is the
    /// offset added to `ω0·Δt` (default π).
    pub tone_ipd: Option<f64>,
    /// Constant noise IPD in radians (van de Par & Kohlrausch only).
    pub noise_phase: Option<f64>,
}

impl FixedParams {
    pub fn bandwidth(mut self, hz: f64) -> Self {
        self.bandwidth_hz = Some(hz);
        self
    }

    pub fn rho(mut self, rho: f64) -> Self {
        self.rho_n = Some(rho);
        self
    }

    pub fn tone(mut self, ipd: f64) -> Self {
        self.tone_ipd = Some(ipd);
        self
    }

    pub fn noise_phase(mut self, phi: f64) -> Self {
        self.noise_phase = Some(phi);
        self
    }
}

/// A reference/target pair. The target's free variable (SNR, or the
/// correlation increment) is filled in by the threshold solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub reference: StimulusSpec,
    pub target: StimulusSpec,
    pub variable: ThresholdVariable,
    /// Position along the family's sweep (display units).
    pub sweep_value: f64,
}

/// Builds the reference and target stimuli of one point of a family sweep.
///
/// ITD sweeps take milliseconds, correlation sweeps take `ρ`, bandwidth
/// sweeps take Hz.
pub fn build_condition(family: Family, sweep_value: f64, fixed: &FixedParams) -> Result<Condition> {
    let (min, max) = family.sweep_range();
    if !(sweep_value.is_finite() && sweep_value >= min && sweep_value <= max) {
        return Err(Error::SweepOutOfRange {
            family: family.name(),
            value: sweep_value,
            min,
            max,
        });
    }
    let bandwidth = fixed.bandwidth_hz.unwrap_or_else(|| family.default_bandwidth());
    let center = StimulusSpec::CENTER_HZ;
    let tone = |default: f64| fixed.tone_ipd.unwrap_or(default);
    let itd_s = sweep_value * 1e-3;

    let (reference, tone_ipd) = match family {
        Family::PollackTrittipoe => {
            let reference = StimulusSpec::noise(PhaseSpectrum::Constant(0.0), sweep_value, bandwidth);
            reference.validate()?;
            return Ok(Condition {
                reference,
                target: reference,
                variable: ThresholdVariable::DeltaRho,
                sweep_value,
            });
        }
        Family::RobinsonJeffress | Family::BernsteinTrahiotis2014 => (
            StimulusSpec::noise(PhaseSpectrum::Constant(0.0), sweep_value, bandwidth),
            tone(PI),
        ),
        Family::LangfordJeffress | Family::VanDerHeijdenTrahiotis => (
            StimulusSpec::noise(PhaseSpectrum::WaveformItd(itd_s), fixed.rho_n.unwrap_or(1.0), bandwidth),
            tone(PI),
        ),
        Family::RabinerEtAl => (
            StimulusSpec::noise(PhaseSpectrum::EnvelopeItd(itd_s), fixed.rho_n.unwrap_or(1.0), bandwidth),
            tone(PI),
        ),
        Family::BernsteinTrahiotis2020 => (
            StimulusSpec::noise(PhaseSpectrum::WaveformItd(itd_s), fixed.rho_n.unwrap_or(1.0), bandwidth),
            2.0 * PI * center * itd_s + tone(PI),
        ),
        Family::VanDeParKohlrausch => (
            StimulusSpec::noise(
                PhaseSpectrum::Constant(fixed.noise_phase.unwrap_or(0.0)),
                fixed.rho_n.unwrap_or(1.0),
                sweep_value,
            ),
            tone(PI),
        ),
    };
    reference.validate()?;
    Ok(Condition {
        reference,
        target: reference.with_tone(tone_ipd),
        variable: ThresholdVariable::SnrDb,
        sweep_value,
    })
}
