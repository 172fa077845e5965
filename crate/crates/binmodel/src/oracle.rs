//! Monte-Carlo waveform oracle.
//!
//! Token pairs of band-limited Gaussian noise (plus an optional tone) are
//! synthesized directly as one-sided spectra, so the inverse FFT returns the
//! analytic signals of both ears without a separate Hilbert transform. The
//! peripheral filter is applied per bin as the square root of its power
//! response, and the interaural coherence is measured on the waveforms.

use std::f64::consts::PI;
use std::sync::Arc;

use binmodel_core::coherence::MODULUS_SLACK;
use binmodel_core::periphery::band_edges;
use binmodel_core::{coherence_of, Coherence, Complex64, PeripheryFilter, StimulusSpec};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::{Error, Result};

/// Fewest frequency bins the noise band may span.
pub const MIN_BAND_BINS: usize = 50;

const DEFAULT_SAMPLE_RATE: f64 = 4000.0;
const GRID_SLACK: f64 = 1e-9;

/// A seeded ensemble of stimulus tokens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenEnsemble {
    pub sample_rate: f64,
    pub duration: f64,
    pub n_tokens: usize,
    pub seed: u64,
    pub spec: StimulusSpec,
}

impl TokenEnsemble {
    /// Ensemble with a sample rate of at least 4 kHz, raised in steps of
    /// 1 kHz until the whole band lies below half the sample rate.
    pub fn new(spec: StimulusSpec, n_tokens: usize, duration: f64, seed: u64) -> Self {
        let top = spec.center_frequency + spec.bandwidth / 2.0;
        let sample_rate = DEFAULT_SAMPLE_RATE.max((2.0 * top / 1000.0).floor() * 1000.0 + 1000.0);
        Self {
            sample_rate,
            duration,
            n_tokens,
            seed,
            spec,
        }
    }

    pub fn with_sample_rate(mut self, sample_rate: f64) -> Self {
        self.sample_rate = sample_rate;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tokens(mut self, n_tokens: usize) -> Self {
        self.n_tokens = n_tokens;
        self
    }

    /// Samples per token.
    pub fn len(&self) -> usize {
        (self.sample_rate * self.duration).round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Frequency spacing of the spectral grid.
    pub fn resolution(&self) -> f64 {
        1.0 / self.duration
    }

    fn layout(&self) -> Result<Layout> {
        self.spec.validate()?;
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Argument(format!(
                "token duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::Argument(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if self.n_tokens == 0 {
            return Err(Error::Argument("at least one token is required".into()));
        }
        let n = self.len();
        let df = self.resolution();
        let (lo, hi) = band_edges(self.spec.center_frequency, self.spec.bandwidth)?;
        if hi >= self.sample_rate / 2.0 {
            return Err(Error::Argument(format!(
                "band edge {hi} Hz must lie below half the sample rate ({} Hz)",
                self.sample_rate
            )));
        }
        let span = (hi - lo) * self.duration;
        if span < MIN_BAND_BINS as f64 {
            return Err(Error::Resolution {
                bins: span.floor() as usize,
                required: MIN_BAND_BINS,
            });
        }
        let first = (lo / df - GRID_SLACK).ceil() as usize;
        let last = (hi / df + GRID_SLACK).floor() as usize;
        let on_grid = |edge: f64, k: usize| (edge / df - k as f64).abs() < 1e-6;
        let edge_weights = (
            if on_grid(lo, first) { 0.5 } else { 1.0 },
            if on_grid(hi, last) { 0.5 } else { 1.0 },
        );
        let tone_bin = match self.spec.tone_ipd {
            Some(_) => {
                let k = self.spec.center_frequency / df;
                if (k - k.round()).abs() > 1e-6 {
                    return Err(Error::Argument(format!(
                        "tone frequency {} Hz is not on the {df} Hz grid",
                        self.spec.center_frequency
                    )));
                }
                Some(k.round() as usize)
            }
            None => None,
        };
        Ok(Layout {
            n,
            df,
            first,
            last,
            edge_weights,
            tone_bin,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    n: usize,
    df: f64,
    first: usize,
    last: usize,
    edge_weights: (f64, f64),
    tone_bin: Option<usize>,
}

impl Layout {
    fn weight(&self, k: usize) -> f64 {
        if k == self.first {
            self.edge_weights.0
        } else if k == self.last {
            self.edge_weights.1
        } else {
            1.0
        }
    }
}

/// Planned synthesizer for one ensemble.
struct Synth {
    ensemble: TokenEnsemble,
    layout: Layout,
    fft: Arc<dyn Fft<f64>>,
}

impl Synth {
    fn new(ensemble: &TokenEnsemble) -> Result<Self> {
        let layout = ensemble.layout()?;
        let fft = FftPlanner::new().plan_fft_inverse(layout.n);
        Ok(Self {
            ensemble: *ensemble,
            layout,
            fft,
        })
    }

    /// Both ears' analytic signals for one token, optionally filtered.
    ///
    /// The random draws do not depend on the filter, so the same token index
    /// yields the same underlying noise with or without filtering.
    fn pair(&self, token: usize, filter: Option<&PeripheryFilter>) -> (Vec<Complex64>, Vec<Complex64>) {
        let spec = &self.ensemble.spec;
        let l = &self.layout;
        let mut rng = ChaCha8Rng::seed_from_u64(self.ensemble.seed);
        rng.set_stream(token as u64);
        let tone_phase = 2.0 * PI * rng.random::<f64>() - PI;
        let mut normal = || -> f64 { rng.sample(StandardNormal) };

        let mut left = vec![Complex64::new(0.0, 0.0); l.n];
        let mut right = left.clone();
        let amplitude = |f: f64| filter.map_or(1.0, |h| h.power_response(f).sqrt());

        let rho = spec.rho_n;
        let rest = (1.0 - rho * rho).max(0.0).sqrt();
        for k in l.first..=l.last {
            let f = k as f64 * l.df;
            let scale = (l.weight(k) * l.df / spec.bandwidth / 2.0).sqrt();
            let x = Complex64::new(normal(), normal()) * scale;
            let y = Complex64::new(normal(), normal()) * scale;
            let a = amplitude(f);
            let rotation = Complex64::from_polar(1.0, spec.noise_phase.at(f, spec.center_frequency));
            left[k] = x * a;
            right[k] = (x * rho + y * rest) * rotation * a;
        }
        if let (Some(k), Some(ipd)) = (l.tone_bin, spec.tone_ipd) {
            let a = spec.snr.sqrt() * amplitude(spec.center_frequency);
            left[k] += Complex64::from_polar(a, tone_phase - ipd / 2.0);
            right[k] += Complex64::from_polar(a, tone_phase + ipd / 2.0);
        }
        self.fft.process(&mut left);
        self.fft.process(&mut right);
        (left, right)
    }
}

/// Unfiltered analytic signals of both ears for one token.
pub fn synthesize_pair(ensemble: &TokenEnsemble, token: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    Ok(Synth::new(ensemble)?.pair(token, None))
}

/// Analytic signals of both ears for one token after peripheral filtering.
pub fn synthesize_filtered_pair(
    ensemble: &TokenEnsemble,
    token: usize,
    filter: &PeripheryFilter,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    Ok(Synth::new(ensemble)?.pair(token, Some(filter)))
}

/// `⟨l*·r⟩ / √(⟨|l|²⟩·⟨|r|²⟩)` of one pair of analytic signals.
pub fn token_coherence(left: &[Complex64], right: &[Complex64]) -> Result<Complex64> {
    if left.len() != right.len() {
        return Err(binmodel_core::Error::LengthMismatch(left.len(), right.len()).into());
    }
    let mut cross = Complex64::new(0.0, 0.0);
    let (mut pl, mut pr) = (0.0, 0.0);
    for (a, b) in left.iter().zip(right) {
        cross += a.conj() * b;
        pl += a.norm_sqr();
        pr += b.norm_sqr();
    }
    if pl <= 0.0 || pr <= 0.0 {
        return Err(binmodel_core::Error::DegenerateStimulus.into());
    }
    Ok(cross / (pl * pr).sqrt())
}

/// Instantaneous interaural phase difference of a pair of analytic signals.
#[derive(Debug, Clone, PartialEq)]
pub struct IpdTrajectory {
    /// `arg(l*·r)` per sample in `(-π, π]`; `None` where either ear is silent.
    pub phases: Vec<Option<f64>>,
}

impl IpdTrajectory {
    fn phasor_sum(&self) -> (Complex64, usize) {
        self.phases
            .iter()
            .flatten()
            .fold((Complex64::new(0.0, 0.0), 0), |(s, n), &p| {
                (s + Complex64::from_polar(1.0, p), n + 1)
            })
    }

    /// Circular mean of the defined samples, `None` when there are none.
    pub fn circular_mean(&self) -> Option<f64> {
        let (s, n) = self.phasor_sum();
        (n > 0).then(|| s.arg())
    }

    /// Mean resultant length in `[0, 1]`; one minus the circular variance.
    pub fn resultant_length(&self) -> Option<f64> {
        let (s, n) = self.phasor_sum();
        (n > 0).then(|| s.norm() / n as f64)
    }
}

/// IPD trajectory `Δφ(t) = arg(l*(t)·r(t))`.
pub fn instantaneous_ipd(left: &[Complex64], right: &[Complex64]) -> Result<IpdTrajectory> {
    if left.len() != right.len() {
        return Err(binmodel_core::Error::LengthMismatch(left.len(), right.len()).into());
    }
    let phases = left
        .iter()
        .zip(right)
        .map(|(a, b)| {
            let p = a.conj() * b;
            (p.norm() > f64::MIN_POSITIVE).then(|| {
                let phi = p.arg();
                if phi == -PI {
                    PI
                } else {
                    phi
                }
            })
        })
        .collect();
    Ok(IpdTrajectory { phases })
}

/// Per-token measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TokenRecord {
    pub token: usize,
    pub re: f64,
    pub im: f64,
    pub ipd_mean: f64,
    pub ipd_resultant: f64,
}

/// Ensemble-average coherence with its across-token standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCoherence {
    pub gamma: Coherence,
    /// Standard error of the real and imaginary parts.
    pub standard_error: (f64, f64),
    /// Circular mean of the instantaneous IPD pooled over all tokens.
    pub ipd_mean: f64,
    /// Mean resultant length of the pooled instantaneous IPD.
    pub ipd_resultant: f64,
    pub tokens: Vec<TokenRecord>,
}

impl EmpiricalCoherence {
    /// Combined standard error `√(se_re² + se_im²)`.
    pub fn standard_error_norm(&self) -> f64 {
        self.standard_error.0.hypot(self.standard_error.1)
    }
}

/// Measures the coherence of every token after filtering and averages it.
///
/// Tokens are processed in parallel and reduced in token order, so the
/// result does not depend on the number of worker threads.
pub fn empirical_coherence(ensemble: &TokenEnsemble, filter: &PeripheryFilter) -> Result<EmpiricalCoherence> {
    let synth = Synth::new(ensemble)?;
    let per_token: Vec<(TokenRecord, Complex64, usize)> = (0..ensemble.n_tokens)
        .into_par_iter()
        .map(|token| {
            let (l, r) = synth.pair(token, Some(filter));
            let gamma = token_coherence(&l, &r)?;
            let ipd = instantaneous_ipd(&l, &r)?;
            let (sum, count) = ipd.phasor_sum();
            let record = TokenRecord {
                token,
                re: gamma.re,
                im: gamma.im,
                ipd_mean: sum.arg(),
                ipd_resultant: if count > 0 { sum.norm() / count as f64 } else { 0.0 },
            };
            Ok((record, sum, count))
        })
        .collect::<Result<_>>()?;

    let n = per_token.len() as f64;
    let mean = per_token
        .iter()
        .fold(Complex64::new(0.0, 0.0), |s, (t, _, _)| s + Complex64::new(t.re, t.im))
        / n;
    let (var_re, var_im) = per_token.iter().fold((0.0, 0.0), |(vr, vi), (t, _, _)| {
        (vr + (t.re - mean.re).powi(2), vi + (t.im - mean.im).powi(2))
    });
    let dof = (n - 1.0).max(1.0);
    let standard_error = ((var_re / dof / n).sqrt(), (var_im / dof / n).sqrt());
    let (ipd_sum, ipd_count) = per_token
        .iter()
        .fold((Complex64::new(0.0, 0.0), 0), |(s, c), (_, sum, count)| {
            (s + sum, c + count)
        });

    if mean.norm() > 1.0 + MODULUS_SLACK {
        return Err(binmodel_core::Error::CoherenceOutOfRange { modulus: mean.norm() }.into());
    }
    Ok(EmpiricalCoherence {
        gamma: Coherence(mean),
        standard_error,
        ipd_mean: ipd_sum.arg(),
        ipd_resultant: if ipd_count > 0 {
            ipd_sum.norm() / ipd_count as f64
        } else {
            0.0
        },
        tokens: per_token.into_iter().map(|(t, _, _)| t).collect(),
    })
}

/// Acceptance band for analytic-versus-empirical agreement:
/// `|Δγ| < max(floor, sigmas · standard error)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub floor: f64,
    pub sigmas: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            floor: 0.01,
            sigmas: 3.0,
        }
    }
}

/// Analytic and empirical coherence side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub analytic: Coherence,
    pub empirical: EmpiricalCoherence,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares the quadrature coherence with the Monte-Carlo estimate, both
/// computed through the same filter.
pub fn compare(ensemble: &TokenEnsemble, filter: &PeripheryFilter) -> Result<Comparison> {
    compare_with(ensemble, filter, filter, Tolerance::default())
}

/// As [`compare`], with separate filters for the analytic and the
/// waveform path.
pub fn compare_with(
    ensemble: &TokenEnsemble,
    analytic_filter: &PeripheryFilter,
    waveform_filter: &PeripheryFilter,
    tolerance: Tolerance,
) -> Result<Comparison> {
    let analytic = coherence_of(&ensemble.spec, analytic_filter)?;
    let empirical = empirical_coherence(ensemble, waveform_filter)?;
    let deviation = (analytic.value() - empirical.gamma.value()).norm();
    let tolerance = tolerance.floor.max(tolerance.sigmas * empirical.standard_error_norm());
    Ok(Comparison {
        analytic,
        deviation,
        tolerance,
        pass: deviation < tolerance,
        empirical,
    })
}
