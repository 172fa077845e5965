//! Parameter fitting against measured thresholds and the coefficient of
//! determination.

use alloc::vec::Vec;

use crate::detection::DetectionParams;
use crate::simplex::{self, SimplexOptions};
use crate::threshold::{solve_threshold, PreparedCondition, ThresholdVariable, SNR_BRACKET_DB, SNR_EXPANSION_DB};
use crate::{Error, Result};

/// Minimum number of observations accepted by [`fit_params`].
pub const MIN_OBSERVATIONS: usize = 4;

/// `R² = 1 − Σ(y − f)² / Σ(y − ȳ)²`.
pub fn r_squared(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    if observed.len() != predicted.len() {
        return Err(Error::LengthMismatch(observed.len(), predicted.len()));
    }
    if observed.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            got: observed.len(),
        });
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let total: f64 = observed.iter().map(|y| (y - mean) * (y - mean)).sum();
    if total == 0.0 {
        return Err(Error::UndefinedRSquared);
    }
    let residual: f64 = observed.iter().zip(predicted).map(|(y, f)| (y - f) * (y - f)).sum();
    Ok(1.0 - residual / total)
}

/// A measured threshold paired with the prepared stimulus condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub condition: PreparedCondition,
    /// Threshold on the condition's native ordinate (dB SNR or `Δρ`).
    pub y: f64,
}

/// Search box for the fitted parameters (open intervals).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitBounds {
    pub rho_hat: (f64, f64),
    pub sigma_bin: (f64, f64),
    pub sigma_mon: (f64, f64),
}

impl Default for FitBounds {
    fn default() -> Self {
        Self {
            rho_hat: (0.5, 0.999),
            sigma_bin: (0.01, 2.0),
            sigma_mon: (0.01, 3.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: DetectionParams,
    pub r_squared: f64,
    /// Sum of squared residuals at the optimum.
    pub sse: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective after each accepted simplex iteration, across restarts.
    pub history: Vec<f64>,
}

// Kept strictly inside (0, 1) so mapped parameters never touch the bounds.
fn sigmoid(u: f64) -> f64 {
    (1.0 / (1.0 + libm::exp(-u))).clamp(1e-12, 1.0 - 1e-12)
}

fn logit(p: f64) -> f64 {
    libm::log(p / (1.0 - p))
}

// Unconstrained coordinates: logit-scaled ρ̂, logit-scaled log σ.
struct Transform {
    bounds: FitBounds,
}

impl Transform {
    fn rho_to(&self, u: f64) -> f64 {
        let (lo, hi) = self.bounds.rho_hat;
        lo + (hi - lo) * sigmoid(u)
    }

    fn rho_from(&self, rho: f64) -> f64 {
        let (lo, hi) = self.bounds.rho_hat;
        logit(((rho - lo) / (hi - lo)).clamp(1e-9, 1.0 - 1e-9))
    }

    fn sigma_to(&self, (lo, hi): (f64, f64), v: f64) -> f64 {
        let (ll, lh) = (libm::log(lo), libm::log(hi));
        libm::exp(ll + (lh - ll) * sigmoid(v))
    }

    fn sigma_from(&self, (lo, hi): (f64, f64), sigma: f64) -> f64 {
        let (ll, lh) = (libm::log(lo), libm::log(hi));
        logit(((libm::log(sigma) - ll) / (lh - ll)).clamp(1e-9, 1.0 - 1e-9))
    }

    fn params(&self, u: &[f64], target: f64) -> Result<DetectionParams> {
        let sigma_mon = u.get(2).map(|&v| self.sigma_to(self.bounds.sigma_mon, v));
        DetectionParams::with_target(
            self.rho_to(u[0]),
            self.sigma_to(self.bounds.sigma_bin, u[1]),
            sigma_mon,
            target,
        )
    }
}

/// Model threshold for one observation. Conditions without a root count as
/// sitting at the top of the search range so the objective stays finite.
pub fn predict(condition: &PreparedCondition, params: &DetectionParams) -> f64 {
    match solve_threshold(condition, params) {
        Ok(r) => r.threshold,
        Err(_) => match condition.variable() {
            ThresholdVariable::SnrDb => SNR_BRACKET_DB.1 + SNR_EXPANSION_DB,
            ThresholdVariable::DeltaRho => condition.bracket().1,
        },
    }
}

pub fn sum_of_squares(observations: &[Observation], params: &DetectionParams) -> f64 {
    observations
        .iter()
        .map(|o| {
            let r = predict(&o.condition, params) - o.y;
            r * r
        })
        .sum()
}

/// Fits `ρ̂`, `σ_bin` and (when `start` has one) `σ_mon` by least squares on
/// the native ordinate.
///
/// Nelder–Mead runs in bounded unconstrained coordinates and restarts from
/// its best point until a restart no longer improves the fit or the
/// evaluation budget is spent.
pub fn fit_params(
    observations: &[Observation],
    start: &DetectionParams,
    bounds: &FitBounds,
    options: &SimplexOptions,
) -> Result<FitResult> {
    if observations.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData {
            required: MIN_OBSERVATIONS,
            got: observations.len(),
        });
    }
    let transform = Transform { bounds: *bounds };
    let target = start.dprime_target();
    let mut x0 = Vec::with_capacity(3);
    x0.push(transform.rho_from(start.rho_hat()));
    x0.push(transform.sigma_from(bounds.sigma_bin, start.sigma_bin()));
    if let Some(s) = start.sigma_mon() {
        x0.push(transform.sigma_from(bounds.sigma_mon, s));
    }
    let objective = |u: &[f64]| match transform.params(u, target) {
        Ok(p) => sum_of_squares(observations, &p),
        Err(_) => f64::INFINITY,
    };

    let mut evaluations = 0;
    let mut iterations = 0;
    let mut history = Vec::new();
    let mut best_x = x0;
    let mut best_f = f64::INFINITY;
    let mut converged = false;
    let mut step = 0.5;
    while evaluations < options.max_evaluations {
        let budget = SimplexOptions {
            max_evaluations: options.max_evaluations - evaluations,
            ..*options
        };
        let steps: Vec<f64> = best_x.iter().map(|_| step).collect();
        let run = simplex::minimize(objective, &best_x, &steps, &budget);
        evaluations += run.evaluations;
        iterations += run.iterations;
        for v in &run.history {
            let last = history.last().copied().unwrap_or(f64::INFINITY);
            history.push(v.min(last));
        }
        let improved = run.fx < best_f - options.ftol * (1.0 + best_f.abs());
        if run.fx <= best_f {
            best_f = run.fx;
            best_x = run.x;
        }
        converged = run.converged;
        if !improved && run.converged {
            break;
        }
        step = 0.1;
    }

    let params = transform.params(&best_x, target)?;
    let observed: Vec<f64> = observations.iter().map(|o| o.y).collect();
    let predicted: Vec<f64> = observations.iter().map(|o| predict(&o.condition, &params)).collect();
    Ok(FitResult {
        params,
        r_squared: r_squared(&observed, &predicted)?,
        sse: best_f,
        evaluations,
        iterations,
        converged,
        history,
    })
}
