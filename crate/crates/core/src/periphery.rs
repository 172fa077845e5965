//! Gammatone power-spectrum model of the auditory filter.
//!
//! Only the power response matters: the model integrates cross-spectral
//! densities weighted by `|H(f)|²`, so the filter phase never enters.

use core::f64::consts::PI;

use alloc::format;

use crate::quad::{self, QuadSettings};
use crate::{Error, Result};

/// Fourth-order gammatone centered at 500 Hz with a 79 Hz ERB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeripheryFilter {
    center_frequency: f64,
    order: u32,
    erb: f64,
    bandwidth_param: f64,
}

impl Default for PeripheryFilter {
    fn default() -> Self {
        Self::new(Self::DEFAULT_CENTER_HZ, Self::DEFAULT_ORDER, Self::DEFAULT_ERB_HZ)
            .expect("default filter parameters are valid")
    }
}

impl PeripheryFilter {
    pub const DEFAULT_CENTER_HZ: f64 = 500.0;
    pub const DEFAULT_ORDER: u32 = 4;
    pub const DEFAULT_ERB_HZ: f64 = 79.0;

    pub fn new(center_frequency: f64, order: u32, erb: f64) -> Result<Self> {
        if !(center_frequency.is_finite() && center_frequency > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "filter center frequency must be positive, got {center_frequency}"
            )));
        }
        if order == 0 || order > 64 {
            return Err(Error::InvalidParameter(format!(
                "filter order must be in 1..=64, got {order}"
            )));
        }
        if !(erb.is_finite() && erb > 0.0) {
            return Err(Error::InvalidParameter(format!("ERB must be positive, got {erb}")));
        }
        Ok(Self {
            center_frequency,
            order,
            erb,
            bandwidth_param: bandwidth_from_erb(erb, order),
        })
    }

    pub fn center_frequency(&self) -> f64 {
        self.center_frequency
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn erb(&self) -> f64 {
        self.erb
    }

    /// Bandwidth parameter `b` in Hz.
    pub fn bandwidth_param(&self) -> f64 {
        self.bandwidth_param
    }

    /// `[1 + (f − f0)²/b²]^(−n)`.
    pub fn power_response(&self, f: f64) -> f64 {
        let x = (f - self.center_frequency) / self.bandwidth_param;
        libm::pow(1.0 + x * x, -(self.order as f64))
    }

    /// Panel count that keeps each quadrature panel narrower than `b/4`.
    pub(crate) fn resolution_panels(&self, width: f64) -> usize {
        let p = libm::ceil(4.0 * width / self.bandwidth_param);
        if p.is_finite() && p >= 1.0 {
            p as usize
        } else {
            1
        }
    }

    /// Fraction of the power of a rectangular, unit-power noise band that
    /// passes the filter: `(1/Δf)·∫_band |H(f)|² df`.
    ///
    /// Band edges below 0 Hz are cut off; the density stays `1/Δf`.
    pub fn noise_power_gain(&self, band_center: f64, bandwidth: f64) -> Result<f64> {
        let (lo, hi) = band_edges(band_center, bandwidth)?;
        let settings = QuadSettings::default().with_min_panels(self.resolution_panels(hi - lo));
        let integral = quad::integrate_real(|f| self.power_response(f), lo, hi, &settings)?;
        Ok(integral / bandwidth)
    }
}

/// `b = ERB·((n−1)!)² / (π·(2n−2)!·2^(2−2n))`.
fn bandwidth_from_erb(erb: f64, order: u32) -> f64 {
    let n = order as i32;
    // ((n−1)!)² / (2n−2)! as a running product to stay in range for large n.
    let mut ratio = 1.0;
    for k in 1..n {
        let k = k as f64;
        ratio *= k / (k + (n - 1) as f64);
    }
    erb * ratio / (PI * libm::pow(2.0, (2 - 2 * n) as f64))
}

/// Edges of a rectangular band, clamped to non-negative frequencies.
pub fn band_edges(center: f64, bandwidth: f64) -> Result<(f64, f64)> {
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::InvalidStimulus(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    if !(center.is_finite() && center > 0.0) {
        return Err(Error::InvalidStimulus(format!(
            "band center must be positive, got {center}"
        )));
    }
    let lo = (center - 0.5 * bandwidth).max(0.0);
    Ok((lo, center + 0.5 * bandwidth))
}
