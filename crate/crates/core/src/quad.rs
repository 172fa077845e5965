//! Composite Gauss–Legendre quadrature for complex-valued integrands with
//! panel doubling.
//!
//! The cross-spectral integrands are smooth but can oscillate (an ITD puts a
//! phase ramp `e^{iωΔt}` across the band), so callers pass a minimum panel
//! count derived from the number of oscillation cycles and the rule refines
//! from there until two successive estimates agree.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Gauss–Legendre points per panel.
pub const NODES_PER_PANEL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    /// Relative tolerance between successive doublings, measured against
    /// `max(|I|, ∫|f|)` so that integrals which cancel to zero still terminate.
    pub rel_tol: f64,
    pub min_panels: usize,
    pub max_panels: usize,
    /// Refinements applied after convergence; used by tests that check
    /// invariance under node doubling.
    pub extra_doublings: u32,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            min_panels: 1,
            max_panels: 1 << 15,
            extra_doublings: 0,
        }
    }
}

impl QuadSettings {
    pub fn with_min_panels(mut self, panels: usize) -> Self {
        self.min_panels = self.min_panels.max(panels);
        self
    }

    pub fn with_extra_doublings(mut self, n: u32) -> Self {
        self.extra_doublings = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    /// Same rule applied to `|f|`.
    pub abs_value: f64,
    pub panels: usize,
}

impl Integral {
    pub fn nodes(&self) -> usize {
        self.panels * NODES_PER_PANEL
    }
}

/// Nodes and weights of the `N`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<const N: usize>() -> ([f64; N], [f64; N]) {
    let mut nodes = [0.0; N];
    let mut weights = [0.0; N];
    let n = N as f64;
    for i in 0..N.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_N.
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(N, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if libm::fabs(dx) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(N, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[N - 1 - i] = x;
        weights[i] = w;
        weights[N - 1 - i] = w;
    }
    (nodes, weights)
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

struct Rule {
    nodes: [f64; NODES_PER_PANEL],
    weights: [f64; NODES_PER_PANEL],
}

impl Rule {
    fn new() -> Self {
        let (nodes, weights) = gauss_legendre::<NODES_PER_PANEL>();
        Self { nodes, weights }
    }

    fn composite<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64, panels: usize) -> (Complex64, f64) {
        let h = (b - a) / panels as f64;
        let half = 0.5 * h;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            let mut panel = Complex64::new(0.0, 0.0);
            let mut abs_panel = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let v = f(mid + half * x);
                panel += v * *w;
                abs_panel += v.norm() * w;
            }
            sum += panel * half;
            abs_sum += abs_panel * half;
        }
        (sum, abs_sum)
    }
}

/// Integrates `f` over `[a, b]`, doubling the panel count until successive
/// estimates agree to `settings.rel_tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, settings: &QuadSettings) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    if a == b {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            abs_value: 0.0,
            panels: 0,
        });
    }
    let rule = Rule::new();
    let mut panels = settings.min_panels.max(1);
    let (mut value, _) = rule.composite(&f, a, b, panels);
    loop {
        panels *= 2;
        if panels > settings.max_panels {
            return Err(Error::QuadratureNotConverged {
                panels: panels / 2,
                tolerance: settings.rel_tol,
            });
        }
        let (next, abs_next) = rule.composite(&f, a, b, panels);
        let scale = next.norm().max(abs_next);
        let converged = (next - value).norm() <= settings.rel_tol * scale;
        value = next;
        if converged {
            let mut abs_value = abs_next;
            for _ in 0..settings.extra_doublings {
                panels *= 2;
                (value, abs_value) = rule.composite(&f, a, b, panels);
            }
            return Ok(Integral {
                value,
                abs_value,
                panels,
            });
        }
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, a: f64, b: f64, settings: &QuadSettings) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, settings).map(|i| i.value.re)
}
