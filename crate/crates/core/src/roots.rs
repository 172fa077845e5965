//! Bracketed scalar root finding (Brent's method).

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Absolute tolerance on the root location.
    pub xtol: f64,
    /// Stop early once `|f(x)|` falls below this.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            xtol: 1e-10,
            ftol: 1e-12,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Finds a root of `f` in `[a, b]`. `fa` and `fb` are `f(a)` and `f(b)`,
/// which callers usually have already; they must differ in sign.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, opts: &RootOptions) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            fx: fa,
            iterations: 0,
            converged: true,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            fx: fb,
            iterations: 0,
            converged: true,
        });
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoThreshold {
            lower: a.min(b),
            upper: a.max(b),
        });
    }

    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * opts.xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb.abs() <= opts.ftol {
            return Ok(Root {
                x: b,
                fx: fb,
                iterations: iter,
                converged: true,
            });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, or secant when a == c
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Ok(Root {
        x: b,
        fx: fb,
        iterations: opts.max_iter,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_root() {
        let f = |x: f64| -x * x + 2.0 * x + 1.0;
        let r = brent(f, 2.0, 3.0, f(2.0), f(3.0), &RootOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.x - (1.0 + libm::sqrt(2.0))).abs() < 1e-10);
    }

    #[test]
    fn steep_function() {
        let f = |x: f64| libm::tanh(50.0 * (x - 0.3)) + 1e-3;
        let r = brent(f, -5.0, 5.0, f(-5.0), f(5.0), &RootOptions::default()).unwrap();
        assert!(f(r.x).abs() < 1e-9);
        assert!(r.iterations < 100);
    }

    #[test]
    fn requires_sign_change() {
        let f = |x: f64| x * x + 1.0;
        assert!(matches!(
            brent(f, -1.0, 1.0, f(-1.0), f(1.0), &RootOptions::default()),
            Err(Error::NoThreshold { .. })
        ));
    }

    #[test]
    fn endpoint_root() {
        let f = |x: f64| x;
        let r = brent(f, 0.0, 1.0, 0.0, 1.0, &RootOptions::default()).unwrap();
        assert_eq!(r.x, 0.0);
    }
}
