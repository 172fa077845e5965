//! Nelder–Mead downhill simplex minimizer.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_evaluations: usize,
    /// Converged when the spread of function values across the simplex
    /// falls below `ftol` and its extent below `xtol`.
    pub ftol: f64,
    pub xtol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 2000,
            ftol: 1e-12,
            xtol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective value after each iteration.
    pub history: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` starting from `x0` with initial simplex offsets `step`.
///
/// NaN objective values are treated as `+∞`.
pub fn minimize<F>(mut f: F, x0: &[f64], step: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(step.len(), n, "step and start dimensions differ");
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    points.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step[i];
        points.push(p);
    }
    let mut values: Vec<f64> = points.iter().map(|p| eval(p, &mut evaluations)).collect();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    while evaluations < opts.max_evaluations {
        // order: best first
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        points = order.iter().map(|&i| points[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        history.push(values[0]);

        let f_spread = (values[n] - values[0]).abs();
        let x_spread = points[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&points[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= opts.ftol * (1.0 + values[0].abs()) && x_spread <= opts.xtol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for p in &points[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let worst = points[n].clone();
        for i in 0..n {
            trial[i] = centroid[i] + REFLECT * (centroid[i] - worst[i]);
        }
        let f_reflect = eval(&trial, &mut evaluations);

        if f_reflect < values[0] {
            for i in 0..n {
                trial2[i] = centroid[i] + EXPAND * (trial[i] - centroid[i]);
            }
            let f_expand = eval(&trial2, &mut evaluations);
            if f_expand < f_reflect {
                points[n].copy_from_slice(&trial2);
                values[n] = f_expand;
            } else {
                points[n].copy_from_slice(&trial);
                values[n] = f_reflect;
            }
            continue;
        }
        if f_reflect < values[n - 1] {
            points[n].copy_from_slice(&trial);
            values[n] = f_reflect;
            continue;
        }
        // contraction, outside if the reflection improved on the worst point
        let (base, f_base) = if f_reflect < values[n] {
            (trial.clone(), f_reflect)
        } else {
            (worst.clone(), values[n])
        };
        for i in 0..n {
            trial2[i] = centroid[i] + CONTRACT * (base[i] - centroid[i]);
        }
        let f_contract = eval(&trial2, &mut evaluations);
        if f_contract < f_base {
            points[n].copy_from_slice(&trial2);
            values[n] = f_contract;
            continue;
        }
        let best = points[0].clone();
        for j in 1..=n {
            for i in 0..n {
                points[j][i] = best[i] + SHRINK * (points[j][i] - best[i]);
            }
            values[j] = eval(&points[j], &mut evaluations);
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    if history.last() != Some(&values[best]) {
        history.push(values[best]);
    }
    SimplexResult {
        x: points[best].clone(),
        fx: values[best],
        evaluations,
        iterations,
        converged,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn finds_rosenbrock_minimum() {
        let opts = SimplexOptions {
            max_evaluations: 5000,
            ..Default::default()
        };
        let r = minimize(rosenbrock, &[-1.2, 1.0], &[0.5, 0.5], &opts);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
    }

    #[test]
    fn history_never_increases() {
        let r = minimize(
            |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(4) + libm::sin(5.0 * x[2]) + x[2] * x[2],
            &[0.0, 0.0, 0.0],
            &[1.0, 1.0, 1.0],
            &SimplexOptions::default(),
        );
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn respects_evaluation_budget() {
        let opts = SimplexOptions {
            max_evaluations: 30,
            ftol: 0.0,
            xtol: 0.0,
        };
        let r = minimize(rosenbrock, &[-1.2, 1.0], &[0.5, 0.5], &opts);
        assert!(!r.converged);
        assert!(r.evaluations <= 30 + 3);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let r = minimize(
            |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 2.0).powi(2) },
            &[1.0],
            &[0.5],
            &SimplexOptions::default(),
        );
        assert!((r.x[0] - 2.0).abs() < 1e-4);
    }
}
