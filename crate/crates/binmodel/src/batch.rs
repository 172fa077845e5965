//! Parallel evaluation of experiment grids and data points.

use binmodel_core::experiments::{run_point, ExperimentPoint};
use binmodel_core::fit::predict;
use binmodel_core::{DetectionParams, ExperimentDef, Observation, PeripheryFilter};
use rayon::prelude::*;

use crate::{Error, Result};

/// Thresholds of one experiment grid under one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub def: ExperimentDef,
    pub params: DetectionParams,
    pub points: Vec<ExperimentPoint>,
}

/// Runs `f` on a pool of `threads` workers, or on the global pool when
/// `threads` is `None`.
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Argument("worker count must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Argument(e.to_string())),
    }
}

/// Solves every grid point of every job. Points are distributed over the
/// current pool and reassembled in grid order.
pub fn run_batch(jobs: &[(ExperimentDef, DetectionParams)], filter: &PeripheryFilter) -> Vec<ExperimentRun> {
    let tasks: Vec<(usize, &str, f64)> = jobs
        .iter()
        .enumerate()
        .flat_map(|(j, (def, _))| def.grid().map(move |(c, x)| (j, c, x)))
        .collect();
    let mut points: Vec<(usize, ExperimentPoint)> = tasks
        .par_iter()
        .map(|&(j, c, x)| (j, run_point(&jobs[j].0, c, x, &jobs[j].1, filter)))
        .collect();

    let mut runs: Vec<ExperimentRun> = jobs
        .iter()
        .map(|(def, params)| ExperimentRun {
            def: def.clone(),
            params: *params,
            points: Vec::new(),
        })
        .collect();
    for (j, p) in points.drain(..) {
        runs[j].points.push(p);
    }
    runs
}

/// Model predictions at observation points, in input order.
pub fn predict_all(observations: &[Observation], params: &DetectionParams) -> Vec<f64> {
    observations.par_iter().map(|o| predict(&o.condition, params)).collect()
}
