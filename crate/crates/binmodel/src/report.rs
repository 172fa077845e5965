//! Model-versus-data tables and the CSV files written from them.

use std::fs;
use std::path::{Path, PathBuf};

use binmodel_core::experiments::observations;
use binmodel_core::{r_squared, DetectionParams, ExperimentId, Ordinate, PeripheryFilter};

use crate::batch::{predict_all, ExperimentRun};
use crate::data::DigitizedDatum;
use crate::format::{sig, sig_opt};
use crate::{Error, Result};

/// A model threshold on the experiment's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub condition: String,
    pub x: f64,
    /// `None` when the solver found no threshold.
    pub y_model: Option<f64>,
}

/// A data point with the model's prediction at the same condition.
#[derive(Debug, Clone, PartialEq)]
pub struct DataRow {
    pub condition: String,
    pub x: f64,
    pub y_model: f64,
    pub y_data: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub id: ExperimentId,
    pub ordinate: Ordinate,
    pub params: DetectionParams,
    pub curve: Vec<CurveRow>,
    pub data: Vec<DataRow>,
    pub r_squared: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiments: Vec<ExperimentReport>,
    /// R² over the data of every SNR-ordinate experiment together.
    pub pooled_r_squared: Option<f64>,
    pub pooled_points: usize,
    /// Why an R² is missing, one line per case.
    pub notices: Vec<String>,
}

/// Pairs model curves with data. Experiments without data get no R² and a
/// notice; the pooled R² covers the experiments whose ordinate is SNR in dB.
pub fn build_report(runs: &[ExperimentRun], data: &[DigitizedDatum], filter: &PeripheryFilter) -> Result<Report> {
    let mut experiments = Vec::with_capacity(runs.len());
    let mut notices = Vec::new();
    let (mut pooled_y, mut pooled_f) = (Vec::new(), Vec::new());

    for run in runs {
        let id = run.def.id;
        let curve = run
            .points
            .iter()
            .map(|p| CurveRow {
                condition: p.condition.clone(),
                x: p.sweep_value,
                y_model: p.outcome.as_ref().ok().map(|r| r.threshold),
            })
            .collect();
        let subset: Vec<&DigitizedDatum> = data.iter().filter(|d| d.experiment == id).collect();
        let obs = observations(
            &run.def,
            subset.iter().map(|d| (d.condition.as_str(), d.x, d.y)),
            filter,
        )?;
        let predicted = predict_all(&obs, &run.params);
        let rows: Vec<DataRow> = subset
            .iter()
            .zip(&predicted)
            .map(|(d, &f)| DataRow {
                condition: d.condition.clone(),
                x: d.x,
                y_model: f,
                y_data: d.y,
            })
            .collect();

        let observed: Vec<f64> = rows.iter().map(|r| r.y_data).collect();
        let r2 = if rows.is_empty() {
            notices.push(format!("{id}: no data, R² omitted"));
            None
        } else {
            match r_squared(&observed, &predicted) {
                Ok(v) => Some(v),
                Err(e) => {
                    notices.push(format!("{id}: R² omitted ({e})"));
                    None
                }
            }
        };
        if run.def.ordinate == Ordinate::SnrDb {
            pooled_y.extend(&observed);
            pooled_f.extend(&predicted);
        }
        experiments.push(ExperimentReport {
            id,
            ordinate: run.def.ordinate,
            params: run.params,
            curve,
            data: rows,
            r_squared: r2,
        });
    }

    let pooled_r_squared = if pooled_y.is_empty() {
        notices.push("pooled: no data, R² omitted".to_string());
        None
    } else {
        r_squared(&pooled_y, &pooled_f).ok()
    };
    Ok(Report {
        experiments,
        pooled_r_squared,
        pooled_points: pooled_y.len(),
        notices,
    })
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// Writes `<experiment>.csv` per experiment, `summary.csv` and
/// `scatter.csv` into `dir`, creating it if needed. Returns the paths written.
pub fn write_report(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    for exp in &report.experiments {
        let path = dir.join(format!("{}.csv", exp.id));
        let mut w = writer(&path)?;
        let name = exp.id.name();
        let result = (|| {
            w.write_record(["experiment", "condition", "x", "y_model", "y_data"])?;
            for r in &exp.curve {
                w.write_record([name, &r.condition, &sig(r.x), &sig_opt(r.y_model), ""])?;
            }
            for r in &exp.data {
                w.write_record([name, &r.condition, &sig(r.x), &sig(r.y_model), &sig(r.y_data)])?;
            }
            w.flush()?;
            Ok(())
        })();
        result.map_err(|e| csv_error(&path, e))?;
        written.push(path);
    }

    let path = dir.join("summary.csv");
    let mut w = writer(&path)?;
    let result = (|| {
        w.write_record(["experiment", "r_squared", "n_points"])?;
        for exp in &report.experiments {
            w.write_record([exp.id.name(), &sig_opt(exp.r_squared), &exp.data.len().to_string()])?;
        }
        w.write_record([
            "pooled",
            &sig_opt(report.pooled_r_squared),
            &report.pooled_points.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    })();
    result.map_err(|e| csv_error(&path, e))?;
    written.push(path);

    let path = dir.join("scatter.csv");
    let mut w = writer(&path)?;
    let result = (|| {
        w.write_record(["experiment", "condition", "x", "y_data", "y_model", "units"])?;
        for exp in &report.experiments {
            for r in &exp.data {
                w.write_record([
                    exp.id.name(),
                    &r.condition,
                    &sig(r.x),
                    &sig(r.y_data),
                    &sig(r.y_model),
                    exp.ordinate.units(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    })();
    result.map_err(|e| csv_error(&path, e))?;
    written.push(path);
    Ok(written)
}
