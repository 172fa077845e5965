//! Digitized threshold data in CSV form.
//!
//! Files carry the header `experiment,condition,x,y,units`. `x` is the sweep
//! value in the experiment's sweep units and `y` the threshold on its
//! ordinate (`db` or `delta_rho`).

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use binmodel_core::{ExperimentDef, ExperimentId};

use crate::{Error, Result};

/// Environment variable that relocates the data directory.
pub const DATA_DIR_ENV: &str = "BINMODEL_DATA_DIR";

const HEADER: [&str; 5] = ["experiment", "condition", "x", "y", "units"];

#[derive(Debug, Clone, PartialEq)]
pub struct DigitizedDatum {
    pub experiment: ExperimentId,
    pub condition: String,
    pub x: f64,
    pub y: f64,
    pub units: String,
}

/// Data directory: `$BINMODEL_DATA_DIR`, else `./data`, else the directory
/// shipped with the source tree.
pub fn data_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        return PathBuf::from(dir);
    }
    let local = PathBuf::from("data");
    if local.is_dir() {
        return local;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    manifest.ancestors().nth(2).unwrap_or(manifest).join("data")
}

/// Reads and validates one data file.
pub fn ingest_data(path: &Path) -> Result<Vec<DigitizedDatum>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, path)
}

/// Reads and validates CSV data; `label` names the source in errors.
pub fn ingest_reader<R: Read>(reader: R, label: &Path) -> Result<Vec<DigitizedDatum>> {
    let bad = |row: u64, message: String| Error::Data {
        path: label.to_path_buf(),
        row,
        message,
    };
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = csv.headers().map_err(|e| bad(1, e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(bad(1, format!("expected header `{}`", HEADER.join(","))));
    }

    let mut defs: Vec<ExperimentDef> = Vec::new();
    let mut out = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            bad(row, e.to_string())
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let number = |i: usize| -> Result<f64> {
            let field = &record[i];
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(row, format!("{} must be a finite number, got `{field}`", HEADER[i])))
        };

        let experiment: ExperimentId = record[0]
            .parse()
            .map_err(|_| bad(row, format!("unknown experiment `{}`", &record[0])))?;
        let def = match defs.iter().position(|d| d.id == experiment) {
            Some(i) => &defs[i],
            None => {
                defs.push(ExperimentDef::builtin(experiment));
                defs.last().expect("just pushed")
            }
        };
        let condition = record[1].to_string();
        let (x, y) = (number(2)?, number(3)?);
        def.condition(&condition, x).map_err(|e| bad(row, e.to_string()))?;
        let units = record[4].to_ascii_lowercase();
        if units != def.ordinate.units() {
            return Err(bad(
                row,
                format!(
                    "units `{units}` do not match {experiment}, which expects `{}`",
                    def.ordinate.units()
                ),
            ));
        }
        out.push(DigitizedDatum {
            experiment,
            condition,
            x,
            y,
            units,
        });
    }
    Ok(out)
}

/// Every `*.csv` file in `dir`, read in file-name order. A missing directory
/// holds no data.
pub fn load_data_dir(dir: &Path) -> Result<Vec<DigitizedDatum>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for file in files {
        out.extend(ingest_data(&file)?);
    }
    Ok(out)
}
