use std::path::{Path, PathBuf};
use std::process::ExitCode;

use binmodel::batch::{run_batch, with_threads};
use binmodel::config::{ConditionConfig, FitRecord, ParamSet, ParamsFile, ParamsSource};
use binmodel::data::{data_dir, load_data_dir, DigitizedDatum};
use binmodel::format::{round_sig, sig, sig_opt};
use binmodel::oracle::{compare, Comparison, TokenEnsemble};
use binmodel::report::{build_report, write_report, Report};
use binmodel::{Error, Result};
use binmodel_core::experiments::observations;
use binmodel_core::simplex::SimplexOptions;
use binmodel_core::{
    coherence_of, fit_params, ipd_discrimination_threshold, solve_threshold, Coherence, ExperimentDef, ExperimentId,
    FitBounds, PeripheryFilter, PreparedCondition,
};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

/// Complex interaural correlation model of binaural tone-in-noise detection.
#[derive(Debug, Parser)]
#[command(name = "binmodel", version)]
struct Cli {
    /// Print machine-readable JSON records instead of tables.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for batch work (default: available cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filtered interaural coherence of one stimulus.
    Coherence {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
    /// Detection threshold of one condition.
    Threshold {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[command(flatten)]
        params: ParamsArg,
    },
    /// Built-in experiment grids.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
    /// Fit detection parameters to digitized data.
    Fit {
        /// Experiment name, or `all`.
        name: String,
        /// Starting point: table1, global, an experiment name or a JSON file.
        #[arg(long, default_value = "table1")]
        start: String,
        #[command(flatten)]
        data: DataArg,
        /// Write the fitted parameters as JSON to this file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run all experiments against the data and write R² tables.
    Report {
        #[command(flatten)]
        params: ParamsArg,
        #[command(flatten)]
        data: DataArg,
        #[arg(long, default_value = "results", value_name = "DIR")]
        out: PathBuf,
    },
    /// Just-noticeable IPD of a diotic tone implied by the parameters.
    IpdThreshold {
        #[arg(long, default_value = "global")]
        params: String,
        /// Tone frequency for the conversion to microseconds.
        #[arg(long, default_value_t = 500.0, value_name = "HZ")]
        frequency: f64,
    },
    /// Monte-Carlo waveform oracle.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
}

#[derive(Debug, Subcommand)]
enum ExperimentAction {
    /// Solve the threshold grid of one experiment or of all.
    Run {
        /// Experiment name, or `all`.
        name: String,
        #[command(flatten)]
        params: ParamsArg,
        #[command(flatten)]
        data: DataArg,
        #[arg(long, default_value = "results", value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum OracleAction {
    /// Compare the analytic coherence with the waveform estimate.
    Compare {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        tokens: usize,
        /// Token duration in seconds.
        #[arg(long, default_value_t = 2.0)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "HZ")]
        sample_rate: Option<f64>,
        /// Write per-token values to this CSV file.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ParamsArg {
    /// table1, global, an experiment name or a JSON parameter file.
    #[arg(long, default_value = "table1")]
    params: String,
}

#[derive(Debug, Args)]
struct DataArg {
    /// Directory of digitized CSV data (default: $BINMODEL_DATA_DIR or ./data).
    #[arg(long, value_name = "DIR")]
    data_dir: Option<PathBuf>,
}

impl DataArg {
    fn load(&self) -> Result<Vec<DigitizedDatum>> {
        load_data_dir(&self.data_dir.clone().unwrap_or_else(data_dir))
    }
}

fn experiments(name: &str) -> Result<Vec<ExperimentDef>> {
    if name.eq_ignore_ascii_case("all") {
        Ok(ExperimentDef::all())
    } else {
        let id: ExperimentId = name
            .parse()
            .map_err(|_| Error::Argument(format!("unknown experiment `{name}`")))?;
        Ok(vec![ExperimentDef::builtin(id)])
    }
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn print_rows(rows: &[(&str, String)]) {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        println!("{k:<width$}  {v}");
    }
}

fn print_table(header: &[&str], rows: &[Vec<String>]) {
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        println!("{}", padded.join("  ").trim_end());
    };
    line(header.to_vec());
    for r in rows {
        line(r.iter().map(String::as_str).collect());
    }
}

fn coherence_json(g: &Coherence) -> Value {
    json!({
        "re": round_sig(g.value().re),
        "im": round_sig(g.value().im),
        "modulus": round_sig(g.modulus()),
        "arg_rad": round_sig(g.argument()),
    })
}

fn cmd_coherence(cli: &Cli, config: &Path) -> Result<()> {
    let spec = ConditionConfig::load(config)?.stimulus()?;
    let g = coherence_of(&spec, &PeripheryFilter::default())?;
    if cli.json {
        print_json(&coherence_json(&g));
    } else {
        print_rows(&[
            ("re", sig(g.value().re)),
            ("im", sig(g.value().im)),
            ("modulus", sig(g.modulus())),
            ("arg_rad", sig(g.argument())),
            ("arg_pi", sig(g.argument() / std::f64::consts::PI)),
        ]);
    }
    Ok(())
}

fn cmd_threshold(cli: &Cli, config: &Path, params: &str) -> Result<()> {
    let cfg = ConditionConfig::load(config)?;
    let params = params.parse::<ParamsSource>()?.load()?.for_family(cfg.family()?)?;
    let filter = PeripheryFilter::default();
    let prepared = PreparedCondition::new(&cfg.condition()?, &filter)?;
    let r = solve_threshold(&prepared, &params)?;
    if cli.json {
        print_json(&json!({
            "variable": r.variable.name(),
            "threshold": round_sig(r.threshold),
            "d_bin": round_sig(r.d_bin),
            "d_mon": round_sig(r.d_mon),
            "dprime": round_sig(r.dprime()),
            "clamped": r.clamped,
            "iterations": r.iterations,
        }));
    } else {
        let mut rows = vec![
            ("variable", r.variable.name().to_string()),
            ("threshold", sig(r.threshold)),
            ("d_bin", sig(r.d_bin)),
            ("d_mon", sig(r.d_mon)),
            ("dprime", sig(r.dprime())),
        ];
        if r.clamped {
            rows.push(("note", "already detectable at the bottom of the search range".into()));
        }
        print_rows(&rows);
    }
    Ok(())
}

fn run_and_report(cli: &Cli, defs: Vec<ExperimentDef>, params: &str, data: &DataArg, out: &Path) -> Result<Report> {
    let set = params.parse::<ParamsSource>()?.load()?;
    let data = data.load()?;
    let filter = PeripheryFilter::default();
    let jobs: Vec<_> = defs
        .into_iter()
        .map(|d| {
            let p = set.for_experiment(d.id);
            (d, p)
        })
        .collect();
    let report = with_threads(cli.jobs, || -> Result<Report> {
        let runs = run_batch(&jobs, &filter);
        build_report(&runs, &data, &filter)
    })??;
    write_report(&report, out)?;
    for notice in &report.notices {
        eprintln!("note: {notice}");
    }
    Ok(report)
}

fn print_report(cli: &Cli, report: &Report) {
    if cli.json {
        let experiments: Vec<Value> = report
            .experiments
            .iter()
            .map(|e| {
                let failed = e.curve.iter().filter(|r| r.y_model.is_none()).count();
                json!({
                    "experiment": e.id.name(),
                    "units": e.ordinate.units(),
                    "grid_points": e.curve.len(),
                    "failed": failed,
                    "n_points": e.data.len(),
                    "r_squared": e.r_squared.map(round_sig),
                    "table1_r_squared": e.id.table1_r_squared(),
                })
            })
            .collect();
        print_json(&json!({
            "experiments": experiments,
            "pooled_r_squared": report.pooled_r_squared.map(round_sig),
            "pooled_points": report.pooled_points,
        }));
        return;
    }
    let rows: Vec<Vec<String>> = report
        .experiments
        .iter()
        .map(|e| {
            let ys: Vec<f64> = e.curve.iter().filter_map(|r| r.y_model).collect();
            let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            vec![
                e.id.name().to_string(),
                e.ordinate.units().to_string(),
                format!("{}/{}", ys.len(), e.curve.len()),
                if ys.is_empty() { String::new() } else { sig(lo) },
                if ys.is_empty() { String::new() } else { sig(hi) },
                e.data.len().to_string(),
                sig_opt(e.r_squared),
            ]
        })
        .collect();
    print_table(
        &["experiment", "units", "solved", "min", "max", "n_data", "r_squared"],
        &rows,
    );
    println!(
        "pooled r_squared: {} ({} points)",
        sig_opt(report.pooled_r_squared),
        report.pooled_points
    );
}

fn cmd_fit(cli: &Cli, name: &str, start: &str, data: &DataArg, out: Option<&Path>) -> Result<()> {
    let start = start.parse::<ParamsSource>()?.load()?;
    let data = data.load()?;
    let filter = PeripheryFilter::default();
    let mut records = Vec::new();
    for def in experiments(name)? {
        let points: Vec<_> = data
            .iter()
            .filter(|d| d.experiment == def.id)
            .map(|d| (d.condition.as_str(), d.x, d.y))
            .collect();
        if points.is_empty() {
            eprintln!("note: {}: no data, not fitted", def.id);
            continue;
        }
        let obs = observations(&def, points, &filter)?;
        let x0 = start.for_experiment(def.id);
        let fit = with_threads(cli.jobs, || {
            fit_params(&obs, &x0, &FitBounds::default(), &SimplexOptions::default())
        })??;
        records.push(FitRecord {
            experiment: def.id.name().to_string(),
            rho_hat: fit.params.rho_hat(),
            sigma_bin: fit.params.sigma_bin(),
            sigma_mon: fit.params.sigma_mon(),
            dprime_target: fit.params.dprime_target(),
            r_squared: fit.r_squared,
            iterations: fit.iterations,
            evaluations: fit.evaluations,
            n_points: obs.len(),
        });
    }
    if records.is_empty() {
        return Err(Error::MissingData(name.to_string()));
    }
    if let Some(path) = out {
        let body = if records.len() == 1 {
            serde_json::to_string_pretty(&records[0])
        } else {
            serde_json::to_string_pretty(&records)
        }
        .expect("serializable");
        std::fs::write(path, body + "\n").map_err(|e| Error::io(path, e))?;
    }
    if cli.json {
        let rounded: Vec<Value> = records
            .iter()
            .map(|r| {
                json!({
                    "experiment": r.experiment,
                    "rho_hat": round_sig(r.rho_hat),
                    "sigma_bin": round_sig(r.sigma_bin),
                    "sigma_mon": r.sigma_mon.map(round_sig),
                    "dprime_target": round_sig(r.dprime_target),
                    "r_squared": round_sig(r.r_squared),
                    "iterations": r.iterations,
                    "evaluations": r.evaluations,
                    "n_points": r.n_points,
                })
            })
            .collect();
        print_json(&Value::Array(rounded));
    } else {
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                vec![
                    r.experiment.clone(),
                    sig(r.rho_hat),
                    sig(r.sigma_bin),
                    sig_opt(r.sigma_mon),
                    sig(r.r_squared),
                    r.n_points.to_string(),
                    r.iterations.to_string(),
                ]
            })
            .collect();
        print_table(
            &[
                "experiment",
                "rho_hat",
                "sigma_bin",
                "sigma_mon",
                "r_squared",
                "n_points",
                "iterations",
            ],
            &rows,
        );
    }
    Ok(())
}

fn cmd_ipd(cli: &Cli, params: &str, frequency: f64) -> Result<()> {
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(Error::Argument(format!(
            "--frequency must be positive, got {frequency}"
        )));
    }
    let rows: Vec<(String, ParamsFile)> = match params.parse::<ParamsSource>()?.load()? {
        ParamSet::Table1 => ExperimentId::ALL
            .iter()
            .map(|id| (id.name().to_string(), ParamsFile::from(&id.table1_params())))
            .collect(),
        set => vec![(params.to_string(), ParamsFile::from(&set.for_family(None)?))],
    };
    let mut values = Vec::with_capacity(rows.len());
    for (_, p) in &rows {
        values.push(ipd_discrimination_threshold(&p.to_params()?)?);
    }
    let us: Vec<f64> = values.iter().map(|t| t.microseconds_at(frequency)).collect();
    let mut sorted = us.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };

    if cli.json {
        let entries: Vec<Value> = rows
            .iter()
            .zip(values.iter().zip(&us))
            .map(|((name, p), (t, &u))| {
                json!({
                    "params": name,
                    "rho_hat": round_sig(p.rho_hat),
                    "sigma_bin": round_sig(p.sigma_bin),
                    "ipd_rad": round_sig(t.radians),
                    "itd_us": round_sig(u),
                })
            })
            .collect();
        let mut record = json!({ "frequency_hz": round_sig(frequency), "thresholds": entries });
        if rows.len() > 1 {
            record["min_us"] = json!(round_sig(sorted[0]));
            record["max_us"] = json!(round_sig(sorted[sorted.len() - 1]));
            record["median_us"] = json!(round_sig(median));
        }
        print_json(&record);
    } else if rows.len() == 1 {
        print_rows(&[("ipd_rad", sig(values[0].radians)), ("itd_us", sig(us[0]))]);
    } else {
        let table: Vec<Vec<String>> = rows
            .iter()
            .zip(values.iter().zip(&us))
            .map(|((name, p), (t, &u))| vec![name.clone(), sig(p.rho_hat), sig(p.sigma_bin), sig(t.radians), sig(u)])
            .collect();
        print_table(&["params", "rho_hat", "sigma_bin", "ipd_rad", "itd_us"], &table);
        println!(
            "min {} us, max {} us, median {} us",
            sig(sorted[0]),
            sig(sorted[sorted.len() - 1]),
            sig(median)
        );
    }
    Ok(())
}

fn write_tokens(path: &Path, cmp: &Comparison) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?;
    let result = (|| -> csv::Result<()> {
        w.write_record(["token", "re", "im", "ipd_mean", "ipd_resultant"])?;
        for t in &cmp.empirical.tokens {
            w.write_record([
                t.token.to_string(),
                sig(t.re),
                sig(t.im),
                sig(t.ipd_mean),
                sig(t.ipd_resultant),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    result.map_err(|e| Error::Argument(format!("{}: {e}", path.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle(
    cli: &Cli,
    config: &Path,
    tokens: usize,
    duration: f64,
    seed: u64,
    sample_rate: Option<f64>,
    csv_out: Option<&Path>,
) -> Result<()> {
    let spec = ConditionConfig::load(config)?.stimulus()?;
    let mut ensemble = TokenEnsemble::new(spec, tokens, duration, seed);
    if let Some(fs) = sample_rate {
        ensemble = ensemble.with_sample_rate(fs);
    }
    let filter = PeripheryFilter::default();
    let cmp = with_threads(cli.jobs, || compare(&ensemble, &filter))??;
    if let Some(path) = csv_out {
        write_tokens(path, &cmp)?;
    }
    let e = &cmp.empirical;
    if cli.json {
        print_json(&json!({
            "analytic": coherence_json(&cmp.analytic),
            "empirical": coherence_json(&e.gamma),
            "standard_error": { "re": round_sig(e.standard_error.0), "im": round_sig(e.standard_error.1) },
            "ipd_circular_mean_rad": round_sig(e.ipd_mean),
            "ipd_resultant": round_sig(e.ipd_resultant),
            "deviation": round_sig(cmp.deviation),
            "tolerance": round_sig(cmp.tolerance),
            "pass": cmp.pass,
            "tokens": tokens,
            "duration_s": round_sig(duration),
            "sample_rate_hz": round_sig(ensemble.sample_rate),
            "seed": seed,
        }));
    } else {
        let complex = |g: &Coherence| {
            let im = g.value().im;
            format!(
                "{} {} {}i",
                sig(g.value().re),
                if im < 0.0 { '-' } else { '+' },
                sig(im.abs())
            )
        };
        print_rows(&[
            ("analytic", complex(&cmp.analytic)),
            ("empirical", complex(&e.gamma)),
            (
                "standard_error",
                format!("{} {}", sig(e.standard_error.0), sig(e.standard_error.1)),
            ),
            ("ipd_circular_mean", sig(e.ipd_mean)),
            ("deviation", sig(cmp.deviation)),
            ("tolerance", sig(cmp.tolerance)),
            ("result", if cmp.pass { "pass" } else { "fail" }.to_string()),
        ]);
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Coherence { config } => cmd_coherence(cli, config),
        Command::Threshold { config, params } => cmd_threshold(cli, config, &params.params),
        Command::Experiment {
            action:
                ExperimentAction::Run {
                    name,
                    params,
                    data,
                    out,
                },
        } => {
            let report = run_and_report(cli, experiments(name)?, &params.params, data, out)?;
            print_report(cli, &report);
            Ok(())
        }
        Command::Fit { name, start, data, out } => cmd_fit(cli, name, start, data, out.as_deref()),
        Command::Report { params, data, out } => {
            let report = run_and_report(cli, ExperimentDef::all(), &params.params, data, out)?;
            print_report(cli, &report);
            Ok(())
        }
        Command::IpdThreshold { params, frequency } => cmd_ipd(cli, params, *frequency),
        Command::Oracle {
            action:
                OracleAction::Compare {
                    config,
                    tokens,
                    duration,
                    seed,
                    sample_rate,
                    csv,
                },
        } => cmd_oracle(cli, config, *tokens, *duration, *seed, *sample_rate, csv.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
