use binmodel::batch::{run_batch, with_threads, ExperimentRun};
use binmodel::config::{ConditionConfig, ParamSet, ParamsSource};
use binmodel::data::DigitizedDatum;
use binmodel::report::{build_report, write_report};
use binmodel_core::{ExperimentDef, ExperimentId, Ordinate, PeripheryFilter, ThresholdVariable};
use std::path::Path;

fn runs(ids: &[ExperimentId], threads: usize) -> Vec<ExperimentRun> {
    let jobs: Vec<_> = ids
        .iter()
        .map(|&id| {
            let d = ExperimentDef::builtin(id);
            let p = d.table1_params;
            (d, p)
        })
        .collect();
    with_threads(Some(threads), || run_batch(&jobs, &PeripheryFilter::default())).unwrap()
}

fn as_data(runs: &[ExperimentRun]) -> Vec<DigitizedDatum> {
    runs.iter()
        .flat_map(|r| {
            r.points.iter().map(move |p| DigitizedDatum {
                experiment: r.def.id,
                condition: p.condition.clone(),
                x: p.sweep_value,
                y: p.outcome.as_ref().unwrap().threshold,
                units: r.def.ordinate.units().to_string(),
            })
        })
        .collect()
}

#[test]
fn batch_output_is_independent_of_thread_count() {
    let ids = [ExperimentId::Pt1959, ExperimentId::Lj1964, ExperimentId::Vpk1999];
    assert_eq!(runs(&ids, 1), runs(&ids, 3));
    assert!(with_threads(Some(0), || ()).is_err());
}

#[test]
fn model_as_data_gives_unit_r_squared() {
    let filter = PeripheryFilter::default();
    let r = runs(&[ExperimentId::Pt1959, ExperimentId::Rj1963, ExperimentId::Rab1966], 2);
    let report = build_report(&r, &as_data(&r), &filter).unwrap();
    for e in &report.experiments {
        assert!((e.r_squared.unwrap() - 1.0).abs() < 1e-12, "{}", e.id);
    }
    // the Δρ experiment is left out of the pooled SNR scatter
    assert_eq!(report.pooled_points, 42 + 19);
    assert!((report.pooled_r_squared.unwrap() - 1.0).abs() < 1e-12);
    assert!(report.notices.is_empty());
}

#[test]
fn missing_data_omits_r_squared_with_notice() {
    let filter = PeripheryFilter::default();
    let r = runs(&[ExperimentId::Rj1963, ExperimentId::Bt2014], 2);
    let data: Vec<_> = as_data(&r)
        .into_iter()
        .filter(|d| d.experiment == ExperimentId::Rj1963)
        .collect();
    let report = build_report(&r, &data, &filter).unwrap();
    assert!(report.experiments[0].r_squared.is_some());
    assert!(report.experiments[1].r_squared.is_none());
    assert_eq!(report.notices.len(), 1);
    assert!(report.notices[0].contains("bt2014"));
}

#[test]
fn written_files_are_reproducible() {
    let filter = PeripheryFilter::default();
    let write = |threads| {
        let r = runs(&[ExperimentId::Pt1959, ExperimentId::Vht1999], threads);
        let mut data = as_data(&r);
        data.truncate(9);
        let report = build_report(&r, &data, &filter).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_report(&report, dir.path()).unwrap();
        let names: Vec<String> = paths
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        let contents: Vec<String> = paths.iter().map(|p| std::fs::read_to_string(p).unwrap()).collect();
        (names, contents)
    };
    let (names, a) = write(1);
    let (_, b) = write(4);
    assert_eq!(names, ["pt1959.csv", "vht1999.csv", "summary.csv", "scatter.csv"]);
    assert_eq!(a, b);
    assert!(a[0].starts_with("experiment,condition,x,y_model,y_data\npt1959,dprime1,0,"));
    assert!(a[2].starts_with("experiment,r_squared,n_points\npt1959,1.00000,9\nvht1999,,0\npooled,,0\n"));
    assert!(a[3].lines().nth(1).unwrap().ends_with(",delta_rho"));
}

#[test]
fn condition_files() {
    let label = Path::new("cond.json");
    let family = ConditionConfig::parse(
        r#"{"family": "robinson", "sweep_value": 1.0, "tone_ipd_rad": 0}"#,
        label,
    )
    .unwrap();
    let c = family.condition().unwrap();
    assert_eq!(c.target.tone_ipd, Some(0.0));
    assert_eq!(c.variable, ThresholdVariable::SnrDb);

    let stim = ConditionConfig::parse(
        r#"{"noise_phase": {"type": "waveform_itd", "value": 0.0023}, "bandwidth_hz": 900, "snr_db": -10}"#,
        label,
    )
    .unwrap();
    let spec = stim.stimulus().unwrap();
    assert_eq!(spec.tone_ipd, None);
    assert!(stim.condition().is_err());
    assert_eq!(stim.family().unwrap(), None);

    let with_tone = ConditionConfig::parse(
        r#"{"bandwidth_hz": 900, "tone_ipd_rad": 3.14159, "snr_db": -20}"#,
        label,
    )
    .unwrap();
    assert!((with_tone.stimulus().unwrap().snr - 0.01).abs() < 1e-12);

    for bad in [
        r#"{"family": "nope", "sweep_value": 0}"#,
        r#"{"bandwidth_hz": 900, "colour": 1}"#,
        r#"{"family": "robinson"}"#,
        r#"not json"#,
    ] {
        let err = ConditionConfig::parse(bad, label).and_then(|c| c.condition().map(|_| ()));
        assert!(err.unwrap_err().is_validation(), "{bad}");
    }
}

#[test]
fn parameter_sources() {
    let src: ParamsSource = "global".parse().unwrap();
    let set = src.load().unwrap();
    assert_eq!(set.for_experiment(ExperimentId::Pt1959).sigma_mon(), None);
    assert_eq!(set.for_experiment(ExperimentId::Rj1963).sigma_mon(), Some(0.74));
    let row = "langford".parse::<ParamsSource>().unwrap().load().unwrap();
    assert_eq!(row, ParamSet::Fixed(ExperimentId::Lj1964.table1_params()));
    assert!(ParamSet::Table1.for_family(None).is_err());
    assert!("tabel1".parse::<ParamsSource>().is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(
        &path,
        r#"{"experiment": "x", "rho_hat": 0.9, "sigma_bin": 0.3, "sigma_mon": null, "r_squared": 1}"#,
    )
    .unwrap();
    let set = ParamsSource::File(path.clone()).load().unwrap();
    assert_eq!(set.for_experiment(ExperimentId::Rj1963).sigma_mon(), None);
    std::fs::write(&path, r#"{"rho_hat": 1.5, "sigma_bin": 0.3}"#).unwrap();
    assert!(ParamsSource::File(path).load().unwrap_err().is_validation());
    assert_eq!(
        ExperimentDef::builtin(ExperimentId::Pt1959).ordinate,
        Ordinate::DeltaRho
    );
}
