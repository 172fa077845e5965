use std::io::Cursor;
use std::path::Path;

use binmodel::data::{ingest_data, ingest_reader, load_data_dir};
use binmodel::Error;
use binmodel_core::ExperimentId;

fn parse(text: &str) -> binmodel::Result<Vec<binmodel::data::DigitizedDatum>> {
    ingest_reader(Cursor::new(text.to_string()), Path::new("inline.csv"))
}

#[test]
fn header_only_is_empty() {
    assert!(parse("experiment,condition,x,y,units\n").unwrap().is_empty());
}

#[test]
fn rows_are_typed() {
    let rows = parse(
        "experiment,condition,x,y,units\n\
         rj1963,Spi,1,-24.5,db\n\
         robinson, S0 ,-0.5,-14,dB\n\
         pt1959,dprime1,0.2,0.21,delta_rho\n",
    )
    .unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].experiment, ExperimentId::Rj1963);
    assert_eq!(rows[1].experiment, ExperimentId::Rj1963);
    assert_eq!(rows[1].condition, "S0");
    assert_eq!(rows[1].units, "db");
    assert_eq!(rows[2].y, 0.21);
}

fn row_of(err: Error) -> u64 {
    match err {
        Error::Data { row, .. } => row,
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unknown_experiment_names_its_row() {
    let err = parse("experiment,condition,x,y,units\nrj1963,Spi,1,-24,db\nfoo1999,Spi,1,-24,db\n").unwrap_err();
    assert!(err.to_string().contains("foo1999"));
    assert_eq!(row_of(err), 3);
}

#[test]
fn unit_mismatch_is_rejected() {
    let err = parse("experiment,condition,x,y,units\npt1959,dprime1,0.2,0.2,db\n").unwrap_err();
    assert!(err.to_string().contains("delta_rho"));
    assert_eq!(row_of(err), 2);
}

#[test]
fn malformed_rows_are_rejected() {
    for (body, row) in [
        ("rj1963,Spi,abc,-24,db\n", 2),
        ("rj1963,Spi,1,NaN,db\n", 2),
        ("rj1963,Spi,1\n", 2),
        ("rj1963,Sx,1,-24,db\n", 2),
        ("rj1963,Spi,1,-24,db\nrj1963,Spi,2,-24,db\n", 3),
    ] {
        let err = parse(&format!("experiment,condition,x,y,units\n{body}")).unwrap_err();
        assert!(err.is_validation());
        assert_eq!(row_of(err), row, "{body}");
    }
    assert_eq!(row_of(parse("exp,cond,x,y,units\n").unwrap_err()), 1);
}

#[test]
fn directory_loading() {
    let dir = tempfile::tempdir().unwrap();
    assert!(load_data_dir(&dir.path().join("missing")).unwrap().is_empty());
    std::fs::write(
        dir.path().join("b.csv"),
        "experiment,condition,x,y,units\nlj1964,S0,1,-12,db\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("a.csv"),
        "experiment,condition,x,y,units\nrab1966,Spi,2,-20,db\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let rows = load_data_dir(dir.path()).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.experiment).collect::<Vec<_>>(),
        [ExperimentId::Rab1966, ExperimentId::Lj1964]
    );
    assert!(matches!(
        ingest_data(&dir.path().join("none.csv")),
        Err(Error::Io { .. })
    ));
}
