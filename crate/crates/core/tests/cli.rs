//! End-to-end runs of the command-line driver.

use std::process::Command;

fn driver() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iga-stokes"))
}

#[test]
fn writes_a_reproducible_csv_table() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = driver()
            .args(["--family", "TH,RT", "--degrees", "2,3", "--levels", "3", "--format", "csv", "--omit-timing"])
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read_to_string(out).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));

    let mut reader = csv::Reader::from_reader(first.as_bytes());
    let headers = reader.headers().unwrap().clone();
    for column in ["geometry", "family", "p", "level", "precond", "dofs", "iterations", "converged", "err_v", "err_p"] {
        assert!(headers.iter().any(|h| h == column), "missing column {column}");
    }
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    for row in &rows {
        assert_eq!(&row[col("converged")], "true");
        assert!(row[col("iterations")].parse::<usize>().unwrap() > 0);
        assert!(row[col("err_v")].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn markdown_output_goes_to_stdout() {
    let out = driver().args(["--geometry", "annulus", "--precond", "scms_mg_geo", "--levels", "2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains('|'));
}

#[test]
fn invalid_combinations_are_rejected() {
    let out = driver()
        .args(["--geometry", "annulus", "--transform", "piola", "--precond", "scms_mg_geo"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Piola"));

    let out = driver().args(["--degrees", "1"]).output().unwrap();
    assert!(!out.status.success());
}
