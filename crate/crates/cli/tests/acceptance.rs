//! Acceptance: byte-identical reports for identical configurations.

use std::path::Path;
use std::process::Command;

fn run(dir: &Path, config: &str) {
    let out = Command::new(env!("CARGO_BIN_EXE_specbound"))
        .current_dir(dir)
        .args(["run", "--config", config])
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn criterion_8_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("config.json"),
        r#"{
            "domains": [
                {"box": [4, 3]},
                {"lshape": 2},
                {"random": {"n": 3, "size": 18, "seed": 7}}
            ],
            "potential": {"uniform": 2.0},
            "density": {"uniform": [0.5, 2.0]},
            "k_range": "all",
            "tolerances": {"identity_tol": 1e-9, "slack_tol": 1e-9},
            "output": {"path": "report.csv", "format": "csv"},
            "seed": 42
        }"#,
    )
    .unwrap();
    std::fs::write(
        dir.path().join("config_json.json"),
        r#"{
            "domains": [
                {"box": [4, 3]},
                {"random": {"n": 2, "size": 20, "seed": 8}}
            ],
            "potential": {"uniform": 1.0},
            "density": {"uniform": [0.5, 2.0]},
            "output": {"path": "report.json", "format": "json"},
            "seed": 43
        }"#,
    )
    .unwrap();

    run(dir.path(), "config.json");
    let csv_first = std::fs::read(dir.path().join("report.csv")).unwrap();
    run(dir.path(), "config.json");
    let csv_second = std::fs::read(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv_first, csv_second, "CSV reports differ between runs");

    run(dir.path(), "config_json.json");
    let json_first = std::fs::read(dir.path().join("report.json")).unwrap();
    run(dir.path(), "config_json.json");
    let json_second = std::fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(json_first, json_second, "JSON reports differ between runs");

    println!("criterion 8: PASS — identical configs produce byte-identical CSV and JSON reports");
}
