//! Black-box checks of the command-line binary: config-driven norm,
//! count, and search runs, the derivation printout, and report layout.

use std::process::Command;

use ulab::report::Report;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ulab"))
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn count_reproduces_the_square_phase_average() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        &dir,
        "count.json",
        r#"{
            "progression": {
                "primes": [5, 13],
                "dimension": 1,
                "vectors": [[1]],
                "polys": [[0, 0, 1]]
            },
            "functions": [
                {"kind": "character", "frequency": [-1]},
                {"kind": "character", "frequency": [1]}
            ]
        }"#,
    );
    let report_path = dir.path().join("report.json");
    let out = bin()
        .args(["count", "--config", &config, "--json", report_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Report =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.experiment, "count");
    for rec in &report.records {
        let expected = (rec.prime as f64).powf(-0.5);
        let lambda = rec.quantities["lambda_abs"];
        assert!(
            (lambda - expected).abs() < 1e-9,
            "p={}: |average| {lambda} != {expected}",
            rec.prime
        );
        // the gap against the structured count is reported in theorem mode
        assert!(rec.quantities.contains_key("gap"));
    }
}

#[test]
fn norm_reports_box_and_gowers_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        &dir,
        "norm.json",
        r#"{
            "progression": {
                "primes": [5],
                "dimension": 1,
                "vectors": [[1]],
                "polys": [[0, 0, 1]]
            },
            "functions": [{"kind": "constant", "re": 1.0}],
            "norm": {
                "directions": [[1], [2]],
                "gowers": {"direction": [1], "s": 2}
            }
        }"#,
    );
    let report_path = dir.path().join("report.json");
    let out = bin()
        .args(["norm", "--config", &config, "--json", report_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Report =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    // every norm of the constant-one function is exactly one
    let rec = &report.records[0];
    assert!((rec.quantities["box_norm"] - 1.0).abs() < 1e-12);
    assert!((rec.quantities["gowers_norm"] - 1.0).abs() < 1e-12);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("box_norm"), "{stdout}");
}

#[test]
fn search_counts_instances_inside_the_full_set() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        &dir,
        "search.json",
        r#"{
            "progression": {
                "primes": [3],
                "dimension": 1,
                "vectors": [[1]],
                "polys": [[0, 0, 1]]
            }
        }"#,
    );
    let set = write(&dir, "set.json", r#"{"density": 1.0, "seed": 7}"#);
    let report_path = dir.path().join("report.json");
    let out = bin()
        .args([
            "search",
            "--config",
            &config,
            "--set",
            &set,
            "--json",
            report_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Report =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let rec = &report.records[0];
    // full group: every (x, n != 0) pair is an instance
    assert_eq!(rec.quantities["set_size"], 3.0);
    assert_eq!(rec.quantities["instances"], 6.0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("instances 6"), "{stdout}");
}

#[test]
fn derivation_prints_the_trace_and_directions() {
    let out = bin().args(["pet", "derive"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("pivot trace: [1, 1, 1]"), "{stdout}");
    assert!(stdout.contains("direction count s = 7"), "{stdout}");
    assert!(stdout.contains("coefficient audit: pass"), "{stdout}");
    assert!(stdout.contains("[[0, 1], [-1, 1]]"), "{stdout}");
}

#[test]
fn explicit_point_sets_and_config_validation() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        &dir,
        "search.json",
        r#"{
            "progression": {
                "primes": [3],
                "dimension": 1,
                "vectors": [[1]],
                "polys": [[0, 0, 1]]
            }
        }"#,
    );
    // coordinates at or above p are a configuration error
    let bad_set = write(&dir, "bad_set.json", r#"{"points": [[0], [7]]}"#);
    let out = bin()
        .args(["search", "--config", &config, "--set", &bad_set])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));

    // unknown config keys are rejected
    let bad_config = write(
        &dir,
        "bad.json",
        r#"{"progression": {"primes": [3], "dimension": 1, "vectors": [[1]],
             "polys": [[0, 0, 1]], "surprise": true}}"#,
    );
    let set = write(&dir, "set.json", r#"{"points": [[0], [1]]}"#);
    let out = bin()
        .args(["search", "--config", &bad_config, "--set", &set])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // a recipe slot-count mismatch is rejected
    let mismatched = write(
        &dir,
        "mismatch.json",
        r#"{
            "progression": {
                "primes": [3],
                "dimension": 1,
                "vectors": [[1]],
                "polys": [[0, 0, 1]]
            },
            "functions": [{"kind": "constant"}]
        }"#,
    );
    let out = bin().args(["count", "--config", &mismatched]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
}
