//! End-to-end tests of the command-line surface.

use std::path::Path;
use std::process::{Command, Output};

use synrep::io::{read_replicates, write_replicates};
use synrep::types::{ReplicateRow, ReplicateSet, Variant};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synrep"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_sample_csv(dir: &Path) {
    let mut csv = String::from("weight,income\n");
    for i in 0..40 {
        csv.push_str(&format!("{},{}\n", 10.0 + (i % 7) as f64, 30.0 + i as f64));
    }
    std::fs::write(dir.join("sample.csv"), csv).unwrap();
}

#[test]
fn generate_produces_a_release_with_full_group_structure() {
    let dir = tempfile::tempdir().unwrap();
    write_sample_csv(dir.path());
    let out = run(
        &[
            "generate",
            "--input",
            "sample.csv",
            "--population-size",
            "1000",
            "--variant",
            "synrep-r",
            "-M",
            "5",
            "-R",
            "10",
            "--seed",
            "7",
            "--output",
            "release.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("M=5"), "{stdout}");
    assert!(stdout.contains("seed=7"), "{stdout}");

    let set = read_replicates(&dir.path().join("release.csv")).unwrap();
    assert_eq!(set.groups(), 5);
    assert_eq!(set.replicates(), 10);
    assert_eq!(set.rows().len(), 5 * 10 * 40);
    assert_eq!(set.columns(), &["income".to_string()]);

    // No confidential value leaks into the release.
    let confidential: Vec<f64> = (0..40).map(|i| 30.0 + i as f64).collect();
    assert!(set
        .rows()
        .iter()
        .all(|row| !confidential.contains(&row.values[0])));
}

#[test]
fn generate_rejects_inconsistent_variant_flags() {
    let dir = tempfile::tempdir().unwrap();
    write_sample_csv(dir.path());
    let out = run(
        &[
            "generate",
            "--input",
            "sample.csv",
            "--population-size",
            "1000",
            "--variant",
            "synrep-1",
            "-M",
            "5",
            "-R",
            "10",
            "--seed",
            "7",
            "--output",
            "release.csv",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error[E_ARGUMENT]"), "{stderr}");
    assert!(!dir.path().join("release.csv").exists());
}

#[test]
fn analyze_reproduces_the_worked_combining_example() {
    // Hand-built release whose per-group estimates are the worked example:
    // group means (1, 3), (2, 4), every sampling variance 0.1.
    let dir = tempfile::tempdir().unwrap();
    let population_size = 3_000_000;
    let fpc = 1.0 - 3.0 / population_size as f64;
    let spread = (0.3 / fpc).sqrt();
    let mut rows = Vec::new();
    for (m, r, center) in [
        (1, 1, 1.0),
        (1, 2, 3.0),
        (2, 1, 2.0),
        (2, 2, 4.0),
    ] {
        for offset in [-spread, 0.0, spread] {
            rows.push(ReplicateRow {
                m,
                r,
                values: vec![center + offset],
            });
        }
    }
    let set = ReplicateSet::new(
        Variant::SynRepR,
        2,
        2,
        3,
        population_size,
        vec!["y".into()],
        rows,
    )
    .unwrap();
    write_replicates(&set, &dir.path().join("release.csv")).unwrap();

    let out = run(
        &["analyze", "--input", "release.csv", "--output", "est.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let record: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(record["variant"], "synrep-r");
    assert_eq!(record["M"], 2);
    assert_eq!(record["R"], 2);
    assert!((record["point"].as_f64().unwrap() - 2.5).abs() < 1e-9);
    assert!((record["raw_variance"].as_f64().unwrap() + 0.35).abs() < 1e-6);
    assert_eq!(record["adjusted"], true);
    assert!((record["variance"].as_f64().unwrap() - 0.7).abs() < 1e-6);
    assert_eq!(record["df"], 1.0);
    // The adjustment warning lands on stderr.
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));

    // Analysis is a pure function of the file.
    let again = run(&["analyze", "--input", "release.csv"], dir.path());
    assert_eq!(out.stdout, again.stdout);

    let file: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("est.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(file, record);
}

#[test]
fn analyze_rejects_missing_column() {
    let dir = tempfile::tempdir().unwrap();
    write_sample_csv(dir.path());
    let out = run(
        &[
            "generate",
            "--input",
            "sample.csv",
            "--population-size",
            "1000",
            "--variant",
            "synrep-1",
            "-M",
            "3",
            "--seed",
            "9",
            "--output",
            "release.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let out = run(
        &[
            "analyze",
            "--input",
            "release.csv",
            "--column",
            "wages",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error[E_ARGUMENT]"), "{stderr}");
    assert!(stderr.contains("wages"), "{stderr}");
}

#[test]
fn simulate_runs_a_config_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
design = "srs"
seed = 5
runs = 6
sample_size = 40
settings = [{ m = 2, r = 3 }]
methods = ["pseudo-pop", "synrep-r", "synrep-1", "ht"]

[population]
size = 4000
"#;
    std::fs::write(dir.path().join("exp.toml"), config).unwrap();
    let out = run(
        &[
            "simulate",
            "--config",
            "exp.toml",
            "--output-dir",
            "out",
            "--dump-runs",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["report.json", "report.csv", "report.md", "runs.csv"] {
        assert!(dir.path().join("out").join(file).exists(), "{file} missing");
    }
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["completed_runs"], 6);
    // Coverage columns populated for the synthesis methods.
    let rows = report["rows"].as_array().unwrap();
    assert!(rows
        .iter()
        .any(|r| r["method"] == "synrep-r" && r["coverage"].is_number()));
    let runs_csv = std::fs::read_to_string(dir.path().join("out/runs.csv")).unwrap();
    // Header plus one line per run and method.
    assert_eq!(runs_csv.lines().count(), 1 + 6 * 4);
}

#[test]
fn simulate_reports_bad_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
design = "srs"
seed = 5
runs = 6
sample_size = 40
settings = [{ m = 2, r = 3 }]
turbo = true

[population]
size = 4000
"#;
    std::fs::write(dir.path().join("exp.toml"), config).unwrap();
    let out = run(
        &["simulate", "--config", "exp.toml", "--output-dir", "out"],
        dir.path(),
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error[E_CONFIG]"), "{stderr}");
    assert!(stderr.contains("turbo"), "{stderr}");
}

#[test]
fn validate_recognizes_every_artifact_kind() {
    let dir = tempfile::tempdir().unwrap();
    write_sample_csv(dir.path());

    let out = run(
        &[
            "validate",
            "sample.csv",
            "--population-size",
            "1000",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid sample"));

    let out = run(
        &[
            "generate",
            "--input",
            "sample.csv",
            "--population-size",
            "1000",
            "--variant",
            "synrep-r",
            "-M",
            "2",
            "-R",
            "2",
            "--seed",
            "3",
            "--output",
            "release.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let out = run(&["validate", "release.csv"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid replicates"));

    let config = r#"
design = "pps"
seed = 5
runs = 6
sample_size = 40
settings = [{ m = 2, r = 3 }]

[population]
size = 4000
"#;
    std::fs::write(dir.path().join("exp.toml"), config).unwrap();
    let out = run(&["validate", "exp.toml"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid config"));

    // A corrupted release fails validation with a structural error.
    let content = std::fs::read_to_string(dir.path().join("release.csv")).unwrap();
    let mut lines: Vec<&str> = content.lines().collect();
    lines.remove(3);
    std::fs::write(dir.path().join("broken.csv"), lines.join("\n")).unwrap();
    let out = run(&["validate", "broken.csv"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[E_STRUCTURE]"));
}
