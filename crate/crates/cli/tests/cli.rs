use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_passloc");

fn passloc(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .env_remove("PASSLOC_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn reference_config() -> String {
    format!(
        "{}/../../configs/reference.toml",
        env!("CARGO_MANIFEST_DIR")
    )
}

#[test]
fn noiseless_locate_recovers_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let out = passloc(&["locate", "--noiseless"], tmp.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("locate.json")).unwrap()).unwrap();
    assert!(json["error_m"].as_f64().unwrap() < 1e-9);
    assert!((json["estimate"]["x"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!((json["estimate"]["y"].as_f64().unwrap() - 5.0).abs() < 1e-9);
    assert!(String::from_utf8_lossy(&out.stdout).contains("estimate x ="));
}

#[test]
fn heatmap_csv_has_one_row_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let out = passloc(
        &["heatmap", "--grid", "4,7", "--trials-per-cell", "3"],
        tmp.path(),
    );
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(tmp.path().join("heatmap.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["x_m", "y_m", "mean_error_m", "normalized_error"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 28);
    for r in &rows {
        let norm: f64 = r[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&norm));
    }
}

#[test]
fn montecarlo_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["montecarlo", "--trials", "200", "--seed", "9"];
    assert!(passloc(&args, &a).status.success());
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "3"]);
    assert!(passloc(&threaded, &b).status.success());
    assert_eq!(
        std::fs::read(a.join("montecarlo.csv")).unwrap(),
        std::fs::read(b.join("montecarlo.csv")).unwrap()
    );
}

#[test]
fn different_seeds_give_different_results() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(
        passloc(&["montecarlo", "--trials", "20", "--seed", "1"], &a)
            .status
            .success()
    );
    assert!(
        passloc(&["montecarlo", "--trials", "20", "--seed", "2"], &b)
            .status
            .success()
    );
    assert_ne!(
        std::fs::read(a.join("montecarlo.csv")).unwrap(),
        std::fs::read(b.join("montecarlo.csv")).unwrap()
    );
}

#[test]
fn invalid_config_exits_nonzero_with_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[room]\nd1 = 6.0\nd2 = -1.0\nh = 3.0\n").unwrap();
    let out = passloc(&["locate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("room.d2"), "{err}");

    std::fs::write(&cfg, "[room]\nwidth = 6.0\n").unwrap();
    let out = passloc(&["locate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(!out.status.success());
}

#[test]
fn output_dir_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .args(["locate", "--noiseless"])
        .env("PASSLOC_OUTPUT_DIR", tmp.path())
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("locate.json").exists());
    assert!(tmp.path().join("run_manifest.json").exists());
}

#[test]
fn sweep_csv_round_trips_and_manifest_records_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = passloc(
        &[
            "sweep",
            "--config",
            &reference_config(),
            "--sweep-trials",
            "10",
            "--noise-levels",
            "-130,-40",
            "--pa-counts",
            "2,4",
        ],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut rdr = csv::Reader::from_path(tmp.path().join("sweep.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let mean: f64 = r[3].parse().unwrap();
        // values are written with enough digits to reproduce the f64 exactly
        assert_eq!(format!("{mean:.16e}"), &r[3]);
        assert!(mean >= 0.0);
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("run_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "sweep");
    assert_eq!(manifest["master_seed"], 0);
    assert!(manifest["config_toml"]
        .as_str()
        .unwrap()
        .contains("sweep_trials = 10"));
}

#[test]
fn json_format_is_supported() {
    let tmp = tempfile::tempdir().unwrap();
    let out = passloc(
        &["montecarlo", "--trials", "5", "--format", "json"],
        tmp.path(),
    );
    assert!(out.status.success());
    let rows: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("montecarlo.json")).unwrap())
            .unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);
}
