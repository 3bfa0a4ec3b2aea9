//! End-to-end checks of the command-line surface: flag handling, exit
//! codes, file outputs, and machine formats.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rainbowdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rainbowdp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn build_demo(dir: &Path) {
    let out = rainbowdp(&[
        "build",
        "--n-bits",
        "14",
        "--k-bits",
        "5",
        "--c",
        "1.8",
        "--tables",
        "2",
        "--m0",
        "1024",
        "--fn",
        "prf-test",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn conflicting_flag_combinations_are_usage_errors() {
    // --t with --dpc needs --n-bits for absolute quantities
    let out = rainbowdp(&["theory", "--dpc", "3", "--c", "2.04", "--l", "2", "--t", "512"]);
    assert_eq!(out.status.code(), Some(1));
    // --paper-config rejects explicit space flags
    let out = rainbowdp(&["experiment", "--paper-config", "--n-bits", "20"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn build_then_search_finds_in_matrix_target() {
    let dir = tempdir();
    build_demo(&dir);
    assert!(dir.join("table_000.rdpt").exists());
    assert!(dir.join("table_001.rdpt").exists());
    assert!(dir.join("build_summary.json").exists());

    // generated targets are images of uniform points; most are findable
    let out = rainbowdp(&[
        "search",
        "--tables",
        dir.to_str().unwrap(),
        "--target-count",
        "20",
        "--target-seed",
        "7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("-> preimage"), "{text}");
    assert!(text.contains("success"), "{text}");
}

#[test]
fn search_single_hex_target_and_csv() {
    let dir = tempdir();
    build_demo(&dir);
    let out = rainbowdp(&[
        "search",
        "--tables",
        dir.to_str().unwrap(),
        "--target",
        "02a7",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("target,found,preimage,invocations,alarms,false_alarms\n"));
    assert!(text.lines().nth(1).unwrap().starts_with("02a7,"));
}

#[test]
fn invalid_k_bits_is_usage_error_and_writes_nothing() {
    let dir = tempdir();
    let sub = dir.join("tables");
    let out = rainbowdp(&[
        "build",
        "--n-bits",
        "12",
        "--k-bits",
        "12",
        "--c",
        "1.8",
        "--tables",
        "1",
        "--m0",
        "64",
        "--out",
        sub.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!sub.exists(), "no files may be written on usage errors");
}

#[test]
fn corrupt_table_is_data_error() {
    let dir = tempdir();
    build_demo(&dir);
    let path = dir.join("table_000.rdpt");
    let mut bytes = fs::read(&path).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    fs::write(&path, bytes).unwrap();
    let out = rainbowdp(&[
        "search",
        "--tables",
        dir.to_str().unwrap(),
        "--target",
        "0001",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));
}

#[test]
fn missing_table_dir_is_data_error() {
    let out = rainbowdp(&[
        "search",
        "--tables",
        "/nonexistent-rdpt",
        "--target",
        "0001",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn theory_json_has_reference_values() {
    let out = rainbowdp(&[
        "theory", "--n-bits", "24", "--t", "512", "--c", "1.8", "--m0", "262144", "--tables", "1",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p = doc["success_p"].as_f64().unwrap();
    assert!((p - 0.874).abs() < 0.001, "{p}");
    let t = doc["expected_online_time"].as_f64().unwrap();
    assert!((t - 394_023.0).abs() / 394_023.0 < 0.01, "{t}");
}

#[test]
fn optimize_json_reproduces_published_row() {
    let out = rainbowdp(&["optimize", "--dpc", "3", "--p", "0.8", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let result = &doc["report"]["result"];
    assert_eq!(result["l"].as_u64(), Some(2));
    let c = result["c"].as_f64().unwrap();
    assert!((c - 2.04).abs() <= 0.03, "{c}");
    let d = result["d_tcr"].as_f64().unwrap();
    assert!((d - 24.9292).abs() / 24.9292 <= 0.02, "{d}");
}

#[test]
fn experiment_writes_report_and_csv() {
    let dir = tempdir();
    let out = rainbowdp(&[
        "experiment",
        "--n-bits",
        "14",
        "--k-bits",
        "5",
        "--c",
        "1.8",
        "--tables",
        "1",
        "--m0",
        "4096",
        "--fn",
        "prf-test",
        "--targets",
        "50",
        "--out",
        dir.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"].as_u64(), Some(1));
    assert!(report["measured"]["success_rate"].as_f64().unwrap() > 0.5);
    let csv = fs::read_to_string(dir.join("per_target.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
    assert!(csv.starts_with("target,found,invocations,alarms,false_alarms,iteration_found"));
    // stdout json matches the written report minus per-target rows
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["measured"], report["measured"]);
}

#[test]
fn compare_runs_default_preset() {
    let out = rainbowdp(&[
        "compare",
        "--methods",
        "rainbow-dp,rainbow",
        "--n-bits",
        "16",
        "--k-bits",
        "5",
        "--targets",
        "60",
        "--format",
        "json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["method"], "rainbow-dp");
    assert_eq!(rows[1]["method"], "rainbow");
    assert_eq!(doc["reference"].as_array().unwrap().len(), 8);
}

#[test]
fn workers_flag_does_not_change_results() {
    let dir = tempdir();
    build_demo(&dir);
    let run = |workers: &str| {
        let out = rainbowdp(&[
            "search",
            "--tables",
            dir.to_str().unwrap(),
            "--target-count",
            "30",
            "--format",
            "csv",
            "--workers",
            workers,
        ]);
        assert!(out.status.success());
        stdout(&out)
    };
    assert_eq!(run("1"), run("2"));
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "rainbowdp-cli-test-{}-{:x}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}
