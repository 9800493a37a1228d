//! CLI acceptance: byte-determinism of every subcommand (criterion 10)
//! plus the documented exit-code and schema contracts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn qkdrb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkdrb"))
        .args(args)
        .current_dir(dir)
        .env_remove("QKDRB_CONFIG")
        .output()
        .expect("binary runs")
}

fn assert_success(output: &Output, context: &str) {
    assert!(
        output.status.success(),
        "{context} failed: {}\n{}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
}

/// Config with a short period so simulate runs are quick; the analytic
/// switched rate only depends on the R/T ratio, kept at the reference 1/36.
fn fast_config(dir: &Path) -> String {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{
  "switched": { "reconfig_time_s": 3.0, "period_s": 108.0 },
  "sim": { "block_bits": 8192, "seed": 11 }
}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn a10_subcommands_are_byte_deterministic() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let config = fast_config(dir);

    let runs: Vec<(&str, Vec<String>)> = vec![
        (
            "skr-curve",
            vec![
                "skr-curve".into(),
                "--from-db".into(),
                "0".into(),
                "--to-db".into(),
                "30".into(),
                "--step-db".into(),
                "0.5".into(),
                "--out".into(),
                "curve.csv".into(),
            ],
        ),
        (
            "compare-grid",
            vec![
                "compare-grid".into(),
                "--nodes".into(),
                "5,9,13".into(),
                "--le".into(),
                "1,5,10,20".into(),
                "--out".into(),
                "grid.csv".into(),
                "--svg".into(),
                "grid.svg".into(),
            ],
        ),
        (
            "simulate",
            vec![
                "--config".into(),
                config.clone(),
                "simulate".into(),
                "--arch".into(),
                "switched".into(),
                "--nodes".into(),
                "5".into(),
                "--le".into(),
                "10".into(),
                "--demand-factor".into(),
                "0.9".into(),
                "--out".into(),
                "report.json".into(),
            ],
        ),
    ];

    for (name, args) in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = qkdrb(dir, &args);
        assert_success(&first, name);
        let mut snapshots = Vec::new();
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_file() {
                snapshots.push((path.clone(), fs::read(&path).unwrap()));
            }
        }
        let second = qkdrb(dir, &args);
        assert_success(&second, name);
        assert_eq!(first.stdout, second.stdout, "{name}: stdout differs between runs");
        for (path, bytes) in &snapshots {
            let rerun = fs::read(path).unwrap();
            assert_eq!(&rerun, bytes, "{name}: {} differs between runs", path.display());
        }
    }

    // schedule show writes to stdout only.
    let args = ["schedule", "show", "--nodes", "9", "--le", "10"];
    let first = qkdrb(dir, &args);
    let second = qkdrb(dir, &args);
    assert_success(&first, "schedule show");
    assert_eq!(first.stdout, second.stdout);

    eprintln!(
        "[acceptance] criterion 10 (CLI byte determinism): PASS ({:.2} s)",
        started.elapsed().as_secs_f64()
    );
}

#[test]
fn skr_curve_rows_and_flat_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let out = qkdrb(
        dir,
        &["skr-curve", "--from-db", "0", "--to-db", "30", "--step-db", "0.5", "--out", "c.csv"],
    );
    assert_success(&out, "skr-curve");
    let text = fs::read_to_string(dir.join("c.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "attenuation_db,skr_bps");
    assert_eq!(lines.len(), 62, "61 samples plus header");
    // Flat region: samples at 0 .. 6 dB (13 rows) carry one rate value.
    let rate = |line: &str| line.split(',').nth(1).unwrap().to_string();
    let flat = rate(lines[1]);
    for line in &lines[1..=13] {
        assert_eq!(rate(line), flat, "{line}");
    }
    assert_ne!(rate(lines[14]), flat);
}

#[test]
fn skr_curve_rejects_zero_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = qkdrb(
        dir.path(),
        &["skr-curve", "--from-db", "0", "--to-db", "10", "--step-db", "0", "--out", "c.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn skr_curve_reproduces_table_knots() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    fs::write(dir.join("table.csv"), "attenuation_db,skr_bps\n0,100\n10,10\n").unwrap();
    fs::write(
        dir.join("config.json"),
        r#"{ "model": { "kind": "table", "table_csv": "table.csv",
             "tx_power_dbm": 0.0, "max_rx_power_dbm": 0.0 } }"#,
    )
    .unwrap();
    let out = qkdrb(
        dir,
        &[
            "--config",
            "config.json",
            "skr-curve",
            "--from-db",
            "0",
            "--to-db",
            "10",
            "--step-db",
            "5",
            "--out",
            "c.csv",
        ],
    );
    assert_success(&out, "table skr-curve");
    let text = fs::read_to_string(dir.join("c.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "0,100");
    assert_eq!(lines[3], "10,10");
}

#[test]
fn compare_grid_rejects_even_nodes_listing_them() {
    let dir = tempfile::tempdir().unwrap();
    let out = qkdrb(
        dir.path(),
        &["compare-grid", "--nodes", "5,8,12", "--le", "1", "--out", "g.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains('8') && stderr.contains("12"), "{stderr}");
}

#[test]
fn compare_grid_header_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let out = qkdrb(dir, &["compare-grid", "--nodes", "5", "--le", "1,10", "--out", "g.csv"]);
    assert_success(&out, "compare-grid");
    let text = fs::read_to_string(dir.join("g.csv")).unwrap();
    assert!(text.starts_with("N,Le_km,C_R_bps,C_S_bps,f_percent,tag\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn schedule_show_phase_counts_and_durations() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();

    let out = qkdrb(dir, &["schedule", "show", "--nodes", "3", "--le", "5"]);
    assert_success(&out, "schedule show N=3");
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2, "header plus one phase:\n{text}");
    assert_eq!(text.lines().next().unwrap(), "k,chord_km,attenuation_db,rate_bps,duration_s");

    // Reference ring with links long enough that later chords leave the
    // flat region: durations grow with hop distance.
    let out = qkdrb(dir, &["schedule", "show", "--nodes", "25", "--le", "15"]);
    assert_success(&out, "schedule show N=25");
    let text = String::from_utf8(out.stdout).unwrap();
    let durations: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|line| line.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(durations.len(), 12);
    for pair in durations.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-9, "durations not ascending: {durations:?}");
    }
    assert!(durations[11] > durations[0]);
}

#[test]
fn schedule_show_reports_infeasible_overhead() {
    let dir = tempfile::tempdir().unwrap();
    let out = qkdrb(
        dir.path(),
        &["schedule", "show", "--nodes", "25", "--le", "5", "--reconfig", "20min"],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("infeasible schedule"), "{stderr}");
    assert!(stderr.contains("14400"), "overhead missing from: {stderr}");
}

#[test]
fn simulate_exit_codes_follow_starvation() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let config = fast_config(dir);

    // Relayed at 90% of capacity: clean exit, report files written.
    let out = qkdrb(
        dir,
        &[
            "--config",
            &config,
            "simulate",
            "--arch",
            "relayed",
            "--nodes",
            "5",
            "--le",
            "10",
            "--demand-factor",
            "0.9",
            "--out",
            "relayed.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("relayed.json")).unwrap()).unwrap();
    assert_eq!(report["architecture"], "relayed");
    assert_eq!(report["total_starvation_events"], 0);
    assert_eq!(report["relay_symmetry_ok"], true);
    let csv = fs::read_to_string(dir.join("relayed.csv")).unwrap();
    assert!(csv.starts_with("pair,delivered_bps,min_pool_bits,starved\n"));
    assert_eq!(csv.lines().count(), 11, "10 pairs plus header");

    // Switched at 105%: starvation, exit code 2.
    let out = qkdrb(
        dir,
        &[
            "--config",
            &config,
            "simulate",
            "--arch",
            "switched",
            "--nodes",
            "9",
            "--le",
            "10",
            "--demand-factor",
            "1.05",
            "--out",
            "switched.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("switched.json")).unwrap()).unwrap();
    assert!(report["total_starvation_events"].as_u64().unwrap() > 0);
    assert_eq!(report["relay_symmetry_ok"], serde_json::Value::Null);
}

#[test]
fn config_env_fallback_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    fs::write(
        dir.join("env-config.json"),
        // An obviously different model: table with a single steep segment.
        r#"{ "model": { "kind": "table", "table_csv": "t.csv",
             "tx_power_dbm": 0.0, "max_rx_power_dbm": 0.0 } }"#,
    )
    .unwrap();
    fs::write(dir.join("t.csv"), "attenuation_db,skr_bps\n0,1000\n20,10\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qkdrb"))
        .args(["skr-curve", "--from-db", "0", "--to-db", "0", "--step-db", "1", "--out", "c.csv"])
        .current_dir(dir)
        .env("QKDRB_CONFIG", dir.join("env-config.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.join("c.csv")).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "0,1000");
}
