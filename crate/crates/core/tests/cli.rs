use std::path::Path;
use std::process::Command;

use dcf_sim::output::csv_header;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dcf-sim"))
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), csv_header());
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn config_file_run_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        r#"
[[run]]
config = "HIDDEN"
name = "hidden_short"
positions = [5.0, 30.0]
seeds = [1, 2]
duration_s = 20.0

[[run]]
config = "NO_INT"
positions = [10.0]
duration_s = 20.0
beacons = false
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--parallel",
            "2",
        ])
        .output()
        .unwrap()
        .status;
    assert!(status.success());

    let hidden = rows(&out.join("hidden_short.csv"));
    assert_eq!(hidden.len(), 4);
    let keys: Vec<(&str, &str)> = hidden.iter().map(|r| (&r[2], &r[3])).collect();
    assert_eq!(keys, [("5", "1"), ("5", "2"), ("30", "1"), ("30", "2")]);
    assert!(hidden.iter().all(|r| &r[0] == "HIDDEN" && &r[1] == "hidden_short"));
    assert_eq!(rows(&out.join("no_int.csv")).len(), 1);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["parallelism"], 2);
}

#[test]
fn flags_override_every_run() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["--out", dir.path().to_str().unwrap()])
        .args(["--duration-s", "10", "--positions", "3,40", "--seed", "9"])
        .args(["--error-model", "analytic", "--parallel", "1"])
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    for name in ["no_int", "visible", "hidden"] {
        let r = rows(&dir.path().join(format!("{name}.csv")));
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|x| &x[3] == "9"));
    }
}

#[test]
fn bad_config_reports_line_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[[run]]\nconfig = \"NO_INT\"\nwarp_factor = 9\n").unwrap();
    let out = bin().args(["--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warp_factor"), "{err}");
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn bad_positions_exit_2() {
    let out = bin().args(["--positions", "5..abc"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
