use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use nhkr_expcli::*;

fn nhkr() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nhkr"));
    c.env("RUST_LOG", "warn");
    c
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("cfg.json");
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = r#"{
    "scenario": "fig1_cp",
    "params": {"K": 5.0, "lambda": 1.0, "t_max": 40},
    "t_samples": [1, 2, 5, 10, 20, 25, 30, 35, 40]
}"#;

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let st = nhkr()
            .args(["run", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(st.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(text.lines().count(), 1 + 5 * 9);
}

#[test]
fn csv_and_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json_str(SMALL).unwrap();
    let mut rows = run_scenario(&cfg).unwrap();
    for r in &mut rows {
        r.run = RunInfo::default();
    }
    for name in ["rows.csv", "rows.json"] {
        let path = dir.path().join(name);
        emit_results(&rows, Format::from_path(&path), &path).unwrap();
        assert_eq!(read_results(&path).unwrap(), rows, "{name}");
    }
    // t = 1 at λ = 0 has every prediction, t = 1 at λ = 1 lacks the asymptotic C_p parts.
    let text = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    assert!(text.lines().nth(10).unwrap().contains(",,"));
}

#[test]
fn empty_rows_give_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    emit_results(&[], Format::Csv, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    assert!(read_results(&path).unwrap().is_empty());
}

#[test]
fn hermitian_run_has_constant_otoc() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("h.json");
    let st = nhkr()
        .args(["run", "--scenario", "single_run", "--lambda", "0", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let rows = read_results(&out).unwrap();
    assert_eq!(rows.len(), 9);
    for r in rows {
        assert!((r.otoc.unwrap() / (16.0 * PI * PI) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn report_passes_on_fresh_run_and_fails_on_fault() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenario": "fig1_cf", "params": {"K": 5.0, "lambda": 1.0, "t_max": 1000}, "lambda_values": [1.0, 5.0]}"#,
    );
    let out = dir.path().join("cf.csv");
    assert!(nhkr()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let rep = nhkr().args(["report", "--in"]).arg(&out).output().unwrap();
    let table = String::from_utf8_lossy(&rep.stdout);
    assert_eq!(rep.status.code(), Some(0), "{table}");
    assert!(table.contains("cf_slope"));

    let mut rows = read_results(&out).unwrap();
    for r in rows.iter_mut().filter(|r| r.lambda == 1.0) {
        r.cf *= 1.1;
    }
    let bad = dir.path().join("bad.csv");
    emit_results(&rows, Format::Csv, &bad).unwrap();
    let rep = nhkr().args(["report", "--in"]).arg(&bad).output().unwrap();
    assert_eq!(rep.status.code(), Some(4));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"scenario": "lambda_sweep", "params": {"K": 5.0, "lambda": 1.0, "t_max": 10}}"#);
    assert_eq!(nhkr().args(["run", "--config"]).arg(&bad).status().unwrap().code(), Some(2));

    let coarse = write_config(
        dir.path(),
        r#"{"scenario": "single_run", "params": {"K": 5.0, "lambda": 1.0, "t_max": 1000, "n_theta": 64}}"#,
    );
    let o = nhkr().args(["run", "--config"]).arg(&coarse).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("4096"));

    assert_eq!(
        nhkr().args(["run", "--config", "/nonexistent/cfg.json"]).status().unwrap().code(),
        Some(1)
    );
    let st = nhkr().args(["selftest", "--cases", "5"]).output().unwrap().status;
    assert_eq!(st.code(), Some(0));
}
