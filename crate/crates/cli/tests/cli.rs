use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_pvnash");

fn reference_config(dir: &Path) -> PathBuf {
    let path = dir.join("params.json");
    std::fs::write(
        &path,
        r#"{"k":1,"mu":1,"sigma":1,"beta":0.5,"rho":1,"c":1,"theta":1}"#,
    )
    .unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn pvnash")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn psi_explicit_flags_match_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let a = run(&["psi", "--x", "0.3", "--order", "2", "--json", "--config", cfg.to_str().unwrap()]);
    let b = run(&[
        "psi", "--x", "0.3", "--order", "2", "--json", "--k", "1", "--mu", "1", "--sigma", "1", "--rho", "1",
    ]);
    assert!(a.status.success() && b.status.success());
    let va: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let vb: serde_json::Value = serde_json::from_str(&stdout(&b)).unwrap();
    assert_eq!(va["value"], vb["value"]);
    assert!(va["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn missing_config_is_usage_error() {
    let o = run(&["boundary", "solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn invalid_parameters_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"k":1,"mu":1,"sigma":-1,"beta":0.5,"rho":1,"c":1,"theta":1}"#).unwrap();
    let o = run(&["static-game", "--config", cfg.to_str().unwrap(), "--x", "1", "--y1", "0", "--y2", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn state_outside_simplex_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let o = run(&["static-game", "--config", cfg.to_str().unwrap(), "--x", "1", "--y1", "0.7", "--y2", "0.6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_deviation_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let o = run(&[
        "nash-check", "--config", cfg.to_str().unwrap(), "--x0", "1", "--y1", "0.1", "--y2", "0.1",
        "--paths", "10", "--deviation", "jump:1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn static_game_reports_joint_waiting() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let o = run(&[
        "static-game", "--config", cfg.to_str().unwrap(), "--x", "0.8", "--y1", "0.1", "--y2", "0.2", "--json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["region"], "W1W2");
    assert_eq!(v["i1"].as_f64(), Some(0.0));
    // y1 (x + k mu / rho - k beta (y1 + y2) / rho) / (rho + k).
    assert!((v["v1"].as_f64().unwrap() - 0.0825).abs() < 1e-12);
}

#[test]
fn boundary_csv_layout_and_anchors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let out = dir.path().join("b.csv");
    let o = run(&["boundary", "solve", "--config", cfg.to_str().unwrap(), "--n", "100", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# pvnash "));
    assert_eq!(lines.next().unwrap(), "s,F,Ftilde");
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 101);
    let last = rows.last().unwrap();
    assert!((last[1].parse::<f64>().unwrap() - 1.5).abs() < 1e-9);
    assert!((last[2].parse::<f64>().unwrap() - 2.0).abs() < 1e-9);
    let s: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(s.windows(2).all(|w| w[0] < w[1]));
    assert!(dir.path().join("b_side.csv").exists());
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let mut files = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("p{k}.csv"));
        let o = run(&[
            "simulate", "--config", cfg, "--m-n", "20", "--n", "50", "--x0", "0.8", "--y1", "0.1", "--y2",
            "0.2", "--dt", "0.01", "--paths", "64", "--seed", "7", "--antithetic", "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        files.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(data_rows(&dir.path().join("p0.csv")).len(), 64);
}

#[test]
fn m_grid_and_value_grid_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let m = dir.path().join("m.csv");
    let o = run(&["boundary", "m", "--config", cfg, "--n", "50", "--m-n", "10", "--out", m.to_str().unwrap()]);
    assert!(o.status.success());
    // Triangular grid with 2n steps per side.
    assert_eq!(data_rows(&m).len(), 21 * 22 / 2);
    let v = dir.path().join("v.csv");
    let o = run(&[
        "value", "grid", "--config", cfg, "--n", "50", "--m-n", "10", "--nx", "4", "--ny", "2", "--out",
        v.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(data_rows(&v).len(), 5 * 6);
}

#[test]
fn value_check_json_has_region_stats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let o = run(&[
        "value", "check", "--config", cfg.to_str().unwrap(), "--n", "50", "--m-n", "10", "--nx", "4",
        "--ny", "4", "--json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["regions"].as_array().unwrap().len(), 4);
    assert!(v["node_smooth_fit_own"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn nash_check_saturated_state_has_no_gain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let o = run(&[
        "nash-check", "--config", cfg.to_str().unwrap(), "--n", "50", "--m-n", "10", "--x0", "1.5", "--y1",
        "0.6", "--y2", "0.2", "--dt", "0.01", "--paths", "200", "--deviation", "shift:-0.05",
        "--deviation", "never", "--json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // Player 1 has no capacity left, so every arm coincides with the equilibrium.
    for arm in v["report"]["arms"].as_array().unwrap() {
        assert_eq!(arm["no_gain"], true);
    }
}
