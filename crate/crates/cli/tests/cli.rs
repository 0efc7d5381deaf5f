use std::path::Path;
use std::process::{Command, Output};

fn spinbattery(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbattery"))
        .args(args)
        .env_remove("SPINBATTERY_WORKERS")
        .output()
        .expect("binary runs")
}

fn data_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

const SWEEP_CONFIG: &str = r#"
[model]
n_sites = 8
gamma = 0.0
delta = 0.0
omega = 2.0

[sweep]
parameter = "j"
start = -2.0
stop = 2.0
step = 0.05
"#;

#[test]
fn power_sweep_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, SWEEP_CONFIG).unwrap();
    let out = dir.path().join("sweep.csv");
    let status = spinbattery(&["power-sweep", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let lines = data_lines(&out);
    assert_eq!(lines[0], "J_over_h,p_max,t_star,work,degenerate_ground");
    assert_eq!(lines.len() - 1, 81);
    assert!(lines[1].starts_with("-2,"));
    assert!(lines[81].starts_with("2,"));
    let zero: Vec<&str> = lines.iter().find(|l| l.starts_with("0,")).unwrap().split(',').collect();
    assert_eq!(zero[1], "1.44922270755");
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, SWEEP_CONFIG).unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = spinbattery(&[
            "power-sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--n-sites",
            "6",
            "--workers",
            workers,
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(a, run("c.csv", "3"));
}

#[test]
fn disorder_sweep_is_reproducible_and_records_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = spinbattery(&[
            "disorder-sweep",
            "--n-sites",
            "4",
            "--start",
            "-1",
            "--stop",
            "1",
            "--step",
            "0.5",
            "--disorder-target",
            "zz",
            "--disorder-mean",
            "1",
            "--disorder-sigma",
            "0.5",
            "--realizations",
            "20",
            "--seed",
            "42",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert!(a.contains("# seed: 42"));
    let rows: Vec<&str> = a.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1 + 5);
    assert!(rows[0].starts_with("J_over_h,mean_p_max,std_error"));
}

#[test]
fn negative_step_exits_with_status_two_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, SWEEP_CONFIG.replace("step = 0.05", "step = -0.05")).unwrap();
    let o = spinbattery(&["power-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep.step"));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, format!("{SWEEP_CONFIG}\n[optimizer]\ngrid_point = 10\n")).unwrap();
    let o = spinbattery(&["power-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid_point"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let o = spinbattery(&["power-sweep", "--config", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("I/O error"));
}

#[test]
fn json_output_to_stdout() {
    let o = spinbattery(&[
        "entanglement",
        "--n-sites",
        "4",
        "--start",
        "-1",
        "--stop",
        "1",
        "--step",
        "1",
        "--at",
        "t-star",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["command"], "entanglement");
    assert_eq!(v["columns"], serde_json::json!(["J_over_h", "negativity", "log_negativity"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn fidelity_and_order_scans_have_the_documented_columns() {
    let fid = spinbattery(&["fidelity-scan", "--n-sites", "4", "--gamma", "0.1", "--start", "0", "--stop", "1", "--step", "0.25"]);
    assert!(fid.status.success());
    let text = String::from_utf8(fid.stdout).unwrap();
    assert!(text.lines().any(|l| l == "J_over_h,fidelity"));

    let ord = spinbattery(&["order-params", "--n-sites", "4", "--gamma", "1", "--start", "-3", "--stop", "3", "--step", "3"]);
    assert!(ord.status.success());
    let text = String::from_utf8(ord.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "J_over_h,m_fm,m_afm");
    assert_eq!(rows.len(), 4);
}

#[test]
fn sweeping_j_is_rejected_for_thermal_parameters() {
    let o = spinbattery(&["fidelity-scan", "--sweep", "gamma", "--start", "0", "--stop", "1", "--step", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep.parameter"));
}

#[test]
fn thermal_recipe_writes_four_maps() {
    let dir = tempfile::tempdir().unwrap();
    let o = spinbattery(&["recipe", "fig6", "--output", dir.path().to_str().unwrap(), "--j-step", "1", "--grid-points", "200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    assert_eq!(files.len(), 4);
    let first = data_lines(&dir.path().join(&files[0]));
    assert_eq!(first[0], "beta,J_over_h,p_t_diff");
}

#[test]
fn unknown_recipe_is_rejected() {
    let o = spinbattery(&["recipe", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
}
