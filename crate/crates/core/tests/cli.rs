use std::process::{Command, Output};

fn photmol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photmol")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn point_at_single_drive_optimum_antibunches() {
    let out = photmol(&["point", "--j", "10", "--eps-a", "0.01", "--eps-b", "0", "--delta", "0.2887", "--u", "0.00385"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["g2_a"].as_f64().unwrap() < 1e-3);
    assert_eq!(v["solver"], "MasterEquation");
    assert_eq!(v["params"]["u_b"], 0.00385);
}

#[test]
fn point_reads_params_file_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, r#"{"coupling_j": 10, "eps_a": 0.01, "eps_b": 0.002, "delta_a": 1, "delta_b": 1}"#).unwrap();
    let out = photmol(&["point", "--params", path.to_str().unwrap(), "--solver", "hierarchy", "--phi", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["params"]["phi_a"], 0.5);
    assert_eq!(v["params"]["eps_b"], 0.002);
    assert!(v["g2_a"].as_f64().is_some());
}

#[test]
fn optimize_finds_dual_drive_detuning() {
    let out = photmol(&["optimize", "--j", "10", "--eta", "3", "--phi", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let d = v["delta_opt"].as_f64().unwrap();
    assert!((d - 10.0 / 3.0).abs() / (10.0 / 3.0) < 0.05, "{d}");
    assert_eq!(v["method"], "Numeric");
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let out = photmol(&[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bad_inputs_exit_one() {
    assert_eq!(photmol(&["figure", "fig9", "--out-dir", "/tmp"]).status.code(), Some(1));
    assert_eq!(photmol(&["point", "--solver", "montecarlo"]).status.code(), Some(1));
    assert_eq!(photmol(&["sweep", "--config", "/nonexistent.json", "--out", "/tmp/x.csv"]).status.code(), Some(1));
    assert_eq!(photmol(&["optimize", "--j", "-1"]).status.code(), Some(1));
    assert_eq!(photmol(&["point", "--kappa", "-1"]).status.code(), Some(1));
}

#[test]
fn solver_failure_exits_two() {
    // the hierarchy needs identical detunings
    let out = photmol(&["point", "--solver", "hierarchy", "--delta-a", "1", "--delta-b", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    assert_eq!(photmol(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "base": {"coupling_j": 10, "eps_a": 0.01},
            "axis1": {"name": "eta", "min": 2, "max": 4, "count": 2},
            "axis2": {"name": "u", "min": 1e-3, "max": 1e-1, "count": 3, "scale": "log"},
            "solver": "Hierarchy",
            "constraints": ["delta := dual_drive_delta"]
        }"#,
    )
    .unwrap();
    let csv1 = dir.path().join("one.csv");
    let csv8 = dir.path().join("eight.csv");
    for (threads, out) in [("1", &csv1), ("8", &csv8)] {
        let o = photmol(&["--threads", threads, "sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read_to_string(&csv1).unwrap();
    assert_eq!(a, std::fs::read_to_string(&csv8).unwrap());
    assert_eq!(a.lines().count(), 7);
    assert!(dir.path().join("one.csv.meta.json").exists());
}

#[test]
fn figure_writes_dataset_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = photmol(&[
        "figure",
        "fig5b",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--line-points",
        "5",
        "--solver",
        "hierarchy",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig5b.csv")).unwrap();
    assert!(csv.starts_with("coupling_j,eta_inv,g2_a,"));
    assert_eq!(csv.lines().count(), 1 + 3 * 5);
    assert!(dir.path().join("plot_fig5b.py").exists());
}
