use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn iht(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iht")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Parses `key=value` tokens of the solve summary line.
fn summary_value(line: &str, key: &str) -> String {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {line:?}"))
        .to_string()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn solve_zero_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = iht(&["solve", "--ydzero", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let line = stdout(&out);
    assert_eq!(summary_value(&line, "F").parse::<f64>().unwrap(), 0.0);
    assert_eq!(summary_value(&line, "iters"), "1");
    assert_eq!(summary_value(&line, "L0"), "0.000000");
    for file in ["report.csv", "final_control.csv", "summary.json"] {
        assert!(dir.path().join(file).exists(), "{file} missing");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["iterations"], 1);
    assert_eq!(summary["termination"], "tolerance");
}

#[test]
fn solve_benchmark_writes_consistent_logs() {
    let dir = tempfile::tempdir().unwrap();
    let out = iht(&["solve", "--mesh-n", "10", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let line = stdout(&out);
    let f: f64 = summary_value(&line, "F").parse().unwrap();
    assert!((f - 3.09966).abs() < 1e-5, "{line}");
    assert_eq!(summary_value(&line, "term"), "tolerance");

    let rows = csv_rows(&dir.path().join("report.csv"));
    assert_eq!(rows.len().to_string(), summary_value(&line, "iters"));
    let objective: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(objective.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(rows.last().unwrap()[8], summary_value(&line, "pde"));

    let control = csv_rows(&dir.path().join("final_control.csv"));
    assert_eq!(control.len(), 200);
    assert!(control.iter().enumerate().all(|(i, r)| r[0] == i.to_string()));
}

#[test]
fn large_beta_without_bound_gives_empty_support() {
    let dir = tempfile::tempdir().unwrap();
    let out = iht(&["solve", "--beta", "0.5", "--mesh-n", "80", "--no-bound", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(summary_value(&stdout(&out), "L0"), "0.000000");
}

#[test]
fn invalid_configuration_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(iht(&["solve", "--alpha", "-1", "--out", d]).status.code(), Some(2));
    assert_eq!(iht(&["solve", "--strategy", "sideways", "--out", d]).status.code(), Some(2));
    assert_eq!(iht(&["solve", "--theta", "2", "--out", d]).status.code(), Some(2));
    assert_eq!(iht(&["switching", "--mesh-n", "10", "--out", d]).status.code(), Some(2));

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "mesh-n = 6\nnot_a_key = 3\n").unwrap();
    let out = iht(&["solve", "--config", cfg.to_str().unwrap(), "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not-a-key"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# coarse run\nmesh_n = 6\nbeta = 0.5\nstrategy = bt\nlhat0 = 0.001\n").unwrap();
    let d = dir.path().join("a");
    let from_file = iht(&["solve", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert!(from_file.status.success());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["mesh_n"], 6);
    assert_eq!(summary["beta"], 0.5);
    assert_eq!(summary["strategy"], "bt");

    let d = dir.path().join("b");
    let overridden = iht(&["solve", "--config", cfg.to_str().unwrap(), "--beta", "0.01", "--out", d.to_str().unwrap()]);
    assert!(overridden.status.success());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["mesh_n"], 6);
    assert_eq!(summary["beta"], 0.01);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = iht(&["beta-sweep", "--mesh-n", "8", "--betas", "0.1,0.01", "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
        let out = iht(&["solve", "--mesh-n", "8", "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
    }
    for file in ["beta_sweep.csv", "report.csv", "final_control.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file} differs");
    }
}

#[test]
fn experiment_commands_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    assert!(iht(&["table1", "--mesh-n", "10", "--out", &d("t1")]).status.success());
    let rows = csv_rows(&dir.path().join("t1/table1.csv"));
    assert_eq!(rows.len(), 10);
    // large initial L collapses the coarse solution to zero as on fine meshes
    let bt10 = rows.iter().find(|r| r[0] == "bt" && r[1].parse::<f64>().unwrap() == 10.0).unwrap();
    assert_eq!(bt10[3].parse::<f64>().unwrap(), 0.0);

    assert!(iht(&["mesh-study", "--ns", "6,8", "--out", &d("ms")]).status.success());
    assert_eq!(csv_rows(&dir.path().join("ms/mesh_study.csv")).len(), 2);

    assert!(iht(&["beta-sweep", "--pareto", "--mesh-n", "8", "--betas", "0.5,0.05", "--out", &d("p")]).status.success());
    let l0 = csv_rows(&dir.path().join("p/pareto_l0.csv"));
    let l1 = csv_rows(&dir.path().join("p/pareto_l1.csv"));
    assert_eq!((l0.len(), l1.len()), (2, 2));
    // at beta = 0.5 both penalties return zero: the same point
    assert_eq!(l0[0][1], l1[0][1]);
    assert_eq!(l0[0][3].parse::<f64>().unwrap(), 0.0);

    assert!(iht(&["unsolvable", "--mesh-n", "8", "--out", &d("u")]).status.success());
    for file in ["unsolvable_residuals.csv", "unsolvable_control.csv", "unsolvable_report.csv"] {
        assert!(dir.path().join("u").join(file).exists(), "{file} missing");
    }
    let residuals = csv_rows(&dir.path().join("u/unsolvable_residuals.csv"));
    assert_eq!(residuals.len(), 4);
    assert!(residuals.iter().all(|r| r[1].parse::<f64>().unwrap() > 0.0));

    assert!(iht(&["switching", "--mesh-n", "20", "--betas", "0.1", "--out", &d("s")]).status.success());
    let rows = csv_rows(&dir.path().join("s/switching.csv"));
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(csv_rows(&dir.path().join("s/switching_profiles.csv")).len(), 20);
}

#[test]
fn selftest_passes() {
    let out = iht(&["selftest", "--seed", "5"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(!stdout(&out).contains("[FAIL]"));
}
