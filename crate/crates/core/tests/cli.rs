use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fracstep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracstep"))
        .args(args)
        .output()
        .unwrap()
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn energies(summary: &Value) -> Vec<f64> {
    summary["states"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["energy"].as_f64().unwrap())
        .collect()
}

#[test]
fn help_and_version() {
    let out = fracstep(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("ring-benchmark"));
    let out = fracstep(&["--version"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn malformed_flag_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out");
    let out = fracstep(&[
        "solve",
        "--alpha",
        "x",
        "--output-dir",
        target.to_str().unwrap(),
        "--error-json",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());
    let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "usage");
    assert_eq!(err["exit_code"], 2);

    let out = fracstep(&["solve", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = fracstep(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out");
    let t = target.to_str().unwrap();
    for args in [
        vec!["solve", "--alpha", "4.5"],
        vec!["solve", "--potential", "square"],
        vec!["solve", "--scheme", "rk4"],
        vec!["solve", "--parity", "sideways"],
        vec!["solve", "--grid", "2"],
        vec!["solve", "--refine-steps", "10"],
        vec!["solve", "--potential", "file:/nonexistent.csv"],
        vec!["ml-eval", "--q", "-1"],
    ] {
        let mut full = args.clone();
        full.extend(["--output-dir", t, "--error-json"]);
        let out = fracstep(&full);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
        assert!(err["message"].as_str().is_some());
        assert!(!target.exists(), "{args:?} wrote artifacts");
    }
}

#[test]
fn solver_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out");
    let out = fracstep(&[
        "solve",
        "--max-iters",
        "5",
        "--grid",
        "256",
        "--output-dir",
        target.to_str().unwrap(),
        "--error-json",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "state");
    assert!(err["message"].as_str().unwrap().contains("no convergence"));
    assert!(!target.exists());
}

#[test]
fn harmonic_levels() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracstep(&[
        "solve",
        "--potential",
        "harmonic",
        "--alpha",
        "2.0",
        "--n-states",
        "5",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    let e = energies(&stdout);
    for (n, e) in e.iter().enumerate() {
        assert!((e - (n as f64 + 0.5)).abs() < 1e-8, "{n}: {e}");
    }
    assert_eq!(json_file(&dir.path().join("summary.json")), stdout);
    let state = &stdout["states"][2];
    for key in [
        "alpha",
        "index",
        "energy",
        "energy_decay",
        "residual",
        "iterations",
    ] {
        assert!(!state[key].is_null(), "missing {key}");
    }
    let (header, rows) = csv_rows(&dir.path().join("state_004.csv"));
    assert_eq!(header, ["x", "re", "im"]);
    assert_eq!(rows.len(), 2000);
}

#[test]
fn ring_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracstep(&[
        "solve",
        "--potential",
        "ring",
        "--alpha",
        "1.8",
        "--n-states",
        "3",
        "--grid",
        "480",
        "--domain",
        "-1",
        "1",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let e = energies(&serde_json::from_slice(&out.stdout).unwrap());
    let level = 0.5 * std::f64::consts::PI.powf(1.8);
    assert!(e[0].abs() < 1e-10);
    assert!(
        (e[1] - level).abs() < 1e-9 && (e[2] - level).abs() < 1e-9,
        "{e:?}"
    );
    // periodic domain, so no boundary warning
    assert!(!String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "potential = \"harmonic\"\nalpha = 1.9\ngrid = 256\nn-states = 2\ndomain = [-8.0, 8.0]\n",
    )
    .unwrap();
    let out_dir = dir.path().join("a");
    let out = fracstep(&[
        "solve",
        "-q",
        "--config",
        cfg.to_str().unwrap(),
        "--alpha",
        "2.1",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let m = json_file(&out_dir.join("manifest.json"));
    assert_eq!(m["command"], "solve");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    let c = &m["config"];
    assert_eq!(c["alpha"], 2.1);
    assert_eq!(c["n_states"], 2);
    assert_eq!(c["grid"]["n_points"], 256);
    assert_eq!(c["grid"]["x_min"], -8.0);
    // defaults are echoed too
    assert_eq!(c["solver"]["dt"], 0.01);
    assert_eq!(c["solver"]["tol"], 1e-12);
    assert_eq!(c["solver"]["scheme"], "sixth");
    assert_eq!(c["solver"]["refine"]["mode"], "default");
    assert_eq!(c["parity"], "none");

    std::fs::write(&cfg, "alpha = 1.9\nn_states = 2\n").unwrap();
    let out = fracstep(&["solve", "--config", cfg.to_str().unwrap(), "--error-json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key 'n_states'"));
    std::fs::write(&cfg, "alpha = \"high\"\n").unwrap();
    let out = fracstep(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn finite_well_manifest_lists_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracstep(&[
        "solve",
        "-q",
        "--potential",
        "finite-well",
        "--alpha",
        "2",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = json_file(&dir.path().join("manifest.json"));
    let stages = m["config"]["refine_stages"].as_array().unwrap();
    assert!(!stages.is_empty());
    assert_eq!(stages[0]["dt_fine"], 1e-3);
    let s = json_file(&dir.path().join("summary.json"));
    // exact: k tan k = sqrt(200 - k^2), E = k^2 / 2; the sampled wall costs O(dx)
    let e0 = s["states"][0]["energy"].as_f64().unwrap();
    assert!((e0 - 1.0758757967322055).abs() < 0.02, "{e0}");
}

#[test]
fn tabulated_potential_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    let n = 256;
    let mut body = String::from("x,V\n");
    for j in 0..n {
        let x = -10.0 + 20.0 * j as f64 / n as f64;
        body.push_str(&format!("{x:.17e},{:.17e}\n", 0.5 * x * x));
    }
    std::fs::write(&path, body).unwrap();
    let pot = format!("file:{}", path.display());
    let out = fracstep(&[
        "solve",
        "--potential",
        &pot,
        "--output-dir",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let e = energies(&serde_json::from_slice(&out.stdout).unwrap());
    assert!((e[0] - 0.5).abs() < 1e-8);
    let m = json_file(&dir.path().join("o/manifest.json"));
    assert!(m["config"]["potential_spec"].is_null());
}

#[test]
fn ring_benchmark_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracstep(&[
        "ring-benchmark",
        "-q",
        "--alphas",
        "1.5,2.2",
        "--n-max",
        "4",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&dir.path().join("ring_benchmark.csv"));
    assert_eq!(
        header,
        ["alpha", "n", "max_pointwise_error", "energy_error"]
    );
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert!(r[2].parse::<f64>().unwrap() < 1e-7);
        assert!(r[3].parse::<f64>().unwrap() < 1e-8);
    }
    assert_eq!(rows[5][0].parse::<f64>().unwrap(), 2.2);
}

#[test]
fn spectrum_sweep_is_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracstep(&[
        "spectrum-sweep",
        "-q",
        "--alphas",
        "1.6,2.0,2.4",
        "--n-states",
        "3",
        "--grid",
        "512",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&dir.path().join("spectrum_sweep.csv"));
    assert_eq!(&header[..3], ["alpha", "n", "energy"]);
    assert_eq!(rows.len(), 9);
    let alphas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(alphas, [1.6, 1.6, 1.6, 2.0, 2.0, 2.0, 2.4, 2.4, 2.4]);
    assert!((rows[4][2].parse::<f64>().unwrap() - 1.5).abs() < 1e-8);
    let m = json_file(&dir.path().join("manifest.json"));
    assert_eq!(m["config"]["refine_stages"].as_array().unwrap().len(), 3);
}

#[test]
fn well_count_default_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracstep(&[
        "well-count",
        "-q",
        "--alphas",
        "1.8,2.0",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&dir.path().join("well_count.csv"));
    assert_eq!(&header[..2], ["alpha", "bound_count"]);
    assert_eq!(rows[0][1], "13");
    assert_eq!(rows[1][1], "10");
    let m = json_file(&dir.path().join("manifest.json"));
    assert_eq!(m["config"]["grid"]["n_points"], 1024);
    assert_eq!(m["config"]["potential_spec"]["v0"], 100.0);

    let out = fracstep(&["well-count", "--grid", "2048", "--error-json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("size_guard"));
}

#[test]
fn tunneling_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracstep(&[
        "tunneling",
        "-q",
        "--alphas",
        "1.9,2.0",
        "--grid",
        "512",
        "--trace-alpha",
        "1.9",
        "--trace-every",
        "50",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&dir.path().join("tunneling.csv"));
    assert_eq!(header, ["alpha", "e0", "e1", "gap", "frequency"]);
    let gap = |r: &Vec<String>| r[3].parse::<f64>().unwrap();
    assert!(gap(&rows[0]) > gap(&rows[1]));
    let f = rows[0][4].parse::<f64>().unwrap();
    assert!((f - gap(&rows[0]) / (2.0 * std::f64::consts::PI)).abs() < 1e-15);

    let (header, trace) = csv_rows(&dir.path().join("tunneling_trace.csv"));
    assert_eq!(header, ["t", "left_mass", "right_mass"]);
    let first: Vec<f64> = trace[0].iter().map(|v| v.parse().unwrap()).collect();
    let last: Vec<f64> = trace
        .last()
        .unwrap()
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(first[0], 0.0);
    assert!(first[1] > 0.99);
    // the default duration is half a period: the mass has moved across
    assert!(last[2] > 0.99, "{last:?}");
    let m = json_file(&dir.path().join("manifest.json"));
    assert_eq!(m["config"]["trace"]["scheme"], "strang");
}

#[test]
fn ml_eval_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracstep(&["ml-eval", "--output-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("written as NaN"));
    let (header, rows) = csv_rows(&dir.path().join("ml_eval.csv"));
    assert_eq!(
        header,
        ["x", "ml_q0.9", "err_q0.9", "ml_q1", "err_q1", "ml_q1.1", "err_q1.1", "gaussian"]
    );
    assert_eq!(rows.len(), 1001);
    let mid = &rows[500];
    assert_eq!(mid[0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(mid[3].parse::<f64>().unwrap(), 1.0);
    // x = -5 is outside the series domain
    assert_eq!(rows[0][1], "NaN");
    assert_eq!(rows[0][2], "inf");
    let x1: Vec<f64> = rows[600].iter().map(|v| v.parse().unwrap()).collect();
    assert!((x1[3] - x1[7]).abs() < 1e-12);
}

#[test]
fn artifacts_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = [
        "ring-benchmark",
        "-q",
        "--alphas",
        "1.7",
        "--n-max",
        "3",
        "--seed",
        "11",
        "--output-dir",
        d,
    ];
    assert!(fracstep(&args).status.success());
    let a = std::fs::read(dir.path().join("ring_benchmark.csv")).unwrap();
    let ma = std::fs::read(dir.path().join("manifest.json")).unwrap();
    assert!(fracstep(&args).status.success());
    assert_eq!(
        a,
        std::fs::read(dir.path().join("ring_benchmark.csv")).unwrap()
    );
    assert_eq!(ma, std::fs::read(dir.path().join("manifest.json")).unwrap());
}
