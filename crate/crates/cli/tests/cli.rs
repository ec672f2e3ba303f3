//! End-to-end tests of the command-line interface: exit codes, report
//! round-trips and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_varspace")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn varspace")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("varspace_cli_{tag}_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_sine_csv(path: &Path, n: usize) {
    let grid = varspace::Grid::line(n, 2.0 * std::f64::consts::PI).unwrap();
    let f = varspace::SampledFunction::from_fn(grid, |x| {
        Complex64::new(x[0].sin() + 0.5 * (3.0 * x[0]).cos(), 0.0)
    });
    varspace::write_csv(&f, path).unwrap();
}

fn repo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default_equivalence.conf")
}

#[test]
fn conditions_tame_case_exits_zero() {
    let out = run(&["conditions", "--s", "1", "--p", "2", "--q", "2", "--M", "2"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"ok\": true"));
}

#[test]
fn conditions_violated_case_exits_one() {
    let out = run(&["conditions", "--s", "1.5", "--p", "2", "--q", "2", "--M", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn norm_rejects_insufficient_difference_order() {
    let dir = tempdir("m_check");
    let input = dir.join("f.csv");
    write_sine_csv(&input, 64);
    let out = run(&[
        "norm", "--input", input.to_str().unwrap(), "--flavor", "besov", "--method",
        "differences", "--s", "1.5", "--p", "2", "--q", "2", "--M", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("M"), "message should cite the difference order: {err}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn norm_usage_errors_exit_two() {
    // unknown flag
    let out = run(&["norm", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // malformed expression names the flag
    let dir = tempdir("expr_err");
    let input = dir.join("f.csv");
    write_sine_csv(&input, 64);
    let out = run(&[
        "norm", "--input", input.to_str().unwrap(), "--flavor", "besov", "--method", "fourier",
        "--s", "1", "--p", "2 +", "--q", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--p"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn norm_report_round_trips_and_is_deterministic() {
    let dir = tempdir("norm_det");
    let input = dir.join("f.csv");
    write_sine_csv(&input, 128);
    let out_a = dir.join("a.json");
    let out_b = dir.join("b.json");
    for out in [&out_a, &out_b] {
        let run_out = run(&[
            "norm", "--input", input.to_str().unwrap(), "--flavor", "besov", "--method",
            "fourier", "--s", "1", "--p", "2", "--q", "2", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(
            run_out.status.code(),
            Some(0),
            "stderr: {}",
            String::from_utf8_lossy(&run_out.stderr)
        );
    }
    let parse = |p: &Path| -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
    };
    let a = parse(&out_a);
    let b = parse(&out_b);
    // identical up to the meta block
    assert_eq!(a["result"], b["result"]);
    let value = a["result"]["value"].as_f64().unwrap();
    assert!(value > 0.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn norm_methods_agree_on_order_of_magnitude() {
    let dir = tempdir("norm_methods");
    let input = dir.join("f.csv");
    write_sine_csv(&input, 256);
    let mut values = Vec::new();
    for method in ["fourier", "localmeans", "differences", "peetre"] {
        let out = run(&[
            "norm", "--input", input.to_str().unwrap(), "--flavor", "besov", "--method", method,
            "--s", "1", "--p", "2", "--q", "2", "--M", "2",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{method} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        values.push(v["result"]["value"].as_f64().unwrap());
    }
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min < 10.0, "methods disagree: {values:?}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn two_microlocal_weight_norms_run() {
    let dir = tempdir("norm_2ml");
    let input = dir.join("f.csv");
    write_sine_csv(&input, 128);
    let out = run(&[
        "norm", "--input", input.to_str().unwrap(), "--flavor", "besov", "--method",
        "differences", "--weights", "2ml:1,-0.5,0", "--p", "2", "--q", "2", "--M", "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["result"]["value"].as_f64().unwrap() > 0.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn equivalence_default_config_passes_and_is_deterministic() {
    let dir = tempdir("equiv");
    let out_a = dir.join("a.json");
    let out_b = dir.join("b.json");
    for out in [&out_a, &out_b] {
        let run_out = run(&[
            "equivalence", "--config", repo_config().to_str().unwrap(), "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            run_out.status.code(),
            Some(0),
            "stderr: {}",
            String::from_utf8_lossy(&run_out.stderr)
        );
    }
    let parse = |p: &Path| -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
    };
    let a = parse(&out_a);
    let b = parse(&out_b);
    assert_eq!(a["result"], b["result"], "reports must be identical outside meta");
    assert_eq!(a["result"]["pass"], serde_json::Value::Bool(true));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exponents_load_from_sampled_csv() {
    let dir = tempdir("csv_exp");
    let input = dir.join("f.csv");
    write_sine_csv(&input, 64);
    // sampled exponent p(x) = 2 + cos(x) written as a CSV array
    let grid = varspace::Grid::line(64, 2.0 * std::f64::consts::PI).unwrap();
    let p_samples = varspace::SampledFunction::from_fn(grid, |x| {
        Complex64::new(2.0 + x[0].cos(), 0.0)
    });
    let p_path = dir.join("p.csv");
    varspace::write_csv(&p_samples, &p_path).unwrap();

    let via_csv = run(&[
        "norm", "--input", input.to_str().unwrap(), "--flavor", "besov", "--method", "fourier",
        "--s", "1", "--p", &format!("@{}", p_path.display()), "--q", "2",
    ]);
    assert_eq!(via_csv.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&via_csv.stderr));
    let via_expr = run(&[
        "norm", "--input", input.to_str().unwrap(), "--flavor", "besov", "--method", "fourier",
        "--s", "1", "--p", "2+cos(x)", "--q", "2",
    ]);
    let a: serde_json::Value = serde_json::from_slice(&via_csv.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&via_expr.stdout).unwrap();
    assert_eq!(a["result"]["value"], b["result"]["value"]);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn inequalities_powersum_suite_passes() {
    let out = run(&["inequalities", "--suite", "powersum", "--trials", "300", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["pass"], serde_json::Value::Bool(true));
}

#[test]
fn inequalities_unknown_suite_is_usage_error() {
    let out = run(&["inequalities", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kernels_check_passes() {
    let out = run(&["kernels", "--R", "3", "--radius", "0.9", "--check"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("tauberian epsilon"));
}
