use germdeform::json::to_output;
use germdeform::FiberReport;
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn input(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("inputs").join(name)
}

fn run(args: &[&str], file: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_germdeform"));
    cmd.args(args).env_remove("GERMDEFORM_SEED");
    if let Some(f) = file {
        cmd.arg(input(f));
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn analyze_reports_the_cusp_basis() {
    let out = run(&["analyze"], Some("cusp.json"));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["r"], 4);
    assert_eq!(v["d"], 3);
    assert_eq!(v["basis"], serde_json::json!(["1", "x", "y", "x*y"]));
    assert!(v["dual_certificate"].as_f64().unwrap() < 1e-10);
}

#[test]
fn dis_at_the_origin_vanishes() {
    let out = run(&["dis"], Some("cusp_dis_zero.json"));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let dis = v["dis_value"].as_array().unwrap();
    assert_eq!(dis.len(), 4);
    for c in dis {
        let (a, b) = complex(c);
        assert!(a.hypot(b) < 1e-12);
    }
}

#[test]
fn fiber_report_round_trips() {
    let out = run(&["fiber"], Some("cusp_fiber.json"));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let report: FiberReport = serde_json::from_str(&text).unwrap();
    assert!(report.smooth && report.simple_branch);
    assert_eq!(report.multiplicity_sum, 4);
    assert_eq!(to_output(&report).unwrap(), text.trim_end());
}

#[test]
fn output_is_deterministic_in_the_seed() {
    let a = run(&["family", "--seed", "11"], Some("cusp.json"));
    let b = run(&["family", "--seed", "11"], Some("cusp.json"));
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_germdeform"))
        .args(["family"])
        .arg(input("cusp.json"))
        .env("GERMDEFORM_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
    assert_eq!(json(&a)["seed"], 11);
}

#[test]
fn classify_recovers_the_straight_line() {
    let out = run(&["classify"], Some("cusp_straight_line.json"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let last = v["phi_samples"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last[0].as_f64(), Some(1.0));
    let want = [(0.002, 0.0), (0.0, 0.0), (0.001, 0.0), (0.0, 0.0)];
    for (c, w) in last[1].as_array().unwrap().iter().zip(want) {
        let (a, b) = complex(c);
        assert!((a - w.0).hypot(b - w.1) < 1e-6);
    }
    assert!(v["residual"].as_f64().unwrap() < 1e-7);
    assert!(v["verification"]["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn validation_errors_exit_with_two() {
    let out = run(&["analyze"], Some("not_weierstrass.json"));
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "NotWeierstrass");

    let out = run(&["analyze", "--nodes", "100"], Some("cusp.json"));
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["analyze"], Some("missing.json"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_passes_on_the_builtin_corpus() {
    let out = run(&["check"], None);
    let v = json(&out);
    assert_eq!(out.status.code(), Some(0), "{v:#}");
    assert_eq!(v["checks"].as_array().unwrap().len(), 12);
}
