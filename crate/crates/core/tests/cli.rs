use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pfc_sync(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfc-sync"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const EXAMPLE4_GRAPH: &str = r#"{
  "n": 4,
  "edges": [
    {"from": 2, "to": 0, "weight": 1},
    {"from": 3, "to": 0, "weight": -2},
    {"from": 0, "to": 1, "weight": 1},
    {"from": 0, "to": 2, "weight": -2},
    {"from": 1, "to": 2, "weight": 1},
    {"from": 2, "to": 3, "weight": -2}
  ]
}"#;

#[test]
fn graph_analyze_reports_the_radius() {
    let tmp = TempDir::new().unwrap();
    let input = write(tmp.path(), "graph.json", EXAMPLE4_GRAPH);
    let out = tmp.path().join("out");
    let res = pfc_sync(&["graph", "analyze", &input], &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let a = json(&out.join("analysis.json"));
    assert!((a["ofp_radius"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(a["weight_balanced"], Value::Bool(true));
    assert_eq!(a["inertia"]["negative"], 2);

    let res = pfc_sync(&["graph", "analyze", "--input", &input], &tmp.path().join("again"));
    assert_eq!(res.status.code(), Some(0));
}

#[test]
fn example4_without_compensator_exits_with_divergence() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let res = pfc_sync(&["scenario", "example4", "--pfc", "none"], &out);
    assert_eq!(res.status.code(), Some(4));
    let m = json(&out.join("metrics.json"));
    assert_eq!(m["diverged"], Value::Bool(true));
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,y1_1,y1_2,y1_3,y1_4,yc_1,yc_2,yc_3,yc_4,sync_error\n"));
}

#[test]
fn example2_reports_bound_and_both_verdicts() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let res = pfc_sync(&["scenario", "example2"], &out);
    assert_eq!(res.status.code(), Some(0));
    let r = json(&out.join("report.json"));
    assert!((r["a_min"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(r["below_bound"]["verdict"]["positive_real"], Value::Bool(false));
    assert_eq!(r["above_bound"]["verdict"]["positive_real"], Value::Bool(true));
    assert!(out.join("plant_sweep.csv").exists());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        assert_eq!(pfc_sync(&["scenario", "example4", "--horizon", "10"], dir).status.code(), Some(0));
    }
    for file in ["report.json", "metrics.json", "trajectory.csv"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let text = std::fs::read_to_string(a.join("report.json")).unwrap();
    let line = text.lines().find(|l| l.contains("\"ofp_radius\"")).unwrap();
    let digits = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    assert!(digits.starts_with("5.") && digits.ends_with("e-1") && digits.len() == "5.0000000000000000e-1".len(), "{line}");
}

#[test]
fn pfc_design_from_rational_plant() {
    let tmp = TempDir::new().unwrap();
    let input = write(tmp.path(), "plant.json", r#"{"num": [1], "den": [0.25, 1, 1]}"#);
    let out = tmp.path().join("out");
    let res = pfc_sync(&["pfc", "design", &input, "--slack", "0"], &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let r = json(&out.join("pfc_report.json"));
    assert!((r["gains"][0]["bound"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    let c = json(&out.join("compensator.json"));
    assert_eq!(c["dims"], serde_json::json!([1, 1]));
}

#[test]
fn passivity_check_writes_verdict_and_sweep() {
    let tmp = TempDir::new().unwrap();
    let input = write(
        tmp.path(),
        "sys.json",
        r#"{"dims": [1, 1], "feedthrough": [[0]], "chains": [{"pole_re": 0.5, "pole_im": 0, "residues": [[[0, 0]], [[1, 0]]]}]}"#,
    );
    let out = tmp.path().join("out");
    let res = pfc_sync(&["passivity", "check", &input, "--grid-points", "500"], &out);
    assert_eq!(res.status.code(), Some(0));
    let v = json(&out.join("verdict.json"));
    assert_eq!(v["positive_real"], Value::Bool(false));
    assert!((v["ifp_index"].as_f64().unwrap() + 0.5).abs() < 0.01);
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("omega,margin,re_h,im_h\n"));
}

#[test]
fn sim_run_reports_gradient_drift() {
    let tmp = TempDir::new().unwrap();
    let input = write(
        tmp.path(),
        "zgs.json",
        r#"{
          "agents": [
            {"kind": "gradient_flow", "curvature": 1, "offset": 0, "x0": 0},
            {"kind": "gradient_flow", "curvature": 2, "offset": 1, "x0": 1},
            {"kind": "gradient_flow", "curvature": 4, "offset": 2, "x0": 2}
          ],
          "graph": {"n": 3, "edges": [{"from": 0, "to": 1, "weight": 1}, {"from": 1, "to": 2, "weight": 1}, {"from": 2, "to": 0, "weight": 1}]},
          "horizon": 40
        }"#,
    );
    let out = tmp.path().join("out");
    let res = pfc_sync(&["sim", "run", &input], &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let m = json(&out.join("metrics.json"));
    assert!(m["gradient_sum_drift"].as_f64().unwrap() < 1e-8);
    assert!((m["consensus_value"][0].as_f64().unwrap() - 10.0 / 7.0).abs() < 1e-4);
}

#[test]
fn singular_loop_exits_with_three() {
    let tmp = TempDir::new().unwrap();
    let input = write(
        tmp.path(),
        "bad.json",
        r#"{
          "agents": [
            {"kind": "state_space", "a": [[0]], "b": [[1]], "c": [[1]], "d": [[0]], "x0": [1]},
            {"kind": "state_space", "a": [[0]], "b": [[1]], "c": [[1]], "d": [[0]], "x0": [0]}
          ],
          "graph": {"n": 2, "edges": [{"from": 0, "to": 1, "weight": 1}, {"from": 1, "to": 0, "weight": 1}]},
          "sigma": 0.5,
          "pfc": {"kind": "static", "nu": -1}
        }"#,
    );
    let res = pfc_sync(&["sim", "run", &input], &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(3));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("not well-posed") && err.contains("condition number"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);
}

#[test]
fn validation_errors_exit_with_two_and_name_the_field() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");

    let missing = write(tmp.path(), "g.json", r#"{"n": 3}"#);
    let res = pfc_sync(&["graph", "analyze", &missing], &out);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("edges"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);

    let bad_edge = write(tmp.path(), "g2.json", r#"{"n": 2, "edges": [{"from": 0, "to": 5, "weight": 1}]}"#);
    let err = String::from_utf8_lossy(&pfc_sync(&["graph", "analyze", &bad_edge], &out).stderr).to_string();
    assert!(err.contains("edges[0]"), "{err}");

    let malformed = write(tmp.path(), "m.json", "{ not json");
    assert_eq!(pfc_sync(&["graph", "analyze", &malformed], &out).status.code(), Some(2));

    assert_eq!(pfc_sync(&["frobnicate"], &out).status.code(), Some(2));
    assert_eq!(pfc_sync(&["scenario", "example9"], &out).status.code(), Some(2));
    assert_eq!(pfc_sync(&["scenario", "example4", "--pfc", "static:abc"], &out).status.code(), Some(2));
}
