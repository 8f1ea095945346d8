use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rough-sio"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn rough-sio")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

struct Inputs {
    dir: TempDir,
}

impl Inputs {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let files = [
            ("k.json", r#"{"dimension": 2, "callable_id": "split_arcs", "radial": {"kind": "saturating_root"}}"#),
            ("f.json", r#"{"family": "gaussian", "center": [0.2, -0.1], "width": 0.8, "amplitude": 1}"#),
            ("g.json", r#"{"side": 10, "nodes": 21, "function": {"family": "bump", "center": [0, 0], "radius": 2, "amplitude": 1}}"#),
            ("cos2.json", r#"{"dimension": 2, "callable_id": "cos", "params": {"frequency": 2}}"#),
            ("a.json", r#"{"family": "linear", "slope": [0.6, -0.3], "offset": 0.2}"#),
            ("w.json", r#"{"family": "power", "alpha": 0.5}"#),
            ("pts.json", "[[0, 0], [0.3, 0.1]]"),
        ];
        for (name, body) in files {
            std::fs::write(dir.path().join(name), body).unwrap();
        }
        Inputs { dir }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn csv_rows(p: &Path) -> usize {
    std::fs::read_to_string(p).unwrap().lines().count()
}

#[test]
fn set_info_writes_strata() {
    let io = Inputs::new();
    let csv = io.out("set");
    let v = stdout_json(&run(&["set-info", &io.path("k.json"), "--csv", csv.to_str().unwrap()]));
    assert!(v.is_object());
    assert!(csv_rows(&csv.join("strata.csv")) > 1);
    assert!(csv_rows(&csv.join("outline.csv")) > 1);
}

#[test]
fn cover_round_trips_through_weight_check() {
    let io = Inputs::new();
    let cover = io.out("cover.json");
    let out = run(&["cover", &io.path("k.json"), "--samples", "2000", "--out", cover.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!read_json(&cover)["rectangles"].as_array().unwrap().is_empty());

    let csv = io.out("w.csv");
    let w = run(&[
        "weight-check",
        &io.path("k.json"),
        &io.path("w.json"),
        "--cover",
        cover.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(w.status.code().is_some_and(|c| c < 2), "{}", String::from_utf8_lossy(&w.stderr));
    assert!(csv_rows(&csv) > 1);

    std::fs::write(io.out("exp.json"), r#"{"family": "exponential", "v": [1.0, 0.0]}"#).unwrap();
    let refused = run(&["weight-check", &io.path("k.json"), &io.path("exp.json"), "--cover", cover.to_str().unwrap()]);
    assert_eq!(refused.status.code(), Some(1));
}

#[test]
fn maximal_operators_run_on_sampled_grids() {
    let io = Inputs::new();
    for op in ["hl", "mh", "msh", "frac"] {
        let (k, g) = (io.path("k.json"), io.path("g.json"));
        let mut args = vec!["maximal", &k, &g, "--op", op];
        if op == "frac" {
            args.extend(["--mu", "0.5"]);
        }
        let v = stdout_json(&run(&args));
        assert!(v.is_object(), "{op}");
    }
}

#[test]
fn apply_reports_both_methods() {
    let io = Inputs::new();
    let csv = io.out("apply.csv");
    let v = stdout_json(&run(&[
        "apply",
        &io.path("k.json"),
        &io.path("f.json"),
        "--eps",
        "0.25",
        "--points",
        &io.path("pts.json"),
        "--csv",
        csv.to_str().unwrap(),
    ]));
    let rows = v.as_array().expect("one entry per point");
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!(r["value_direct"].is_array() || r["value_direct"].is_object(), "{r}");
        assert!(r["tail_bound"].as_f64().unwrap() >= 0.0);
    }
    assert_eq!(csv_rows(&csv), 3);
}

#[test]
fn principal_value_and_commutator() {
    let io = Inputs::new();
    let pv = stdout_json(&run(&["pv", &io.path("k.json"), &io.path("f.json"), "--points", &io.path("pts.json")]));
    assert_eq!(pv.as_array().unwrap().len(), 2);
    let commutator = |kernel: &str, eps: Option<&str>| {
        let (k, a, f, pts) = (io.path(kernel), io.path("a.json"), io.path("f.json"), io.path("pts.json"));
        let mut args = vec!["commutator", &k, &a, &f, "--points", &pts];
        if let Some(e) = eps {
            args.extend(["--eps", e]);
        }
        run(&args)
    };
    stdout_json(&commutator("k.json", Some("0.25")));
    stdout_json(&commutator("cos2.json", None));
    // the principal value needs ∫ Ω(θ) θ dσ = 0 at order 1
    let refused = commutator("k.json", None);
    assert_eq!(refused.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("moment"));
}

#[test]
fn bad_inputs_name_the_field() {
    let io = Inputs::new();
    std::fs::write(io.out("bad.json"), r#"{"points": []}"#).unwrap();
    let out = run(&["verify", "--config", &io.path("bad.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("points"));

    std::fs::write(io.out("typo.json"), r#"{"grid_node": 17}"#).unwrap();
    let out = run(&["verify", "--config", &io.path("typo.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid_node"));

    std::fs::write(io.out("w_bad.json"), r#"{"family": "power"}"#).unwrap();
    let out = run(&["weight-check", &io.path("k.json"), &io.path("w_bad.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}

#[test]
fn verify_small_config_writes_report_and_csvs() {
    let io = Inputs::new();
    std::fs::write(
        io.out("small.json"),
        r#"{"points": [[0.3, 0.1]], "grid_nodes": 17, "probe_nodes": 9, "vector_families": 4,
            "family_size": 3, "identity_points": 20, "cover_samples": 2000}"#,
    )
    .unwrap();
    let report = io.out("report.json");
    let csv = io.out("csv");
    let out = run(&[
        "verify",
        "--config",
        &io.path("small.json"),
        "--out",
        report.to_str().unwrap(),
        "--csv-dir",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&report);
    assert_eq!(r["summary"]["verdict"], "pass");
    assert!(r["checks"].as_array().unwrap().len() >= 40);
    assert!(csv_rows(&csv.join("checks.csv")) > 40);
    assert!(csv_rows(&csv.join("values.csv")) > 40);
}
