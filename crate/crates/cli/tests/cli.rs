//! End-to-end runs of the `reticular` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reticular"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    stdout(&o)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("reticular-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn catalog_document_has_all_groups() {
    let doc: Value = serde_json::from_str(&ok(&["catalog"])).unwrap();
    assert_eq!(doc["groups"]["weakly-caustic-stable"].as_array().unwrap().len(), 3);
    assert_eq!(doc["groups"]["caustic-stable"].as_array().unwrap().len(), 9);
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 40);
    let keys: Vec<&String> = entries[0].as_object().unwrap().keys().collect();
    let mut want = [
        "label", "r", "k", "n", "germ", "family", "codim_caustic", "codim_weak", "modulus_count", "regime", "figure",
    ];
    want.sort();
    assert_eq!(keys, want);
}

#[test]
fn catalog_filter_and_csv() {
    let doc: Value = serde_json::from_str(&ok(&["catalog", "--label", "B_{2,3}"])).unwrap();
    let labels: Vec<&str> = doc["entries"].as_array().unwrap().iter().map(|e| e["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["B_{2,3}^{+,+}", "B_{2,3}^{+,-}", "B_{2,3}^{-,+}", "B_{2,3}^{-,-}"]);
    let csv = ok(&["catalog", "--format", "csv"]);
    assert_eq!(csv.lines().count(), 41);
    assert!(csv.starts_with("label,r,k,n,germ,family,codim_caustic,codim_weak,modulus_count,regime,figure\n"));
    assert_eq!(run(&["catalog", "--label", "Z_{9}"]).status.code(), Some(2));
}

#[test]
fn codim_examples_and_exit_codes() {
    assert!(ok(&["codim", "--germ", "x1^2+x1*x2+1/3*x2^2"]).starts_with("3\n"));
    let json: Value = serde_json::from_str(&ok(&["codim", "--germ", "x^4", "--space", "1,0", "--format", "json"])).unwrap();
    assert_eq!(json["codim"], 3);
    assert_eq!(run(&["codim", "--germ", "x1^2"]).status.code(), Some(3));
    assert_eq!(run(&["codim", "--germ", "x1^2 +"]).status.code(), Some(2));
    assert_eq!(run(&["codim", "--germ", "x1^2", "--relation", "z"]).status.code(), Some(2));
    assert_eq!(run(&["codim", "--germ", "x1"]).status.code(), Some(2));
}

#[test]
fn classify_example() {
    let out = ok(&["classify", "--germ", "x1^3+x1*x2+x2^2"]);
    assert!(out.contains("label: B_{3,2}^{+,+}"), "{out}");
    let json: Value =
        serde_json::from_str(&ok(&["classify", "--germ", "x1^2+x1*x2+1/3*x2^2", "--format", "json"])).unwrap();
    assert_eq!(json["label"], "B_{2,2,a}^{+,+,2}");
    assert_eq!(json["modulus"], "1/3");
    assert_eq!(json["codim_weak"], 2);
}

#[test]
fn classify_round_trips_the_catalog() {
    let doc: Value = serde_json::from_str(&ok(&["catalog"])).unwrap();
    for e in doc["entries"].as_array().unwrap() {
        let space = format!("{},{}", e["r"], e["k"]);
        let out: Value = serde_json::from_str(&ok(&[
            "classify",
            "--germ",
            e["germ"].as_str().unwrap(),
            "--space",
            &space,
            "--format",
            "json",
        ]))
        .unwrap();
        let label = e["label"].as_str().unwrap();
        assert!(out["label"] == label || out["weak_label"] == label, "{label}: {out}");
    }
}

#[test]
fn versal_example() {
    let out = ok(&["versal", "--family", "x1^2+x2^2+q1*x1+q2*x2", "--space", "2,0,2"]);
    assert!(out.contains("versal: false") && out.contains("missing {x1*x2}"), "{out}");
    let out = ok(&["versal", "--family", "x1^2+x2^2+q1*x1+q2*x2+q3*x1*x2", "--space", "2,0,3"]);
    assert!(out.contains("versal: true"), "{out}");
}

#[test]
fn caustic_svg_for_modulus_family() {
    let dir = scratch("svg");
    let svg = dir.join("b22.svg");
    let o = run(&[
        "caustic",
        "--family",
        "x1^2+x1*x2+2*x2^2+q1*x1+q2*x2",
        "--window",
        "-2:2,-2:2",
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<g id=").count(), 4);
    for label in ["Q_{∅,1}", "Q_{∅,2}", "Q_{1,{1,2}}", "Q_{2,{1,2}}"] {
        assert!(text.contains(&format!("<g id=\"{label}\"")), "{label}");
    }
    let csv = std::fs::read_to_string(dir.join("b22.csv")).unwrap();
    assert!(csv.starts_with("component,kind,q1,q2,x1,x2,residual\n"));
    let rows = csv.lines().skip(1).count();
    assert!(rows > 0);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn caustic_ply_contains_fold_sheet() {
    let dir = scratch("ply");
    let ply = dir.join("b23.ply");
    ok(&[
        "caustic",
        "--entry",
        "B_{2,3}^{+,+}",
        "--window",
        "-3.5:2,-2:2,-3:2",
        "--resolution",
        "60",
        "--out",
        ply.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&ply).unwrap();
    assert!(text.starts_with("ply\nformat ascii 1.0\n"));
    assert!(text.contains("comment component C_∅ vertices"));
    let csv = std::fs::read_to_string(dir.join("b23.csv")).unwrap();
    let near = csv
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("C_∅,"))
        .map(|l| {
            let v: Vec<f64> = l.split(',').skip(2).take(3).map(|t| t.parse().unwrap()).collect();
            (v[0] + 3.0).abs().max((v[1] - 1.5).abs()).max((v[2] + 2.75).abs())
        })
        .fold(f64::INFINITY, f64::min);
    assert!(near < 0.05, "nearest fold vertex {near}");
    for line in csv.lines().skip(1) {
        let res: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(res < 1e-9);
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn caustic_edge_cases() {
    let o = run(&["caustic", "--family", "x1^2+x1*x2+x2^2+q1*x1+q2*x2", "--window", "0:0,0:0", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "component,kind,q1,q2,x1,x2,residual\n");
    let bad = |args: &[&str]| run(args).status.code();
    assert_eq!(bad(&["caustic", "--family", "x1^2+q1*x1+q2*x2", "--resolution", "4"]), Some(2));
    assert_eq!(bad(&["caustic", "--family", "x1^2+q1*x1+q2*x2", "--window", "2:1,0:1"]), Some(2));
    assert_eq!(bad(&["caustic", "--family", "x1^2+x2^2+q1*x1", "--space", "2,0,1"]), Some(2));
    assert_eq!(bad(&["caustic", "--family", "x1^2+q1*x1+q2*x2", "--eps", "0"]), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    assert_eq!(ok(&["catalog"]), ok(&["catalog"]));
    let args = ["caustic", "--entry", "C_{3,2}^{+,+}", "--resolution", "16", "--format", "csv"];
    assert_eq!(ok(&args), ok(&args));
}

#[test]
fn tangency_examples() {
    let out = ok(&["tangency", "--case", "B223pp", "--a", "1"]);
    assert!(out.contains("not tangent"), "{out}");
    assert!(out.contains("b = 1/2*e, c = -1/2*e, d = 0, f = -1, g = 0, e free"), "{out}");
    assert!(ok(&["tangency", "--case", "B22a", "--a", "1"]).trim_end().ends_with("not tangent"));
    assert!(ok(&["tangency", "--case", "B23pp", "--control", "h0=q1^2"]).trim_end().ends_with("\ntangent"));
    let json: Value =
        serde_json::from_str(&ok(&["tangency", "--case", "C32pp", "--a", "2", "--format", "json"])).unwrap();
    assert_eq!(json["tangent"], false);
    assert_eq!(run(&["tangency", "--case", "B99"]).status.code(), Some(2));
    assert_eq!(run(&["tangency", "--case", "B22a", "--a", "1/5"]).status.code(), Some(2));
}

#[test]
fn tangency_system_csv() {
    let dir = scratch("system");
    let path = dir.join("b22a.csv");
    ok(&["tangency", "--case", "B22a", "--system-csv", path.to_str().unwrap()]);
    let csv = std::fs::read_to_string(&path).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("monomial,") && header.ends_with(",rhs"));
    assert!(csv.lines().any(|l| l.starts_with("Q1^2,")));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn oracle_reports_agreement_on_rays() {
    let out = ok(&["oracle", "--family", "x1^2+x1*x2+x2^2+q1*x1+q2*x2", "--grid", "100", "--resolution", "200"]);
    assert!(out.contains("agreement: yes"), "{out}");
}

#[test]
fn oracle_constant_away_from_rays() {
    let json: Value = serde_json::from_str(&ok(&[
        "oracle",
        "--family",
        "x1^2+x1*x2+x2^2+q1*x1+q2*x2",
        "--window",
        "0.5:2,0.5:2",
        "--grid",
        "40",
        "--format",
        "json",
    ]))
    .unwrap();
    assert_eq!(json["count_vectors"].as_array().unwrap().len(), 1);
    assert_eq!(json["agreement"]["change_cells"], 0);
}

#[test]
fn oracle_on_fold_slice() {
    let out = ok(&[
        "oracle",
        "--entry",
        "B_{2,3}^{+,+}",
        "--fix",
        "q3=-1",
        "--grid",
        "80",
        "--resolution",
        "320",
    ]);
    assert!(out.contains("agreement: yes"), "{out}");
    assert_eq!(run(&["oracle", "--entry", "B_{2,3}^{+,+}"]).status.code(), Some(2));
}

#[test]
fn figures_cover_the_catalog() {
    let dir = scratch("figures");
    let out = ok(&["figures", "--out", dir.to_str().unwrap(), "--resolution", "60", "--mesh-resolution", "12"]);
    assert_eq!(out.lines().count(), 40);
    let names: Vec<String> =
        std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert_eq!(names.iter().filter(|n| n.ends_with(".svg")).count(), 6);
    assert_eq!(names.iter().filter(|n| n.ends_with(".ply")).count(), 34);
    let _ = std::fs::remove_dir_all(&dir);
}
