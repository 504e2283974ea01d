use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_changemaker")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn recognize_worked_example_from_graph() {
    let out = run(&["recognize", "--graph", &fixture("cm_107_5.json"), "--slope", "107/5", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["found"], true);
    assert_eq!(v["sigma"], serde_json::json!([1, 2, 4]));
    assert_eq!(v["tangle"]["slope"], "2/3");
    assert_eq!(v["tangle"]["direct_edges"], 1);
    assert!(v["tangle"]["path"].is_array());
    assert_eq!(v["reduced"]["spec"]["pq"], "43/2");
    assert!(v["reduced"]["labels"].is_array());
    assert!(v["reduced"]["marked_crossing"].is_array());
    assert_eq!(v["surgery"]["slope"], "-107/5");
}

#[test]
fn recognize_from_pd_and_planar() {
    let out = run(&["recognize", "--pd", &fixture("cm_107_5.pd"), "--slope", "107/5", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["tangle"]["slope"], "2/3");

    let out = run(&[
        "recognize",
        "--graph",
        &fixture("cm_107_5.json"),
        "--planar",
        &fixture("cm_107_5.pd"),
        "--slope",
        "107/5",
        "--verify",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let moves = v["trace"]["moves"].as_array().unwrap();
    assert!(moves.iter().any(|m| m["move"] == "flype2"));

    let out = run(&[
        "recognize",
        "--graph",
        &fixture("theta.json"),
        "--planar",
        &fixture("cm_107_5.pd"),
        "--slope",
        "107/5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn recognize_exit_codes() {
    let not_found = run(&["recognize", "--graph", &fixture("theta.json"), "--slope", "5/2"]);
    assert_eq!(not_found.status.code(), Some(1));
    let v = json(&not_found);
    assert_eq!(v["found"], false);
    assert_eq!(v["reason"]["reason"], "determinant");

    let triangle = run(&["recognize", "--graph", &fixture("triangle.json"), "--slope", "3/2"]);
    assert_eq!(triangle.status.code(), Some(1));

    let integral = run(&["recognize", "--graph", &fixture("theta.json"), "--slope", "3"]);
    assert_eq!(integral.status.code(), Some(2));
    let missing = run(&["recognize", "--graph", "/nonexistent/graph.json", "--slope", "3/2"]);
    assert_eq!(missing.status.code(), Some(2));
    let bad_pd = run(&["recognize", "--pd", &fixture("table.csv"), "--slope", "3/2"]);
    assert_eq!(bad_pd.status.code(), Some(2));
}

#[test]
fn recognize_all_and_mirror() {
    let out = run(&["recognize", "--graph", &fixture("theta.json"), "--slope", "3/2", "--all", "--mirror"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let certs = v.as_array().unwrap();
    assert!(!certs.is_empty());
    assert_eq!(certs[0]["surgery"]["slope"], "3/2");
}

#[test]
fn pretty_and_compact_agree() {
    let a = run(&["cf", "expand", "107/5"]);
    let b = run(&["--pretty", "cf", "expand", "107/5"]);
    assert_eq!(json(&a), json(&b));
    assert!(String::from_utf8_lossy(&b.stdout).lines().count() > 1);
}

#[test]
fn continued_fractions() {
    let v = json(&run(&["cf", "expand", "107/5"]));
    assert_eq!(v, serde_json::json!({"value": "107/5", "neg": [22, 2, 3], "pos": [21, 2, 2]}));
    let v = json(&run(&["cf", "eval", "--neg", "4,2,2"]));
    assert_eq!(v["value"], "10/3");
    let v = json(&run(&["cf", "convert", "--pos", "3,2,1"]));
    assert_eq!(v["neg"], serde_json::json!([4, 2, 2]));
    assert_eq!(run(&["cf", "eval", "--neg", "4,1"]).status.code(), Some(2));
}

#[test]
fn changemaker_commands() {
    let v = json(&run(&["cm", "build", "107/5", "--sigma", "1,2,4"]));
    assert_eq!(v["dim"], 7);
    assert_eq!(
        v["w"],
        serde_json::json!([[1, 2, 4, 1, 0, 0, 0], [0, 0, 0, -1, 1, 0, 0], [0, 0, 0, 0, -1, 1, 1]])
    );
    assert_eq!(v["fractional_basis"], serde_json::json!([[0, 0, 0, 1, 1, 1, 0], [0, 0, 0, 0, 0, -1, 1]]));
    let v = json(&run(&["cm", "enum", "22"]));
    assert!(v["tails"].as_array().unwrap().contains(&serde_json::json!([1, 2, 4])));
    assert_eq!(run(&["cm", "check-sigma", "1,2,4"]).status.code(), Some(0));
    assert_eq!(run(&["cm", "check-sigma", "1,3"]).status.code(), Some(1));
    assert_eq!(run(&["cm", "check-sigma", "2,1"]).status.code(), Some(2));
    assert_eq!(run(&["cm", "build", "107/5", "--sigma", "1,3"]).status.code(), Some(2));
}

#[test]
fn surgery_commands() {
    let v = json(&run(&["zcount", "--p", "7", "--q", "2", "--gtilde", "1"]));
    assert_eq!(v["z_count"], 5);
    let v = json(&run(&["slope", "--tangle", "2/3", "--mu0", "21"]));
    assert_eq!(v["slope"], "-107/5");
    let v = json(&run(&["slope", "--tangle", "2/3", "--mu0", "21", "--mirror"]));
    assert_eq!(v["slope"], "107/5");
    let v = json(&run(&["obstruct", "--p", "7", "--q", "2", "--gtilde", "3"]));
    assert_eq!(v["ok"], false);
    assert_eq!(v["hypotheses"]["z_count"], 0);
    assert_eq!(run(&["zcount", "--p", "6", "--q", "2", "--gtilde", "1"]).status.code(), Some(2));
}

#[test]
fn ingest_pd_reports_determinants() {
    for (name, det) in [("trefoil.pd", "3"), ("figure_eight.pd", "5"), ("cm_43_2.pd", "43"), ("cm_107_5.pd", "107")] {
        let v = json(&run(&["ingest-pd", "--pd", &fixture(name)]));
        assert_eq!(v["det"], det, "{name}");
        assert_eq!(v["positive_definite"], true);
    }
}

#[test]
fn scan_table() {
    let args = |jobs: &'static str| -> Vec<String> {
        ["scan", "--table", &fixture("table.csv"), "--qmax", "6", "--jobs", jobs]
            .iter()
            .map(|s| s.to_string())
            .collect()
    };
    let one = run(&args("1").iter().map(String::as_str).collect::<Vec<_>>());
    let four = run(&args("4").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let v = json(&one);
    let rows = v["rows"].as_array().unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["3_1", "4_1", "cm_43_2", "cm_107_5", "wrong_det", "broken"]);
    let hits = |i: usize| -> Vec<String> {
        rows[i]["hits"].as_array().unwrap().iter().map(|h| h["pq"].as_str().unwrap().to_string()).collect()
    };
    assert_eq!(hits(0), ["3/2"]);
    assert_eq!(rows[0]["hits"][0]["signature"], -2);
    assert!(hits(3).contains(&"107/5".to_string()));
    assert_eq!(rows[4]["status"], "flagged");
    assert_eq!(rows[5]["status"], "error");
    assert_eq!(v["totals"]["rows"], 6);
}
