use std::process::Command;

use dormant_degree::run;
use serde_json::Value;

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dormant-degree"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn count_example() {
    let (code, stdout, _) = bin(&["count", "--graph", "chain:3", "--p", "5", "--level", "2", "--stable"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(
        doc,
        serde_json::json!({
            "graph": "chain:3", "p": 5, "N": 2, "count": "11775", "method": "dp", "elapsed_ms": 0
        })
    );
}

#[test]
fn stable_output_is_byte_identical() {
    let args = ["count", "--graph", "k4", "--p", "5", "--level", "2", "--stable"];
    assert_eq!(bin(&args).1, bin(&args).1);
}

#[test]
fn usage_errors_exit_two() {
    let (code, stdout, stderr) = bin(&["count", "--graph", "theta", "--p", "-1"]);
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    assert!(!stderr.is_empty());
    assert_eq!(run(["dormant-degree", "count", "--p", "3"]).code, 2);
    assert_eq!(run(["dormant-degree", "frobnicate"]).code, 2);
}

#[test]
fn compute_errors_exit_one() {
    let out = run(["dormant-degree", "count", "--graph", "nosuch", "--p", "3"]);
    assert_eq!(out.code, 1);
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    assert!(doc["error"].is_string());

    let out = run(["dormant-degree", "degree", "pi1", "--genus", "2", "--p", "4"]);
    assert_eq!(out.code, 1);

    let out = run([
        "dormant-degree", "count", "--graph", "chain:3", "--p", "25", "--level", "2",
        "--memcap", "1000",
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("error"));
}

#[test]
fn auto_method_prefers_brute_for_small_searches() {
    let small = run(["dormant-degree", "count", "--graph", "theta", "--p", "3", "--stable"]);
    let doc: Value = serde_json::from_str(&small.stdout).unwrap();
    assert_eq!(doc["method"], "brute");
    assert_eq!(doc["count"], run_count("theta", "3", "dp"));
    let large = run(["dormant-degree", "count", "--graph", "k4", "--p", "7", "--level", "2"]);
    let doc: Value = serde_json::from_str(&large.stdout).unwrap();
    assert_eq!(doc["method"], "dp");
}

fn run_count(graph: &str, p: &str, method: &str) -> Value {
    let out = run(["dormant-degree", "count", "--graph", graph, "--p", p, "--method", method]);
    serde_json::from_str::<Value>(&out.stdout).unwrap()["count"].clone()
}

#[test]
fn degree_subcommands() {
    let doc = |args: &[&str]| -> Value {
        let mut argv = vec!["dormant-degree"];
        argv.extend_from_slice(args);
        let out = run(argv);
        assert_eq!(out.code, 0, "{}", out.stderr);
        serde_json::from_str(&out.stdout).unwrap()
    };
    assert_eq!(doc(&["degree", "ver", "--genus", "2", "--p", "3"])["value"], "11");
    assert_eq!(doc(&["degree", "pi1", "--genus", "3", "--p", "5"])["value"], "15");
    assert_eq!(doc(&["degree", "pi-n", "--genus", "3", "--p", "3", "--level", "4"])["value"], "117649");
    let ver4 = doc(&["degree", "ver", "--genus", "4", "--p", "3"]);
    assert_eq!(ver4["method"], "count_ratio");
}

#[test]
fn graph_file_round_trip() {
    let out = run(["dormant-degree", "catalog", "--name", "k4"]);
    assert_eq!(out.code, 0);
    let path = std::env::temp_dir().join(format!("k4-{}.json", std::process::id()));
    std::fs::write(&path, &out.stdout).unwrap();
    let from_file = run_count(path.to_str().unwrap(), "5", "dp");
    std::fs::remove_file(&path).unwrap();
    assert_eq!(from_file, run_count("k4", "5", "dp"));
}

#[test]
fn catalog_listing() {
    let out = run(["dormant-degree", "catalog", "--generate", "3"]);
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["graphs"].as_array().unwrap().len(), 5);
}

#[test]
fn fit_subcommand_reports_prediction() {
    let out = run([
        "dormant-degree", "fit", "--quantity", "h", "--genus", "2", "--pmax", "30",
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["period"], 2);
    assert_eq!(doc["leading"][1], "1/24");
    assert_eq!(doc["predicted_leading"], "1/24");
    let bad = run(["dormant-degree", "fit", "--quantity", "h", "--genus", "2", "--period", "3"]);
    assert_eq!(bad.code, 1);
}
