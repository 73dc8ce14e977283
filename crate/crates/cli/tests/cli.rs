use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn impsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_impsel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = impsel(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("a single JSON document")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const STAR5: &str = "# star into vertex 1\nn 5\ne 2 1\ne 3 1\ne 4 1\ne 5 1\n";

#[test]
fn run_on_star() {
    let dir = tempfile::tempdir().unwrap();
    let star = write(dir.path(), "star5.g", STAR5);
    let doc = json(&["run", "--graph", star.to_str().unwrap(), "--T", "3", "--t", "2", "--json"]);
    assert_eq!(doc["selected"], serde_json::json!([1]));
    assert_eq!(doc["gap"], 0);
    assert_eq!(doc["selected_indegree"], 4);
    assert_eq!(doc["max_indegree"], 4);
    assert!(doc.get("trace").is_none());

    let doc = json(&["run", "--graph", star.to_str().unwrap(), "--T", "3", "--t", "2", "--json", "--trace"]);
    assert_eq!(doc["trace"], serde_json::json!([{ "i": 0, "v": 1, "dstar": 4 }]));
    assert_eq!(doc["final_degrees"], serde_json::json!([4, 0, 0, 0, 0]));

    let doc = json(&["run", "--graph", star.to_str().unwrap(), "--mechanism", "never", "--json"]);
    assert_eq!(doc["selected"], serde_json::json!([]));
    assert_eq!(doc["gap"], 4);
}

#[test]
fn plan_outdegree_one() {
    let doc = json(&["plan", "--n", "100", "--k", "1", "--json"]);
    assert_eq!((doc["t"].as_u64(), doc["T"].as_u64(), doc["alpha"].as_u64()), (Some(10), Some(16), Some(24)));
    assert_eq!(doc["certified"], true);

    let doc = json(&["plan", "--n", "5", "--k", "1", "--T", "4", "--t", "1", "--json"]);
    assert_eq!((doc["condition_lhs"].as_u64(), doc["condition_rhs"].as_u64()), (Some(14), Some(7)));
    assert_eq!(doc["certified"], true);
}

#[test]
fn certificate_for_three() {
    let doc = json(&["partitions", "--n", "3", "--certificate", "--json"]);
    assert_eq!(doc["certificate"]["rhs_total"], -1);
    assert_eq!(doc["certificate"]["cancellation_ok"], true);
    let multipliers: Vec<i64> = doc["compositions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["multiplier"].as_i64().unwrap())
        .collect();
    assert_eq!(multipliers, vec![-6, 3, 3, -1]);
    assert_eq!(doc["fubini"], 13);
}

#[test]
fn audit_exit_codes() {
    let clean = impsel(&["audit", "impartiality", "--mechanism", "twin:4,1", "--n", "5", "--k", "1", "--exhaustive"]);
    assert_eq!(clean.status.code(), Some(0));
    let dirty = impsel(&["audit", "impartiality", "--mechanism", "max-naive", "--n", "4", "--k", "1", "--exhaustive"]);
    assert_eq!(dirty.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(
        &impsel(&["audit", "impartiality", "--mechanism", "max-naive", "--n", "4", "--k", "1", "--exhaustive", "--json"])
            .stdout,
    )
    .unwrap();
    assert_eq!(doc["violation_count"], 194);
    assert_eq!(doc["violations"].as_array().unwrap().len(), 10);
}

#[test]
fn usage_and_input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let looped = write(dir.path(), "loop.g", "n 3\ne 1 1\n");
    let out = impsel(&["run", "--graph", looped.to_str().unwrap(), "--T", "2", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let no_seed = impsel(&["audit", "impartiality", "--mechanism", "never", "--n", "4", "--samples", "5"]);
    assert_eq!(no_seed.status.code(), Some(2));
    let both = impsel(&["audit", "gap", "--mechanism", "never", "--n", "4", "--exhaustive", "--samples", "5"]);
    assert_eq!(both.status.code(), Some(2));
    let neither = impsel(&["audit", "gap", "--mechanism", "never", "--n", "4"]);
    assert_eq!(neither.status.code(), Some(2));
    let bad_mechanism = impsel(&["audit", "gap", "--mechanism", "best", "--n", "4", "--exhaustive"]);
    assert_eq!(bad_mechanism.status.code(), Some(2));
    let over_cap = impsel(&["audit", "gap", "--mechanism", "never", "--n", "6", "--exhaustive", "--cap", "1000"]);
    assert_eq!(over_cap.status.code(), Some(2));
}

#[test]
fn output_is_independent_of_jobs_and_repeatable() {
    let base = ["audit", "impartiality", "--mechanism", "naive-iter:2", "--n", "6", "--k", "1", "--json"];
    let run = |extra: &[&str]| {
        let mut args = base.to_vec();
        args.extend_from_slice(extra);
        impsel(&args).stdout
    };
    let exhaustive = run(&["--exhaustive", "--jobs", "1"]);
    assert_eq!(exhaustive, run(&["--exhaustive", "--jobs", "4"]));
    assert_eq!(exhaustive, run(&["--exhaustive"]));
    let sampled = run(&["--samples", "200", "--seed", "17", "--jobs", "1"]);
    assert_eq!(sampled, run(&["--samples", "200", "--seed", "17", "--jobs", "3"]));

    let gap = ["audit", "gap", "--mechanism", "majority", "--n", "9", "--k", "2", "--samples", "300", "--seed", "5"];
    let mut one = gap.to_vec();
    one.extend(["--jobs", "1"]);
    let mut many = gap.to_vec();
    many.extend(["--jobs", "4"]);
    assert_eq!(impsel(&one).stdout, impsel(&many).stdout);
}

#[test]
fn trace_audits() {
    let doc = json(&["audit", "trace", "--n", "30", "--k", "2", "--samples", "200", "--seed", "1", "--json"]);
    assert_eq!(doc["failures"], 0);
    assert_eq!((doc["T"].as_u64(), doc["t"].as_u64()), (Some(19), Some(3)));

    let dir = tempfile::tempdir().unwrap();
    let star = write(dir.path(), "star5.g", STAR5);
    let doc = json(&["audit", "trace", "--graph", star.to_str().unwrap(), "--T", "3", "--t", "2", "--json"]);
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn reductions_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let edge = write(dir.path(), "edge.g", "n 2\ne 1 2\n");
    let out = dir.path().join("padded.g");
    let status = impsel(&["reduce", "inneighbors", "--graph", edge.to_str().unwrap(), "--n", "4", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap(), "n 4\ne 1 2\ne 2 3\ne 3 1\ne 3 2\ne 4 1\ne 4 2\n");

    let isolated = impsel(&["reduce", "isolated", "--graph", edge.to_str().unwrap(), "--n", "4"]);
    assert_eq!(String::from_utf8(isolated.stdout).unwrap(), "n 4\ne 1 2\n");

    let empty = write(dir.path(), "empty.g", "n 3\n");
    let refused = impsel(&["reduce", "inneighbors", "--graph", empty.to_str().unwrap(), "--n", "5"]);
    assert_eq!(refused.status.code(), Some(2));
}

#[test]
fn symmetrization_audit() {
    let doc = json(&["audit", "symmetrize", "--mechanism", "follow:1", "--n", "3", "--json"]);
    assert_eq!(doc["symmetric"], true);
    assert_eq!(doc["symmetrized_impartial"], true);
}
