use std::process::{Command, Output};

use serde_json::Value;

fn twoway(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoway")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn as_f64(v: &Value) -> f64 {
    v.as_f64()
        .or_else(|| v.as_str().and_then(|s| s.parse().ok()))
        .unwrap_or_else(|| panic!("not a float: {v}"))
}

#[test]
fn default_mode_enumerates_sixteen_branches_per_pair() {
    let out = twoway(&["--d1", "2", "--d2", "2", "--d", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["mode"], "enumerate");
    assert_eq!(report["summary"]["passed"], true);
    let trials = report["trials"].as_array().unwrap();
    assert_eq!(trials.len() % 16, 0);
    for t in trials {
        assert!(as_f64(&t["fidelity_alpha"]) > 1.0 - 1e-9);
        assert!(as_f64(&t["fidelity_beta"]) > 1.0 - 1e-9);
    }
}

#[test]
fn top_level_keys_are_sorted() {
    let out = twoway(&["--d1", "1", "--d2", "1", "--d", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let positions: Vec<usize> = ["\"config\"", "\"mode\"", "\"seed\"", "\"summary\"", "\"trials\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn trivial_config_has_one_leaf_per_pair_with_unit_fidelity() {
    let out = twoway(&["--d1", "1", "--d2", "1", "--d", "1"]);
    let report = json(&out);
    let cert = &report["summary"]["certificates"][0];
    assert_eq!(cert["leaves_per_pair"], 1);
    assert!((as_f64(&cert["min_fidelity"]) - 1.0).abs() < 1e-12);
}

#[test]
fn dimension_gate_exits_with_usage_code() {
    for dims in [["2", "2", "3"], ["3", "3", "8"], ["2", "4", "7"]] {
        let out = twoway(&["--d1", dims[0], "--d2", dims[1], "--d", dims[2]]);
        assert_eq!(out.status.code(), Some(2));
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains("d1*d2 <= d"), "{err}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn malformed_arguments_exit_with_usage_code() {
    for args in [
        vec!["--d1", "x", "--d2", "1", "--d", "1"],
        vec!["--frobnicate"],
        vec!["--d1", "1", "--d2", "1"],
        vec![
            "--mode", "sample", "--trials", "0", "--d1", "1", "--d2", "1", "--d", "1",
        ],
        vec!["--mode", "nope"],
    ] {
        assert_eq!(twoway(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sample_mode_is_deterministic() {
    let args = [
        "--mode", "sample", "--trials", "10", "--seed", "7", "--d1", "2", "--d2", "3", "--d", "7",
    ];
    let a = twoway(&args);
    let b = twoway(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report = json(&a);
    let trials = report["trials"].as_array().unwrap();
    assert_eq!(trials.len(), 10);
    for (i, t) in trials.iter().enumerate() {
        assert_eq!(t["trial_id"], i as u64);
        assert_eq!(t["sampled"], true);
        assert!(as_f64(&t["fidelity_alpha"]) > 1.0 - 1e-9);
    }
    let other = twoway(&[
        "--mode", "sample", "--trials", "10", "--seed", "8", "--d1", "2", "--d2", "3", "--d", "7",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn csv_has_fixed_columns() {
    let out = twoway(&["--d1", "2", "--d2", "1", "--d", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "trial_id",
            "k",
            "k1",
            "k2",
            "m1",
            "m2",
            "probability",
            "fidelity_alpha",
            "fidelity_beta"
        ]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert!(!rows.is_empty());
    for row in &rows {
        assert!(row[1].parse::<usize>().unwrap() < 3);
        assert_eq!(&row[3], "0");
        assert!(row[7].parse::<f64>().unwrap() > 1.0 - 1e-9);
    }
}

#[test]
fn untailored_csv_marks_missing_k() {
    let out = twoway(&["--d1", "2", "--d2", "2", "--d", "4", "--format", "csv"]);
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert!(reader.records().map(Result::unwrap).all(|r| &r[1] == "-1"));
}

#[test]
fn writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = twoway(&["--d1", "1", "--d2", "2", "--d", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["config"]["d"], 2);
}

#[test]
fn unwritable_output_exits_with_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("report.json");
    let out = twoway(&["--d1", "1", "--d2", "1", "--d", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}
