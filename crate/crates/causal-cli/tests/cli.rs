//! End-to-end checks of the binary: report shapes, file round trips, and
//! exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_causal"))
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn evaluate_reports_values() {
    let out = run(&[
        "evaluate",
        "--model",
        &data("arson.json"),
        "--context",
        "U1=1,U2=1",
    ]);
    let j = stdout_json(&out);
    assert_eq!(j["values"]["B"], "1");
}

#[test]
fn weak_cause_auto_uses_tree_on_arson() {
    let out = run(&[
        "weak-cause",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1",
        "--event",
        "B=1",
        "--context",
        "U1=1,U2=1",
    ]);
    let j = stdout_json(&out);
    assert_eq!(j["decision"], true);
    assert_eq!(j["algorithm"], "tree");
}

#[test]
fn weak_cause_brute_agrees() {
    let out = run(&[
        "weak-cause",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1",
        "--event",
        "B=1",
        "--context",
        "U1=1,U2=1",
        "--algorithm",
        "brute",
        "--witness",
    ]);
    let j = stdout_json(&out);
    assert_eq!(j["decision"], true);
    assert_eq!(j["algorithm"], "brute");
    assert_eq!(j["witness"]["W"][0], "A2");
}

#[test]
fn actual_cause_pair_is_rejected() {
    let out = run(&[
        "actual-cause",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1,A2=1",
        "--event",
        "B=1",
        "--context",
        "U1=1,U2=1",
    ]);
    let j = stdout_json(&out);
    assert_eq!(j["decision"], false);
}

#[test]
fn explanation_reports_ex3() {
    let out = run(&[
        "explanation",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1,A2=1",
        "--event",
        "B=1",
        "--contexts",
        &data("arson_contexts.json"),
    ]);
    let j = stdout_json(&out);
    assert_eq!(j["is_explanation"], false);
    assert_eq!(j["failed_condition"]["condition"], "EX3");
}

#[test]
fn partial_explanation_exact_power() {
    let out = run(&[
        "partial-explanation",
        "--model",
        &data("arson.json"),
        "--cause",
        "A2=1",
        "--event",
        "B=1",
        "--contexts",
        &data("arson_contexts.json"),
        "--alpha",
        "1/1",
    ]);
    let j = stdout_json(&out);
    assert_eq!(j["explanatory_power"], "1/1");
    assert_eq!(j["is_alpha_partial"], true);
    assert_eq!(j["is_partial"], true);
}

#[test]
fn reduce_writes_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let reduced = dir.path().join("reduced.json");
    let out = run(&[
        "reduce",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1",
        "--event",
        "B=1",
        "-o",
        reduced.to_str().unwrap(),
    ]);
    let j = stdout_json(&out);
    assert_eq!(j["classification"]["A1"], "I");
    assert_eq!(j["classification"]["B"], "II");
    assert_eq!(j["classification"]["A2"], "III");
    // the reduced model is a valid model file
    let out2 = run(&[
        "evaluate",
        "--model",
        reduced.to_str().unwrap(),
        "--context",
        "U1=1,U2=0",
    ]);
    let j2 = stdout_json(&out2);
    assert_eq!(j2["values"]["B"], "1");
}

#[test]
fn detect_reports_tree_and_layering() {
    let out = run(&[
        "detect",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1",
        "--event",
        "B=1",
    ]);
    let j = stdout_json(&out);
    assert_eq!(j["tree"]["path"][0], "A1");
    assert_eq!(j["layered"]["layers"][0][0], "B");
    assert!(j["trivial_decomposition"].is_array());
}

#[test]
fn decompose_validate_natural_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let dec = dir.path().join("dec.json");
    std::fs::write(
        &dec,
        r#"[ { "T": ["B"], "S": ["B"] }, { "T": ["A1", "A2"], "S": ["A1", "A2"] } ]"#,
    )
    .unwrap();
    let out = run(&[
        "decompose-validate",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1,A2=1",
        "--event",
        "B=1",
        "--decomposition",
        dec.to_str().unwrap(),
    ]);
    let j = stdout_json(&out);
    assert_eq!(j["valid"], true);
    assert_eq!(j["max_block"], 2);
    // and the decomp algorithm accepts it
    let out2 = run(&[
        "weak-cause",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1,A2=1",
        "--event",
        "B=1",
        "--context",
        "U1=1,U2=1",
        "--algorithm",
        "decomp",
        "--decomposition",
        dec.to_str().unwrap(),
    ]);
    let j2 = stdout_json(&out2);
    assert_eq!(j2["decision"], true);
    assert_eq!(j2["algorithm"], "decomp");
}

#[test]
fn generate_then_query_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("gen.json");
    let out = run(&[
        "generate",
        "--shape",
        "layered",
        "--vars",
        "7",
        "--layer-width",
        "2",
        "--seed",
        "7",
        "-o",
        model.to_str().unwrap(),
    ]);
    let j = stdout_json(&out);
    let cause: Vec<String> = j["cause"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| format!("{}=0", v.as_str().unwrap()))
        .collect();
    let target = format!("{}=0", j["target"].as_str().unwrap());
    // determinism: generating again yields the same file
    let model2 = dir.path().join("gen2.json");
    run(&[
        "generate",
        "--shape",
        "layered",
        "--vars",
        "7",
        "--layer-width",
        "2",
        "--seed",
        "7",
        "-o",
        model2.to_str().unwrap(),
    ]);
    assert_eq!(
        std::fs::read_to_string(&model).unwrap(),
        std::fs::read_to_string(&model2).unwrap()
    );
    // a context binding every exogenous variable of the generated model
    let loaded: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    let context: Vec<String> = loaded["exogenous"]
        .as_object()
        .unwrap()
        .keys()
        .map(|k| format!("{k}=0"))
        .collect();
    let out2 = run(&[
        "weak-cause",
        "--model",
        model.to_str().unwrap(),
        "--cause",
        &cause.join(","),
        "--event",
        &target,
        "--context",
        &context.join(","),
    ]);
    let j2 = stdout_json(&out2);
    assert!(j2["decision"].is_boolean());
}

#[test]
fn exit_codes() {
    // 3: explicit algorithm not applicable
    let out = run(&[
        "weak-cause",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1,A2=1",
        "--event",
        "B=1",
        "--context",
        "U1=1,U2=1",
        "--algorithm",
        "tree",
    ]);
    assert_eq!(out.status.code(), Some(3));
    // 4: cap exceeded
    let out = run(&[
        "weak-cause",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1",
        "--event",
        "B=1",
        "--context",
        "U1=1,U2=1",
        "--algorithm",
        "brute",
        "--cap",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
    // 2: usage error from clap
    let out = run(&["weak-cause", "--model", &data("arson.json")]);
    assert_eq!(out.status.code(), Some(2));
    // 2: decomp without a decomposition file
    let out = run(&[
        "weak-cause",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1",
        "--event",
        "B=1",
        "--context",
        "U1=1,U2=1",
        "--algorithm",
        "decomp",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trace_goes_to_stderr() {
    let out = run(&[
        "weak-cause",
        "--model",
        &data("arson.json"),
        "--cause",
        "A1=1",
        "--event",
        "B=1",
        "--context",
        "U1=1,U2=1",
        "--trace",
    ]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("level"), "trace missing from stderr: {err}");
    // stdout stays a single JSON document
    let _: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
}

#[test]
fn bench_csv_has_versioned_header() {
    let out = run(&[
        "bench",
        "--k-min",
        "2",
        "--k-max",
        "3",
        "--repeats",
        "1",
        "--brute-k-max",
        "3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("schema_version,1"));
    assert!(lines.next().unwrap().starts_with("k,vars,edges"));
}
