use std::path::PathBuf;
use std::process::Command as Proc;

use serde_json::Value;

use semireg_cli::{execute, Command, Format, Options, EXIT_INVARIANT, EXIT_OK, EXIT_SCHEMA, EXIT_UNSTABLE};

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn run_json(cmd: Command, name: &str, opts: &Options) -> (i32, Value) {
    let bytes = std::fs::read(instance(name)).unwrap();
    let (code, out) = execute(cmd, &bytes, opts, Format::Json);
    (code, serde_json::from_str(&out).unwrap())
}

fn run(cmd: Command, name: &str) -> (i32, Value) {
    run_json(cmd, name, &Options::default())
}

fn binary(args: &[&str]) -> (i32, String) {
    let out = Proc::new(env!("CARGO_BIN_EXE_semireg")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn sl2_cohomology() {
    let (code, v) = run(Command::Cohomology, "sl2.json");
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["dims"], serde_json::json!([1, 0, 0, 1]));
    assert_eq!(v["format-version"], 1);
    assert_eq!(v["rationals-as-strings"], true);
}

#[test]
fn abelian_cohomology() {
    let (_, v) = run(Command::Cohomology, "abelian2.json");
    assert_eq!(v["result"]["dims"], serde_json::json!([1, 2, 1]));
}

#[test]
fn jacobi_failure_names_the_triple() {
    let (code, v) = run(Command::Cohomology, "bad-jacobi.json");
    assert_eq!(code, EXIT_INVARIANT);
    assert_eq!(v["error"]["kind"], "invariant");
    assert_eq!(v["error"]["details"]["stage"], "algebroid");
    assert!(v["error"]["details"]["message"].as_str().unwrap().to_lowercase().contains("jacobi"));
}

#[test]
fn pair_reports_agreeing_e1() {
    for name in ["aff1-pair.json", "sl2-self-pair.json", "gl2-sl2-standard.json"] {
        let (code, v) = run(Command::Pair, name);
        assert_eq!(code, EXIT_OK, "{name}");
        assert_eq!(v["result"]["e1-routes-agree"], true, "{name}");
    }
    let (code, _) = run(Command::Pair, "not-closed.json");
    assert_eq!(code, EXIT_INVARIANT);
}

#[test]
fn atiyah_reports() {
    let (code, v) = run(Command::Atiyah, "gl2-sl2-standard.json");
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["vanishes"], true);
    assert_eq!(v["result"]["witness"]["curvature-in-g2"], true);

    let (code, v) = run(Command::Atiyah, "fixture.json");
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["vanishes"], false);

    let (code, v) = run(Command::Atiyah, "line-bundle3.json");
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["model"], "two-chart");
    assert_eq!(v["result"]["class"], serde_json::json!(["3"]));
}

#[test]
fn full_subalgebra_has_no_atiyah_obstruction() {
    let (code, v) = run(Command::Atiyah, "sl2-lifts.json");
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["vanishes"], true);
}

#[test]
fn deform_tower_and_modes() {
    let (code, v) = run(Command::Deform, "abelian-h-tower.json");
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["outcome"], "obstructed");
    assert_eq!(v["result"]["first-order-bijective"], true);
    for s in v["result"]["semiregularity"].as_array().unwrap() {
        assert_eq!(s["passed"], true);
    }

    let (code, v) = run(Command::Deform, "sl2-lifts.json");
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["outcome"], "lifts");

    let (code, v) = run(Command::Deform, "exploratory.json");
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["mode"], "exploratory");
}

#[test]
fn tot_reports_and_window_instability() {
    let (code, v) = run(Command::Tot, "line-bundle-2.json");
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["cohomology"]["dims"]["1"], 1);

    let (code, v) = run(Command::Tot, "de-rham.json");
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["cohomology"]["dims"], serde_json::json!({"0": 1, "2": 1}));

    let narrow = Options { window: Some((0, 1)), ..Options::default() };
    let (code, v) = run_json(Command::Tot, "line-bundle3.json", &narrow);
    assert_eq!(code, EXIT_UNSTABLE);
    assert_eq!(v["error"]["kind"], "unstable");
    assert!(v["error"]["details"]["suggested-window"].is_string());
}

#[test]
fn schema_errors() {
    let opts = Options::default();
    for bad in [
        &b"not json"[..],
        br#"{"format-version": 2, "rationals-as-strings": true}"#,
        br#"{"format-version": 1, "rationals-as-strings": false}"#,
        br#"{"format-version": 1, "rationals-as-strings": true, "surprise": 1}"#,
        br#"{"format-version": 1, "rationals-as-strings": true, "algebroid": {"basis": ["x"], "brackets": [{"left": "x", "right": "y", "value": {}}]}}"#,
        br#"{"format-version": 1, "rationals-as-strings": true, "algebroid": {"basis": ["x", "y"], "brackets": [{"left": "x", "right": "y", "value": {"x": "1/0"}}]}}"#,
    ] {
        let (code, out) = execute(Command::Cohomology, bad, &opts, Format::Json);
        assert_eq!(code, EXIT_SCHEMA, "{out}");
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["error"]["kind"], "schema");
    }
    let (code, _) = execute(Command::Tot, br#"{"format-version": 1, "rationals-as-strings": true}"#, &opts, Format::Text);
    assert_eq!(code, EXIT_SCHEMA);
}

#[test]
fn binary_exit_codes() {
    let path = |n: &str| instance(n).to_string_lossy().into_owned();
    assert_eq!(binary(&["cohomology", "--input", &path("sl2.json")]).0, EXIT_OK);
    assert_eq!(binary(&["cohomology", "--input", &path("bad-jacobi.json")]).0, EXIT_INVARIANT);
    assert_eq!(binary(&["tot", "--input", &path("line-bundle3.json"), "--window", "0:1"]).0, EXIT_UNSTABLE);
    assert_eq!(binary(&["tot", "--input", &path("sl2.json")]).0, EXIT_SCHEMA);
    assert_eq!(binary(&["tot", "--input", "/nonexistent/file.json"]).0, EXIT_SCHEMA);
}

#[test]
fn output_is_deterministic() {
    let path = instance("fixture.json").to_string_lossy().into_owned();
    for format in ["json", "text"] {
        let a = binary(&["atiyah", "--input", &path, "--format", format]);
        let b = binary(&["atiyah", "--input", &path, "--format", format]);
        assert_eq!(a, b);
    }
    let tot = instance("line-bundle0.json").to_string_lossy().into_owned();
    let a = binary(&["tot", "--input", &tot, "--format", "json", "--seed", "7"]);
    let b = binary(&["tot", "--input", &tot, "--format", "json", "--seed", "7"]);
    assert_eq!(a, b);
}

#[test]
fn input_digest_is_sha256_of_bytes() {
    let bytes = std::fs::read(instance("sl2.json")).unwrap();
    let (_, out) = execute(Command::Cohomology, &bytes, &Options::default(), Format::Json);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["input-digest"], semireg_cli::digest(&bytes));
    assert_eq!(semireg_cli::digest(b"").len(), 64);
}
