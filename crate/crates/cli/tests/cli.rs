use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn brody(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brody")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = brody(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn error_of(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = brody(&all);
    let body = serde_json::from_slice(&out.stdout).expect("error is json");
    (out.status.code().expect("exit code"), body)
}

#[test]
fn two_exp_with_imaginary_lambda() {
    let v = json(&["classify", "two-exp", "--lambda", "0+1i"]);
    assert_eq!(v["status"], "NotBrody");
    assert_eq!(v["reason"], "two-exp: lambda not real");
    let zeros = v["evidence"]["zeros"].as_array().unwrap();
    let first = zeros[0]["sph"].as_f64().unwrap();
    let expected = 2f64.sqrt() * std::f64::consts::FRAC_PI_2.exp();
    assert!((first - expected).abs() < 1e-9 * expected);
}

#[test]
fn sup_of_exp() {
    let v = json(&["sup", "--expr", "exp(z)", "--radius", "20", "--budget", "100000"]);
    let m = v["max_value"].as_f64().unwrap();
    assert!((0.49..=0.5).contains(&m), "{m}");
}

#[test]
fn construct_then_check() {
    let dir = std::env::temp_dir().join(format!("brody-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("d.csv");
    let file = file.to_str().unwrap();
    let out = brody(&["divisor", "construct", "--rho", "logsq:1", "--count", "5", "--horizon", "1e9", "--out", file]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(file).unwrap().starts_with("re,im,mult\n"));
    let v = json(&["divisor", "check", "--file", file]);
    assert_eq!(v["non_realizable"], true);
    assert_eq!(v["points"], 5);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn classify_exp_rational_from_json() {
    let v = json(&["classify", "exp-rational", "--R", r#"{"num":[[1,0]],"den":[[1,0]]}"#, "--Q", r#"{"num":[[0,0],[1,0]],"den":[[1,0]]}"#]);
    assert_eq!(v["status"], "NotBrody");
    let v = json(&["classify", "exp-rational", "--R", r#"{"num":[[1,0]],"den":[[1,0]]}"#, "--Q", r#"{"num":[[0,0],[1,0]],"den":[[1,0],[2,0]]}"#]);
    assert_eq!(v["status"], "Brody");
}

#[test]
fn classify_product_counterexample() {
    let v = json(&["classify", "product", "--R", r#"{"num":[[0,0],[1,0]],"den":[[1,0]]}"#]);
    assert_eq!(v["preserves"], false);
    assert_eq!(v["counterexample"], "z*(exp(z)+1)");
    assert_eq!(v["value_at_infinity"], "inf");
}

#[test]
fn product_commands() {
    let v = json(&["product", "fprime", "--divisor", "squares:2000", "--index", "2"]);
    let m = v["modulus"].as_f64().unwrap();
    assert!((m - 1.0 / 18.0).abs() < 1e-6 / 18.0);
    let v = json(&["product", "eval", "--divisor", "squares:2000", "--z", "4"]);
    assert_eq!(v["value"][0].as_f64().unwrap(), 0.0);
    assert_eq!(v["terms_used"], 2);
}

#[test]
fn nevanlinna_of_exp() {
    let v = json(&["nevanlinna", "--expr", "exp(z)", "--radii", "5,10,20"]);
    for s in v["samples"].as_array().unwrap() {
        let r = s["r"].as_f64().unwrap();
        let t = s["T"].as_f64().unwrap();
        assert!((t - r / std::f64::consts::PI).abs() < 0.01 * r / std::f64::consts::PI);
    }
    assert!(v["order"].is_null());
}

#[test]
fn exit_codes_and_error_names() {
    let (code, body) = error_of(&["eval", "--expr", "exp(", "--z", "0"]);
    assert_eq!((code, body["error"].as_str().unwrap()), (2, "SyntaxError"));
    let (code, body) = error_of(&["experiments", "nope"]);
    assert_eq!((code, body["error"].as_str().unwrap()), (2, "UnknownExperiment"));
    let (code, body) = error_of(&["divisor", "construct", "--rho", "log:2", "--count", "3"]);
    assert_eq!((code, body["error"].as_str().unwrap()), (3, "PreconditionFailed"));
    let (code, body) = error_of(&["nevanlinna", "--expr", "z", "--radii", "1,2"]);
    assert_eq!((code, body["error"].as_str().unwrap()), (3, "ZeroAtOrigin"));
    let (code, body) = error_of(&["product", "eval", "--divisor", "squares:3", "--z", "100", "--tol", "1e-12"]);
    assert_eq!((code, body["error"].as_str().unwrap()), (3, "TolUnreachable"));
    let out = brody(&["sup", "--radius", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

fn golden(name: &str) {
    let out = brody(&["experiments", name]);
    assert!(out.status.success());
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.csv"));
    let expected = std::fs::read(path).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&expected));
}

#[test]
fn golden_case1_table() {
    golden("case1-table");
}

#[test]
fn golden_discussion_families() {
    golden("discussion-families");
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        &["--json", "experiments", "two-exp-scan"][..],
        &["--json", "experiments", "growth-theorem"][..],
        &["sup", "--expr", "exp(z)+z", "--radius", "10", "--budget", "20000"][..],
        &["--seed", "7", "experiments", "k2-divisor"][..],
    ] {
        let a = brody(args);
        let b = brody(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
