use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn maps_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples/maps")
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spectra-lab"));
    cmd.args(args).current_dir(maps_dir()).env_remove("SPECLAB_BUDGET_MB");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn spectra-lab")
}

fn run(args: &[&str]) -> (i32, Option<Value>) {
    let out = run_env(args, &[]);
    let v = if out.stdout.is_empty() { None } else { Some(serde_json::from_slice(&out.stdout).unwrap()) };
    (out.status.code().unwrap(), v)
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn strip_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing_ms");
    v
}

#[test]
fn spectrum_z2_plus_1_period_1() {
    let (code, r) = run(&["spectrum", "--map", "z2_plus_1.json", "--period", "1"]);
    assert_eq!(code, 0);
    let r = r.unwrap();
    let classes = r["result"]["classes"].as_array().unwrap();
    let minpolys: Vec<&Value> = classes.iter().map(|c| &c["minpoly"]).collect();
    assert_eq!(minpolys, [&serde_json::json!(["0", "1"]), &serde_json::json!(["4", "-2", "1"])]);
    assert_eq!(floats(&r["result"]["lengths"]), [0.0, 2.0, 2.0]);
    assert_eq!(floats(&r["result"]["repelling"]), [2.0, 2.0]);
}

#[test]
fn spectrum_z2_period_3_has_seven_eights() {
    let (code, r) = run(&["spectrum", "--map", "z2.json", "--period", "3"]);
    assert_eq!(code, 0);
    let lengths = floats(&r.unwrap()["result"]["lengths"]);
    assert_eq!(lengths.len(), 9);
    assert_eq!(lengths.iter().filter(|&&l| (l - 8.0).abs() < 1e-12).count(), 7);
}

#[test]
fn report_layout_is_canonical() {
    let out = run_env(&["rank", "--map", "z2_plus_1.json", "--max-period", "3"], &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["command", "map", "params", "result", "timing_ms", "version"]);
    assert_eq!(v["result"]["dims"], serde_json::json!([1, 1, 2]));
    assert_eq!(v["version"]["schema"], 1);
    // Re-serializing the parsed report reproduces the output byte for byte.
    assert_eq!(text.trim_end(), serde_json::to_string_pretty(&v).unwrap());
}

#[test]
fn rank_examples() {
    let (_, r) = run(&["rank", "--map", "z2.json", "--max-period", "6"]);
    assert_eq!(r.unwrap()["result"]["dims"], serde_json::json!([1, 1, 1, 1, 1, 1]));
    let (_, r) = run(&["rank", "--map", "z2_minus_1.json", "--max-period", "4"]);
    assert!(r.unwrap()["result"]["dims"].as_array().unwrap().iter().all(|d| d.as_u64().unwrap() <= 1));
}

#[test]
fn invalid_inputs_exit_2() {
    assert_eq!(run(&["spectrum", "--map", "z2_plus_1.json", "--period", "0"]).0, 2);
    assert_eq!(run(&["sieve", "--map", "z2.json", "--prime-min", "2", "--prime-max", "50"]).0, 2);
    assert_eq!(run(&["sieve", "--map", "z2_plus_1.json", "--prime-min", "50", "--prime-max", "2"]).0, 2);
    assert_eq!(run(&["rank", "--map", "missing.json", "--max-period", "2"]).0, 2);
    assert_eq!(run(&["rank", "--map", "z2.json"]).0, 2);
    assert_eq!(run(&["equidist", "--map", "z2.json", "--period", "2", "--fn", "bogus", "--samples", "10", "--seed", "1"]).0, 2);
    // Stochastic commands refuse to run without a seed.
    assert_eq!(run(&["lyapunov", "--map", "z2.json", "--samples", "10"]).0, 2);
    let out = run_env(&["rank", "--map", "z2.json", "--max-period", "2"], &[("SPECLAB_BUDGET_MB", "lots")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_documents_exit_2() {
    let dir = std::env::temp_dir().join(format!("spectra-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cases = [
        r#"{"num": ["1/0"], "den": ["1"]}"#,
        r#"{"num": ["x"], "den": ["1"]}"#,
        r#"{"num": ["0", "1"], "den": ["1"]}"#,
        r#"{"num": ["0", "0", "1"], "den": ["0", "0", "1"]}"#,
        r#"{"num": ["1"], "den": ["1"], "extra": 1}"#,
        "not json",
    ];
    for (i, text) in cases.iter().enumerate() {
        let path = dir.join(format!("m{i}.json"));
        std::fs::write(&path, text).unwrap();
        let code = run(&["rank", "--map", path.to_str().unwrap(), "--max-period", "1"]).0;
        assert_eq!(code, 2, "{text}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn certify_examples() {
    let (code, r) = run(&["certify", "--map", "z2.json", "--target-dim", "2", "--prime-max", "100", "--max-period", "4"]);
    assert_eq!(code, 3);
    assert_eq!(r.unwrap()["result"]["achieved_dim"], 1);
    let (code, r) = run(&["certify", "--map", "z2_plus_1.json", "--target-dim", "1", "--prime-max", "100", "--max-period", "4"]);
    assert_eq!(code, 0);
    let r = r.unwrap();
    assert_eq!(r["result"]["certificate"]["rows"].as_array().unwrap().len(), 1);
    // The phi matrix is printed exactly.
    assert!(r["result"]["certificate"]["phi_matrix"][0][0].is_string());
}

#[test]
fn sieve_is_deterministic_across_jobs() {
    let base = ["sieve", "--map", "z2_plus_1.json", "--prime-min", "2", "--prime-max", "200"];
    let (c1, r1) = run(&base);
    let (c3, r3) = run(&[&base[..], &["--jobs", "3"]].concat());
    assert_eq!((c1, c3), (0, 0));
    assert_eq!(r1.unwrap()["result"], r3.unwrap()["result"]);
}

#[test]
fn reruns_reproduce_results() {
    for args in [
        vec!["lyapunov", "--map", "lattes.json", "--samples", "2000", "--seed", "7"],
        vec!["equidist", "--map", "z2_minus_tenth.json", "--period", "5", "--fn", "coord3", "--samples", "2000", "--seed", "3"],
        vec!["pcf", "--map", "z2_plus_1.json", "--steps", "20"],
    ] {
        let (c1, a) = run(&args);
        let (c2, b) = run(&args);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(strip_timing(a.unwrap()), strip_timing(b.unwrap()));
    }
}

#[test]
fn oversized_periods_exit_3() {
    // 2^10 + 1 fixed points exceed the default factoring degree cap.
    let out = run_env(&["spectrum", "--map", "z2_plus_1.json", "--period", "10"], &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["category"], "budget_exceeded");
}

#[test]
fn budget_env_is_recorded() {
    let out = run_env(&["rank", "--map", "z2.json", "--max-period", "2"], &[("SPECLAB_BUDGET_MB", "2")]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["params"]["budget"]["coeff_bytes"], 2 << 20);
}

#[test]
fn pcf_z2_minus_1() {
    let (code, r) = run(&["pcf", "--map", "z2_minus_1.json"]);
    assert_eq!(code, 0);
    let r = r.unwrap();
    assert_eq!(r["result"]["verdict"], "PCF");
    assert_eq!(r["params"]["step_budget"], 64);
}
