use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn nwheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nwheat")).args(args).output().expect("spawn nwheat")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn eval_u1_at_origin_is_exact_zero() {
    let out = nwheat(&["eval", "--solution", "u1", "--x", "0", "--t", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["results"][0]["value"]["mid"], "0");
    assert_eq!(v["results"][0]["value"]["rad"], "0");
    assert_eq!(v["certified"], true);
}

#[test]
fn first_derivative_at_origin() {
    let out = nwheat(&["derivative", "--solution", "u1", "--x0", "0", "--t0", "0", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let mid: f64 = v["results"][0]["value"]["mid"].as_str().unwrap().parse().unwrap();
    assert!((mid - 1.7117795447393093).abs() < 1e-15);
}

#[test]
fn proof_replay_passes_from_n0() {
    let out = nwheat(&["proof-replay", "--solution", "u1", "--x0", "0", "--rows", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["results"][0]["N0"], 6);
    assert_eq!(v["results"][0]["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn envelope_constants_for_half() {
    let out = nwheat(&["envelope", "--eps", "0.5", "--check", "--nx", "9", "--nt", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let cert = &v["results"][0]["certificate"];
    let b2: f64 = cert["B2"]["mid"].as_str().unwrap().parse().unwrap();
    let b3: f64 = cert["B3"]["mid"].as_str().unwrap().parse().unwrap();
    assert!((b2 - 1.1964779).abs() < 1e-6);
    assert!((b3 - 1.0065373).abs() < 1e-6);
    assert_eq!(v["results"][1]["check"]["verdict"], "pass");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["eval", "--solution", "weps", "--x", "0", "--t", "0"][..],
        &["eval", "--solution", "u1", "--eps", "1/2", "--x", "0", "--t", "0"],
        &["eval", "--solution", "u1", "--x", "zero", "--t", "0"],
        &["envelope", "--eps", "3/2"],
        &["frobnicate"],
        &["--prec", "8", "eval", "--solution", "u1", "--x", "0", "--t", "0"],
    ] {
        let out = nwheat(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).starts_with("ERROR 2:"), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn help_goes_to_stdout() {
    let out = nwheat(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("proof-replay"));
}

#[test]
fn random_eval_is_deterministic_across_modes() {
    let args = ["eval", "--solution", "u2", "--random", "6", "--seed", "7", "--format", "csv"];
    let a = nwheat(&args);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    let b = nwheat(&seq);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 7);
}

#[test]
fn taylor_csv_plots() {
    let csv = scratch("taylor.csv");
    let svg = scratch("taylor.svg");
    let out = nwheat(&[
        "taylor", "--solution", "weps", "--eps", "1/2", "--x0", "0", "--t0", "1", "--nmax", "6", "--format", "csv", "-o",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("N,m,n,log10_root,log10_floor"));
    let out = nwheat(&["plot", "--input", csv.to_str().unwrap(), "-o", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let svg = std::fs::read_to_string(&svg).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("<circle"));
}

#[test]
fn plot_rejects_unknown_csv() {
    let csv = scratch("other.csv");
    std::fs::write(&csv, "a,b\n1,2\n").unwrap();
    let out = nwheat(&["plot", "--input", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn residual_within_budget() {
    let out = nwheat(&["residual", "--solution", "u1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["results"][0]["stencil_clear"], true);
}
