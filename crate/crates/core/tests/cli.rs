use std::process::Command;

use rho_calc::cli::{run, Outcome, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn call(args: &str) -> Outcome {
    run(std::iter::once("rho-calc").chain(args.split_whitespace()), None)
}

fn json(args: &str) -> Value {
    let out = call(&format!("{args} --json"));
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

#[test]
fn hyperbolic_rho_document() {
    let doc = json("rho torus --matrix -2,1,1,-1 --nu 1/5,3/5");
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["results"][0]["exact"], "-2/5");
    assert_eq!(doc["results"][0]["branch"], "hyperbolic");
    assert_eq!(doc["results"][1]["name"], "chern-simons");
    assert_eq!(doc["inputs"]["matrix"], serde_json::json!([-2, 1, 1, -1]));
}

#[test]
fn trivial_circle_bundle() {
    let doc = json("rho circle --degree 0 --chern 3");
    assert_eq!(doc["results"][0]["exact"], "0/1");
}

#[test]
fn kronecker_verification() {
    let doc = json("verify kronecker --sigma 0,1 --nu 1/2,1/2");
    assert!(doc["diagnostics"]["achieved_tolerance"].as_f64().unwrap() < 1e-6);
}

#[test]
fn json_is_byte_stable() {
    let a = call("rho torus --matrix 3,2,4,3 --enumerate --json");
    let b = call("rho torus --matrix 3,2,4,3 --enumerate --json");
    assert_eq!(a, b);
    let doc: Value = serde_json::from_str(&a.stdout).unwrap();
    let names: Vec<_> = doc["results"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap().to_string()).collect();
    assert_eq!(names[0], "rho nu=(0/1,1/2)");
    assert_eq!(names.len(), 6);
}

#[test]
fn moduli_lists_every_class() {
    let doc = json("moduli torus --matrix -2,1,1,-1");
    assert_eq!(doc["results"].as_array().unwrap().len(), 5);
    let doc = json("moduli torus --matrix 1,3,0,1");
    assert_eq!(doc["results"][1]["branch"], "family");
}

#[test]
fn dedekind_commands() {
    assert_eq!(json("dedekind classic --a 3 --c 4")["results"][0]["exact"], "-1/8");
    assert_eq!(json("dedekind general --a 3 --c 4 --x 1/2 --y 1/2")["results"][0]["exact"], "-5/16");
    assert_eq!(json("eta torus --matrix 0,-1,1,1")["results"][0]["exact"], "-4/3");
}

#[test]
fn verification_suites_pass() {
    for args in [
        "verify eta-transform --matrix 2,1,3,2 --sigma 0.2,0.9",
        "verify eta-transform-gen --matrix 2,1,1,1 --g 1/3 --h 1/5 --sigma 0.1,1.1",
        "verify two-path --matrix 5,2,7,3",
        "verify parabolic-circle --degree -7 --chern 3",
    ] {
        let out = call(args);
        assert_eq!(out.code, EXIT_OK, "{args}: {}", out.stderr);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(call("rho torus --matrix 1,2,3,4 --nu 1/2,0").code, EXIT_DOMAIN);
    assert_eq!(call("rho torus --matrix 2,1,1,1 --nu 1/3,0").code, EXIT_DOMAIN);
    assert_eq!(call("rho torus --matrix 2,1,1,1 --nu 0,0").code, EXIT_DOMAIN);
    assert_eq!(call("rho torus --matrix 1,2,3").code, EXIT_USAGE);
    assert_eq!(call("rho torus --matrix 2,1,1,1 --nu x").code, EXIT_USAGE);
    assert_eq!(call("frobnicate").code, EXIT_USAGE);
    assert_eq!(call("--help").code, EXIT_OK);
    // a budget this small cannot reach the tail tolerance
    assert_eq!(call("verify kronecker --sigma 0,1 --nu 1/3,1/2 --max-terms 2").code, EXIT_NUMERIC);
}

#[test]
fn tolerance_precedence() {
    let args = ["rho-calc", "verify", "kronecker", "--sigma", "0,1", "--nu", "1/2,0"];
    assert_eq!(run(args, Some("bogus".into())).code, EXIT_USAGE);
    assert_eq!(run(args, Some("1e-8".into())).code, EXIT_OK);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--quad-tol", "1e-10"]);
    assert_eq!(run(with_flag, Some("-1".into())).code, EXIT_OK);
    let mut zero = args.to_vec();
    zero.extend(["--quad-tol", "0"]);
    assert_eq!(run(zero, None).code, EXIT_USAGE);
}

#[test]
fn binary_round_trip() {
    let out = Command::new(env!("CARGO_BIN_EXE_rho-calc"))
        .args(["rho", "circle", "--degree", "5", "--chern", "2", "--json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["results"][0]["exact"], "-7/5");
    let out = Command::new(env!("CARGO_BIN_EXE_rho-calc"))
        .args(["dedekind", "classic", "--a", "2", "--c", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_DOMAIN));
}
