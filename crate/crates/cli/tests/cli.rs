use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lelong::eval::{eval, EvalOptions};
use lelong::json::{parse_expr_file, parse_expr_str};
use lelong::make_phi_k;
use num_complex::Complex64;
use serde_json::Value;

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lelong-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, file: &str, text: &str) -> PathBuf {
    let p = dir.join(file);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lelong")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

const MONO_21: &str = r#"{"tag":"monomial_log","coeff":"1/1","exponents":["2/1","1/1"]}"#;
const RADIAL_NU2: &str = r#"{"tag":"radial","arity":1,"limiting_slope":"2/1"}"#;

#[test]
fn lct_of_a_monomial() {
    let dir = workdir("lct");
    let expr = write(&dir, "monomial-21.json", MONO_21);
    let csv = dir.join("fit.csv");
    let out = run(&[
        "lct",
        "--expr",
        expr.to_str().unwrap(),
        "--samples",
        "512",
        "--no-timestamp",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let res = &r["results"][0];
    assert_eq!(res["exact"]["value"]["value"], "1/2");
    assert_eq!(res["exact"]["method"], "lp");
    let lo = res["numeric"]["value"]["lo"].as_f64().unwrap();
    let hi = res["numeric"]["value"]["hi"].as_f64().unwrap();
    assert!(lo <= 0.5 && 0.5 <= hi, "[{lo}, {hi}]");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("j,radius,I_hat,stderr,used_in_fit"));
    assert!(text.lines().count() > 5);
}

#[test]
fn lelong_at_several_points() {
    let dir = workdir("lelong");
    let expr = write(&dir, "m.json", MONO_21);
    let out = run(&[
        "lelong",
        "--expr",
        expr.to_str().unwrap(),
        "--point",
        "0,0",
        "--point",
        "0:0.5,0",
        "--samples",
        "512",
        "--no-timestamp",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"][0]["exact"]["value"]["value"], "3/1");
    assert_eq!(r["results"][1]["exact"]["value"]["value"], "1/1");
    assert_eq!(r["results"][1]["point"][0][1].as_f64(), Some(0.5));
}

#[test]
fn missing_and_malformed_inputs_exit_with_2() {
    let dir = workdir("bad");
    let out = run(&["lelong", "--expr", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let bad = write(&dir, "bad.json", r#"{"tag":"max","children":[]}"#);
    let out = run(&["lelong", "--expr", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let expr = write(&dir, "m.json", MONO_21);
    let out = run(&["lelong", "--expr", expr.to_str().unwrap(), "--point", "0"]);
    assert_eq!(out.status.code(), Some(2), "wrong arity");
    let out = run(&["lelong", "--expr", expr.to_str().unwrap(), "--point", "0,x"]);
    assert_eq!(out.status.code(), Some(2), "bad component");
    let out = run(&["verify", "levelset", "--expr", expr.to_str().unwrap(), "--c", "1"]);
    assert_eq!(out.status.code(), Some(2), "not a polynomial");
    let out = run(&["lct", "--bogus"]);
    assert_eq!(out.status.code(), Some(2), "usage");
}

#[test]
fn verify_thm1_on_a_radial_function() {
    let dir = workdir("thm1");
    let expr = write(&dir, "radial-nu2.json", RADIAL_NU2);
    let out = run(&[
        "verify", "thm1", "--expr", expr.to_str().unwrap(), "--k", "1", "--point", "0", "--samples", "512",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["verdict"], "pass");
    assert!(r["generated_at_unix"].is_u64());
}

#[test]
fn reports_are_reproducible_without_timestamps() {
    let dir = workdir("repro");
    let expr = write(&dir, "radial-nu2.json", RADIAL_NU2);
    let args = [
        "verify", "radial", "--expr", expr.to_str().unwrap(), "--samples", "512", "--seed", "11", "--no-timestamp",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(report(&a).get("generated_at_unix").is_none());
}

#[test]
fn vacuous_identity_exits_with_3() {
    let dir = workdir("flat");
    let expr = write(
        &dir,
        "flat.json",
        r#"{"tag":"radial","arity":1,"limiting_slope":"0/1","breakpoints":[[0.0,0.0]]}"#,
    );
    let out = run(&["verify", "radial", "--expr", expr.to_str().unwrap(), "--samples", "512"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&out)["verdict"], "inconclusive");
}

#[test]
fn restriction_and_levelset_harnesses() {
    let dir = workdir("restrict");
    let prod = write(&dir, "prod.json", r#"{"tag":"monomial_log","coeff":"1/1","exponents":["1/1","1/1"]}"#);
    let out = run(&[
        "verify",
        "restriction",
        "--expr",
        prod.to_str().unwrap(),
        "--slice",
        "1,1",
        "--slice",
        "1,0",
        "--no-timestamp",
    ]);
    // the second slice is the z1-axis, where z1 z2 vanishes identically
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let reports = r["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 4);
    assert_eq!(reports.iter().filter(|x| x["verdict"] == "pass").count(), 2);

    let poly = write(
        &dir,
        "poly.json",
        r#"{"tag":"log_abs_poly","nvars":2,"terms":[{"exponents":[2,1],"coeff":[1.0,0.0]}]}"#,
    );
    let out = run(&[
        "verify", "levelset", "--expr", poly.to_str().unwrap(), "--c", "2", "--point", "0,5", "--point", "1,0",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn construct_round_trips() {
    let dir = workdir("construct");
    let src = r#"{"tag":"max","children":[
        {"tag":"monomial_log","coeff":"1/1","exponents":["2/1"]},
        {"tag":"scale","factor":"3/2","child":{"tag":"monomial_log","coeff":"1/1","exponents":["1/1"]}}]}"#;
    let expr = write(&dir, "f.json", src);
    let out_path = dir.join("phi1.json");
    let out = run(&["construct", "--expr", expr.to_str().unwrap(), "--k", "1", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let parsed = parse_expr_file(&out_path).unwrap();
    let in_memory = make_phi_k(&parse_expr_str(src).unwrap(), 1).unwrap();
    assert_eq!(parsed, in_memory);
    let opts = EvalOptions::default();
    for (i, j) in [(0.1, 0.3), (-0.4, 0.2), (0.7, -0.6), (0.0, 0.5)] {
        let p = [Complex64::new(i, j), Complex64::new(j, -i)];
        assert_eq!(
            eval(&parsed, &p, &opts).unwrap().to_bits(),
            eval(&in_memory, &p, &opts).unwrap().to_bits()
        );
    }
}
