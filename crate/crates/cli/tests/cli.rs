use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn input(name: &str) -> String {
    root().join("inputs").join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn ezop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ezop")).args(args).env_remove("EZOP_OUT_DIR").output().unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = ezop(&full);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap(), v)
}

fn statuses(v: &Value) -> Vec<(String, String)> {
    v["checks"].as_array().unwrap().iter().map(|c| (c["name"].as_str().unwrap().to_owned(), c["status"].as_str().unwrap().to_owned())).collect()
}

#[test]
fn lie_dim_of_arity_four() {
    let (code, v) = json(&["operad", "lie-dim", "--arity", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["values"]["dimension"], 6);
}

#[test]
fn concentration_in_degree_zero() {
    let (code, v) = json(&["operad", "concentration", "--arity", "2", "--max-degree", "5", "--window", "-3:0"]);
    assert_eq!(code, 0);
    assert_eq!(v["values"]["ranks"], serde_json::json!([0, 0, 0, 1]));
    assert_eq!(v["stable_window"], serde_json::json!([-3, 0]));
    let text = String::from_utf8(ezop(&["operad", "concentration", "--arity", "2", "--max-degree", "5", "--window", "-3:0"]).stdout).unwrap();
    assert!(text.trim_end().ends_with("PASS"));
}

#[test]
fn window_outside_stable_range_is_an_input_error() {
    let out = ezop(&["operad", "concentration", "--arity", "2", "--max-degree", "4", "--window", "-3:0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stable range"));
}

#[test]
fn abelian_conformal_jacobi_passes() {
    let (code, v) = json(&["conformal", "check", "--input", &input("abelian.toml"), "--which", "jacobi"]);
    assert_eq!(code, 0);
    assert!(statuses(&v).iter().all(|s| s.1 == "PASS"));
}

#[test]
fn reports_are_byte_deterministic() {
    let args = ["--format", "json", "transfer", "bracket", "--input", &input("sl2_two_opens.toml"), "--max-degree", "3", "--stability"];
    let a = ezop(&args);
    let b = ezop(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let file = scratch("bracket.json");
    let mut with_out = args.to_vec();
    let f = file.display().to_string();
    with_out.extend(["--out", &f]);
    let c = ezop(&with_out);
    assert_eq!(std::fs::read(&file).unwrap(), c.stdout);
    assert_eq!(c.stdout, a.stdout);
}

#[test]
fn timing_is_opt_in() {
    let (_, v) = json(&["operad", "lie-dim", "--arity", "3"]);
    assert!(v.get("timing_ms").is_none());
    let (_, v) = json(&["--timing", "operad", "lie-dim", "--arity", "3"]);
    assert!(v["timing_ms"].is_u64());
}

#[test]
fn out_dir_is_the_default_destination() {
    let dir = scratch("outdir");
    let out = Command::new(env!("CARGO_BIN_EXE_ezop")).args(["operad", "lie-dim", "--arity", "5"]).env("EZOP_OUT_DIR", &dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.join("operad-lie-dim.txt")).unwrap(), out.stdout);
}

#[test]
fn seeded_sweeps_record_and_reproduce_the_seed() {
    let (code, a) = json(&["--seed", "11", "operad", "key-lemma", "--count", "3"]);
    assert_eq!(code, 0);
    assert_eq!(a["seed"], 11);
    let (_, b) = json(&["--seed", "11", "operad", "key-lemma", "--count", "3"]);
    assert_eq!(a, b);
    let (code, v) = json(&["--seed", "5", "conformal", "sweep", "--count", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["seed"], 5);
}

#[test]
fn jacobi_certificate_reloads_to_the_same_statuses() {
    let file = scratch("jacobi.json");
    let f = file.display().to_string();
    let (code, first) = json(&["transfer", "jacobi", "--input", &input("sl2_two_opens.toml"), "--max-degree", "3", "--out", &f]);
    assert_eq!(code, 0);
    assert!(first["certificates"]["structure"]["j_prime"]["terms"].as_array().is_some_and(|t| !t.is_empty()));
    let (code, second) = json(&["transfer", "jacobi", "--input", &input("sl2_two_opens.toml"), "--max-degree", "3", "--certificate", &f]);
    assert_eq!(code, 0);
    assert_eq!(statuses(&first), statuses(&second));
    assert_eq!(first["certificates"], second["certificates"]);

    let mut broken: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    broken["certificates"]["structure"]["j_prime"]["terms"][0]["coeff"] = "7".into();
    let bad = scratch("jacobi_broken.json");
    std::fs::write(&bad, serde_json::to_string(&broken).unwrap()).unwrap();
    let out = ezop(&["transfer", "jacobi", "--input", &input("sl2_two_opens.toml"), "--max-degree", "3", "--certificate", &bad.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn emitted_ops_reverify_to_the_same_statuses() {
    let ops = scratch("current_ops.toml");
    let o = ops.display().to_string();
    let cover = input("current_two_opens.toml");
    let (code, derived) = json(&["conformal", "secondary", "--input", &cover, "--derive", "--emit-ops", &o]);
    assert_eq!(code, 0);
    let (code, loaded) = json(&["conformal", "secondary", "--input", &cover, "--ops", &o]);
    assert_eq!(code, 0);
    assert_eq!(statuses(&derived), statuses(&loaded));
    assert_eq!(derived["checks"], loaded["checks"]);
}

#[test]
fn wrong_secondary_ops_fail_with_a_witness() {
    let ops = scratch("wrong_ops.toml");
    std::fs::write(&ops, "[[entry]]\na = [0, 0]\nb = [0, 0]\nc = [0, 0]\nindices = [0, 0]\nvalue = [[2, \"1\"]]\n").unwrap();
    let (code, v) = json(&["conformal", "secondary", "--input", &input("dg_virasoro.toml"), "--ops", &ops.display().to_string()]);
    assert_eq!(code, 1);
    let failed: Vec<&Value> = v["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "FAIL").collect();
    assert_eq!(failed.len(), 1);
    assert!(!failed[0]["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn zero_ops_pass_on_a_strict_dg_algebra() {
    let (code, _) = json(&["conformal", "secondary", "--input", &input("dg_virasoro.toml"), "--derive"]);
    assert_eq!(code, 0);
}

#[test]
fn broken_restriction_fails_validation() {
    let (code, v) = json(&["cech", "validate", "--input", &input("broken_restriction.toml")]);
    assert_eq!(code, 1);
    let s = statuses(&v);
    assert_eq!(s.iter().filter(|x| x.1 == "FAIL").count(), 1);
    let (code, _) = json(&["cech", "validate", "--input", &input("sl2_three_opens.toml")]);
    assert_eq!(code, 0);
}

#[test]
fn parse_errors_exit_two_with_a_position() {
    let file = scratch("bad.toml");
    std::fs::write(&file, "kind = \"conformal\"\nnames = [\"L\"]\nproducts = [{ a = \"L\", b = \"X\", value = \"L\" }]\n").unwrap();
    let out = ezop(&["conformal", "check", "--input", &file.display().to_string(), "--which", "skew"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.toml:3:"), "{err}");
}

#[test]
fn borcherds_on_truncated_polynomials() {
    let (code, v) = json(&["conformal", "check", "--input", &input("truncated_polynomials.toml"), "--which", "borcherds", "--range", "2:2:2"]);
    assert_eq!(code, 0);
    assert_eq!(v["values"]["alternate_last_sum_holds"], false);
}

#[test]
fn virasoro_skew_symmetry() {
    let (code, v) = json(&["conformal", "check", "--input", &input("virasoro.toml"), "--which", "skew"]);
    assert_eq!(code, 0);
    assert!(v["values"]["derived_formula"].is_string());
}
