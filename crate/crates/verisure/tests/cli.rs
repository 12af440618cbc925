use std::path::{Path, PathBuf};

use serde_json::Value;
use verisure::cli::dispatch;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn file(name: &str) -> String {
    fixtures().join("files").join(name).display().to_string()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<&str> = std::iter::once("verisure").chain(args.iter().copied()).collect();
    let code = dispatch(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn cli_json(args: &[&str]) -> (i32, Value) {
    let mut a = vec!["--json"];
    a.extend_from_slice(args);
    let (code, out, err) = cli(&a);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}\n{err}"));
    (code, v)
}

#[test]
fn lint_clean_and_broken() {
    let (code, v) = cli_json(&["contract", "lint", &file("shift_contract.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["clean"], true);
    assert_eq!(v["errors"].as_array().unwrap().len(), 0);

    let (code, v) = cli_json(&["contract", "lint", &file("bad_contract.json")]);
    assert_eq!(code, 1);
    assert_eq!(v["errors"][0]["code"], "DuplicatePort");

    let (code, out, _) = cli(&["contract", "lint", &file("bad_contract.json")]);
    assert_eq!(code, 1);
    assert!(out.contains("DuplicatePort"), "{out}");
}

#[test]
fn lint_writes_canonical_form() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("canon.json");
    let (code, _, _) = cli(&["contract", "lint", &file("shift_contract.json"), "--canonical-out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, v) = cli_json(&["contract", "lint", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["canonical"].as_str().unwrap(), std::fs::read_to_string(&out).unwrap());
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, err) = cli(&["slice", &file("shift_buggy.sv")]);
    assert_eq!(code, 2);
    assert!(err.contains("Usage: verisure slice"), "{err}");
    let (code, v) = cli_json(&["frobnicate"]);
    assert_eq!(code, 2);
    assert_eq!(v["exit_code"], 2);
    assert!(v["error"].is_string());
}

#[test]
fn missing_input_is_infrastructure() {
    let (code, v) = cli_json(&["slice", "/no/such/file.sv", "--fail", "q"]);
    assert_eq!(code, 3);
    assert!(v["error"].as_str().unwrap().contains("/no/such/file.sv"));
}

#[test]
fn slice_lists_blocks() {
    let (code, out, _) = cli(&["slice", &file("shift_buggy.sv"), "--fail", "q", "--depth", "0"]);
    assert_eq!(code, 0);
    assert_eq!(out, "block 0 always_generic lines 8-15 reads [clk,count_ena,data,q,shift_ena] writes [q]\n");
    let (_, v) = cli_json(&["slice", &file("shift_buggy.sv"), "--fail", "nothing"]);
    assert_eq!(v["slice"]["block_ids"].as_array().unwrap().len(), 0);
}

#[test]
fn trace_report_on_the_shift_fixture() {
    let args = [
        "trace", "report", "--vcd", &file("shift.vcd"), "--log", &file("shift.log"),
        "--contract", &file("shift_contract.json"), "--rtl", &file("shift_buggy.sv"),
    ];
    let (code, out, _) = cli(&args);
    assert_eq!(code, 0);
    assert!(out.contains("t_f: 370"));
    assert!(out.contains("q: 1100 -> observed 0110, expected 1000"), "{out}");
    assert!(out.contains("block 0 always_generic lines 8-15"));
    let (_, v) = cli_json(&args);
    assert_eq!(v["t_f"], 370);
}

#[test]
fn patch_apply_and_locality() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("fixed.sv");
    let (code, _, _) = cli(&[
        "patch", "apply", "--rtl", &file("shift_buggy.sv"), "--block", "0",
        "--replacement", &file("shift_fix_block.sv"), "--fail", "q", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let fixed = std::fs::read_to_string(&out).unwrap();
    assert!(fixed.contains("q <= {q[2:0], data};"));

    // no block drives `data`, so block 0 is outside the slice
    let (code, v) = cli_json(&[
        "patch", "apply", "--rtl", &file("shift_buggy.sv"), "--block", "0",
        "--replacement", &file("shift_fix_block.sv"), "--fail", "data",
    ]);
    assert_eq!(code, 1);
    assert!(v["error"].as_str().unwrap().contains("outside the suspect set"));
}

#[test]
fn miter_then_exhaustive_proof() {
    let t = tempfile::tempdir().unwrap();
    let dir = t.path().join("m");
    let d = dir.to_str().unwrap();
    let (code, _, err) = cli(&["formal", "miter", "--contract", &file("or_contract.json"), "--rtl", &file("xor.sv"), "--out", d]);
    assert_eq!(code, 0, "{err}");
    for f in ["dut.sv", "spec.sv", "miter.sv", "miter.sby", "inputs.txt"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let (code, v) = cli_json(&["formal", "prove", d, "--exhaustive"]);
    assert_eq!(code, 1);
    assert_eq!(v["status"], "counterexample");
    let (code, out, _) = cli(&["formal", "prove", d, "--exhaustive"]);
    assert_eq!(code, 1);
    assert!(out.contains("a = 1") && out.contains("b = 1"), "{out}");
}

#[test]
fn sequential_contract_has_no_miter() {
    let t = tempfile::tempdir().unwrap();
    let (code, _, err) = cli(&[
        "formal", "miter", "--contract", &file("shift_contract.json"), "--rtl", &file("shift_buggy.sv"),
        "--out", t.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("no combinational targets"));
}

#[test]
fn assertion_bundle() {
    let t = tempfile::tempdir().unwrap();
    let (code, v) = cli_json(&[
        "formal", "assert", "--contract", &file("shift_contract.json"), "--rtl", &file("shift_buggy.sv"),
        "--out", t.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["names"][0], "NO_NEGEDGE_UPDATE_q");
    let checker = std::fs::read_to_string(t.path().join("checker.sv")).unwrap();
    assert!(checker.contains("always @(negedge clk)"));
    assert!(t.path().join("bind.sv").is_file());
}

#[test]
fn grade_files() {
    let (code, out, _) = cli(&["bench", "grade", &file("shift_buggy.sv")]);
    assert_eq!(code, 0);
    assert!(out.contains("S=2 Medium (loc 15, assign 0, always 1, case 0, width 4)"), "{out}");
    // the directory also holds a bare block fragment, which does not parse
    let (code, v) = cli_json(&["bench", "grade", &fixtures().join("files").display().to_string()]);
    assert_eq!(code, 1);
    let files = v["files"].as_array().unwrap();
    assert_eq!(files.len(), 3);
    assert_eq!(files.iter().filter(|f| f.get("error").is_some()).count(), 1);
    assert_eq!(files[2]["difficulty"]["label"], "Easy");
}

#[test]
fn run_and_bench_with_scripted_backends() {
    let cfg = fixtures().join("scripted.json").display().to_string();
    let problem = fixtures().join("shift_register").display().to_string();
    let (code, out, err) = cli(&["--config", &cfg, "run", "--problem", &problem]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("shift_register: passed after 1 iteration(s)"), "{out}");

    let t = tempfile::tempdir().unwrap();
    let report = t.path().join("bench.json");
    let bench = fixtures().join("bench").display().to_string();
    let (code, out, _) = cli(&["--config", &cfg, "bench", "run", "--manifests", &bench, "--out", report.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("functional pass@1 66.67%"), "{out}");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["overall"]["functional_pass"], 2);
}

#[test]
fn bad_config_is_a_usage_error() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("c.json");
    std::fs::write(&cfg, r#"{"depth": 3}"#).unwrap();
    let (code, _, err) = cli(&["--config", cfg.to_str().unwrap(), "slice", &file("shift_buggy.sv"), "--fail", "q"]);
    assert_eq!(code, 2);
    assert!(err.contains("depth"), "{err}");
}
