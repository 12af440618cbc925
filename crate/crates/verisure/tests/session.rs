use std::path::{Path, PathBuf};

use verisure::config::GlobalConfig;
use verisure::llm::{self, ModelBackend};
use verisure::manifest::load_problem;
use verisure::prover::Exhaustive;
use verisure::session::{run_session, Backends, SessionReport, Status};
use verisure::sim::{self, Purpose};
use verisure_core::agents::{ChatMessage, ChatRole};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let dst = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &dst);
        } else {
            std::fs::copy(e.path(), dst).unwrap();
        }
    }
}

/// A private copy of the shift-register problem to edit.
fn shift_copy() -> (tempfile::TempDir, PathBuf) {
    let t = tempfile::tempdir().unwrap();
    let dir = t.path().join("shift_register");
    copy_dir(&fixtures().join("shift_register"), &dir);
    (t, dir)
}

fn config() -> GlobalConfig {
    let mut c = GlobalConfig::default();
    c.apply_json(&std::fs::read_to_string(fixtures().join("scripted.json")).unwrap()).unwrap();
    c
}

struct Run {
    report: SessionReport,
    prompts: Vec<Vec<ChatMessage>>,
    jobs: Vec<(Purpose, String)>,
}

fn run(dir: &Path, config: &GlobalConfig) -> Run {
    let problem = load_problem(dir, false).unwrap();
    let model = llm::Scripted::from_dir(&dir.join("fixtures/llm")).unwrap();
    let simb = sim::Scripted::from_dir(&dir.join("fixtures/sim")).unwrap();
    let report = run_session(problem, Backends { model: &model, sim: &simb, prover: &Exhaustive }, config);
    Run { report, prompts: model.prompts(), jobs: simb.jobs() }
}

fn user_text(p: &[ChatMessage]) -> &str {
    &p.iter().find(|m| m.role == ChatRole::User).unwrap().content
}

#[test]
fn shift_register_is_fixed_by_one_local_patch() {
    let r = run(&fixtures().join("shift_register"), &config());
    assert_eq!(r.report.status, Status::Passed, "{:?}", r.report.error);
    assert!(r.report.functional_pass && r.report.syntax_pass);
    assert_eq!(r.report.iterations_used, 1);

    // only the shift line changed
    let buggy = std::fs::read_to_string(fixtures().join("files/shift_buggy.sv")).unwrap();
    let changed: Vec<_> = buggy.lines().zip(r.report.final_rtl.lines()).filter(|(a, b)| a != b).collect();
    assert_eq!(changed.len(), 1);
    assert_eq!(buggy.lines().count(), r.report.final_rtl.lines().count());

    // architect, coder, debugger
    assert_eq!(r.prompts.len(), 3);
    let debug = user_text(&r.prompts[2]);
    assert!(debug.contains("BLOCK 0 (always_generic, lines 8-15)"), "{debug}");
    assert!(debug.contains("t_f: 370"));
    assert!(debug.contains("Allowed block ids: 0"));

    let purposes: Vec<Purpose> = r.jobs.iter().map(|j| j.0).collect();
    assert_eq!(purposes, [Purpose::Design, Purpose::Assertions, Purpose::Design]);
    assert!((r.report.timings.sim_seconds - 1.25).abs() < 1e-9);
}

#[test]
fn golden_testbench_skips_the_verifier() {
    let r = run(&fixtures().join("shift_register"), &config());
    assert!(r.report.history.iter().any(|h| h.action == "verifier skipped: golden testbench"));
    assert!(r.prompts.iter().all(|p| !p[0].content.starts_with("You write self-checking SystemVerilog testbenches")));
    assert_eq!(r.prompts.len(), 3);
}

#[test]
fn out_of_slice_edit_is_retried_within_the_iteration() {
    let (_t, dir) = shift_copy();
    let llm = dir.join("fixtures/llm");
    let good = std::fs::read_to_string(llm.join("02_debugger.txt")).unwrap();
    std::fs::write(llm.join("02_debugger.txt"), "BLOCK 5\n```verilog\nassign q = 4'd0;\n```\n").unwrap();
    std::fs::write(llm.join("03_debugger.txt"), good).unwrap();
    let r = run(&dir, &config());
    assert_eq!(r.report.status, Status::Passed);
    assert_eq!(r.report.iterations_used, 1);
    assert!(r.report.history.iter().any(|h| h.action.contains("debugger: rejected answer")));
    // the retry carries the reason back
    assert!(user_text(&r.prompts[3]).contains("5"), "{}", user_text(&r.prompts[3]));
}

#[test]
fn regressing_patch_is_reverted_byte_for_byte() {
    let (_t, dir) = shift_copy();
    let llm = dir.join("fixtures/llm");
    let good = std::fs::read_to_string(llm.join("02_debugger.txt")).unwrap();
    std::fs::write(
        llm.join("02_debugger.txt"),
        "BLOCK 0\n```verilog\n    always @(posedge clk) begin\n        q <= {q[2:0] data};\n    end\n```\n",
    )
    .unwrap();
    std::fs::write(llm.join("03_debugger.txt"), good).unwrap();
    let step = dir.join("fixtures/sim/01a");
    std::fs::create_dir_all(&step).unwrap();
    std::fs::write(
        step.join("run.json"),
        r#"{"compile_ok": false, "exit_ok": false, "rtl_contains": "{q[2:0] data}"}"#,
    )
    .unwrap();
    std::fs::write(step.join("compile.log"), "%Error: dut.sv:9:25: syntax error, unexpected IDENTIFIER\n").unwrap();

    let r = run(&dir, &config());
    assert_eq!(r.report.status, Status::Passed, "{:#?}", r.report.history);
    assert_eq!(r.report.iterations_used, 2);
    let reverted = r.report.history.iter().find(|h| h.accepted == Some(false)).unwrap();
    assert_eq!(reverted.action, "patch blocks [0] reverted: sim_fail(t_f=370, m=3) -> compile_fail");
    // the retry after a revert patches the original text
    let buggy = std::fs::read_to_string(fixtures().join("files/shift_buggy.sv")).unwrap();
    let design_runs: Vec<&String> = r.jobs.iter().filter(|j| j.0 == Purpose::Design).map(|j| &j.1).collect();
    assert_eq!(design_runs[0], &buggy);
    assert!(design_runs[2].contains("{q[2:0], data}"));
    assert!(!design_runs[2].contains("{q[2:0] data}"));
    assert!(user_text(&r.prompts[3]).contains("reverted"));
}

#[test]
fn architect_sees_lint_errors_on_retry() {
    let (_t, dir) = shift_copy();
    let llm = dir.join("fixtures/llm");
    let good = std::fs::read_to_string(llm.join("00_architect.txt")).unwrap();
    let bad = good.replacen("\"dir\": \"input\"", "\"dir\": \"sideways\"", 1);
    // renumber so the bad contract comes first
    for (from, to) in [("02_debugger", "03_debugger"), ("01_coder", "02_coder")] {
        std::fs::rename(llm.join(format!("{from}.txt")), llm.join(format!("{to}.txt"))).unwrap();
    }
    std::fs::write(llm.join("00_architect.txt"), bad).unwrap();
    std::fs::write(llm.join("01_architect.txt"), good).unwrap();
    let r = run(&dir, &config());
    assert_eq!(r.report.status, Status::Passed);
    let retry = user_text(&r.prompts[1]);
    assert!(retry.contains("BadEnum"), "{retry}");
}

#[test]
fn architect_budget_exhaustion_fails_the_session() {
    let (_t, dir) = shift_copy();
    let llm = dir.join("fixtures/llm");
    for f in std::fs::read_dir(&llm).unwrap() {
        std::fs::remove_file(f.unwrap().path()).unwrap();
    }
    for i in 0..3 {
        std::fs::write(llm.join(format!("{i:02}.txt")), "I could not produce a contract.").unwrap();
    }
    let r = run(&dir, &config());
    assert_eq!(r.report.status, Status::FailedBudget);
    assert!(!r.report.functional_pass);
    assert_eq!(r.prompts.len(), 3);
}

#[test]
fn missing_simulation_step_is_an_infrastructure_failure() {
    let (_t, dir) = shift_copy();
    std::fs::remove_dir_all(dir.join("fixtures/sim/02")).unwrap();
    let r = run(&dir, &config());
    assert_eq!(r.report.status, Status::FailedError);
    assert!(r.report.error.as_deref().unwrap().contains("no step left"), "{:?}", r.report.error);
}

#[test]
fn iteration_cap_is_respected() {
    let mut c = config();
    c.max_iterations = 4;
    let r = run(&fixtures().join("bench/c_and_gate_stuck"), &c);
    assert_eq!(r.report.status, Status::FailedBudget);
    assert_eq!(r.report.iterations_used, 4);
    assert_eq!(r.report.history.last().unwrap().action, "iteration budget exhausted");
    // combinational proof ran once and its counterexample reached the debugger
    assert_eq!(r.report.proofs.len(), 1);
    let debug = user_text(&r.prompts[2]);
    assert!(debug.contains("differ from the contract rules"), "{debug}");
}

#[test]
fn formal_hints_can_be_disabled() {
    let mut c = config();
    c.formal.enabled = false;
    c.max_iterations = 1;
    let r = run(&fixtures().join("bench/c_and_gate_stuck"), &c);
    assert!(r.report.proofs.is_empty());
    assert!(!user_text(&r.prompts[2]).contains("differ from the contract rules"));
}

#[test]
fn scripted_model_records_every_prompt() {
    let m = llm::Scripted::new(vec!["one".into()]);
    let msgs = [ChatMessage::user("hi")];
    let p = verisure::llm::SamplingParams { temperature: 0.0, max_tokens: 16 };
    assert_eq!(m.complete(&msgs, &p).unwrap(), "one");
    assert!(m.complete(&msgs, &p).is_err());
    assert_eq!(m.prompts().len(), 2);
}
