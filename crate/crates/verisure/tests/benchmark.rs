use std::path::{Path, PathBuf};

use verisure::benchmark::{run_benchmark, BenchmarkReport, ConfiguredBackends};
use verisure::config::GlobalConfig;
use verisure::session::Status;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn config(jobs: usize) -> GlobalConfig {
    let mut c = GlobalConfig::default();
    c.apply_json(&std::fs::read_to_string(fixtures().join("scripted.json")).unwrap()).unwrap();
    c.jobs = jobs;
    c
}

fn bench(dir: &Path, jobs: usize) -> BenchmarkReport {
    let c = config(jobs);
    run_benchmark(dir, &ConfiguredBackends::new(&c).unwrap(), &c).unwrap()
}

#[test]
fn three_problem_sweep() {
    let r = bench(&fixtures().join("bench"), 1);
    let ids: Vec<&str> = r.problems.iter().map(|p| p.problem.as_str()).collect();
    assert_eq!(ids, ["a_xor_gate", "b_shift_register", "c_and_gate_stuck"]);
    assert_eq!((r.overall.total, r.overall.syntax_pass, r.overall.functional_pass), (3, 3, 2));
    assert_eq!(r.by_difficulty["Easy"].functional_pass_at_1, 100.0);
    assert_eq!(r.by_difficulty["Medium"].functional_pass_at_1, 100.0);
    assert_eq!(r.by_difficulty["Hard"].functional_pass_at_1, 0.0);
    assert!(!r.by_difficulty.contains_key("Unlabeled"));
    // the shift problem's label comes from grading its reference design
    assert_eq!(r.problems[1].difficulty.unwrap().as_str(), "Medium");
}

#[test]
fn parallelism_does_not_change_results() {
    let a = serde_json::to_string(&bench(&fixtures().join("bench"), 1)).unwrap();
    let b = serde_json::to_string(&bench(&fixtures().join("bench"), 3)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn broken_problem_is_reported_not_fatal() {
    let t = tempfile::tempdir().unwrap();
    std::fs::create_dir(t.path().join("no_prompt")).unwrap();
    let bad_meta = t.path().join("bad_meta");
    std::fs::create_dir(&bad_meta).unwrap();
    std::fs::write(bad_meta.join("prompt.txt"), "x").unwrap();
    std::fs::write(bad_meta.join("testbench.sv"), "module tb; endmodule").unwrap();
    std::fs::write(bad_meta.join("meta.json"), r#"{"difficulty": "brutal"}"#).unwrap();
    let r = bench(t.path(), 2);
    assert_eq!(r.problems.len(), 2);
    assert!(r.problems.iter().all(|p| p.status == Status::FailedError));
    assert_eq!(r.by_difficulty["Unlabeled"].total, 2);
    assert_eq!(r.by_difficulty["Easy"].total, 0);
    assert_eq!(r.overall.functional_pass_at_1, 0.0);
}

#[test]
fn missing_directory_is_an_error() {
    let c = config(1);
    let f = ConfiguredBackends::new(&c).unwrap();
    assert!(run_benchmark(Path::new("/definitely/not/here"), &f, &c).is_err());
}
