//! Compile-and-simulate through an abstract backend. The external backend
//! drives a Verilator-style toolchain; the scripted backend replays
//! recorded transcripts so whole sessions run without tools.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};
use verisure_core::simlog::{parse_log, LogRules, LogSummary, Stage};
use wait_timeout::ChildExt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    /// The design against its harness; decides pass or fail.
    #[default]
    Design,
    /// The same run with assertion checkers bound in.
    Assertions,
}

#[derive(Debug, Clone)]
pub struct SimJob {
    pub rtl_files: Vec<PathBuf>,
    pub testbench_files: Vec<PathBuf>,
    /// Checker and bind files.
    pub extra_files: Vec<PathBuf>,
    /// Simulation top module.
    pub top: String,
    pub timeout: Duration,
    pub dump_vcd: bool,
    /// Scratch directory owned by the caller.
    pub work_dir: PathBuf,
    pub purpose: Purpose,
}

impl SimJob {
    pub fn new(top: &str, work_dir: &Path) -> Self {
        SimJob {
            rtl_files: Vec::new(),
            testbench_files: Vec::new(),
            extra_files: Vec::new(),
            top: top.to_string(),
            timeout: Duration::from_secs(60),
            dump_vcd: false,
            work_dir: work_dir.to_path_buf(),
            purpose: Purpose::Design,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub stage: Stage,
    pub first_failure_time: Option<u64>,
    pub mismatch_count: Option<u64>,
    /// Compiler output on compile failure, simulator output otherwise.
    pub diagnostics: String,
    pub log: Option<LogSummary>,
    pub vcd_path: Option<PathBuf>,
    pub wall_time: f64,
    pub timed_out: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("simulator `{0}` not found")]
    ToolMissing(String),
    #[error("invalid job: {0}")]
    BadJob(String),
    #[error("scripted simulator: {0}")]
    Fixture(String),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Harness-specific log conventions on top of the built-in grammar.
#[derive(Debug, Clone, Default)]
pub struct LogPatterns {
    /// Each must capture the failure time as its first group.
    pub mismatch: Vec<Regex>,
    /// Replaces the built-in success markers when set.
    pub success: Option<Regex>,
}

impl LogPatterns {
    pub fn new(mismatch: &[String], success: Option<&str>) -> Result<Self, regex::Error> {
        Ok(LogPatterns {
            mismatch: mismatch.iter().map(|s| Regex::new(s)).collect::<Result<_, _>>()?,
            success: success.map(Regex::new).transpose()?,
        })
    }

    pub fn parse(&self, text: &str, exit_ok: bool) -> LogSummary {
        let extra = |line: &str| {
            self.mismatch
                .iter()
                .find_map(|r| r.captures(line)?.get(1)?.as_str().parse().ok())
        };
        let default = LogRules::default();
        let success = |line: &str| match &self.success {
            Some(r) => r.is_match(line),
            None => (default.success)(line),
        };
        parse_log(
            text,
            exit_ok,
            &LogRules {
                extra_mismatch: &extra,
                success: &success,
            },
        )
    }
}

/// What a run produced, before interpretation. Both backends reduce to this.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub compile_ok: bool,
    pub compile_log: String,
    pub exit_ok: bool,
    pub sim_log: String,
    pub timed_out: bool,
    pub vcd_path: Option<PathBuf>,
    pub wall_time: f64,
}

impl Transcript {
    pub fn into_result(self, patterns: &LogPatterns) -> SimResult {
        if !self.compile_ok {
            return SimResult {
                stage: Stage::CompileFail,
                first_failure_time: None,
                mismatch_count: None,
                diagnostics: self.compile_log,
                log: None,
                vcd_path: None,
                wall_time: self.wall_time,
                timed_out: false,
            };
        }
        let mut log = patterns.parse(&self.sim_log, self.exit_ok && !self.timed_out);
        if self.timed_out && log.verdict == Stage::Pass {
            // a hung harness never reached its verdict
            log.verdict = Stage::SimFail;
            log.mismatch_count = Some(1);
            log.m_defaulted = true;
        }
        SimResult {
            stage: log.verdict,
            first_failure_time: if log.verdict == Stage::SimFail { log.first_failure_time } else { None },
            mismatch_count: log.mismatch_count,
            diagnostics: self.sim_log,
            log: Some(log),
            vcd_path: self.vcd_path,
            wall_time: self.wall_time,
            timed_out: self.timed_out,
        }
    }
}

pub trait SimBackend: Send + Sync {
    fn name(&self) -> &str;
    fn run(&self, job: &SimJob, patterns: &LogPatterns) -> Result<SimResult, SimError>;
}

fn check_job(job: &SimJob) -> Result<(), SimError> {
    if job.top.is_empty() {
        return Err(SimError::BadJob("empty top module".into()));
    }
    if job.timeout.is_zero() {
        return Err(SimError::BadJob("timeout must be positive".into()));
    }
    Ok(())
}

// ----- external toolchain ---------------------------------------------------

/// Verilator in `--binary` mode: translate and build, then run the model.
#[derive(Debug, Clone)]
pub struct External {
    pub bin: String,
}

impl Default for External {
    fn default() -> Self {
        External {
            bin: std::env::var("VERISURE_SIM_BIN").unwrap_or_else(|_| "verilator".into()),
        }
    }
}

struct Captured {
    ok: bool,
    text: String,
    timed_out: bool,
}

fn run_captured(mut cmd: Command, timeout: Duration, tool: &str) -> Result<Captured, SimError> {
    cmd.stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child = cmd.spawn().map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => SimError::ToolMissing(tool.to_string()),
        _ => SimError::Io(e),
    })?;
    // drain pipes on threads so a chatty child cannot block on a full pipe
    let mut out = child.stdout.take().unwrap();
    let mut err = child.stderr.take().unwrap();
    let t_out = std::thread::spawn(move || {
        let mut s = Vec::new();
        let _ = out.read_to_end(&mut s);
        s
    });
    let t_err = std::thread::spawn(move || {
        let mut s = Vec::new();
        let _ = err.read_to_end(&mut s);
        s
    });
    let (ok, timed_out) = match child.wait_timeout(timeout)? {
        Some(status) => (status.success(), false),
        None => {
            let _ = child.kill();
            let _ = child.wait();
            (false, true)
        }
    };
    let mut text = String::from_utf8_lossy(&t_out.join().unwrap_or_default()).into_owned();
    text.push_str(&String::from_utf8_lossy(&t_err.join().unwrap_or_default()));
    Ok(Captured { ok, text, timed_out })
}

fn find_vcd(dir: &Path) -> Option<PathBuf> {
    let mut found: Vec<PathBuf> = std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "vcd"))
        .collect();
    found.sort();
    found.into_iter().next()
}

impl SimBackend for External {
    fn name(&self) -> &str {
        "external"
    }

    fn run(&self, job: &SimJob, patterns: &LogPatterns) -> Result<SimResult, SimError> {
        check_job(job)?;
        let start = Instant::now();
        let obj = job.work_dir.join("obj_dir");
        let mut cmd = Command::new(&self.bin);
        cmd.current_dir(&job.work_dir)
            .args(["--binary", "--timing", "-Wno-fatal", "-Wno-lint", "-Wno-style"])
            .arg("--top-module")
            .arg(&job.top)
            .arg("-Mdir")
            .arg(&obj);
        if job.dump_vcd {
            cmd.arg("--trace");
        }
        cmd.args(job.rtl_files.iter().chain(&job.testbench_files).chain(&job.extra_files));
        let compile = run_captured(cmd, job.timeout, &self.bin)?;
        if !compile.ok {
            return Ok(Transcript {
                compile_ok: false,
                compile_log: compile.text,
                wall_time: start.elapsed().as_secs_f64(),
                ..Default::default()
            }
            .into_result(patterns));
        }
        let exe = obj.join(format!("V{}", job.top));
        let mut run = Command::new(&exe);
        run.current_dir(&job.work_dir);
        let sim = run_captured(run, job.timeout, &exe.display().to_string())?;
        Ok(Transcript {
            compile_ok: true,
            compile_log: compile.text,
            exit_ok: sim.ok,
            sim_log: sim.text,
            timed_out: sim.timed_out,
            vcd_path: if job.dump_vcd { find_vcd(&job.work_dir) } else { None },
            wall_time: start.elapsed().as_secs_f64(),
        }
        .into_result(patterns))
    }
}

// ----- scripted -------------------------------------------------------------

/// `run.json` of one scripted step.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixtureMeta {
    pub compile_ok: bool,
    pub exit_ok: bool,
    pub timed_out: bool,
    pub purpose: Purpose,
    /// Only used for a job whose RTL contains this text.
    pub rtl_contains: Option<String>,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
struct Fixture {
    dir: PathBuf,
    meta: FixtureMeta,
}

/// Replays `NN/` step directories (`run.json`, `compile.log`, `sim.log`,
/// `wave.vcd`). Each job takes the first unused step with the same purpose
/// whose `rtl_contains` filter matches.
#[derive(Debug)]
pub struct Scripted {
    fixtures: Vec<Fixture>,
    used: Mutex<BTreeSet<usize>>,
    jobs: Mutex<Vec<(Purpose, String)>>,
}

impl Scripted {
    pub fn from_dir(dir: &Path) -> Result<Self, SimError> {
        let mut steps: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| SimError::Fixture(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        steps.sort();
        let mut fixtures = Vec::new();
        for s in steps {
            let raw = std::fs::read_to_string(s.join("run.json"))
                .map_err(|e| SimError::Fixture(format!("{}/run.json: {e}", s.display())))?;
            let meta: FixtureMeta = serde_json::from_str(&raw)
                .map_err(|e| SimError::Fixture(format!("{}/run.json: {e}", s.display())))?;
            fixtures.push(Fixture { dir: s, meta });
        }
        if fixtures.is_empty() {
            return Err(SimError::Fixture(format!("{}: no steps", dir.display())));
        }
        Ok(Scripted {
            fixtures,
            used: Mutex::default(),
            jobs: Mutex::default(),
        })
    }

    /// Purpose and concatenated RTL of every job seen.
    pub fn jobs(&self) -> Vec<(Purpose, String)> {
        self.jobs.lock().unwrap().clone()
    }
}

fn read_opt(p: &Path) -> Result<String, SimError> {
    match std::fs::read_to_string(p) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(String::new()),
        Err(e) => Err(e.into()),
    }
}

impl SimBackend for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn run(&self, job: &SimJob, patterns: &LogPatterns) -> Result<SimResult, SimError> {
        check_job(job)?;
        let mut rtl = String::new();
        for f in &job.rtl_files {
            rtl.push_str(&std::fs::read_to_string(f)?);
        }
        self.jobs.lock().unwrap().push((job.purpose, rtl.clone()));
        let mut used = self.used.lock().unwrap();
        let (i, fx) = self
            .fixtures
            .iter()
            .enumerate()
            .find(|(i, f)| {
                !used.contains(i)
                    && f.meta.purpose == job.purpose
                    && f.meta.rtl_contains.as_ref().is_none_or(|s| rtl.contains(s.as_str()))
            })
            .ok_or_else(|| SimError::Fixture(format!("no step left for a {:?} job", job.purpose)))?;
        used.insert(i);
        let vcd_src = fx.dir.join("wave.vcd");
        let vcd_path = if job.dump_vcd && fx.meta.compile_ok && vcd_src.exists() {
            let dst = job.work_dir.join("wave.vcd");
            std::fs::copy(&vcd_src, &dst)?;
            Some(dst)
        } else {
            None
        };
        Ok(Transcript {
            compile_ok: fx.meta.compile_ok,
            compile_log: read_opt(&fx.dir.join("compile.log"))?,
            exit_ok: fx.meta.exit_ok,
            sim_log: read_opt(&fx.dir.join("sim.log"))?,
            timed_out: fx.meta.timed_out,
            vcd_path,
            wall_time: fx.meta.wall_time,
        }
        .into_result(patterns))
    }
}
