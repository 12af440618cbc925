//! The repair loop: contract, harness and RTL from the agents, then
//! simulate, diagnose, gather formal hints and patch until the design
//! passes or the iteration budget runs out.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use verisure_core::agents::{assemble_prompt, extract_payload, BlockView, ChatMessage, Payload, PromptContext, Role};
use verisure_core::bench::Label;
use verisure_core::contract::{from_value, lint, render_contract, DesignContract};
use verisure_core::formal::{
    build_miter, derive_obligations, emit_assertions, parse_violations, stimulus_snippet, synthesize_spec,
    FormalError, ProofStatus,
};
use verisure_core::patch::{try_patch, FailureSignature, TryPatchError};
use verisure_core::rtl_graph::{
    backward_slice, build_graph, decompose, line_byte_range, line_starts, strip_reads, BlockKind,
    DependencyGraph, RtlBlock, SuspectSet,
};
use verisure_core::simlog::Stage;
use verisure_core::trace::{build_report, parse_vcd, ReportInputs, TraceReport};

use crate::config::GlobalConfig;
use crate::llm::{LlmError, ModelBackend, SamplingParams};
use crate::manifest::ProblemManifest;
use crate::prover::Prover;
use crate::sim::{LogPatterns, Purpose, SimBackend, SimError, SimJob, SimResult};

#[derive(Clone, Copy)]
pub struct Backends<'a> {
    pub model: &'a dyn ModelBackend,
    pub sim: &'a dyn SimBackend,
    pub prover: &'a dyn Prover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Passed,
    FailedBudget,
    FailedError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Contract,
    Harness,
    Code,
    Simulate,
    Diagnose,
    Formal,
    Debug,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: u32,
    pub phase: Phase,
    pub action: String,
    pub signature: Option<FailureSignature>,
    /// Set for patch attempts.
    pub accepted: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTurn {
    pub role: Role,
    pub prompt: Vec<ChatMessage>,
    pub raw: String,
    pub extracted: Option<Payload>,
    pub malformed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofRecord {
    pub iteration: u32,
    pub targets: Vec<String>,
    pub status: ProofStatus,
    /// Counterexample as directed stimulus.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarnessOrigin {
    Golden,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    /// As reported by the simulator backend.
    pub sim_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub problem: String,
    pub difficulty: Option<Label>,
    pub status: Status,
    pub syntax_pass: bool,
    pub functional_pass: bool,
    pub iterations_used: u32,
    pub final_signature: Option<FailureSignature>,
    pub harness: Option<HarnessOrigin>,
    pub contract: Option<String>,
    pub final_rtl: String,
    pub history: Vec<HistoryEntry>,
    pub trace_reports: Vec<String>,
    pub proofs: Vec<ProofRecord>,
    pub timings: Timings,
    pub error: Option<String>,
}

impl SessionReport {
    /// Report for a problem that could not start.
    pub fn errored(problem: &str, difficulty: Option<Label>, error: String) -> Self {
        SessionReport {
            problem: problem.to_string(),
            difficulty,
            status: Status::FailedError,
            syntax_pass: false,
            functional_pass: false,
            iterations_used: 0,
            final_signature: None,
            harness: None,
            contract: None,
            final_rtl: String::new(),
            history: Vec::new(),
            trace_reports: Vec::new(),
            proofs: Vec::new(),
            timings: Timings::default(),
            error: Some(error),
        }
    }
}

/// Infrastructure faults end the session as `failed_error`.
#[derive(Debug, thiserror::Error)]
pub enum Fatal {
    #[error("model backend: {0}")]
    Model(#[from] LlmError),
    #[error("simulator: {0}")]
    Sim(#[from] SimError),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Internal(String),
}

pub struct SessionState {
    pub problem: ProblemManifest,
    pub phase: Phase,
    pub status: Status,
    pub contract: Option<DesignContract>,
    pub contract_text: Option<String>,
    pub rtl: String,
    pub testbench: Option<PathBuf>,
    pub harness: Option<HarnessOrigin>,
    /// Debugger patch attempts so far.
    pub iteration: u32,
    pub max_iterations: u32,
    pub history: Vec<HistoryEntry>,
    /// Malformed-response retries spent, per role.
    pub budgets: BTreeMap<Role, u32>,
    pub current: Option<SimResult>,
    pub signature: Option<FailureSignature>,
    pub graph: Option<DependencyGraph>,
    pub suspects: Option<SuspectSet>,
    pub degraded: bool,
    pub report: Option<TraceReport>,
    pub trace_reports: Vec<String>,
    pub hints: Vec<String>,
    pub proofs: Vec<ProofRecord>,
    pub turns: Vec<AgentTurn>,
    pub feedback: Option<String>,
    pub error: Option<String>,
    pub timings: Timings,
    proved: BTreeSet<u64>,
    asserter_checker: Option<String>,
    runs: u32,
    work: tempfile::TempDir,
}

pub struct Session<'a> {
    pub state: SessionState,
    backends: Backends<'a>,
    config: &'a GlobalConfig,
    patterns: LogPatterns,
    params: SamplingParams,
}

fn fingerprint(s: &str) -> u64 {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

fn signature_of(r: &SimResult) -> FailureSignature {
    match (&r.log, r.stage) {
        (_, Stage::CompileFail) => FailureSignature::compile_fail(),
        (Some(l), _) => FailureSignature::from_log(l),
        (None, Stage::Pass) => FailureSignature::pass(),
        (None, Stage::SimFail) => FailureSignature {
            stage: Stage::SimFail,
            t_f: r.first_failure_time.unwrap_or(0),
            m: r.mismatch_count.unwrap_or(1),
            m_defaulted: r.mismatch_count.is_none(),
        },
    }
}

fn fmt_sig(s: &FailureSignature) -> String {
    match s.stage {
        Stage::SimFail => format!("sim_fail(t_f={}, m={})", s.t_f, s.m),
        st => st.as_str().to_string(),
    }
}

/// Simulation top: the manifest's choice, else the first module of the
/// harness, else `tb`.
fn harness_top(problem: &ProblemManifest, tb: Option<&str>) -> String {
    if let Some(t) = &problem.top {
        return t.clone();
    }
    let re = regex::Regex::new(r"(?m)^\s*module\s+([A-Za-z_][A-Za-z0-9_$]*)").unwrap();
    tb.and_then(|s| re.captures(s))
        .map(|c| c[1].to_string())
        .unwrap_or_else(|| "tb".into())
}

/// One block spanning the whole file, for sources the analyzer cannot
/// decompose.
fn whole_file_block(src: &str) -> RtlBlock {
    let starts = line_starts(src);
    let lines = if src.ends_with('\n') { starts.len() - 1 } else { starts.len() }.max(1);
    let (s, e) = line_byte_range(src, &starts, (1, lines));
    RtlBlock {
        id: 0,
        kind: BlockKind::AlwaysGeneric,
        span: (1, lines),
        text: src[s..e].to_string(),
        reads: BTreeSet::new(),
        writes: BTreeSet::new(),
        module: String::new(),
        sequential: false,
    }
}

fn clocking_text(c: &DesignContract) -> String {
    let mut s = match c.clock() {
        Some((n, e)) => format!("clock {n} ({})", e.as_str()),
        None => "no clock".to_string(),
    };
    if let Some((n, a, k)) = c.reset() {
        s.push_str(&format!("; reset {n} (active {}, {})", a.as_str(), k.as_str()));
    }
    s
}

fn summary_text(c: &DesignContract) -> String {
    let Some(f) = &c.functional_summary else { return String::new() };
    let mut s = f.overview.clone();
    for r in &f.rules {
        s.push_str(&format!(
            "\n- {} [{}]: {}",
            r.id.as_deref().unwrap_or("rule"),
            r.kind.as_ref().map(|k| k.as_str()).unwrap_or("unspecified"),
            r.expression.as_deref().unwrap_or("")
        ));
    }
    s
}

impl<'a> Session<'a> {
    pub fn new(problem: ProblemManifest, backends: Backends<'a>, config: &'a GlobalConfig) -> Result<Self, Fatal> {
        let patterns = LogPatterns::new(&config.sim.mismatch_patterns, problem.success_regex.as_deref())
            .map_err(|e| Fatal::Internal(format!("log pattern: {e}")))?;
        Ok(Session {
            state: SessionState {
                problem,
                phase: Phase::Contract,
                status: Status::Running,
                contract: None,
                contract_text: None,
                rtl: String::new(),
                testbench: None,
                harness: None,
                iteration: 0,
                max_iterations: config.max_iterations,
                history: Vec::new(),
                budgets: BTreeMap::new(),
                current: None,
                signature: None,
                graph: None,
                suspects: None,
                degraded: false,
                report: None,
                trace_reports: Vec::new(),
                hints: Vec::new(),
                proofs: Vec::new(),
                turns: Vec::new(),
                feedback: None,
                error: None,
                timings: Timings::default(),
                proved: BTreeSet::new(),
                asserter_checker: None,
                runs: 0,
                work: tempfile::tempdir()?,
            },
            backends,
            config,
            patterns,
            params: SamplingParams {
                temperature: config.llm.temperature,
                max_tokens: config.llm.max_tokens,
            },
        })
    }

    fn log(&mut self, phase: Phase, action: impl Into<String>, accepted: Option<bool>) {
        let s = &mut self.state;
        s.history.push(HistoryEntry {
            iteration: s.iteration,
            phase,
            action: action.into(),
            signature: s.signature,
            accepted,
        });
    }

    fn finish(&mut self, status: Status) {
        self.state.status = status;
        self.state.phase = Phase::Done;
    }

    /// One model turn. `Ok(Err(reason))` is a malformed answer.
    fn ask(&mut self, role: Role, ctx: &PromptContext, allowed: &[usize]) -> Result<Result<Payload, String>, Fatal> {
        let prompt = assemble_prompt(role, ctx).map_err(|e| Fatal::Internal(e.to_string()))?;
        let raw = self.backends.model.complete(&prompt, &self.params)?;
        let got = extract_payload(role, &raw, allowed).map_err(|e| e.reason);
        self.state.turns.push(AgentTurn {
            role,
            prompt,
            raw,
            extracted: got.as_ref().ok().cloned(),
            malformed: got.as_ref().err().cloned(),
        });
        Ok(got)
    }

    /// Ask until the answer is well formed and `accept` takes it, within
    /// the retry budget.
    fn ask_until<T>(
        &mut self,
        role: Role,
        mut ctx: PromptContext,
        allowed: &[usize],
        phase: Phase,
        mut accept: impl FnMut(Payload, &mut PromptContext) -> Result<T, String>,
    ) -> Result<Option<T>, Fatal> {
        for attempt in 0..=self.config.llm.retries {
            if attempt > 0 {
                *self.state.budgets.entry(role).or_default() += 1;
            }
            let reason = match self.ask(role, &ctx, allowed)? {
                Ok(p) => match accept(p, &mut ctx) {
                    Ok(v) => return Ok(Some(v)),
                    Err(r) => r,
                },
                Err(r) => r,
            };
            self.log(phase, format!("{}: rejected answer ({reason})", role.as_str()), None);
            ctx.feedback = Some(reason);
        }
        Ok(None)
    }

    fn contract(&self) -> Result<&DesignContract, Fatal> {
        self.state
            .contract
            .as_ref()
            .ok_or_else(|| Fatal::Internal("no contract".into()))
    }

    /// Advance one phase.
    pub fn step(&mut self) {
        if self.state.status != Status::Running {
            return;
        }
        let phase = self.state.phase;
        let r = match phase {
            Phase::Contract => self.phase_contract(),
            Phase::Harness => self.phase_harness(),
            Phase::Code => self.phase_code(),
            Phase::Simulate => self.phase_simulate(),
            Phase::Diagnose => self.phase_diagnose(),
            Phase::Formal => self.phase_formal(),
            Phase::Debug => self.phase_debug(),
            Phase::Done => Ok(()),
        };
        if let Err(e) = r {
            self.state.error = Some(e.to_string());
            self.log(phase, format!("infrastructure failure: {e}"), None);
            self.finish(Status::FailedError);
        }
    }

    fn phase_contract(&mut self) -> Result<(), Fatal> {
        let p = &self.state.problem;
        let ctx = PromptContext {
            task: Some(p.prompt.clone()),
            interface_stub: p.interface_stub.clone(),
            testbench: match &p.testbench {
                Some(t) => Some(std::fs::read_to_string(t)?),
                None => None,
            },
            ..Default::default()
        };
        let got = self.ask_until(Role::Architect, ctx, &[], Phase::Contract, |payload, ctx| {
            let Payload::Contract(v) = payload else { return Err("expected a JSON contract".into()) };
            let c = from_value(&v).map_err(|e| format!("contract unreadable: {e}"))?;
            let r = lint(&c);
            match r.canonical {
                Some(canon) => Ok(canon),
                None => {
                    ctx.lint_errors = Some(r.summary());
                    Err(format!("{} lint error(s)", r.errors.len()))
                }
            }
        })?;
        match got {
            Some(c) => {
                self.state.contract_text = Some(render_contract(&c));
                self.state.contract = Some(c);
                self.log(Phase::Contract, "architect: contract accepted", None);
                self.state.phase = Phase::Harness;
            }
            None => {
                self.log(Phase::Contract, "architect: retries exhausted", None);
                self.finish(Status::FailedBudget);
            }
        }
        Ok(())
    }

    fn phase_harness(&mut self) -> Result<(), Fatal> {
        if let Some(tb) = self.state.problem.testbench.clone() {
            self.state.testbench = Some(tb);
            self.state.harness = Some(HarnessOrigin::Golden);
            self.log(Phase::Harness, "verifier skipped: golden testbench", None);
            self.state.phase = Phase::Code;
            return Ok(());
        }
        let ctx = PromptContext {
            contract: self.state.contract_text.clone(),
            ..Default::default()
        };
        let got = self.ask_until(Role::Verifier, ctx, &[], Phase::Harness, |p, _| match p {
            Payload::Code(c) => Ok(c),
            _ => Err("expected a fenced testbench".into()),
        })?;
        match got {
            Some(tb) => {
                let path = self.state.work.path().join("testbench.sv");
                std::fs::write(&path, tb)?;
                self.state.testbench = Some(path);
                self.state.harness = Some(HarnessOrigin::Generated);
                self.log(Phase::Harness, "verifier: testbench generated", None);
                self.state.phase = Phase::Code;
            }
            None => {
                self.log(Phase::Harness, "verifier: retries exhausted", None);
                self.finish(Status::FailedBudget);
            }
        }
        Ok(())
    }

    fn phase_code(&mut self) -> Result<(), Fatal> {
        let ctx = PromptContext {
            contract: self.state.contract_text.clone(),
            interface_stub: self.state.problem.interface_stub.clone(),
            ..Default::default()
        };
        let got = self.ask_until(Role::Coder, ctx, &[], Phase::Code, |p, _| match p {
            Payload::Code(c) => Ok(c),
            _ => Err("expected fenced RTL".into()),
        })?;
        match got {
            Some(rtl) => {
                self.state.rtl = rtl;
                self.log(Phase::Code, "coder: RTL generated", None);
                self.state.phase = Phase::Simulate;
            }
            None => {
                self.log(Phase::Code, "coder: retries exhausted", None);
                self.finish(Status::FailedBudget);
            }
        }
        Ok(())
    }

    fn simulate(&mut self, rtl: &str, purpose: Purpose, extra: &[(&str, &str)]) -> Result<SimResult, Fatal> {
        self.state.runs += 1;
        let dir = self.state.work.path().join(format!("run_{:03}", self.state.runs));
        std::fs::create_dir_all(&dir)?;
        let dut = dir.join("dut.sv");
        std::fs::write(&dut, rtl)?;
        let tb = self
            .state
            .testbench
            .clone()
            .ok_or_else(|| Fatal::Internal("no testbench".into()))?;
        let tb_text = std::fs::read_to_string(&tb)?;
        let mut job = SimJob::new(&harness_top(&self.state.problem, Some(&tb_text)), &dir);
        job.rtl_files.push(dut);
        job.testbench_files.push(tb);
        for (name, text) in extra {
            let p = dir.join(name);
            std::fs::write(&p, text)?;
            job.extra_files.push(p);
        }
        job.timeout = Duration::from_secs(self.config.sim.timeout_s);
        job.dump_vcd = purpose == Purpose::Design;
        job.purpose = purpose;
        let r = self.backends.sim.run(&job, &self.patterns)?;
        self.state.timings.sim_seconds += r.wall_time;
        Ok(r)
    }

    fn phase_simulate(&mut self) -> Result<(), Fatal> {
        let rtl = self.state.rtl.clone();
        let r = self.simulate(&rtl, Purpose::Design, &[])?;
        let sig = signature_of(&r);
        self.state.signature = Some(sig);
        self.state.current = Some(r);
        self.log(Phase::Simulate, format!("simulated: {}", fmt_sig(&sig)), None);
        if sig.stage == Stage::Pass {
            self.finish(Status::Passed);
        } else if self.state.iteration >= self.state.max_iterations {
            self.finish(Status::FailedBudget);
        } else {
            self.state.phase = Phase::Diagnose;
        }
        Ok(())
    }

    fn phase_diagnose(&mut self) -> Result<(), Fatal> {
        let contract = self.contract()?.clone();
        let cur = self
            .state
            .current
            .clone()
            .ok_or_else(|| Fatal::Internal("nothing simulated".into()))?;
        let rtl = self.state.rtl.clone();
        let mut degraded = false;
        let blocks = match decompose(&rtl) {
            Ok(mut b) => {
                strip_reads(&mut b, &contract.clock_reset_names());
                b
            }
            Err(_) => {
                degraded = true;
                vec![whole_file_block(&rtl)]
            }
        };
        let graph = build_graph(blocks);
        let vcd = cur
            .vcd_path
            .as_ref()
            .and_then(|p| std::fs::read_to_string(p).ok())
            .and_then(|t| parse_vcd(&t).ok());
        let mut inputs = ReportInputs {
            stage: cur.stage,
            log: cur.log.as_ref(),
            diagnostics: &cur.diagnostics,
            vcd: vcd.as_ref(),
            contract: &contract,
            graph: None,
            suspect: None,
            k: self.config.window_k,
        };
        let first = build_report(&inputs).map_err(|e| Fatal::Internal(e.to_string()))?;
        let failing: Vec<String> = first.failing_signals.iter().map(|f| f.name.clone()).collect();
        let mut sus = backward_slice(&graph, &failing, self.config.d_max);
        if sus.is_empty() {
            degraded = true;
            sus = SuspectSet::everything(&graph, &failing);
        }
        inputs.graph = Some(&graph);
        inputs.suspect = Some(&sus);
        let report = build_report(&inputs).map_err(|e| Fatal::Internal(e.to_string()))?;
        self.state.trace_reports.push(report.render_text());
        let action = format!(
            "trace: t_f={}, failing [{}], suspects {:?}{}",
            report.t_f.map(|t| t.to_string()).unwrap_or_else(|| "-".into()),
            failing.join(","),
            sus.block_ids,
            if degraded { " (degraded: whole file)" } else { "" }
        );
        self.state.report = Some(report);
        self.state.graph = Some(graph);
        self.state.suspects = Some(sus);
        self.state.degraded = degraded;
        self.state.hints.clear();
        self.log(Phase::Diagnose, action, None);
        self.state.phase = if self.config.formal.enabled && cur.stage == Stage::SimFail {
            Phase::Formal
        } else {
            Phase::Debug
        };
        Ok(())
    }

    fn phase_formal(&mut self) -> Result<(), Fatal> {
        let contract = self.contract()?.clone();
        let graph = self.state.graph.clone().ok_or_else(|| Fatal::Internal("no graph".into()))?;
        let obligations = derive_obligations(&contract, &graph);
        let mut hints = Vec::new();
        let mut notes = Vec::new();

        // Assertion run on the current RTL.
        if obligations.seq().next().is_some() {
            match emit_assertions(&contract, obligations.seq()) {
                Ok(bundle) => {
                    if !bundle.delegated.is_empty() && self.state.asserter_checker.is_none() {
                        self.ask_asserter(&contract, &bundle.delegated)?;
                    }
                    let mut extra = vec![("checker.sv", bundle.checker.as_str()), ("bind.sv", bundle.bind.as_str())];
                    let asserter = self.state.asserter_checker.clone().unwrap_or_default();
                    if !asserter.is_empty() {
                        extra.push(("asserter.sv", asserter.as_str()));
                    }
                    let rtl = self.state.rtl.clone();
                    match self.simulate(&rtl, Purpose::Assertions, &extra) {
                        Ok(r) => {
                            let (viol, _) = parse_violations(&r.diagnostics);
                            for v in &viol {
                                hints.push(format!("assertion {} failed at t={}: {}", v.name, v.time, v.message));
                            }
                            notes.push(format!("{} assertion(s) checked, {} violated", bundle.names.len(), viol.len()));
                        }
                        Err(Fatal::Sim(e)) => notes.push(format!("assertion run skipped: {e}")),
                        Err(e) => return Err(e),
                    }
                }
                Err(e) => notes.push(format!("assertions not emitted: {e}")),
            }
        }

        // Combinational proof, once per RTL version.
        let targets = obligations.comb_targets();
        let fp = fingerprint(&self.state.rtl);
        if !targets.is_empty() && !self.state.proved.contains(&fp) {
            self.state.proved.insert(fp);
            let spec = match synthesize_spec(&contract, &targets) {
                Ok(s) => Some(s),
                Err(FormalError::NoRule(_)) => self.ask_proofer(&contract, &targets)?,
                Err(e) => {
                    notes.push(format!("spec not synthesized: {e}"));
                    None
                }
            };
            if let Some(spec) = spec {
                match build_miter(&contract, &self.state.rtl, &spec, &targets) {
                    Ok(bundle) => {
                        let dir = self.state.work.path().join(format!("proof_{:03}", self.state.proofs.len()));
                        let r = self.backends.prover.prove(
                            contract.module(),
                            &bundle,
                            &dir,
                            Duration::from_secs(self.config.formal.timeout_s),
                        );
                        let witness = r.witness.as_ref().map(stimulus_snippet);
                        match r.status {
                            ProofStatus::Counterexample => hints.push(format!(
                                "combinational outputs [{}] differ from the contract rules under:\n{}",
                                targets.join(", "),
                                witness.clone().unwrap_or_default().trim_end()
                            )),
                            ProofStatus::Proven => hints.push(format!(
                                "combinational outputs [{}] are proven equal to the contract rules",
                                targets.join(", ")
                            )),
                            s => notes.push(format!("proof {}", s.as_str())),
                        }
                        self.state.proofs.push(ProofRecord {
                            iteration: self.state.iteration,
                            targets: targets.clone(),
                            status: r.status,
                            witness,
                        });
                    }
                    Err(FormalError::PortMismatch(v)) => hints.push(format!("interface differs from the contract: {}", v.join("; "))),
                    Err(e) => notes.push(format!("miter not built: {e}")),
                }
            }
        }
        let action = format!("formal: {} hint(s){}", hints.len(), if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) });
        self.state.hints = hints;
        self.log(Phase::Formal, action, None);
        self.state.phase = Phase::Debug;
        Ok(())
    }

    fn ask_asserter(&mut self, contract: &DesignContract, delegated: &[String]) -> Result<(), Fatal> {
        let ctx = PromptContext {
            contract: self.state.contract_text.clone(),
            clocking: Some(clocking_text(contract)),
            obligations: delegated.to_vec(),
            ..Default::default()
        };
        let got = self.ask_until(Role::Asserter, ctx, &[], Phase::Formal, |p, _| match p {
            Payload::Code(c) => Ok(c),
            _ => Err("expected a fenced checker".into()),
        })?;
        // an empty string marks "asked, nothing usable"
        self.state.asserter_checker = Some(got.unwrap_or_default());
        Ok(())
    }

    fn ask_proofer(&mut self, contract: &DesignContract, targets: &[String]) -> Result<Option<String>, Fatal> {
        let ctx = PromptContext {
            summary: Some(summary_text(contract)),
            targets: targets.to_vec(),
            ..Default::default()
        };
        self.ask_until(Role::Proofer, ctx, &[], Phase::Formal, |p, _| match p {
            Payload::Code(c) => Ok(c),
            _ => Err("expected a fenced spec module".into()),
        })
    }

    fn phase_debug(&mut self) -> Result<(), Fatal> {
        let graph = self.state.graph.clone().ok_or_else(|| Fatal::Internal("no graph".into()))?;
        let sus = self.state.suspects.clone().ok_or_else(|| Fatal::Internal("no slice".into()))?;
        let before = self.state.signature.ok_or_else(|| Fatal::Internal("no signature".into()))?;
        let blocks: Vec<BlockView> = sus
            .block_ids
            .iter()
            .filter_map(|id| graph.blocks.iter().find(|b| b.id == *id))
            .map(|b| BlockView {
                id: b.id,
                kind: b.kind.as_str().to_string(),
                lines: b.span,
                text: b.text.clone(),
            })
            .collect();
        let formal_hints = if self.config.formal.enabled && !self.state.hints.is_empty() {
            Some(self.state.hints.join("\n"))
        } else {
            None
        };
        let ctx = PromptContext {
            contract: self.state.contract_text.clone(),
            trace_report: self.state.trace_reports.last().cloned(),
            blocks,
            degraded_locality: self.state.degraded,
            formal_hints,
            feedback: self.state.feedback.take(),
            ..Default::default()
        };
        let allowed = sus.block_ids.clone();
        let ops = self.ask_until(Role::Debugger, ctx, &allowed, Phase::Debug, |p, _| match p {
            Payload::Edits(ops) => Ok(ops),
            _ => Err("expected block edits".into()),
        })?;

        let mut accepted = false;
        match ops {
            None => {
                self.state.feedback = Some("previous answers were not usable block edits".into());
                self.log(Phase::Debug, "debugger: no usable edits", Some(false));
            }
            Some(ops) => {
                let mut rtl = self.state.rtl.clone();
                let mut candidate: Option<SimResult> = None;
                let outcome = try_patch(&mut rtl, before, &graph, &sus, &ops, |text| {
                    let r = self.simulate(text, Purpose::Design, &[])?;
                    let s = signature_of(&r);
                    candidate = Some(r);
                    Ok::<_, Fatal>(s)
                });
                let ids: Vec<usize> = ops.iter().map(|o| o.block_id).collect();
                match outcome {
                    Ok(o) => {
                        accepted = o.accepted;
                        let verdict = format!("{} -> {}", fmt_sig(&o.before), fmt_sig(&o.after));
                        if o.accepted {
                            self.state.rtl = rtl;
                            self.state.signature = Some(o.after);
                            self.state.current = candidate;
                            self.log(Phase::Debug, format!("patch blocks {ids:?} kept: {verdict}"), Some(true));
                        } else {
                            self.state.feedback = Some(format!(
                                "your patch to blocks {ids:?} was reverted because it did not improve the failure ({verdict})"
                            ));
                            self.log(Phase::Debug, format!("patch blocks {ids:?} reverted: {verdict}"), Some(false));
                        }
                    }
                    Err(TryPatchError::Patch(e)) => {
                        self.state.feedback = Some(format!("your patch was refused: {e}"));
                        self.log(Phase::Debug, format!("patch refused: {e}"), Some(false));
                    }
                    Err(TryPatchError::Evaluate(e)) => return Err(e),
                }
            }
        }
        self.state.iteration += 1;
        if self.state.signature.is_some_and(|s| s.stage == Stage::Pass) {
            self.finish(Status::Passed);
        } else if self.state.iteration >= self.state.max_iterations {
            self.log(Phase::Debug, "iteration budget exhausted", None);
            self.finish(Status::FailedBudget);
        } else {
            // a rejected patch leaves the design, and so the diagnosis, as is
            self.state.phase = if accepted { Phase::Diagnose } else { Phase::Debug };
        }
        Ok(())
    }

    pub fn report(&self) -> SessionReport {
        let s = &self.state;
        let syntax_pass = s.current.as_ref().is_some_and(|r| r.stage != Stage::CompileFail);
        SessionReport {
            problem: s.problem.id.clone(),
            difficulty: s.problem.difficulty,
            status: s.status,
            syntax_pass,
            functional_pass: s.status == Status::Passed && syntax_pass,
            iterations_used: s.iteration,
            final_signature: s.signature,
            harness: s.harness.clone(),
            contract: s.contract_text.clone(),
            final_rtl: s.rtl.clone(),
            history: s.history.clone(),
            trace_reports: s.trace_reports.clone(),
            proofs: s.proofs.clone(),
            timings: s.timings.clone(),
            error: s.error.clone(),
        }
    }
}

/// Run a problem to completion.
pub fn run_session(problem: ProblemManifest, backends: Backends<'_>, config: &GlobalConfig) -> SessionReport {
    let (id, diff) = (problem.id.clone(), problem.difficulty);
    let mut s = match Session::new(problem, backends, config) {
        Ok(s) => s,
        Err(e) => return SessionReport::errored(&id, diff, e.to_string()),
    };
    while s.state.status == Status::Running {
        s.step();
    }
    s.report()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_file_block_matches_source_lines() {
        let src = "module m(\n  input a\n);\nendmodule\n";
        let b = whole_file_block(src);
        assert_eq!(b.span, (1, 4));
        assert_eq!(b.text, src.trim_end_matches('\n'));
    }

    #[test]
    fn top_detection() {
        let mut p = crate::manifest::ProblemManifest {
            id: "x".into(),
            dir: PathBuf::new(),
            prompt: String::new(),
            interface_stub: None,
            testbench: None,
            reference: None,
            difficulty: None,
            difficulty_source: None,
            success_regex: None,
            top: None,
            warnings: Vec::new(),
        };
        assert_eq!(harness_top(&p, Some("`timescale 1ns/1ps\nmodule tb_top;\nendmodule")), "tb_top");
        assert_eq!(harness_top(&p, None), "tb");
        p.top = Some("bench".into());
        assert_eq!(harness_top(&p, Some("module tb; endmodule")), "bench");
    }
}
