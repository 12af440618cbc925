//! Command-line front end. Exit codes: 0 success, 1 domain failure (lint
//! errors, locality violation, failing design), 2 usage error, 3
//! infrastructure error (missing tool, unreadable file).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use verisure_core::bench::{measure, score};
use verisure_core::contract::{lint, parse_contract, render_contract, DesignContract};
use verisure_core::formal::{build_miter, derive_obligations, emit_assertions, synthesize_spec, ProofStatus};
use verisure_core::patch::{apply_patch, PatchOp};
use verisure_core::rtl_graph::{backward_slice, build_graph, decompose, strip_reads};
use verisure_core::simlog::Stage;
use verisure_core::trace::{build_report, parse_vcd, ReportError, ReportInputs};

use crate::benchmark::{run_benchmark, BackendFactory, ConfiguredBackends};
use crate::config::GlobalConfig;
use crate::manifest::load_problem;
use crate::prover::{read_inputs, run_proof, write_bundle, Exhaustive, Prover, Sby};
use crate::session::{run_session, Backends, Status};
use crate::sim::{External, LogPatterns, SimBackend, SimError, SimJob};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFRA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "verisure", version, about = "Contract-driven RTL generation, verification and localized repair")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// JSON configuration file (overrides environment and defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Design contract tools.
    #[command(subcommand)]
    Contract(ContractCmd),
    /// Backward slice from failing signals.
    Slice {
        rtl: PathBuf,
        /// Comma-separated failing signals.
        #[arg(long, value_delimiter = ',', required = true)]
        fail: Vec<String>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Waveform diagnosis.
    #[command(subcommand)]
    Trace(TraceCmd),
    /// Offline block patching.
    #[command(subcommand)]
    Patch(PatchCmd),
    /// Miter, proof and assertion emission.
    #[command(subcommand)]
    Formal(FormalCmd),
    /// Compile and simulate with the external toolchain.
    Sim {
        #[arg(long, required = true)]
        rtl: Vec<PathBuf>,
        #[arg(long, required = true)]
        tb: Vec<PathBuf>,
        #[arg(long)]
        vcd: bool,
        #[arg(long, default_value = "tb")]
        top: String,
        #[arg(long)]
        timeout: Option<u64>,
    },
    /// Difficulty grading and benchmark sweeps.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Run the full loop on one problem directory.
    Run {
        #[arg(long)]
        problem: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum ContractCmd {
    Lint {
        file: PathBuf,
        #[arg(long)]
        canonical_out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum TraceCmd {
    Report {
        #[arg(long)]
        vcd: PathBuf,
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        contract: PathBuf,
        #[arg(long)]
        rtl: PathBuf,
        /// Window length in cycles.
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        depth: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
enum PatchCmd {
    Apply {
        #[arg(long)]
        rtl: PathBuf,
        #[arg(long)]
        block: usize,
        #[arg(long)]
        replacement: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        fail: Vec<String>,
        #[arg(long)]
        depth: Option<usize>,
        /// Write the patched source here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum FormalCmd {
    Miter {
        #[arg(long)]
        contract: PathBuf,
        #[arg(long)]
        rtl: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Prove {
        dir: PathBuf,
        #[arg(long)]
        timeout: Option<u64>,
        /// Enumerate inputs instead of calling the prover (small designs).
        #[arg(long)]
        exhaustive: bool,
    },
    Assert {
        #[arg(long)]
        contract: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Used to tell register outputs from combinational ones.
        #[arg(long)]
        rtl: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum BenchCmd {
    Grade { path: PathBuf },
    Run {
        #[arg(long)]
        manifests: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Result of a command: human text, its JSON mirror and the exit code.
struct Output {
    text: String,
    json: Value,
    code: i32,
}

fn ok(text: String, json: Value) -> Result<Output, Failure> {
    Ok(Output { text, json, code: EXIT_OK })
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn infra(m: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_INFRA, message: m.to_string() }
}

fn domain(m: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_DOMAIN, message: m.to_string() }
}

fn read(p: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(p).map_err(|e| infra(format!("{}: {e}", p.display())))
}

fn write(p: &Path, text: &str) -> Result<(), Failure> {
    if let Some(d) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(d).map_err(|e| infra(format!("{}: {e}", d.display())))?;
    }
    std::fs::write(p, text).map_err(|e| infra(format!("{}: {e}", p.display())))
}

fn load_contract(p: &Path) -> Result<DesignContract, Failure> {
    let c = parse_contract(&read(p)?).map_err(|e| domain(format!("{}: {e}", p.display())))?;
    let r = lint(&c);
    let summary = r.summary();
    r.canonical
        .ok_or_else(|| domain(format!("{}: contract has lint errors\n{summary}", p.display())))
}

fn config(path: Option<&Path>) -> Result<GlobalConfig, Failure> {
    GlobalConfig::load(path).map_err(|e| Failure { code: EXIT_USAGE, message: e.to_string() })
}

/// Parse `argv` (program name first), run, print, return the exit code.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let json_mode = argv.iter().any(|a| a == "--json");
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            if json_mode {
                let v = json!({"error": e.kind().to_string(), "detail": e.to_string(), "exit_code": EXIT_USAGE});
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap());
            }
            let _ = write!(err, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            if cli.json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&o.json).unwrap());
            } else {
                let _ = write!(out, "{}", o.text);
            }
            o.code
        }
        Err(f) => {
            if cli.json {
                let v = json!({"error": f.message, "exit_code": f.code});
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap());
            }
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    match &cli.cmd {
        Cmd::Contract(ContractCmd::Lint { file, canonical_out }) => contract_lint(file, canonical_out.as_deref()),
        Cmd::Slice { rtl, fail, depth } => slice(rtl, fail, depth.unwrap_or(config(cli.config.as_deref())?.d_max)),
        Cmd::Trace(TraceCmd::Report { vcd, log, contract, rtl, k, depth }) => {
            let c = config(cli.config.as_deref())?;
            trace_report(vcd, log, contract, rtl, k.unwrap_or(c.window_k), depth.unwrap_or(c.d_max))
        }
        Cmd::Patch(PatchCmd::Apply { rtl, block, replacement, fail, depth, out }) => {
            let d = depth.unwrap_or(config(cli.config.as_deref())?.d_max);
            patch_apply(rtl, *block, replacement, fail, d, out.as_deref())
        }
        Cmd::Formal(FormalCmd::Miter { contract, rtl, out }) => formal_miter(contract, rtl, out),
        Cmd::Formal(FormalCmd::Prove { dir, timeout, exhaustive }) => {
            let t = timeout.unwrap_or(config(cli.config.as_deref())?.formal.timeout_s);
            formal_prove(dir, t, *exhaustive)
        }
        Cmd::Formal(FormalCmd::Assert { contract, out, rtl }) => formal_assert(contract, out, rtl.as_deref()),
        Cmd::Sim { rtl, tb, vcd, top, timeout } => {
            let t = timeout.unwrap_or(config(cli.config.as_deref())?.sim.timeout_s);
            simulate(rtl, tb, *vcd, top, t)
        }
        Cmd::Bench(BenchCmd::Grade { path }) => grade(path),
        Cmd::Bench(BenchCmd::Run { manifests, out, jobs }) => {
            let mut c = config(cli.config.as_deref())?;
            if let Some(j) = jobs {
                c.jobs = (*j).max(1);
            }
            bench_run(manifests, out, &c)
        }
        Cmd::Run { problem } => run(problem, &config(cli.config.as_deref())?),
    }
}

fn contract_lint(file: &Path, canonical_out: Option<&Path>) -> Result<Output, Failure> {
    let c = parse_contract(&read(file)?).map_err(|e| domain(format!("{}: {e}", file.display())))?;
    let r = lint(&c);
    let mut text = r.summary();
    if let (Some(p), Some(canon)) = (canonical_out, &r.canonical) {
        write(p, &render_contract(canon))?;
        text.push_str(&format!("canonical contract written to {}\n", p.display()));
    }
    text.push_str(if r.is_clean() { "contract is clean\n" } else { "contract has errors\n" });
    Ok(Output {
        text,
        json: json!({"clean": r.is_clean(), "errors": r.errors, "warnings": r.warnings,
                     "canonical": r.canonical.as_ref().map(render_contract)}),
        code: if r.is_clean() { EXIT_OK } else { EXIT_DOMAIN },
    })
}

fn slice(rtl: &Path, fail: &[String], depth: usize) -> Result<Output, Failure> {
    let blocks = decompose(&read(rtl)?).map_err(|e| domain(format!("{}: {e}", rtl.display())))?;
    let g = build_graph(blocks);
    let s = backward_slice(&g, fail, depth);
    let mut text = String::new();
    for id in &s.block_ids {
        let b = &g.blocks[*id];
        text.push_str(&format!(
            "block {} {} lines {}-{} reads [{}] writes [{}]\n",
            b.id,
            b.kind.as_str(),
            b.span.0,
            b.span.1,
            b.reads.iter().cloned().collect::<Vec<_>>().join(","),
            b.writes.iter().cloned().collect::<Vec<_>>().join(",")
        ));
    }
    if s.is_empty() {
        text.push_str("no block drives the failing signals\n");
    }
    let blocks: Vec<_> = s.block_ids.iter().map(|id| &g.blocks[*id]).collect();
    ok(text, json!({"slice": s, "blocks": blocks}))
}

fn trace_report(vcd: &Path, log: &Path, contract: &Path, rtl: &Path, k: u64, depth: usize) -> Result<Output, Failure> {
    let c = load_contract(contract)?;
    let db = parse_vcd(&read(vcd)?).map_err(|e| domain(format!("{}: {e}", vcd.display())))?;
    let log_text = read(log)?;
    let summary = LogPatterns::default().parse(&log_text, true);
    let mut blocks = decompose(&read(rtl)?).map_err(|e| domain(format!("{}: {e}", rtl.display())))?;
    strip_reads(&mut blocks, &c.clock_reset_names());
    let g = build_graph(blocks);
    let mut inp = ReportInputs {
        stage: summary.verdict,
        log: Some(&summary),
        diagnostics: &log_text,
        vcd: Some(&db),
        contract: &c,
        graph: None,
        suspect: None,
        k,
    };
    let first = build_report(&inp).map_err(|e| match e {
        ReportError::NoFailure => domain("the log shows no failure"),
        e => domain(e),
    })?;
    let fail: Vec<String> = first.failing_signals.iter().map(|f| f.name.clone()).collect();
    let s = backward_slice(&g, &fail, depth);
    inp.graph = Some(&g);
    inp.suspect = Some(&s);
    let r = build_report(&inp).map_err(domain)?;
    ok(r.render_text(), serde_json::to_value(&r).unwrap())
}

fn patch_apply(
    rtl: &Path,
    block: usize,
    replacement: &Path,
    fail: &[String],
    depth: usize,
    out: Option<&Path>,
) -> Result<Output, Failure> {
    let src = read(rtl)?;
    let g = build_graph(decompose(&src).map_err(|e| domain(format!("{}: {e}", rtl.display())))?);
    let s = backward_slice(&g, fail, depth);
    let op = PatchOp { block_id: block, replacement: read(replacement)? };
    let patched = apply_patch(&src, &g, &[op], &s).map_err(domain)?;
    let text = match out {
        Some(p) => {
            write(p, &patched)?;
            format!("patched block {block}; written to {}\n", p.display())
        }
        None => patched.clone(),
    };
    ok(text, json!({"block": block, "patched": patched}))
}

fn formal_miter(contract: &Path, rtl: &Path, out: &Path) -> Result<Output, Failure> {
    let c = load_contract(contract)?;
    let dut = read(rtl)?;
    let mut blocks = decompose(&dut).map_err(|e| domain(format!("{}: {e}", rtl.display())))?;
    strip_reads(&mut blocks, &c.clock_reset_names());
    let g = build_graph(blocks);
    let ob = derive_obligations(&c, &g);
    let targets = ob.comb_targets();
    if targets.is_empty() {
        return Err(domain("no combinational targets: every output is registered or has latency"));
    }
    let spec = synthesize_spec(&c, &targets).map_err(domain)?;
    let b = build_miter(&c, &dut, &spec, &targets).map_err(domain)?;
    write_bundle(&b, out).map_err(infra)?;
    write(&out.join("module.txt"), c.module())?;
    write(&out.join("targets.txt"), &(targets.join("\n") + "\n"))?;
    ok(
        format!("miter for [{}] written to {}\n", targets.join(", "), out.display()),
        json!({"targets": targets, "dir": out, "notes": ob.notes}),
    )
}

fn formal_prove(dir: &Path, timeout: u64, exhaustive: bool) -> Result<Output, Failure> {
    let t = Duration::from_secs(timeout.max(1));
    let r = if exhaustive {
        let module = read(&dir.join("module.txt"))?.trim().to_string();
        let bundle = verisure_core::formal::MiterBundle {
            dut_source: read(&dir.join("dut.sv"))?,
            spec_source: read(&dir.join("spec.sv"))?,
            miter_source: read(&dir.join("miter.sv"))?,
            prove_config: String::new(),
            targets: read(&dir.join("targets.txt")).map(|s| s.lines().map(str::to_string).collect())?,
            inputs: read_inputs(dir),
        };
        Exhaustive.prove(&module, &bundle, dir, t)
    } else {
        run_proof(dir, t, &Sby::default().bin)
    };
    let mut text = format!("proof: {}\n", r.status.as_str());
    if let Some(w) = &r.witness {
        for (n, v) in w {
            text.push_str(&format!("  {n} = {}\n", v.display()));
        }
    }
    let code = match r.status {
        ProofStatus::Proven => EXIT_OK,
        ProofStatus::Counterexample | ProofStatus::Inconclusive => EXIT_DOMAIN,
        ProofStatus::ToolError => EXIT_INFRA,
    };
    Ok(Output { text, json: serde_json::to_value(&r).unwrap(), code })
}

fn formal_assert(contract: &Path, out: &Path, rtl: Option<&Path>) -> Result<Output, Failure> {
    let c = load_contract(contract)?;
    let blocks = match rtl {
        Some(p) => {
            let mut b = decompose(&read(p)?).map_err(|e| domain(format!("{}: {e}", p.display())))?;
            strip_reads(&mut b, &c.clock_reset_names());
            b
        }
        None => Vec::new(),
    };
    let ob = derive_obligations(&c, &build_graph(blocks));
    let b = emit_assertions(&c, ob.seq()).map_err(domain)?;
    write(&out.join("checker.sv"), &b.checker)?;
    write(&out.join("bind.sv"), &b.bind)?;
    let mut text = format!("{} assertion(s) written to {}\n", b.names.len(), out.display());
    for n in &b.names {
        text.push_str(&format!("  {n}\n"));
    }
    for d in &b.delegated {
        text.push_str(&format!("  delegated: {d}\n"));
    }
    ok(text, serde_json::to_value(&b).unwrap())
}

fn simulate(rtl: &[PathBuf], tb: &[PathBuf], vcd: bool, top: &str, timeout: u64) -> Result<Output, Failure> {
    let dir = tempfile::tempdir().map_err(infra)?;
    let abs = |p: &PathBuf| std::fs::canonicalize(p).map_err(|e| infra(format!("{}: {e}", p.display())));
    let mut job = SimJob::new(top, dir.path());
    job.rtl_files = rtl.iter().map(abs).collect::<Result<_, _>>()?;
    job.testbench_files = tb.iter().map(abs).collect::<Result<_, _>>()?;
    job.dump_vcd = vcd;
    job.timeout = Duration::from_secs(timeout.max(1));
    let r = External::default().run(&job, &LogPatterns::default()).map_err(|e| match e {
        SimError::BadJob(m) => Failure { code: EXIT_USAGE, message: m },
        e => infra(e),
    })?;
    // keep the waveform past the scratch directory
    let mut kept = None;
    if let Some(v) = &r.vcd_path {
        let dst = PathBuf::from("wave.vcd");
        std::fs::copy(v, &dst).map_err(infra)?;
        kept = Some(dst);
    }
    let mut text = format!("stage: {}\n", r.stage.as_str());
    if let Some(t) = r.first_failure_time {
        text.push_str(&format!("first failure: t={t}\n"));
    }
    if let Some(m) = r.mismatch_count {
        text.push_str(&format!("mismatches: {m}\n"));
    }
    if r.stage == Stage::CompileFail {
        text.push_str(&r.diagnostics);
    }
    let mut j = serde_json::to_value(&r).unwrap();
    j["vcd_path"] = json!(kept);
    Ok(Output {
        text,
        json: j,
        code: if r.stage == Stage::Pass { EXIT_OK } else { EXIT_DOMAIN },
    })
}

fn grade(path: &Path) -> Result<Output, Failure> {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| infra(format!("{}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "sv" || x == "v"))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut code = EXIT_OK;
    for f in files {
        match measure(&read(&f)?) {
            Ok((m, warnings)) => {
                let d = score(&m);
                text.push_str(&format!(
                    "{}: S={} {} (loc {}, assign {}, always {}, case {}, width {})\n",
                    f.display(),
                    d.score,
                    d.label,
                    m.loc,
                    m.n_assign,
                    m.n_always,
                    m.n_case,
                    m.max_width
                ));
                for w in &warnings {
                    text.push_str(&format!("  warning: {w}\n"));
                }
                rows.push(json!({"file": f, "metrics": m, "difficulty": d, "warnings": warnings}));
            }
            Err(e) => {
                code = EXIT_DOMAIN;
                text.push_str(&format!("{}: {e}\n", f.display()));
                rows.push(json!({"file": f, "error": e.to_string()}));
            }
        }
    }
    Ok(Output { text, json: json!({"files": rows}), code })
}

fn bench_run(manifests: &Path, out: &Path, c: &GlobalConfig) -> Result<Output, Failure> {
    let factory = ConfiguredBackends::new(c).map_err(|m| Failure { code: EXIT_USAGE, message: m })?;
    let r = run_benchmark(manifests, &factory, c).map_err(|e| infra(format!("{}: {e}", manifests.display())))?;
    let body = serde_json::to_string_pretty(&r).unwrap() + "\n";
    write(out, &body)?;
    let mut text = format!(
        "{} problems: syntax pass@1 {:.2}%, functional pass@1 {:.2}%\n",
        r.overall.total, r.overall.syntax_pass_at_1, r.overall.functional_pass_at_1
    );
    for (k, v) in &r.by_difficulty {
        text.push_str(&format!("  {k}: {}/{} functional\n", v.functional_pass, v.total));
    }
    text.push_str(&format!("report written to {}\n", out.display()));
    ok(text, json!({"overall": r.overall, "by_difficulty": r.by_difficulty, "out": out}))
}

fn run(problem: &Path, c: &GlobalConfig) -> Result<Output, Failure> {
    let p = load_problem(problem, false).map_err(domain)?;
    let factory = ConfiguredBackends::new(c).map_err(|m| Failure { code: EXIT_USAGE, message: m })?;
    let model = factory.model(&p).map_err(infra)?;
    let sim = factory.sim(&p).map_err(infra)?;
    let prover = factory.prover();
    let r = run_session(p, Backends { model: model.as_ref(), sim: sim.as_ref(), prover: prover.as_ref() }, c);
    let mut text = format!(
        "{}: {} after {} iteration(s)\n",
        r.problem,
        serde_json::to_value(r.status).unwrap().as_str().unwrap_or(""),
        r.iterations_used
    );
    for h in &r.history {
        text.push_str(&format!("  [{}] {}\n", h.iteration, h.action));
    }
    if let Some(e) = &r.error {
        text.push_str(&format!("error: {e}\n"));
    }
    let code = match r.status {
        Status::Passed => EXIT_OK,
        Status::FailedError => EXIT_INFRA,
        _ => EXIT_DOMAIN,
    };
    Ok(Output { text, json: serde_json::to_value(&r).unwrap(), code })
}
