//! Running combinational equivalence proofs: SymbiYosys for real runs and
//! a brute-force engine for desk-scale designs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use verisure_core::formal::{
    exhaustive_counterexample, parse_prover_status, witness_from_vcd, MiterBundle, ProofResult,
    ProofStatus,
};
use verisure_core::trace::{parse_vcd, FourStateValue};
use wait_timeout::ChildExt;

pub const SBY_FILE: &str = "miter.sby";

pub trait Prover: Send + Sync {
    fn name(&self) -> &str;
    /// Prove the bundle's targets equivalent. `dir` is a scratch directory.
    fn prove(&self, module: &str, bundle: &MiterBundle, dir: &Path, timeout: Duration) -> ProofResult;
}

/// Write `dut.sv`, `spec.sv`, `miter.sv`, the job file and the input list.
pub fn write_bundle(bundle: &MiterBundle, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("dut.sv"), &bundle.dut_source)?;
    std::fs::write(dir.join("spec.sv"), &bundle.spec_source)?;
    std::fs::write(dir.join("miter.sv"), &bundle.miter_source)?;
    std::fs::write(dir.join(SBY_FILE), &bundle.prove_config)?;
    let inputs: Vec<String> = bundle.inputs.iter().map(|(n, w)| format!("{n} {w}")).collect();
    std::fs::write(dir.join("inputs.txt"), inputs.join("\n") + "\n")?;
    Ok(())
}

/// Input names and widths as written by [`write_bundle`].
pub fn read_inputs(dir: &Path) -> Vec<(String, u32)> {
    std::fs::read_to_string(dir.join("inputs.txt"))
        .unwrap_or_default()
        .lines()
        .filter_map(|l| {
            let (n, w) = l.split_once(' ')?;
            Some((n.to_string(), w.trim().parse().ok()?))
        })
        .collect()
}

fn find_trace(dir: &Path) -> Option<PathBuf> {
    let mut stack = vec![dir.to_path_buf()];
    let mut hits = Vec::new();
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).ok()?.flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n == "trace.vcd") {
                hits.push(p);
            }
        }
    }
    hits.sort();
    hits.into_iter().next()
}

/// Run SymbiYosys on a directory written by [`write_bundle`].
pub fn run_proof(dir: &Path, timeout: Duration, bin: &str) -> ProofResult {
    let mut cmd = Command::new(bin);
    cmd.current_dir(dir).args(["-f", SBY_FILE]);
    cmd.stdout(std::process::Stdio::piped()).stderr(std::process::Stdio::piped());
    let mut child = match cmd.spawn() {
        Ok(c) => c,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return ProofResult::tool_error(format!("prover `{bin}` not found"))
        }
        Err(e) => return ProofResult::tool_error(e.to_string()),
    };
    let timed_out = match child.wait_timeout(timeout) {
        Ok(Some(_)) => false,
        Ok(None) => {
            let _ = child.kill();
            true
        }
        Err(e) => return ProofResult::tool_error(e.to_string()),
    };
    let out = match child.wait_with_output() {
        Ok(o) => o,
        Err(e) => return ProofResult::tool_error(e.to_string()),
    };
    let mut log = String::from_utf8_lossy(&out.stdout).into_owned();
    log.push_str(&String::from_utf8_lossy(&out.stderr));
    let status = parse_prover_status(&log, timed_out);
    let witness = if status == ProofStatus::Counterexample {
        let w = find_trace(dir)
            .and_then(|p| std::fs::read_to_string(p).ok())
            .and_then(|t| parse_vcd(&t).ok())
            .map(|db| witness_from_vcd(&db, &read_inputs(dir)));
        // keep the invariant: a counterexample always carries a witness
        Some(w.unwrap_or_default())
    } else {
        None
    };
    ProofResult {
        status,
        witness,
        raw_log: log,
    }
}

#[derive(Debug, Clone)]
pub struct Sby {
    pub bin: String,
}

impl Default for Sby {
    fn default() -> Self {
        Sby {
            bin: std::env::var("VERISURE_SBY_BIN").unwrap_or_else(|_| "sby".into()),
        }
    }
}

impl Prover for Sby {
    fn name(&self) -> &str {
        "sby"
    }

    fn prove(&self, _: &str, bundle: &MiterBundle, dir: &Path, timeout: Duration) -> ProofResult {
        if let Err(e) = write_bundle(bundle, dir) {
            return ProofResult::tool_error(e.to_string());
        }
        run_proof(dir, timeout, &self.bin)
    }
}

/// Enumerates every input assignment. Only for small input spaces.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exhaustive;

impl Prover for Exhaustive {
    fn name(&self) -> &str {
        "exhaustive"
    }

    fn prove(&self, module: &str, bundle: &MiterBundle, _: &Path, _: Duration) -> ProofResult {
        match exhaustive_counterexample(module, &bundle.dut_source, &bundle.spec_source, &bundle.targets) {
            Ok(None) => ProofResult {
                status: ProofStatus::Proven,
                witness: None,
                raw_log: "exhaustive: all assignments agree\n".into(),
            },
            Ok(Some(a)) => {
                let witness: BTreeMap<String, FourStateValue> = bundle
                    .inputs
                    .iter()
                    .map(|(n, w)| (n.clone(), FourStateValue::from_u128(a.get(n).copied().unwrap_or(0), *w as usize)))
                    .collect();
                ProofResult {
                    status: ProofStatus::Counterexample,
                    witness: Some(witness),
                    raw_log: "exhaustive: assignment found where outputs differ\n".into(),
                }
            }
            Err(e) => ProofResult {
                status: ProofStatus::Inconclusive,
                witness: None,
                raw_log: format!("exhaustive: {e}\n"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_prover_is_tool_error() {
        let d = tempfile::tempdir().unwrap();
        let r = run_proof(d.path(), Duration::from_secs(1), "no-such-prover-binary-xyz");
        assert_eq!(r.status, ProofStatus::ToolError);
        assert!(r.witness.is_none());
    }
}
