use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use super::miter::MITER_TOP;
use crate::trace::{FourStateValue, VcdDb};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofStatus {
    Proven,
    Counterexample,
    Inconclusive,
    ToolError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofResult {
    pub status: ProofStatus,
    /// 𝐱*; present exactly when `status` is `Counterexample`.
    pub witness: Option<BTreeMap<String, FourStateValue>>,
    pub raw_log: String,
}

impl ProofResult {
    pub fn tool_error(log: impl Into<String>) -> Self {
        ProofResult {
            status: ProofStatus::ToolError,
            witness: None,
            raw_log: log.into(),
        }
    }
}

/// SymbiYosys job for the three files `dut.sv`, `spec.sv`, `miter.sv`.
pub fn sby_config() -> String {
    format!(
        "[options]
mode prove

[engines]
smtbmc z3

[script]
read -formal dut.sv
read -formal spec.sv
read -formal miter.sv
prep -top {MITER_TOP}

[files]
dut.sv
spec.sv
miter.sv
"
    )
}

/// Verdict from SymbiYosys output.
pub fn parse_prover_status(log: &str, timed_out: bool) -> ProofStatus {
    if timed_out {
        return ProofStatus::Inconclusive;
    }
    for line in log.lines().rev() {
        if line.contains("DONE (PASS") {
            return ProofStatus::Proven;
        }
        if line.contains("DONE (FAIL") {
            return ProofStatus::Counterexample;
        }
        if line.contains("DONE (UNKNOWN") || line.contains("DONE (TIMEOUT") {
            return ProofStatus::Inconclusive;
        }
    }
    ProofStatus::ToolError
}

/// Input values of the counterexample trace at its first step.
pub fn witness_from_vcd(
    db: &VcdDb,
    inputs: &[(String, u32)],
) -> BTreeMap<String, FourStateValue> {
    let t0 = db.times.first().copied().unwrap_or(0);
    inputs
        .iter()
        .filter_map(|(n, _)| {
            let scoped = format!("{MITER_TOP}.{n}");
            let v = db.value_at(&scoped, t0).or_else(|| db.value_at(n, t0))?;
            Some((n.clone(), v))
        })
        .collect()
}

/// Directed stimulus for the Debugger, one blocking assignment per input.
pub fn stimulus_snippet(witness: &BTreeMap<String, FourStateValue>) -> String {
    let mut s = String::new();
    for (n, v) in witness {
        s.push_str(&format!("{n} = {}'b{};\n", v.width(), v.to_binary()));
    }
    s
}

impl ProofStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProofStatus::Proven => "proven",
            ProofStatus::Counterexample => "counterexample",
            ProofStatus::Inconclusive => "inconclusive",
            ProofStatus::ToolError => "tool_error",
        }
    }
}

impl core::fmt::Display for ProofStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}
