//! Block-level edits under locality enforcement, failure signatures and
//! the keep-or-revert rule.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::rtl_graph::{line_byte_range, line_starts, DependencyGraph, SuspectSet};
use crate::simlog::{LogSummary, Stage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchOp {
    pub block_id: usize,
    /// Text replacing the block's whole line span.
    pub replacement: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatchError {
    #[error("block {0} is outside the suspect set")]
    LocalityViolation(usize),
    #[error("block {0} does not exist in the current source")]
    UnknownBlock(usize),
    #[error("block {0} is targeted more than once")]
    DuplicateBlock(usize),
    #[error("replacement for block {0} is empty")]
    EmptyReplacement(usize),
}

/// Replace the spans of the targeted blocks. Every byte outside those spans
/// is preserved.
pub fn apply_patch(
    source: &str,
    graph: &DependencyGraph,
    ops: &[PatchOp],
    sus: &SuspectSet,
) -> Result<String, PatchError> {
    let starts = line_starts(source);
    let mut edits: Vec<(usize, usize, &str)> = Vec::with_capacity(ops.len());
    let mut seen = Vec::new();
    for op in ops {
        if seen.contains(&op.block_id) {
            return Err(PatchError::DuplicateBlock(op.block_id));
        }
        seen.push(op.block_id);
        let block = graph
            .blocks
            .iter()
            .find(|b| b.id == op.block_id)
            .ok_or(PatchError::UnknownBlock(op.block_id))?;
        if !sus.contains(op.block_id) {
            return Err(PatchError::LocalityViolation(op.block_id));
        }
        let repl = op.replacement.strip_suffix('\n').unwrap_or(&op.replacement);
        if repl.trim().is_empty() {
            return Err(PatchError::EmptyReplacement(op.block_id));
        }
        if block.span.1 > starts.len() {
            return Err(PatchError::UnknownBlock(op.block_id));
        }
        let (s, e) = line_byte_range(source, &starts, block.span);
        let current = &source[s..e];
        // A graph built from another version of the file is stale.
        if current.strip_suffix('\r').unwrap_or(current) != block.text {
            return Err(PatchError::UnknownBlock(op.block_id));
        }
        edits.push((s, e, repl));
    }
    // bottom-up so earlier offsets stay valid
    edits.sort_by(|a, b| b.0.cmp(&a.0));
    let mut out = String::from(source);
    for (s, e, r) in edits {
        out.replace_range(s..e, r);
    }
    Ok(out)
}

/// σ(RTL): stage, then first failure time and mismatch count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FailureSignature {
    pub stage: Stage,
    /// Meaningful for `sim_fail` only.
    pub t_f: u64,
    pub m: u64,
    /// `m` was not reported by the harness and defaults to 1, so only t_f
    /// really discriminates.
    pub m_defaulted: bool,
}

impl FailureSignature {
    pub fn pass() -> Self {
        FailureSignature {
            stage: Stage::Pass,
            t_f: 0,
            m: 0,
            m_defaulted: false,
        }
    }

    pub fn compile_fail() -> Self {
        FailureSignature {
            stage: Stage::CompileFail,
            t_f: 0,
            m: 0,
            m_defaulted: false,
        }
    }

    pub fn sim_fail(t_f: u64, m: u64) -> Self {
        FailureSignature {
            stage: Stage::SimFail,
            t_f,
            m,
            m_defaulted: false,
        }
    }

    /// From a parsed log. A failure without a timestamp ranks as t_f = 0.
    pub fn from_log(log: &LogSummary) -> Self {
        match log.verdict {
            Stage::SimFail => FailureSignature {
                stage: Stage::SimFail,
                t_f: log.first_failure_time.unwrap_or(0),
                m: log.mismatch_count.unwrap_or(1),
                m_defaulted: log.m_defaulted,
            },
            Stage::Pass => Self::pass(),
            Stage::CompileFail => Self::compile_fail(),
        }
    }

    fn rank(&self) -> u8 {
        match self.stage {
            Stage::CompileFail => 0,
            Stage::SimFail => 1,
            Stage::Pass => 2,
        }
    }
}

impl PartialOrd for FailureSignature {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greater is better: pass > sim_fail > compile_fail; within sim_fail a
/// later t_f wins, then fewer mismatches. Non-sim stages ignore t_f and m.
impl Ord for FailureSignature {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank()).then_with(|| {
            if self.stage == Stage::SimFail {
                self.t_f
                    .cmp(&other.t_f)
                    .then_with(|| other.m.cmp(&self.m))
            } else {
                Ordering::Equal
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Improved,
    Regressed,
    Unchanged,
}

pub fn compare_signatures(before: &FailureSignature, after: &FailureSignature) -> Comparison {
    match after.cmp(before) {
        Ordering::Greater => Comparison::Improved,
        Ordering::Less => Comparison::Regressed,
        Ordering::Equal => Comparison::Unchanged,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchOutcome {
    pub accepted: bool,
    pub comparison: Comparison,
    pub before: FailureSignature,
    pub after: FailureSignature,
    /// The version kept: patched when accepted, original otherwise.
    pub rtl_after: String,
    /// Comparison fell back to t_f only because m was not reported.
    pub t_f_only: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum TryPatchError<E> {
    #[error(transparent)]
    Patch(#[from] PatchError),
    /// Infrastructure failure while evaluating; the source is untouched.
    #[error("evaluation failed: {0}")]
    Evaluate(E),
}

/// Apply `ops`, evaluate the patched text and keep it only on strict
/// improvement (or a pass). `source` is updated in place when kept and is
/// otherwise left byte-identical.
pub fn try_patch<E>(
    source: &mut String,
    before: FailureSignature,
    graph: &DependencyGraph,
    sus: &SuspectSet,
    ops: &[PatchOp],
    evaluate: impl FnOnce(&str) -> Result<FailureSignature, E>,
) -> Result<PatchOutcome, TryPatchError<E>> {
    let patched = apply_patch(source, graph, ops, sus)?;
    let after = evaluate(&patched).map_err(TryPatchError::Evaluate)?;
    let comparison = compare_signatures(&before, &after);
    let accepted = after.stage == Stage::Pass || comparison == Comparison::Improved;
    if accepted {
        *source = patched;
    }
    Ok(PatchOutcome {
        accepted,
        comparison,
        before,
        after,
        rtl_after: source.clone(),
        t_f_only: before.m_defaulted || after.m_defaulted,
    })
}
