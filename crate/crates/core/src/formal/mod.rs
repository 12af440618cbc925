//! Checkable obligations from the contract: combinational equivalence via
//! a miter against a rule-compiled spec module, and bound stability/reset
//! checkers for sequential outputs.

mod assertions;
mod miter;
mod prover;

pub use assertions::{emit_assertions, parse_violations, AssertionBundle, AssertionViolation};
pub use miter::{
    build_miter, exhaustive_counterexample, synthesize_spec, MiterBundle, MITER_TOP,
};
pub use prover::{
    parse_prover_status, sby_config, stimulus_snippet, witness_from_vcd, ProofResult,
    ProofStatus,
};

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::contract::{DesignContract, RuleKind};
use crate::rtl_graph::DependencyGraph;
use crate::verilog::eval::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObligationKind {
    Seq,
    Comb,
}

/// Built-in sequential templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    /// Output must not move on the inactive clock edge.
    EdgeStability,
    /// Output must hold the rule's reset value after reset.
    ResetValue,
    /// A sequential rule; left to the assertion-writing model.
    Rule,
    /// A combinational rule proved by the miter.
    Equivalence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obligation {
    pub id: String,
    pub kind: ObligationKind,
    pub template: Template,
    pub targets: Vec<String>,
    /// Rule id, or the template name for built-ins.
    pub source_rule: String,
    /// Reset value for `ResetValue` obligations.
    pub reset_value: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalNote {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Obligations {
    pub list: Vec<Obligation>,
    pub notes: Vec<FormalNote>,
}

impl Obligations {
    pub fn comb(&self) -> impl Iterator<Item = &Obligation> {
        self.list.iter().filter(|o| o.kind == ObligationKind::Comb)
    }

    pub fn seq(&self) -> impl Iterator<Item = &Obligation> {
        self.list.iter().filter(|o| o.kind == ObligationKind::Seq)
    }

    /// 𝒴_comb: targets of the combinational obligations, sorted.
    pub fn comb_targets(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.comb().flat_map(|o| o.targets.iter()).collect();
        set.into_iter().cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormalError {
    #[error("rule `{rule}` cannot be compiled: {reason}")]
    UnsupportedRule { rule: String, reason: String },
    #[error("target `{0}` has no boolean or conditional rule")]
    NoRule(String),
    #[error("DUT and spec ports differ: {}", .0.join("; "))]
    PortMismatch(Vec<String>),
    #[error("module `{0}` not found in the DUT source")]
    NoModule(String),
    #[error("design has no clock; assertions skipped")]
    NoClock,
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Whether any block writing `signal` is clocked or otherwise stateful.
pub fn sequentially_driven(g: &DependencyGraph, signal: &str) -> bool {
    g.drivers(signal)
        .filter_map(|id| g.blocks.iter().find(|b| b.id == id))
        .any(|b| b.sequential)
}

/// Derive Φ = Φ_seq ∪ Φ_comb from a canonical contract and the current RTL.
pub fn derive_obligations(c: &DesignContract, g: &DependencyGraph) -> Obligations {
    let mut out = Obligations::default();
    let zero_latency = |o: &String| c.latency(o) == Some(0);

    for r in c.rules() {
        let id = r.id.clone().unwrap_or_default();
        let targets = r.outputs.clone().unwrap_or_default();
        match r.kind {
            Some(RuleKind::Boolean) | Some(RuleKind::Conditional) => {
                if targets.is_empty() || !targets.iter().all(zero_latency) {
                    continue;
                }
                let demoted: Vec<&String> =
                    targets.iter().filter(|t| sequentially_driven(g, t)).collect();
                if !demoted.is_empty() {
                    for t in demoted {
                        out.notes.push(FormalNote {
                            code: "DemotedToSeq".into(),
                            message: format!(
                                "`{t}` has latency 0 but a sequential driver; rule `{id}` excluded from combinational proving"
                            ),
                        });
                    }
                    continue;
                }
                out.list.push(Obligation {
                    id: format!("comb:{id}"),
                    kind: ObligationKind::Comb,
                    template: Template::Equivalence,
                    targets,
                    source_rule: id,
                    reset_value: None,
                });
            }
            Some(RuleKind::Sequential) => out.list.push(Obligation {
                id: format!("seq:{id}"),
                kind: ObligationKind::Seq,
                template: Template::Rule,
                targets,
                source_rule: id,
                reset_value: None,
            }),
            _ => {}
        }
    }

    if c.clock().is_some() {
        for p in c.outputs() {
            if c.latency(&p.name).unwrap_or(0) >= 1 {
                out.list.push(Obligation {
                    id: format!("stability:{}", p.name),
                    kind: ObligationKind::Seq,
                    template: Template::EdgeStability,
                    targets: alloc::vec![p.name.clone()],
                    source_rule: "edge_stability".into(),
                    reset_value: None,
                });
            }
        }
        if c.reset().is_some() {
            let mut seen = BTreeSet::new();
            for r in c.rules() {
                let Some(rv) = &r.reset_value else { continue };
                for o in r.outputs.iter().flatten() {
                    if seen.insert(o.clone()) {
                        out.list.push(Obligation {
                            id: format!("reset_value:{o}"),
                            kind: ObligationKind::Seq,
                            template: Template::ResetValue,
                            targets: alloc::vec![o.to_string()],
                            source_rule: r.id.clone().unwrap_or_default(),
                            reset_value: Some(rv.clone()),
                        });
                    }
                }
            }
        }
    }
    out
}
