use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::*;

/// Stable short codes; the orchestrator feeds them back to the Architect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LintCode {
    SchemaMissingKey,
    UnknownSignal,
    DuplicatePort,
    BadIdentifier,
    BadEnum,
    BadWidth,
    BadLatency,
    NoClockForSequential,
    // warnings
    DefaultedLatency,
    InferredClock,
    InferredReset,
    NoClocking,
}

impl LintCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LintCode::SchemaMissingKey => "SchemaMissingKey",
            LintCode::UnknownSignal => "UnknownSignal",
            LintCode::DuplicatePort => "DuplicatePort",
            LintCode::BadIdentifier => "BadIdentifier",
            LintCode::BadEnum => "BadEnum",
            LintCode::BadWidth => "BadWidth",
            LintCode::BadLatency => "BadLatency",
            LintCode::NoClockForSequential => "NoClockForSequential",
            LintCode::DefaultedLatency => "DefaultedLatency",
            LintCode::InferredClock => "InferredClock",
            LintCode::InferredReset => "InferredReset",
            LintCode::NoClocking => "NoClocking",
        }
    }
}

impl core::fmt::Display for LintCode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintIssue {
    pub code: LintCode,
    pub message: String,
    /// JSON path of the offending field, e.g. `io[2].width`.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LintReport {
    pub errors: Vec<LintIssue>,
    pub warnings: Vec<LintIssue>,
    /// Present iff `errors` is empty.
    pub canonical: Option<DesignContract>,
}

impl LintReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }

    /// One line per issue, for prompts and terminals.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (kind, list) in [("error", &self.errors), ("warning", &self.warnings)] {
            for i in list {
                s.push_str(&format!("{kind} {} at {}: {}\n", i.code, i.path, i.message));
            }
        }
        s
    }
}

const RESERVED: &[&str] = &[
    "always", "and", "assign", "begin", "buf", "case", "default", "else", "end", "endcase",
    "endmodule", "for", "function", "if", "initial", "inout", "input", "integer", "logic",
    "module", "nand", "negedge", "nor", "not", "or", "output", "parameter", "posedge", "reg",
    "wire", "xnor", "xor", "int", "bit", "byte", "always_ff", "always_comb", "always_latch",
];

/// SystemVerilog simple identifier that is not a reserved word.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    (first.is_ascii_alphabetic() || first == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
        && !RESERVED.contains(&s)
}

struct Ctx {
    errors: Vec<LintIssue>,
    warnings: Vec<LintIssue>,
}

impl Ctx {
    fn err(&mut self, code: LintCode, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(LintIssue {
            code,
            message: message.into(),
            path: path.into(),
        });
    }

    fn warn(&mut self, code: LintCode, path: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(LintIssue {
            code,
            message: message.into(),
            path: path.into(),
        });
    }

    fn missing(&mut self, path: &str) {
        self.err(
            LintCode::SchemaMissingKey,
            path,
            format!("required key `{path}` is missing"),
        );
    }

    fn bad_enum(&mut self, path: &str, got: &str, allowed: &[&str]) {
        self.err(
            LintCode::BadEnum,
            path,
            format!("`{got}` is not one of {}", allowed.join(", ")),
        );
    }
}

const CLOCK_NAMES: &[&str] = &["clk", "clock"];
/// (name, active, kind)
const RESET_NAMES: &[(&str, ResetActive, ResetKind)] = &[
    ("rst", ResetActive::High, ResetKind::Sync),
    ("reset", ResetActive::High, ResetKind::Sync),
    ("rst_n", ResetActive::Low, ResetKind::Sync),
    ("reset_n", ResetActive::Low, ResetKind::Sync),
    ("rstn", ResetActive::Low, ResetKind::Sync),
    ("resetn", ResetActive::Low, ResetKind::Sync),
    ("areset", ResetActive::High, ResetKind::Async),
    ("arst", ResetActive::High, ResetKind::Async),
    ("arst_n", ResetActive::Low, ResetKind::Async),
    ("aresetn", ResetActive::Low, ResetKind::Async),
];

/// Validate and, when error-free, canonicalize a contract.
pub fn lint(c: &DesignContract) -> LintReport {
    let mut cx = Ctx {
        errors: Vec::new(),
        warnings: Vec::new(),
    };

    // schema: required sections
    match &c.module_name {
        None => cx.missing("module_name"),
        Some(n) if !is_identifier(n) => cx.err(
            LintCode::BadIdentifier,
            "module_name",
            format!("`{n}` is not a legal identifier"),
        ),
        _ => {}
    }
    if c.io.is_none() {
        cx.missing("io");
    }
    if c.timing.is_none() {
        cx.missing("timing");
    }
    if c.functional_summary.is_none() {
        cx.missing("functional_summary");
    }

    // ports
    let mut seen = BTreeSet::new();
    for (i, p) in c.ports().iter().enumerate() {
        let path = format!("io[{i}]");
        if p.name.is_empty() {
            cx.missing(&format!("{path}.name"));
        } else if !is_identifier(&p.name) {
            cx.err(
                LintCode::BadIdentifier,
                format!("{path}.name"),
                format!("`{}` is not a legal identifier", p.name),
            );
        } else if !seen.insert(p.name.as_str()) {
            cx.err(
                LintCode::DuplicatePort,
                format!("{path}.name"),
                format!("port `{}` declared more than once", p.name),
            );
        }
        match &p.dir {
            Direction::Unrecognized(s) if s.is_empty() => cx.missing(&format!("{path}.dir")),
            Direction::Unrecognized(s) => cx.bad_enum(&format!("{path}.dir"), s, Direction::ALLOWED),
            _ => {}
        }
        if let Some(w) = p.width {
            if w < 1 {
                cx.err(
                    LintCode::BadWidth,
                    format!("{path}.width"),
                    format!("width {w} is not positive"),
                );
            }
        }
    }

    let in_io = |n: &str| c.port(n).is_some();

    // clocking
    let sequential = c.implies_sequential();
    let mut clocking = c.clocking.clone();
    let has_clock = clocking.as_ref().map(|k| k.clock.is_some()).unwrap_or(false);
    if let Some(k) = &c.clocking {
        if let Some(clk) = &k.clock {
            match &clk.name {
                None => cx.missing("clocking.clock.name"),
                Some(n) if !in_io(n) => cx.err(
                    LintCode::UnknownSignal,
                    "clocking.clock.name",
                    format!("clock `{n}` is not in io"),
                ),
                _ => {}
            }
            match &clk.edge {
                None => cx.missing("clocking.clock.edge"),
                Some(ClockEdge::Unrecognized(s)) => {
                    cx.bad_enum("clocking.clock.edge", s, ClockEdge::ALLOWED)
                }
                _ => {}
            }
        }
        if let Some(r) = &k.reset {
            match &r.name {
                None => cx.missing("clocking.reset.name"),
                Some(n) if !in_io(n) => cx.err(
                    LintCode::UnknownSignal,
                    "clocking.reset.name",
                    format!("reset `{n}` is not in io"),
                ),
                _ => {}
            }
            match &r.active {
                None => cx.missing("clocking.reset.active"),
                Some(ResetActive::Unrecognized(s)) => {
                    cx.bad_enum("clocking.reset.active", s, ResetActive::ALLOWED)
                }
                _ => {}
            }
            match &r.kind {
                None => cx.missing("clocking.reset.kind"),
                Some(ResetKind::Unrecognized(s)) => {
                    cx.bad_enum("clocking.reset.kind", s, ResetKind::ALLOWED)
                }
                _ => {}
            }
        }
    }
    // Inference only when no clock was given at all; `clocking: {}` on a
    // combinational contract is an explicit statement.
    let explicit_empty = c.clocking.is_some() && !has_clock;
    if !has_clock && (c.clocking.is_none() || sequential) {
        let clk = c
            .inputs()
            .find(|p| CLOCK_NAMES.contains(&p.name.as_str()))
            .map(|p| p.name.clone());
        match clk {
            Some(name) => {
                cx.warn(
                    LintCode::InferredClock,
                    "clocking.clock",
                    format!("clocking absent; assumed clock `{name}` on posedge"),
                );
                let k = clocking.get_or_insert_with(Clocking::default);
                k.clock = Some(ClockSpec {
                    name: Some(name),
                    edge: Some(ClockEdge::Posedge),
                });
                if k.reset.is_none() {
                    let rst = c.inputs().find_map(|p| {
                        RESET_NAMES
                            .iter()
                            .find(|(n, _, _)| *n == p.name)
                            .cloned()
                    });
                    if let Some((n, active, kind)) = rst {
                        cx.warn(
                            LintCode::InferredReset,
                            "clocking.reset",
                            format!(
                                "assumed reset `{n}`, active {}, {}",
                                active.as_str(),
                                kind.as_str()
                            ),
                        );
                        k.reset = Some(ResetSpec {
                            name: Some(n.to_string()),
                            active: Some(active),
                            kind: Some(kind),
                        });
                    }
                }
            }
            None if sequential => cx.err(
                LintCode::NoClockForSequential,
                "clocking",
                "sequential behaviour implied (positive latency or sequential rule) but no clock is given or inferable",
            ),
            None => {
                if !explicit_empty {
                    cx.warn(
                        LintCode::NoClocking,
                        "clocking",
                        "no clocking given; treated as purely combinational",
                    );
                }
                clocking.get_or_insert_with(Clocking::default);
            }
        }
    }

    // timing
    if let Some(t) = &c.timing {
        for (name, lat) in t {
            let path = format!("timing.outputs.{name}");
            match c.port(name) {
                None => cx.err(
                    LintCode::UnknownSignal,
                    path.clone(),
                    format!("`{name}` is not in io"),
                ),
                Some(p) if p.dir == Direction::Input => cx.err(
                    LintCode::UnknownSignal,
                    path.clone(),
                    format!("`{name}` is an input, not an output"),
                ),
                _ => {}
            }
            match lat {
                None => cx.missing(&format!("{path}.latency_cycles")),
                Some(l) if *l < 0 => cx.err(
                    LintCode::BadLatency,
                    format!("{path}.latency_cycles"),
                    format!("latency {l} is negative"),
                ),
                _ => {}
            }
        }
    }

    // rules
    for (i, r) in c.rules().iter().enumerate() {
        let path = format!("functional_summary.rules[{i}]");
        if r.id.is_none() {
            cx.missing(&format!("{path}.id"));
        }
        match &r.kind {
            None => cx.missing(&format!("{path}.kind")),
            Some(RuleKind::Unrecognized(s)) => {
                cx.bad_enum(&format!("{path}.kind"), s, RuleKind::ALLOWED)
            }
            _ => {}
        }
        if r.expression.is_none() {
            cx.missing(&format!("{path}.expression"));
        }
        match &r.outputs {
            None => cx.missing(&format!("{path}.outputs")),
            Some(outs) => {
                for (j, o) in outs.iter().enumerate() {
                    let ok = c
                        .port(o)
                        .map(|p| matches!(p.dir, Direction::Output | Direction::Inout))
                        .unwrap_or(false);
                    if !ok {
                        cx.err(
                            LintCode::UnknownSignal,
                            format!("{path}.outputs[{j}]"),
                            format!("`{o}` is not an output in io"),
                        );
                    }
                }
            }
        }
    }

    for (i, p) in c.parameters.as_deref().unwrap_or(&[]).iter().enumerate() {
        if !is_identifier(&p.name) {
            cx.err(
                LintCode::BadIdentifier,
                format!("parameters[{i}].name"),
                format!("`{}` is not a legal identifier", p.name),
            );
        }
    }

    if !cx.errors.is_empty() {
        return LintReport {
            errors: cx.errors,
            warnings: cx.warnings,
            canonical: None,
        };
    }

    // canonicalize
    let mut out = c.clone();
    out.clocking = clocking;
    if let Some(io) = &mut out.io {
        for p in io.iter_mut() {
            p.width.get_or_insert(1);
        }
    }
    let given = c.timing.clone().unwrap_or_default();
    let mut timing = Vec::new();
    for p in c.ports() {
        match given.iter().find(|(n, _)| *n == p.name) {
            Some((_, l)) => timing.push((p.name.clone(), *l)),
            None if p.dir == Direction::Output => {
                cx.warn(
                    LintCode::DefaultedLatency,
                    format!("timing.outputs.{}", p.name),
                    format!("no latency given for `{}`; defaulted to 0", p.name),
                );
                timing.push((p.name.clone(), Some(0)));
            }
            None => {}
        }
    }
    out.timing = Some(timing);

    LintReport {
        errors: cx.errors,
        warnings: cx.warnings,
        canonical: Some(out),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_contract;
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "module_name": "top_module",
            "io": [
                {"name": "clk", "dir": "input", "width": 1, "description": ""},
                {"name": "d", "dir": "input", "width": 8, "description": ""},
                {"name": "q", "dir": "output", "width": 8, "description": ""}
            ],
            "clocking": {"clock": {"name": "clk", "edge": "posedge"}},
            "timing": {"outputs": {"q": {"latency_cycles": 1}}},
            "functional_summary": {"overview": "register", "rules": []}
        })
    }

    fn codes(v: serde_json::Value) -> Vec<LintCode> {
        let c = from_value(&v).unwrap();
        lint(&c).errors.into_iter().map(|e| e.code).collect()
    }

    #[test]
    fn clean_contract_is_canonical() {
        let r = lint(&from_value(&base()).unwrap());
        assert!(r.errors.is_empty(), "{:?}", r.errors);
        assert!(r.warnings.is_empty());
        assert!(r.canonical.is_some());
    }

    #[test]
    fn missing_timing() {
        let mut v = base();
        v.as_object_mut().unwrap().remove("timing");
        let c = from_value(&v).unwrap();
        let r = lint(&c);
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].code, LintCode::SchemaMissingKey);
        assert_eq!(r.errors[0].path, "timing");
        assert!(r.canonical.is_none());
    }

    #[test]
    fn clock_not_in_io() {
        let mut v = base();
        v["io"].as_array_mut().unwrap().remove(0);
        let r = lint(&from_value(&v).unwrap());
        assert_eq!(r.errors[0].code, LintCode::UnknownSignal);
        assert_eq!(r.errors[0].path, "clocking.clock.name");
    }

    #[test]
    fn defaulted_latency_and_scalar_width() {
        let mut v = base();
        v["timing"] = serde_json::json!({"outputs": {}});
        v["io"][0].as_object_mut().unwrap().remove("width");
        let r = lint(&from_value(&v).unwrap());
        let canon = r.canonical.unwrap();
        assert_eq!(canon.latency("q"), Some(0));
        assert_eq!(canon.ports()[0].width, Some(1));
        assert_eq!(r.warnings[0].code, LintCode::DefaultedLatency);
    }

    #[test]
    fn inference_is_announced() {
        let mut v = base();
        v.as_object_mut().unwrap().remove("clocking");
        v["io"].as_array_mut().unwrap().push(serde_json::json!(
            {"name": "rst_n", "dir": "input", "width": 1, "description": ""}
        ));
        let r = lint(&from_value(&v).unwrap());
        let canon = r.canonical.unwrap();
        assert_eq!(canon.clock(), Some(("clk", ClockEdge::Posedge)));
        assert_eq!(canon.reset().unwrap().1, ResetActive::Low);
        let w: Vec<_> = r.warnings.iter().map(|w| w.code).collect();
        assert_eq!(w, [LintCode::InferredClock, LintCode::InferredReset]);
    }

    #[test]
    fn each_error_code() {
        let mut v = base();
        v["io"][1]["name"] = "clk".into();
        assert_eq!(codes(v), [LintCode::DuplicatePort]);

        let mut v = base();
        v["io"][1]["name"] = "d x".into();
        assert_eq!(codes(v), [LintCode::BadIdentifier]);

        let mut v = base();
        v["io"][1]["dir"] = "in".into();
        assert_eq!(codes(v), [LintCode::BadEnum]);

        let mut v = base();
        v["io"][1]["width"] = 0.into();
        assert_eq!(codes(v), [LintCode::BadWidth]);

        let mut v = base();
        v["timing"]["outputs"]["q"]["latency_cycles"] = (-1).into();
        assert_eq!(codes(v), [LintCode::BadLatency]);

        let mut v = base();
        v.as_object_mut().unwrap().remove("clocking");
        v["io"][0]["name"] = "sysclk".into();
        assert_eq!(codes(v), [LintCode::NoClockForSequential]);
    }

    #[test]
    fn idempotent_on_canonical() {
        let raw = r#"{"module_name":"m","io":[{"name":"a","dir":"input"},{"name":"y","dir":"output","width":4}],
            "timing":{},"functional_summary":{"overview":"","rules":[{"id":"r1","kind":"boolean","expression":"y = a","outputs":["y"]}]}}"#;
        let first = lint(&parse_contract(raw).unwrap()).canonical.unwrap();
        let second = lint(&first);
        assert!(second.errors.is_empty());
        assert!(second.warnings.is_empty());
        assert_eq!(second.canonical.unwrap(), first);
    }
}
