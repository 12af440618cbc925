//! The design contract: interface, clocking, per-output latency and
//! functional rules shared by every agent.
//!
//! Parsing only enforces JSON types. Everything semantic (missing sections,
//! enum values, referential integrity) is the linter's job so that all
//! problems can be reported at once.

mod lint;
mod render;

pub use lint::{is_identifier, lint, LintCode, LintIssue, LintReport};
pub use render::render_contract;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde_json::{Map, Value};

macro_rules! tag_enum {
    ($(#[$m:meta])* $name:ident { $($var:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($var,)+
            /// A value outside the enumeration, kept for the linter.
            Unrecognized(String),
        }

        impl $name {
            pub fn parse(s: &str) -> Self {
                match s {
                    $($s => $name::$var,)+
                    other => $name::Unrecognized(other.to_string()),
                }
            }

            pub fn as_str(&self) -> &str {
                match self {
                    $($name::$var => $s,)+
                    $name::Unrecognized(s) => s,
                }
            }

            pub fn is_known(&self) -> bool {
                !matches!(self, $name::Unrecognized(_))
            }

            pub const ALLOWED: &'static [&'static str] = &[$($s),+];
        }
    };
}

tag_enum!(Direction { Input => "input", Output => "output", Inout => "inout" });
tag_enum!(ClockEdge { Posedge => "posedge", Negedge => "negedge" });
tag_enum!(ResetActive { High => "high", Low => "low" });
tag_enum!(ResetKind { Sync => "sync", Async => "async" });
tag_enum!(RuleKind { Boolean => "boolean", Conditional => "conditional", Sequential => "sequential" });

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub dir: Direction,
    /// `None` until canonicalized (scalar).
    pub width: Option<i64>,
    pub description: String,
    pub extra: BTreeMap<String, Value>,
}

impl Port {
    pub fn width_or_1(&self) -> u32 {
        self.width.unwrap_or(1).clamp(1, u32::MAX as i64) as u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockSpec {
    pub name: Option<String>,
    pub edge: Option<ClockEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResetSpec {
    pub name: Option<String>,
    pub active: Option<ResetActive>,
    pub kind: Option<ResetKind>,
}

/// `clocking` section. Both parts are optional: purely combinational
/// designs have neither, designs without reset have only a clock.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Clocking {
    pub clock: Option<ClockSpec>,
    pub reset: Option<ResetSpec>,
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: Option<String>,
    pub kind: Option<RuleKind>,
    /// Verilog expression or assignment over port and parameter names.
    pub expression: Option<String>,
    pub outputs: Option<Vec<String>>,
    /// Value the constrained outputs take while reset is active.
    pub reset_value: Option<String>,
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FunctionalSummary {
    pub overview: String,
    pub rules: Vec<Rule>,
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    pub name: String,
    pub ty: Option<String>,
    pub default: Option<Value>,
}

/// A design contract. Required sections are optional here so the linter can
/// report their absence; a canonical contract has all of them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DesignContract {
    pub module_name: Option<String>,
    pub io: Option<Vec<Port>>,
    pub clocking: Option<Clocking>,
    /// Output name to latency in cycles, in io order once canonical.
    /// A `None` latency means the entry lacked `latency_cycles`.
    pub timing: Option<Vec<(String, Option<i64>)>>,
    pub functional_summary: Option<FunctionalSummary>,
    pub parameters: Option<Vec<Parameter>>,
    pub test_plan: Option<Vec<String>>,
    /// Unknown top-level keys, preserved verbatim.
    pub extensions: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("{path}: expected {expected}")]
    Type { path: String, expected: &'static str },
}

impl DesignContract {
    pub fn ports(&self) -> &[Port] {
        self.io.as_deref().unwrap_or(&[])
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports().iter().find(|p| p.name == name)
    }

    pub fn module(&self) -> &str {
        self.module_name.as_deref().unwrap_or("")
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Port> {
        self.ports().iter().filter(|p| p.dir == Direction::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Port> {
        self.ports()
            .iter()
            .filter(|p| matches!(p.dir, Direction::Output | Direction::Inout))
    }

    pub fn latency(&self, output: &str) -> Option<i64> {
        self.timing
            .as_ref()?
            .iter()
            .find(|(n, _)| n == output)
            .and_then(|(_, l)| *l)
    }

    pub fn rules(&self) -> &[Rule] {
        self.functional_summary
            .as_ref()
            .map(|f| f.rules.as_slice())
            .unwrap_or(&[])
    }

    pub fn clock(&self) -> Option<(&str, ClockEdge)> {
        let c = self.clocking.as_ref()?.clock.as_ref()?;
        Some((c.name.as_deref()?, c.edge.clone().unwrap_or(ClockEdge::Posedge)))
    }

    pub fn reset(&self) -> Option<(&str, ResetActive, ResetKind)> {
        let r = self.clocking.as_ref()?.reset.as_ref()?;
        Some((
            r.name.as_deref()?,
            r.active.clone().unwrap_or(ResetActive::High),
            r.kind.clone().unwrap_or(ResetKind::Sync),
        ))
    }

    /// Sequential behaviour is implied by a positive latency or a
    /// sequential rule.
    pub fn implies_sequential(&self) -> bool {
        self.timing
            .as_ref()
            .map(|t| t.iter().any(|(_, l)| l.unwrap_or(0) > 0))
            .unwrap_or(false)
            || self
                .rules()
                .iter()
                .any(|r| r.kind == Some(RuleKind::Sequential))
    }

    /// Names of the clock and reset ports, for read-set stripping.
    pub fn clock_reset_names(&self) -> Vec<&str> {
        let mut v = Vec::new();
        if let Some((c, _)) = self.clock() {
            v.push(c);
        }
        if let Some((r, _, _)) = self.reset() {
            v.push(r);
        }
        v
    }
}

// ----- parsing ---------------------------------------------------------------

struct P<'a> {
    path: &'a str,
}

fn type_err(path: impl Into<String>, expected: &'static str) -> ParseError {
    ParseError::Type {
        path: path.into(),
        expected,
    }
}

fn as_obj<'v>(v: &'v Value, path: &str) -> Result<&'v Map<String, Value>, ParseError> {
    v.as_object().ok_or_else(|| type_err(path, "object"))
}

fn as_str(v: &Value, path: &str) -> Result<String, ParseError> {
    v.as_str()
        .map(String::from)
        .ok_or_else(|| type_err(path, "string"))
}

fn as_int(v: &Value, path: &str) -> Result<i64, ParseError> {
    v.as_i64().ok_or_else(|| type_err(path, "integer"))
}

fn as_array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>, ParseError> {
    v.as_array().ok_or_else(|| type_err(path, "array"))
}

fn opt_str(m: &Map<String, Value>, key: &str, base: &P<'_>) -> Result<Option<String>, ParseError> {
    match m.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => as_str(v, &format!("{}.{key}", base.path)).map(Some),
    }
}

fn extras(m: &Map<String, Value>, known: &[&str]) -> BTreeMap<String, Value> {
    m.iter()
        .filter(|(k, _)| !known.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

/// Parse contract JSON, applying field-level type checks only.
pub fn parse_contract(raw: &str) -> Result<DesignContract, ParseError> {
    let v: Value = serde_json::from_str(raw).map_err(|e| ParseError::Json(e.to_string()))?;
    from_value(&v)
}

/// Same as [`parse_contract`] for an already decoded value.
pub fn from_value(v: &Value) -> Result<DesignContract, ParseError> {
    let top = as_obj(v, "$")?;
    let mut c = DesignContract {
        module_name: match top.get("module_name") {
            None | Some(Value::Null) => None,
            Some(v) => Some(as_str(v, "module_name")?),
        },
        ..Default::default()
    };

    if let Some(io) = top.get("io") {
        let arr = as_array(io, "io")?;
        let mut ports = Vec::with_capacity(arr.len());
        for (i, p) in arr.iter().enumerate() {
            let path = format!("io[{i}]");
            let m = as_obj(p, &path)?;
            let name = match m.get("name") {
                Some(v) => as_str(v, &format!("{path}.name"))?,
                None => String::new(),
            };
            let dir = match m.get("dir") {
                Some(v) => Direction::parse(&as_str(v, &format!("{path}.dir"))?),
                None => Direction::Unrecognized(String::new()),
            };
            let width = match m.get("width") {
                None | Some(Value::Null) => None,
                Some(v) => Some(as_int(v, &format!("{path}.width"))?),
            };
            let description = match m.get("description") {
                None | Some(Value::Null) => String::new(),
                Some(v) => as_str(v, &format!("{path}.description"))?,
            };
            ports.push(Port {
                name,
                dir,
                width,
                description,
                extra: extras(m, &["name", "dir", "width", "description"]),
            });
        }
        c.io = Some(ports);
    }

    match top.get("clocking") {
        None => {}
        Some(Value::Null) => c.clocking = Some(Clocking::default()),
        Some(v) => c.clocking = Some(parse_clocking(v)?),
    }

    if let Some(t) = top.get("timing") {
        let m = as_obj(t, "timing")?;
        let mut entries = Vec::new();
        if let Some(outs) = m.get("outputs") {
            let outs = as_obj(outs, "timing.outputs")?;
            for (name, e) in outs {
                let path = format!("timing.outputs.{name}");
                let em = as_obj(e, &path)?;
                let lat = match em.get("latency_cycles") {
                    None | Some(Value::Null) => None,
                    Some(v) => Some(as_int(v, &format!("{path}.latency_cycles"))?),
                };
                entries.push((name.clone(), lat));
            }
        }
        c.timing = Some(entries);
    }

    if let Some(fs) = top.get("functional_summary") {
        let m = as_obj(fs, "functional_summary")?;
        let p = P {
            path: "functional_summary",
        };
        let overview = opt_str(m, "overview", &p)?.unwrap_or_default();
        let mut rules = Vec::new();
        if let Some(rs) = m.get("rules") {
            for (i, r) in as_array(rs, "functional_summary.rules")?.iter().enumerate() {
                rules.push(parse_rule(r, i)?);
            }
        }
        c.functional_summary = Some(FunctionalSummary {
            overview,
            rules,
            extra: extras(m, &["overview", "rules"]),
        });
    }

    if let Some(ps) = top.get("parameters") {
        let mut out = Vec::new();
        for (i, p) in as_array(ps, "parameters")?.iter().enumerate() {
            let path = format!("parameters[{i}]");
            let m = as_obj(p, &path)?;
            let pp = P { path: &path };
            out.push(Parameter {
                name: opt_str(m, "name", &pp)?.unwrap_or_default(),
                ty: opt_str(m, "type", &pp)?,
                default: m.get("default").cloned(),
            });
        }
        c.parameters = Some(out);
    }

    if let Some(tp) = top.get("test_plan") {
        let items = as_array(tp, "test_plan")?
            .iter()
            .map(|v| match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect();
        c.test_plan = Some(items);
    }

    c.extensions = extras(
        top,
        &[
            "module_name",
            "io",
            "clocking",
            "timing",
            "functional_summary",
            "parameters",
            "test_plan",
        ],
    );
    Ok(c)
}

fn parse_clocking(v: &Value) -> Result<Clocking, ParseError> {
    let m = as_obj(v, "clocking")?;
    let mut c = Clocking {
        extra: extras(m, &["clock", "reset"]),
        ..Default::default()
    };
    match m.get("clock") {
        None | Some(Value::Null) => {}
        Some(cv) => {
            let cm = as_obj(cv, "clocking.clock")?;
            let p = P {
                path: "clocking.clock",
            };
            c.clock = Some(ClockSpec {
                name: opt_str(cm, "name", &p)?,
                edge: opt_str(cm, "edge", &p)?.map(|s| ClockEdge::parse(&s)),
            });
        }
    }
    match m.get("reset") {
        None | Some(Value::Null) => {}
        Some(rv) => {
            let rm = as_obj(rv, "clocking.reset")?;
            let p = P {
                path: "clocking.reset",
            };
            c.reset = Some(ResetSpec {
                name: opt_str(rm, "name", &p)?,
                active: opt_str(rm, "active", &p)?.map(|s| ResetActive::parse(&s)),
                kind: opt_str(rm, "kind", &p)?.map(|s| ResetKind::parse(&s)),
            });
        }
    }
    Ok(c)
}

fn parse_rule(v: &Value, i: usize) -> Result<Rule, ParseError> {
    let path = format!("functional_summary.rules[{i}]");
    let m = as_obj(v, &path)?;
    let p = P { path: &path };
    let outputs = match m.get("outputs") {
        None | Some(Value::Null) => None,
        Some(o) => {
            let arr = as_array(o, &format!("{path}.outputs"))?;
            let mut names = Vec::new();
            for (j, n) in arr.iter().enumerate() {
                names.push(as_str(n, &format!("{path}.outputs[{j}]"))?);
            }
            Some(names)
        }
    };
    let reset_value = match m.get("reset_value") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(Value::Number(n)) => Some(n.to_string()),
        Some(_) => return Err(type_err(format!("{path}.reset_value"), "string or integer")),
    };
    Ok(Rule {
        id: opt_str(m, "id", &p)?,
        kind: opt_str(m, "kind", &p)?.map(|s| RuleKind::parse(&s)),
        expression: opt_str(m, "expression", &p)?,
        outputs,
        reset_value,
        extra: extras(m, &["id", "kind", "expression", "outputs", "reset_value"]),
    })
}
