use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::FormalError;
use crate::contract::{DesignContract, RuleKind};
use crate::verilog::ast::{Expr, Module, PortDirection};
use crate::verilog::eval::{all_assignments, module_params, range_width, CombModel};
use crate::verilog::{parse, parse_assignment, parse_expr};

/// Top module name of every miter.
pub const MITER_TOP: &str = "Miter";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiterBundle {
    pub dut_source: String,
    pub spec_source: String,
    pub miter_source: String,
    /// SymbiYosys job file.
    pub prove_config: String,
    pub targets: Vec<String>,
    /// Miter inputs with widths, in contract order.
    pub inputs: Vec<(String, u32)>,
}

fn decl(dir: &str, width: u32, name: &str) -> String {
    if width > 1 {
        format!("{dir} logic [{}:0] {name}", width - 1)
    } else {
        format!("{dir} logic {name}")
    }
}

fn unsupported(rule: &str, reason: impl Into<String>) -> FormalError {
    FormalError::UnsupportedRule {
        rule: rule.into(),
        reason: reason.into(),
    }
}

const PURE_SYSCALLS: &[&str] = &["$signed", "$unsigned", "$clog2", "$bits"];

fn check_comb(e: &Expr, rule: &str) -> Result<(), FormalError> {
    match e {
        Expr::SysCall(n, args) => {
            if !PURE_SYSCALLS.contains(&n.as_str()) {
                return Err(unsupported(rule, format!("`{n}` is not combinational")));
            }
            args.iter().try_for_each(|a| check_comb(a, rule))
        }
        Expr::Call(n, _) => Err(unsupported(rule, format!("call to `{n}`"))),
        Expr::Macro(n) => Err(unsupported(rule, format!("macro `{n}`"))),
        Expr::Str(_) => Err(unsupported(rule, "string literal")),
        Expr::Unary(_, a) | Expr::Member(a, _) => check_comb(a, rule),
        Expr::Binary(_, a, b) | Expr::Index(a, b) | Expr::Cast(a, b) => {
            check_comb(a, rule)?;
            check_comb(b, rule)
        }
        Expr::Ternary(a, b, c) | Expr::Range(a, b, c) => {
            check_comb(a, rule)?;
            check_comb(b, rule)?;
            check_comb(c, rule)
        }
        Expr::PartSelect {
            base, start, width, ..
        } => {
            check_comb(base, rule)?;
            check_comb(start, rule)?;
            check_comb(width, rule)
        }
        Expr::Concat(v) | Expr::Pattern(v) => v.iter().try_for_each(|a| check_comb(a, rule)),
        Expr::Replicate(n, v) => {
            check_comb(n, rule)?;
            v.iter().try_for_each(|a| check_comb(a, rule))
        }
        Expr::Ident(_) | Expr::Number(_) | Expr::Scoped(..) => Ok(()),
    }
}

fn emit_rule(lhs: &Expr, rhs: &Expr, out: &mut String) {
    if let Expr::Ternary(..) = rhs {
        out.push_str("    always_comb begin\n");
        let mut cur = rhs;
        let mut first = true;
        loop {
            match cur {
                Expr::Ternary(c, a, b) => {
                    let kw = if first { "if" } else { "else if" };
                    out.push_str(&format!("        {kw} ({c})\n            {lhs} = {a};\n"));
                    first = false;
                    cur = b;
                }
                other => {
                    out.push_str(&format!("        else\n            {lhs} = {other};\n"));
                    break;
                }
            }
        }
        out.push_str("    end\n");
    } else {
        out.push_str(&format!("    assign {lhs} = {rhs};\n"));
    }
}

fn param_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Compile the boolean/conditional rules constraining `targets` into a
/// synthesizable module `<module>_spec`. Pure in the contract.
pub fn synthesize_spec(c: &DesignContract, targets: &[String]) -> Result<String, FormalError> {
    let inputs: Vec<(&str, u32)> = c.inputs().map(|p| (p.name.as_str(), p.width_or_1())).collect();
    let params: Vec<&crate::contract::Parameter> =
        c.parameters.as_deref().unwrap_or(&[]).iter().collect();
    let mut allowed: BTreeSet<&str> = inputs.iter().map(|(n, _)| *n).collect();
    allowed.extend(params.iter().map(|p| p.name.as_str()));
    allowed.extend(targets.iter().map(|t| t.as_str()));

    let mut body = String::new();
    let mut internal: BTreeSet<String> = BTreeSet::new();
    let mut emitted: BTreeSet<String> = BTreeSet::new();
    for t in targets {
        let rule = c
            .rules()
            .iter()
            .find(|r| {
                matches!(r.kind, Some(RuleKind::Boolean) | Some(RuleKind::Conditional))
                    && r.outputs.iter().flatten().any(|o| o == t)
            })
            .ok_or_else(|| FormalError::NoRule(t.clone()))?;
        let id = rule.id.clone().unwrap_or_default();
        if !emitted.insert(id.clone()) {
            continue;
        }
        let text = rule.expression.as_deref().unwrap_or("");
        let outs = rule.outputs.clone().unwrap_or_default();
        let (lhs, rhs) = match parse_assignment(text) {
            Ok(Some(pair)) => pair,
            Ok(None) => {
                let rhs = parse_expr(text).map_err(|e| unsupported(&id, e.to_string()))?;
                if outs.len() != 1 {
                    return Err(unsupported(&id, "bare expression needs exactly one output"));
                }
                (Expr::Ident(outs[0].clone()), rhs)
            }
            Err(e) => return Err(unsupported(&id, e.to_string())),
        };
        for n in lhs.idents() {
            if !outs.contains(&n) {
                return Err(unsupported(&id, format!("assigns `{n}`, which is not a rule output")));
            }
            if !targets.contains(&n) {
                internal.insert(n);
            }
        }
        check_comb(&rhs, &id)?;
        for n in rhs.idents() {
            if !allowed.contains(n.as_str()) {
                return Err(unsupported(&id, format!("references unknown signal `{n}`")));
            }
        }
        emit_rule(&lhs, &rhs, &mut body);
    }

    let mut s = format!("module {}_spec", c.module());
    if !params.is_empty() {
        let ps: Vec<String> = params
            .iter()
            .map(|p| {
                let d = p.default.as_ref().map(param_text).unwrap_or_else(|| "0".into());
                format!("parameter {} = {d}", p.name)
            })
            .collect();
        s.push_str(&format!(" #({})", ps.join(", ")));
    }
    s.push_str(" (\n");
    let mut ports: Vec<String> = inputs.iter().map(|(n, w)| decl("input", *w, n)).collect();
    for t in targets {
        let w = c.port(t).map(|p| p.width_or_1()).unwrap_or(1);
        ports.push(decl("output", w, t));
    }
    for (i, p) in ports.iter().enumerate() {
        let sep = if i + 1 < ports.len() { "," } else { "" };
        s.push_str(&format!("    {p}{sep}\n"));
    }
    s.push_str(");\n");
    for n in &internal {
        let w = c.port(n).map(|p| p.width_or_1()).unwrap_or(1);
        let d = decl("", w, n);
        s.push_str(&format!("    {};\n", d.trim_start()));
    }
    s.push_str(&body);
    s.push_str("endmodule\n");
    Ok(s)
}

fn port_width(m: &Module, name: &str) -> Option<u32> {
    let p = m.port(name)?;
    match &p.range {
        None => Some(1),
        Some(r) => {
            let params = module_params(m).ok()?;
            range_width(r, &params).ok()
        }
    }
}

/// Wrap DUT and spec in a miter that asserts equality of every target
/// under shared inputs.
pub fn build_miter(
    c: &DesignContract,
    dut_source: &str,
    spec_source: &str,
    targets: &[String],
) -> Result<MiterBundle, FormalError> {
    let file = parse(dut_source).map_err(|e| FormalError::Syntax(e.to_string()))?;
    let dut = file
        .module(c.module())
        .ok_or_else(|| FormalError::NoModule(c.module().into()))?;

    let mut problems = Vec::new();
    let inputs: Vec<(String, u32)> = c.inputs().map(|p| (p.name.clone(), p.width_or_1())).collect();
    for (n, w) in &inputs {
        match dut.port(n) {
            Some(p) if p.dir == Some(PortDirection::Input) => {
                if let Some(dw) = port_width(dut, n) {
                    if dw != *w {
                        problems.push(format!("input `{n}` is {dw} bits in the DUT, {w} in the contract"));
                    }
                }
            }
            Some(_) => problems.push(format!("`{n}` is not an input of the DUT")),
            None => problems.push(format!("DUT lacks input `{n}`")),
        }
    }
    for p in &dut.ports {
        if p.dir == Some(PortDirection::Input) && !inputs.iter().any(|(n, _)| *n == p.name) {
            problems.push(format!("DUT has extra input `{}`", p.name));
        }
    }
    for t in targets {
        let want = c.port(t).map(|p| p.width_or_1()).unwrap_or(1);
        match dut.port(t) {
            Some(p) if p.dir == Some(PortDirection::Output) => {
                if let Some(dw) = port_width(dut, t) {
                    if dw != want {
                        problems.push(format!("output `{t}` is {dw} bits in the DUT, {want} in the contract"));
                    }
                }
            }
            _ => problems.push(format!("DUT lacks output `{t}`")),
        }
    }
    if !problems.is_empty() {
        return Err(FormalError::PortMismatch(problems));
    }

    let mut m = format!("module {MITER_TOP} (\n");
    for (i, (n, w)) in inputs.iter().enumerate() {
        let sep = if i + 1 < inputs.len() { "," } else { "" };
        m.push_str(&format!("    {}{sep}\n", decl("input", *w, n)));
    }
    m.push_str(");\n");
    for t in targets {
        let w = c.port(t).map(|p| p.width_or_1()).unwrap_or(1);
        let range = if w > 1 { format!("[{}:0] ", w - 1) } else { String::new() };
        m.push_str(&format!("    logic {range}{t}_dut, {t}_spec;\n"));
    }
    let conns = |suffix: &str| -> String {
        let mut v: Vec<String> = inputs.iter().map(|(n, _)| format!(".{n}({n})")).collect();
        v.extend(targets.iter().map(|t| format!(".{t}({t}_{suffix})")));
        v.join(", ")
    };
    m.push_str(&format!("\n    {} dut ({});\n", c.module(), conns("dut")));
    m.push_str(&format!("    {}_spec spec ({});\n\n", c.module(), conns("spec")));
    m.push_str("    always @* begin\n");
    for t in targets {
        m.push_str(&format!("        assert ({t}_dut === {t}_spec);\n"));
    }
    m.push_str("    end\nendmodule\n");

    Ok(MiterBundle {
        dut_source: dut_source.to_string(),
        spec_source: spec_source.to_string(),
        miter_source: m,
        prove_config: super::prover::sby_config(),
        targets: targets.to_vec(),
        inputs,
    })
}

/// Brute-force equivalence on the targets: the first input assignment (in
/// counting order) where DUT and spec differ, or `None` when they agree
/// everywhere. Desk scale only (total input width ≤ 20).
pub fn exhaustive_counterexample(
    module: &str,
    dut_source: &str,
    spec_source: &str,
    targets: &[String],
) -> Result<Option<BTreeMap<String, u128>>, FormalError> {
    let dut_file = parse(dut_source).map_err(|e| FormalError::Syntax(e.to_string()))?;
    let spec_file = parse(spec_source).map_err(|e| FormalError::Syntax(e.to_string()))?;
    let dut = dut_file
        .module(module)
        .ok_or_else(|| FormalError::NoModule(module.into()))?;
    let spec_name = format!("{module}_spec");
    let spec = spec_file
        .module(&spec_name)
        .ok_or(FormalError::NoModule(spec_name))?;
    let dm = CombModel::new(dut)?;
    let sm = CombModel::new(spec)?;
    for a in all_assignments(&sm.inputs)? {
        let d = dm.eval(&a)?;
        let s = sm.eval(&a)?;
        if targets.iter().any(|t| d.get(t).map(|v| v.bits) != s.get(t).map(|v| v.bits)) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::{lint, parse_contract};

    fn xor_contract(expr: &str, kind: &str) -> DesignContract {
        let raw = format!(
            r#"{{"module_name":"top_module","io":[
              {{"name":"a","dir":"input"}},{{"name":"b","dir":"input"}},{{"name":"sel","dir":"input"}},
              {{"name":"y","dir":"output"}}],
              "timing":{{"outputs":{{"y":{{"latency_cycles":0}}}}}},
              "functional_summary":{{"overview":"","rules":[{{"id":"r1","kind":"{kind}","expression":"{expr}","outputs":["y"]}}]}}}}"#
        );
        lint(&parse_contract(&raw).unwrap()).canonical.unwrap()
    }

    const XOR_DUT: &str = "module top_module(input a, input b, input sel, output y);\n    assign y = a ^ b;\nendmodule\n";

    #[test]
    fn one_assignment() {
        let c = xor_contract("y = a ^ b", "boolean");
        let s = synthesize_spec(&c, &["y".into()]).unwrap();
        assert_eq!(s.matches("assign").count(), 1);
        assert!(s.contains("module top_module_spec ("));
        assert_eq!(s, synthesize_spec(&c, &["y".into()]).unwrap());
    }

    #[test]
    fn conditional_becomes_process() {
        let c = xor_contract("y = sel ? a : b", "conditional");
        let s = synthesize_spec(&c, &["y".into()]).unwrap();
        assert!(s.contains("always_comb"));
        assert!(s.contains("if (sel)"));
        assert!(s.contains("else\n"));
        let back = parse(&s).unwrap();
        assert!(back.module("top_module_spec").is_some());
    }

    #[test]
    fn unknown_signal_rejected() {
        let c = xor_contract("y = a ^ z", "boolean");
        assert!(matches!(
            synthesize_spec(&c, &["y".into()]),
            Err(FormalError::UnsupportedRule { .. })
        ));
    }

    #[test]
    fn xor_vs_or_counterexample() {
        let c = xor_contract("y = a | b", "boolean");
        let spec = synthesize_spec(&c, &["y".into()]).unwrap();
        let b = build_miter(&c, XOR_DUT, &spec, &["y".into()]).unwrap();
        assert!(b.miter_source.contains("assert (y_dut === y_spec);"));
        let cex = exhaustive_counterexample("top_module", XOR_DUT, &spec, &["y".into()])
            .unwrap()
            .unwrap();
        assert_eq!(cex["a"], 1);
        assert_eq!(cex["b"], 1);
    }

    #[test]
    fn missing_port() {
        let c = xor_contract("y = a ^ b", "boolean");
        let dut = "module top_module(input a, input sel, output y); assign y = a; endmodule";
        let spec = synthesize_spec(&c, &["y".into()]).unwrap();
        let e = build_miter(&c, dut, &spec, &["y".into()]).unwrap_err();
        assert!(matches!(e, FormalError::PortMismatch(ref v) if v[0].contains("`b`")));
    }
}
