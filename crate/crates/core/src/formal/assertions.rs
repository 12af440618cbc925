use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{FormalError, Obligation, Template};
use crate::contract::{ClockEdge, DesignContract, ResetActive};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionBundle {
    pub checker: String,
    pub bind: String,
    /// Assertion ids, in emission order.
    pub names: Vec<String>,
    /// Obligations left to the assertion-writing model.
    pub delegated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionViolation {
    pub name: String,
    pub time: u64,
    pub implicated: Vec<(String, String)>,
    pub message: String,
}

fn logic_decl(width: u32, name: &str) -> String {
    if width > 1 {
        format!("logic [{}:0] {name}", width - 1)
    } else {
        format!("logic {name}")
    }
}

/// Emit one checker module and a bind statement attaching it to the DUT.
pub fn emit_assertions<'a>(
    c: &DesignContract,
    obligations: impl IntoIterator<Item = &'a Obligation>,
) -> Result<AssertionBundle, FormalError> {
    let (clk, edge) = c.clock().ok_or(FormalError::NoClock)?;
    let reset = c.reset();
    let (active_kw, inactive_kw, inactive_level, edge_name) = match edge {
        ClockEdge::Negedge => ("negedge", "posedge", "1'b1", "NO_POSEDGE_UPDATE"),
        _ => ("posedge", "negedge", "1'b0", "NO_NEGEDGE_UPDATE"),
    };
    let not_in_reset = match &reset {
        Some((r, ResetActive::Low, _)) => format!("{r} !== 1'b0"),
        Some((r, _, _)) => format!("{r} !== 1'b1"),
        None => "1'b1".into(),
    };
    let in_reset = match &reset {
        Some((r, ResetActive::Low, _)) => format!("{r} === 1'b0"),
        Some((r, _, _)) => format!("{r} === 1'b1"),
        None => "1'b0".into(),
    };

    let mut monitored: Vec<String> = Vec::new();
    let mut body = String::new();
    let mut names = Vec::new();
    let mut delegated = Vec::new();
    let mut need_rst_d = false;

    for o in obligations {
        let Some(sig) = o.targets.first() else { continue };
        let w = c.port(sig).map(|p| p.width_or_1()).unwrap_or(1);
        match o.template {
            Template::EdgeStability => {
                let name = format!("{edge_name}_{sig}");
                body.push_str(&format!(
                    "    // {name}: `{sig}` may only change on {active_kw} {clk}
    {};
    logic {sig}_armed = 1'b0;
    always @({inactive_kw} {clk}) begin
        {sig}_prev <= {sig};
        {sig}_armed <= 1'b1;
    end
    always @({sig}) begin
        if ({sig}_armed && {clk} === {inactive_level} && {not_in_reset} && {sig} !== {sig}_prev)
            $display(\"ASSERT_VIOLATION name={name} time=%0t {sig}_prev=0x%0h {sig}=0x%0h\", $time, {sig}_prev, {sig});
    end

",
                    logic_decl(w, &format!("{sig}_prev")),
                ));
                names.push(name);
            }
            Template::ResetValue => {
                if reset.is_none() {
                    continue;
                }
                let rv = o.reset_value.as_deref().unwrap_or("0");
                let name = format!("RESET_VALUE_{sig}");
                need_rst_d = true;
                body.push_str(&format!(
                    "    // {name}: `{sig}` holds {rv} after a reset edge
    always @({active_kw} {clk}) begin
        if (rst_seen && {sig} !== ({rv}))
            $display(\"ASSERT_VIOLATION name={name} time=%0t {sig}=0x%0h\", $time, {sig});
    end

"
                ));
                names.push(name);
            }
            Template::Rule => {
                delegated.push(o.id.clone());
                continue;
            }
            Template::Equivalence => continue,
        }
        if !monitored.contains(sig) {
            monitored.push(sig.clone());
        }
    }

    let checker_name = format!("{}_checker", c.module());
    let mut ports = alloc::vec![format!("input logic {clk}")];
    if let Some((r, _, _)) = &reset {
        ports.push(format!("input logic {r}"));
    }
    for s in &monitored {
        let w = c.port(s).map(|p| p.width_or_1()).unwrap_or(1);
        ports.push(format!("input {}", logic_decl(w, s)));
    }
    let mut checker = format!("module {checker_name} (\n");
    for (i, p) in ports.iter().enumerate() {
        let sep = if i + 1 < ports.len() { "," } else { "" };
        checker.push_str(&format!("    {p}{sep}\n"));
    }
    checker.push_str(");\n");
    if need_rst_d {
        checker.push_str(&format!(
            "    logic rst_seen = 1'b0;\n    always @({active_kw} {clk}) rst_seen <= ({in_reset});\n\n"
        ));
    }
    checker.push_str(&body);
    checker.push_str("endmodule\n");

    let mut conns = alloc::vec![format!(".{clk}({clk})")];
    if let Some((r, _, _)) = &reset {
        conns.push(format!(".{r}({r})"));
    }
    conns.extend(monitored.iter().map(|s| format!(".{s}({s})")));
    let bind = format!(
        "bind {} {checker_name} {checker_name}_i ({});\n",
        c.module(),
        conns.join(", ")
    );
    Ok(AssertionBundle {
        checker,
        bind,
        names,
        delegated,
    })
}

/// Every `ASSERT_VIOLATION` line of a simulation log, in time order, plus
/// warnings for lines that could not be parsed.
pub fn parse_violations(log: &str) -> (Vec<AssertionViolation>, Vec<String>) {
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for line in log.lines() {
        let Some(pos) = line.find("ASSERT_VIOLATION") else { continue };
        let mut name = None;
        let mut time = None;
        let mut implicated = Vec::new();
        for tok in line[pos + "ASSERT_VIOLATION".len()..].split_whitespace() {
            let Some((k, v)) = tok.split_once('=') else { continue };
            match k {
                "name" => name = Some(v.to_string()),
                "time" => time = v.parse::<u64>().ok(),
                _ => implicated.push((k.to_string(), v.to_string())),
            }
        }
        match (name, time) {
            (Some(name), Some(time)) => out.push(AssertionViolation {
                name,
                time,
                implicated,
                message: line.trim().to_string(),
            }),
            _ => warnings.push(format!("unparseable violation line: {}", line.trim())),
        }
    }
    out.sort_by_key(|v| v.time);
    (out, warnings)
}
