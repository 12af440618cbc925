//! Structural complexity metrics and the difficulty grading derived from
//! them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::verilog::ast::*;
use crate::verilog::eval::{eval_const, module_params};
use crate::verilog::lexer::{tokenize, TokenKind};
use crate::verilog::{parse, SyntaxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComplexityMetrics {
    pub loc: u64,
    pub n_assign: u64,
    pub n_always: u64,
    pub n_case: u64,
    pub max_width: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Easy,
    Medium,
    Hard,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Easy => "Easy",
            Label::Medium => "Medium",
            Label::Hard => "Hard",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s.trim().to_ascii_lowercase().as_str() {
            "easy" => Some(Label::Easy),
            "medium" => Some(Label::Medium),
            "hard" => Some(Label::Hard),
            _ => None,
        }
    }

    /// Easy for S ≤ 1, Medium for 2 ≤ S ≤ 3, Hard for S ≥ 4.
    pub fn from_score(s: u32) -> Label {
        match s {
            0..=1 => Label::Easy,
            2..=3 => Label::Medium,
            _ => Label::Hard,
        }
    }
}

impl core::fmt::Display for Label {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifficultyLabel {
    pub s_loc: u32,
    pub s_assign: u32,
    pub s_always: u32,
    pub s_case: u32,
    pub s_width: u32,
    pub score: u32,
    pub label: Label,
}

pub fn score(m: &ComplexityMetrics) -> DifficultyLabel {
    let s_loc = match m.loc {
        0..=10 => 0,
        11..=30 => 1,
        31..=60 => 2,
        _ => 3,
    };
    let s_assign = match m.n_assign {
        0..=1 => 0,
        2..=4 => 1,
        _ => 2,
    };
    let s_always = m.n_always.min(3) as u32;
    let s_case = m.n_case.min(3) as u32;
    let s_width = match m.max_width {
        0..=32 => 0,
        33..=128 => 1,
        _ => 2,
    };
    let score = s_loc + s_assign + s_always + s_case + s_width;
    DifficultyLabel {
        s_loc,
        s_assign,
        s_always,
        s_case,
        s_width,
        score,
        label: Label::from_score(score),
    }
}

/// Metrics plus notes about widths that could not be resolved.
pub fn measure(source: &str) -> Result<(ComplexityMetrics, Vec<String>), SyntaxError> {
    let file = parse(source)?;
    let toks = tokenize(source)?;
    let mut m = ComplexityMetrics::default();
    let mut warnings = Vec::new();

    // A line counts when a token starts on it, so blank and comment-only
    // lines drop out.
    let lines: BTreeSet<usize> = toks.iter().map(|t| t.line).collect();
    m.loc = lines.len() as u64;
    m.n_case = toks
        .iter()
        .filter(|t| matches!(&t.kind, TokenKind::Ident(n) if matches!(n.as_str(), "case" | "casez" | "casex")))
        .count() as u64;

    for module in &file.modules {
        let params = match module_params(module) {
            Ok(p) => p,
            Err(e) => {
                warnings.push(format!("{}: parameters unresolved ({e})", module.name));
                BTreeMap::new()
            }
        };
        let mut width = |r: &Option<(Expr, Expr)>, what: &str| -> u64 {
            let Some((msb, lsb)) = r else { return 1 };
            match (eval_const(msb, &params), eval_const(lsb, &params)) {
                (Ok(a), Ok(b)) => ((a.as_i128() - b.as_i128()).unsigned_abs() + 1) as u64,
                _ => {
                    warnings.push(format!("{}: width of `{what}` unresolved, assuming 32", module.name));
                    32
                }
            }
        };
        for p in &module.ports {
            m.max_width = m.max_width.max(width(&p.range, &p.name));
        }
        count_items(&module.items, &mut m, &mut width);
    }
    Ok((m, warnings))
}

fn count_items(
    items: &[Item],
    m: &mut ComplexityMetrics,
    width: &mut dyn FnMut(&Option<(Expr, Expr)>, &str) -> u64,
) {
    for it in items {
        match &it.kind {
            ItemKind::ContinuousAssign(_) => m.n_assign += 1,
            ItemKind::Always { .. } => m.n_always += 1,
            ItemKind::Declaration {
                range,
                vars,
                is_net,
                ..
            } => {
                if *is_net && vars.iter().any(|v| v.init.is_some()) {
                    m.n_assign += 1;
                }
                for v in vars {
                    let r = if v.range.is_some() { &v.range } else { range };
                    m.max_width = m.max_width.max(width(r, &v.name));
                }
            }
            ItemKind::Generate(inner) => count_items(inner, m, width),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(loc: u64, a: u64, al: u64, c: u64, w: u64) -> ComplexityMetrics {
        ComplexityMetrics {
            loc,
            n_assign: a,
            n_always: al,
            n_case: c,
            max_width: w,
        }
    }

    #[test]
    fn eight_line_module() {
        let src = "// adder
module top_module (
    input [7:0] a,
    input [7:0] b,

    output [7:0] s
);
    /* sum */
    assign s = a + b;
endmodule
";
        let (m, w) = measure(src).unwrap();
        assert!(w.is_empty());
        assert_eq!(m, metrics(7, 1, 0, 0, 8));
    }

    #[test]
    fn wide_vector() {
        let (m, _) = measure("module m; logic [1023:0] x; endmodule").unwrap();
        assert_eq!(m.max_width, 1024);
    }

    #[test]
    fn parametric_width_uses_default() {
        let (m, _) = measure("module m #(parameter W = 48) (input [W-1:0] a); endmodule").unwrap();
        assert_eq!(m.max_width, 48);
    }

    #[test]
    fn hand_scored_examples() {
        let d = score(&metrics(25, 3, 1, 0, 16));
        assert_eq!((d.s_loc, d.s_assign, d.s_always, d.s_case, d.s_width), (1, 1, 1, 0, 0));
        assert_eq!((d.score, d.label), (3, Label::Medium));
        assert_eq!(score(&metrics(8, 1, 0, 0, 8)).label, Label::Easy);
        let h = score(&metrics(70, 5, 3, 3, 256));
        assert_eq!((h.score, h.label), (13, Label::Hard));
    }
}
