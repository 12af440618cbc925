use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::value::FourStateValue;
use super::vcd::VcdDb;
use super::window::*;
use crate::contract::{ClockEdge, DesignContract};
use crate::rtl_graph::{DependencyGraph, SuspectSet};
use crate::simlog::{LogSummary, Stage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailingSignal {
    pub name: String,
    /// Value just before the last active edge of the window.
    pub before: Option<FourStateValue>,
    pub observed: Option<FourStateValue>,
    pub expected: Option<FourStateValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedSource {
    /// Reference values dumped alongside the DUT in the waveform.
    Waveform,
    /// Values printed on the harness mismatch lines.
    Log,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuspectBlock {
    pub id: usize,
    pub kind: String,
    pub lines: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    pub stage: Stage,
    pub t_f: Option<u64>,
    pub mismatches: Option<u64>,
    pub failing_signals: Vec<FailingSignal>,
    pub expected_source: ExpectedSource,
    pub alignment: Option<AlignmentHint>,
    pub window: Option<TraceWindow>,
    /// Edge the window was sampled on, `None` when sampled on dump times.
    pub sampled_on: Option<(String, String)>,
    pub suspects: Vec<SuspectBlock>,
    /// Assertion violations and, for compile failures, raw diagnostics.
    pub diagnostics: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("the run passed; there is nothing to report")]
    NoFailure,
    #[error(transparent)]
    Window(#[from] WindowError),
}

pub struct ReportInputs<'a> {
    pub stage: Stage,
    pub log: Option<&'a LogSummary>,
    /// Raw compiler or simulator text.
    pub diagnostics: &'a str,
    pub vcd: Option<&'a VcdDb>,
    pub contract: &'a DesignContract,
    pub graph: Option<&'a DependencyGraph>,
    pub suspect: Option<&'a SuspectSet>,
    pub k: u64,
}

const OBSERVED_SUFFIXES: &[&str] = &["_dut", ""];
const EXPECTED_SUFFIXES: &[&str] = &["_ref", "_exp", "_expected"];

fn resolve(db: &VcdDb, base: &str, suffixes: &[&str]) -> Option<String> {
    suffixes.iter().find_map(|s| {
        let n = format!("{base}{s}");
        db.find(&n).map(|_| n)
    })
}

fn diag_lines(text: &str, limit: usize) -> Vec<String> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .take(limit)
        .map(|l| l.to_string())
        .collect()
}

/// Assemble the trace report for a failing run.
pub fn build_report(inp: &ReportInputs<'_>) -> Result<TraceReport, ReportError> {
    let suspects: Vec<SuspectBlock> = match (inp.graph, inp.suspect) {
        (Some(g), Some(s)) => s
            .block_ids
            .iter()
            .filter_map(|id| g.blocks.iter().find(|b| b.id == *id))
            .map(|b| SuspectBlock {
                id: b.id,
                kind: b.kind.as_str().to_string(),
                lines: b.span,
            })
            .collect(),
        _ => Vec::new(),
    };
    let mut report = TraceReport {
        stage: inp.stage,
        t_f: None,
        mismatches: inp.log.and_then(|l| l.mismatch_count),
        failing_signals: Vec::new(),
        expected_source: ExpectedSource::Unavailable,
        alignment: None,
        window: None,
        sampled_on: None,
        suspects,
        diagnostics: Vec::new(),
        warnings: Vec::new(),
    };
    match inp.stage {
        Stage::Pass => return Err(ReportError::NoFailure),
        Stage::CompileFail => {
            report.diagnostics = diag_lines(inp.diagnostics, 40);
            return Ok(report);
        }
        Stage::SimFail => {}
    }
    if let Some(l) = inp.log {
        report.diagnostics = l.violation_lines.clone();
    }

    let outputs: Vec<String> = inp.contract.outputs().map(|p| p.name.clone()).collect();
    let log_events = inp.log.map(|l| l.events.as_slice()).unwrap_or(&[]);
    let db = inp.vcd;

    // Observed/expected signal names in the dump, per output.
    let pairs: Vec<(String, Option<String>, Option<String>)> = outputs
        .iter()
        .map(|o| {
            let obs = db.and_then(|d| resolve(d, o, OBSERVED_SUFFIXES));
            let exp = db.and_then(|d| resolve(d, o, EXPECTED_SUFFIXES));
            (o.clone(), obs, exp)
        })
        .collect();

    report.t_f = inp.log.and_then(|l| l.first_failure_time);

    // Sampling grid.
    let clock = inp.contract.clock().map(|(c, e)| (c.to_string(), e));
    let grid: Vec<u64> = match (db, &clock) {
        (Some(d), Some((c, e))) => active_edges(d, c, e).unwrap_or_default(),
        (Some(d), None) => d.times.clone(),
        _ => Vec::new(),
    };

    // Without a logged time, locate the divergence on the waveform.
    if report.t_f.is_none() {
        if let Some(d) = db {
            let both: Vec<_> = pairs
                .iter()
                .filter_map(|(_, o, e)| Some((o.as_ref()?, e.as_ref()?)))
                .collect();
            if !both.is_empty() {
                let sample = |t: &u64, pick: bool| -> Vec<FourStateValue> {
                    both.iter()
                        .map(|(o, e)| d.value_at(if pick { o } else { e }, *t).unwrap())
                        .collect()
                };
                let obs: Vec<_> = grid.iter().map(|t| sample(t, true)).collect();
                let exp: Vec<_> = grid.iter().map(|t| sample(t, false)).collect();
                report.t_f = first_divergence(&grid, &obs, &exp).ok();
            }
        }
    }

    // Failing outputs: named by the log, else differing in the dump at t_f,
    // else all outputs.
    let mut failing: Vec<String> = Vec::new();
    for e in log_events {
        if let Some(s) = &e.signal {
            if outputs.contains(s) && !failing.contains(s) {
                failing.push(s.clone());
            }
        }
    }
    if failing.is_empty() {
        if let (Some(d), Some(t)) = (db, report.t_f) {
            for (o, obs, exp) in &pairs {
                if let (Some(a), Some(b)) = (obs, exp) {
                    if d.value_at(a, t) != d.value_at(b, t) {
                        failing.push(o.clone());
                    }
                }
            }
        }
    }
    if failing.is_empty() {
        failing = outputs.clone();
    }

    let last_edge = report
        .t_f
        .and_then(|t| grid.iter().rev().find(|g| **g <= t).copied());
    let mut from_wave = false;
    let mut from_log = false;
    for name in &failing {
        let (_, obs, exp) = pairs.iter().find(|p| &p.0 == name).unwrap();
        let ev = log_events
            .iter()
            .find(|e| e.signal.as_deref() == Some(name) && e.time == report.t_f.unwrap_or(e.time));
        let width = inp.contract.port(name).map(|p| p.width_or_1() as usize).unwrap_or(1);
        let parse = |s: &Option<String>| {
            s.as_deref().and_then(|v| FourStateValue::from_binary(v, width))
        };
        let mut f = FailingSignal {
            name: name.clone(),
            before: None,
            observed: None,
            expected: None,
        };
        if let (Some(d), Some(t)) = (db, report.t_f) {
            if let Some(o) = obs {
                f.observed = d.value_at(o, t);
                if clock.is_some() {
                    f.before = last_edge.and_then(|e| d.value_before(o, e));
                }
            }
            if let Some(e) = exp {
                f.expected = d.value_at(e, t);
                from_wave = true;
            }
        }
        if let Some(ev) = ev {
            if f.observed.is_none() {
                f.observed = parse(&ev.observed);
            }
            if f.expected.is_none() {
                f.expected = parse(&ev.expected);
                from_log |= f.expected.is_some();
            }
        }
        report.failing_signals.push(f);
    }
    report.expected_source = if from_wave {
        ExpectedSource::Waveform
    } else if from_log {
        ExpectedSource::Log
    } else {
        ExpectedSource::Unavailable
    };

    let (Some(d), Some(t_f)) = (db, report.t_f) else {
        if db.is_none() {
            report.warnings.push("no waveform; report built from the log only".into());
        }
        return Ok(report);
    };

    // Window columns: failing outputs (observed, expected), inputs, then
    // signals touched by suspect blocks.
    let mut cols: Vec<String> = Vec::new();
    let mut pinned: Vec<String> = Vec::new();
    for name in &failing {
        let (_, obs, exp) = pairs.iter().find(|p| &p.0 == name).unwrap();
        for s in [obs, exp].into_iter().flatten() {
            cols.push(s.clone());
            pinned.push(s.clone());
        }
    }
    let clk_name = clock.as_ref().map(|c| c.0.as_str());
    for p in inp.contract.inputs() {
        if Some(p.name.as_str()) != clk_name {
            cols.push(p.name.clone());
        }
    }
    if let (Some(g), Some(s)) = (inp.graph, inp.suspect) {
        let mut touched = BTreeSet::new();
        for b in g.blocks.iter().filter(|b| s.contains(b.id)) {
            touched.extend(b.reads.iter().cloned());
            touched.extend(b.writes.iter().cloned());
        }
        for n in touched {
            if !cols.contains(&n) && !outputs.contains(&n) && Some(n.as_str()) != clk_name {
                cols.push(n);
            }
        }
    }

    let (window, warns) = match &clock {
        Some((c, e)) => {
            report.sampled_on = Some((c.clone(), e.as_str().to_string()));
            extract_window(d, c, e, t_f, inp.k, &cols, &pinned)?
        }
        None => {
            let times: Vec<u64> = d.times.iter().copied().filter(|t| *t <= t_f).collect();
            let keep = times.len().saturating_sub(inp.k as usize + 1);
            let mut w = sample_window(d, &times[keep..], &cols, &pinned);
            w.clock_period = 0;
            (w, Vec::new())
        }
    };
    for w in warns {
        report.warnings.push(match w {
            WindowWarning::NonUniformClock => "clock edges are not uniformly spaced".into(),
        });
    }

    // Alignment over the failing outputs that have a reference.
    let refd: Vec<(&String, &String)> = failing
        .iter()
        .filter_map(|n| {
            let (_, o, e) = pairs.iter().find(|p| &p.0 == n)?;
            Some((o.as_ref()?, e.as_ref()?))
        })
        .collect();
    if !refd.is_empty() {
        let vec_at = |t: u64, obs: bool| -> Vec<FourStateValue> {
            refd.iter()
                .map(|(o, e)| d.value_at(if obs { o } else { e }, t).unwrap())
                .collect()
        };
        let obs: Vec<_> = window.sample_times.iter().map(|t| vec_at(*t, true)).collect();
        let exp: Vec<_> = window.sample_times.iter().map(|t| vec_at(*t, false)).collect();
        report.alignment = alignment_check(&obs, &exp);
    }
    report.window = Some(window);
    Ok(report)
}

/// Sample without a clock: one row per given time.
fn sample_window(db: &VcdDb, times: &[u64], cols: &[String], pinned: &[String]) -> TraceWindow {
    let mut w = TraceWindow {
        clock_period: 0,
        sample_times: times.to_vec(),
        signals: Default::default(),
        elided: Default::default(),
        missing: Default::default(),
    };
    for n in cols {
        match db.find(n) {
            None => {
                w.missing.insert(n.clone());
            }
            Some(v) => {
                let vals: Vec<_> = times.iter().map(|t| db.value_at(&v.name, *t).unwrap()).collect();
                if vals.len() > 1 && vals.windows(2).all(|p| p[0] == p[1]) && !pinned.contains(n) {
                    w.elided.insert(n.clone());
                } else {
                    w.signals.insert(n.clone(), vals);
                }
            }
        }
    }
    w
}

fn opt(v: &Option<FourStateValue>) -> String {
    v.as_ref().map(|v| v.display()).unwrap_or_else(|| "?".into())
}

impl TraceReport {
    /// Deterministic text rendering with FAILURE, ALIGNMENT, TRACE and
    /// SUSPECTS sections.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        s.push_str("FAILURE\n");
        s.push_str(&format!("  stage: {}\n", self.stage.as_str()));
        match self.t_f {
            Some(t) => s.push_str(&format!("  t_f: {t}\n")),
            None => s.push_str("  t_f: unknown\n"),
        }
        if let Some(m) = self.mismatches {
            s.push_str(&format!("  mismatches: {m}\n"));
        }
        for f in &self.failing_signals {
            s.push_str(&format!("  {}:", f.name));
            if let Some(b) = &f.before {
                s.push_str(&format!(" {} ->", b.display()));
            }
            s.push_str(&format!(
                " observed {}, expected {}\n",
                opt(&f.observed),
                opt(&f.expected)
            ));
        }
        let src = match self.expected_source {
            ExpectedSource::Waveform => "waveform",
            ExpectedSource::Log => "log",
            ExpectedSource::Unavailable => "unavailable",
        };
        s.push_str(&format!("  expected values from: {src}\n"));

        s.push_str("ALIGNMENT\n");
        match &self.alignment {
            Some(h) => {
                let scores: Vec<String> = h
                    .scores
                    .iter()
                    .map(|(d, n)| format!("{}{d}:{n}", if *d > 0 { "+" } else { "" }))
                    .collect();
                s.push_str(&format!("  scores {}\n", scores.join(" ")));
                if h.significant {
                    s.push_str(&format!("  {}\n", h.text()));
                } else {
                    s.push_str("  no significant shift\n");
                }
            }
            None => s.push_str("  not available\n"),
        }

        s.push_str("TRACE\n");
        match &self.window {
            Some(w) => {
                match &self.sampled_on {
                    Some((c, e)) => s.push_str(&format!(
                        "  sampled at {e} {c}, period {}\n",
                        w.clock_period
                    )),
                    None => s.push_str("  sampled at dump times\n"),
                }
                let names: Vec<&String> = w.signals.keys().collect();
                let mut rows: Vec<Vec<String>> = Vec::new();
                let mut header = alloc::vec![String::from("time")];
                header.extend(names.iter().map(|n| n.to_string()));
                rows.push(header);
                for (i, t) in w.sample_times.iter().enumerate() {
                    let mut r = alloc::vec![t.to_string()];
                    r.extend(names.iter().map(|n| w.signals[*n][i].display()));
                    rows.push(r);
                }
                let widths: Vec<usize> = (0..rows[0].len())
                    .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
                    .collect();
                for r in rows {
                    let cells: Vec<String> = r
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:<w$}"))
                        .collect();
                    s.push_str(&format!("  {}\n", cells.join("  ").trim_end()));
                }
                if !w.elided.is_empty() {
                    let e: Vec<&str> = w.elided.iter().map(|s| s.as_str()).collect();
                    s.push_str(&format!("  constant (elided): {}\n", e.join(", ")));
                }
                if !w.missing.is_empty() {
                    let m: Vec<&str> = w.missing.iter().map(|s| s.as_str()).collect();
                    s.push_str(&format!("  not in waveform: {}\n", m.join(", ")));
                }
            }
            None => s.push_str("  not available\n"),
        }

        s.push_str("SUSPECTS\n");
        if self.suspects.is_empty() {
            s.push_str("  none\n");
        }
        for b in &self.suspects {
            s.push_str(&format!(
                "  block {} {} lines {}-{}\n",
                b.id, b.kind, b.lines.0, b.lines.1
            ));
        }
        if !self.diagnostics.is_empty() {
            s.push_str("DIAGNOSTICS\n");
            for d in &self.diagnostics {
                s.push_str(&format!("  {d}\n"));
            }
        }
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        s
    }
}

impl ClockEdge {
    /// Opposite edge, used by stability checkers.
    pub fn inactive(&self) -> ClockEdge {
        match self {
            ClockEdge::Negedge => ClockEdge::Posedge,
            _ => ClockEdge::Negedge,
        }
    }
}
