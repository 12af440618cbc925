//! Simulator log grammar: mismatch lines, assertion violations and harness
//! verdict markers.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    CompileFail,
    SimFail,
    Pass,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::CompileFail => "compile_fail",
            Stage::SimFail => "sim_fail",
            Stage::Pass => "pass",
        }
    }
}

/// One recognized failure event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureEvent {
    pub time: u64,
    /// Signal named on the line, if any.
    pub signal: Option<String>,
    pub observed: Option<String>,
    pub expected: Option<String>,
    pub line: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogSummary {
    pub verdict: Stage,
    pub first_failure_time: Option<u64>,
    pub mismatch_count: Option<u64>,
    /// The harness gave no count and `mismatch_count` is the default of 1.
    pub m_defaulted: bool,
    pub events: Vec<FailureEvent>,
    /// Lines carrying `ASSERT_VIOLATION`, forwarded verbatim.
    pub violation_lines: Vec<String>,
}

/// Hooks for harness-specific conventions.
pub struct LogRules<'a> {
    /// Extra mismatch grammar: returns the failure time when a line matches.
    pub extra_mismatch: &'a dyn Fn(&str) -> Option<u64>,
    /// Harness success marker.
    pub success: &'a dyn Fn(&str) -> bool,
}

fn no_extra(_: &str) -> Option<u64> {
    None
}

fn default_success(line: &str) -> bool {
    let l = line.to_ascii_lowercase();
    l.contains("test passed") || l.contains("all tests passed") || l.trim() == "pass"
}

impl Default for LogRules<'_> {
    fn default() -> Self {
        LogRules {
            extra_mismatch: &no_extra,
            success: &default_success,
        }
    }
}

fn leading_int(s: &str) -> Option<u64> {
    let s = s.trim_start();
    let end = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    s[..end].parse().ok()
}

fn after<'a>(haystack: &'a str, needle: &str) -> Option<&'a str> {
    let lower = haystack.to_ascii_lowercase();
    lower.find(needle).map(|i| &haystack[i + needle.len()..])
}

/// `key=value` pairs on a line.
fn kv(line: &str, key: &str) -> Option<String> {
    line.split_whitespace().find_map(|tok| {
        let (k, v) = tok.split_once('=')?;
        (k == key).then(|| v.trim_end_matches([',', ';']).to_string())
    })
}

fn mismatch_event(line: &str) -> Option<FailureEvent> {
    let rest = after(line, "mismatch at time")?;
    let time = leading_int(rest)?;
    // Optional detail: `: <sig> observed=<v> expected=<v>`
    let detail = rest.split_once(':').map(|(_, d)| d).unwrap_or("");
    let signal = detail
        .split_whitespace()
        .next()
        .filter(|t| !t.contains('='))
        .map(|t| t.to_string());
    Some(FailureEvent {
        time,
        signal,
        observed: kv(detail, "observed").or_else(|| kv(detail, "got")),
        expected: kv(detail, "expected"),
        line: line.to_string(),
    })
}

/// VerilogEval-style `Hint: Output 'q' has 3 mismatches. First mismatch
/// occurred at time 370.`
fn first_mismatch_hint(line: &str) -> Option<FailureEvent> {
    let rest = after(line, "first mismatch occurred at time")?;
    let time = leading_int(rest)?;
    let signal = line
        .split_once("Output '")
        .and_then(|(_, r)| r.split_once('\''))
        .map(|(s, _)| s.to_string());
    Some(FailureEvent {
        time,
        signal,
        observed: None,
        expected: None,
        line: line.to_string(),
    })
}

/// `Mismatches: 3 in 120 samples`
fn total_mismatches(line: &str) -> Option<u64> {
    let rest = line.trim_start().strip_prefix("Mismatches:")?;
    leading_int(rest)
}

fn violation_event(line: &str) -> Option<FailureEvent> {
    let rest = &line[line.find("ASSERT_VIOLATION")?..];
    let time = kv(rest, "time").and_then(|t| leading_int(&t))?;
    Some(FailureEvent {
        time,
        signal: kv(rest, "name"),
        observed: None,
        expected: None,
        line: line.to_string(),
    })
}

fn fail_marker(line: &str) -> bool {
    let l = line.to_ascii_lowercase();
    l.contains("test failed") || l.contains("tests failed") || l.trim() == "fail"
}

/// Parse a simulation log. `exit_ok` is whether the simulation process
/// exited with status 0.
pub fn parse_log(text: &str, exit_ok: bool, rules: &LogRules<'_>) -> LogSummary {
    let mut events = Vec::new();
    let mut violation_lines = Vec::new();
    let mut counted = 0u64;
    let mut total: Option<u64> = None;
    let mut failed_marker = false;
    let mut success = false;

    for line in text.lines() {
        if line.contains("ASSERT_VIOLATION") {
            violation_lines.push(line.to_string());
            if let Some(e) = violation_event(line) {
                events.push(e);
                counted += 1;
            }
            continue;
        }
        if let Some(e) = mismatch_event(line) {
            events.push(e);
            counted += 1;
            continue;
        }
        if let Some(e) = first_mismatch_hint(line) {
            events.push(e);
            continue;
        }
        if let Some(n) = total_mismatches(line) {
            total = Some(total.unwrap_or(0) + n);
            continue;
        }
        if let Some(t) = (rules.extra_mismatch)(line) {
            events.push(FailureEvent {
                time: t,
                signal: None,
                observed: None,
                expected: None,
                line: line.to_string(),
            });
            counted += 1;
            continue;
        }
        failed_marker |= fail_marker(line);
        success |= (rules.success)(line);
    }

    let first = events.iter().map(|e| e.time).min();
    let m = match total {
        // violations are not part of the harness total
        Some(n) => n + violation_lines.len() as u64,
        None => counted,
    };
    let failing = m > 0 || first.is_some() || failed_marker || (!exit_ok && !success);
    if !failing {
        return LogSummary {
            verdict: Stage::Pass,
            first_failure_time: None,
            mismatch_count: Some(0),
            m_defaulted: false,
            events,
            violation_lines,
        };
    }
    LogSummary {
        verdict: Stage::SimFail,
        first_failure_time: first,
        mismatch_count: Some(m.max(1)),
        m_defaulted: m == 0,
        events,
        violation_lines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> LogSummary {
        parse_log(text, true, &LogRules::default())
    }

    #[test]
    fn two_mismatch_lines() {
        let s = p("Mismatch at time 370: q observed=0110 expected=1000\nMismatch at time 420\n");
        assert_eq!(s.verdict, Stage::SimFail);
        assert_eq!(s.first_failure_time, Some(370));
        assert_eq!(s.mismatch_count, Some(2));
        assert_eq!(s.events[0].signal.as_deref(), Some("q"));
        assert_eq!(s.events[0].expected.as_deref(), Some("1000"));
    }

    #[test]
    fn minimum_not_first() {
        let s = p("Mismatch at time 420\nMismatch at time 370\n");
        assert_eq!(s.first_failure_time, Some(370));
    }

    #[test]
    fn violation_only() {
        let s = p("ASSERT_VIOLATION name=NO_NEGEDGE_UPDATE_q time=30 q_prev=0x01 q=0x03\n");
        assert_eq!(s.verdict, Stage::SimFail);
        assert_eq!(s.first_failure_time, Some(30));
        assert_eq!(s.violation_lines.len(), 1);
    }

    #[test]
    fn pass_marker() {
        let s = p("Hint: Total mismatched samples is 0 out of 200 samples\nMismatches: 0 in 200 samples\n");
        assert_eq!(s.verdict, Stage::Pass);
        assert_eq!(s.mismatch_count, Some(0));
    }

    #[test]
    fn verilogeval_summary() {
        let s = p("Hint: Output 'q' has 7 mismatches. First mismatch occurred at time 370.\nMismatches: 7 in 100 samples\n");
        assert_eq!(s.first_failure_time, Some(370));
        assert_eq!(s.mismatch_count, Some(7));
        assert_eq!(s.events[0].signal.as_deref(), Some("q"));
    }

    #[test]
    fn unrecognized_nonzero_exit() {
        let s = parse_log("segfault\n", false, &LogRules::default());
        assert_eq!(s.verdict, Stage::SimFail);
        assert_eq!(s.mismatch_count, Some(1));
        assert!(s.m_defaulted);
        assert_eq!(s.first_failure_time, None);
    }
}
