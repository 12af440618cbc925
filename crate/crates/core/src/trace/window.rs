use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::value::{FourStateValue, Logic};
use super::vcd::VcdDb;
use crate::contract::ClockEdge;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("observed and expected series agree at every sample")]
pub struct NoDivergence;

/// Earliest grid time at which the two series differ. Comparison is
/// structural, so x and z differ from 0, 1 and each other.
pub fn first_divergence<T: PartialEq>(
    grid: &[u64],
    observed: &[T],
    expected: &[T],
) -> Result<u64, NoDivergence> {
    grid.iter()
        .zip(observed.iter().zip(expected))
        .find(|(_, (o, e))| o != e)
        .map(|(t, _)| *t)
        .ok_or(NoDivergence)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceWindow {
    pub clock_period: u64,
    pub sample_times: Vec<u64>,
    pub signals: BTreeMap<String, Vec<FourStateValue>>,
    /// Signals left out because they never change inside the window.
    pub elided: BTreeSet<String>,
    /// Requested signals absent from the dump.
    pub missing: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WindowError {
    #[error("clock `{0}` not found in the waveform")]
    ClockNotFound(String),
    #[error("window size K must be at least 1")]
    BadK,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowWarning {
    /// Edge spacing varies or fewer than two edges exist.
    NonUniformClock,
}

/// Times at which the clock makes an active transition.
pub fn active_edges(db: &VcdDb, clock: &str, edge: &ClockEdge) -> Option<Vec<u64>> {
    let ch = db.changes(clock)?;
    let target = match edge {
        ClockEdge::Negedge => Logic::Zero,
        _ => Logic::One,
    };
    let mut prev: Option<Logic> = None;
    let mut out = Vec::new();
    for (t, v) in ch {
        let b = v.bits()[v.width() - 1];
        if b == target && prev != Some(target) && prev.is_some() {
            if out.last() != Some(t) {
                out.push(*t);
            }
        }
        prev = Some(b);
    }
    Some(out)
}

fn median(mut v: Vec<u64>) -> u64 {
    v.sort_unstable();
    v[v.len() / 2]
}

/// Sample `signals` at each active clock edge inside
/// `[t_f - K*T_clk, t_f]`. Signals listed in `pinned` are never elided.
pub fn extract_window(
    db: &VcdDb,
    clock: &str,
    edge: &ClockEdge,
    t_f: u64,
    k: u64,
    signals: &[String],
    pinned: &[String],
) -> Result<(TraceWindow, Vec<WindowWarning>), WindowError> {
    if k == 0 {
        return Err(WindowError::BadK);
    }
    let edges =
        active_edges(db, clock, edge).ok_or_else(|| WindowError::ClockNotFound(clock.into()))?;
    let mut warnings = Vec::new();
    let gaps: Vec<u64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let period = if gaps.is_empty() {
        warnings.push(WindowWarning::NonUniformClock);
        0
    } else {
        if gaps.iter().any(|g| *g != gaps[0]) {
            warnings.push(WindowWarning::NonUniformClock);
        }
        median(gaps)
    };

    let sample_times: Vec<u64> = if period == 0 {
        edges.iter().rev().find(|t| **t <= t_f).copied().into_iter().collect()
    } else {
        let lo = t_f.saturating_sub(k.saturating_mul(period));
        edges.iter().copied().filter(|t| *t >= lo && *t <= t_f).collect()
    };

    let mut w = TraceWindow {
        clock_period: period,
        sample_times,
        signals: BTreeMap::new(),
        elided: BTreeSet::new(),
        missing: BTreeSet::new(),
    };
    for name in signals {
        if w.signals.contains_key(name) || w.elided.contains(name) {
            continue;
        }
        let Some(var) = db.find(name) else {
            w.missing.insert(name.clone());
            continue;
        };
        let full = var.name.clone();
        let vals: Vec<FourStateValue> = w
            .sample_times
            .iter()
            .map(|t| db.value_at(&full, *t).unwrap())
            .collect();
        let constant = vals.windows(2).all(|p| p[0] == p[1]);
        if constant && vals.len() > 1 && !pinned.contains(name) {
            w.elided.insert(name.clone());
        } else {
            w.signals.insert(name.clone(), vals);
        }
    }
    Ok((w, warnings))
}

/// Shifts tried by the alignment check.
pub const SHIFTS: [i32; 5] = [-2, -1, 0, 1, 2];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentHint {
    pub scores: BTreeMap<i32, usize>,
    pub best_delta: i32,
    pub significant: bool,
}

impl AlignmentHint {
    pub fn text(&self) -> String {
        let d = self.best_delta;
        let n = d.unsigned_abs();
        let unit = if n == 1 { "cycle" } else { "cycles" };
        let dir = if d > 0 { "late" } else { "early" };
        let sign = if d > 0 { "+" } else { "" };
        if d == 0 {
            return String::from("best alignment at δ=0: no timing shift detected");
        }
        format!("best alignment at δ={sign}{d}: output appears {n} {unit} {dir}")
    }
}

/// Mismatch count with the expected series shifted by `delta`:
/// observed[i] is compared against expected[i - delta]. A positive shift
/// therefore means the output lags. Pairs that fall off either end are
/// skipped rather than counted.
pub fn shift_score<T: PartialEq>(observed: &[T], expected: &[T], delta: i32) -> usize {
    let n = observed.len().min(expected.len()) as i64;
    (0..n)
        .filter(|&i| {
            let j = i - delta as i64;
            j >= 0 && j < n && observed[i as usize] != expected[j as usize]
        })
        .count()
}

/// Test the five small shifts and pick the best one. Returns `None` for
/// windows shorter than four samples.
pub fn alignment_check<T: PartialEq>(observed: &[T], expected: &[T]) -> Option<AlignmentHint> {
    if observed.len().min(expected.len()) < 4 {
        return None;
    }
    let scores: BTreeMap<i32, usize> = SHIFTS
        .iter()
        .map(|d| (*d, shift_score(observed, expected, *d)))
        .collect();
    // smaller |δ| first, negative before positive
    let best_delta = *SHIFTS
        .iter()
        .min_by_key(|d| (scores[d], d.unsigned_abs(), **d > 0))
        .unwrap();
    let best = scores[&best_delta];
    let zero = scores[&0];
    let significant = best_delta != 0 && 2 * best <= zero && zero - best >= 2;
    Some(AlignmentHint {
        scores,
        best_delta,
        significant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::vcd::parse_vcd;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn divergence_examples() {
        let g = [0, 10, 20, 30];
        assert_eq!(first_divergence(&g, &[0, 1, 1, 0], &[0, 1, 0, 0]), Ok(20));
        assert_eq!(first_divergence(&g, &[0, 1, 1, 0], &[0, 1, 1, 0]), Err(NoDivergence));
        assert_eq!(first_divergence(&g, &[1, 1, 1, 0], &[0, 1, 1, 0]), Ok(0));
    }

    #[test]
    fn delayed_by_one_sample() {
        let exp = [1, 2, 3, 4, 5, 6, 7, 8];
        let obs = [0, 1, 2, 3, 4, 5, 6, 7];
        let h = alignment_check(&obs, &exp).unwrap();
        // Independent computation, pair by pair.
        let mut want = BTreeMap::new();
        for d in SHIFTS {
            let mut s = 0;
            for i in 0..8i32 {
                let j = i - d;
                if (0..8).contains(&j) && obs[i as usize] != exp[j as usize] {
                    s += 1;
                }
            }
            want.insert(d, s);
        }
        assert_eq!(h.scores, want);
        assert_eq!(h.best_delta, 1);
        assert_eq!(h.scores[&1], 0);
        assert!(h.significant);
        assert_eq!(h.text(), "best alignment at δ=+1: output appears 1 cycle late");
    }

    #[test]
    fn identical_is_not_significant() {
        let s = [3, 1, 4, 1, 5];
        let h = alignment_check(&s, &s).unwrap();
        assert_eq!(h.best_delta, 0);
        assert!(!h.significant);
        assert!(alignment_check(&s[..3], &s[..3]).is_none());
    }

    fn clocked_vcd(edges: &[u64]) -> String {
        let mut s = String::from(
            "$scope module tb $end $var wire 1 c clk $end $var wire 1 e en $end \
             $var wire 4 q q $end $upscope $end $enddefinitions $end #0 0c 1e b0 q\n",
        );
        for (i, t) in edges.iter().enumerate() {
            s.push_str(&format!("#{t} 1c b{:b} q\n#{} 0c\n", i % 16, t + 5));
        }
        s
    }

    #[test]
    fn window_bounds_and_elision() {
        let edges: Vec<u64> = (0..20).map(|i| 10 * i + 10).collect();
        let db = parse_vcd(&clocked_vcd(&edges)).unwrap();
        let names = vec!["q".to_string(), "en".to_string()];
        let (w, warn) =
            extract_window(&db, "clk", &ClockEdge::Posedge, 100, 8, &names, &[]).unwrap();
        assert!(warn.is_empty());
        assert_eq!(w.clock_period, 10);
        assert_eq!(w.sample_times, [20, 30, 40, 50, 60, 70, 80, 90, 100]);
        assert!(w.elided.contains("en"));
        assert_eq!(w.signals["q"].len(), 9);
    }

    #[test]
    fn single_edge_clock() {
        let db = parse_vcd(&clocked_vcd(&[40])).unwrap();
        let (w, warn) =
            extract_window(&db, "clk", &ClockEdge::Posedge, 100, 8, &["q".into()], &[]).unwrap();
        assert_eq!(warn, [WindowWarning::NonUniformClock]);
        assert_eq!(w.sample_times, [40]);
        assert!(matches!(
            extract_window(&db, "nope", &ClockEdge::Posedge, 100, 8, &[], &[]),
            Err(WindowError::ClockNotFound(_))
        ));
    }
}
