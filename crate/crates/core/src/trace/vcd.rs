use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::value::{FourStateValue, Logic};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("VCD byte {offset}: {message}")]
pub struct VcdError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcdVar {
    /// Hierarchical name, scopes joined with `.`.
    pub name: String,
    pub id: String,
    pub width: usize,
    pub kind: String,
}

/// Parsed value changes. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VcdDb {
    pub timescale: Option<String>,
    pub vars: Vec<VcdVar>,
    /// Per identifier code, changes in file order (times non-decreasing).
    changes: BTreeMap<String, Vec<(u64, FourStateValue)>>,
    /// Every `#` timestamp seen, ascending.
    pub times: Vec<u64>,
    pub warnings: Vec<String>,
}

struct Tokens<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < bytes.len() && !bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some((start, &self.src[start..self.pos]))
    }

    /// Tokens up to the next `$end`.
    fn until_end(&mut self, opened_at: usize) -> Result<Vec<&'a str>, VcdError> {
        let mut out = Vec::new();
        loop {
            match self.next() {
                Some((_, "$end")) => return Ok(out),
                Some((_, t)) => out.push(t),
                None => {
                    return Err(VcdError {
                        offset: opened_at,
                        message: "unterminated section (missing $end)".into(),
                    })
                }
            }
        }
    }
}

fn err(offset: usize, message: impl Into<String>) -> VcdError {
    VcdError {
        offset,
        message: message.into(),
    }
}

/// Parse an IEEE 1364 value change dump (four-state subset).
pub fn parse_vcd(src: &str) -> Result<VcdDb, VcdError> {
    let mut db = VcdDb::default();
    let mut toks = Tokens { src, pos: 0 };
    let mut scopes: Vec<String> = Vec::new();
    let mut skipped: BTreeSet<String> = BTreeSet::new();
    let mut widths: BTreeMap<String, usize> = BTreeMap::new();
    let mut in_defs = true;
    let mut now: u64 = 0;

    while let Some((off, tok)) = toks.next() {
        if in_defs {
            match tok {
                "$timescale" => db.timescale = Some(toks.until_end(off)?.join(" ")),
                "$scope" => {
                    let body = toks.until_end(off)?;
                    let name = body.get(1).ok_or_else(|| err(off, "$scope without a name"))?;
                    scopes.push(name.to_string());
                }
                "$upscope" => {
                    toks.until_end(off)?;
                    scopes.pop();
                }
                "$var" => {
                    let body = toks.until_end(off)?;
                    if body.len() < 4 {
                        return Err(err(off, "$var needs type, size, id and name"));
                    }
                    let kind = body[0].to_string();
                    let width: usize = body[1]
                        .parse()
                        .map_err(|_| err(off, format!("bad $var size `{}`", body[1])))?;
                    let id = body[2].to_string();
                    let mut name = scopes.join(".");
                    if !name.is_empty() {
                        name.push('.');
                    }
                    name.push_str(body[3]);
                    if matches!(kind.as_str(), "real" | "realtime") {
                        db.warnings.push(format!("skipping real variable `{name}`"));
                        skipped.insert(id);
                        continue;
                    }
                    widths.insert(id.clone(), width.max(1));
                    db.changes.entry(id.clone()).or_default();
                    db.vars.push(VcdVar {
                        name,
                        id,
                        width: width.max(1),
                        kind,
                    });
                }
                "$enddefinitions" => {
                    toks.until_end(off)?;
                    in_defs = false;
                }
                t if t.starts_with('$') => {
                    toks.until_end(off)?;
                }
                t => return Err(err(off, format!("unexpected `{t}` in header"))),
            }
            continue;
        }

        let first = tok.as_bytes()[0];
        match first {
            b'#' => {
                let t: u64 = tok[1..]
                    .parse()
                    .map_err(|_| err(off, format!("bad timestamp `{tok}`")))?;
                if t < now {
                    return Err(err(off, format!("time goes backwards at `{tok}`")));
                }
                now = t;
                if db.times.last() != Some(&t) {
                    db.times.push(t);
                }
            }
            b'$' => match tok {
                "$comment" => {
                    toks.until_end(off)?;
                }
                // The keywords of the dump sections just bracket ordinary
                // value changes.
                "$dumpvars" | "$dumpall" | "$dumpon" | "$dumpoff" | "$end" => {}
                _ => return Err(err(off, format!("unexpected `{tok}`"))),
            },
            b'b' | b'B' | b'r' | b'R' => {
                let (id_off, id) = toks
                    .next()
                    .ok_or_else(|| err(off, "vector change without an identifier"))?;
                if skipped.contains(id) {
                    continue;
                }
                if first == b'r' || first == b'R' {
                    return Err(err(off, format!("real change for non-real variable `{id}`")));
                }
                let w = *widths
                    .get(id)
                    .ok_or_else(|| err(id_off, format!("unknown identifier `{id}`")))?;
                let v = FourStateValue::from_binary(&tok[1..], w)
                    .ok_or_else(|| err(off, format!("bad vector value `{tok}`")))?;
                db.changes.get_mut(id).unwrap().push((now, v));
            }
            _ => {
                let Some(l) = Logic::from_char(first as char) else {
                    return Err(err(off, format!("malformed value change `{tok}`")));
                };
                let id = &tok[1..];
                if id.is_empty() {
                    return Err(err(off, "scalar change without an identifier"));
                }
                if skipped.contains(id) {
                    continue;
                }
                let w = *widths
                    .get(id)
                    .ok_or_else(|| err(off + 1, format!("unknown identifier `{id}`")))?;
                db.changes
                    .get_mut(id)
                    .unwrap()
                    .push((now, FourStateValue::filled(w, l)));
            }
        }
    }
    if in_defs {
        return Err(err(src.len(), "missing $enddefinitions"));
    }
    Ok(db)
}

impl VcdDb {
    /// Resolve a signal by exact hierarchical name, else by leaf name at the
    /// shallowest scope (first declared wins among equals).
    pub fn find(&self, name: &str) -> Option<&VcdVar> {
        if let Some(v) = self.vars.iter().find(|v| v.name == name) {
            return Some(v);
        }
        let suffix = format!(".{name}");
        self.vars
            .iter()
            .filter(|v| v.name.ends_with(&suffix))
            .min_by_key(|v| v.name.matches('.').count())
    }

    fn series(&self, name: &str) -> Option<(&VcdVar, &[(u64, FourStateValue)])> {
        let v = self.find(name)?;
        Some((v, self.changes.get(&v.id).map(|c| c.as_slice()).unwrap_or(&[])))
    }

    /// Value at time `t`: the last change at or before `t`, all-x before
    /// the first change.
    pub fn value_at(&self, name: &str, t: u64) -> Option<FourStateValue> {
        let (var, ch) = self.series(name)?;
        let n = ch.partition_point(|(ct, _)| *ct <= t);
        Some(if n == 0 {
            FourStateValue::unknown(var.width)
        } else {
            ch[n - 1].1.clone()
        })
    }

    /// Value just before time `t` (ignores changes stamped exactly `t`).
    pub fn value_before(&self, name: &str, t: u64) -> Option<FourStateValue> {
        let (var, ch) = self.series(name)?;
        let n = ch.partition_point(|(ct, _)| *ct < t);
        Some(if n == 0 {
            FourStateValue::unknown(var.width)
        } else {
            ch[n - 1].1.clone()
        })
    }

    /// Changes of a signal, in time order.
    pub fn changes(&self, name: &str) -> Option<&[(u64, FourStateValue)]> {
        self.series(name).map(|(_, c)| c)
    }
}

/// Serialize a database back to VCD text. Each variable gets its own scope
/// chain, which is legal and keeps the writer simple.
pub fn render_vcd(db: &VcdDb) -> String {
    let mut out = String::new();
    if let Some(ts) = &db.timescale {
        out.push_str(&format!("$timescale {ts} $end\n"));
    }
    let mut ids = BTreeSet::new();
    for v in &db.vars {
        let mut parts: Vec<&str> = v.name.split('.').collect();
        let leaf = parts.pop().unwrap_or("");
        for s in &parts {
            out.push_str(&format!("$scope module {s} $end\n"));
        }
        out.push_str(&format!("$var {} {} {} {leaf} $end\n", v.kind, v.width, v.id));
        for _ in &parts {
            out.push_str("$upscope $end\n");
        }
        ids.insert(v.id.as_str());
    }
    out.push_str("$enddefinitions $end\n");

    // Merge per-id change lists into one time-ordered stream.
    let mut events: Vec<(u64, usize, &str, &FourStateValue)> = Vec::new();
    let mut seq = 0usize;
    for id in ids {
        for (t, v) in db.changes.get(id).into_iter().flatten() {
            events.push((*t, seq, id, v));
            seq += 1;
        }
    }
    events.sort_by_key(|e| (e.0, e.1));
    let mut times: BTreeSet<u64> = db.times.iter().copied().collect();
    times.extend(events.iter().map(|e| e.0));
    let mut ev = events.iter().peekable();
    for t in times {
        out.push_str(&format!("#{t}\n"));
        while let Some((et, _, id, v)) = ev.peek() {
            if *et != t {
                break;
            }
            if v.width() == 1 {
                out.push_str(&format!("{}{id}\n", v.to_binary()));
            } else {
                out.push_str(&format!("b{} {id}\n", v.to_binary()));
            }
            ev.next();
        }
    }
    out
}
