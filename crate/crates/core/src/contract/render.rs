use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde_json::Value;

use super::*;

/// JSON tree with caller-controlled key order.
enum Node {
    V(Value),
    O(Vec<(String, Node)>),
    A(Vec<Node>),
}

fn s(v: &str) -> Node {
    Node::V(Value::String(v.to_string()))
}

fn obj() -> Vec<(String, Node)> {
    Vec::new()
}

fn put(o: &mut Vec<(String, Node)>, k: &str, n: Node) {
    o.push((k.to_string(), n));
}

fn put_extra(o: &mut Vec<(String, Node)>, extra: &BTreeMap<String, Value>) {
    for (k, v) in extra {
        put(o, k, Node::V(v.clone()));
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).unwrap_or_default()
}

fn write(n: &Node, indent: usize, out: &mut String) {
    let pad = |out: &mut String, d: usize| {
        for _ in 0..d {
            out.push_str("  ");
        }
    };
    match n {
        Node::V(Value::Object(m)) => {
            let o = m.iter().map(|(k, v)| (k.clone(), Node::V(v.clone()))).collect();
            write(&Node::O(o), indent, out)
        }
        Node::V(Value::Array(a)) => {
            let a = a.iter().cloned().map(Node::V).collect();
            write(&Node::A(a), indent, out)
        }
        Node::V(v) => out.push_str(&v.to_string()),
        Node::O(o) if o.is_empty() => out.push_str("{}"),
        Node::A(a) if a.is_empty() => out.push_str("[]"),
        Node::O(o) => {
            out.push_str("{\n");
            for (i, (k, v)) in o.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&quote(k));
                out.push_str(": ");
                write(v, indent + 1, out);
                if i + 1 < o.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
        Node::A(a) => {
            out.push_str("[\n");
            for (i, v) in a.iter().enumerate() {
                pad(out, indent + 1);
                write(v, indent + 1, out);
                if i + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
    }
}

fn port(p: &Port) -> Node {
    let mut o = obj();
    put(&mut o, "name", s(&p.name));
    put(&mut o, "dir", s(p.dir.as_str()));
    if let Some(w) = p.width {
        put(&mut o, "width", Node::V(w.into()));
    }
    put(&mut o, "description", s(&p.description));
    put_extra(&mut o, &p.extra);
    Node::O(o)
}

fn clocking(k: &Clocking) -> Node {
    let mut o = obj();
    if let Some(c) = &k.clock {
        let mut co = obj();
        if let Some(n) = &c.name {
            put(&mut co, "name", s(n));
        }
        if let Some(e) = &c.edge {
            put(&mut co, "edge", s(e.as_str()));
        }
        put(&mut o, "clock", Node::O(co));
    }
    if let Some(r) = &k.reset {
        let mut ro = obj();
        if let Some(n) = &r.name {
            put(&mut ro, "name", s(n));
        }
        if let Some(a) = &r.active {
            put(&mut ro, "active", s(a.as_str()));
        }
        if let Some(kd) = &r.kind {
            put(&mut ro, "kind", s(kd.as_str()));
        }
        put(&mut o, "reset", Node::O(ro));
    }
    put_extra(&mut o, &k.extra);
    Node::O(o)
}

fn rule(r: &Rule) -> Node {
    let mut o = obj();
    if let Some(id) = &r.id {
        put(&mut o, "id", s(id));
    }
    if let Some(k) = &r.kind {
        put(&mut o, "kind", s(k.as_str()));
    }
    if let Some(e) = &r.expression {
        put(&mut o, "expression", s(e));
    }
    if let Some(outs) = &r.outputs {
        put(&mut o, "outputs", Node::A(outs.iter().map(|x| s(x)).collect()));
    }
    if let Some(v) = &r.reset_value {
        put(&mut o, "reset_value", s(v));
    }
    put_extra(&mut o, &r.extra);
    Node::O(o)
}

/// Deterministic pretty JSON with a fixed key order, so that equal contracts
/// render to identical bytes.
pub fn render_contract(c: &DesignContract) -> String {
    let mut top = obj();
    if let Some(n) = &c.module_name {
        put(&mut top, "module_name", s(n));
    }
    if let Some(io) = &c.io {
        put(&mut top, "io", Node::A(io.iter().map(port).collect()));
    }
    if let Some(k) = &c.clocking {
        put(&mut top, "clocking", clocking(k));
    }
    if let Some(t) = &c.timing {
        let mut outs = obj();
        for (name, lat) in t {
            let mut e = obj();
            if let Some(l) = lat {
                put(&mut e, "latency_cycles", Node::V((*l).into()));
            }
            put(&mut outs, name, Node::O(e));
        }
        put(&mut top, "timing", Node::O(vec![("outputs".to_string(), Node::O(outs))]));
    }
    if let Some(f) = &c.functional_summary {
        let mut o = obj();
        put(&mut o, "overview", s(&f.overview));
        put(&mut o, "rules", Node::A(f.rules.iter().map(rule).collect()));
        put_extra(&mut o, &f.extra);
        put(&mut top, "functional_summary", Node::O(o));
    }
    if let Some(ps) = &c.parameters {
        let items = ps
            .iter()
            .map(|p| {
                let mut o = obj();
                put(&mut o, "name", s(&p.name));
                if let Some(t) = &p.ty {
                    put(&mut o, "type", s(t));
                }
                if let Some(d) = &p.default {
                    put(&mut o, "default", Node::V(d.clone()));
                }
                Node::O(o)
            })
            .collect();
        put(&mut top, "parameters", Node::A(items));
    }
    if let Some(tp) = &c.test_plan {
        put(&mut top, "test_plan", Node::A(tp.iter().map(|x| s(x)).collect()));
    }
    put_extra(&mut top, &c.extensions);

    let mut out = String::new();
    write(&Node::O(top), 0, &mut out);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_order_and_roundtrip() {
        let raw = r#"{"zeta": 1, "timing": {"outputs": {"y": {"latency_cycles": 0}}},
            "io": [{"name": "a", "dir": "input", "width": 1, "description": "say \"hi\""},
                   {"name": "y", "dir": "output", "width": 1, "description": ""}],
            "module_name": "m", "clocking": {},
            "functional_summary": {"overview": "", "rules": []}}"#;
        let c = parse_contract(raw).unwrap();
        let text = render_contract(&c);
        let pos = |k: &str| text.find(&alloc::format!("\"{k}\"")).unwrap();
        assert!(pos("module_name") < pos("io"));
        assert!(pos("io") < pos("clocking"));
        assert!(pos("clocking") < pos("timing"));
        assert!(pos("functional_summary") < pos("zeta"));
        assert_eq!(parse_contract(&text).unwrap(), c);
        assert_eq!(render_contract(&parse_contract(&text).unwrap()), text);
    }
}
