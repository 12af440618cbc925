//! Semantic blocks, read/write sets, the driver map and bounded backward
//! slicing over it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::verilog::ast::*;
use crate::verilog::{parse, SyntaxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    AlwaysFf,
    AlwaysComb,
    AlwaysLatch,
    AlwaysGeneric,
    ContinuousAssign,
    ModuleInstance,
}

impl BlockKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlockKind::AlwaysFf => "always_ff",
            BlockKind::AlwaysComb => "always_comb",
            BlockKind::AlwaysLatch => "always_latch",
            BlockKind::AlwaysGeneric => "always_generic",
            BlockKind::ContinuousAssign => "continuous_assign",
            BlockKind::ModuleInstance => "module_instance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RtlBlock {
    pub id: usize,
    pub kind: BlockKind,
    /// 1-based inclusive line range.
    pub span: (usize, usize),
    /// The source lines of `span`, verbatim, without the final newline.
    pub text: String,
    pub reads: BTreeSet<String>,
    pub writes: BTreeSet<String>,
    /// Enclosing module.
    pub module: String,
    /// True when the block holds state: edge-triggered processes, latches
    /// and instances (whose internals are opaque).
    pub sequential: bool,
}

impl RtlBlock {
    /// A block with only the graph-relevant fields, for tests and tools that
    /// build graphs without source text.
    pub fn synthetic<R, W>(id: usize, reads: R, writes: W) -> Self
    where
        R: IntoIterator,
        R::Item: Into<String>,
        W: IntoIterator,
        W::Item: Into<String>,
    {
        RtlBlock {
            id,
            kind: BlockKind::ContinuousAssign,
            span: (id + 1, id + 1),
            text: String::new(),
            reads: reads.into_iter().map(Into::into).collect(),
            writes: writes.into_iter().map(Into::into).collect(),
            module: String::new(),
            sequential: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub blocks: Vec<RtlBlock>,
    pub driver_map: BTreeMap<String, BTreeSet<usize>>,
    /// `(from, to)`: `to` reads something `from` writes.
    pub edges: BTreeSet<(usize, usize)>,
}

impl DependencyGraph {
    pub fn drivers(&self, signal: &str) -> impl Iterator<Item = usize> + '_ {
        self.driver_map.get(signal).into_iter().flatten().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceWarning {
    /// No block drives any failing signal.
    EmptySlice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuspectSet {
    pub seed_signals: Vec<String>,
    /// Ordered by discovery depth, then id.
    pub block_ids: Vec<usize>,
    pub line_ranges: Vec<(usize, usize)>,
    pub depth_used: usize,
    pub warnings: Vec<SliceWarning>,
}

impl SuspectSet {
    pub fn contains(&self, id: usize) -> bool {
        self.block_ids.contains(&id)
    }

    pub fn is_empty(&self) -> bool {
        self.block_ids.is_empty()
    }

    /// Every block of `g`, used when the slice is empty and locality is
    /// relaxed.
    pub fn everything(g: &DependencyGraph, seeds: &[String]) -> Self {
        SuspectSet {
            seed_signals: seeds.to_vec(),
            block_ids: g.blocks.iter().map(|b| b.id).collect(),
            line_ranges: g.blocks.iter().map(|b| b.span).collect(),
            depth_used: 0,
            warnings: alloc::vec![SliceWarning::EmptySlice],
        }
    }
}

// ----- decomposition --------------------------------------------------------

/// Split a source file into blocks. Items that share a source line are
/// merged so that line spans never overlap.
pub fn decompose(source: &str) -> Result<Vec<RtlBlock>, SyntaxError> {
    let file = parse(source)?;
    Ok(decompose_parsed(source, &file))
}

pub fn decompose_parsed(source: &str, file: &SourceFile) -> Vec<RtlBlock> {
    let line_starts = line_starts(source);
    let mut raw: Vec<RtlBlock> = Vec::new();
    for m in &file.modules {
        let ctx = ModuleCtx::new(m, file);
        for it in &m.items {
            if let Some((kind, sequential)) = block_kind(it) {
                let (reads, writes) = extract_rw(it, &ctx);
                raw.push(RtlBlock {
                    id: 0,
                    kind,
                    span: (it.start_line, it.end_line),
                    text: String::new(),
                    reads,
                    writes,
                    module: m.name.clone(),
                    sequential,
                });
            }
        }
    }
    raw.sort_by_key(|b| b.span);
    let mut out: Vec<RtlBlock> = Vec::new();
    for b in raw {
        if let Some(last) = out.last_mut() {
            if b.span.0 <= last.span.1 {
                last.span.1 = last.span.1.max(b.span.1);
                last.reads.extend(b.reads);
                last.writes.extend(b.writes);
                last.sequential |= b.sequential;
                continue;
            }
        }
        out.push(b);
    }
    for (i, b) in out.iter_mut().enumerate() {
        b.id = i;
        b.text = line_text(source, &line_starts, b.span).to_string();
    }
    out
}

/// Byte offsets of the start of each line (index 0 = line 1).
pub fn line_starts(source: &str) -> Vec<usize> {
    let mut v = alloc::vec![0];
    for (i, b) in source.bytes().enumerate() {
        if b == b'\n' {
            v.push(i + 1);
        }
    }
    v
}

/// Byte range covering lines `span` without the trailing newline.
pub fn line_byte_range(source: &str, starts: &[usize], span: (usize, usize)) -> (usize, usize) {
    let s = starts.get(span.0.saturating_sub(1)).copied().unwrap_or(source.len());
    let e = starts
        .get(span.1)
        .map(|n| n - 1)
        .unwrap_or(source.len());
    (s, e.max(s))
}

fn line_text<'a>(source: &'a str, starts: &[usize], span: (usize, usize)) -> &'a str {
    let (s, e) = line_byte_range(source, starts, span);
    let t = &source[s..e];
    t.strip_suffix('\r').unwrap_or(t)
}

fn block_kind(it: &Item) -> Option<(BlockKind, bool)> {
    Some(match &it.kind {
        ItemKind::Always { kind, body } => match kind {
            AlwaysKind::AlwaysFf => (BlockKind::AlwaysFf, true),
            AlwaysKind::AlwaysComb => (BlockKind::AlwaysComb, false),
            AlwaysKind::AlwaysLatch => (BlockKind::AlwaysLatch, true),
            AlwaysKind::Always => (BlockKind::AlwaysGeneric, has_edge(body)),
        },
        ItemKind::ContinuousAssign(_) => (BlockKind::ContinuousAssign, false),
        ItemKind::Declaration { is_net: true, vars, .. } if vars.iter().any(|v| v.init.is_some()) => {
            (BlockKind::ContinuousAssign, false)
        }
        ItemKind::Instances { .. } | ItemKind::Generate(_) => (BlockKind::ModuleInstance, true),
        _ => return None,
    })
}

/// Whether a process is edge-triggered (or otherwise not purely
/// combinational, e.g. contains delays).
fn has_edge(body: &Stmt) -> bool {
    match body {
        Stmt::Timing(Some(EventControl::List(items)), _) => items.iter().any(|e| e.edge.is_some()),
        Stmt::Timing(Some(EventControl::Star), _) => false,
        _ => true,
    }
}

// ----- read/write extraction ------------------------------------------------

/// Names that are never signals inside one module plus definitions of
/// sibling modules for port-direction lookup.
pub struct ModuleCtx<'a> {
    constants: BTreeSet<String>,
    file: &'a SourceFile,
}

impl<'a> ModuleCtx<'a> {
    pub fn new(m: &Module, file: &'a SourceFile) -> Self {
        ModuleCtx {
            constants: m.param_names().into_iter().map(String::from).collect(),
            file,
        }
    }
}

/// Outputs of unknown modules are guessed from the connection's port name.
pub fn looks_like_output(port: &str) -> bool {
    let p = port.to_ascii_lowercase();
    const EXACT: &[&str] = &[
        "y", "q", "o", "z", "out", "dout", "sum", "cout", "result", "res", "qn", "q_n", "p",
        "product", "data_out", "rdata", "valid_o", "ready_o",
    ];
    EXACT.contains(&p.as_str())
        || p.starts_with("out")
        || p.starts_with("o_")
        || p.ends_with("_o")
        || p.ends_with("_out")
        || p.ends_with("_q")
}

#[derive(Default)]
struct Rw {
    reads: BTreeSet<String>,
    writes: BTreeSet<String>,
}

impl Rw {
    fn read_expr(&mut self, e: &Expr, ctx: &ModuleCtx<'_>) {
        match e {
            Expr::Ident(n) => {
                if !ctx.constants.contains(n) {
                    self.reads.insert(n.clone());
                }
            }
            Expr::Macro(_) | Expr::Number(_) | Expr::Str(_) | Expr::Scoped(..) => {}
            Expr::Unary(_, x) => self.read_expr(x, ctx),
            Expr::Binary(_, a, b) => {
                self.read_expr(a, ctx);
                self.read_expr(b, ctx);
            }
            Expr::Ternary(c, a, b) => {
                self.read_expr(c, ctx);
                self.read_expr(a, ctx);
                self.read_expr(b, ctx);
            }
            Expr::Concat(v) | Expr::Pattern(v) | Expr::Call(_, v) | Expr::SysCall(_, v) => {
                for x in v {
                    self.read_expr(x, ctx);
                }
            }
            Expr::Replicate(n, v) => {
                self.read_expr(n, ctx);
                for x in v {
                    self.read_expr(x, ctx);
                }
            }
            Expr::Index(b, i) => {
                self.read_expr(b, ctx);
                self.read_expr(i, ctx);
            }
            Expr::Range(b, m, l) => {
                self.read_expr(b, ctx);
                self.read_expr(m, ctx);
                self.read_expr(l, ctx);
            }
            Expr::PartSelect {
                base, start, width, ..
            } => {
                self.read_expr(base, ctx);
                self.read_expr(start, ctx);
                self.read_expr(width, ctx);
            }
            Expr::Member(b, _) => self.read_expr(b, ctx),
            Expr::Cast(_, x) => self.read_expr(x, ctx),
        }
    }

    /// L-value: base names are written, index expressions are read.
    fn write_expr(&mut self, e: &Expr, ctx: &ModuleCtx<'_>) {
        match e {
            Expr::Ident(n) => {
                self.writes.insert(n.clone());
            }
            Expr::Concat(v) | Expr::Pattern(v) => {
                for x in v {
                    self.write_expr(x, ctx);
                }
            }
            Expr::Index(b, i) => {
                self.write_expr(b, ctx);
                self.read_expr(i, ctx);
            }
            Expr::Range(b, m, l) => {
                self.write_expr(b, ctx);
                self.read_expr(m, ctx);
                self.read_expr(l, ctx);
            }
            Expr::PartSelect {
                base, start, width, ..
            } => {
                self.write_expr(base, ctx);
                self.read_expr(start, ctx);
                self.read_expr(width, ctx);
            }
            Expr::Member(b, _) => self.write_expr(b, ctx),
            // not an l-value; treat any identifiers as reads
            other => self.read_expr(other, ctx),
        }
    }

    fn stmt(&mut self, s: &Stmt, ctx: &ModuleCtx<'_>) {
        match s {
            Stmt::Null => {}
            Stmt::Block(v) => {
                for x in v {
                    self.stmt(x, ctx);
                }
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.read_expr(cond, ctx);
                self.stmt(then_branch, ctx);
                if let Some(e) = else_branch {
                    self.stmt(e, ctx);
                }
            }
            Stmt::Case {
                selector, items, ..
            } => {
                self.read_expr(selector, ctx);
                for it in items {
                    for l in &it.labels {
                        self.read_expr(l, ctx);
                    }
                    self.stmt(&it.body, ctx);
                }
            }
            Stmt::Assign { lhs, op, rhs } => {
                if matches!(op, AssignOp::Compound(_)) {
                    self.read_expr(lhs, ctx);
                }
                self.write_expr(lhs, ctx);
                self.read_expr(rhs, ctx);
            }
            Stmt::For {
                init,
                cond,
                step,
                body,
            } => {
                for x in init.iter().chain(step) {
                    self.stmt(x, ctx);
                }
                if let Some(c) = cond {
                    self.read_expr(c, ctx);
                }
                self.stmt(body, ctx);
            }
            Stmt::While(c, b) | Stmt::Repeat(c, b) => {
                self.read_expr(c, ctx);
                self.stmt(b, ctx);
            }
            Stmt::Forever(b) => self.stmt(b, ctx),
            Stmt::Timing(ev, b) => {
                match ev {
                    Some(EventControl::List(items)) => {
                        for it in items {
                            self.read_expr(&it.expr, ctx);
                        }
                    }
                    Some(EventControl::Named(n)) => {
                        self.reads.insert(n.clone());
                    }
                    _ => {}
                }
                self.stmt(b, ctx);
            }
            Stmt::Call(_, args) | Stmt::Other(args) => {
                for a in args {
                    self.read_expr(a, ctx);
                }
            }
            Stmt::Decl(vars) => {
                for v in vars {
                    if let Some(init) = &v.init {
                        self.writes.insert(v.name.clone());
                        self.read_expr(init, ctx);
                    }
                }
            }
        }
    }

    fn connect(&mut self, dir: Option<PortDirection>, e: &Expr, ctx: &ModuleCtx<'_>) {
        match dir {
            Some(PortDirection::Input) => self.read_expr(e, ctx),
            Some(PortDirection::Output) => self.write_expr(e, ctx),
            Some(PortDirection::Inout) => {
                self.read_expr(e, ctx);
                self.write_expr(e, ctx);
            }
            None => self.read_expr(e, ctx),
        }
    }

    fn item(&mut self, it: &Item, ctx: &ModuleCtx<'_>) {
        match &it.kind {
            ItemKind::Always { body, .. } => self.stmt(body, ctx),
            ItemKind::ContinuousAssign(pairs) => {
                for (l, r) in pairs {
                    self.write_expr(l, ctx);
                    self.read_expr(r, ctx);
                }
            }
            ItemKind::Declaration { vars, .. } => {
                for v in vars {
                    if let Some(init) = &v.init {
                        self.writes.insert(v.name.clone());
                        self.read_expr(init, ctx);
                    }
                }
            }
            ItemKind::Instances {
                module, instances, ..
            } => {
                let def = ctx.file.module(module);
                let gate = is_gate(module);
                for inst in instances {
                    for (pos, c) in inst.connections.iter().enumerate() {
                        match c {
                            Connection::Named(port, Some(e)) => {
                                let dir = match def {
                                    Some(d) => d.port(port).and_then(|p| p.dir),
                                    None if looks_like_output(port) => {
                                        // unknown module: read and write
                                        self.read_expr(e, ctx);
                                        Some(PortDirection::Output)
                                    }
                                    None => None,
                                };
                                self.connect(dir, e, ctx);
                            }
                            Connection::Named(_, None) => {}
                            Connection::Positional(e) => {
                                let dir = match def {
                                    Some(d) => d.ports.get(pos).and_then(|p| p.dir),
                                    None if gate && gate_output(module, pos, inst.connections.len()) => {
                                        Some(PortDirection::Output)
                                    }
                                    None => None,
                                };
                                self.connect(dir, e, ctx);
                            }
                            Connection::Wildcard => {
                                if let Some(d) = def {
                                    for p in &d.ports {
                                        self.connect(p.dir, &Expr::Ident(p.name.clone()), ctx);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            ItemKind::Generate(inner) => {
                for x in inner {
                    self.item(x, ctx);
                }
            }
            ItemKind::Param(_) | ItemKind::Initial(_) | ItemKind::Other(_) => {}
        }
    }
}

fn is_gate(m: &str) -> bool {
    matches!(
        m,
        "and" | "or" | "nand" | "nor" | "xor" | "xnor" | "not" | "buf" | "bufif0" | "bufif1"
            | "notif0" | "notif1"
    )
}

fn gate_output(m: &str, pos: usize, n: usize) -> bool {
    match m {
        // `not`/`buf` may drive several outputs from the last terminal
        "not" | "buf" => pos + 1 < n,
        _ => pos == 0,
    }
}

/// Read and write sets of one module item.
pub fn extract_rw(item: &Item, ctx: &ModuleCtx<'_>) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut rw = Rw::default();
    rw.item(item, ctx);
    (rw.reads, rw.writes)
}

/// Drop `names` (clock, reset) from every read set.
pub fn strip_reads(blocks: &mut [RtlBlock], names: &[&str]) {
    for b in blocks {
        for n in names {
            b.reads.remove(*n);
        }
    }
}

// ----- graph and slice ------------------------------------------------------

pub fn build_graph(blocks: Vec<RtlBlock>) -> DependencyGraph {
    let mut driver_map: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for b in &blocks {
        for w in &b.writes {
            driver_map.entry(w.clone()).or_default().insert(b.id);
        }
    }
    let mut edges = BTreeSet::new();
    for to in &blocks {
        for r in &to.reads {
            if let Some(ds) = driver_map.get(r) {
                for &from in ds {
                    edges.insert((from, to.id));
                }
            }
        }
    }
    DependencyGraph {
        blocks,
        driver_map,
        edges,
    }
}

/// Bounded backward closure over the driver map.
pub fn backward_slice(g: &DependencyGraph, fail: &[String], d_max: usize) -> SuspectSet {
    let mut depth_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut frontier: BTreeSet<usize> = BTreeSet::new();
    for y in fail {
        for d in g.drivers(y) {
            if depth_of.insert(d, 0).is_none() {
                frontier.insert(d);
            }
        }
    }
    for depth in 1..=d_max {
        let mut next = BTreeSet::new();
        for &b in &frontier {
            let Some(block) = g.blocks.get(b) else { continue };
            for r in &block.reads {
                for d in g.drivers(r) {
                    if !depth_of.contains_key(&d) {
                        next.insert(d);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        for &d in &next {
            depth_of.insert(d, depth);
        }
        frontier = next;
    }
    let mut ids: Vec<(usize, usize)> = depth_of.into_iter().map(|(id, d)| (d, id)).collect();
    ids.sort();
    let block_ids: Vec<usize> = ids.into_iter().map(|(_, id)| id).collect();
    let line_ranges = block_ids
        .iter()
        .filter_map(|id| g.blocks.get(*id).map(|b| b.span))
        .collect();
    let warnings = if block_ids.is_empty() {
        alloc::vec![SliceWarning::EmptySlice]
    } else {
        Vec::new()
    };
    SuspectSet {
        seed_signals: fail.to_vec(),
        block_ids,
        line_ranges,
        depth_used: d_max,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn set(v: &[&str]) -> BTreeSet<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_assign() {
        let b = decompose("module m(input a, b, output y);\nassign y = a & b;\nendmodule\n").unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].kind, BlockKind::ContinuousAssign);
        assert_eq!(b[0].reads, set(&["a", "b"]));
        assert_eq!(b[0].writes, set(&["y"]));
        assert_eq!(b[0].text, "assign y = a & b;");
        assert_eq!(b[0].span, (2, 2));
    }

    #[test]
    fn shift_block_reads_and_writes() {
        let src = "module top_module(input clk, input shift_ena, input count_ena, input data, output reg [3:0] q);
  always_ff @(posedge clk) begin
    if (shift_ena)
      q <= {data, q[3:1]};
    else if (count_ena)
      q <= q - 4'd1;
  end
endmodule
";
        let mut b = decompose(src).unwrap();
        assert_eq!(b[0].reads, set(&["clk", "shift_ena", "data", "q", "count_ena"]));
        strip_reads(&mut b, &["clk"]);
        assert_eq!(b[0].reads, set(&["shift_ena", "data", "q", "count_ena"]));
        assert_eq!(b[0].writes, set(&["q"]));
        assert_eq!(b[0].kind, BlockKind::AlwaysFf);
        assert_eq!(b[0].span, (2, 7));
    }

    #[test]
    fn case_selector_and_index_reads() {
        let src = "module m(input [1:0] sel, input [3:0] d, input [1:0] i, output reg y, output reg [3:0] z);
  always @(*) begin
    case (sel)
      2'd0: y = d[0];
      default: y = 1'b0;
    endcase
    z[i] = 1'b1;
  end
endmodule
";
        let b = decompose(src).unwrap();
        assert_eq!(b[0].reads, set(&["sel", "d", "i"]));
        assert_eq!(b[0].writes, set(&["y", "z"]));
        assert!(!b[0].sequential);
    }

    #[test]
    fn params_are_not_reads() {
        let src = "module m #(parameter W = 4)(input [W-1:0] a, output [W-1:0] y);
  localparam K = 2;
  assign y = a + K + W;
endmodule
";
        let b = decompose(src).unwrap();
        assert_eq!(b[0].reads, set(&["a"]));
    }

    #[test]
    fn instance_resolution() {
        let src = "module top(input a, input b, output y, output w);
  wire t;
  sub u0 (.i(a), .o(t));
  mystery u1 (.in(t), .en(b), .out(y));
  mystery u2 (t, w);
endmodule
module sub(input i, output o);
  assign o = ~i;
endmodule
";
        let b = decompose(src).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b[0].reads, set(&["a"]));
        assert_eq!(b[0].writes, set(&["t"]));
        // unknown module: everything read, output-named ports written
        assert_eq!(b[1].reads, set(&["t", "b", "y"]));
        assert_eq!(b[1].writes, set(&["y"]));
        assert_eq!(b[2].reads, set(&["t", "w"]));
        assert!(b[2].writes.is_empty());
        assert_eq!(b[3].module, "sub");
    }

    #[test]
    fn same_line_items_merge() {
        let src = "module m(input a, output x, output y);\nassign x = a; assign y = x;\nendmodule\n";
        let b = decompose(src).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].writes, set(&["x", "y"]));
    }

    #[test]
    fn declarations_are_not_blocks_but_net_init_is() {
        let src = "module m(input a, output y);\n  wire t;\n  wire u = ~a;\n  reg r;\n  assign y = u;\nendmodule\n";
        let b = decompose(src).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].writes, set(&["u"]));
    }

    #[test]
    fn edges_and_self_loops() {
        let g = build_graph(vec![
            RtlBlock::synthetic(0, ["a"], ["t"]),
            RtlBlock::synthetic(1, ["t", "c"], ["c"]),
            RtlBlock::synthetic(2, ["t"], ["c"]),
        ]);
        assert!(g.edges.contains(&(0, 1)));
        assert!(g.edges.contains(&(1, 1)));
        assert!(g.edges.contains(&(2, 1)));
        assert_eq!(g.driver_map["c"], [1, 2].into_iter().collect());
    }

    #[test]
    fn chain_slice() {
        let src = "module m(input a, output c);\n  wire b;\n  assign b = ~a;\n  assign c = b ^ a;\nendmodule\n";
        let g = build_graph(decompose(src).unwrap());
        let s1 = backward_slice(&g, &["c".into()], 1);
        assert_eq!(s1.block_ids, vec![1, 0]);
        assert_eq!(s1.line_ranges, vec![(4, 4), (3, 3)]);
        let s0 = backward_slice(&g, &["c".into()], 0);
        assert_eq!(s0.block_ids, vec![1]);
        let none = backward_slice(&g, &["nonexistent".into()], 3);
        assert!(none.block_ids.is_empty());
        assert_eq!(none.warnings, vec![SliceWarning::EmptySlice]);
    }
}
