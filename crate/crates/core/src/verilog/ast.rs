//! Syntax tree for the supported Verilog subset.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Plus,
    Neg,
    LogNot,
    BitNot,
    RedAnd,
    RedNand,
    RedOr,
    RedNor,
    RedXor,
    RedXnor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    And,
    Or,
    Xor,
    Xnor,
    LogAnd,
    LogOr,
    Eq,
    Ne,
    CaseEq,
    CaseNe,
    WildEq,
    WildNe,
    Lt,
    Le,
    Gt,
    Ge,
    Shl,
    Shr,
    AShl,
    AShr,
    Implies,
    Equiv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Ident(String),
    /// Text macro reference; never a signal.
    Macro(String),
    Number(String),
    Str(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Concat(Vec<Expr>),
    Replicate(Box<Expr>, Vec<Expr>),
    /// `'{...}` assignment pattern.
    Pattern(Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Range(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `base[start +: width]` (`up = true`) or `base[start -: width]`.
    PartSelect {
        base: Box<Expr>,
        start: Box<Expr>,
        width: Box<Expr>,
        up: bool,
    },
    /// `base.field`; only `base` is a signal.
    Member(Box<Expr>, String),
    /// `pkg::name`
    Scoped(String, String),
    /// User function call.
    Call(String, Vec<Expr>),
    /// `$signed(x)` and friends.
    SysCall(String, Vec<Expr>),
    /// `type'(expr)` / `N'(expr)`; the cast target is kept as an expression.
    Cast(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Base identifier of an l-value-like expression.
    pub fn base_name(&self) -> Option<&str> {
        match self {
            Expr::Ident(n) => Some(n),
            Expr::Index(b, _) | Expr::Range(b, _, _) | Expr::Member(b, _) => b.base_name(),
            Expr::PartSelect { base, .. } => base.base_name(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Blocking,
    NonBlocking,
    /// `+=`, `|=`, ... (also `++`/`--`)
    Compound(BinaryOp),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Pos,
    Neg,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventItem {
    pub edge: Option<Edge>,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventControl {
    /// `@*` / `@(*)`
    Star,
    List(Vec<EventItem>),
    /// `@name` without parentheses.
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    Case,
    Casez,
    Casex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseItem {
    /// Empty for `default`.
    pub labels: Vec<Expr>,
    pub body: Stmt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub range: Option<(Expr, Expr)>,
    pub signed: bool,
    /// Type keyword or user type name (`integer`, `logic`, `state_t`), if any.
    pub data_type: Option<String>,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Null,
    Block(Vec<Stmt>),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    Case {
        kind: CaseKind,
        selector: Expr,
        items: Vec<CaseItem>,
    },
    Assign {
        lhs: Expr,
        op: AssignOp,
        rhs: Expr,
    },
    For {
        init: Vec<Stmt>,
        cond: Option<Expr>,
        step: Vec<Stmt>,
        body: Box<Stmt>,
    },
    While(Expr, Box<Stmt>),
    Repeat(Expr, Box<Stmt>),
    Forever(Box<Stmt>),
    Timing(Option<EventControl>, Box<Stmt>),
    /// Task or function call used as a statement (`$display(...)`, `foo(x)`).
    Call(String, Vec<Expr>),
    /// Local variable declarations inside a procedural block.
    Decl(Vec<VarDecl>),
    /// Anything else we tolerate but do not model (`disable`, `return`, ...).
    Other(Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortDirection {
    Input,
    Output,
    Inout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortDecl {
    pub name: String,
    pub dir: Option<PortDirection>,
    pub range: Option<(Expr, Expr)>,
    pub signed: bool,
    /// Declared with a variable type (`reg`, `logic` in an output).
    pub is_var: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub default: Option<Expr>,
    pub local: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlwaysKind {
    Always,
    AlwaysFf,
    AlwaysComb,
    AlwaysLatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Connection {
    Named(String, Option<Expr>),
    Positional(Expr),
    /// `.*`
    Wildcard,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub connections: Vec<Connection>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItemKind {
    Always { kind: AlwaysKind, body: Stmt },
    /// One `assign` statement (possibly several comma-separated targets).
    ContinuousAssign(Vec<(Expr, Expr)>),
    Instances {
        module: String,
        params: Vec<Connection>,
        instances: Vec<Instance>,
    },
    /// `generate ... endgenerate` or a bare generate `for`/`if`/`case`.
    Generate(Vec<Item>),
    /// Signal declarations (`wire`, `reg`, `logic`, port redeclarations, ...).
    /// A net declaration with initializers acts as a continuous assignment.
    Declaration {
        dir: Option<PortDirection>,
        signed: bool,
        range: Option<(Expr, Expr)>,
        vars: Vec<VarDecl>,
        is_net: bool,
    },
    Param(Vec<ParamDecl>),
    Initial(Stmt),
    /// Functions, tasks, typedefs, genvars, assertions and anything else that
    /// neither drives nor declares signals we track.
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub kind: ItemKind,
    pub start_line: usize,
    pub end_line: usize,
    pub start_byte: usize,
    pub end_byte: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub name: String,
    pub params: Vec<ParamDecl>,
    pub ports: Vec<PortDecl>,
    pub items: Vec<Item>,
    pub start_line: usize,
    pub end_line: usize,
}

impl Module {
    pub fn port(&self, name: &str) -> Option<&PortDecl> {
        self.ports.iter().find(|p| p.name == name)
    }

    /// All parameter / localparam names, header and body.
    pub fn param_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.params.iter().map(|p| p.name.as_str()).collect();
        collect_body_params(&self.items, &mut out);
        out
    }

    pub fn param_decls(&self) -> Vec<&ParamDecl> {
        let mut out: Vec<&ParamDecl> = self.params.iter().collect();
        fn walk<'a>(items: &'a [Item], out: &mut Vec<&'a ParamDecl>) {
            for it in items {
                match &it.kind {
                    ItemKind::Param(ps) => out.extend(ps.iter()),
                    ItemKind::Generate(inner) => walk(inner, out),
                    _ => {}
                }
            }
        }
        walk(&self.items, &mut out);
        out
    }
}

fn collect_body_params<'a>(items: &'a [Item], out: &mut Vec<&'a str>) {
    for it in items {
        match &it.kind {
            ItemKind::Param(ps) => out.extend(ps.iter().map(|p| p.name.as_str())),
            ItemKind::Generate(inner) => collect_body_params(inner, out),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceFile {
    pub modules: Vec<Module>,
}

impl SourceFile {
    pub fn module(&self, name: &str) -> Option<&Module> {
        self.modules.iter().find(|m| m.name == name)
    }
}
