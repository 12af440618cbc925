//! Two-state evaluator for constant expressions and small combinational
//! modules (vectors up to 128 bits).
//!
//! This is not a simulator. It exists to resolve parametric widths and to
//! serve as a brute-force equivalence oracle for desk-scale designs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;

pub const MAX_WIDTH: u32 = 128;

/// Passes over the combinational processes before giving up on settling.
const MAX_PASSES: usize = 64;
/// Loop iteration cap inside one procedural body.
const MAX_LOOP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("width {0} exceeds the evaluator limit")]
    TooWide(u32),
    #[error("bad literal `{0}`")]
    BadLiteral(String),
    #[error("division by zero")]
    DivByZero,
    #[error("combinational logic did not settle (loop?)")]
    NoFixedPoint,
    #[error("loop bound exceeded")]
    LoopBound,
}

/// A sized two-state value. `bits` is always masked to `width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value {
    pub bits: u128,
    pub width: u32,
    pub signed: bool,
}

pub fn mask(width: u32) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

impl Value {
    pub fn new(bits: u128, width: u32, signed: bool) -> Self {
        let width = width.clamp(1, MAX_WIDTH);
        Value {
            bits: bits & mask(width),
            width,
            signed,
        }
    }

    pub fn unsigned(bits: u128, width: u32) -> Self {
        Self::new(bits, width, false)
    }

    /// Numeric value honoring signedness.
    pub fn as_i128(&self) -> i128 {
        if self.signed && self.width < 128 && (self.bits >> (self.width - 1)) & 1 == 1 {
            (self.bits | !mask(self.width)) as i128
        } else {
            self.bits as i128
        }
    }

    pub fn is_true(&self) -> bool {
        self.bits != 0
    }

    /// Resize to `width`, sign-extending when `sign_extend` and the value is
    /// negative.
    pub fn resize(&self, width: u32, sign_extend: bool) -> Value {
        let width = width.clamp(1, MAX_WIDTH);
        let bits = if sign_extend && self.signed {
            self.as_i128() as u128
        } else {
            self.bits
        };
        Value::new(bits, width, self.signed)
    }
}

/// A parsed numeric literal, with x/z bits separated out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub bits: u128,
    /// Bits written as `x`, `z` or `?`.
    pub xz: u128,
    /// Bits written as `z` or `?` (a subset of `xz`).
    pub z: u128,
    pub width: u32,
    pub signed: bool,
    pub sized: bool,
    /// `'0`, `'1`, `'x`, `'z`: fill to context width.
    pub fill: Option<char>,
}

pub fn parse_literal(text: &str) -> Result<Literal, EvalError> {
    let bad = || EvalError::BadLiteral(text.to_string());
    let clean: String = text.chars().filter(|c| *c != '_' && !c.is_whitespace()).collect();
    if let Some(rest) = clean.strip_prefix('\'') {
        if rest.len() == 1 {
            let c = rest.chars().next().unwrap().to_ascii_lowercase();
            if matches!(c, '0' | '1' | 'x' | 'z') {
                return Ok(Literal {
                    bits: 0,
                    xz: 0,
                    z: 0,
                    width: 1,
                    signed: false,
                    sized: false,
                    fill: Some(c),
                });
            }
        }
    }
    let Some(tick) = clean.find('\'') else {
        if clean.contains('.') || clean.contains('e') || clean.contains('E') {
            return Err(EvalError::Unsupported(format!("real literal `{text}`")));
        }
        let v: u128 = clean.parse().map_err(|_| bad())?;
        return Ok(Literal {
            bits: v & mask(32),
            xz: 0,
            z: 0,
            width: 32,
            signed: true,
            sized: false,
            fill: None,
        });
    };
    let (size, rest) = clean.split_at(tick);
    let mut rest = &rest[1..];
    let mut signed = false;
    if rest.starts_with('s') || rest.starts_with('S') {
        signed = true;
        rest = &rest[1..];
    }
    let mut chars = rest.chars();
    let base_ch = chars.next().ok_or_else(bad)?.to_ascii_lowercase();
    let digits = chars.as_str();
    let (sized, width) = if size.is_empty() {
        (false, 32u32)
    } else {
        let w: u32 = size.parse().map_err(|_| bad())?;
        if w == 0 {
            return Err(bad());
        }
        (true, w)
    };
    if width > MAX_WIDTH {
        return Err(EvalError::TooWide(width));
    }
    let (mut bits, mut xz, mut z) = (0u128, 0u128, 0u128);
    if base_ch == 'd' {
        if digits.chars().all(|c| matches!(c, 'x' | 'X' | 'z' | 'Z' | '?')) && !digits.is_empty() {
            let zlike = !digits.starts_with(['x', 'X']);
            return Ok(Literal {
                bits: 0,
                xz: mask(width),
                z: if zlike { mask(width) } else { 0 },
                width,
                signed,
                sized,
                fill: None,
            });
        }
        bits = digits.parse::<u128>().map_err(|_| bad())?;
    } else {
        let per = match base_ch {
            'b' => 1,
            'o' => 3,
            'h' => 4,
            _ => return Err(bad()),
        };
        if digits.is_empty() {
            return Err(bad());
        }
        let mut first_xz: Option<(bool, bool)> = None;
        for (i, c) in digits.chars().enumerate() {
            let digit_mask = mask(per);
            bits = bits.checked_shl(per).unwrap_or(0);
            xz = xz.checked_shl(per).unwrap_or(0);
            z = z.checked_shl(per).unwrap_or(0);
            match c.to_ascii_lowercase() {
                'x' => {
                    xz |= digit_mask;
                    if i == 0 {
                        first_xz = Some((true, false));
                    }
                }
                'z' | '?' => {
                    xz |= digit_mask;
                    z |= digit_mask;
                    if i == 0 {
                        first_xz = Some((true, true));
                    }
                }
                d => {
                    let v = d.to_digit(1 << per).ok_or_else(bad)? as u128;
                    bits |= v;
                }
            }
        }
        // A leading x/z extends through the unspecified upper bits.
        let given = per * digits.chars().count() as u32;
        if let Some((_, is_z)) = first_xz {
            if given < width {
                let ext = mask(width) & !mask(given);
                xz |= ext;
                if is_z {
                    z |= ext;
                }
            }
        }
    }
    Ok(Literal {
        bits: bits & mask(width),
        xz: xz & mask(width),
        z: z & mask(width),
        width,
        signed,
        sized,
        fill: None,
    })
}

/// Signal declarations visible to the evaluator: name → (width, signed).
pub type Widths = BTreeMap<String, (u32, bool)>;

/// Evaluation environment.
pub trait Env {
    fn get(&self, name: &str) -> Option<Value>;
    fn width_of(&self, name: &str) -> Option<(u32, bool)>;
}

impl Env for BTreeMap<String, Value> {
    fn get(&self, name: &str) -> Option<Value> {
        BTreeMap::get(self, name).copied()
    }
    fn width_of(&self, name: &str) -> Option<(u32, bool)> {
        BTreeMap::get(self, name).map(|v| (v.width, v.signed))
    }
}

/// Evaluate a constant expression against known parameter values.
pub fn eval_const(e: &Expr, params: &BTreeMap<String, Value>) -> Result<Value, EvalError> {
    eval(e, params)
}

/// Evaluate `e` in its self-determined size.
pub fn eval(e: &Expr, env: &dyn Env) -> Result<Value, EvalError> {
    let (w, s) = size(e, env)?;
    eval_ctx(e, env, w, s)
}

/// Evaluate `rhs` for assignment into a target of `target_width` bits.
pub fn eval_assign(rhs: &Expr, env: &dyn Env, target_width: u32) -> Result<Value, EvalError> {
    let (w, s) = size(rhs, env)?;
    let v = eval_ctx(rhs, env, w.max(target_width), s)?;
    Ok(Value::new(v.bits, target_width, false))
}

/// Width of `[msb:lsb]` after constant evaluation.
pub fn range_width(
    range: &(Expr, Expr),
    params: &BTreeMap<String, Value>,
) -> Result<u32, EvalError> {
    let msb = eval_const(&range.0, params)?.as_i128();
    let lsb = eval_const(&range.1, params)?.as_i128();
    let w = (msb - lsb).unsigned_abs() + 1;
    u32::try_from(w).map_err(|_| EvalError::TooWide(u32::MAX))
}

fn const_int(e: &Expr, env: &dyn Env) -> Result<i128, EvalError> {
    Ok(eval(e, env)?.as_i128())
}

/// Self-determined (width, signed) of an expression.
pub fn size(e: &Expr, env: &dyn Env) -> Result<(u32, bool), EvalError> {
    Ok(match e {
        Expr::Ident(n) => env
            .width_of(n)
            .ok_or_else(|| EvalError::UnknownSignal(n.clone()))?,
        Expr::Number(t) => {
            let l = parse_literal(t)?;
            (l.width, l.signed)
        }
        Expr::Unary(op, x) => match op {
            UnaryOp::Plus | UnaryOp::Neg | UnaryOp::BitNot => size(x, env)?,
            _ => (1, false),
        },
        Expr::Binary(op, l, r) => {
            let (lw, ls) = size(l, env)?;
            let (rw, rs) = size(r, env)?;
            match op {
                BinaryOp::Add
                | BinaryOp::Sub
                | BinaryOp::Mul
                | BinaryOp::Div
                | BinaryOp::Mod
                | BinaryOp::And
                | BinaryOp::Or
                | BinaryOp::Xor
                | BinaryOp::Xnor => (lw.max(rw), ls && rs),
                BinaryOp::Shl | BinaryOp::Shr | BinaryOp::AShl | BinaryOp::AShr | BinaryOp::Pow => {
                    (lw, ls)
                }
                _ => (1, false),
            }
        }
        Expr::Ternary(_, a, b) => {
            let (aw, as_) = size(a, env)?;
            let (bw, bs) = size(b, env)?;
            (aw.max(bw), as_ && bs)
        }
        Expr::Concat(parts) => {
            let mut w = 0u32;
            for p in parts {
                w = w.saturating_add(size(p, env)?.0);
            }
            (w, false)
        }
        Expr::Replicate(n, parts) => {
            let n = const_int(n, env)?.max(0) as u32;
            let mut w = 0u32;
            for p in parts {
                w = w.saturating_add(size(p, env)?.0);
            }
            (w.saturating_mul(n).max(1), false)
        }
        Expr::Index(_, _) => (1, false),
        Expr::Range(_, msb, lsb) => {
            let w = (const_int(msb, env)? - const_int(lsb, env)?).unsigned_abs() + 1;
            (u32::try_from(w).map_err(|_| EvalError::TooWide(u32::MAX))?, false)
        }
        Expr::PartSelect { width, .. } => (const_int(width, env)?.max(1) as u32, false),
        Expr::SysCall(name, args) => match (name.as_str(), args.as_slice()) {
            ("$signed", [x]) => (size(x, env)?.0, true),
            ("$unsigned", [x]) => (size(x, env)?.0, false),
            ("$clog2", [_]) | ("$bits", [_]) => (32, true),
            _ => return Err(EvalError::Unsupported(format!("system function {name}"))),
        },
        Expr::Cast(ty, x) => match &**ty {
            Expr::Number(_) => (const_int(ty, env)?.max(1) as u32, size(x, env)?.1),
            Expr::Ident(t) if t == "signed" => (size(x, env)?.0, true),
            Expr::Ident(t) if t == "unsigned" => (size(x, env)?.0, false),
            _ => return Err(EvalError::Unsupported("type cast".into())),
        },
        Expr::Macro(m) => return Err(EvalError::Unsupported(format!("macro `{m}"))),
        Expr::Str(_) => return Err(EvalError::Unsupported("string".into())),
        Expr::Pattern(_) => return Err(EvalError::Unsupported("assignment pattern".into())),
        Expr::Member(..) | Expr::Scoped(..) => {
            return Err(EvalError::Unsupported("hierarchical or scoped name".into()))
        }
        Expr::Call(name, _) => return Err(EvalError::Unsupported(format!("function call {name}"))),
    })
}

fn check_width(w: u32) -> Result<u32, EvalError> {
    if w > MAX_WIDTH {
        Err(EvalError::TooWide(w))
    } else {
        Ok(w.max(1))
    }
}

/// Evaluate in a context of width `w`; `s` says whether the context is signed.
fn eval_ctx(e: &Expr, env: &dyn Env, w: u32, s: bool) -> Result<Value, EvalError> {
    let w = check_width(w)?;
    let ext = |v: Value| Value::new(if s { v.as_i128() as u128 } else { v.bits }, w, s);
    Ok(match e {
        Expr::Ident(n) => {
            let v = env.get(n).ok_or_else(|| EvalError::UnknownSignal(n.clone()))?;
            ext(v)
        }
        Expr::Number(t) => {
            let l = parse_literal(t)?;
            if let Some(c) = l.fill {
                Value::new(if c == '1' { u128::MAX } else { 0 }, w, s)
            } else {
                ext(Value::new(l.bits & !l.xz, l.width, l.signed))
            }
        }
        Expr::Unary(op, x) => match op {
            UnaryOp::Plus => eval_ctx(x, env, w, s)?,
            UnaryOp::Neg => {
                let v = eval_ctx(x, env, w, s)?;
                Value::new(v.bits.wrapping_neg(), w, s)
            }
            UnaryOp::BitNot => {
                let v = eval_ctx(x, env, w, s)?;
                Value::new(!v.bits, w, s)
            }
            _ => {
                let v = eval(x, env)?;
                let m = mask(v.width);
                let r = match op {
                    UnaryOp::LogNot => v.bits == 0,
                    UnaryOp::RedAnd => v.bits == m,
                    UnaryOp::RedNand => v.bits != m,
                    UnaryOp::RedOr => v.bits != 0,
                    UnaryOp::RedNor => v.bits == 0,
                    UnaryOp::RedXor => v.bits.count_ones() % 2 == 1,
                    UnaryOp::RedXnor => v.bits.count_ones() % 2 == 0,
                    _ => unreachable!(),
                };
                Value::new(r as u128, w, s)
            }
        },
        Expr::Binary(op, l, r) => eval_binary(*op, l, r, env, w, s)?,
        Expr::Ternary(c, a, b) => {
            if eval(c, env)?.is_true() {
                eval_ctx(a, env, w, s)?
            } else {
                eval_ctx(b, env, w, s)?
            }
        }
        Expr::Concat(parts) => ext(concat(parts, env)?),
        Expr::Replicate(n, parts) => {
            let n = const_int(n, env)?;
            if n <= 0 {
                return Err(EvalError::Unsupported("zero replication".into()));
            }
            let one = concat(parts, env)?;
            let total = check_width(one.width.saturating_mul(n as u32))?;
            let mut bits = 0u128;
            for _ in 0..n {
                bits = (bits << one.width.min(127)) | one.bits;
                if one.width >= 128 {
                    bits = one.bits;
                }
            }
            ext(Value::unsigned(bits, total))
        }
        Expr::Index(base, idx) => {
            let b = eval(base, env)?;
            let i = const_int(idx, env)?;
            let off = select_offset(base, env, i)?;
            let bit = if off < b.width { (b.bits >> off) & 1 } else { 0 };
            ext(Value::unsigned(bit, 1))
        }
        Expr::Range(base, msb, lsb) => {
            let b = eval(base, env)?;
            let (m, l) = (const_int(msb, env)?, const_int(lsb, env)?);
            let width = (m - l).unsigned_abs() as u32 + 1;
            let lo = select_offset(base, env, m)?.min(select_offset(base, env, l)?);
            ext(slice(b, lo, width))
        }
        Expr::PartSelect {
            base,
            start,
            width,
            up,
        } => {
            let b = eval(base, env)?;
            let st = const_int(start, env)?;
            let wd = const_int(width, env)?.max(1);
            let (hi, lo) = if *up { (st + wd - 1, st) } else { (st, st - wd + 1) };
            let o = select_offset(base, env, hi)?.min(select_offset(base, env, lo)?);
            ext(slice(b, o, wd as u32))
        }
        Expr::SysCall(name, args) => match (name.as_str(), args.as_slice()) {
            ("$signed", [x]) => {
                let v = eval(x, env)?;
                ext(Value::new(v.bits, v.width, true))
            }
            ("$unsigned", [x]) => {
                let v = eval(x, env)?;
                ext(Value::new(v.bits, v.width, false))
            }
            ("$clog2", [x]) => {
                let v = eval(x, env)?.bits;
                let r = if v <= 1 { 0 } else { 128 - (v - 1).leading_zeros() };
                ext(Value::new(r as u128, 32, true))
            }
            ("$bits", [x]) => ext(Value::new(size(x, env)?.0 as u128, 32, true)),
            _ => return Err(EvalError::Unsupported(format!("system function {name}"))),
        },
        Expr::Cast(ty, x) => {
            let (cw, cs) = size(e, env)?;
            let _ = ty;
            let v = eval(x, env)?;
            ext(Value::new(v.resize(cw, v.signed).bits, cw, cs))
        }
        other => {
            size(other, env)?;
            return Err(EvalError::Unsupported("expression".into()));
        }
    })
}

fn slice(v: Value, lo: u32, width: u32) -> Value {
    let bits = if lo >= 128 { 0 } else { v.bits >> lo };
    Value::unsigned(bits, width)
}

/// Map a declared index to a bit offset. Declarations are assumed to be
/// `[msb:lsb]` with lsb = 0 unless the environment says otherwise, which is
/// true of every port and net the evaluator builds widths for.
fn select_offset(_base: &Expr, _env: &dyn Env, idx: i128) -> Result<u32, EvalError> {
    if idx < 0 {
        return Ok(u32::MAX);
    }
    Ok(u32::try_from(idx).unwrap_or(u32::MAX))
}

fn concat(parts: &[Expr], env: &dyn Env) -> Result<Value, EvalError> {
    let mut bits = 0u128;
    let mut width = 0u32;
    for p in parts {
        let v = eval(p, env)?;
        width = check_width(width + v.width)?;
        bits = if v.width >= 128 { v.bits } else { (bits << v.width) | v.bits };
    }
    Ok(Value::unsigned(bits, width))
}

fn eval_binary(
    op: BinaryOp,
    l: &Expr,
    r: &Expr,
    env: &dyn Env,
    w: u32,
    s: bool,
) -> Result<Value, EvalError> {
    use BinaryOp::*;
    let out = |b: bool| Value::new(b as u128, w, s);
    match op {
        Add | Sub | Mul | Div | Mod | And | Or | Xor | Xnor => {
            let a = eval_ctx(l, env, w, s)?;
            let b = eval_ctx(r, env, w, s)?;
            let bits = match op {
                Add => a.bits.wrapping_add(b.bits),
                Sub => a.bits.wrapping_sub(b.bits),
                Mul => a.bits.wrapping_mul(b.bits),
                Div | Mod => {
                    if b.bits == 0 {
                        return Err(EvalError::DivByZero);
                    }
                    if s {
                        let (x, y) = (a.as_i128(), b.as_i128());
                        (if op == Div { x.wrapping_div(y) } else { x.wrapping_rem(y) }) as u128
                    } else if op == Div {
                        a.bits / b.bits
                    } else {
                        a.bits % b.bits
                    }
                }
                And => a.bits & b.bits,
                Or => a.bits | b.bits,
                Xor => a.bits ^ b.bits,
                _ => !(a.bits ^ b.bits),
            };
            Ok(Value::new(bits, w, s))
        }
        Shl | Shr | AShl | AShr => {
            let a = eval_ctx(l, env, w, s)?;
            let n = eval(r, env)?.bits;
            let n = if n >= w as u128 { w } else { n as u32 };
            let bits = match op {
                Shl | AShl => a.bits.checked_shl(n).unwrap_or(0),
                Shr => a.bits.checked_shr(n).unwrap_or(0),
                _ => {
                    if s {
                        (a.as_i128() >> n.min(127)) as u128
                    } else {
                        a.bits.checked_shr(n).unwrap_or(0)
                    }
                }
            };
            Ok(Value::new(bits, w, s))
        }
        Pow => {
            let a = eval_ctx(l, env, w, s)?;
            let b = eval(r, env)?;
            let mut acc = 1u128;
            let e = b.as_i128();
            if e < 0 {
                return Err(EvalError::Unsupported("negative exponent".into()));
            }
            for _ in 0..e.min(256) {
                acc = acc.wrapping_mul(a.bits);
            }
            Ok(Value::new(acc, w, s))
        }
        LogAnd => Ok(out(eval(l, env)?.is_true() && eval(r, env)?.is_true())),
        LogOr => Ok(out(eval(l, env)?.is_true() || eval(r, env)?.is_true())),
        Implies => Ok(out(!eval(l, env)?.is_true() || eval(r, env)?.is_true())),
        Equiv => Ok(out(eval(l, env)?.is_true() == eval(r, env)?.is_true())),
        Eq | Ne | CaseEq | CaseNe | WildEq | WildNe | Lt | Le | Gt | Ge => {
            let (lw, ls) = size(l, env)?;
            let (rw, rs) = size(r, env)?;
            let cw = lw.max(rw);
            let cs = ls && rs;
            let a = eval_ctx(l, env, cw, cs)?;
            let b = eval_ctx(r, env, cw, cs)?;
            let ord = if cs {
                a.as_i128().cmp(&b.as_i128())
            } else {
                a.bits.cmp(&b.bits)
            };
            let res = match op {
                Eq | CaseEq | WildEq => ord.is_eq(),
                Ne | CaseNe | WildNe => !ord.is_eq(),
                Lt => ord.is_lt(),
                Le => ord.is_le(),
                Gt => ord.is_gt(),
                _ => ord.is_ge(),
            };
            Ok(out(res))
        }
    }
}

// ----- combinational module model -----------------------------------------

/// A module flattened into combinational processes that can be evaluated
/// for a given input assignment.
#[derive(Debug, Clone)]
pub struct CombModel {
    pub name: String,
    pub inputs: Vec<(String, u32)>,
    pub outputs: Vec<(String, u32)>,
    widths: Widths,
    params: BTreeMap<String, Value>,
    procs: Vec<Stmt>,
}

struct Scope<'a> {
    vals: &'a BTreeMap<String, Value>,
    params: &'a BTreeMap<String, Value>,
    widths: &'a Widths,
    locals: &'a BTreeMap<String, Value>,
}

impl Env for Scope<'_> {
    fn get(&self, name: &str) -> Option<Value> {
        self.locals
            .get(name)
            .or_else(|| self.vals.get(name))
            .or_else(|| self.params.get(name))
            .copied()
            .or_else(|| {
                self.widths
                    .get(name)
                    .map(|(w, s)| Value::new(0, *w, *s))
            })
    }
    fn width_of(&self, name: &str) -> Option<(u32, bool)> {
        if let Some(v) = self.locals.get(name) {
            return Some((v.width, v.signed));
        }
        if let Some(ws) = self.widths.get(name) {
            return Some(*ws);
        }
        self.params.get(name).map(|v| (v.width, v.signed))
    }
}

/// Resolve parameter values for a module (defaults only).
pub fn module_params(module: &Module) -> Result<BTreeMap<String, Value>, EvalError> {
    let mut params: BTreeMap<String, Value> = BTreeMap::new();
    for p in module.param_decls() {
        let v = match &p.default {
            Some(e) => eval_const(e, &params)?,
            None => Value::new(0, 32, true),
        };
        params.insert(p.name.clone(), v);
    }
    Ok(params)
}

fn type_width(data_type: Option<&str>) -> Option<(u32, bool)> {
    Some(match data_type? {
        "integer" | "int" => (32, true),
        "byte" => (8, true),
        "shortint" => (16, true),
        "longint" => (64, true),
        "time" => (64, false),
        "reg" | "logic" | "bit" | "wire" => return None,
        // enums and user types: no width information kept
        _ => (32, false),
    })
}

fn decl_width(
    range: &Option<(Expr, Expr)>,
    signed: bool,
    data_type: Option<&str>,
    params: &BTreeMap<String, Value>,
) -> Result<(u32, bool), EvalError> {
    match range {
        Some(r) => Ok((check_width(range_width(r, params)?)?, signed)),
        None => Ok(type_width(data_type)
            .map(|(w, s)| (w, s || signed))
            .unwrap_or((1, signed))),
    }
}

impl CombModel {
    /// Build the model. Fails for anything with clocked processes, instances,
    /// memories or constructs outside the evaluator subset.
    pub fn new(module: &Module) -> Result<Self, EvalError> {
        let params = module_params(module)?;
        let mut widths = Widths::new();
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for p in &module.ports {
            let (w, s) = decl_width(&p.range, p.signed, None, &params)?;
            widths.insert(p.name.clone(), (w, s));
            match p.dir {
                Some(PortDirection::Input) => inputs.push((p.name.clone(), w)),
                Some(PortDirection::Output) => outputs.push((p.name.clone(), w)),
                _ => return Err(EvalError::Unsupported(format!("port `{}`", p.name))),
            }
        }
        let mut procs = Vec::new();
        collect(&module.items, &params, &mut widths, &mut procs)?;
        // port widths may have been refined by body declarations
        for (n, w) in inputs.iter_mut().chain(outputs.iter_mut()) {
            *w = widths[n.as_str()].0;
        }
        Ok(CombModel {
            name: module.name.clone(),
            inputs,
            outputs,
            widths,
            params,
            procs,
        })
    }

    /// Evaluate every output for one input assignment (missing inputs are 0).
    pub fn eval(&self, inputs: &BTreeMap<String, u128>) -> Result<BTreeMap<String, Value>, EvalError> {
        let mut vals: BTreeMap<String, Value> = BTreeMap::new();
        for (name, (w, s)) in &self.widths {
            let bits = inputs.get(name).copied().unwrap_or(0);
            vals.insert(name.clone(), Value::new(bits, *w, *s));
        }
        let is_input: Vec<&str> = self.inputs.iter().map(|(n, _)| n.as_str()).collect();
        let mut settled = false;
        for _ in 0..MAX_PASSES {
            let before = vals.clone();
            for p in &self.procs {
                let mut locals = BTreeMap::new();
                exec(p, &mut vals, &self.params, &self.widths, &mut locals, &is_input)?;
            }
            if vals == before {
                settled = true;
                break;
            }
        }
        if !settled {
            return Err(EvalError::NoFixedPoint);
        }
        Ok(self
            .outputs
            .iter()
            .map(|(n, _)| (n.clone(), vals[n.as_str()]))
            .collect())
    }

    /// Value-level lookup of a width (inputs, outputs or internal nets).
    pub fn width(&self, name: &str) -> Option<u32> {
        self.widths.get(name).map(|w| w.0)
    }
}

fn collect(
    items: &[Item],
    params: &BTreeMap<String, Value>,
    widths: &mut Widths,
    procs: &mut Vec<Stmt>,
) -> Result<(), EvalError> {
    for it in items {
        match &it.kind {
            ItemKind::Declaration {
                range,
                signed,
                vars,
                is_net,
                ..
            } => {
                for v in vars {
                    let ws = decl_width(range, *signed, v.data_type.as_deref(), params)?;
                    widths.insert(v.name.clone(), ws);
                    if let Some(init) = &v.init {
                        if *is_net {
                            procs.push(Stmt::Assign {
                                lhs: Expr::Ident(v.name.clone()),
                                op: AssignOp::Blocking,
                                rhs: init.clone(),
                            });
                        } else {
                            return Err(EvalError::Unsupported("variable initializer".into()));
                        }
                    }
                }
            }
            ItemKind::ContinuousAssign(pairs) => {
                for (l, r) in pairs {
                    procs.push(Stmt::Assign {
                        lhs: l.clone(),
                        op: AssignOp::Blocking,
                        rhs: r.clone(),
                    });
                }
            }
            ItemKind::Always { kind, body } => match kind {
                AlwaysKind::AlwaysComb => procs.push(body.clone()),
                AlwaysKind::Always => match body {
                    Stmt::Timing(Some(EventControl::Star), inner) => procs.push((**inner).clone()),
                    Stmt::Timing(Some(EventControl::List(evs)), inner)
                        if evs.iter().all(|e| e.edge.is_none()) =>
                    {
                        procs.push((**inner).clone())
                    }
                    _ => return Err(EvalError::Unsupported("clocked process".into())),
                },
                _ => return Err(EvalError::Unsupported("sequential process".into())),
            },
            ItemKind::Param(_) | ItemKind::Other(_) => {}
            ItemKind::Initial(_) => {}
            ItemKind::Instances { module, .. } => {
                return Err(EvalError::Unsupported(format!("instance of `{module}`")))
            }
            ItemKind::Generate(_) => return Err(EvalError::Unsupported("generate".into())),
        }
    }
    Ok(())
}

fn lhs_width(lhs: &Expr, env: &dyn Env) -> Result<u32, EvalError> {
    Ok(match lhs {
        Expr::Ident(n) => env
            .width_of(n)
            .map(|w| w.0)
            .unwrap_or(32),
        Expr::Concat(parts) => {
            let mut w = 0;
            for p in parts {
                w += lhs_width(p, env)?;
            }
            w
        }
        other => size(other, env)?.0,
    })
}

fn exec(
    st: &Stmt,
    vals: &mut BTreeMap<String, Value>,
    params: &BTreeMap<String, Value>,
    widths: &Widths,
    locals: &mut BTreeMap<String, Value>,
    inputs: &[&str],
) -> Result<(), EvalError> {
    match st {
        Stmt::Null | Stmt::Call(..) => Ok(()),
        Stmt::Block(body) => {
            for s in body {
                exec(s, vals, params, widths, locals, inputs)?;
            }
            Ok(())
        }
        Stmt::Decl(vars) => {
            for v in vars {
                let (w, s) = decl_width(&v.range, v.signed, v.data_type.as_deref(), params)?;
                let init = match &v.init {
                    Some(e) => {
                        let scope = Scope { vals, params, widths, locals };
                        eval_assign(e, &scope, w)?
                    }
                    None => Value::new(0, w, s),
                };
                locals.insert(v.name.clone(), Value::new(init.bits, w, s));
            }
            Ok(())
        }
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let c = {
                let scope = Scope { vals, params, widths, locals };
                eval(cond, &scope)?.is_true()
            };
            if c {
                exec(then_branch, vals, params, widths, locals, inputs)
            } else if let Some(e) = else_branch {
                exec(e, vals, params, widths, locals, inputs)
            } else {
                Ok(())
            }
        }
        Stmt::Case {
            kind,
            selector,
            items,
        } => {
            let chosen = {
                let scope = Scope { vals, params, widths, locals };
                let (sw, ss) = size(selector, &scope)?;
                let mut chosen = None;
                'outer: for (i, it) in items.iter().enumerate() {
                    for lab in &it.labels {
                        let (lw, ls) = size(lab, &scope)?;
                        let cw = sw.max(lw);
                        let sel = eval_ctx(selector, &scope, cw, ss && ls)?;
                        let (lab_v, care) = match lab {
                            Expr::Number(t) => {
                                let l = parse_literal(t)?;
                                let dc = match kind {
                                    CaseKind::Case => 0,
                                    CaseKind::Casez => l.z,
                                    CaseKind::Casex => l.xz,
                                };
                                let v = eval_ctx(lab, &scope, cw, ss && ls)?;
                                (v, mask(cw) & !dc)
                            }
                            _ => (eval_ctx(lab, &scope, cw, ss && ls)?, mask(cw)),
                        };
                        if (sel.bits ^ lab_v.bits) & care == 0 {
                            chosen = Some(i);
                            break 'outer;
                        }
                    }
                }
                chosen.or_else(|| items.iter().position(|it| it.labels.is_empty()))
            };
            match chosen {
                Some(i) => exec(&items[i].body, vals, params, widths, locals, inputs),
                None => Ok(()),
            }
        }
        Stmt::Assign { lhs, op, rhs } => {
            let v = {
                let scope = Scope { vals, params, widths, locals };
                let tw = lhs_width(lhs, &scope)?;
                match op {
                    AssignOp::Blocking | AssignOp::NonBlocking => eval_assign(rhs, &scope, tw)?,
                    AssignOp::Compound(b) => {
                        let e = Expr::Binary(
                            *b,
                            alloc::boxed::Box::new(lhs.clone()),
                            alloc::boxed::Box::new(rhs.clone()),
                        );
                        eval_assign(&e, &scope, tw)?
                    }
                }
            };
            store(lhs, v, vals, params, widths, locals, inputs)
        }
        Stmt::For {
            init,
            cond,
            step,
            body,
        } => {
            for s in init {
                exec(s, vals, params, widths, locals, inputs)?;
            }
            let mut n = 0;
            loop {
                if let Some(c) = cond {
                    let scope = Scope { vals, params, widths, locals };
                    if !eval(c, &scope)?.is_true() {
                        break;
                    }
                }
                n += 1;
                if n > MAX_LOOP {
                    return Err(EvalError::LoopBound);
                }
                exec(body, vals, params, widths, locals, inputs)?;
                for s in step {
                    exec(s, vals, params, widths, locals, inputs)?;
                }
            }
            Ok(())
        }
        Stmt::Repeat(c, body) => {
            let n = {
                let scope = Scope { vals, params, widths, locals };
                eval(c, &scope)?.as_i128()
            };
            if n as usize > MAX_LOOP {
                return Err(EvalError::LoopBound);
            }
            for _ in 0..n.max(0) {
                exec(body, vals, params, widths, locals, inputs)?;
            }
            Ok(())
        }
        Stmt::While(c, body) => {
            let mut n = 0;
            loop {
                let go = {
                    let scope = Scope { vals, params, widths, locals };
                    eval(c, &scope)?.is_true()
                };
                if !go {
                    return Ok(());
                }
                n += 1;
                if n > MAX_LOOP {
                    return Err(EvalError::LoopBound);
                }
                exec(body, vals, params, widths, locals, inputs)?;
            }
        }
        Stmt::Other(_) => Ok(()),
        Stmt::Forever(_) | Stmt::Timing(..) => {
            Err(EvalError::Unsupported("timing control in combinational code".into()))
        }
    }
}

fn store(
    lhs: &Expr,
    v: Value,
    vals: &mut BTreeMap<String, Value>,
    params: &BTreeMap<String, Value>,
    widths: &Widths,
    locals: &mut BTreeMap<String, Value>,
    inputs: &[&str],
) -> Result<(), EvalError> {
    match lhs {
        Expr::Ident(n) => {
            if inputs.contains(&n.as_str()) {
                return Err(EvalError::Unsupported(format!("assignment to input `{n}`")));
            }
            if let Some(old) = locals.get_mut(n) {
                *old = Value::new(v.bits, old.width, old.signed);
            } else if let Some((w, s)) = widths.get(n) {
                vals.insert(n.clone(), Value::new(v.bits, *w, *s));
            } else {
                // implicitly declared loop variable
                locals.insert(n.clone(), Value::new(v.bits, 32, true));
            }
            Ok(())
        }
        Expr::Concat(parts) => {
            let scope = Scope { vals, params, widths, locals };
            let mut ws = Vec::new();
            for p in parts {
                ws.push(lhs_width(p, &scope)?);
            }
            let mut shift: u32 = ws.iter().sum();
            for (p, w) in parts.iter().zip(ws) {
                shift -= w;
                let part = Value::unsigned(if shift >= 128 { 0 } else { v.bits >> shift }, w);
                store(p, part, vals, params, widths, locals, inputs)?;
            }
            Ok(())
        }
        Expr::Index(base, idx) | Expr::Range(base, idx, _) | Expr::PartSelect { base, start: idx, .. } => {
            let Expr::Ident(name) = &**base else {
                return Err(EvalError::Unsupported("nested select target".into()));
            };
            let (lo, width) = {
                let scope = Scope { vals, params, widths, locals };
                match lhs {
                    Expr::Index(..) => (const_int(idx, &scope)?, 1u32),
                    Expr::Range(_, m, l) => {
                        let (m, l) = (const_int(m, &scope)?, const_int(l, &scope)?);
                        (m.min(l), (m - l).unsigned_abs() as u32 + 1)
                    }
                    Expr::PartSelect { start, width, up, .. } => {
                        let st = const_int(start, &scope)?;
                        let wd = const_int(width, &scope)?.max(1);
                        (if *up { st } else { st - wd + 1 }, wd as u32)
                    }
                    _ => unreachable!(),
                }
            };
            let scope = Scope { vals, params, widths, locals };
            let cur = scope.get(name).ok_or_else(|| EvalError::UnknownSignal(name.clone()))?;
            if lo < 0 || lo >= cur.width as i128 {
                return Ok(());
            }
            let lo = lo as u32;
            let m = mask(width) << lo;
            let bits = (cur.bits & !m) | ((v.bits << lo) & m);
            store(
                &Expr::Ident(name.clone()),
                Value::new(bits, cur.width, cur.signed),
                vals,
                params,
                widths,
                locals,
                inputs,
            )
        }
        _ => Err(EvalError::Unsupported("assignment target".into())),
    }
}

/// Enumerate every input assignment of `model` (total input width ≤ 20)
/// in counting order, the first input occupying the most significant bits.
pub fn all_assignments(inputs: &[(String, u32)]) -> Result<Vec<BTreeMap<String, u128>>, EvalError> {
    let total: u32 = inputs.iter().map(|(_, w)| *w).sum();
    if total > 20 {
        return Err(EvalError::TooWide(total));
    }
    let mut out = Vec::with_capacity(1 << total);
    for code in 0u128..(1u128 << total) {
        let mut shift = total;
        let mut m = BTreeMap::new();
        for (n, w) in inputs {
            shift -= w;
            m.insert(n.clone(), (code >> shift) & mask(*w));
        }
        out.push(m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verilog::parse;
    use crate::verilog::parse_expr;

    fn env(pairs: &[(&str, u128, u32, bool)]) -> BTreeMap<String, Value> {
        pairs
            .iter()
            .map(|(n, b, w, s)| (n.to_string(), Value::new(*b, *w, *s)))
            .collect()
    }

    fn ev(src: &str, e: &BTreeMap<String, Value>) -> Value {
        eval(&parse_expr(src).unwrap(), e).unwrap()
    }

    #[test]
    fn literals() {
        let l = parse_literal("4'b10x1").unwrap();
        assert_eq!((l.bits, l.xz, l.width), (0b1001, 0b0010, 4));
        let l = parse_literal("8'hzF").unwrap();
        assert_eq!((l.xz, l.z), (0xF0, 0xF0));
        let l = parse_literal("3'b?").unwrap();
        assert_eq!(l.z, 0b111);
        assert_eq!(parse_literal("1_000").unwrap().bits, 1000);
        assert!(parse_literal("16'sd5").unwrap().signed);
        assert!(parse_literal("'d5").unwrap().signed == false);
    }

    #[test]
    fn context_sizing_keeps_carry() {
        let e = env(&[("a", 0xF, 4, false), ("b", 1, 4, false)]);
        // self-determined: 4 bits, wraps
        assert_eq!(ev("a + b", &e).bits, 0);
        // widened by the 5-bit concat target
        let v = eval_assign(&parse_expr("a + b").unwrap(), &e, 5).unwrap();
        assert_eq!(v.bits, 0x10);
        assert_eq!(ev("{a, b}", &e).bits, 0xF1);
        assert_eq!(ev("{2{b[0]}}", &e).bits, 0b11);
        assert_eq!(ev("a[3:2]", &e).bits, 0b11);
        assert_eq!(ev("a[1 +: 2]", &e).bits, 0b11);
    }

    #[test]
    fn signed_arithmetic() {
        let e = env(&[("a", 0xFF, 8, true), ("b", 2, 8, true)]);
        assert_eq!(ev("a * b", &e).as_i128(), -2);
        assert_eq!(ev("a < b", &e).bits, 1);
        assert_eq!(ev("a >>> 1", &e).as_i128(), -1);
        // mixing with unsigned makes the comparison unsigned
        assert_eq!(ev("a < 8'd2", &e).bits, 0);
        assert_eq!(ev("$signed(4'b1000) < 0", &e).bits, 1);
    }

    #[test]
    fn reductions_and_logic() {
        let e = env(&[("a", 0b1011, 4, false)]);
        assert_eq!(ev("^a", &e).bits, 1);
        assert_eq!(ev("&a", &e).bits, 0);
        assert_eq!(ev("!a", &e).bits, 0);
        assert_eq!(ev("a == 4'd11 ? 2'd3 : 2'd0", &e).bits, 3);
        assert_eq!(ev("$clog2(9)", &e).bits, 4);
    }

    #[test]
    fn comb_model_mux_case_and_loop() {
        let src = "module m #(parameter W = 4) (input [W-1:0] a, input [1:0] s, output reg [W-1:0] y, output [W:0] sum, output p);
  wire [W-1:0] na = ~a;
  assign sum = a + na;
  always @* begin
    casez (s)
      2'b1?: y = a;
      2'b01: y = na;
      default: y = 0;
    endcase
  end
  integer i;
  reg acc;
  always_comb begin
    acc = 0;
    for (i = 0; i < W; i = i + 1) acc = acc ^ a[i];
  end
  assign p = acc;
endmodule";
        let f = parse(src).unwrap();
        let m = CombModel::new(&f.modules[0]).unwrap();
        assert_eq!(m.inputs, [("a".into(), 4), ("s".into(), 2)]);
        for a in 0..16u128 {
            for s in 0..4u128 {
                let out = m
                    .eval(&[("a".to_string(), a), ("s".to_string(), s)].into_iter().collect())
                    .unwrap();
                let y = if s >= 2 { a } else if s == 1 { !a & 0xF } else { 0 };
                assert_eq!(out["y"].bits, y);
                assert_eq!(out["sum"].bits, 0xF);
                assert_eq!(out["p"].bits, (a.count_ones() % 2) as u128);
            }
        }
    }

    #[test]
    fn clocked_module_is_rejected() {
        let f = parse("module m(input clk, input d, output reg q); always @(posedge clk) q <= d; endmodule").unwrap();
        assert!(matches!(CombModel::new(&f.modules[0]), Err(EvalError::Unsupported(_))));
    }

    #[test]
    fn concat_lhs_and_part_store() {
        let src = "module m(input [3:0] a, input [3:0] b, output [3:0] hi, output [3:0] lo, output reg [7:0] z);
  assign {hi, lo} = {a, b};
  always @* begin z = 8'h00; z[7:4] = b; z[0] = a[3]; end
endmodule";
        let f = parse(src).unwrap();
        let m = CombModel::new(&f.modules[0]).unwrap();
        let out = m
            .eval(&[("a".to_string(), 0x9), ("b".to_string(), 0x5)].into_iter().collect())
            .unwrap();
        assert_eq!(out["hi"].bits, 0x9);
        assert_eq!(out["lo"].bits, 0x5);
        assert_eq!(out["z"].bits, 0x51);
    }

    #[test]
    fn enumeration_order() {
        let ins = [("a".to_string(), 1), ("b".to_string(), 1)];
        let all = all_assignments(&ins).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all[2]["a"], 1);
        assert_eq!(all[2]["b"], 0);
    }
}
