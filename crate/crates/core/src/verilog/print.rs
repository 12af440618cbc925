//! Expression printer. Output is fully parenthesized so it re-parses to the
//! same tree regardless of operator precedence.

use alloc::collections::BTreeSet;
use alloc::string::String;
use core::fmt::{self, Display, Formatter};

use super::ast::*;

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Plus => "+",
            UnaryOp::Neg => "-",
            UnaryOp::LogNot => "!",
            UnaryOp::BitNot => "~",
            UnaryOp::RedAnd => "&",
            UnaryOp::RedNand => "~&",
            UnaryOp::RedOr => "|",
            UnaryOp::RedNor => "~|",
            UnaryOp::RedXor => "^",
            UnaryOp::RedXnor => "~^",
        }
    }
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
            BinaryOp::Pow => "**",
            BinaryOp::And => "&",
            BinaryOp::Or => "|",
            BinaryOp::Xor => "^",
            BinaryOp::Xnor => "~^",
            BinaryOp::LogAnd => "&&",
            BinaryOp::LogOr => "||",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::CaseEq => "===",
            BinaryOp::CaseNe => "!==",
            BinaryOp::WildEq => "==?",
            BinaryOp::WildNe => "!=?",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::AShl => "<<<",
            BinaryOp::AShr => ">>>",
            BinaryOp::Implies => "->",
            BinaryOp::Equiv => "<->",
        }
    }
}

fn list(f: &mut Formatter<'_>, items: &[Expr]) -> fmt::Result {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Ident(n) => f.write_str(n),
            Expr::Macro(n) => write!(f, "`{n}"),
            Expr::Number(n) => f.write_str(n),
            Expr::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Expr::Unary(op, e) => write!(f, "({}{e})", op.symbol()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Ternary(c, a, b) => write!(f, "({c} ? {a} : {b})"),
            Expr::Concat(items) => {
                f.write_str("{")?;
                list(f, items)?;
                f.write_str("}")
            }
            Expr::Replicate(n, items) => {
                write!(f, "{{{n}{{")?;
                list(f, items)?;
                f.write_str("}}")
            }
            Expr::Pattern(items) => {
                f.write_str("'{")?;
                list(f, items)?;
                f.write_str("}")
            }
            Expr::Index(b, i) => write!(f, "{b}[{i}]"),
            Expr::Range(b, m, l) => write!(f, "{b}[{m}:{l}]"),
            Expr::PartSelect {
                base,
                start,
                width,
                up,
            } => write!(f, "{base}[{start} {}: {width}]", if *up { "+" } else { "-" }),
            Expr::Member(b, m) => write!(f, "{b}.{m}"),
            Expr::Scoped(p, n) => write!(f, "{p}::{n}"),
            Expr::Call(n, args) => {
                write!(f, "{n}(")?;
                list(f, args)?;
                f.write_str(")")
            }
            Expr::SysCall(n, args) => {
                f.write_str(n)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    list(f, args)?;
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Cast(t, e) => write!(f, "{t}'({e})"),
        }
    }
}

impl Expr {
    /// Identifiers referenced as signals or constants (member names and
    /// package-scoped names excluded).
    pub fn idents(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_idents(&mut out);
        out
    }

    fn collect_idents(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Ident(n) => {
                out.insert(n.clone());
            }
            Expr::Macro(_) | Expr::Number(_) | Expr::Str(_) | Expr::Scoped(..) => {}
            Expr::Unary(_, e) | Expr::Member(e, _) => e.collect_idents(out),
            Expr::Binary(_, a, b) | Expr::Index(a, b) | Expr::Cast(a, b) => {
                a.collect_idents(out);
                b.collect_idents(out);
            }
            Expr::Ternary(a, b, c) | Expr::Range(a, b, c) => {
                a.collect_idents(out);
                b.collect_idents(out);
                c.collect_idents(out);
            }
            Expr::PartSelect {
                base, start, width, ..
            } => {
                base.collect_idents(out);
                start.collect_idents(out);
                width.collect_idents(out);
            }
            Expr::Concat(v) | Expr::Pattern(v) | Expr::Call(_, v) | Expr::SysCall(_, v) => {
                v.iter().for_each(|e| e.collect_idents(out))
            }
            Expr::Replicate(n, v) => {
                n.collect_idents(out);
                v.iter().for_each(|e| e.collect_idents(out));
            }
        }
    }
}
