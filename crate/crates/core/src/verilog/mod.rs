//! Hand-written front end for the synthesizable Verilog subset used by the
//! benchmark problems: lexer, syntax tree, parser and a small evaluator.

pub mod ast;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod print;

use alloc::string::String;

pub use ast::SourceFile;
pub use parser::{parse, parse_assignment, parse_expr};

/// Grammar rejection with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}
