//! Tokenizer for the synthesizable Verilog / SystemVerilog subset.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// Plain or escaped identifier, including keywords.
    Ident(String),
    /// `$display`, `$signed`, ...
    SysIdent(String),
    /// Use of a text macro, e.g. `` `WIDTH ``.
    Macro(String),
    /// Numeric literal exactly as written (underscores kept).
    Number(String),
    Str(String),
    Punct(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// 1-based line of the first character.
    pub line: usize,
    /// 1-based column of the first character.
    pub col: usize,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
    /// 1-based line of the last character.
    pub end_line: usize,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        matches!(&self.kind, TokenKind::Punct(q) if *q == p)
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(&self.kind, TokenKind::Ident(q) if q == s)
    }

    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Ident(s) => Some(s),
            _ => None,
        }
    }
}

// Longest first.
const PUNCTS: &[&str] = &[
    "<<<=", ">>>=", "===", "!==", "==?", "!=?", "<<<", ">>>", "<<=", ">>=", "|->", "|=>", "<->",
    "<=", ">=", "==", "!=", "&&", "||", "<<", ">>", "**", "->", "+:", "-:", "~&", "~|", "~^",
    "^~", "::", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "'{", "##", ".*",
    "(", ")", "[", "]", "{", "}", ";", ",", ".", ":", "?", "=", "+", "-", "*", "/", "%", "&",
    "|", "^", "~", "!", "<", ">", "@", "#", "'",
];

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        self.src.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn starts_with(&self, s: &str) -> bool {
        self.src[self.pos..].starts_with(s.as_bytes())
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            col: self.col,
            message: msg.into(),
        }
    }
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'$'
}

/// Split `source` into tokens, dropping comments, attributes and compiler
/// directives other than macro uses.
pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut cur = Cursor {
        src: source.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out: Vec<Token> = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_ascii_whitespace() {
            cur.bump();
            continue;
        }
        if cur.starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == b'\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if cur.starts_with("/*") {
            let err = cur.error("unterminated block comment");
            cur.bump();
            cur.bump();
            loop {
                if cur.peek().is_none() {
                    return Err(err);
                }
                if cur.starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                cur.bump();
            }
            continue;
        }
        // (* attribute *), but not `@(*)`.
        if cur.starts_with("(*") && cur.peek_at(2) != Some(b')') {
            let after_at = out.last().map(|t| t.is_punct("@")).unwrap_or(false);
            if !after_at {
                let err = cur.error("unterminated attribute");
                cur.bump();
                cur.bump();
                loop {
                    if cur.peek().is_none() {
                        return Err(err);
                    }
                    if cur.starts_with("*)") {
                        cur.bump();
                        cur.bump();
                        break;
                    }
                    cur.bump();
                }
                continue;
            }
        }

        let (start, line, col) = (cur.pos, cur.line, cur.col);
        let kind = if c == b'`' {
            cur.bump();
            let name_start = cur.pos;
            while cur.peek().map(is_ident_char).unwrap_or(false) {
                cur.bump();
            }
            let name = &source[name_start..cur.pos];
            if name.is_empty() {
                return Err(SyntaxError {
                    line,
                    col,
                    message: "stray backtick".to_string(),
                });
            }
            if is_directive(name) {
                skip_directive_line(&mut cur);
                continue;
            }
            TokenKind::Macro(name.to_string())
        } else if c == b'"' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    None | Some(b'\n') => {
                        return Err(SyntaxError {
                            line,
                            col,
                            message: "unterminated string literal".to_string(),
                        })
                    }
                    Some(b'"') => break,
                    Some(b'\\') => {
                        if let Some(e) = cur.bump() {
                            s.push('\\');
                            s.push(e as char);
                        }
                    }
                    Some(_) => {
                        // keep utf-8 intact by slicing rather than pushing bytes
                        let p = cur.pos - 1;
                        let ch_len = utf8_len(cur.src[p]);
                        for _ in 1..ch_len {
                            cur.bump();
                        }
                        s.push_str(&source[p..p + ch_len]);
                    }
                }
            }
            TokenKind::Str(s)
        } else if c == b'\\' {
            // escaped identifier, terminated by whitespace
            cur.bump();
            let s0 = cur.pos;
            while cur.peek().map(|c| !c.is_ascii_whitespace()).unwrap_or(false) {
                cur.bump();
            }
            TokenKind::Ident(source[s0..cur.pos].to_string())
        } else if c == b'$' && cur.peek_at(1).map(is_ident_start).unwrap_or(false) {
            cur.bump();
            while cur.peek().map(is_ident_char).unwrap_or(false) {
                cur.bump();
            }
            TokenKind::SysIdent(source[start..cur.pos].to_string())
        } else if is_ident_start(c) {
            while cur.peek().map(is_ident_char).unwrap_or(false) {
                cur.bump();
            }
            TokenKind::Ident(source[start..cur.pos].to_string())
        } else if c.is_ascii_digit() || (c == b'\'' && is_based_tick(&cur)) {
            lex_number(&mut cur);
            TokenKind::Number(source[start..cur.pos].to_string())
        } else {
            let p = PUNCTS
                .iter()
                .find(|p| cur.starts_with(p))
                .ok_or_else(|| cur.error(alloc::format!("unexpected character {:?}", c as char)))?;
            for _ in 0..p.len() {
                cur.bump();
            }
            TokenKind::Punct(p)
        };
        let end_line = if cur.pos > start && cur.src[cur.pos - 1] == b'\n' {
            cur.line - 1
        } else {
            cur.line
        };
        out.push(Token {
            kind,
            line,
            col,
            start,
            end: cur.pos,
            end_line,
        });
    }
    Ok(out)
}

fn utf8_len(b: u8) -> usize {
    match b {
        0xF0..=0xFF => 4,
        0xE0..=0xEF => 3,
        0xC0..=0xDF => 2,
        _ => 1,
    }
}

fn is_directive(name: &str) -> bool {
    matches!(
        name,
        "timescale"
            | "define"
            | "undef"
            | "include"
            | "ifdef"
            | "ifndef"
            | "elsif"
            | "else"
            | "endif"
            | "default_nettype"
            | "resetall"
            | "celldefine"
            | "endcelldefine"
            | "line"
            | "pragma"
            | "begin_keywords"
            | "end_keywords"
            | "unconnected_drive"
            | "nounconnected_drive"
            | "undefineall"
    )
}

fn skip_directive_line(cur: &mut Cursor<'_>) {
    while let Some(c) = cur.peek() {
        if c == b'\\' && cur.peek_at(1) == Some(b'\n') {
            cur.bump();
            cur.bump();
            continue;
        }
        if c == b'\n' {
            break;
        }
        if cur.starts_with("//") {
            break;
        }
        cur.bump();
    }
}

/// `'b0101`, `'hFF`, `'0`, `'1`, `'x`, `'z`, `'sd3`.
fn is_based_tick(cur: &Cursor<'_>) -> bool {
    match cur.peek_at(1) {
        Some(b's' | b'S') => matches!(
            cur.peek_at(2),
            Some(b'b' | b'B' | b'o' | b'O' | b'd' | b'D' | b'h' | b'H')
        ),
        Some(b'b' | b'B' | b'o' | b'O' | b'd' | b'D' | b'h' | b'H') => true,
        Some(b'0' | b'1' | b'x' | b'X' | b'z' | b'Z') => !cur
            .peek_at(2)
            .map(is_ident_char)
            .unwrap_or(false),
        _ => false,
    }
}

fn lex_number(cur: &mut Cursor<'_>) {
    // size or plain decimal / real
    while cur
        .peek()
        .map(|c| c.is_ascii_digit() || c == b'_')
        .unwrap_or(false)
    {
        cur.bump();
    }
    if cur.peek() == Some(b'.') && cur.peek_at(1).map(|c| c.is_ascii_digit()).unwrap_or(false) {
        cur.bump();
        while cur
            .peek()
            .map(|c| c.is_ascii_digit() || c == b'_')
            .unwrap_or(false)
        {
            cur.bump();
        }
    }
    if matches!(cur.peek(), Some(b'e' | b'E'))
        && cur
            .peek_at(1)
            .map(|c| c.is_ascii_digit() || c == b'-' || c == b'+')
            .unwrap_or(false)
    {
        cur.bump();
        cur.bump();
        while cur.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            cur.bump();
        }
        return;
    }
    // optional whitespace between size and base is legal; only handle the
    // compact form plus one space
    let save = (cur.pos, cur.line, cur.col);
    while cur.peek() == Some(b' ') {
        cur.bump();
    }
    if cur.peek() == Some(b'\'') && is_based_tick(cur) {
        cur.bump();
        if matches!(cur.peek(), Some(b's' | b'S')) {
            cur.bump();
        }
        match cur.peek() {
            Some(b'b' | b'B' | b'o' | b'O' | b'd' | b'D' | b'h' | b'H') => {
                cur.bump();
                while cur.peek() == Some(b' ') {
                    cur.bump();
                }
                while cur
                    .peek()
                    .map(|c| c.is_ascii_hexdigit() || matches!(c, b'_' | b'x' | b'X' | b'z' | b'Z' | b'?'))
                    .unwrap_or(false)
                {
                    cur.bump();
                }
            }
            _ => {
                // fill literal '0 '1 'x 'z
                cur.bump();
            }
        }
    } else {
        cur.pos = save.0;
        cur.line = save.1;
        cur.col = save.2;
    }
}
