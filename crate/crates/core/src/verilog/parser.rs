//! Recursive-descent parser producing [`SourceFile`].

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::SyntaxError;

/// Parse a single-file Verilog/SystemVerilog source.
pub fn parse(source: &str) -> Result<SourceFile, SyntaxError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        src_lines: source.lines().count().max(1),
        types: BTreeSet::new(),
        pending: Vec::new(),
    };
    p.source_file()
}

const KEYWORDS: &[&str] = &[
    "always", "always_comb", "always_ff", "always_latch", "and", "assign", "automatic", "begin",
    "bit", "buf", "byte", "case", "casex", "casez", "default", "defparam", "do", "else", "end",
    "endcase", "endfunction", "endgenerate", "endmodule", "endtask", "enum", "for", "forever",
    "function", "generate", "genvar", "if", "initial", "inout", "input", "int", "integer",
    "localparam", "logic", "module", "negedge", "or", "output", "parameter", "posedge", "real",
    "reg", "repeat", "return", "signed", "struct", "task", "typedef", "unique", "unsigned",
    "while", "wire", "tri", "supply0", "supply1", "unique0", "priority", "final", "import",
    "export", "var", "shortint", "longint", "time", "realtime", "string", "wand", "wor",
    "uwire", "tri0", "tri1", "endpackage", "package", "interface", "endinterface",
];

const VAR_TYPES: &[&str] = &[
    "reg", "logic", "bit", "integer", "int", "byte", "shortint", "longint", "time", "real",
    "realtime", "var", "string",
];

const NET_TYPES: &[&str] = &[
    "wire", "tri", "wand", "wor", "supply0", "supply1", "uwire", "tri0", "tri1", "triand",
    "trior", "trireg",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    src_lines: usize,
    /// User type names seen in `typedef`s.
    types: BTreeSet<String>,
    /// Extra items produced alongside the current one.
    pending: Vec<Item>,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    // ----- token helpers -------------------------------------------------

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&Token> {
        self.toks.get(self.pos + n)
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().map(|t| t.is_punct(p)).unwrap_or(false)
    }

    fn at_ident(&self, s: &str) -> bool {
        self.peek().map(|t| t.is_ident(s)).unwrap_or(false)
    }

    fn peek_ident(&self) -> Option<&str> {
        self.peek().and_then(|t| t.ident())
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_ident(&mut self, s: &str) -> bool {
        if self.at_ident(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err_here(&self, msg: impl Into<String>) -> SyntaxError {
        match self.peek() {
            Some(t) => SyntaxError {
                line: t.line,
                col: t.col,
                message: msg.into(),
            },
            None => {
                let (line, col) = self
                    .toks
                    .last()
                    .map(|t| (t.end_line, t.col + (t.end - t.start)))
                    .unwrap_or((self.src_lines, 1));
                SyntaxError {
                    line,
                    col,
                    message: format!("{} (unexpected end of input)", msg.into()),
                }
            }
        }
    }

    fn describe(&self) -> String {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Ident(s)) => format!("`{s}`"),
            Some(TokenKind::SysIdent(s)) => format!("`{s}`"),
            Some(TokenKind::Macro(s)) => format!("`` `{s} ``"),
            Some(TokenKind::Number(s)) => format!("number `{s}`"),
            Some(TokenKind::Str(_)) => "string literal".to_string(),
            Some(TokenKind::Punct(p)) => format!("`{p}`"),
            None => "end of input".to_string(),
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err_here(format!("expected `{p}`, found {}", self.describe())))
        }
    }

    fn expect_name(&mut self) -> PResult<String> {
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokenKind::Ident(s)) if !is_keyword(&s) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err_here(format!("expected identifier, found {}", self.describe()))),
        }
    }

    /// Skip a balanced `(...)`, `[...]` or `{...}` group starting at the
    /// current opening token.
    fn skip_group(&mut self) -> PResult<()> {
        let open = match self.peek() {
            Some(t) if t.is_punct("(") => ("(", ")"),
            Some(t) if t.is_punct("[") => ("[", "]"),
            Some(t) if t.is_punct("{") || t.is_punct("'{") => ("{", "}"),
            _ => return Err(self.err_here("expected group")),
        };
        let start = self.err_here("unbalanced delimiter");
        let mut depth = 0usize;
        while let Some(t) = self.bump() {
            if t.is_punct(open.0) || (open.0 == "{" && t.is_punct("'{")) {
                depth += 1;
            } else if t.is_punct(open.1) {
                depth -= 1;
                if depth == 0 {
                    return Ok(());
                }
            }
        }
        Err(start)
    }

    /// Skip tokens up to and including the next `;` at bracket depth 0.
    fn skip_to_semi(&mut self) -> PResult<()> {
        let start = self.err_here("missing `;`");
        let mut depth = 0i32;
        while let Some(t) = self.bump() {
            match &t.kind {
                TokenKind::Punct("(" | "[" | "{" | "'{") => depth += 1,
                TokenKind::Punct(")" | "]" | "}") => depth -= 1,
                TokenKind::Punct(";") if depth <= 0 => return Ok(()),
                _ => {}
            }
        }
        Err(start)
    }

    /// Skip to a closing keyword, honoring nesting of the opener.
    fn skip_to_keyword(&mut self, open: &str, close: &str) -> PResult<()> {
        let start = self.err_here(format!("missing `{close}`"));
        let mut depth = 1usize;
        while let Some(t) = self.bump() {
            if t.is_ident(open) {
                depth += 1;
            } else if t.is_ident(close) {
                depth -= 1;
                if depth == 0 {
                    self.skip_end_label();
                    return Ok(());
                }
            }
        }
        Err(start)
    }

    fn skip_end_label(&mut self) {
        if self.at_punct(":") {
            if let Some(TokenKind::Ident(_)) = self.peek_at(1).map(|t| &t.kind) {
                self.pos += 2;
            }
        }
    }

    fn span_item(&self, start: usize, kind: ItemKind) -> Item {
        let first = &self.toks[start];
        let last = &self.toks[self.pos.saturating_sub(1).max(start)];
        Item {
            kind,
            start_line: first.line,
            end_line: last.end_line,
            start_byte: first.start,
            end_byte: last.end,
        }
    }

    // ----- top level ------------------------------------------------------

    fn source_file(&mut self) -> PResult<SourceFile> {
        let mut file = SourceFile::default();
        while let Some(t) = self.peek() {
            if t.is_ident("module") || t.is_ident("macromodule") {
                file.modules.push(self.module()?);
            } else if t.is_ident("package") {
                self.pos += 1;
                self.skip_to_keyword("package", "endpackage")?;
            } else if t.is_ident("interface") {
                self.pos += 1;
                self.skip_to_keyword("interface", "endinterface")?;
            } else if t.is_ident("program") {
                self.pos += 1;
                self.skip_to_keyword("program", "endprogram")?;
            } else if t.is_ident("class") {
                self.pos += 1;
                self.skip_to_keyword("class", "endclass")?;
            } else if t.is_ident("typedef") {
                self.typedef()?;
            } else if t.is_ident("import")
                || t.is_ident("timeunit")
                || t.is_ident("timeprecision")
                || t.is_ident("bind")
            {
                self.skip_to_semi()?;
            } else if t.is_punct(";") {
                self.pos += 1;
            } else {
                return Err(self.err_here(format!("expected `module`, found {}", self.describe())));
            }
        }
        Ok(file)
    }

    fn module(&mut self) -> PResult<Module> {
        let start_line = self.bump().map(|t| t.line).unwrap_or(1);
        if self.at_ident("automatic") || self.at_ident("static") {
            self.pos += 1;
        }
        let name = self.expect_name()?;
        while self.at_ident("import") {
            self.skip_to_semi()?;
        }
        let mut params = Vec::new();
        if self.eat_punct("#") {
            self.expect_punct("(")?;
            params = self.param_port_list()?;
        }
        let mut ports = Vec::new();
        if self.at_punct("(") {
            ports = self.port_list()?;
        }
        self.expect_punct(";")?;

        let mut items = Vec::new();
        loop {
            match self.peek() {
                None => return Err(self.err_here(format!("missing `endmodule` for `{name}`"))),
                Some(t) if t.is_ident("endmodule") => break,
                _ => {}
            }
            self.item_into(&mut items)?;
        }
        let end_line = self.bump().map(|t| t.end_line).unwrap_or(start_line);
        self.skip_end_label();

        // Non-ANSI port directions come from body declarations.
        for it in &items {
            if let ItemKind::Declaration {
                dir: Some(d),
                range,
                signed,
                vars,
                ..
            } = &it.kind
            {
                for v in vars {
                    if let Some(p) = ports.iter_mut().find(|p| p.name == v.name) {
                        p.dir = Some(*d);
                        if p.range.is_none() {
                            p.range = range.clone();
                        }
                        p.signed |= *signed;
                    }
                }
            }
        }
        // `output q; reg q;` style variable redeclarations
        for it in &items {
            if let ItemKind::Declaration {
                dir: None,
                is_net: false,
                vars,
                range,
                ..
            } = &it.kind
            {
                for v in vars {
                    if let Some(p) = ports.iter_mut().find(|p| p.name == v.name) {
                        p.is_var = true;
                        if p.range.is_none() {
                            p.range = range.clone();
                        }
                    }
                }
            }
        }

        Ok(Module {
            name,
            params,
            ports,
            items,
            start_line,
            end_line,
        })
    }

    fn param_port_list(&mut self) -> PResult<Vec<ParamDecl>> {
        let mut out = Vec::new();
        if self.eat_punct(")") {
            return Ok(out);
        }
        let mut local = false;
        loop {
            if self.eat_ident("parameter") {
                local = false;
            } else if self.eat_ident("localparam") {
                local = true;
            }
            out.push(self.param_entry(local)?);
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(")")?;
            return Ok(out);
        }
    }

    /// `[type] [signing] [range] NAME [dims] [= expr]`
    fn param_entry(&mut self, local: bool) -> PResult<ParamDecl> {
        self.eat_ident("type");
        loop {
            if let Some(id) = self.peek_ident() {
                if VAR_TYPES.contains(&id) || id == "signed" || id == "unsigned" {
                    self.pos += 1;
                    continue;
                }
            }
            if self.at_punct("[") {
                self.skip_group()?;
                continue;
            }
            // user type followed by the name
            if let (Some(TokenKind::Ident(a)), Some(TokenKind::Ident(_))) =
                (self.peek().map(|t| &t.kind), self.peek_at(1).map(|t| &t.kind))
            {
                if !is_keyword(a) {
                    self.pos += 1;
                    continue;
                }
            }
            break;
        }
        let name = self.expect_name()?;
        while self.at_punct("[") {
            self.skip_group()?;
        }
        let default = if self.eat_punct("=") {
            Some(self.expr()?)
        } else {
            None
        };
        Ok(ParamDecl {
            name,
            default,
            local,
        })
    }

    fn port_list(&mut self) -> PResult<Vec<PortDecl>> {
        self.expect_punct("(")?;
        let mut ports: Vec<PortDecl> = Vec::new();
        if self.eat_punct(")") {
            return Ok(ports);
        }
        let mut cur_dir: Option<PortDirection> = None;
        let mut cur_range: Option<(Expr, Expr)> = None;
        let mut cur_signed = false;
        let mut cur_var = false;
        loop {
            let mut explicit = false;
            let mut has_type = false;
            if let Some(d) = self.peek_ident().and_then(direction) {
                self.pos += 1;
                cur_dir = Some(d);
                cur_range = None;
                cur_signed = false;
                cur_var = false;
                explicit = true;
            }
            loop {
                let Some(id) = self.peek_ident() else { break };
                if NET_TYPES.contains(&id) {
                    has_type = true;
                    self.pos += 1;
                } else if VAR_TYPES.contains(&id) {
                    has_type = true;
                    cur_var = true;
                    self.pos += 1;
                } else if id == "signed" {
                    cur_signed = true;
                    self.pos += 1;
                } else if id == "unsigned" {
                    self.pos += 1;
                } else if !is_keyword(id)
                    && matches!(self.peek_at(1).map(|t| &t.kind), Some(TokenKind::Ident(_)))
                {
                    // user-defined type or interface port
                    has_type = true;
                    self.pos += 1;
                } else if !is_keyword(id)
                    && self.peek_at(1).map(|t| t.is_punct(".")).unwrap_or(false)
                    && matches!(self.peek_at(2).map(|t| &t.kind), Some(TokenKind::Ident(_)))
                    && matches!(self.peek_at(3).map(|t| &t.kind), Some(TokenKind::Ident(_)))
                {
                    // intf.modport name
                    has_type = true;
                    self.pos += 3;
                } else {
                    break;
                }
            }
            if self.at_punct("[") {
                cur_range = Some(self.range()?);
                while self.at_punct("[") {
                    self.skip_group()?;
                }
            } else if explicit || has_type {
                cur_range = None;
            }
            let name = self.expect_name()?;
            while self.at_punct("[") {
                self.skip_group()?;
            }
            if self.eat_punct("=") {
                self.expr()?;
            }
            ports.push(PortDecl {
                name,
                dir: cur_dir,
                range: cur_range.clone(),
                signed: cur_signed,
                is_var: cur_var,
            });
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(")")?;
            return Ok(ports);
        }
    }

    fn range(&mut self) -> PResult<(Expr, Expr)> {
        self.expect_punct("[")?;
        let msb = self.expr()?;
        let r = if self.eat_punct(":") {
            let lsb = self.expr()?;
            (msb, lsb)
        } else {
            // `[N]` packed/unpacked size shorthand -> [N-1:0]
            let one = Expr::Number("1".into());
            (
                Expr::Binary(BinaryOp::Sub, Box::new(msb), Box::new(one)),
                Expr::Number("0".into()),
            )
        };
        self.expect_punct("]")?;
        Ok(r)
    }

    // ----- module items ---------------------------------------------------

    fn item_into(&mut self, out: &mut Vec<Item>) -> PResult<()> {
        let it = self.module_item()?;
        out.append(&mut self.pending);
        out.extend(it);
        Ok(())
    }

    fn module_item(&mut self) -> PResult<Option<Item>> {
        let start = self.pos;
        let tok = self.peek().cloned().ok_or_else(|| self.err_here("unexpected end"))?;

        if tok.is_punct(";") {
            self.pos += 1;
            return Ok(None);
        }
        let word = match &tok.kind {
            TokenKind::Ident(s) => s.clone(),
            TokenKind::Macro(_) => {
                // macro used as an item; tolerate `FOO(...);` style
                self.skip_to_semi()?;
                return Ok(Some(self.span_item(start, ItemKind::Other("macro".into()))));
            }
            _ => {
                return Err(self.err_here(format!("unexpected {} in module body", self.describe())))
            }
        };

        let kind = match word.as_str() {
            "always" | "always_ff" | "always_comb" | "always_latch" => {
                self.pos += 1;
                let kind = match word.as_str() {
                    "always_ff" => AlwaysKind::AlwaysFf,
                    "always_comb" => AlwaysKind::AlwaysComb,
                    "always_latch" => AlwaysKind::AlwaysLatch,
                    _ => AlwaysKind::Always,
                };
                let body = self.stmt()?;
                ItemKind::Always { kind, body }
            }
            "assign" => {
                self.pos += 1;
                if self.at_punct("(") {
                    self.skip_group()?; // drive strength
                }
                if self.at_punct("#") {
                    self.delay()?;
                }
                let mut pairs = Vec::new();
                loop {
                    let lhs = self.lvalue()?;
                    self.expect_punct("=")?;
                    let rhs = self.expr()?;
                    pairs.push((lhs, rhs));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")?;
                ItemKind::ContinuousAssign(pairs)
            }
            "initial" => {
                self.pos += 1;
                ItemKind::Initial(self.stmt()?)
            }
            "final" => {
                self.pos += 1;
                self.stmt()?;
                ItemKind::Other("final".into())
            }
            "parameter" | "localparam" => {
                self.pos += 1;
                let local = word == "localparam";
                let mut ps = Vec::new();
                loop {
                    ps.push(self.param_entry(local)?);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")?;
                ItemKind::Param(ps)
            }
            "typedef" => {
                let enums = self.typedef()?;
                if enums.is_empty() {
                    ItemKind::Other("typedef".into())
                } else {
                    ItemKind::Param(enums)
                }
            }
            "function" => {
                self.pos += 1;
                self.skip_to_keyword("function", "endfunction")?;
                ItemKind::Other("function".into())
            }
            "task" => {
                self.pos += 1;
                self.skip_to_keyword("task", "endtask")?;
                ItemKind::Other("task".into())
            }
            "property" | "sequence" | "covergroup" | "clocking" | "specify" | "checker" => {
                self.pos += 1;
                let close = match word.as_str() {
                    "property" => "endproperty",
                    "sequence" => "endsequence",
                    "covergroup" => "endgroup",
                    "clocking" => "endclocking",
                    "specify" => "endspecify",
                    _ => "endchecker",
                };
                let w = word.clone();
                self.skip_to_keyword(&w, close)?;
                ItemKind::Other(word)
            }
            "default" | "genvar" | "import" | "defparam" | "bind" | "export" | "timeunit"
            | "timeprecision" | "assert" | "assume" | "cover" | "restrict" => {
                self.skip_to_semi()?;
                ItemKind::Other(word)
            }
            "generate" => {
                self.pos += 1;
                let mut inner = Vec::new();
                loop {
                    if self.eat_ident("endgenerate") {
                        break;
                    }
                    if self.peek().is_none() {
                        return Err(self.err_here("missing `endgenerate`"));
                    }
                    self.item_into(&mut inner)?;
                }
                ItemKind::Generate(inner)
            }
            "for" => {
                self.pos += 1;
                if !self.at_punct("(") {
                    return Err(self.err_here("expected `(` after `for`"));
                }
                self.skip_group()?;
                ItemKind::Generate(self.generate_block()?)
            }
            "if" => {
                self.pos += 1;
                if !self.at_punct("(") {
                    return Err(self.err_here("expected `(` after `if`"));
                }
                self.skip_group()?;
                let mut inner = self.generate_block()?;
                if self.eat_ident("else") {
                    if self.at_ident("if") {
                        self.item_into(&mut inner)?;
                    } else {
                        inner.extend(self.generate_block()?);
                    }
                }
                ItemKind::Generate(inner)
            }
            "case" => {
                self.pos += 1;
                if !self.at_punct("(") {
                    return Err(self.err_here("expected `(` after `case`"));
                }
                self.skip_group()?;
                let mut inner = Vec::new();
                loop {
                    if self.eat_ident("endcase") {
                        break;
                    }
                    if self.peek().is_none() {
                        return Err(self.err_here("missing `endcase`"));
                    }
                    if !self.eat_ident("default") {
                        loop {
                            self.expr()?;
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(":")?;
                    inner.extend(self.generate_block()?);
                }
                ItemKind::Generate(inner)
            }
            "begin" => ItemKind::Generate(self.generate_block()?),
            "and" | "or" | "nand" | "nor" | "xor" | "xnor" | "not" | "buf" | "bufif0"
            | "bufif1" | "notif0" | "notif1" => self.gate_instances()?,
            w if direction(w).is_some()
                || NET_TYPES.contains(&w)
                || VAR_TYPES.contains(&w)
                || w == "signed"
                || w == "enum"
                || w == "struct"
                || w == "const" =>
            {
                let (decl, enums) = self.declaration()?;
                if !enums.is_empty() {
                    // enum constants behave like localparams
                    let item = self.span_item(start, ItemKind::Param(enums));
                    self.pending.push(item);
                }
                decl
            }
            w if is_keyword(w) => {
                return Err(self.err_here(format!("unexpected keyword `{w}` in module body")))
            }
            _ => self.instance_or_user_decl()?,
        };
        Ok(Some(self.span_item(start, kind)))
    }

    fn generate_block(&mut self) -> PResult<Vec<Item>> {
        if self.eat_ident("begin") {
            self.skip_end_label();
            let mut inner = Vec::new();
            loop {
                if self.eat_ident("end") {
                    self.skip_end_label();
                    return Ok(inner);
                }
                if self.peek().is_none() {
                    return Err(self.err_here("missing `end` in generate block"));
                }
                self.item_into(&mut inner)?;
            }
        }
        let mut inner = Vec::new();
        self.item_into(&mut inner)?;
        Ok(inner)
    }

    /// `typedef ...;` Returns enum constants as local parameters.
    fn typedef(&mut self) -> PResult<Vec<ParamDecl>> {
        self.pos += 1; // typedef
        let mut enums = Vec::new();
        if self.eat_ident("enum") {
            enums = self.enum_body()?;
        } else if self.at_ident("struct") || self.at_ident("union") {
            self.pos += 1;
            while !self.at_punct("{") {
                if self.bump().is_none() {
                    return Err(self.err_here("malformed struct typedef"));
                }
            }
            self.skip_group()?;
        } else {
            // typedef base [range] name;
            while let Some(t) = self.peek() {
                if t.is_punct("[") {
                    self.skip_group()?;
                } else if matches!(t.kind, TokenKind::Ident(_))
                    && self.peek_at(1).map(|n| n.is_punct(";") || n.is_punct("[")).unwrap_or(false)
                {
                    break;
                } else {
                    self.pos += 1;
                }
            }
        }
        let name = self.expect_name()?;
        while self.at_punct("[") {
            self.skip_group()?;
        }
        self.types.insert(name);
        self.expect_punct(";")?;
        Ok(enums)
    }

    /// After `enum`: `[base] [range] { A [= v], B, ... }`
    fn enum_body(&mut self) -> PResult<Vec<ParamDecl>> {
        while !self.at_punct("{") {
            if self.at_punct("[") {
                self.skip_group()?;
            } else if self.bump().is_none() {
                return Err(self.err_here("malformed enum"));
            }
        }
        self.expect_punct("{")?;
        let mut out = Vec::new();
        let mut next: Option<Expr> = Some(Expr::Number("0".into()));
        loop {
            let name = self.expect_name()?;
            let value = if self.eat_punct("=") {
                Some(self.expr()?)
            } else {
                next.clone()
            };
            next = value.as_ref().map(|v| {
                Expr::Binary(
                    BinaryOp::Add,
                    Box::new(v.clone()),
                    Box::new(Expr::Number("1".into())),
                )
            });
            out.push(ParamDecl {
                name,
                default: value,
                local: true,
            });
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct("}")?;
        Ok(out)
    }

    /// Port/net/variable declaration ending in `;`.
    fn declaration(&mut self) -> PResult<(ItemKind, Vec<ParamDecl>)> {
        let mut dir = None;
        let mut is_net = false;
        let mut signed = false;
        let mut range = None;
        let mut enums = Vec::new();
        let mut data_type: Option<String> = None;
        if let Some(d) = self.peek_ident().and_then(direction) {
            dir = Some(d);
            self.pos += 1;
        }
        loop {
            let Some(id) = self.peek_ident().map(|s| s.to_string()) else {
                break;
            };
            if NET_TYPES.contains(&id.as_str()) {
                is_net = true;
                self.pos += 1;
                if self.at_punct("(") {
                    self.skip_group()?; // strength
                }
            } else if VAR_TYPES.contains(&id.as_str()) {
                if id != "var" {
                    data_type = Some(id);
                }
                self.pos += 1;
            } else if id == "const" || id == "automatic" || id == "static" {
                self.pos += 1;
            } else if id == "signed" {
                signed = true;
                self.pos += 1;
            } else if id == "unsigned" || id == "vectored" || id == "scalared" {
                self.pos += 1;
            } else if id == "enum" {
                self.pos += 1;
                enums = self.enum_body()?;
                data_type = Some("enum".into());
            } else if id == "struct" || id == "union" {
                self.pos += 1;
                while !self.at_punct("{") {
                    if self.bump().is_none() {
                        return Err(self.err_here("malformed struct"));
                    }
                }
                self.skip_group()?;
            } else if !is_keyword(&id)
                && (self.types.contains(&id)
                    || matches!(self.peek_at(1).map(|t| &t.kind), Some(TokenKind::Ident(_))))
            {
                data_type = Some(id);
                self.pos += 1; // user type
            } else {
                break;
            }
        }
        if self.at_punct("[") {
            range = Some(self.range()?);
            while self.at_punct("[") {
                self.skip_group()?;
            }
        }
        if self.at_punct("#") {
            self.delay()?;
        }
        let mut vars = self.var_list()?;
        for v in &mut vars {
            v.range = range.clone();
            v.signed = signed;
            v.data_type = data_type.clone();
        }
        self.expect_punct(";")?;
        // a direction with no explicit type is a net
        if dir.is_some() && !is_net {
            is_net = true;
        }
        Ok((
            ItemKind::Declaration {
                dir,
                signed,
                range,
                vars,
                is_net,
            },
            enums,
        ))
    }

    fn var_list(&mut self) -> PResult<Vec<VarDecl>> {
        let mut vars = Vec::new();
        loop {
            let name = self.expect_name()?;
            while self.at_punct("[") {
                self.skip_group()?;
            }
            let init = if self.eat_punct("=") {
                Some(self.expr()?)
            } else {
                None
            };
            vars.push(VarDecl {
                name,
                range: None,
                signed: false,
                data_type: None,
                init,
            });
            if !self.eat_punct(",") {
                return Ok(vars);
            }
        }
    }

    fn instance_or_user_decl(&mut self) -> PResult<ItemKind> {
        // lookahead for `type [#(...)] name [dims] (`
        let save = self.pos;
        let module = self.expect_name()?;
        if self.at_punct("::") {
            // pkg::type name;
            self.pos = save + 3;
            let ty = self.toks[save + 2].ident().map(String::from);
            let mut vars = self.var_list()?;
            for v in &mut vars {
                v.data_type = ty.clone();
            }
            self.expect_punct(";")?;
            return Ok(ItemKind::Declaration {
                dir: None,
                signed: false,
                range: None,
                vars,
                is_net: false,
            });
        }
        let mut params = Vec::new();
        if self.eat_punct("#") {
            if self.at_punct("(") {
                params = self.connection_list()?;
            } else {
                // #N shorthand
                self.bump();
            }
        }
        let is_instance = matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Ident(_))) && {
            let mut k = 1;
            while self.peek_at(k).map(|t| t.is_punct("[")).unwrap_or(false) {
                // skip a balanced bracket by counting
                let mut depth = 0;
                loop {
                    match self.peek_at(k) {
                        Some(t) if t.is_punct("[") => depth += 1,
                        Some(t) if t.is_punct("]") => {
                            depth -= 1;
                            if depth == 0 {
                                k += 1;
                                break;
                            }
                        }
                        None => break,
                        _ => {}
                    }
                    k += 1;
                }
            }
            self.peek_at(k).map(|t| t.is_punct("(")).unwrap_or(false)
        };
        if is_instance {
            let mut instances = Vec::new();
            loop {
                let name = self.expect_name()?;
                while self.at_punct("[") {
                    self.skip_group()?;
                }
                let connections = self.connection_list()?;
                instances.push(Instance { name, connections });
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(";")?;
            return Ok(ItemKind::Instances {
                module,
                params,
                instances,
            });
        }
        // user-typed declaration: `state_t s, n;` / `mytype [3:0] x;`
        self.pos = save + 1;
        let mut range = None;
        if self.at_punct("[") {
            range = Some(self.range()?);
            while self.at_punct("[") {
                self.skip_group()?;
            }
        }
        if !matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Ident(_))) {
            self.pos = save;
            return Err(self.err_here(format!(
                "expected declaration or instance after `{module}`"
            )));
        }
        let mut vars = self.var_list()?;
        for v in &mut vars {
            v.range = range.clone();
            v.data_type = Some(module.clone());
        }
        self.expect_punct(";")?;
        Ok(ItemKind::Declaration {
            dir: None,
            signed: false,
            range,
            vars,
            is_net: false,
        })
    }

    /// Built-in gate primitives: `and [#d] [name] (out, in...), ...;`
    fn gate_instances(&mut self) -> PResult<ItemKind> {
        let module = self.bump().and_then(|t| t.ident().map(String::from)).unwrap_or_default();
        let strength = self
            .peek_at(1)
            .and_then(|t| t.ident())
            .map(|w| ["strong", "weak", "pull", "supply", "highz"].iter().any(|p| w.starts_with(p)))
            .unwrap_or(false);
        if self.at_punct("(") && strength {
            self.skip_group()?;
        }
        if self.at_punct("#") {
            self.delay()?;
        }
        let mut instances = Vec::new();
        loop {
            let name = if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Ident(_))) {
                let n = self.expect_name()?;
                while self.at_punct("[") {
                    self.skip_group()?;
                }
                n
            } else {
                String::new()
            };
            let connections = self.connection_list()?;
            instances.push(Instance { name, connections });
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")?;
        Ok(ItemKind::Instances {
            module,
            params: Vec::new(),
            instances,
        })
    }

    /// `( .a(x), .b(), .* )` or `( x, y )`
    fn connection_list(&mut self) -> PResult<Vec<Connection>> {
        self.expect_punct("(")?;
        let mut out = Vec::new();
        if self.eat_punct(")") {
            return Ok(out);
        }
        loop {
            if self.eat_punct(".*") {
                out.push(Connection::Wildcard);
            } else if self.eat_punct(".") {
                let name = self.expect_name()?;
                if self.eat_punct("(") {
                    if self.eat_punct(")") {
                        out.push(Connection::Named(name, None));
                    } else {
                        let e = self.expr()?;
                        self.expect_punct(")")?;
                        out.push(Connection::Named(name, Some(e)));
                    }
                } else {
                    // `.name` implicit connection
                    out.push(Connection::Named(name.clone(), Some(Expr::Ident(name))));
                }
            } else if self.at_punct(",") {
                // empty positional slot
            } else {
                out.push(Connection::Positional(self.expr()?));
            }
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(")")?;
            return Ok(out);
        }
    }

    fn delay(&mut self) -> PResult<()> {
        self.expect_punct("#")?;
        if self.at_punct("(") {
            self.skip_group()
        } else {
            self.bump();
            // 1ns style time literal
            if let Some(TokenKind::Ident(u)) = self.peek().map(|t| &t.kind) {
                if matches!(u.as_str(), "s" | "ms" | "us" | "ns" | "ps" | "fs" | "step") {
                    self.pos += 1;
                }
            }
            Ok(())
        }
    }

    // ----- statements -----------------------------------------------------

    fn stmt(&mut self) -> PResult<Stmt> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| self.err_here("expected statement"))?;

        if tok.is_punct(";") {
            self.pos += 1;
            return Ok(Stmt::Null);
        }
        if tok.is_punct("@") {
            self.pos += 1;
            let ev = self.event_control()?;
            let body = self.stmt()?;
            return Ok(Stmt::Timing(Some(ev), Box::new(body)));
        }
        if tok.is_punct("#") {
            self.delay()?;
            let body = self.stmt()?;
            return Ok(Stmt::Timing(None, Box::new(body)));
        }
        if tok.is_punct("->") {
            self.skip_to_semi()?;
            return Ok(Stmt::Other(Vec::new()));
        }
        if let TokenKind::SysIdent(name) = &tok.kind {
            self.pos += 1;
            let args = if self.at_punct("(") {
                self.call_args()?
            } else {
                Vec::new()
            };
            self.expect_punct(";")?;
            return Ok(Stmt::Call(name.clone(), args));
        }
        if let TokenKind::Macro(_) = &tok.kind {
            self.skip_to_semi()?;
            return Ok(Stmt::Other(Vec::new()));
        }

        if let Some(word) = tok.ident() {
            match word {
                "begin" | "fork" => {
                    self.pos += 1;
                    self.skip_end_label();
                    let close: &[&str] = if word == "begin" {
                        &["end"]
                    } else {
                        &["join", "join_any", "join_none"]
                    };
                    let mut body = Vec::new();
                    loop {
                        if let Some(w) = self.peek_ident() {
                            if close.contains(&w) {
                                self.pos += 1;
                                self.skip_end_label();
                                return Ok(Stmt::Block(body));
                            }
                        }
                        if self.peek().is_none() {
                            return Err(self.err_here(format!("missing `{}`", close[0])));
                        }
                        body.push(self.stmt()?);
                    }
                }
                "unique" | "unique0" | "priority" => {
                    self.pos += 1;
                    return self.stmt();
                }
                "if" => {
                    self.pos += 1;
                    self.expect_punct("(")?;
                    let cond = self.expr()?;
                    self.expect_punct(")")?;
                    let then_branch = Box::new(self.stmt()?);
                    let else_branch = if self.eat_ident("else") {
                        Some(Box::new(self.stmt()?))
                    } else {
                        None
                    };
                    return Ok(Stmt::If {
                        cond,
                        then_branch,
                        else_branch,
                    });
                }
                "case" | "casez" | "casex" => {
                    self.pos += 1;
                    let kind = match word {
                        "casez" => CaseKind::Casez,
                        "casex" => CaseKind::Casex,
                        _ => CaseKind::Case,
                    };
                    self.expect_punct("(")?;
                    let selector = self.expr()?;
                    self.expect_punct(")")?;
                    self.eat_ident("inside");
                    let mut items = Vec::new();
                    loop {
                        if self.eat_ident("endcase") {
                            break;
                        }
                        if self.peek().is_none() {
                            return Err(self.err_here("missing `endcase`"));
                        }
                        let mut labels = Vec::new();
                        if self.eat_ident("default") {
                            self.eat_punct(":");
                        } else {
                            loop {
                                labels.push(self.expr()?);
                                if !self.eat_punct(",") {
                                    break;
                                }
                            }
                            self.expect_punct(":")?;
                        }
                        let body = self.stmt()?;
                        items.push(CaseItem { labels, body });
                    }
                    return Ok(Stmt::Case {
                        kind,
                        selector,
                        items,
                    });
                }
                "for" => {
                    self.pos += 1;
                    self.expect_punct("(")?;
                    let mut init = Vec::new();
                    if !self.at_punct(";") {
                        loop {
                            if let Some(w) = self.peek_ident() {
                                if VAR_TYPES.contains(&w) || w == "genvar" {
                                    self.pos += 1;
                                    if self.at_punct("[") {
                                        self.skip_group()?;
                                    }
                                }
                            }
                            init.push(self.simple_assign()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(";")?;
                    let cond = if self.at_punct(";") {
                        None
                    } else {
                        Some(self.expr()?)
                    };
                    self.expect_punct(";")?;
                    let mut step = Vec::new();
                    if !self.at_punct(")") {
                        loop {
                            step.push(self.simple_assign()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    let body = Box::new(self.stmt()?);
                    return Ok(Stmt::For {
                        init,
                        cond,
                        step,
                        body,
                    });
                }
                "while" | "repeat" => {
                    self.pos += 1;
                    self.expect_punct("(")?;
                    let c = self.expr()?;
                    self.expect_punct(")")?;
                    let body = Box::new(self.stmt()?);
                    return Ok(if word == "while" {
                        Stmt::While(c, body)
                    } else {
                        Stmt::Repeat(c, body)
                    });
                }
                "wait" => {
                    self.pos += 1;
                    self.expect_punct("(")?;
                    let c = self.expr()?;
                    self.expect_punct(")")?;
                    let body = self.stmt()?;
                    return Ok(Stmt::Block(alloc::vec![Stmt::Other(alloc::vec![c]), body]));
                }
                "forever" => {
                    self.pos += 1;
                    return Ok(Stmt::Forever(Box::new(self.stmt()?)));
                }
                "do" => {
                    self.pos += 1;
                    let body = self.stmt()?;
                    if !self.eat_ident("while") {
                        return Err(self.err_here("expected `while` after `do` body"));
                    }
                    self.expect_punct("(")?;
                    let c = self.expr()?;
                    self.expect_punct(")")?;
                    self.expect_punct(";")?;
                    return Ok(Stmt::While(c, Box::new(body)));
                }
                "assert" | "assume" | "cover" => {
                    self.pos += 1;
                    if self.eat_ident("property") || self.eat_ident("final") {
                        // concurrent / deferred form
                    }
                    if self.at_punct("#") {
                        self.bump();
                        self.bump();
                    }
                    let mut reads = Vec::new();
                    if self.at_punct("(") {
                        self.expect_punct("(")?;
                        reads.push(self.expr()?);
                        self.expect_punct(")")?;
                    }
                    if !self.eat_punct(";") {
                        if !self.at_ident("else") {
                            self.stmt()?;
                        }
                        if self.eat_ident("else") {
                            self.stmt()?;
                        }
                    }
                    return Ok(Stmt::Other(reads));
                }
                "disable" | "return" | "break" | "continue" => {
                    self.pos += 1;
                    let mut reads = Vec::new();
                    if word == "return" && !self.at_punct(";") {
                        reads.push(self.expr()?);
                    } else if word == "disable" {
                        self.bump();
                    }
                    self.expect_punct(";")?;
                    return Ok(Stmt::Other(reads));
                }
                w if VAR_TYPES.contains(&w)
                    || w == "automatic"
                    || w == "static"
                    || w == "const"
                    || (self.types.contains(w)
                        && matches!(self.peek_at(1).map(|t| &t.kind), Some(TokenKind::Ident(_)))) =>
                {
                    return self.local_decl();
                }
                w if is_keyword(w) => {
                    return Err(self.err_here(format!("unexpected keyword `{w}` in statement")))
                }
                _ => {}
            }
        }

        // assignment, increment, or task call
        let lhs = self.lvalue()?;
        if let Expr::Ident(name) = &lhs {
            if self.at_punct("(") {
                let args = self.call_args()?;
                self.expect_punct(";")?;
                return Ok(Stmt::Call(name.clone(), args));
            }
            if self.at_punct(";") {
                self.pos += 1;
                return Ok(Stmt::Call(name.clone(), Vec::new()));
            }
        }
        let s = self.assign_tail(lhs)?;
        self.expect_punct(";")?;
        Ok(s)
    }

    fn local_decl(&mut self) -> PResult<Stmt> {
        let mut signed = false;
        let mut data_type: Option<String> = None;
        loop {
            let Some(id) = self.peek_ident() else { break };
            if VAR_TYPES.contains(&id) {
                data_type = Some(id.to_string());
                self.pos += 1;
            } else if matches!(id, "automatic" | "static" | "const" | "unsigned") {
                self.pos += 1;
            } else if id == "signed" {
                signed = true;
                self.pos += 1;
            } else if self.types.contains(id)
                && matches!(self.peek_at(1).map(|t| &t.kind), Some(TokenKind::Ident(_)) | Some(TokenKind::Punct("[")))
            {
                data_type = Some(id.to_string());
                self.pos += 1;
            } else {
                break;
            }
        }
        let range = if self.at_punct("[") {
            let r = self.range()?;
            while self.at_punct("[") {
                self.skip_group()?;
            }
            Some(r)
        } else {
            None
        };
        let mut vars = self.var_list()?;
        for v in &mut vars {
            v.range = range.clone();
            v.signed = signed;
            v.data_type = data_type.clone();
        }
        self.expect_punct(";")?;
        Ok(Stmt::Decl(vars))
    }

    /// Assignment without trailing `;` (for-loop headers).
    fn simple_assign(&mut self) -> PResult<Stmt> {
        let lhs = self.lvalue()?;
        self.assign_tail(lhs)
    }

    fn assign_tail(&mut self, lhs: Expr) -> PResult<Stmt> {
        let t = self
            .peek()
            .cloned()
            .ok_or_else(|| self.err_here("expected assignment"))?;
        let op = match &t.kind {
            TokenKind::Punct("=") => AssignOp::Blocking,
            TokenKind::Punct("<=") => AssignOp::NonBlocking,
            TokenKind::Punct("++") | TokenKind::Punct("--") => {
                self.pos += 1;
                let op = if t.is_punct("++") {
                    BinaryOp::Add
                } else {
                    BinaryOp::Sub
                };
                return Ok(Stmt::Assign {
                    lhs,
                    op: AssignOp::Compound(op),
                    rhs: Expr::Number("1".into()),
                });
            }
            TokenKind::Punct(p) => match compound_op(p) {
                Some(b) => AssignOp::Compound(b),
                None => {
                    return Err(self.err_here(format!(
                        "expected assignment operator, found {}",
                        self.describe()
                    )))
                }
            },
            _ => {
                return Err(self.err_here(format!(
                    "expected assignment operator, found {}",
                    self.describe()
                )))
            }
        };
        self.pos += 1;
        if self.at_punct("#") {
            self.delay()?;
        } else if self.at_punct("@") {
            self.pos += 1;
            self.event_control()?;
        }
        let rhs = self.expr()?;
        Ok(Stmt::Assign { lhs, op, rhs })
    }

    fn event_control(&mut self) -> PResult<EventControl> {
        if self.eat_punct("*") {
            return Ok(EventControl::Star);
        }
        if let Some(TokenKind::Ident(n)) = self.peek().map(|t| t.kind.clone()) {
            self.pos += 1;
            return Ok(EventControl::Named(n));
        }
        self.expect_punct("(")?;
        if self.at_punct("*") && self.peek_at(1).map(|t| t.is_punct(")")).unwrap_or(false) {
            self.pos += 2;
            return Ok(EventControl::Star);
        }
        let mut items = Vec::new();
        loop {
            let edge = if self.eat_ident("posedge") {
                Some(Edge::Pos)
            } else if self.eat_ident("negedge") {
                Some(Edge::Neg)
            } else if self.eat_ident("edge") {
                Some(Edge::Any)
            } else {
                None
            };
            let expr = self.expr()?;
            if self.eat_ident("iff") {
                let _ = self.expr()?;
            }
            items.push(EventItem { edge, expr });
            if self.eat_ident("or") || self.eat_punct(",") {
                continue;
            }
            break;
        }
        self.expect_punct(")")?;
        Ok(EventControl::List(items))
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if self.eat_punct(")") {
            return Ok(args);
        }
        loop {
            if self.at_punct(",") {
                // empty argument
            } else {
                args.push(self.expr()?);
            }
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(")")?;
            return Ok(args);
        }
    }

    // ----- expressions ----------------------------------------------------

    fn lvalue(&mut self) -> PResult<Expr> {
        if self.at_punct("{") {
            self.pos += 1;
            let mut parts = Vec::new();
            loop {
                parts.push(self.lvalue()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct("}")?;
            return Ok(Expr::Concat(parts));
        }
        let name = self.expect_name()?;
        let base = if self.eat_punct("::") {
            Expr::Scoped(name, self.expect_name()?)
        } else {
            Expr::Ident(name)
        };
        self.postfix(base)
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let cond = self.binary(0)?;
        if self.eat_punct("?") {
            let a = self.expr()?;
            self.expect_punct(":")?;
            let b = self.expr()?;
            return Ok(Expr::Ternary(Box::new(cond), Box::new(a), Box::new(b)));
        }
        Ok(cond)
    }

    fn binary(&mut self, min_level: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.at_ident("inside") && min_level <= 8 {
                self.pos += 1;
                let mut args = alloc::vec![lhs];
                self.expect_punct("{")?;
                loop {
                    args.push(self.expr()?);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct("}")?;
                lhs = Expr::Call("inside".into(), args);
                continue;
            }
            let Some((op, level)) = self.peek().and_then(binary_op) else {
                break;
            };
            if level < min_level {
                break;
            }
            self.pos += 1;
            // `**` is right-associative in practice; everything else left
            let next = if op == BinaryOp::Pow { level } else { level + 1 };
            let rhs = self.binary(next)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Punct(p)) => match *p {
                "+" => Some(UnaryOp::Plus),
                "-" => Some(UnaryOp::Neg),
                "!" => Some(UnaryOp::LogNot),
                "~" => Some(UnaryOp::BitNot),
                "&" => Some(UnaryOp::RedAnd),
                "~&" => Some(UnaryOp::RedNand),
                "|" => Some(UnaryOp::RedOr),
                "~|" => Some(UnaryOp::RedNor),
                "^" => Some(UnaryOp::RedXor),
                "~^" | "^~" => Some(UnaryOp::RedXnor),
                _ => None,
            },
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let e = self.unary()?;
            return Ok(Expr::Unary(op, Box::new(e)));
        }
        let p = self.primary()?;
        self.postfix(p)
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        loop {
            if self.at_punct("[") {
                self.pos += 1;
                let a = self.expr()?;
                if self.eat_punct(":") {
                    let b = self.expr()?;
                    self.expect_punct("]")?;
                    e = Expr::Range(Box::new(e), Box::new(a), Box::new(b));
                } else if self.at_punct("+:") || self.at_punct("-:") {
                    let up = self.at_punct("+:");
                    self.pos += 1;
                    let w = self.expr()?;
                    self.expect_punct("]")?;
                    e = Expr::PartSelect {
                        base: Box::new(e),
                        start: Box::new(a),
                        width: Box::new(w),
                        up,
                    };
                } else {
                    self.expect_punct("]")?;
                    e = Expr::Index(Box::new(e), Box::new(a));
                }
            } else if self.at_punct(".")
                && matches!(self.peek_at(1).map(|t| &t.kind), Some(TokenKind::Ident(_)))
            {
                self.pos += 1;
                let f = self.expect_name()?;
                e = Expr::Member(Box::new(e), f);
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self
            .peek()
            .cloned()
            .ok_or_else(|| self.err_here("expected expression"))?;
        let e = match &t.kind {
            TokenKind::Number(n) => {
                self.pos += 1;
                Expr::Number(n.clone())
            }
            TokenKind::Str(s) => {
                self.pos += 1;
                Expr::Str(s.clone())
            }
            TokenKind::SysIdent(n) => {
                self.pos += 1;
                let args = if self.at_punct("(") {
                    self.call_args()?
                } else {
                    Vec::new()
                };
                Expr::SysCall(n.clone(), args)
            }
            TokenKind::Macro(n) => {
                self.pos += 1;
                if self.at_punct("(") {
                    let args = self.call_args()?;
                    Expr::Call(format!("`{n}"), args)
                } else {
                    Expr::Macro(n.clone())
                }
            }
            TokenKind::Ident(n) => {
                if is_keyword(n) && !matches!(n.as_str(), "signed" | "unsigned" | "int" | "logic" | "bit" | "byte" | "integer" | "shortint" | "longint") {
                    return Err(self.err_here(format!("unexpected keyword `{n}` in expression")));
                }
                self.pos += 1;
                if self.eat_punct("::") {
                    let inner = self.expect_name()?;
                    Expr::Scoped(n.clone(), inner)
                } else if self.at_punct("(") {
                    let args = self.call_args()?;
                    Expr::Call(n.clone(), args)
                } else {
                    Expr::Ident(n.clone())
                }
            }
            TokenKind::Punct("(") => {
                self.pos += 1;
                let e = self.expr()?;
                // min:typ:max
                if self.eat_punct(":") {
                    self.expr()?;
                    self.expect_punct(":")?;
                    self.expr()?;
                }
                self.expect_punct(")")?;
                e
            }
            TokenKind::Punct("{") => {
                self.pos += 1;
                if self.at_punct("<<") || self.at_punct(">>") {
                    return Err(self.err_here("streaming concatenation is not supported"));
                }
                let first = self.expr()?;
                if self.at_punct("{") {
                    self.pos += 1;
                    let mut parts = Vec::new();
                    loop {
                        parts.push(self.expr()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                    self.expect_punct("}")?;
                    self.expect_punct("}")?;
                    Expr::Replicate(Box::new(first), parts)
                } else {
                    let mut parts = alloc::vec![first];
                    while self.eat_punct(",") {
                        parts.push(self.expr()?);
                    }
                    self.expect_punct("}")?;
                    Expr::Concat(parts)
                }
            }
            TokenKind::Punct("'{") => {
                self.pos += 1;
                let mut parts = Vec::new();
                if !self.at_punct("}") {
                    loop {
                        if self.eat_ident("default") {
                            self.expect_punct(":")?;
                        } else if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Ident(_)))
                            && self.peek_at(1).map(|t| t.is_punct(":")).unwrap_or(false)
                        {
                            self.pos += 2;
                        }
                        let e = self.expr()?;
                        if self.at_punct("{") {
                            // replication inside pattern
                            self.pos += 1;
                            let mut inner = Vec::new();
                            loop {
                                inner.push(self.expr()?);
                                if !self.eat_punct(",") {
                                    break;
                                }
                            }
                            self.expect_punct("}")?;
                            parts.push(Expr::Replicate(Box::new(e), inner));
                        } else {
                            parts.push(e);
                        }
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect_punct("}")?;
                Expr::Pattern(parts)
            }
            _ => {
                return Err(self.err_here(format!("expected expression, found {}", self.describe())))
            }
        };
        // cast: `N'(x)` / `type'(x)`
        if self.at_punct("'") && self.peek_at(1).map(|t| t.is_punct("(")).unwrap_or(false) {
            self.pos += 2;
            let inner = self.expr()?;
            self.expect_punct(")")?;
            return Ok(Expr::Cast(Box::new(e), Box::new(inner)));
        }
        Ok(e)
    }
}

fn direction(s: &str) -> Option<PortDirection> {
    match s {
        "input" => Some(PortDirection::Input),
        "output" => Some(PortDirection::Output),
        "inout" => Some(PortDirection::Inout),
        _ => None,
    }
}

fn compound_op(p: &str) -> Option<BinaryOp> {
    Some(match p {
        "+=" => BinaryOp::Add,
        "-=" => BinaryOp::Sub,
        "*=" => BinaryOp::Mul,
        "/=" => BinaryOp::Div,
        "%=" => BinaryOp::Mod,
        "&=" => BinaryOp::And,
        "|=" => BinaryOp::Or,
        "^=" => BinaryOp::Xor,
        "<<=" => BinaryOp::Shl,
        ">>=" => BinaryOp::Shr,
        "<<<=" => BinaryOp::AShl,
        ">>>=" => BinaryOp::AShr,
        _ => return None,
    })
}

fn binary_op(t: &Token) -> Option<(BinaryOp, u8)> {
    let TokenKind::Punct(p) = &t.kind else {
        return None;
    };
    Some(match *p {
        "->" => (BinaryOp::Implies, 1),
        "<->" => (BinaryOp::Equiv, 1),
        "||" => (BinaryOp::LogOr, 2),
        "&&" => (BinaryOp::LogAnd, 3),
        "|" => (BinaryOp::Or, 4),
        "^" => (BinaryOp::Xor, 5),
        "~^" | "^~" => (BinaryOp::Xnor, 5),
        "&" => (BinaryOp::And, 6),
        "==" => (BinaryOp::Eq, 7),
        "!=" => (BinaryOp::Ne, 7),
        "===" => (BinaryOp::CaseEq, 7),
        "!==" => (BinaryOp::CaseNe, 7),
        "==?" => (BinaryOp::WildEq, 7),
        "!=?" => (BinaryOp::WildNe, 7),
        "<" => (BinaryOp::Lt, 8),
        "<=" => (BinaryOp::Le, 8),
        ">" => (BinaryOp::Gt, 8),
        ">=" => (BinaryOp::Ge, 8),
        "<<" => (BinaryOp::Shl, 9),
        ">>" => (BinaryOp::Shr, 9),
        "<<<" => (BinaryOp::AShl, 9),
        ">>>" => (BinaryOp::AShr, 9),
        "+" => (BinaryOp::Add, 10),
        "-" => (BinaryOp::Sub, 10),
        "*" => (BinaryOp::Mul, 11),
        "/" => (BinaryOp::Div, 11),
        "%" => (BinaryOp::Mod, 11),
        "**" => (BinaryOp::Pow, 12),
        _ => return None,
    })
}

/// Parse a standalone expression (contract rule text, parameter defaults).
pub fn parse_expr(text: &str) -> Result<Expr, SyntaxError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        src_lines: 1,
        types: BTreeSet::new(),
        pending: Vec::new(),
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err_here(format!("unexpected {} after expression", p.describe())));
    }
    Ok(e)
}

/// Parse `lhs = rhs` where `lhs` is an l-value; returns `None` when the text
/// is a bare expression.
pub fn parse_assignment(text: &str) -> Result<Option<(Expr, Expr)>, SyntaxError> {
    let toks = tokenize(text)?;
    let has_assign = toks.iter().any(|t| t.is_punct("="));
    if !has_assign {
        return Ok(None);
    }
    let mut p = Parser {
        toks,
        pos: 0,
        src_lines: 1,
        types: BTreeSet::new(),
        pending: Vec::new(),
    };
    let lhs = p.lvalue()?;
    p.expect_punct("=")?;
    let rhs = p.expr()?;
    p.eat_punct(";");
    if p.peek().is_some() {
        return Err(p.err_here(format!("unexpected {} after expression", p.describe())));
    }
    Ok(Some((lhs, rhs)))
}
