//! Agent roles: prompt assembly from repo-owned templates and extraction of
//! structured payloads from model responses.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::patch::PatchOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Architect,
    Verifier,
    Coder,
    Debugger,
    Asserter,
    Proofer,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::Architect,
        Role::Verifier,
        Role::Coder,
        Role::Debugger,
        Role::Asserter,
        Role::Proofer,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Architect => "architect",
            Role::Verifier => "verifier",
            Role::Coder => "coder",
            Role::Debugger => "debugger",
            Role::Asserter => "asserter",
            Role::Proofer => "proofer",
        }
    }

    /// The raw template: system text, a `---` line, then the user text.
    pub fn template(&self) -> &'static str {
        match self {
            Role::Architect => include_str!("../prompts/architect.txt"),
            Role::Verifier => include_str!("../prompts/verifier.txt"),
            Role::Coder => include_str!("../prompts/coder.txt"),
            Role::Debugger => include_str!("../prompts/debugger.txt"),
            Role::Asserter => include_str!("../prompts/asserter.txt"),
            Role::Proofer => include_str!("../prompts/proofer.txt"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(s: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::System,
            content: s.into(),
        }
    }

    pub fn user(s: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::User,
            content: s.into(),
        }
    }

    pub fn assistant(s: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::Assistant,
            content: s.into(),
        }
    }
}

/// A block the Debugger may replace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockView {
    pub id: usize,
    pub kind: String,
    pub lines: (usize, usize),
    pub text: String,
}

/// Everything a prompt can draw on. Which fields are required depends on
/// the role.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PromptContext {
    pub task: Option<String>,
    pub interface_stub: Option<String>,
    pub testbench: Option<String>,
    /// Canonical contract JSON.
    pub contract: Option<String>,
    pub lint_errors: Option<String>,
    pub trace_report: Option<String>,
    pub blocks: Vec<BlockView>,
    /// Locality was relaxed to the whole file because the slice was empty.
    pub degraded_locality: bool,
    pub formal_hints: Option<String>,
    pub clocking: Option<String>,
    pub obligations: Vec<String>,
    pub summary: Option<String>,
    pub targets: Vec<String>,
    /// Why the previous answer was rejected, for retries.
    pub feedback: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{role} prompt needs {missing}")]
pub struct MissingContext {
    pub role: &'static str,
    pub missing: &'static str,
}

fn section(title: &str, body: &Option<String>) -> String {
    match body {
        Some(b) if !b.trim().is_empty() => format!("\n{title}:\n{}", b.trim_end()),
        _ => String::new(),
    }
}

fn fill(template: &str, vars: &[(&str, String)]) -> (String, String) {
    let (sys, user) = template.split_once("\n---\n").unwrap_or(("", template));
    let mut out = Vec::new();
    for line in user.lines() {
        let t = line.trim();
        if let Some(key) = t.strip_prefix("{{").and_then(|k| k.strip_suffix("}}")) {
            let v = vars
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| v.as_str())
                .unwrap_or("");
            if !v.is_empty() {
                out.push(v.trim_end_matches('\n').to_string());
            }
        } else {
            out.push(line.to_string());
        }
    }
    let mut user = out.join("\n");
    while user.ends_with('\n') {
        user.pop();
    }
    user.push('\n');
    (sys.trim_end().to_string(), user)
}

fn need<'a>(role: Role, v: &'a Option<String>, what: &'static str) -> Result<&'a str, MissingContext> {
    v.as_deref().filter(|s| !s.trim().is_empty()).ok_or(MissingContext {
        role: role.as_str(),
        missing: what,
    })
}

fn render_blocks(blocks: &[BlockView]) -> String {
    let mut s = String::new();
    for b in blocks {
        s.push_str(&format!(
            "BLOCK {} ({}, lines {}-{})\n```verilog\n{}\n```\n",
            b.id, b.kind, b.lines.0, b.lines.1, b.text
        ));
    }
    s
}

/// Build the message list for one turn. Identical contexts give identical
/// prompts.
pub fn assemble_prompt(role: Role, ctx: &PromptContext) -> Result<Vec<ChatMessage>, MissingContext> {
    let feedback = section("Your previous answer was rejected", &ctx.feedback);
    let vars: Vec<(&str, String)> = match role {
        Role::Architect => alloc::vec![
            ("task", need(role, &ctx.task, "the task prompt")?.to_string()),
            ("interface", section("Module interface", &ctx.interface_stub)),
            ("testbench", section("Testbench", &ctx.testbench)),
            (
                "lint_errors",
                section("The previous contract failed lint; fix these issues", &ctx.lint_errors),
            ),
            ("feedback", feedback),
        ],
        Role::Verifier => alloc::vec![
            ("contract", need(role, &ctx.contract, "the contract")?.to_string()),
            ("feedback", feedback),
        ],
        Role::Coder => alloc::vec![
            ("contract", need(role, &ctx.contract, "the contract")?.to_string()),
            ("interface", section("Module interface", &ctx.interface_stub)),
            ("feedback", feedback),
        ],
        Role::Debugger => {
            if ctx.blocks.is_empty() {
                return Err(MissingContext {
                    role: role.as_str(),
                    missing: "suspect blocks",
                });
            }
            let mut blocks = render_blocks(&ctx.blocks);
            if ctx.degraded_locality {
                blocks.insert_str(
                    0,
                    "Note: no block drives the failing outputs by name, so every block is listed.\n",
                );
            }
            let ids: Vec<String> = ctx.blocks.iter().map(|b| b.id.to_string()).collect();
            blocks.push_str(&format!("Allowed block ids: {}\n", ids.join(", ")));
            alloc::vec![
                ("contract", need(role, &ctx.contract, "the contract")?.to_string()),
                ("trace", need(role, &ctx.trace_report, "the trace report")?.to_string()),
                ("blocks", blocks),
                ("formal", section("Formal and assertion hints", &ctx.formal_hints)),
                ("feedback", feedback),
            ]
        }
        Role::Asserter => alloc::vec![
            ("contract", need(role, &ctx.contract, "the contract")?.to_string()),
            ("clocking", need(role, &ctx.clocking, "clocking")?.to_string()),
            ("obligations", ctx.obligations.join("\n")),
            ("feedback", feedback),
        ],
        Role::Proofer => {
            if ctx.targets.is_empty() {
                return Err(MissingContext {
                    role: role.as_str(),
                    missing: "targets",
                });
            }
            alloc::vec![
                ("summary", need(role, &ctx.summary, "the functional summary")?.to_string()),
                ("targets", ctx.targets.join(", ")),
                ("feedback", feedback),
            ]
        }
    };
    let (sys, user) = fill(role.template(), &vars);
    Ok(alloc::vec![ChatMessage::system(sys), ChatMessage::user(user)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    Contract(serde_json::Value),
    Code(String),
    Edits(Vec<PatchOp>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed response: {reason}")]
pub struct MalformedResponse {
    pub reason: String,
}

fn malformed(reason: impl Into<String>) -> MalformedResponse {
    MalformedResponse {
        reason: reason.into(),
    }
}

/// The first balanced `{...}` that parses as a JSON object.
pub fn first_json_object(text: &str) -> Option<serde_json::Value> {
    for (i, _) in text.match_indices('{') {
        let mut stream =
            serde_json::Deserializer::from_str(&text[i..]).into_iter::<serde_json::Value>();
        if let Some(Ok(v @ serde_json::Value::Object(_))) = stream.next() {
            return Some(v);
        }
    }
    None
}

/// Fenced code blocks as (start byte of the opening fence, body).
fn fences(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut offset = 0;
    let mut open: Option<(usize, String)> = None;
    for line in text.split_inclusive('\n') {
        let t = line.trim();
        match &mut open {
            None if t.starts_with("```") => open = Some((offset, String::new())),
            Some((start, body)) => {
                if t.starts_with("```") {
                    out.push((*start, core::mem::take(body)));
                    open = None;
                } else {
                    body.push_str(line);
                }
            }
            None => {}
        }
        offset += line.len();
    }
    out
}

/// The first fenced code block's body.
pub fn first_fence(text: &str) -> Option<String> {
    fences(text).into_iter().next().map(|(_, b)| b)
}

fn parse_edits(text: &str, allowed: &[usize]) -> Result<Vec<PatchOp>, MalformedResponse> {
    let blocks = fences(text);
    let mut ops = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let t = line.trim().trim_start_matches(['#', '*', ' ']);
        if let Some(rest) = t.strip_prefix("BLOCK") {
            let digits: String = rest
                .trim_start_matches([' ', ':'])
                .chars()
                .take_while(|c| c.is_ascii_digit())
                .collect();
            let id: usize = digits
                .parse()
                .map_err(|_| malformed(format!("cannot read a block id from `{}`", line.trim())))?;
            if !allowed.contains(&id) {
                return Err(malformed(format!("unknown block id {id}")));
            }
            let body = blocks
                .iter()
                .find(|(start, _)| *start > offset)
                .map(|(_, b)| b.clone())
                .ok_or_else(|| malformed(format!("BLOCK {id} has no fenced replacement")))?;
            ops.push(PatchOp {
                block_id: id,
                replacement: body,
            });
        }
        offset += line.len();
    }
    if ops.is_empty() {
        return Err(malformed("no `BLOCK <id>` edits found"));
    }
    Ok(ops)
}

/// Pull the role's payload out of a response. Never panics.
pub fn extract_payload(
    role: Role,
    raw: &str,
    allowed_blocks: &[usize],
) -> Result<Payload, MalformedResponse> {
    match role {
        Role::Architect => first_json_object(raw)
            .map(Payload::Contract)
            .ok_or_else(|| malformed("no JSON object in the response")),
        Role::Debugger => parse_edits(raw, allowed_blocks).map(Payload::Edits),
        _ => first_fence(raw)
            .filter(|b| !b.trim().is_empty())
            .map(Payload::Code)
            .ok_or_else(|| malformed("no fenced code block in the response")),
    }
}
