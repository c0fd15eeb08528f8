//! MiniC: the C subset every other module works on.
//!
//! Programs are parsed into a fully resolved [`TranslationUnit`], rendered
//! back one statement per line, and instrumented for coverage or event
//! counting. Rendering is canonical: `parse(render(u))` is structurally
//! equal to `u`.

mod ast;
mod lexer;
mod parser;
mod render;
mod types;
mod typing;
pub mod visit;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use ast::*;
pub use lexer::ALLOWED_HEADERS;
pub use parser::{parse, parse_block, parse_int_literal, parse_items, ExternalName};
pub use render::{render, render_instrumented, render_items, render_stmt, Instrumented, MarkerMode, PRELUDE, PRELUDE_LINES};
pub use types::{BaseType, CType, Derivation};
pub use typing::{expr_type, is_floating};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum FrontendError {
    #[error("{line}: syntax error: expected {expected}")]
    Syntax { line: u32, expected: String },
    #[error("{line}: unsupported construct: {construct}")]
    Unsupported { line: u32, construct: String },
    #[error("{line}: unresolved name `{name}`")]
    Unresolved { line: u32, name: String },
    #[error("{line}: redeclaration of `{name}`")]
    Redeclared { line: u32, name: String },
}

impl FrontendError {
    pub fn line(&self) -> u32 {
        match self {
            FrontendError::Syntax { line, .. }
            | FrontendError::Unsupported { line, .. }
            | FrontendError::Unresolved { line, .. }
            | FrontendError::Redeclared { line, .. } => *line,
        }
    }
}

/// A program's text together with where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceProgram {
    pub id: String,
    pub text: String,
    /// Filesystem origin, or `"generated"`.
    pub path: String,
    pub line_count: u32,
}

impl SourceProgram {
    pub fn new(id: impl Into<String>, text: impl Into<String>, path: impl Into<String>) -> Self {
        let text = text.into();
        let line_count = count_lines(&text);
        SourceProgram { id: id.into(), text, path: path.into(), line_count }
    }

    pub fn parse(&self) -> Result<TranslationUnit, FrontendError> {
        parse(&self.text)
    }
}

/// Number of newline-delimited lines (a trailing newline does not open a new line).
pub fn count_lines(text: &str) -> u32 {
    if text.is_empty() {
        return 0;
    }
    let n = text.bytes().filter(|b| *b == b'\n').count() as u32;
    if text.ends_with('\n') {
        n
    } else {
        n + 1
    }
}

/// Renders `unit` as a [`SourceProgram`].
pub fn render_program(unit: &TranslationUnit, id: &str) -> SourceProgram {
    SourceProgram::new(id, render(unit), "generated")
}

/// Lists every construct that keeps `source` out of MiniC.
///
/// The list is empty exactly when [`parse`] succeeds. A lexical pass reports
/// every unsupported keyword and preprocessor line; anything else is the
/// single error the parser stops at.
pub fn validate_subset(source: &SourceProgram) -> Vec<FrontendError> {
    let err = match parse(&source.text) {
        Ok(_) => return Vec::new(),
        Err(e) => e,
    };
    let mut found = Vec::new();
    for (i, raw) in source.text.lines().enumerate() {
        let line = i as u32 + 1;
        let code = strip_line_comment(raw);
        let trimmed = code.trim_start();
        if trimmed.starts_with('#') {
            if let Err(FrontendError::Unsupported { construct, .. }) = lexer::tokenize(trimmed) {
                found.push(FrontendError::Unsupported { line, construct });
            }
            continue;
        }
        for word in identifiers(code) {
            if parser::UNSUPPORTED_KEYWORDS.contains(&word) {
                found.push(FrontendError::Unsupported { line, construct: word.to_string() });
            }
        }
    }
    let unsupported = matches!(err, FrontendError::Unsupported { .. });
    if !found.iter().any(|f| f == &err || (unsupported && f.line() == err.line())) {
        found.push(err);
    }
    found.sort_by_key(|e| e.line());
    found
}

fn strip_line_comment(line: &str) -> &str {
    match line.find("//") {
        Some(i) => &line[..i],
        None => line,
    }
}

fn identifiers(code: &str) -> impl Iterator<Item = &str> {
    let mut in_str = false;
    let mut spans = Vec::new();
    let bytes = code.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'"' || c == b'\'' {
            in_str = !in_str;
            i += 1;
            continue;
        }
        if c == b'\\' && in_str {
            i += 2;
            continue;
        }
        if !in_str && (c.is_ascii_alphabetic() || c == b'_') {
            let s = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            spans.push(&code[s..i]);
            continue;
        }
        i += 1;
    }
    spans.into_iter()
}

/// One row of the node table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeInfo {
    pub id: NodeId,
    pub kind: NodeKind,
    pub span: Span,
    pub parent: Option<NodeId>,
}

/// Every statement and expression node of `unit` with its parent.
pub fn node_table(unit: &TranslationUnit) -> Vec<NodeInfo> {
    let mut out = Vec::new();
    for item in &unit.items {
        match item {
            Item::Global(s) => visit::collect_nodes_stmt(s, None, &mut out),
            Item::Function(f) => visit::collect_nodes_stmt(&f.body, None, &mut out),
        }
    }
    out
}

/// Number of nodes of each kind in `unit`.
pub fn kind_histogram(unit: &TranslationUnit) -> BTreeMap<NodeKind, usize> {
    let mut h = BTreeMap::new();
    for n in node_table(unit) {
        *h.entry(n.kind).or_insert(0) += 1;
    }
    h
}

/// An id- and span-free S-expression of `unit`, for structural comparison.
pub fn shape(unit: &TranslationUnit) -> String {
    visit::shape_unit(unit)
}
