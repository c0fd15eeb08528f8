use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::FrontendError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(String),
    Float(String),
    Char(String),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
}

const PUNCTS: [&str; 47] = [
    "<<=", ">>=", "...", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "<=", ">=",
    "==", "!=", "&&", "||", "->", "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "|", "^", "~", "(", ")",
    "{", "}", "[", "]", ";", ",", ".", "?", ":", "#",
];

/// Headers a MiniC program may include; everything else in the preprocessor is rejected.
pub const ALLOWED_HEADERS: [&str; 4] = ["stdio.h", "stdint.h", "stdlib.h", "math.h"];

pub fn tokenize(src: &str) -> Result<Vec<Token>, FrontendError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut at_line_start = true;

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            at_line_start = true;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let start_line = line;
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(FrontendError::Syntax { line: start_line, expected: "end of comment".into() });
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                if bytes[i] == b'\n' {
                    line += 1;
                }
                i += 1;
            }
            continue;
        }
        if c == b'#' && at_line_start {
            let start = i;
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            check_directive(&src[start..i], line)?;
            continue;
        }
        at_line_start = false;

        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), line });
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            let (tok, len) = lex_number(&src[i..], line)?;
            out.push(Token { tok, line });
            i += len;
            continue;
        }
        if c == b'\'' || c == b'"' {
            let start = i;
            i += 1;
            loop {
                match bytes.get(i) {
                    None | Some(b'\n') => {
                        return Err(FrontendError::Syntax { line, expected: "closing quote".into() });
                    }
                    Some(b'\\') => i += 2,
                    Some(&q) if q == c => {
                        i += 1;
                        break;
                    }
                    Some(_) => i += 1,
                }
            }
            let text = src[start..i].to_string();
            out.push(Token { tok: if c == b'"' { Tok::Str(text) } else { Tok::Char(text) }, line });
            continue;
        }
        match PUNCTS.iter().find(|p| src[i..].starts_with(**p)) {
            Some(p) => {
                out.push(Token { tok: Tok::Punct(p), line });
                i += p.len();
            }
            None => {
                return Err(FrontendError::Syntax { line, expected: "a token".into() });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line });
    Ok(out)
}

fn check_directive(text: &str, line: u32) -> Result<(), FrontendError> {
    let rest = text[1..].trim_start();
    if let Some(arg) = rest.strip_prefix("include") {
        let arg = arg.trim();
        if let Some(h) = arg.strip_prefix('<').and_then(|a| a.strip_suffix('>')) {
            if ALLOWED_HEADERS.contains(&h.trim()) {
                return Ok(());
            }
        }
        return Err(FrontendError::Unsupported { line, construct: alloc::format!("#include {}", arg) });
    }
    let word: String = rest.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    Err(FrontendError::Unsupported { line, construct: alloc::format!("preprocessor #{}", word) })
}

fn lex_number(s: &str, line: u32) -> Result<(Tok, usize), FrontendError> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut is_float = false;
    if b.len() > 1 && b[0] == b'0' && (b[1] == b'x' || b[1] == b'X') {
        i = 2;
        while i < b.len() && b[i].is_ascii_hexdigit() {
            i += 1;
        }
    } else {
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i < b.len() && b[i] == b'.' {
            is_float = true;
            i += 1;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                j += 1;
            }
            if j < b.len() && b[j].is_ascii_digit() {
                is_float = true;
                i = j;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
    }
    // suffixes
    while i < b.len() && matches!(b[i], b'u' | b'U' | b'l' | b'L' | b'f' | b'F') {
        if matches!(b[i], b'f' | b'F') {
            is_float = true;
        }
        i += 1;
    }
    if i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
        return Err(FrontendError::Syntax { line, expected: "a numeric literal".into() });
    }
    let text = s[..i].to_string();
    Ok((if is_float { Tok::Float(text) } else { Tok::Int(text) }, i))
}
