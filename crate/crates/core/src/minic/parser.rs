use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::types::{BaseType, CType, Derivation};
use super::FrontendError;

/// A name visible to a parsed fragment but declared elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct ExternalName {
    pub name: String,
    /// Variable type or function return type.
    pub ty: Option<CType>,
    pub is_function: bool,
}

const KEYWORDS: [&str; 33] = [
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern",
    "float", "for", "goto", "if", "inline", "int", "long", "register", "restrict", "return", "short", "signed",
    "sizeof", "static", "struct", "switch", "typedef", "union", "unsigned", "void", "volatile",
];

/// Keywords that are valid C but outside MiniC.
pub(crate) const UNSUPPORTED_KEYWORDS: [&str; 16] = [
    "struct", "union", "typedef", "switch", "case", "default", "goto", "enum", "break", "continue", "static",
    "extern", "volatile", "register", "sizeof", "auto",
];

const STDINT: [(&str, BaseType); 8] = [
    ("int8_t", BaseType::SChar),
    ("uint8_t", BaseType::UChar),
    ("int16_t", BaseType::Short),
    ("uint16_t", BaseType::UShort),
    ("int32_t", BaseType::Int),
    ("uint32_t", BaseType::UInt),
    ("int64_t", BaseType::LongLong),
    ("uint64_t", BaseType::ULongLong),
];

/// Parses a complete program; `main` must be defined.
pub fn parse(src: &str) -> Result<TranslationUnit, FrontendError> {
    let unit = parse_items(src)?;
    if unit.function("main").is_none() {
        return Err(FrontendError::Syntax { line: 1, expected: "a definition of `main`".into() });
    }
    Ok(unit)
}

/// Parses global declarations and function definitions without requiring `main`.
pub fn parse_items(src: &str) -> Result<TranslationUnit, FrontendError> {
    let toks = tokenize(src)?;
    let mut p = Parser::new(&toks);
    let mut items = Vec::new();
    while !p.at_eof() {
        p.parse_item(&mut items)?;
    }
    Ok(TranslationUnit { items, symbols: p.symbols })
}

/// Parses one statement (the body of an operator) against a set of external names.
/// Returns the statement and the symbol table it resolves into.
pub fn parse_block(src: &str, env: &[ExternalName]) -> Result<(Stmt, Vec<Symbol>), FrontendError> {
    let toks = tokenize(src)?;
    let mut p = Parser::new(&toks);
    for e in env {
        let kind = if e.is_function { SymbolKind::ExternalFunc } else { SymbolKind::ExternalVar };
        p.declare(&e.name, kind, e.ty, 0)?;
    }
    p.depth = 1;
    p.current_fn = Some(u32::MAX);
    let stmts = p.parse_stmt_list_item()?;
    if stmts.len() != 1 {
        return Err(FrontendError::Syntax { line: 1, expected: "a single statement".into() });
    }
    if !p.at_eof() {
        return Err(FrontendError::Syntax { line: p.line(), expected: "end of block".into() });
    }
    let stmt = stmts.into_iter().next().unwrap();
    Ok((stmt, p.symbols))
}

struct TypeSpec {
    base: Option<BaseType>,
    is_const: bool,
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    next_node: NodeId,
    symbols: Vec<Symbol>,
    scopes: Vec<BTreeMap<String, SymbolId>>,
    current_fn: Option<SymbolId>,
    depth: u32,
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Token]) -> Self {
        Parser {
            toks,
            pos: 0,
            next_node: 0,
            symbols: Vec::new(),
            scopes: alloc::vec![BTreeMap::new()],
            current_fn: None,
            depth: 0,
        }
    }

    // ---- token helpers ----

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn line(&self) -> u32 {
        self.toks[self.pos].line
    }

    fn prev_line(&self) -> u32 {
        self.toks[self.pos.saturating_sub(1)].line
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), FrontendError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.syntax(&format!("`{}`", p)))
        }
    }

    fn syntax(&self, expected: &str) -> FrontendError {
        FrontendError::Syntax { line: self.line(), expected: expected.to_string() }
    }

    fn unsupported(&self, construct: &str) -> FrontendError {
        FrontendError::Unsupported { line: self.line(), construct: construct.to_string() }
    }

    fn node(&mut self) -> NodeId {
        let id = self.next_node;
        self.next_node += 1;
        id
    }

    fn check_unsupported_word(&self) -> Result<(), FrontendError> {
        if let Tok::Ident(w) = self.peek() {
            if UNSUPPORTED_KEYWORDS.contains(&w.as_str()) {
                return Err(self.unsupported(w));
            }
        }
        Ok(())
    }

    fn check_unsupported_punct(&self) -> Result<(), FrontendError> {
        if let Tok::Punct(p) = self.peek() {
            let construct = match *p {
                "?" | ":" => Some("conditional operator"),
                "->" | "." => Some("member access"),
                "..." => Some("variadic function"),
                "&=" | "|=" | "^=" | "<<=" | ">>=" => Some("bitwise compound assignment"),
                "," => Some("comma operator"),
                _ => None,
            };
            if let Some(c) = construct {
                return Err(self.unsupported(c));
            }
        }
        Ok(())
    }

    // ---- scopes ----

    fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn declare(
        &mut self,
        name: &str,
        kind: SymbolKind,
        ty: Option<CType>,
        line: u32,
    ) -> Result<SymbolId, FrontendError> {
        if KEYWORDS.contains(&name)
            || Builtin::from_name(name).is_some()
            || name == "stdout"
            || name == "stderr"
            || name.starts_with("__wg")
        {
            return Err(FrontendError::Syntax { line, expected: format!("a non-reserved name instead of `{}`", name) });
        }
        let scope = self.scopes.last_mut().unwrap();
        if scope.contains_key(name) {
            return Err(FrontendError::Redeclared { line, name: name.to_string() });
        }
        let id = self.symbols.len() as SymbolId;
        scope.insert(name.to_string(), id);
        self.symbols.push(Symbol { id, name: name.to_string(), kind, ty, decl_line: line });
        Ok(id)
    }

    // ---- types ----

    fn starts_type(&self) -> bool {
        match self.peek() {
            Tok::Ident(w) => {
                matches!(
                    w.as_str(),
                    "const" | "signed" | "unsigned" | "char" | "short" | "int" | "long" | "float" | "double" | "void"
                ) || STDINT.iter().any(|(n, _)| n == w)
            }
            _ => false,
        }
    }

    fn parse_type_spec(&mut self) -> Result<TypeSpec, FrontendError> {
        let mut is_const = false;
        let mut signedness: Option<bool> = None;
        let mut longs = 0u8;
        let mut short = false;
        let mut word: Option<&'static str> = None;
        let mut stdint: Option<BaseType> = None;
        let start = self.pos;
        while let Tok::Ident(w) = self.peek().clone() {
            match w.as_str() {
                "const" => is_const = true,
                "signed" => signedness = Some(true),
                "unsigned" => signedness = Some(false),
                "long" => longs += 1,
                "short" => short = true,
                "char" | "int" | "float" | "double" | "void" => {
                    if word.is_some() {
                        return Err(self.syntax("a single base type"));
                    }
                    word = Some(match w.as_str() {
                        "char" => "char",
                        "int" => "int",
                        "float" => "float",
                        "double" => "double",
                        _ => "void",
                    });
                }
                "volatile" | "static" | "extern" | "register" | "auto" | "inline" | "restrict" => {
                    return Err(self.unsupported(&w));
                }
                other => {
                    if let Some((_, b)) = STDINT.iter().find(|(n, _)| *n == other) {
                        if stdint.is_some() || word.is_some() {
                            return Err(self.syntax("a single base type"));
                        }
                        stdint = Some(*b);
                    } else {
                        break;
                    }
                }
            }
            self.bump();
        }
        if self.pos == start {
            return Err(self.syntax("a type"));
        }
        if let Some(b) = stdint {
            if signedness.is_some() || longs > 0 || short {
                return Err(self.syntax("a valid type"));
            }
            return Ok(TypeSpec { base: Some(b), is_const });
        }
        let unsigned = signedness == Some(false);
        let base = match (word, longs, short) {
            (Some("void"), 0, false) if signedness.is_none() => None,
            (Some("char"), 0, false) => Some(match signedness {
                None => BaseType::Char,
                Some(true) => BaseType::SChar,
                Some(false) => BaseType::UChar,
            }),
            (Some("int") | None, 0, true) => Some(if unsigned { BaseType::UShort } else { BaseType::Short }),
            (Some("int") | None, 0, false) => Some(if unsigned { BaseType::UInt } else { BaseType::Int }),
            (Some("int") | None, 1, false) => Some(if unsigned { BaseType::ULong } else { BaseType::Long }),
            (Some("int") | None, 2, false) => Some(if unsigned { BaseType::ULongLong } else { BaseType::LongLong }),
            (Some("float"), 0, false) if signedness.is_none() => Some(BaseType::Float),
            (Some("double"), 0, false) if signedness.is_none() => Some(BaseType::Double),
            (Some("double"), 1, false) => return Err(self.unsupported("long double")),
            _ => return Err(self.syntax("a valid type")),
        };
        Ok(TypeSpec { base, is_const })
    }

    /// Parses `*`s, the name, and an optional `[N]`.
    fn parse_declarator(&mut self, spec: &TypeSpec) -> Result<(String, Option<CType>, u32), FrontendError> {
        let mut depth = 0u8;
        while self.eat_punct("*") {
            depth += 1;
            if self.is_word("const") {
                return Err(self.unsupported("const pointer"));
            }
        }
        if self.is_punct("(") {
            return Err(self.unsupported("function pointer"));
        }
        let line = self.line();
        let name = match self.peek().clone() {
            Tok::Ident(n) if !KEYWORDS.contains(&n.as_str()) => {
                self.bump();
                n
            }
            _ => {
                self.check_unsupported_word()?;
                return Err(self.syntax("an identifier"));
            }
        };
        let mut array = None;
        if self.eat_punct("[") {
            let len = match self.bump() {
                Tok::Int(t) => parse_int_literal(&t).filter(|n| *n > 0 && *n <= 1 << 20),
                _ => None,
            };
            let Some(len) = len else {
                return Err(FrontendError::Unsupported { line, construct: "array without constant length".into() });
            };
            self.expect_punct("]")?;
            if self.is_punct("[") {
                return Err(self.unsupported("multi-dimensional array"));
            }
            array = Some(len as u32);
        }
        let ty = match (spec.base, depth, array) {
            (None, 0, _) => None,
            (None, _, _) => return Err(FrontendError::Unsupported { line, construct: "void pointer".into() }),
            (Some(_), _, Some(_)) if depth > 0 => {
                return Err(FrontendError::Unsupported { line, construct: "array of pointers".into() })
            }
            (Some(b), _, Some(n)) => Some(CType::array(b, n)),
            (Some(b), 0, None) => Some(CType::scalar(b)),
            (Some(b), d, None) => {
                Some(CType { base: b, derivation: Derivation::Pointer { depth: d, const_target: spec.is_const } })
            }
        };
        if spec.is_const && !ty.is_some_and(|t| t.is_pointer()) {
            return Err(FrontendError::Unsupported { line, construct: "const object".into() });
        }
        Ok((name, ty, line))
    }

    // ---- items ----

    fn parse_item(&mut self, items: &mut Vec<Item>) -> Result<(), FrontendError> {
        self.check_unsupported_word()?;
        if !self.starts_type() {
            return Err(self.syntax("a declaration"));
        }
        let start_line = self.line();
        let spec = self.parse_type_spec()?;
        let (name, ty, line) = self.parse_declarator(&spec)?;
        if self.is_punct("(") {
            if ty.is_some_and(|t| t.is_array()) {
                return Err(self.syntax("`;` after array declaration"));
            }
            let f = self.parse_function(name, ty, start_line, line)?;
            items.push(Item::Function(f));
            return Ok(());
        }
        let mut first = Some((name, ty, line));
        loop {
            let (name, ty, line) = match first.take() {
                Some(d) => d,
                None => self.parse_declarator(&spec)?,
            };
            let stmt = self.finish_decl(name, ty, line, SymbolKind::Global, start_line)?;
            items.push(Item::Global(stmt));
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(";")?;
            break;
        }
        Ok(())
    }

    fn finish_decl(
        &mut self,
        name: String,
        ty: Option<CType>,
        line: u32,
        kind: SymbolKind,
        start_line: u32,
    ) -> Result<Stmt, FrontendError> {
        let Some(ty) = ty else {
            return Err(FrontendError::Unsupported { line, construct: "void object".into() });
        };
        let init = if self.eat_punct("=") {
            if self.eat_punct("{") {
                if !ty.is_array() {
                    return Err(self.syntax("a scalar initializer"));
                }
                let mut elems = Vec::new();
                if !self.is_punct("}") {
                    loop {
                        elems.push(self.parse_assign()?);
                        if !self.eat_punct(",") || self.is_punct("}") {
                            break;
                        }
                    }
                }
                self.expect_punct("}")?;
                Some(Init::List(elems))
            } else {
                if ty.is_array() {
                    return Err(self.syntax("`{` for an array initializer"));
                }
                Some(Init::Expr(self.parse_assign()?))
            }
        } else {
            None
        };
        // Initializer is resolved before the name enters scope.
        let sym = self.declare(&name, kind, Some(ty), line)?;
        let id = self.node();
        Ok(Stmt {
            id,
            span: Span::new(start_line.min(line), self.prev_line()),
            kind: StmtKind::Decl(Decl { sym, name, ty, init }),
        })
    }

    fn parse_function(
        &mut self,
        name: String,
        ret: Option<CType>,
        start_line: u32,
        line: u32,
    ) -> Result<FunctionDef, FrontendError> {
        self.expect_punct("(")?;
        let mut params_raw: Vec<(String, CType, u32)> = Vec::new();
        if self.is_word("void") && matches!(self.peek_at(1), Tok::Punct(")")) {
            self.bump();
        } else if !self.is_punct(")") {
            loop {
                if self.is_punct("...") {
                    return Err(self.unsupported("variadic function"));
                }
                if !self.starts_type() {
                    return Err(self.syntax("a parameter type"));
                }
                let spec = self.parse_type_spec()?;
                let (pname, pty, pline) = self.parse_declarator(&spec)?;
                let Some(pty) = pty else {
                    return Err(FrontendError::Unsupported { line: pline, construct: "void parameter".into() });
                };
                if pty.is_array() {
                    return Err(FrontendError::Unsupported { line: pline, construct: "array parameter".into() });
                }
                params_raw.push((pname, pty, pline));
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        if self.is_punct(";") {
            return Err(self.unsupported("function prototype"));
        }
        if !self.is_punct("{") {
            return Err(self.syntax("`{` starting a function body"));
        }
        let fsym = self.declare(
            &name,
            SymbolKind::Function { params: params_raw.iter().map(|p| p.1).collect() },
            ret,
            line,
        )?;
        let id = self.node();
        self.scopes.push(BTreeMap::new());
        self.current_fn = Some(fsym);
        let mut params = Vec::new();
        for (pname, pty, pline) in params_raw {
            let sym = self.declare(&pname, SymbolKind::Param { function: fsym }, Some(pty), pline)?;
            params.push(Param { sym, name: pname, ty: pty });
        }
        self.depth = 1;
        let body = self.parse_compound(false)?;
        self.depth = 0;
        self.current_fn = None;
        self.scopes.pop();
        Ok(FunctionDef { id, sym: fsym, name, ret, params, span: Span::new(start_line, body.span.end), body })
    }

    // ---- statements ----

    fn parse_compound(&mut self, new_scope: bool) -> Result<Stmt, FrontendError> {
        let start = self.line();
        self.expect_punct("{")?;
        if new_scope {
            self.scopes.push(BTreeMap::new());
            self.depth += 1;
        }
        let mut stmts = Vec::new();
        while !self.is_punct("}") {
            if self.at_eof() {
                return Err(self.syntax("`}`"));
            }
            stmts.extend(self.parse_stmt_list_item()?);
        }
        let end = self.line();
        self.bump();
        if new_scope {
            self.scopes.pop();
            self.depth -= 1;
        }
        let id = self.node();
        Ok(Stmt { id, span: Span::new(start, end), kind: StmtKind::Compound(stmts) })
    }

    /// A block item: a declaration (possibly several declarators) or a statement.
    fn parse_stmt_list_item(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        if self.starts_type() {
            return self.parse_local_decls();
        }
        Ok(alloc::vec![self.parse_stmt()?])
    }

    fn local_kind(&self) -> SymbolKind {
        SymbolKind::Local { function: self.current_fn.unwrap_or(u32::MAX), depth: self.depth }
    }

    fn parse_local_decls(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        let start_line = self.line();
        let spec = self.parse_type_spec()?;
        let mut out = Vec::new();
        loop {
            let (name, ty, line) = self.parse_declarator(&spec)?;
            if self.is_punct("(") {
                return Err(self.unsupported("nested function declaration"));
            }
            let kind = self.local_kind();
            out.push(self.finish_decl(name, ty, line, kind, start_line)?);
            if self.eat_punct(",") {
                continue;
            }
            self.check_unsupported_punct()?;
            self.expect_punct(";")?;
            break;
        }
        Ok(out)
    }

    /// A statement in a position where declarations are not allowed.
    fn parse_sub_stmt(&mut self) -> Result<Stmt, FrontendError> {
        if self.starts_type() {
            return Err(self.syntax("a statement (declarations need braces here)"));
        }
        self.parse_stmt()
    }

    fn parse_paren_cond(&mut self) -> Result<Expr, FrontendError> {
        self.expect_punct("(")?;
        let e = self.parse_expr()?;
        self.expect_punct(")")?;
        Ok(e)
    }

    fn parse_stmt(&mut self) -> Result<Stmt, FrontendError> {
        self.check_unsupported_word()?;
        let start = self.line();
        if self.is_punct("{") {
            return self.parse_compound(true);
        }
        if self.is_punct(";") {
            return Err(self.unsupported("empty statement"));
        }
        let word = match self.peek() {
            Tok::Ident(w) => Some(w.clone()),
            _ => None,
        };
        let kind = match word.as_deref() {
            Some("if") => {
                self.bump();
                let cond = self.parse_paren_cond()?;
                let then_branch = Box::new(self.parse_sub_stmt()?);
                let else_branch =
                    if self.is_word("else") { self.bump(); Some(Box::new(self.parse_sub_stmt()?)) } else { None };
                StmtKind::If { cond, then_branch, else_branch }
            }
            Some("while") => {
                self.bump();
                let cond = self.parse_paren_cond()?;
                let body = Box::new(self.parse_sub_stmt()?);
                StmtKind::While { cond, body }
            }
            Some("do") => {
                self.bump();
                let body = Box::new(self.parse_sub_stmt()?);
                if !self.is_word("while") {
                    return Err(self.syntax("`while` after do body"));
                }
                self.bump();
                let cond = self.parse_paren_cond()?;
                self.expect_punct(";")?;
                StmtKind::DoWhile { body, cond }
            }
            Some("for") => {
                self.bump();
                self.expect_punct("(")?;
                self.scopes.push(BTreeMap::new());
                self.depth += 1;
                let init = if self.eat_punct(";") {
                    None
                } else if self.starts_type() {
                    let mut decls = self.parse_local_decls()?;
                    if decls.len() != 1 {
                        return Err(self.unsupported("multiple declarations in for initializer"));
                    }
                    Some(ForInit::Decl(Box::new(decls.pop().unwrap())))
                } else {
                    let e = self.parse_expr()?;
                    self.check_unsupported_punct()?;
                    self.expect_punct(";")?;
                    Some(ForInit::Expr(e))
                };
                let cond = if self.is_punct(";") { None } else { Some(self.parse_expr()?) };
                self.check_unsupported_punct()?;
                self.expect_punct(";")?;
                let step = if self.is_punct(")") { None } else { Some(self.parse_expr()?) };
                self.check_unsupported_punct()?;
                self.expect_punct(")")?;
                let body = Box::new(self.parse_sub_stmt()?);
                self.scopes.pop();
                self.depth -= 1;
                StmtKind::For { init, cond, step, body }
            }
            Some("return") => {
                self.bump();
                let e = if self.is_punct(";") { None } else { Some(self.parse_expr()?) };
                self.check_unsupported_punct()?;
                self.expect_punct(";")?;
                StmtKind::Return(e)
            }
            Some("else") => return Err(self.syntax("a statement (dangling `else`)")),
            _ => {
                let e = self.parse_expr()?;
                self.check_unsupported_punct()?;
                self.expect_punct(";")?;
                StmtKind::Expr(e)
            }
        };
        let id = self.node();
        Ok(Stmt { id, span: Span::new(start, self.prev_line()), kind })
    }

    // ---- expressions ----

    fn mk(&mut self, start: u32, kind: ExprKind) -> Expr {
        let id = self.node();
        Expr { id, span: Span::new(start, self.prev_line().max(start)), kind }
    }

    fn parse_expr(&mut self) -> Result<Expr, FrontendError> {
        self.parse_assign()
    }

    fn parse_assign(&mut self) -> Result<Expr, FrontendError> {
        let start = self.line();
        let lhs = self.parse_binary(2)?;
        let op = match self.peek() {
            Tok::Punct("=") => AssignOp::Assign,
            Tok::Punct("+=") => AssignOp::Add,
            Tok::Punct("-=") => AssignOp::Sub,
            Tok::Punct("*=") => AssignOp::Mul,
            Tok::Punct("/=") => AssignOp::Div,
            Tok::Punct("%=") => AssignOp::Rem,
            _ => {
                self.check_unsupported_punct_in_expr()?;
                return Ok(lhs);
            }
        };
        if !is_lvalue(&lhs) {
            return Err(self.syntax("an assignable expression before the assignment operator"));
        }
        self.bump();
        let rhs = self.parse_assign()?;
        Ok(self.mk(start, ExprKind::Assign { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }))
    }

    fn check_unsupported_punct_in_expr(&self) -> Result<(), FrontendError> {
        if let Tok::Punct(p) = self.peek() {
            if matches!(*p, "?" | "&=" | "|=" | "^=" | "<<=" | ">>=" | "->" | ".") {
                return self.check_unsupported_punct();
            }
        }
        Ok(())
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else { return None };
        Some(match *p {
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "<<" => BinOp::Shl,
            ">>" => BinOp::Shr,
            "<" => BinOp::Lt,
            ">" => BinOp::Gt,
            "<=" => BinOp::Le,
            ">=" => BinOp::Ge,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "&" => BinOp::BitAnd,
            "^" => BinOp::BitXor,
            "|" => BinOp::BitOr,
            "&&" => BinOp::LogAnd,
            "||" => BinOp::LogOr,
            _ => return None,
        })
    }

    fn parse_binary(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let start = self.line();
        let mut lhs = self.parse_unary()?;
        while let Some(op) = self.peek_binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.parse_binary(prec + 1)?;
            lhs = self.mk(start, ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) });
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, FrontendError> {
        let start = self.line();
        self.check_unsupported_word()?;
        let Tok::Punct(p) = self.peek().clone() else {
            return self.parse_postfix();
        };
        match p {
            "++" | "--" => {
                self.bump();
                let operand = self.parse_unary()?;
                if !is_lvalue(&operand) {
                    return Err(self.syntax("an assignable operand"));
                }
                let op = if p == "++" { IncDecOp::Inc } else { IncDecOp::Dec };
                Ok(self.mk(start, ExprKind::IncDec { op, prefix: true, operand: Box::new(operand) }))
            }
            "-" if matches!(self.peek_at(1), Tok::Int(_) | Tok::Float(_)) && !self.followed_by_postfix(2) => {
                self.bump();
                let (kind, text) = match self.bump() {
                    Tok::Int(t) => (LitKind::Int, t),
                    Tok::Float(t) => (LitKind::Float, t),
                    _ => unreachable!(),
                };
                Ok(self.mk(start, ExprKind::Literal(Literal { kind, text: format!("-{}", text) })))
            }
            "-" | "!" | "~" => {
                self.bump();
                let operand = self.parse_unary()?;
                let op = match p {
                    "-" => UnOp::Neg,
                    "!" => UnOp::Not,
                    _ => UnOp::BitNot,
                };
                Ok(self.mk(start, ExprKind::Unary { op, operand: Box::new(operand) }))
            }
            "+" => {
                self.bump();
                self.parse_unary()
            }
            "*" => {
                self.bump();
                let operand = self.parse_unary()?;
                Ok(self.mk(start, ExprKind::Deref(Box::new(operand))))
            }
            "&" => {
                self.bump();
                let operand = self.parse_unary()?;
                if !is_lvalue(&operand) {
                    return Err(self.syntax("an addressable operand"));
                }
                Ok(self.mk(start, ExprKind::AddrOf(Box::new(operand))))
            }
            "(" if self.paren_starts_type() => {
                self.bump();
                let spec = self.parse_type_spec()?;
                let mut depth = 0u8;
                while self.eat_punct("*") {
                    depth += 1;
                }
                self.expect_punct(")")?;
                let ty = match (spec.base, depth) {
                    (Some(b), 0) if !spec.is_const => CType::scalar(b),
                    (Some(b), d) if d > 0 => {
                        CType { base: b, derivation: Derivation::Pointer { depth: d, const_target: spec.is_const } }
                    }
                    _ => return Err(self.unsupported("cast to this type")),
                };
                let expr = self.parse_unary()?;
                Ok(self.mk(start, ExprKind::Cast { ty, expr: Box::new(expr) }))
            }
            _ => self.parse_postfix(),
        }
    }

    fn followed_by_postfix(&self, n: usize) -> bool {
        matches!(self.peek_at(n), Tok::Punct("[") | Tok::Punct("++") | Tok::Punct("--"))
    }

    fn paren_starts_type(&self) -> bool {
        match self.peek_at(1) {
            Tok::Ident(w) => {
                matches!(
                    w.as_str(),
                    "const" | "signed" | "unsigned" | "char" | "short" | "int" | "long" | "float" | "double" | "void"
                ) || STDINT.iter().any(|(n, _)| n == w)
            }
            _ => false,
        }
    }

    fn parse_postfix(&mut self) -> Result<Expr, FrontendError> {
        let start = self.line();
        let mut e = self.parse_primary()?;
        loop {
            if self.eat_punct("[") {
                let index = self.parse_expr()?;
                self.expect_punct("]")?;
                e = self.mk(start, ExprKind::Index { base: Box::new(e), index: Box::new(index) });
            } else if self.is_punct("++") || self.is_punct("--") {
                let op = if self.is_punct("++") { IncDecOp::Inc } else { IncDecOp::Dec };
                if !is_lvalue(&e) {
                    return Err(self.syntax("an assignable operand"));
                }
                self.bump();
                e = self.mk(start, ExprKind::IncDec { op, prefix: false, operand: Box::new(e) });
            } else if self.is_punct("(") {
                return Err(self.unsupported("call through an expression"));
            } else {
                self.check_unsupported_punct_in_expr()?;
                break;
            }
        }
        Ok(e)
    }

    fn parse_primary(&mut self) -> Result<Expr, FrontendError> {
        let start = self.line();
        match self.peek().clone() {
            Tok::Int(t) => {
                self.bump();
                Ok(self.mk(start, ExprKind::Literal(Literal { kind: LitKind::Int, text: t })))
            }
            Tok::Float(t) => {
                self.bump();
                Ok(self.mk(start, ExprKind::Literal(Literal { kind: LitKind::Float, text: t })))
            }
            Tok::Char(t) => {
                self.bump();
                Ok(self.mk(start, ExprKind::Literal(Literal { kind: LitKind::Char, text: t })))
            }
            Tok::Str(t) => {
                self.bump();
                Ok(self.mk(start, ExprKind::Literal(Literal { kind: LitKind::Str, text: t })))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.parse_expr()?;
                self.check_unsupported_punct()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.check_unsupported_word()?;
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(self.syntax("an expression"));
                }
                self.bump();
                if name == "stdout" || name == "stderr" {
                    return Ok(self.mk(start, ExprKind::Literal(Literal { kind: LitKind::Stream, text: name })));
                }
                if self.is_punct("(") {
                    return self.parse_call(name, start);
                }
                if Builtin::from_name(&name).is_some() {
                    return Err(FrontendError::Unsupported { line: start, construct: "function pointer".into() });
                }
                let Some(sym) = self.lookup(&name) else {
                    return Err(FrontendError::Unresolved { line: start, name });
                };
                if self.symbols[sym as usize].kind.is_function() {
                    return Err(FrontendError::Unsupported { line: start, construct: "function pointer".into() });
                }
                Ok(self.mk(start, ExprKind::VarRef { name, sym }))
            }
            _ => {
                self.check_unsupported_punct()?;
                Err(self.syntax("an expression"))
            }
        }
    }

    fn parse_call(&mut self, name: String, start: u32) -> Result<Expr, FrontendError> {
        let callee = if let Some(b) = Builtin::from_name(&name) {
            Callee::Builtin(b)
        } else {
            match self.lookup(&name) {
                Some(sym) if self.symbols[sym as usize].kind.is_function() => Callee::User(sym),
                Some(_) => return Err(FrontendError::Unsupported { line: start, construct: "function pointer".into() }),
                None => return Err(FrontendError::Unresolved { line: start, name }),
            }
        };
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if !self.is_punct(")") {
            loop {
                args.push(self.parse_assign()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        if let Callee::Builtin(b) = callee {
            let (min, max) = b.arity();
            if args.len() < min || max.is_some_and(|m| args.len() > m) {
                return Err(FrontendError::Syntax { line: start, expected: format!("{} arguments to `{}`", min, name) });
            }
        }
        if let Callee::User(sym) = callee {
            if let SymbolKind::Function { params } = &self.symbols[sym as usize].kind {
                if params.len() != args.len() {
                    return Err(FrontendError::Syntax {
                        line: start,
                        expected: format!("{} arguments to `{}`", params.len(), name),
                    });
                }
            }
        }
        Ok(self.mk(start, ExprKind::Call { name, callee, args }))
    }
}

fn is_lvalue(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::VarRef { .. } | ExprKind::Index { .. } | ExprKind::Deref(_))
}

/// Value of a decimal / hex / octal integer literal, ignoring suffixes.
pub fn parse_int_literal(text: &str) -> Option<u64> {
    let t = text.trim_end_matches(['u', 'U', 'l', 'L']);
    if let Some(h) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(h, 16).ok()
    } else if t.len() > 1 && t.starts_with('0') {
        u64::from_str_radix(&t[1..], 8).ok()
    } else {
        t.parse().ok()
    }
}
