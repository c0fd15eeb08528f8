use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use super::typing::is_floating;
use crate::cost::EventClass;

/// Header every rendered program starts with.
pub const PRELUDE: &str = "#include <stdio.h>\n#include <stdlib.h>\n#include <math.h>\n";

/// Number of lines in [`PRELUDE`].
pub const PRELUDE_LINES: u32 = 3;

const INDENT: &str = "  ";

/// Which statements receive a coverage marker in an instrumented rendering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MarkerMode {
    None,
    /// Every executable (non-compound) statement.
    All,
    /// Only statements (compound blocks included) starting on these lines.
    Lines(BTreeSet<u32>),
}

/// Result of an instrumented rendering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instrumented {
    pub text: String,
    /// Marker id → line of the statement in the original program.
    pub markers: Vec<u32>,
}

/// Canonical rendering: one statement per line, so that line numbers are
/// stable positions for coverage and insertion.
pub fn render(unit: &TranslationUnit) -> String {
    let mut p = Printer::new(&unit.symbols, MarkerMode::None, false);
    let mut out = String::from(PRELUDE);
    p.items(&unit.items);
    out.push_str(&p.finish());
    out
}

/// Renders a single statement at indentation zero, without the prelude.
pub fn render_stmt(stmt: &Stmt) -> String {
    let mut p = Printer::new(&[], MarkerMode::None, false);
    p.stmt(stmt, 0);
    p.finish()
}

/// Renders global items (declarations and functions) without the prelude.
pub fn render_items(items: &[Item]) -> String {
    let mut p = Printer::new(&[], MarkerMode::None, false);
    p.items(items);
    p.finish()
}

/// Renders an instrumented copy of `unit`.
///
/// Markers bump a per-marker counter; with `events` every evaluated
/// operation bumps the counter of its [`EventClass`]. Counters are written to
/// the file named by `WG_TRACE` at normal process exit, never to the
/// program's own output streams.
pub fn render_instrumented(unit: &TranslationUnit, markers: MarkerMode, events: bool) -> Instrumented {
    let mut p = Printer::new(&unit.symbols, markers, events);
    p.items(&unit.items);
    let body = p.finish();
    let n_markers = p.marker_lines.len().max(1);
    let mut text = String::from(PRELUDE);
    text.push_str(&format!(
        "static unsigned long long __wg_cov[{n}];\n\
         static unsigned long long __wg_ev[{e}];\n\
         __attribute__((destructor)) static void __wg_dump(void) {{\n\
         {i}const char *__wg_path = getenv(\"WG_TRACE\");\n\
         {i}if (!__wg_path) return;\n\
         {i}FILE *__wg_f = fopen(__wg_path, \"w\");\n\
         {i}if (!__wg_f) return;\n\
         {i}for (int __wg_i = 0; __wg_i < {m}; __wg_i++) if (__wg_cov[__wg_i]) fprintf(__wg_f, \"cov %d %llu\\n\", __wg_i, __wg_cov[__wg_i]);\n\
         {i}fprintf(__wg_f, \"ev\");\n\
         {i}for (int __wg_i = 0; __wg_i < {e}; __wg_i++) fprintf(__wg_f, \" %llu\", __wg_ev[__wg_i]);\n\
         {i}fprintf(__wg_f, \"\\nend\\n\");\n\
         {i}fclose(__wg_f);\n\
         }}\n",
        n = n_markers,
        m = p.marker_lines.len(),
        e = EventClass::ALL.len(),
        i = INDENT
    ));
    text.push_str(&body);
    Instrumented { text, markers: p.marker_lines }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Rvalue,
    /// Assigned or incremented place; its memory events move to the parent.
    Lvalue,
    /// Operand of `&`; no memory access happens.
    Address,
}

struct Printer<'a> {
    symbols: &'a [Symbol],
    lines: Vec<String>,
    markers: MarkerMode,
    marker_lines: Vec<u32>,
    events: bool,
    pending: Vec<EventClass>,
    in_global: bool,
}

impl<'a> Printer<'a> {
    fn new(symbols: &'a [Symbol], markers: MarkerMode, events: bool) -> Self {
        Printer {
            symbols,
            lines: Vec::new(),
            markers,
            marker_lines: Vec::new(),
            events,
            pending: Vec::new(),
            in_global: false,
        }
    }

    fn instrumented(&self) -> bool {
        self.markers != MarkerMode::None || self.events
    }

    fn finish(&mut self) -> String {
        let mut s = String::new();
        for l in self.lines.drain(..) {
            s.push_str(&l);
            s.push('\n');
        }
        s
    }

    fn push(&mut self, indent: usize, text: String) {
        let mut l = INDENT.repeat(indent);
        l.push_str(&text);
        self.lines.push(l);
    }

    fn items(&mut self, items: &[Item]) {
        for item in items {
            match item {
                Item::Global(s) => {
                    self.in_global = true;
                    if let StmtKind::Decl(d) = &s.kind {
                        let t = self.decl(d);
                        self.push(0, t);
                    }
                    self.in_global = false;
                }
                Item::Function(f) => self.function(f),
            }
        }
    }

    fn function(&mut self, f: &FunctionDef) {
        let ret = match f.ret {
            Some(t) => t.declare(&f.name),
            None => format!("void {}", f.name),
        };
        let params = if f.params.is_empty() {
            "void".to_string()
        } else {
            f.params.iter().map(|p| p.ty.declare(&p.name)).collect::<Vec<_>>().join(", ")
        };
        self.push(0, format!("{}({}) {{", ret, params));
        if let StmtKind::Compound(items) = &f.body.kind {
            for s in items {
                self.stmt(s, 1);
            }
        }
        self.push(0, "}".to_string());
    }

    fn decl(&mut self, d: &Decl) -> String {
        let mut s = d.ty.declare(&d.name);
        match &d.init {
            None => {}
            Some(Init::Expr(e)) => {
                s.push_str(" = ");
                s.push_str(&self.expr(e, 1, Ctx::Rvalue));
            }
            Some(Init::List(es)) => {
                let parts: Vec<String> = es.iter().map(|e| self.expr(e, 1, Ctx::Rvalue)).collect();
                s.push_str(" = {");
                s.push_str(&parts.join(", "));
                s.push('}');
            }
        }
        s.push(';');
        s
    }

    fn marker_for(&mut self, s: &Stmt) -> Option<String> {
        let wanted = match &self.markers {
            MarkerMode::None => false,
            MarkerMode::All => !matches!(s.kind, StmtKind::Compound(_)),
            MarkerMode::Lines(set) => set.contains(&s.span.start),
        };
        if !wanted {
            return None;
        }
        let id = self.marker_lines.len();
        self.marker_lines.push(s.span.start);
        Some(format!("__wg_cov[{}]++;", id))
    }

    fn stmt(&mut self, s: &Stmt, indent: usize) {
        if let Some(m) = self.marker_for(s) {
            self.push(indent, m);
        }
        match &s.kind {
            StmtKind::Compound(items) => {
                self.push(indent, "{".to_string());
                for it in items {
                    self.stmt(it, indent + 1);
                }
                self.push(indent, "}".to_string());
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                self.if_chain(cond, then_branch, else_branch.as_deref(), indent, "");
            }
            StmtKind::For { init, cond, step, body } => {
                let init = match init {
                    None => String::new(),
                    Some(ForInit::Decl(d)) => {
                        let mut t = match &d.kind {
                            StmtKind::Decl(d) => self.decl(d),
                            _ => String::new(),
                        };
                        t.pop();
                        t
                    }
                    Some(ForInit::Expr(e)) => self.expr(e, 1, Ctx::Rvalue),
                };
                let cond = cond.as_ref().map(|c| self.cond(c)).unwrap_or_default();
                let step = step.as_ref().map(|e| self.expr(e, 1, Ctx::Rvalue)).unwrap_or_default();
                let sep = |t: &str| if t.is_empty() { String::new() } else { format!(" {}", t) };
                let header = format!("for ({};{};{})", init, sep(&cond), sep(&step));
                self.header_with_body(header, body, indent);
            }
            StmtKind::While { cond, body } => {
                let header = format!("while ({})", self.cond(cond));
                self.header_with_body(header, body, indent);
            }
            StmtKind::DoWhile { body, cond } => {
                let closed = self.header_with_body("do".to_string(), body, indent);
                let c = self.cond(cond);
                if closed {
                    self.lines.pop();
                    self.push(indent, format!("}} while ({});", c));
                } else {
                    self.push(indent, format!("while ({});", c));
                }
            }
            StmtKind::Decl(d) => {
                let t = self.decl(d);
                self.push(indent, t);
            }
            StmtKind::Expr(e) => {
                let t = self.expr(e, 1, Ctx::Rvalue);
                self.push(indent, format!("{};", t));
            }
            StmtKind::Return(e) => {
                let t = match e {
                    Some(e) => format!("return {};", self.expr(e, 1, Ctx::Rvalue)),
                    None => "return;".to_string(),
                };
                self.push(indent, t);
            }
        }
    }

    fn if_chain(&mut self, cond: &Expr, then: &Stmt, els: Option<&Stmt>, indent: usize, prefix: &str) {
        let header = format!("{}if ({})", prefix, self.cond(cond));
        let closed = self.header_with_body(header, then, indent);
        let Some(e) = els else { return };
        let else_prefix = if closed {
            self.lines.pop();
            "} else"
        } else {
            "else"
        };
        match &e.kind {
            StmtKind::If { cond, then_branch, else_branch } if !self.instrumented() => {
                let p = format!("{} ", else_prefix);
                self.if_chain(cond, then_branch, else_branch.as_deref(), indent, &p);
            }
            _ => {
                self.header_with_body(else_prefix.to_string(), e, indent);
            }
        }
    }

    /// Emits `header` and its body. Returns true when the last line is the
    /// lone `}` closing the body.
    fn header_with_body(&mut self, header: String, body: &Stmt, indent: usize) -> bool {
        match &body.kind {
            StmtKind::Compound(items) => {
                self.push(indent, format!("{} {{", header));
                for it in items {
                    self.stmt(it, indent + 1);
                }
                self.push(indent, "}".to_string());
                true
            }
            _ if self.instrumented() => {
                self.push(indent, format!("{} {{", header));
                self.stmt(body, indent + 1);
                self.push(indent, "}".to_string());
                true
            }
            _ => {
                self.push(indent, header);
                self.stmt(body, indent + 1);
                false
            }
        }
    }

    fn cond(&mut self, c: &Expr) -> String {
        let t = self.expr(c, 1, Ctx::Rvalue);
        if self.events {
            format!("({}, {})", bump(&[EventClass::Branch]), t)
        } else {
            t
        }
    }

    fn own_events(&self, e: &Expr, ctx: Ctx) -> Vec<EventClass> {
        let class_of = |x: &Expr| if is_floating(self.symbols, x) { EventClass::FpOp } else { EventClass::IntOp };
        match &e.kind {
            ExprKind::Binary { op, lhs, rhs } => {
                if op.is_logical() {
                    alloc::vec![EventClass::Branch]
                } else if is_floating(self.symbols, lhs) || is_floating(self.symbols, rhs) {
                    alloc::vec![EventClass::FpOp]
                } else {
                    alloc::vec![EventClass::IntOp]
                }
            }
            ExprKind::Unary { operand, .. } => alloc::vec![class_of(operand)],
            ExprKind::IncDec { operand, .. } => alloc::vec![class_of(operand)],
            ExprKind::Assign { op, lhs, .. } => {
                if *op == AssignOp::Assign {
                    Vec::new()
                } else {
                    alloc::vec![class_of(lhs)]
                }
            }
            ExprKind::Index { .. } | ExprKind::Deref(_) => {
                if ctx == Ctx::Address {
                    Vec::new()
                } else {
                    alloc::vec![EventClass::MemAccess]
                }
            }
            ExprKind::Call { callee, .. } => match callee {
                Callee::Builtin(b) if b.is_output() => alloc::vec![EventClass::Output],
                _ => alloc::vec![EventClass::Call],
            },
            _ => Vec::new(),
        }
    }

    fn expr(&mut self, e: &Expr, min_prec: u8, ctx: Ctx) -> String {
        let (text, prec) = self.expr_inner(e);
        if !self.events || self.in_global {
            return paren_if(text, prec < min_prec);
        }
        let mut evs = self.own_events(e, ctx);
        if ctx != Ctx::Rvalue {
            self.pending.extend(evs);
            return paren_if(text, prec < min_prec);
        }
        if matches!(e.kind, ExprKind::Assign { .. } | ExprKind::IncDec { .. }) {
            evs.append(&mut self.pending);
        }
        if evs.is_empty() {
            return paren_if(text, prec < min_prec);
        }
        format!("({}, {})", bump(&evs), text)
    }

    /// Rendering of `e` and its precedence level.
    fn expr_inner(&mut self, e: &Expr) -> (String, u8) {
        match &e.kind {
            ExprKind::Literal(l) => (l.text.clone(), if l.text.starts_with('-') { 12 } else { 14 }),
            ExprKind::VarRef { name, .. } => (name.clone(), 14),
            ExprKind::Call { name, args, .. } => {
                let parts: Vec<String> = args.iter().map(|a| self.expr(a, 1, Ctx::Rvalue)).collect();
                (format!("{}({})", name, parts.join(", ")), 13)
            }
            ExprKind::Assign { op, lhs, rhs } => {
                let r = self.expr(rhs, 1, Ctx::Rvalue);
                let l = self.expr(lhs, 12, Ctx::Lvalue);
                (format!("{} {} {}", l, op.spelling(), r), 1)
            }
            ExprKind::IncDec { op, prefix, operand } => {
                let o = self.expr(operand, if *prefix { 12 } else { 13 }, Ctx::Lvalue);
                let sp = if *op == IncDecOp::Inc { "++" } else { "--" };
                if *prefix {
                    (format!("{}{}", sp, o), 12)
                } else {
                    (format!("{}{}", o, sp), 13)
                }
            }
            ExprKind::Index { base, index } => {
                let b = self.expr(base, 13, Ctx::Rvalue);
                let i = self.expr(index, 1, Ctx::Rvalue);
                (format!("{}[{}]", b, i), 13)
            }
            ExprKind::Deref(inner) => {
                let o = self.expr(inner, 12, Ctx::Rvalue);
                (format!("*{}", guard_prefix(o, '*')), 12)
            }
            ExprKind::AddrOf(inner) => {
                let o = self.expr(inner, 12, Ctx::Address);
                (format!("&{}", guard_prefix(o, '&')), 12)
            }
            ExprKind::Cast { ty, expr } => {
                let o = self.expr(expr, 12, Ctx::Rvalue);
                (format!("({}){}", cast_name(ty), o), 12)
            }
            ExprKind::Unary { op, operand } => {
                let o = self.expr(operand, 12, Ctx::Rvalue);
                let sp = op.spelling();
                let o = guard_prefix(o, sp.chars().next().unwrap());
                (format!("{}{}", sp, o), 12)
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                let l = self.expr(lhs, p, Ctx::Rvalue);
                let r = self.expr(rhs, p + 1, Ctx::Rvalue);
                (format!("{} {} {}", l, op.spelling(), r), p)
            }
        }
    }
}

fn cast_name(ty: &super::types::CType) -> String {
    let mut s = ty.to_string();
    if s.ends_with(' ') {
        s.pop();
    }
    s
}

fn paren_if(text: String, cond: bool) -> String {
    if cond {
        format!("({})", text)
    } else {
        text
    }
}

/// Parenthesizes an operand that would fuse with a prefix operator
/// (`- -x`, `&&x`, or `-1.5` reading back as a literal).
fn guard_prefix(o: String, op: char) -> String {
    let clash = match op {
        '-' => o.starts_with('-') || o.starts_with(|c: char| c.is_ascii_digit() || c == '.'),
        '&' => o.starts_with('&'),
        '*' => false,
        _ => false,
    };
    if clash {
        format!("({})", o)
    } else {
        o
    }
}

fn bump(evs: &[EventClass]) -> String {
    let mut counts = [0u32; EventClass::ALL.len()];
    for e in evs {
        counts[*e as usize] += 1;
    }
    let mut parts = Vec::new();
    for (i, c) in counts.iter().enumerate() {
        match c {
            0 => {}
            1 => parts.push(format!("__wg_ev[{}]++", i)),
            n => parts.push(format!("__wg_ev[{}] += {}", i, n)),
        }
    }
    parts.join(", ")
}
