//! Block-granularity operators and their contexts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::minic::visit::{child_stmts, own_exprs, walk_expr, walk_stmt_exprs, walk_stmts};
use crate::minic::{
    parse_block, parse_items, render_items, render_stmt, AssignOp, CType, Callee, Expr, ExprKind, ExternalName,
    FrontendError, Item, NodeId, Span, Stmt, StmtKind, Symbol, SymbolId, SymbolKind, TranslationUnit, UnOp,
};

/// Default cap on the rendered size of an operator.
pub const DEFAULT_MAX_OPERATOR_LINES: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    Sequential,
    Branching,
    Looping,
    Mixed,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Sequential => "Sequential",
            OperatorKind::Branching => "Branching",
            OperatorKind::Looping => "Looping",
            OperatorKind::Mixed => "Mixed",
        }
    }

    pub const ALL: [OperatorKind; 4] =
        [OperatorKind::Sequential, OperatorKind::Branching, OperatorKind::Looping, OperatorKind::Mixed];
}

/// Kind of a block root, or `None` for statements that are not blocks.
pub fn classify(s: &Stmt) -> Option<OperatorKind> {
    match &s.kind {
        StmtKind::If { .. } => Some(OperatorKind::Branching),
        StmtKind::For { .. } | StmtKind::While { .. } | StmtKind::DoWhile { .. } => Some(OperatorKind::Looping),
        StmtKind::Compound(_) => {
            let mut control = false;
            for c in child_stmts(s) {
                walk_stmts(c, &mut |d| control |= d.is_control());
            }
            Some(if control { OperatorKind::Mixed } else { OperatorKind::Sequential })
        }
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    PreVar,
    PreFunc,
    PostVar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextEntry {
    pub name: String,
    /// Variable type, or a function's return type (`None` for `void`).
    pub ctype: Option<CType>,
    pub role: Role,
    /// Occurrences inside the block as (node id, line) in the provenance program.
    pub positions: Vec<(NodeId, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub program_id: String,
    pub span: Span,
    pub generation: u64,
}

/// Static operation counts, used to tell floating-point-heavy operators apart.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpStats {
    pub int_ops: u32,
    pub fp_ops: u32,
}

impl OpStats {
    pub fn fp_heavy(&self) -> bool {
        self.fp_ops > self.int_ops
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operator {
    pub op_id: String,
    pub kind: OperatorKind,
    /// The block, rendered at indentation zero.
    pub source: String,
    pub pre_context: Vec<ContextEntry>,
    pub post_context: Vec<ContextEntry>,
    /// Function definitions (and the globals they use) the block calls into,
    /// copied from the provenance program.
    #[serde(default)]
    pub support: String,
    #[serde(default)]
    pub penalty: u32,
    pub provenance: Provenance,
    #[serde(default)]
    pub stats: OpStats,
}

impl Operator {
    /// The names the block needs from its surroundings, each once.
    pub fn external_names(&self) -> Vec<ExternalName> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for e in self.pre_context.iter().chain(&self.post_context) {
            if seen.insert(e.name.clone()) {
                out.push(ExternalName { name: e.name.clone(), ty: e.ctype, is_function: e.role == Role::PreFunc });
            }
        }
        out
    }

    /// Re-parses the block against its contexts.
    pub fn block(&self) -> Result<(Stmt, Vec<Symbol>), FrontendError> {
        parse_block(&self.source, &self.external_names())
    }

    /// Parses the copied function definitions and globals.
    pub fn support_unit(&self) -> Result<TranslationUnit, FrontendError> {
        parse_items(&self.support)
    }

    pub fn line_count(&self) -> u32 {
        crate::minic::count_lines(&self.source)
    }

    pub fn entries(&self) -> impl Iterator<Item = &ContextEntry> {
        self.pre_context.iter().chain(&self.post_context)
    }
}

/// Truncated SHA-256 of an operator's source text.
pub fn op_id(source: &str) -> String {
    let digest = Sha256::digest(source.as_bytes());
    digest.iter().take(8).map(|b| format!("{:02x}", b)).collect()
}

#[derive(Default)]
struct Access {
    order: Vec<SymbolId>,
    read_first: BTreeSet<SymbolId>,
    written: BTreeSet<SymbolId>,
    positions: BTreeMap<SymbolId, Vec<(NodeId, u32)>>,
}

impl Access {
    fn touch(&mut self, sym: SymbolId, read: bool) {
        if !self.order.contains(&sym) {
            self.order.push(sym);
            if read {
                self.read_first.insert(sym);
            }
        }
    }
}

struct ContextWalk<'a> {
    symbols: &'a [Symbol],
    inside: BTreeSet<SymbolId>,
    acc: Access,
}

impl<'a> ContextWalk<'a> {
    fn external(&self, sym: SymbolId) -> bool {
        !self.inside.contains(&sym)
    }

    fn read(&mut self, sym: SymbolId) {
        if self.external(sym) {
            self.acc.touch(sym, true);
        }
    }

    fn write(&mut self, sym: SymbolId) {
        if self.external(sym) {
            self.acc.touch(sym, false);
            self.acc.written.insert(sym);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Compound(items) => items.iter().for_each(|i| self.stmt(i)),
            StmtKind::If { cond, then_branch, else_branch } => {
                self.expr(cond);
                self.stmt(then_branch);
                if let Some(e) = else_branch {
                    self.stmt(e);
                }
            }
            StmtKind::For { init, cond, step, body } => {
                match init {
                    Some(crate::minic::ForInit::Decl(d)) => self.stmt(d),
                    Some(crate::minic::ForInit::Expr(e)) => self.expr(e),
                    None => {}
                }
                if let Some(c) = cond {
                    self.expr(c);
                }
                self.stmt(body);
                if let Some(c) = step {
                    self.expr(c);
                }
            }
            StmtKind::While { cond, body } => {
                self.expr(cond);
                self.stmt(body);
            }
            StmtKind::DoWhile { body, cond } => {
                self.stmt(body);
                self.expr(cond);
            }
            StmtKind::Decl(_) | StmtKind::Expr(_) | StmtKind::Return(_) => {
                for e in own_exprs(s) {
                    self.expr(e);
                }
            }
        }
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::VarRef { sym, .. } => self.read(*sym),
            ExprKind::Assign { op, lhs, rhs } => {
                self.expr(rhs);
                self.place(lhs, *op != AssignOp::Assign);
            }
            ExprKind::IncDec { operand, .. } => self.place(operand, true),
            ExprKind::Call { callee, args, .. } => {
                if let Callee::User(sym) = callee {
                    self.read(*sym);
                }
                args.iter().for_each(|a| self.expr(a));
            }
            _ => e.children().into_iter().for_each(|c| self.expr(c)),
        }
    }

    /// An assigned place; `reads` when the old value is used too.
    fn place(&mut self, e: &Expr, reads: bool) {
        match &e.kind {
            ExprKind::VarRef { sym, .. } => {
                if reads {
                    self.read(*sym);
                }
                self.write(*sym);
            }
            ExprKind::Index { base, index } => {
                self.expr(index);
                match &base.kind {
                    ExprKind::VarRef { sym, .. } if self.is_array(*sym) => {
                        if reads {
                            self.read(*sym);
                        }
                        self.write(*sym);
                    }
                    _ => {
                        self.expr(base);
                        self.write_base(base);
                    }
                }
            }
            ExprKind::Deref(inner) => {
                self.expr(inner);
                self.write_base(inner);
            }
            _ => self.expr(e),
        }
    }

    fn write_base(&mut self, e: &Expr) {
        if let Some(sym) = base_var(e) {
            self.write(sym);
        }
    }

    fn is_array(&self, sym: SymbolId) -> bool {
        self.symbols.get(sym as usize).and_then(|s| s.ty).is_some_and(|t| t.is_array())
    }
}

/// The variable a pointer expression is based on (`p`, `p + 1`, `&a[2]`).
fn base_var(e: &Expr) -> Option<SymbolId> {
    match &e.kind {
        ExprKind::VarRef { sym, .. } => Some(*sym),
        ExprKind::Binary { lhs, .. } => base_var(lhs),
        ExprKind::Cast { expr, .. } => base_var(expr),
        ExprKind::AddrOf(inner) | ExprKind::Deref(inner) => base_var(inner),
        ExprKind::Index { base, .. } => base_var(base),
        _ => None,
    }
}

/// Variables declared anywhere inside `block`.
pub fn declared_inside(block: &Stmt) -> BTreeSet<SymbolId> {
    let mut out = BTreeSet::new();
    walk_stmts(block, &mut |s| {
        if let StmtKind::Decl(d) = &s.kind {
            out.insert(d.sym);
        }
    });
    out
}

/// Pre- and post-context of `block`; `symbols` is the table it was parsed into.
///
/// Accesses are visited in evaluation order. An external variable whose first
/// access reads it is pre-context; one assigned anywhere is post-context; both
/// can hold. Called user functions are pre-context.
pub fn compute_contexts(block: &Stmt, symbols: &[Symbol]) -> (Vec<ContextEntry>, Vec<ContextEntry>) {
    let mut w = ContextWalk { symbols, inside: declared_inside(block), acc: Access::default() };
    w.stmt(block);
    walk_stmt_exprs(block, &mut |e| {
        let sym = match &e.kind {
            ExprKind::VarRef { sym, .. } => *sym,
            ExprKind::Call { callee: Callee::User(sym), .. } => *sym,
            _ => return,
        };
        if w.external(sym) {
            w.acc.positions.entry(sym).or_default().push((e.id, e.span.start));
        }
    });
    let mut pre = Vec::new();
    let mut post = Vec::new();
    for sym in &w.acc.order {
        let s = &symbols[*sym as usize];
        let positions = w.acc.positions.get(sym).cloned().unwrap_or_default();
        let entry = |role| ContextEntry { name: s.name.clone(), ctype: s.ty, role, positions: positions.clone() };
        if s.kind.is_function() {
            pre.push(entry(Role::PreFunc));
            continue;
        }
        if w.acc.read_first.contains(sym) {
            pre.push(entry(Role::PreVar));
        }
        if w.acc.written.contains(sym) {
            post.push(entry(Role::PostVar));
        }
    }
    (pre, post)
}

/// Integer and floating-point operation counts in `block`.
pub fn op_stats(block: &Stmt, symbols: &[Symbol]) -> OpStats {
    use crate::minic::is_floating;
    let mut st = OpStats::default();
    let mut bump = |fp: bool| {
        if fp {
            st.fp_ops += 1;
        } else {
            st.int_ops += 1;
        }
    };
    walk_stmt_exprs(block, &mut |e| match &e.kind {
        ExprKind::Binary { op, lhs, rhs } if !op.is_logical() => {
            bump(is_floating(symbols, lhs) || is_floating(symbols, rhs))
        }
        ExprKind::Assign { op, lhs, .. } if *op != AssignOp::Assign => bump(is_floating(symbols, lhs)),
        ExprKind::IncDec { operand, .. } => bump(is_floating(symbols, operand)),
        ExprKind::Unary { op: UnOp::Neg, operand } => bump(is_floating(symbols, operand)),
        ExprKind::Unary { op: UnOp::BitNot, .. } => bump(false),
        _ => {}
    });
    st
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractOptions {
    pub max_operator_lines: u32,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { max_operator_lines: DEFAULT_MAX_OPERATOR_LINES }
    }
}

/// Every qualifying block of `unit` as an operator, deduplicated by id, in
/// source order.
///
/// Blocks that return or call `main` are skipped since they cannot be moved
/// into another function; so are empty compounds and blocks longer than the
/// line cap.
pub fn extract_operators(
    unit: &TranslationUnit,
    program_id: &str,
    generation: u64,
    opts: &ExtractOptions,
) -> Vec<Operator> {
    let mut out: Vec<Operator> = Vec::new();
    let mut seen = BTreeSet::new();
    for f in unit.functions() {
        walk_stmts(&f.body, &mut |s| {
            let Some(kind) = classify(s) else { return };
            if matches!(&s.kind, StmtKind::Compound(items) if items.is_empty()) || !movable(s, unit) {
                return;
            }
            let source = render_stmt(s);
            if crate::minic::count_lines(&source) > opts.max_operator_lines {
                return;
            }
            let id = op_id(&source);
            if !seen.insert(id.clone()) {
                return;
            }
            let (pre, post) = compute_contexts(s, &unit.symbols);
            let support = support_for(s, unit);
            out.push(Operator {
                op_id: id,
                kind,
                source,
                pre_context: pre,
                post_context: post,
                support,
                penalty: 0,
                provenance: Provenance { program_id: program_id.into(), span: s.span, generation },
                stats: op_stats(s, &unit.symbols),
            });
        });
    }
    out
}

fn movable(s: &Stmt, unit: &TranslationUnit) -> bool {
    let mut ok = true;
    walk_stmts(s, &mut |st| ok &= !matches!(st.kind, StmtKind::Return(_)));
    walk_stmt_exprs(s, &mut |e| {
        if let ExprKind::Call { callee: Callee::User(sym), .. } = &e.kind {
            ok &= unit.symbol(*sym).name != "main";
        }
    });
    ok
}

fn called_functions(s: &Stmt, out: &mut BTreeSet<SymbolId>) {
    walk_stmt_exprs(s, &mut |e| {
        if let ExprKind::Call { callee: Callee::User(sym), .. } = &e.kind {
            out.insert(*sym);
        }
    });
}

fn referenced_globals(s: &Stmt, unit: &TranslationUnit, out: &mut BTreeSet<SymbolId>) {
    walk_stmt_exprs(s, &mut |e| {
        walk_expr(e, &mut |x| {
            if let ExprKind::VarRef { sym, .. } = &x.kind {
                if unit.symbol(*sym).kind == SymbolKind::Global {
                    out.insert(*sym);
                }
            }
        })
    });
}

/// Renders the definitions of every function `block` calls, transitively,
/// together with the globals those functions use, in source order.
fn support_for(block: &Stmt, unit: &TranslationUnit) -> String {
    let mut funcs = BTreeSet::new();
    called_functions(block, &mut funcs);
    let mut globals = BTreeSet::new();
    let mut work: Vec<SymbolId> = funcs.iter().copied().collect();
    while let Some(sym) = work.pop() {
        let Some(f) = unit.functions().find(|f| f.sym == sym) else { continue };
        let mut callees = BTreeSet::new();
        called_functions(&f.body, &mut callees);
        for c in callees {
            if funcs.insert(c) {
                work.push(c);
            }
        }
        referenced_globals(&f.body, unit, &mut globals);
    }
    // globals can use other globals in their initializers
    loop {
        let mut more = BTreeSet::new();
        for item in &unit.items {
            if let Item::Global(g) = item {
                if g.as_decl().is_some_and(|d| globals.contains(&d.sym)) {
                    referenced_globals(g, unit, &mut more);
                }
            }
        }
        let before = globals.len();
        globals.extend(more);
        if globals.len() == before {
            break;
        }
    }
    if funcs.is_empty() {
        return String::new();
    }
    let items: Vec<Item> = unit
        .items
        .iter()
        .filter(|item| match item {
            Item::Global(g) => g.as_decl().is_some_and(|d| globals.contains(&d.sym)),
            Item::Function(f) => funcs.contains(&f.sym),
        })
        .cloned()
        .collect();
    render_items(&items)
}
