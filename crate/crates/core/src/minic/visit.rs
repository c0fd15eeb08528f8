//! Tree walks over the MiniC AST.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::*;
use super::NodeInfo;

/// Sub-statements of `s` (not including expressions).
pub fn child_stmts(s: &Stmt) -> Vec<&Stmt> {
    match &s.kind {
        StmtKind::Compound(items) => items.iter().collect(),
        StmtKind::If { then_branch, else_branch, .. } => {
            let mut v = alloc::vec![&**then_branch];
            if let Some(e) = else_branch {
                v.push(&**e);
            }
            v
        }
        StmtKind::For { init, body, .. } => {
            let mut v = Vec::new();
            if let Some(ForInit::Decl(d)) = init {
                v.push(&**d);
            }
            v.push(&**body);
            v
        }
        StmtKind::While { body, .. } | StmtKind::DoWhile { body, .. } => alloc::vec![&**body],
        StmtKind::Decl(_) | StmtKind::Expr(_) | StmtKind::Return(_) => Vec::new(),
    }
}

/// Expressions directly owned by `s`, in evaluation order.
pub fn own_exprs(s: &Stmt) -> Vec<&Expr> {
    match &s.kind {
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } | StmtKind::DoWhile { cond, .. } => {
            alloc::vec![cond]
        }
        StmtKind::For { init, cond, step, .. } => {
            let mut v = Vec::new();
            if let Some(ForInit::Expr(e)) = init {
                v.push(e);
            }
            v.extend(cond.iter());
            v.extend(step.iter());
            v
        }
        StmtKind::Decl(d) => match &d.init {
            None => Vec::new(),
            Some(Init::Expr(e)) => alloc::vec![e],
            Some(Init::List(es)) => es.iter().collect(),
        },
        StmtKind::Expr(e) => alloc::vec![e],
        StmtKind::Return(e) => e.iter().collect(),
        StmtKind::Compound(_) => Vec::new(),
    }
}

/// Pre-order walk over `s` and all nested statements.
pub fn walk_stmts<'a>(s: &'a Stmt, f: &mut impl FnMut(&'a Stmt)) {
    f(s);
    for c in child_stmts(s) {
        walk_stmts(c, f);
    }
}

/// Pre-order walk over an expression tree.
pub fn walk_expr<'a>(e: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
    f(e);
    for c in e.children() {
        walk_expr(c, f);
    }
}

/// Every expression node under `s`.
pub fn walk_stmt_exprs<'a>(s: &'a Stmt, f: &mut impl FnMut(&'a Expr)) {
    walk_stmts(s, &mut |st| {
        for e in own_exprs(st) {
            walk_expr(e, f);
        }
    });
}

pub(crate) fn collect_nodes_stmt(s: &Stmt, parent: Option<NodeId>, out: &mut Vec<NodeInfo>) {
    out.push(NodeInfo { id: s.id, kind: s.node_kind(), span: s.span, parent });
    for e in own_exprs(s) {
        collect_nodes_expr(e, Some(s.id), out);
    }
    for c in child_stmts(s) {
        collect_nodes_stmt(c, Some(s.id), out);
    }
}

fn collect_nodes_expr(e: &Expr, parent: Option<NodeId>, out: &mut Vec<NodeInfo>) {
    out.push(NodeInfo { id: e.id, kind: e.node_kind(), span: e.span, parent });
    for c in e.children() {
        collect_nodes_expr(c, Some(e.id), out);
    }
}

// ---- renaming ----

/// Renames declarations, references and calls whose symbol is in `map`.
pub fn rename_stmt(s: &mut Stmt, map: &BTreeMap<SymbolId, String>) {
    match &mut s.kind {
        StmtKind::Compound(items) => items.iter_mut().for_each(|i| rename_stmt(i, map)),
        StmtKind::If { cond, then_branch, else_branch } => {
            rename_expr(cond, map);
            rename_stmt(then_branch, map);
            if let Some(e) = else_branch {
                rename_stmt(e, map);
            }
        }
        StmtKind::For { init, cond, step, body } => {
            match init {
                Some(ForInit::Decl(d)) => rename_stmt(d, map),
                Some(ForInit::Expr(e)) => rename_expr(e, map),
                None => {}
            }
            if let Some(c) = cond {
                rename_expr(c, map);
            }
            if let Some(c) = step {
                rename_expr(c, map);
            }
            rename_stmt(body, map);
        }
        StmtKind::While { cond, body } | StmtKind::DoWhile { body, cond } => {
            rename_expr(cond, map);
            rename_stmt(body, map);
        }
        StmtKind::Decl(d) => {
            if let Some(n) = map.get(&d.sym) {
                d.name = n.clone();
            }
            match &mut d.init {
                Some(Init::Expr(e)) => rename_expr(e, map),
                Some(Init::List(es)) => es.iter_mut().for_each(|e| rename_expr(e, map)),
                None => {}
            }
        }
        StmtKind::Expr(e) => rename_expr(e, map),
        StmtKind::Return(e) => {
            if let Some(e) = e {
                rename_expr(e, map);
            }
        }
    }
}

pub fn rename_expr(e: &mut Expr, map: &BTreeMap<SymbolId, String>) {
    match &mut e.kind {
        ExprKind::Literal(_) => {}
        ExprKind::VarRef { name, sym } => {
            if let Some(n) = map.get(sym) {
                *name = n.clone();
            }
        }
        ExprKind::Call { name, callee, args } => {
            if let Callee::User(sym) = callee {
                if let Some(n) = map.get(sym) {
                    *name = n.clone();
                }
            }
            args.iter_mut().for_each(|a| rename_expr(a, map));
        }
        ExprKind::Assign { lhs, rhs, .. } | ExprKind::Binary { lhs, rhs, .. } => {
            rename_expr(lhs, map);
            rename_expr(rhs, map);
        }
        ExprKind::Index { base, index } => {
            rename_expr(base, map);
            rename_expr(index, map);
        }
        ExprKind::IncDec { operand, .. }
        | ExprKind::Deref(operand)
        | ExprKind::AddrOf(operand)
        | ExprKind::Cast { expr: operand, .. }
        | ExprKind::Unary { operand, .. } => rename_expr(operand, map),
    }
}

/// Renames inside global items, including function names and parameters.
pub fn rename_items(items: &mut [Item], map: &BTreeMap<SymbolId, String>) {
    for item in items {
        match item {
            Item::Global(s) => rename_stmt(s, map),
            Item::Function(f) => {
                if let Some(n) = map.get(&f.sym) {
                    f.name = n.clone();
                }
                for p in &mut f.params {
                    if let Some(n) = map.get(&p.sym) {
                        p.name = n.clone();
                    }
                }
                rename_stmt(&mut f.body, map);
            }
        }
    }
}

// ---- structural shape ----

pub(crate) fn shape_unit(unit: &TranslationUnit) -> String {
    let mut s = String::new();
    for item in &unit.items {
        match item {
            Item::Global(st) => shape_stmt(st, &mut s),
            Item::Function(f) => {
                let ret = f.ret.map(|t| format!("{}", t)).unwrap_or_else(|| "void".into());
                s.push_str(&format!("(fn {} {} (", f.name, ret));
                for p in &f.params {
                    s.push_str(&format!("({} {})", p.name, p.ty));
                }
                s.push_str(") ");
                shape_stmt(&f.body, &mut s);
                s.push(')');
            }
        }
    }
    s
}

pub fn shape_stmt(st: &Stmt, s: &mut String) {
    match &st.kind {
        StmtKind::Compound(items) => {
            s.push_str("(block");
            for i in items {
                s.push(' ');
                shape_stmt(i, s);
            }
            s.push(')');
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            s.push_str("(if ");
            shape_expr(cond, s);
            s.push(' ');
            shape_stmt(then_branch, s);
            if let Some(e) = else_branch {
                s.push(' ');
                shape_stmt(e, s);
            }
            s.push(')');
        }
        StmtKind::For { init, cond, step, body } => {
            s.push_str("(for ");
            match init {
                Some(ForInit::Decl(d)) => shape_stmt(d, s),
                Some(ForInit::Expr(e)) => shape_expr(e, s),
                None => s.push('_'),
            }
            s.push(' ');
            match cond {
                Some(c) => shape_expr(c, s),
                None => s.push('_'),
            }
            s.push(' ');
            match step {
                Some(c) => shape_expr(c, s),
                None => s.push('_'),
            }
            s.push(' ');
            shape_stmt(body, s);
            s.push(')');
        }
        StmtKind::While { cond, body } => {
            s.push_str("(while ");
            shape_expr(cond, s);
            s.push(' ');
            shape_stmt(body, s);
            s.push(')');
        }
        StmtKind::DoWhile { body, cond } => {
            s.push_str("(do ");
            shape_stmt(body, s);
            s.push(' ');
            shape_expr(cond, s);
            s.push(')');
        }
        StmtKind::Decl(d) => {
            s.push_str(&format!("(decl {} {}", d.name, d.ty));
            match &d.init {
                None => {}
                Some(Init::Expr(e)) => {
                    s.push(' ');
                    shape_expr(e, s);
                }
                Some(Init::List(es)) => {
                    s.push_str(" (list");
                    for e in es {
                        s.push(' ');
                        shape_expr(e, s);
                    }
                    s.push(')');
                }
            }
            s.push(')');
        }
        StmtKind::Expr(e) => {
            s.push_str("(expr ");
            shape_expr(e, s);
            s.push(')');
        }
        StmtKind::Return(e) => {
            s.push_str("(return");
            if let Some(e) = e {
                s.push(' ');
                shape_expr(e, s);
            }
            s.push(')');
        }
    }
}

pub fn shape_expr(e: &Expr, s: &mut String) {
    match &e.kind {
        ExprKind::Literal(l) => s.push_str(&l.text),
        ExprKind::VarRef { name, .. } => s.push_str(name),
        ExprKind::Call { name, args, .. } => {
            s.push_str(&format!("(call {}", name));
            for a in args {
                s.push(' ');
                shape_expr(a, s);
            }
            s.push(')');
        }
        ExprKind::Assign { op, lhs, rhs } => {
            s.push_str(&format!("({} ", op.spelling()));
            shape_expr(lhs, s);
            s.push(' ');
            shape_expr(rhs, s);
            s.push(')');
        }
        ExprKind::IncDec { op, prefix, operand } => {
            let sp = match (op, prefix) {
                (IncDecOp::Inc, true) => "pre++",
                (IncDecOp::Inc, false) => "post++",
                (IncDecOp::Dec, true) => "pre--",
                (IncDecOp::Dec, false) => "post--",
            };
            s.push_str(&format!("({} ", sp));
            shape_expr(operand, s);
            s.push(')');
        }
        ExprKind::Index { base, index } => {
            s.push_str("(index ");
            shape_expr(base, s);
            s.push(' ');
            shape_expr(index, s);
            s.push(')');
        }
        ExprKind::Deref(o) => {
            s.push_str("(deref ");
            shape_expr(o, s);
            s.push(')');
        }
        ExprKind::AddrOf(o) => {
            s.push_str("(addr ");
            shape_expr(o, s);
            s.push(')');
        }
        ExprKind::Cast { ty, expr } => {
            s.push_str(&format!("(cast {} ", ty));
            shape_expr(expr, s);
            s.push(')');
        }
        ExprKind::Binary { op, lhs, rhs } => {
            s.push_str(&format!("({} ", op.spelling()));
            shape_expr(lhs, s);
            s.push(' ');
            shape_expr(rhs, s);
            s.push(')');
        }
        ExprKind::Unary { op, operand } => {
            s.push_str(&format!("(u{} ", op.spelling()));
            shape_expr(operand, s);
            s.push(')');
        }
    }
}
