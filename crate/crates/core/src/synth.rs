//! Splicing an operator into a seed program.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::minic::visit::{rename_items, rename_stmt, walk_expr};
use crate::minic::{
    parse, render, render_items, render_stmt, CType, Derivation, Expr, ExprKind, ForInit, FrontendError,
    SourceProgram, Stmt, StmtKind, SymbolId, SymbolKind, TranslationUnit, PRELUDE_LINES,
};
use crate::operator::{declared_inside, Operator, Role};
use crate::profile::SeedProfile;

/// Initializer values for fresh definitions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuePool {
    pub ints: Vec<String>,
    pub floats: Vec<String>,
}

impl Default for ValuePool {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
        ValuePool {
            ints: s(&["0", "1", "2", "7", "100", "-1", "32767"]),
            floats: s(&["0.0", "1.0", "0.5", "3.1415926", "1e6", "-2.5"]),
        }
    }
}

impl ValuePool {
    fn draw<R: Rng + ?Sized>(&self, ty: &CType, rng: &mut R) -> String {
        let pool = if ty.base.is_floating() { &self.floats } else { &self.ints };
        pool[rng.gen_range(0..pool.len())].clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "how", rename_all = "snake_case")]
pub enum Binding {
    Reuse { var: String },
    /// `decls` are the inserted definition lines, the last one defining `name`.
    Fresh { name: String, decls: Vec<String> },
}

impl Binding {
    pub fn target(&self) -> &str {
        match self {
            Binding::Reuse { var } => var,
            Binding::Fresh { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryBinding {
    /// The operator's name for the variable.
    pub name: String,
    pub ctype: CType,
    pub roles: Vec<Role>,
    pub binding: Binding,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertionPlan {
    /// Seed line the operator is inserted before.
    pub insertion_line: u32,
    pub bindings: Vec<EntryBinding>,
    /// Called function → name of its copied definition.
    pub function_bindings: BTreeMap<String, String>,
    /// Other copied functions and globals whose names were taken.
    #[serde(default)]
    pub renamed_support: BTreeMap<String, String>,
    /// Operator-internal declarations renamed to avoid seed names.
    #[serde(default)]
    pub renamed_locals: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesizedProgram {
    pub program: SourceProgram,
    pub seed_id: String,
    pub op_id: String,
    pub plan: InsertionPlan,
    pub generation_index: u64,
    /// First line of the inserted operator in `program`.
    pub op_line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("no valid insertion point")]
    NoValidInsertion,
    #[error("no candidate for post-context variable `{0}`")]
    UnboundPostVar(String),
    #[error("operator does not parse: {0}")]
    BadOperator(FrontendError),
    #[error("synthesized program failed its self-check: {0}")]
    RewriteError(String),
}

/// Binding options for one external variable of the operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryOptions {
    pub name: String,
    pub ctype: CType,
    pub pre: bool,
    pub post: bool,
    /// Seed variables it may be bound to.
    pub candidates: Vec<String>,
    pub fresh_allowed: bool,
}

impl EntryOptions {
    fn required(&self) -> bool {
        self.post || !self.fresh_allowed
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InsertionPoint {
    pub line: u32,
    pub function: String,
    pub entries: Vec<EntryOptions>,
}

/// Types a fresh definition can be made for.
pub fn fresh_supported(ty: &CType) -> bool {
    match ty.derivation {
        Derivation::None | Derivation::Array(_) => true,
        Derivation::Pointer { depth, .. } => depth == 1,
    }
}

struct VarInfo {
    name: String,
    ty: CType,
    first_def: u32,
    last_use: u32,
}

/// A statement directly inside a compound, with what is visible before it.
struct Slot {
    line: u32,
    function: String,
    visible: Vec<SymbolId>,
    loop_control: BTreeSet<SymbolId>,
}

fn collect_slots(unit: &TranslationUnit) -> Vec<Slot> {
    let globals: Vec<SymbolId> = unit.symbols.iter().filter(|s| s.kind == SymbolKind::Global).map(|s| s.id).collect();
    let mut out = Vec::new();
    for f in unit.functions() {
        let mut scope: Vec<SymbolId> = globals.clone();
        scope.extend(f.params.iter().map(|p| p.sym));
        slots_in(&f.body, &f.name, &mut scope, &BTreeSet::new(), &mut out);
    }
    out
}

fn vars_in(e: &Expr, out: &mut BTreeSet<SymbolId>) {
    walk_expr(e, &mut |x| {
        if let ExprKind::VarRef { sym, .. } = &x.kind {
            out.insert(*sym);
        }
    });
}

fn slots_in(s: &Stmt, function: &str, scope: &mut Vec<SymbolId>, control: &BTreeSet<SymbolId>, out: &mut Vec<Slot>) {
    match &s.kind {
        StmtKind::Compound(items) => {
            let mark = scope.len();
            for item in items {
                out.push(Slot {
                    line: item.span.start,
                    function: function.into(),
                    visible: scope.clone(),
                    loop_control: control.clone(),
                });
                slots_in(item, function, scope, control, out);
                if let StmtKind::Decl(d) = &item.kind {
                    scope.push(d.sym);
                }
            }
            scope.truncate(mark);
        }
        StmtKind::If { then_branch, else_branch, .. } => {
            slots_in(then_branch, function, scope, control, out);
            if let Some(e) = else_branch {
                slots_in(e, function, scope, control, out);
            }
        }
        StmtKind::For { init, cond, step, body } => {
            let mark = scope.len();
            let mut ctl = control.clone();
            match init {
                Some(ForInit::Decl(d)) => {
                    if let StmtKind::Decl(decl) = &d.kind {
                        scope.push(decl.sym);
                        ctl.insert(decl.sym);
                    }
                }
                Some(ForInit::Expr(e)) => vars_in(e, &mut ctl),
                None => {}
            }
            for e in cond.iter().chain(step.iter()) {
                vars_in(e, &mut ctl);
            }
            slots_in(body, function, scope, &ctl, out);
            scope.truncate(mark);
        }
        StmtKind::While { cond, body } | StmtKind::DoWhile { body, cond } => {
            let mut ctl = control.clone();
            vars_in(cond, &mut ctl);
            slots_in(body, function, scope, &ctl, out);
        }
        StmtKind::Decl(_) | StmtKind::Expr(_) | StmtKind::Return(_) => {}
    }
}

/// Lines where `op` can go into the profiled seed, with the binding options at each.
///
/// A line qualifies when it starts a covered statement directly inside a
/// block, every post-context variable can be matched to a distinct live seed
/// variable of the same type, every other variable has a candidate or can be
/// freshly defined, and every called function has a copyable definition.
pub fn find_insertion_points(op: &Operator, profile: &SeedProfile) -> Result<Vec<InsertionPoint>, SynthError> {
    let unit = profile.seed.parse().map_err(SynthError::BadOperator)?;
    find_points_in(op, profile, &unit)
}

fn find_points_in(
    op: &Operator,
    profile: &SeedProfile,
    unit: &TranslationUnit,
) -> Result<Vec<InsertionPoint>, SynthError> {
    if !profile.exec_ok {
        return Ok(Vec::new());
    }
    let funcs: Vec<&str> =
        op.pre_context.iter().filter(|e| e.role == Role::PreFunc).map(|e| e.name.as_str()).collect();
    if !funcs.is_empty() {
        let support = op.support_unit().map_err(SynthError::BadOperator)?;
        if funcs.iter().any(|f| support.function(f).is_none()) {
            return Ok(Vec::new());
        }
    }
    let wanted = variable_entries(op);
    let info: BTreeMap<SymbolId, VarInfo> = profile
        .usage
        .iter()
        .filter_map(|u| {
            let sym = unit.symbols.get(u.sym as usize)?;
            if sym.kind.is_function() || sym.name != u.name {
                return None;
            }
            Some((
                u.sym,
                VarInfo { name: u.name.clone(), ty: u.ctype?, first_def: u.first_def_line, last_use: u.last_use_line },
            ))
        })
        .collect();

    let mut points = Vec::new();
    for slot in collect_slots(unit) {
        if !profile.covered_lines.contains(&slot.line) {
            continue;
        }
        // innermost declaration of each name wins
        let mut by_name: BTreeMap<&str, SymbolId> = BTreeMap::new();
        for sym in &slot.visible {
            if let Some(v) = info.get(sym) {
                by_name.insert(v.name.as_str(), *sym);
            }
        }
        let entries: Vec<EntryOptions> = wanted
            .iter()
            .map(|(name, ty, pre, post)| {
                let candidates = by_name
                    .values()
                    .filter(|sym| {
                        let v = &info[*sym];
                        v.ty == *ty
                            && v.first_def < slot.line
                            && (!post || (v.last_use > slot.line && !slot.loop_control.contains(*sym)))
                    })
                    .map(|sym| info[sym].name.clone())
                    .collect();
                EntryOptions {
                    name: name.clone(),
                    ctype: *ty,
                    pre: *pre,
                    post: *post,
                    candidates,
                    fresh_allowed: !*post && fresh_supported(ty),
                }
            })
            .collect();
        let order: Vec<usize> = (0..entries.len()).collect();
        if match_required(&entries, &order, &BTreeMap::new()).is_some() {
            points.push(InsertionPoint { line: slot.line, function: slot.function, entries });
        }
    }
    Ok(points)
}

/// (name, type, is pre, is post) for each external variable, in first-seen order.
fn variable_entries(op: &Operator) -> Vec<(String, CType, bool, bool)> {
    let mut out: Vec<(String, CType, bool, bool)> = Vec::new();
    for e in op.entries() {
        if e.role == Role::PreFunc {
            continue;
        }
        let Some(ty) = e.ctype else { continue };
        match out.iter_mut().find(|x| x.0 == e.name) {
            Some(x) => {
                x.2 |= e.role == Role::PreVar;
                x.3 |= e.role == Role::PostVar;
            }
            None => out.push((e.name.clone(), ty, e.role == Role::PreVar, e.role == Role::PostVar)),
        }
    }
    out
}

/// Distinct candidates for every required entry, trying entries in `order`
/// and candidates in the order given by `prefs` (or listed order).
fn match_required(
    entries: &[EntryOptions],
    order: &[usize],
    prefs: &BTreeMap<usize, Vec<String>>,
) -> Option<BTreeMap<usize, String>> {
    let mut owner: BTreeMap<String, usize> = BTreeMap::new();
    for &i in order {
        if !entries[i].required() {
            continue;
        }
        let mut seen = BTreeSet::new();
        if !augment(i, entries, prefs, &mut owner, &mut seen) {
            return None;
        }
    }
    Some(owner.into_iter().map(|(var, i)| (i, var)).collect())
}

fn augment(
    i: usize,
    entries: &[EntryOptions],
    prefs: &BTreeMap<usize, Vec<String>>,
    owner: &mut BTreeMap<String, usize>,
    seen: &mut BTreeSet<String>,
) -> bool {
    let cands = prefs.get(&i).unwrap_or(&entries[i].candidates);
    for c in cands {
        if !seen.insert(c.clone()) {
            continue;
        }
        let free = match owner.get(c) {
            None => true,
            Some(&j) => augment(j, entries, prefs, owner, seen),
        };
        if free {
            owner.insert(c.clone(), i);
            return true;
        }
    }
    false
}

/// Smallest `<base>_f<k>` not in `taken`; the result is added to `taken`.
fn fresh_name(base: &str, taken: &mut BTreeSet<String>) -> String {
    let mut k = 0;
    loop {
        let n = format!("{}_f{}", base, k);
        if !taken.contains(&n) {
            taken.insert(n.clone());
            return n;
        }
        k += 1;
    }
}

fn fresh_decls<R: Rng + ?Sized>(name: &str, ty: &CType, pool: &ValuePool, taken: &mut BTreeSet<String>, rng: &mut R) -> Vec<String> {
    match ty.derivation {
        Derivation::None => alloc::vec![format!("{} = {};", ty.declare(name), pool.draw(ty, rng))],
        Derivation::Array(n) => {
            let elem = CType::scalar(ty.base);
            let vals: Vec<String> = (0..n).map(|_| pool.draw(&elem, rng)).collect();
            alloc::vec![format!("{} = {{{}}};", ty.declare(name), vals.join(", "))]
        }
        Derivation::Pointer { .. } => {
            let target = CType::scalar(ty.base);
            let inner = fresh_name(name, taken);
            alloc::vec![
                format!("{} = {};", target.declare(&inner), pool.draw(&target, rng)),
                format!("{} = &{};", ty.declare(name), inner),
            ]
        }
    }
}

/// Binds every context entry of `op` at `point`.
///
/// Post-context variables (and those that cannot be defined fresh) get
/// distinct seed variables through a randomized matching; the rest reuse a
/// random unused candidate or are defined fresh.
pub fn bind_variables<R: Rng + ?Sized>(
    op: &Operator,
    point: &InsertionPoint,
    profile: &SeedProfile,
    pool: &ValuePool,
    rng: &mut R,
) -> Result<InsertionPlan, SynthError> {
    let unit = profile.seed.parse().map_err(SynthError::BadOperator)?;
    bind_in(op, point, &unit, pool, rng)
}

fn bind_in<R: Rng + ?Sized>(
    op: &Operator,
    point: &InsertionPoint,
    unit: &TranslationUnit,
    pool: &ValuePool,
    rng: &mut R,
) -> Result<InsertionPlan, SynthError> {
    let entries = &point.entries;
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.shuffle(rng);
    let mut prefs = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        let mut c = e.candidates.clone();
        c.shuffle(rng);
        prefs.insert(i, c);
    }
    let matched = match match_required(entries, &order, &prefs) {
        Some(m) => m,
        None => {
            let e = entries.iter().find(|e| e.required()).map(|e| e.name.clone()).unwrap_or_default();
            return Err(SynthError::UnboundPostVar(e));
        }
    };

    let mut taken: BTreeSet<String> = unit.symbols.iter().map(|s| s.name.clone()).collect();
    let mut used: BTreeSet<String> = matched.values().cloned().collect();

    // copied functions and globals keep their names unless those are taken
    let mut function_bindings = BTreeMap::new();
    let mut renamed_support = BTreeMap::new();
    if op.pre_context.iter().any(|e| e.role == Role::PreFunc) {
        let support = op.support_unit().map_err(SynthError::BadOperator)?;
        for s in &support.symbols {
            if !matches!(s.kind, SymbolKind::Global | SymbolKind::Function { .. }) {
                continue;
            }
            let n = if taken.contains(&s.name) { fresh_name(&s.name, &mut taken) } else { s.name.clone() };
            taken.insert(n.clone());
            if op.pre_context.iter().any(|e| e.role == Role::PreFunc && e.name == s.name) {
                function_bindings.insert(s.name.clone(), n);
            } else if n != s.name {
                renamed_support.insert(s.name.clone(), n);
            }
        }
    }

    let mut bindings = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        let mut roles = Vec::new();
        if e.pre {
            roles.push(Role::PreVar);
        }
        if e.post {
            roles.push(Role::PostVar);
        }
        let binding = if let Some(v) = matched.get(&i) {
            Binding::Reuse { var: v.clone() }
        } else {
            let free: Vec<&String> = prefs[&i].iter().filter(|c| !used.contains(*c)).collect();
            if let Some(v) = free.first() {
                used.insert((*v).clone());
                Binding::Reuse { var: (*v).clone() }
            } else if e.fresh_allowed {
                let name = fresh_name(&e.name, &mut taken);
                let decls = fresh_decls(&name, &e.ctype, pool, &mut taken, rng);
                Binding::Fresh { name, decls }
            } else {
                return Err(SynthError::UnboundPostVar(e.name.clone()));
            }
        };
        bindings.push(EntryBinding { name: e.name.clone(), ctype: e.ctype, roles, binding });
    }

    let (block, syms) = op.block().map_err(SynthError::BadOperator)?;
    let mut renamed_locals = BTreeMap::new();
    for sym in declared_inside(&block) {
        let name = &syms[sym as usize].name;
        if taken.contains(name) {
            let n = fresh_name(name, &mut taken);
            renamed_locals.insert(name.clone(), n);
        } else {
            taken.insert(name.clone());
        }
    }
    Ok(InsertionPlan { insertion_line: point.line, bindings, function_bindings, renamed_support, renamed_locals })
}

/// Applies `plan` and renders the result. Fails loudly when the output does
/// not re-parse into the same canonical text.
pub fn apply_plan(
    op: &Operator,
    profile: &SeedProfile,
    plan: &InsertionPlan,
    program_id: &str,
) -> Result<(SourceProgram, u32), SynthError> {
    let (mut block, syms) = op.block().map_err(SynthError::BadOperator)?;
    let inside = declared_inside(&block);
    let mut map: BTreeMap<SymbolId, String> = BTreeMap::new();
    for s in &syms {
        let new = match s.kind {
            SymbolKind::ExternalVar => plan.bindings.iter().find(|b| b.name == s.name).map(|b| b.binding.target().to_string()),
            SymbolKind::ExternalFunc => plan.function_bindings.get(&s.name).cloned(),
            _ if inside.contains(&s.id) => plan.renamed_locals.get(&s.name).cloned(),
            _ => None,
        };
        if let Some(n) = new {
            map.insert(s.id, n);
        }
    }
    rename_stmt(&mut block, &map);

    let mut support_text = String::new();
    if !plan.function_bindings.is_empty() {
        let mut support = op.support_unit().map_err(SynthError::BadOperator)?;
        let smap: BTreeMap<SymbolId, String> = support
            .symbols
            .iter()
            .filter(|s| matches!(s.kind, SymbolKind::Global | SymbolKind::Function { .. }))
            .filter_map(|s| {
                let n = plan.function_bindings.get(&s.name).or_else(|| plan.renamed_support.get(&s.name))?;
                Some((s.id, n.clone()))
            })
            .collect();
        rename_items(&mut support.items, &smap);
        support_text = render_items(&support.items);
    }

    let seed_lines: Vec<&str> = profile.seed.text.lines().collect();
    let at = plan.insertion_line as usize - 1;
    if at >= seed_lines.len() {
        return Err(SynthError::RewriteError(format!("insertion line {} past end", plan.insertion_line)));
    }
    let indent: String = seed_lines[at].chars().take_while(|c| *c == ' ').collect();
    let mut inserted: Vec<String> = Vec::new();
    for b in &plan.bindings {
        if let Binding::Fresh { decls, .. } = &b.binding {
            inserted.extend(decls.iter().map(|d| format!("{}{}", indent, d)));
        }
    }
    let fresh_lines = inserted.len() as u32;
    inserted.extend(render_stmt(&block).lines().map(|l| format!("{}{}", indent, l)));

    let mut out: Vec<String> = Vec::new();
    let prelude = PRELUDE_LINES as usize;
    let prelude = prelude.min(at);
    out.extend(seed_lines[..prelude].iter().map(|l| l.to_string()));
    let support_lines: Vec<&str> = support_text.lines().collect();
    out.extend(support_lines.iter().map(|l| l.to_string()));
    out.extend(seed_lines[prelude..at].iter().map(|l| l.to_string()));
    out.extend(inserted);
    out.extend(seed_lines[at..].iter().map(|l| l.to_string()));
    let mut text = out.join("\n");
    text.push('\n');

    let unit = parse(&text).map_err(|e| SynthError::RewriteError(format!("{}", e)))?;
    if render(&unit) != text {
        return Err(SynthError::RewriteError("output is not in canonical form".into()));
    }
    let op_line = plan.insertion_line + support_lines.len() as u32 + fresh_lines;
    Ok((SourceProgram::new(program_id, text, "generated"), op_line))
}

/// File-system friendly id of the `index`-th synthesized program.
pub fn program_id(index: u64, op_id: &str, seed_id: &str) -> String {
    format!("{}_{}_{}", index, op_id, seed_id)
}

/// Inserts `op` into the profiled seed at a random qualifying point.
pub fn synthesize<R: Rng + ?Sized>(
    op: &Operator,
    profile: &SeedProfile,
    pool: &ValuePool,
    generation_index: u64,
    rng: &mut R,
) -> Result<SynthesizedProgram, SynthError> {
    let unit = profile.seed.parse().map_err(SynthError::BadOperator)?;
    let points = find_points_in(op, profile, &unit)?;
    if points.is_empty() {
        return Err(SynthError::NoValidInsertion);
    }
    let point = &points[rng.gen_range(0..points.len())];
    let plan = bind_in(op, point, &unit, pool, rng)?;
    let id = program_id(generation_index, &op.op_id, &profile.seed.id);
    let (program, op_line) = apply_plan(op, profile, &plan, &id)?;
    Ok(SynthesizedProgram {
        program,
        seed_id: profile.seed.id.clone(),
        op_id: op.op_id.clone(),
        plan,
        generation_index,
        op_line,
    })
}

#[cfg(test)]
mod tests;
