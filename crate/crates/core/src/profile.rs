//! Seed profiles: variable lifetimes and executed lines.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cost::EventCounts;
use crate::minic::visit::walk_stmt_exprs;
use crate::minic::{
    render_instrumented, CType, Callee, ExprKind, Instrumented, Item, MarkerMode, SourceProgram, SymbolId,
    SymbolKind, TranslationUnit,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UsageScope {
    Global,
    /// Parameters sit at depth 0, the function body at depth 1.
    Local { function: String, depth: u32 },
    Function,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageEntry {
    pub name: String,
    pub sym: SymbolId,
    /// Variable type or function return type.
    pub ctype: Option<CType>,
    pub first_def_line: u32,
    pub last_use_line: u32,
    pub scope: UsageScope,
}

/// One entry per declared variable and user function, in declaration order.
/// A name that is never referenced has `last_use_line == first_def_line`.
pub fn profile_variable_usage(unit: &TranslationUnit) -> Vec<UsageEntry> {
    let mut last: BTreeMap<SymbolId, u32> = BTreeMap::new();
    let mut note = |sym: SymbolId, line: u32| {
        let e = last.entry(sym).or_insert(line);
        *e = (*e).max(line);
    };
    for item in &unit.items {
        let body = match item {
            Item::Global(s) => s,
            Item::Function(f) => &f.body,
        };
        walk_stmt_exprs(body, &mut |e| match &e.kind {
            ExprKind::VarRef { sym, .. } => note(*sym, e.span.start),
            ExprKind::Call { callee: Callee::User(sym), .. } => note(*sym, e.span.start),
            _ => {}
        });
    }
    unit.symbols
        .iter()
        .map(|s| {
            let scope = match &s.kind {
                SymbolKind::Global | SymbolKind::ExternalVar => UsageScope::Global,
                SymbolKind::Function { .. } | SymbolKind::ExternalFunc => UsageScope::Function,
                SymbolKind::Local { function, depth } => {
                    UsageScope::Local { function: unit.symbol(*function).name.clone(), depth: *depth }
                }
                SymbolKind::Param { function } => {
                    UsageScope::Local { function: unit.symbol(*function).name.clone(), depth: 0 }
                }
            };
            let last_use = last.get(&s.id).copied().unwrap_or(s.decl_line).max(s.decl_line);
            UsageEntry {
                name: s.name.clone(),
                sym: s.id,
                ctype: s.ty,
                first_def_line: s.decl_line,
                last_use_line: last_use,
                scope,
            }
        })
        .collect()
}

/// Renders `unit` with a counter before every executable statement.
pub fn instrument_for_coverage(unit: &TranslationUnit) -> Instrumented {
    render_instrumented(unit, MarkerMode::All, false)
}

/// Counters written by an instrumented run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    /// Marker id → times it fired (absent means zero).
    pub markers: BTreeMap<u32, u64>,
    pub events: EventCounts,
    /// The dump ran to completion.
    pub complete: bool,
}

impl Trace {
    /// Reads the `cov <id> <count>` / `ev ...` / `end` format.
    pub fn parse(text: &str) -> Trace {
        let mut t = Trace::default();
        for line in text.lines() {
            let mut parts = line.split_ascii_whitespace();
            match parts.next() {
                Some("cov") => {
                    let id = parts.next().and_then(|p| p.parse().ok());
                    let n = parts.next().and_then(|p| p.parse().ok());
                    if let (Some(id), Some(n)) = (id, n) {
                        t.markers.insert(id, n);
                    }
                }
                Some("ev") => {
                    for (slot, v) in t.events.0.iter_mut().zip(parts) {
                        *slot = v.parse().unwrap_or(0);
                    }
                }
                Some("end") => t.complete = true,
                _ => {}
            }
        }
        t
    }

    /// Original lines whose markers fired, given the marker → line map.
    pub fn covered_lines(&self, marker_lines: &[u32]) -> BTreeSet<u32> {
        self.markers
            .iter()
            .filter(|(_, n)| **n > 0)
            .filter_map(|(id, _)| marker_lines.get(*id as usize).copied())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedProfile {
    pub seed: SourceProgram,
    pub usage: Vec<UsageEntry>,
    pub covered_lines: BTreeSet<u32>,
    pub exec_ok: bool,
    pub baseline_output: String,
}

impl SeedProfile {
    pub fn usage_of(&self, sym: SymbolId) -> Option<&UsageEntry> {
        self.usage.iter().find(|u| u.sym == sym)
    }
}
