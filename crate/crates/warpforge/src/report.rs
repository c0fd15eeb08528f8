//! Campaign reports, rebuilt from a campaign directory's event log, records
//! and operator files so that the same directory always yields the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use warpforge_core::campaign::{issue_groups, EventKind, GroupInput, IssueGroup, SeriesPoint};
use warpforge_core::dist::{deviation_degrees, OracleRatio};
use warpforge_core::operator::{Operator, OperatorKind};

use crate::config::Config;
use crate::store::{read_json, write_json, Workspace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ancestor {
    pub op_id: String,
    pub kind: OperatorKind,
    pub fp_heavy: bool,
    /// Program the operator was extracted from.
    pub from_program: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopRow {
    pub rank: usize,
    pub program_id: String,
    pub seed_id: String,
    pub dist_score: f64,
    pub suspect: String,
    pub per_runtime_deviation: Vec<(String, f64)>,
    /// Inserted operator first, then the operators its source program descends from.
    pub ancestry: Vec<Ancestor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeVersion {
    pub name: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub config: Config,
    pub runtimes: Vec<RuntimeVersion>,
    pub oracle: OracleRatio,
    pub scored_programs: u64,
    pub removed_operators: usize,
    pub extracted_operators: usize,
    pub top: Vec<TopRow>,
    pub series: Vec<SeriesPoint>,
    pub issue_groups: Vec<IssueGroup>,
}

struct Slot {
    program_id: String,
    seed_id: String,
    op_id: String,
    score: f64,
    seq: u64,
}

/// Replays top-set admission from the event log.
fn replay(events: &[warpforge_core::campaign::Event], n: usize) -> (Vec<Slot>, Vec<SeriesPoint>, u64) {
    let mut top: Vec<Slot> = Vec::new();
    let mut series = Vec::new();
    let mut generated = 0u64;
    let mut seq = 0u64;
    for e in events {
        let admit = match e.event {
            EventKind::Initial | EventKind::Improve => true,
            EventKind::NoImprove => false,
            _ => continue,
        };
        let (Some(score), Some(pid)) = (e.score, e.program_id.clone()) else { continue };
        generated += 1;
        let min = top.iter().map(|s| s.score).reduce(f64::min);
        let improves = top.len() < n || min.is_some_and(|m| score > m);
        if admit && improves {
            if top.len() >= n {
                let mut worst = 0;
                for (i, s) in top.iter().enumerate() {
                    let w = &top[worst];
                    if s.score < w.score || (s.score == w.score && s.seq < w.seq) {
                        worst = i;
                    }
                }
                top.remove(worst);
            }
            top.push(Slot {
                program_id: pid,
                seed_id: e.seed_id.clone().unwrap_or_default(),
                op_id: e.op_id.clone(),
                score,
                seq,
            });
            seq += 1;
        }
        if !top.is_empty() {
            let min = top.iter().map(|s| s.score).fold(f64::INFINITY, f64::min);
            let avg = top.iter().map(|s| s.score).sum::<f64>() / top.len() as f64;
            series.push(SeriesPoint { generated, min, avg, full: top.len() >= n });
        }
    }
    top.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.seq.cmp(&b.seq)));
    (top, series, generated)
}

/// Builds the report of the campaign stored in `ws`.
pub fn build_report(ws: &Workspace) -> anyhow::Result<CampaignReport> {
    let config = Config::parse(&std::fs::read_to_string(ws.path("config.echo.toml")).context("reading config echo")?)?;
    let runtimes: Vec<RuntimeVersion> = read_json(&ws.path("runtimes.json"))?;
    let oracle = ws.read_oracle()?;
    let events = ws.read_events()?;
    let mut ops: BTreeMap<String, Operator> = BTreeMap::new();
    for sub in ["operators", "pool"] {
        for op in ws.read_operators(sub)? {
            ops.entry(op.op_id.clone()).or_insert(op);
        }
    }
    // program → operator it was built from, for walking provenance
    let mut built_from: BTreeMap<String, String> = BTreeMap::new();
    for e in &events {
        if let (Some(p), true) = (&e.program_id, e.score.is_some()) {
            built_from.insert(p.clone(), e.op_id.clone());
        }
    }
    let ancestry = |program: &str| -> Vec<String> {
        let mut chain: Vec<String> = Vec::new();
        let mut cur = built_from.get(program).cloned();
        while let Some(op) = cur {
            if chain.contains(&op) {
                break;
            }
            cur = ops.get(&op).and_then(|o| built_from.get(&o.provenance.program_id).cloned());
            chain.push(op);
        }
        chain
    };

    let (top, series, generated) = replay(&events, config.campaign.n);
    let mut rows = Vec::new();
    for (i, s) in top.iter().enumerate() {
        let record = ws.read_record(&s.program_id)?;
        let dev = deviation_degrees(&record, &oracle).with_context(|| format!("record of {}", s.program_id))?;
        let chain = ancestry(&s.program_id);
        debug_assert_eq!(chain.first(), Some(&s.op_id));
        rows.push(TopRow {
            rank: i + 1,
            program_id: s.program_id.clone(),
            seed_id: s.seed_id.clone(),
            dist_score: s.score,
            suspect: dev.suspect,
            per_runtime_deviation: dev.per_runtime_deviation,
            ancestry: chain
                .iter()
                .map(|id| {
                    let op = ops.get(id);
                    Ancestor {
                        op_id: id.clone(),
                        kind: op.map(|o| o.kind).unwrap_or(OperatorKind::Sequential),
                        fp_heavy: op.is_some_and(|o| o.stats.fp_heavy()),
                        from_program: op.map(|o| o.provenance.program_id.clone()).unwrap_or_default(),
                    }
                })
                .collect(),
        });
    }
    let chains: Vec<Vec<String>> = rows.iter().map(|r| r.ancestry.iter().map(|a| a.op_id.clone()).collect()).collect();
    let inputs: Vec<GroupInput<'_>> = rows
        .iter()
        .zip(&chains)
        .map(|(r, c)| GroupInput { program_id: &r.program_id, suspect: &r.suspect, ancestry: c })
        .collect();
    let groups = issue_groups(&inputs);
    Ok(CampaignReport {
        config,
        runtimes,
        oracle,
        scored_programs: generated,
        removed_operators: events.iter().filter(|e| matches!(e.event, EventKind::Remove | EventKind::Uninsertable)).count(),
        extracted_operators: events.iter().filter(|e| e.event == EventKind::Extract).count(),
        top: rows,
        series,
        issue_groups: groups,
    })
}

impl CampaignReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = self.write_text(&mut s);
        s
    }

    fn write_text(&self, s: &mut String) -> std::fmt::Result {
        writeln!(s, "# warpforge campaign report")?;
        writeln!(s)?;
        writeln!(s, "## configuration")?;
        s.push_str(&self.config.to_toml());
        writeln!(s)?;
        writeln!(s, "## runtimes")?;
        for r in &self.runtimes {
            writeln!(s, "{:<16} {}", r.name, r.version)?;
        }
        writeln!(s)?;
        writeln!(s, "## oracle ratio ({} seeds)", self.oracle.derivation.len())?;
        for (r, v) in self.runtimes.iter().zip(&self.oracle.vector.0) {
            writeln!(s, "{:<16} {:.6}", r.name, v)?;
        }
        writeln!(s)?;
        writeln!(
            s,
            "scored programs: {}   operators removed: {}   operators extracted: {}",
            self.scored_programs, self.removed_operators, self.extracted_operators
        )?;
        writeln!(s)?;
        writeln!(s, "## top programs")?;
        writeln!(s, "{:>4}  {:<44} {:>10}  {:<10} ancestry", "rank", "program", "dist", "suspect")?;
        for r in &self.top {
            let chain: Vec<String> = r
                .ancestry
                .iter()
                .map(|a| format!("{}{}", a.op_id, if a.fp_heavy { "*" } else { "" }))
                .collect();
            writeln!(
                s,
                "{:>4}  {:<44} {:>10.6}  {:<10} {}",
                r.rank,
                r.program_id,
                r.dist_score,
                r.suspect,
                chain.join(" <- ")
            )?;
        }
        writeln!(s, "(* marks floating-point-heavy operators)")?;
        writeln!(s)?;
        writeln!(s, "## score growth (top-{} after each scored program)", self.config.campaign.n)?;
        writeln!(s, "{:>9}  {:>10}  {:>10}  full", "generated", "min", "avg")?;
        for p in &self.series {
            writeln!(s, "{:>9}  {:>10.6}  {:>10.6}  {}", p.generated, p.min, p.avg, if p.full { "yes" } else { "no" })?;
        }
        writeln!(s)?;
        writeln!(s, "## issue groups")?;
        for (i, g) in self.issue_groups.iter().enumerate() {
            writeln!(s, "group {}: suspect {}, {} programs", i + 1, g.suspect, g.programs.len())?;
            writeln!(s, "  shared ancestry: {}", if g.shared_ancestry.is_empty() { "-".into() } else { g.shared_ancestry.join(", ") })?;
            writeln!(s, "  programs: {}", g.programs.join(", "))?;
        }
        Ok(())
    }
}

/// Builds the report and writes `report.txt` and `report.json`.
pub fn write_report(ws: &Workspace) -> anyhow::Result<CampaignReport> {
    let report = build_report(ws)?;
    std::fs::write(ws.path("report.txt"), report.to_text())?;
    write_json(&ws.path("report.json"), &report)?;
    Ok(report)
}
