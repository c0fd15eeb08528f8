//! The iteration process: an initial pass over every operator, then
//! feedback-driven draws steered by the top-N score set and operator penalties.
//!
//! The controller is a step machine over a serializable [`CampaignState`], so
//! a campaign can be checkpointed between any two steps and resumed with an
//! identical remaining trace.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{DeviationReport, OracleRatio};
use crate::minic::SourceProgram;
use crate::operator::{extract_operators, ExtractOptions, OpStats, Operator, OperatorKind};
use crate::profile::SeedProfile;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignParams {
    /// Top-set size.
    pub n: usize,
    /// Penalty at which an operator is removed.
    pub m: u32,
    /// Scored programs to generate.
    pub k: u64,
    pub rng_seed: u64,
    pub max_operator_lines: u32,
}

impl Default for CampaignParams {
    fn default() -> Self {
        CampaignParams { n: 20, m: 5, k: 1000, rng_seed: 0, max_operator_lines: crate::operator::DEFAULT_MAX_OPERATOR_LINES }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CampaignError {
    #[error("the operator pool is empty")]
    EmptyOperatorPool,
    #[error("the seed pool is empty")]
    EmptySeedPool,
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
}

/// A candidate that made it through synthesis, verification and measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredProgram {
    pub program: SourceProgram,
    pub op_id: String,
    pub seed_id: String,
    pub score: f64,
    pub deviation: DeviationReport,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Scored(ScoredProgram),
    NoValidInsertion,
    /// Verification, compilation or execution failed.
    Failed(String),
}

/// Turns an (operator, seed) draw into a scored program.
pub trait Evaluator {
    /// `attempt` is unique per call and names the candidate.
    fn evaluate(&mut self, op: &Operator, seed: &SeedProfile, attempt: u64, rng: &mut ChaCha8Rng) -> Outcome;

    /// Operators contributed by an improving program.
    fn extract(&mut self, program: &SourceProgram, generation: u64, opts: &ExtractOptions) -> Vec<Operator> {
        match program.parse() {
            Ok(unit) => extract_operators(&unit, &program.id, generation, opts),
            Err(_) => Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Scored during the initial pass.
    Initial,
    /// Synthesized but failed downstream during the initial pass.
    InitialFail,
    /// Insertable into no seed; removed.
    Uninsertable,
    Improve,
    NoImprove,
    Fail,
    Remove,
    /// Added to the pool from a top program.
    Extract,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub event: EventKind,
    pub op_id: String,
    pub seed_id: Option<String>,
    pub program_id: Option<String>,
    pub score: Option<f64>,
    pub penalty_after: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopEntry {
    pub program: ScoredProgram,
    /// Insertion order; smaller is older.
    pub seq: u64,
    /// Scored programs generated when this one was.
    pub generated_at: u64,
}

/// Min and average of the top set after a scored program.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub generated: u64,
    pub min: f64,
    pub avg: f64,
    pub full: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpSummary {
    pub kind: OperatorKind,
    pub stats: OpStats,
    pub program_id: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    /// Walking the initial operator list.
    Initial { ops: Vec<String>, next: usize },
    Followup,
    Done,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub word_pos: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignState {
    pub params: CampaignParams,
    pub op_pool: BTreeMap<String, Operator>,
    pub seed_pool: Vec<SeedProfile>,
    pub top: Vec<TopEntry>,
    pub oracle: OracleRatio,
    pub generated_count: u64,
    pub attempts: u64,
    pub next_seq: u64,
    pub phase: Phase,
    pub rng: RngState,
    pub events: Vec<Event>,
    pub series: Vec<SeriesPoint>,
    /// Program → operators it descends from (inserted operator first).
    pub ancestry: BTreeMap<String, Vec<String>>,
    /// Every operator that was ever in the pool.
    pub archive: BTreeMap<String, OpSummary>,
}

impl CampaignState {
    pub fn new(
        params: CampaignParams,
        ops: Vec<Operator>,
        seeds: Vec<SeedProfile>,
        oracle: OracleRatio,
    ) -> Result<Self, CampaignError> {
        if params.n == 0 || params.m == 0 || params.k == 0 {
            return Err(CampaignError::InvalidParams("N, M and k must be at least 1"));
        }
        if ops.is_empty() {
            return Err(CampaignError::EmptyOperatorPool);
        }
        if seeds.is_empty() {
            return Err(CampaignError::EmptySeedPool);
        }
        let mut pool = BTreeMap::new();
        let mut archive = BTreeMap::new();
        for mut op in ops {
            op.penalty = 0;
            archive.insert(op.op_id.clone(), summary(&op));
            pool.entry(op.op_id.clone()).or_insert(op);
        }
        let order: Vec<String> = pool.keys().cloned().collect();
        Ok(CampaignState {
            rng: RngState { seed: params.rng_seed, word_pos: 0 },
            params,
            op_pool: pool,
            seed_pool: seeds,
            top: Vec::new(),
            oracle,
            generated_count: 0,
            attempts: 0,
            next_seq: 0,
            phase: Phase::Initial { ops: order, next: 0 },
            events: Vec::new(),
            series: Vec::new(),
            ancestry: BTreeMap::new(),
            archive,
        })
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    pub fn top_full(&self) -> bool {
        self.top.len() >= self.params.n
    }

    pub fn min_score(&self) -> Option<f64> {
        self.top.iter().map(|t| t.program.score).reduce(f64::min)
    }

    pub fn avg_score(&self) -> Option<f64> {
        if self.top.is_empty() {
            return None;
        }
        Some(self.top.iter().map(|t| t.program.score).sum::<f64>() / self.top.len() as f64)
    }

    /// Top entries by descending score, older first on ties.
    pub fn ranked(&self) -> Vec<&TopEntry> {
        let mut v: Vec<&TopEntry> = self.top.iter().collect();
        v.sort_by(|a, b| b.program.score.total_cmp(&a.program.score).then(a.seq.cmp(&b.seq)));
        v
    }

    /// Operators a program descends from; the inserted one first.
    pub fn ancestry_of(&self, program_id: &str) -> &[String] {
        self.ancestry.get(program_id).map(|v| v.as_slice()).unwrap_or(&[])
    }

    fn improves(&self, score: f64) -> bool {
        !self.top_full() || self.min_score().is_some_and(|m| score > m)
    }

    fn admit(&mut self, program: ScoredProgram) {
        if self.top_full() {
            let mut worst = 0;
            for (i, t) in self.top.iter().enumerate() {
                let w = &self.top[worst];
                if t.program.score < w.program.score || (t.program.score == w.program.score && t.seq < w.seq) {
                    worst = i;
                }
            }
            self.top.remove(worst);
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.top.push(TopEntry { program, seq, generated_at: self.generated_count });
    }

    fn record_series(&mut self) {
        if let (Some(min), Some(avg)) = (self.min_score(), self.avg_score()) {
            self.series.push(SeriesPoint { generated: self.generated_count, min, avg, full: self.top_full() });
        }
    }

    fn note_ancestry(&mut self, program: &ScoredProgram) {
        let mut chain = alloc::vec![program.op_id.clone()];
        if let Some(op) = self.archive.get(&program.op_id) {
            for a in self.ancestry.get(&op.program_id).into_iter().flatten() {
                if !chain.contains(a) {
                    chain.push(a.clone());
                }
            }
        }
        self.ancestry.insert(program.program.id.clone(), chain);
    }

    fn merge_extracted(&mut self, program_id: &str, ops: Vec<Operator>) {
        for mut op in ops {
            if self.op_pool.contains_key(&op.op_id) {
                continue;
            }
            op.penalty = 0;
            self.archive.entry(op.op_id.clone()).or_insert_with(|| summary(&op));
            self.events.push(Event {
                event: EventKind::Extract,
                op_id: op.op_id.clone(),
                seed_id: None,
                program_id: Some(program_id.into()),
                score: None,
                penalty_after: Some(0),
            });
            self.op_pool.insert(op.op_id.clone(), op);
        }
    }
}

fn summary(op: &Operator) -> OpSummary {
    OpSummary { kind: op.kind, stats: op.stats, program_id: op.provenance.program_id.clone() }
}

fn event(kind: EventKind, op_id: &str, seed: Option<&str>, program: Option<&ScoredProgram>, penalty: Option<u32>) -> Event {
    Event {
        event: kind,
        op_id: op_id.into(),
        seed_id: seed.map(String::from).or_else(|| program.map(|p| p.seed_id.clone())),
        program_id: program.map(|p| p.program.id.clone()),
        score: program.map(|p| p.score),
        penalty_after: penalty,
    }
}

/// Drives a [`CampaignState`] with an [`Evaluator`].
pub struct Controller<'e, E: Evaluator> {
    pub state: CampaignState,
    eval: &'e mut E,
    rng: ChaCha8Rng,
}

impl<'e, E: Evaluator> Controller<'e, E> {
    pub fn new(state: CampaignState, eval: &'e mut E) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(state.rng.seed);
        rng.set_word_pos(state.rng.word_pos);
        Controller { state, eval, rng }
    }

    fn sync_rng(&mut self) {
        self.state.rng.word_pos = self.rng.get_word_pos();
    }

    fn opts(&self) -> ExtractOptions {
        ExtractOptions { max_operator_lines: self.state.params.max_operator_lines }
    }

    fn attempt(&mut self, op: &Operator, seed: usize) -> Outcome {
        let a = self.state.attempts;
        self.state.attempts += 1;
        self.eval.evaluate(op, &self.state.seed_pool[seed], a, &mut self.rng)
    }

    /// Runs one step: one operator of the initial pass, or one follow-up draw.
    /// Returns false once the campaign is done.
    pub fn step(&mut self) -> bool {
        match self.state.phase.clone() {
            Phase::Initial { ops, next } => self.initial_step(ops, next),
            Phase::Followup => self.followup_step(),
            Phase::Done => {}
        }
        self.sync_rng();
        !self.state.is_done()
    }

    /// Steps until done.
    pub fn run(&mut self) {
        while self.step() {}
    }

    /// Steps until `generated_count` reaches `count` or the campaign ends.
    pub fn run_until(&mut self, count: u64) {
        while self.state.generated_count < count && self.step() {}
    }

    fn initial_step(&mut self, ops: Vec<String>, next: usize) {
        if next >= ops.len() || self.state.generated_count >= self.state.params.k {
            self.finish_initial();
            return;
        }
        self.state.phase = Phase::Initial { ops: ops.clone(), next: next + 1 };
        let Some(op) = self.state.op_pool.get(&ops[next]).cloned() else { return };
        let n_seeds = self.state.seed_pool.len();
        let first = self.rng.gen_range(0..n_seeds);
        let mut outcome = self.attempt(&op, first);
        if outcome == Outcome::NoValidInsertion {
            let mut rest: Vec<usize> = (0..n_seeds).filter(|s| *s != first).collect();
            rest.shuffle(&mut self.rng);
            for s in rest {
                outcome = self.attempt(&op, s);
                if outcome != Outcome::NoValidInsertion {
                    break;
                }
            }
        }
        match outcome {
            Outcome::NoValidInsertion => {
                self.state.op_pool.remove(&op.op_id);
                self.state.events.push(event(EventKind::Uninsertable, &op.op_id, None, None, None));
            }
            Outcome::Failed(_) => {
                self.state.events.push(event(EventKind::InitialFail, &op.op_id, None, None, Some(0)));
            }
            Outcome::Scored(p) => {
                self.state.generated_count += 1;
                self.state.events.push(event(EventKind::Initial, &op.op_id, None, Some(&p), Some(0)));
                self.state.note_ancestry(&p);
                if self.state.improves(p.score) {
                    self.state.admit(p);
                }
                self.state.record_series();
            }
        }
    }

    fn finish_initial(&mut self) {
        let generation = self.state.generated_count;
        let opts = self.opts();
        let tops: Vec<SourceProgram> = self.state.ranked().iter().map(|t| t.program.program.clone()).collect();
        for program in tops {
            let ops = self.eval.extract(&program, generation, &opts);
            self.state.merge_extracted(&program.id, ops);
        }
        for op in self.state.op_pool.values_mut() {
            op.penalty = 0;
        }
        self.state.phase = Phase::Followup;
        self.check_done();
    }

    fn check_done(&mut self) {
        if self.state.generated_count >= self.state.params.k || self.state.op_pool.is_empty() {
            self.state.phase = Phase::Done;
        }
    }

    fn followup_step(&mut self) {
        self.check_done();
        if self.state.is_done() {
            return;
        }
        let idx = self.rng.gen_range(0..self.state.op_pool.len());
        let op = self.state.op_pool.values().nth(idx).cloned().unwrap();
        let seed = self.rng.gen_range(0..self.state.seed_pool.len());
        let outcome = self.attempt(&op, seed);
        let seed_id = self.state.seed_pool[seed].seed.id.clone();
        let improving = match outcome {
            Outcome::Scored(p) => {
                self.state.generated_count += 1;
                self.state.note_ancestry(&p);
                if self.state.improves(p.score) {
                    let generation = self.state.generated_count;
                    let opts = self.opts();
                    let extracted = self.eval.extract(&p.program, generation, &opts);
                    self.state.events.push(event(EventKind::Improve, &op.op_id, None, Some(&p), Some(0)));
                    let id = p.program.id.clone();
                    self.state.admit(p);
                    self.state.merge_extracted(&id, extracted);
                    self.state.record_series();
                    true
                } else {
                    let pen = op.penalty + 1;
                    self.state.events.push(event(EventKind::NoImprove, &op.op_id, None, Some(&p), Some(pen)));
                    self.state.ancestry.remove(&p.program.id);
                    self.state.record_series();
                    false
                }
            }
            Outcome::NoValidInsertion | Outcome::Failed(_) => {
                self.state.events.push(event(EventKind::Fail, &op.op_id, Some(&seed_id), None, Some(op.penalty + 1)));
                false
            }
        };
        if let Some(pool_op) = self.state.op_pool.get_mut(&op.op_id) {
            if improving {
                pool_op.penalty = 0;
            } else {
                pool_op.penalty += 1;
                if pool_op.penalty >= self.state.params.m {
                    let pen = pool_op.penalty;
                    self.state.op_pool.remove(&op.op_id);
                    self.state.events.push(event(EventKind::Remove, &op.op_id, None, None, Some(pen)));
                }
            }
        }
        self.check_done();
    }
}

/// Top programs whose deviations name each runtime, plus shared ancestry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IssueGroup {
    pub suspect: String,
    /// Operators in the ancestry of every program of the group.
    pub shared_ancestry: Vec<String>,
    pub programs: Vec<String>,
}

/// A ranked top-set entry as seen by [`issue_groups`].
#[derive(Clone, Copy, Debug)]
pub struct GroupInput<'a> {
    pub program_id: &'a str,
    pub suspect: &'a str,
    pub ancestry: &'a [String],
}

/// Clusters ranked top programs by suspect runtime, then greedily by shared
/// operator ancestry in rank order.
pub fn issue_groups(ranked: &[GroupInput<'_>]) -> Vec<IssueGroup> {
    let mut by_suspect: BTreeMap<&str, Vec<&GroupInput<'_>>> = BTreeMap::new();
    for t in ranked {
        by_suspect.entry(t.suspect).or_default().push(t);
    }
    let mut out = Vec::new();
    for (suspect, entries) in by_suspect {
        let mut groups: Vec<(BTreeSet<String>, Vec<String>)> = Vec::new();
        for t in entries {
            let anc: BTreeSet<String> = t.ancestry.iter().cloned().collect();
            match groups.iter_mut().find(|(shared, _)| !shared.is_disjoint(&anc)) {
                Some((shared, progs)) => {
                    *shared = shared.intersection(&anc).cloned().collect();
                    progs.push(t.program_id.into());
                }
                None => groups.push((anc, alloc::vec![t.program_id.into()])),
            }
        }
        for (shared, programs) in groups {
            out.push(IssueGroup { suspect: suspect.into(), shared_ancestry: shared.into_iter().collect(), programs });
        }
    }
    out
}

#[cfg(test)]
mod tests;
