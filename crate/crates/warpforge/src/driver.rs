//! Runs a campaign against a backend, persisting every artifact and a
//! checkpoint after each scored program.

use std::path::Path;

use anyhow::{bail, Context};
use rand_chacha::ChaCha8Rng;
use warpforge_core::campaign::{CampaignState, Controller, Evaluator, Outcome, ScoredProgram};
use warpforge_core::dist::{deviation_degrees, oracle_ratio, OracleRatio};
use warpforge_core::minic::SourceProgram;
use warpforge_core::operator::{extract_operators, ExtractOptions, Operator};
use warpforge_core::profile::SeedProfile;
use warpforge_core::synth::{synthesize, SynthError, ValuePool};

use crate::config::Config;
use crate::harness::{Backend, Observed};
use crate::native::{verify_insertion, Native};
use crate::report::RuntimeVersion;
use crate::store::{write_json, Workspace};

/// Synthesize, verify natively, execute and score one candidate.
pub struct Pipeline<'a, B: Backend> {
    pub ws: &'a Workspace,
    pub native: &'a Native,
    pub backend: &'a mut B,
    pub oracle: OracleRatio,
    pub pool: ValuePool,
    /// First I/O error; the campaign stops on it.
    pub io_error: Option<anyhow::Error>,
}

impl<B: Backend> Pipeline<'_, B> {
    fn note<T>(&mut self, r: anyhow::Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.io_error.get_or_insert(e);
                None
            }
        }
    }
}

impl<B: Backend> Evaluator for Pipeline<'_, B> {
    fn evaluate(&mut self, op: &Operator, seed: &SeedProfile, attempt: u64, rng: &mut ChaCha8Rng) -> Outcome {
        let sp = match synthesize(op, seed, &self.pool, attempt, rng) {
            Ok(sp) => sp,
            Err(SynthError::NoValidInsertion | SynthError::UnboundPostVar(_)) => return Outcome::NoValidInsertion,
            Err(e) => return Outcome::Failed(e.to_string()),
        };
        let written = self.ws.write_generated(&sp);
        self.note(written);
        let verified = match verify_insertion(&sp, self.native) {
            Ok(v) if v.reached => v,
            Ok(_) => return Outcome::Failed("operator not reached".into()),
            Err(e) => return Outcome::Failed(e.to_string()),
        };
        let record = self.backend.execute(&sp.program, Observed { events: &verified.events, stdout: &verified.stdout });
        let written = self.ws.write_record(&record);
        self.note(written);
        match deviation_degrees(&record, &self.oracle) {
            Ok(dev) => Outcome::Scored(ScoredProgram {
                score: dev.dist_score,
                program: sp.program,
                op_id: sp.op_id,
                seed_id: sp.seed_id,
                deviation: dev,
            }),
            Err(_) => Outcome::Failed(format!("execution failed: {:?}", record.status)),
        }
    }

    fn extract(&mut self, program: &SourceProgram, generation: u64, opts: &ExtractOptions) -> Vec<Operator> {
        let Ok(unit) = program.parse() else { return Vec::new() };
        let ops = extract_operators(&unit, &program.id, generation, opts);
        for op in &ops {
            if !self.ws.has_operator(&op.op_id) {
                let written = self.ws.write_operator("pool", op);
                self.note(written);
            }
        }
        ops
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Stop (leaving a checkpoint) once this many programs are scored.
    pub stop_after: Option<u64>,
    /// Continue from this checkpoint instead of starting over.
    pub resume: Option<std::path::PathBuf>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub state: CampaignState,
    pub finished: bool,
}

/// Scores the profiled seeds, derives the oracle and builds the initial state.
pub fn start<B: Backend>(ws: &Workspace, config: &Config, backend: &mut B) -> anyhow::Result<CampaignState> {
    let ops = ws.read_operators("operators")?;
    let profiles = ws.read_profiles()?;
    if profiles.is_empty() {
        bail!("no seed profiles in {}; run profile-seeds first", ws.root.display());
    }
    let mut records = Vec::new();
    for p in &profiles {
        let r = backend.execute(&p.profile.seed, Observed { events: &p.events, stdout: &p.profile.baseline_output });
        ws.write_record(&r)?;
        records.push(r);
    }
    let oracle = oracle_ratio(&records).context("deriving the oracle ratio")?;
    ws.write_oracle(&oracle)?;
    let ok: std::collections::BTreeSet<&str> =
        records.iter().filter(|r| r.is_ok()).map(|r| r.program_id.as_str()).collect();
    let seeds: Vec<SeedProfile> =
        profiles.into_iter().filter(|p| ok.contains(p.profile.seed.id.as_str())).map(|p| p.profile).collect();
    Ok(CampaignState::new(config.params(), ops, seeds, oracle)?)
}

/// Runs (or resumes) a campaign in `ws` and writes its report.
pub fn run_campaign<B: Backend>(
    ws: &Workspace,
    config: &Config,
    backend: &mut B,
    native: &Native,
    opts: &RunOptions,
) -> anyhow::Result<RunOutcome> {
    let state = match &opts.resume {
        Some(path) => {
            let state = ws.load_checkpoint(path)?;
            // drop log lines written after the checkpoint
            ws.write_events(&state.events)?;
            state
        }
        None => {
            ws.clear_campaign()?;
            std::fs::write(ws.path("config.echo.toml"), config.to_toml())?;
            let versions: Vec<RuntimeVersion> =
                backend.versions().into_iter().map(|(name, version)| RuntimeVersion { name, version }).collect();
            write_json(&ws.path("runtimes.json"), &versions)?;
            ws.write_events(&[])?;
            start(ws, config, backend)?
        }
    };
    let mut native = native.clone();
    native.work_dir = Some(ws.work_dir());
    let mut pipeline = Pipeline {
        ws,
        native: &native,
        backend,
        oracle: state.oracle.clone(),
        pool: ValuePool::default(),
        io_error: None,
    };
    let mut c = Controller::new(state, &mut pipeline);
    let mut logged = c.state.events.len();
    let finished = loop {
        if opts.stop_after.is_some_and(|n| c.state.generated_count >= n) && !c.state.is_done() {
            break false;
        }
        let before = c.state.generated_count;
        let more = c.step();
        ws.append_events(&c.state.events[logged..])?;
        logged = c.state.events.len();
        if c.state.generated_count != before || !more {
            ws.save_checkpoint(&c.state)?;
        }
        if !more {
            break true;
        }
    };
    let state = c.state;
    if let Some(e) = pipeline.io_error.take() {
        return Err(e);
    }
    if finished {
        crate::report::write_report(ws)?;
    }
    Ok(RunOutcome { state, finished })
}

/// Simulated backend from a cost-model file.
pub fn load_cost_model(path: &Path, repetitions: u32) -> anyhow::Result<crate::harness::Simulated> {
    let model = crate::store::read_json(path)?;
    Ok(crate::harness::Simulated { model, repetitions })
}
