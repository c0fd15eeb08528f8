//! On-disk layout of a campaign directory.
//!
//! ```text
//! operators/<op_id>.json          initial pool, written by bootstrap-ops
//! seeds/<id>.c                    seed programs
//! seeds/<id>.profile.json         seed profiles
//! pool/<op_id>.json               operators extracted during a campaign
//! generated/<index>_<op>_<seed>.c synthesized programs, plus .plan.json
//! records/<program_id>.json       execution records (seeds included)
//! events.log                      one JSON event per line
//! checkpoint                      resumable campaign state
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use warpforge_core::campaign::{CampaignState, Event};
use warpforge_core::cost::EventCounts;
use warpforge_core::dist::{ExecutionRecord, OracleRatio};
use warpforge_core::minic::SourceProgram;
use warpforge_core::operator::Operator;
use warpforge_core::profile::SeedProfile;
use warpforge_core::synth::SynthesizedProgram;

/// A seed profile plus the event counts of its profiling run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredProfile {
    #[serde(flatten)]
    pub profile: SeedProfile,
    pub events: EventCounts,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("checkpoint is corrupt: {0}")]
    Corrupt(String),
}

#[derive(Clone, Debug)]
pub struct Workspace {
    pub root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Workspace {
        Workspace { root: root.into() }
    }

    pub fn dir(&self, name: &str) -> anyhow::Result<PathBuf> {
        let d = self.root.join(name);
        fs::create_dir_all(&d).with_context(|| format!("creating {}", d.display()))?;
        Ok(d)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn work_dir(&self) -> PathBuf {
        self.root.join("work")
    }

    pub fn write_operator(&self, sub: &str, op: &Operator) -> anyhow::Result<()> {
        write_json(&self.dir(sub)?.join(format!("{}.json", op.op_id)), op)
    }

    pub fn has_operator(&self, op_id: &str) -> bool {
        ["operators", "pool"].iter().any(|d| self.root.join(d).join(format!("{}.json", op_id)).is_file())
    }

    /// Operators of one directory, in id order.
    pub fn read_operators(&self, sub: &str) -> anyhow::Result<Vec<Operator>> {
        read_all(&self.root.join(sub), ".json", read_json)
    }

    pub fn write_seed(&self, seed: &SourceProgram) -> anyhow::Result<PathBuf> {
        let p = self.dir("seeds")?.join(format!("{}.c", seed.id));
        fs::write(&p, &seed.text)?;
        Ok(p)
    }

    pub fn read_seeds(&self) -> anyhow::Result<Vec<SourceProgram>> {
        read_all(&self.root.join("seeds"), ".c", |p| {
            let text = fs::read_to_string(p)?;
            let id = p.file_stem().unwrap().to_string_lossy().into_owned();
            Ok(SourceProgram::new(id, text, p.to_string_lossy()))
        })
    }

    pub fn write_profile(&self, p: &StoredProfile) -> anyhow::Result<()> {
        write_json(&self.dir("seeds")?.join(format!("{}.profile.json", p.profile.seed.id)), p)
    }

    pub fn read_profiles(&self) -> anyhow::Result<Vec<StoredProfile>> {
        read_all(&self.root.join("seeds"), ".profile.json", read_json)
    }

    pub fn write_generated(&self, sp: &SynthesizedProgram) -> anyhow::Result<()> {
        let d = self.dir("generated")?;
        fs::write(d.join(format!("{}.c", sp.program.id)), &sp.program.text)?;
        write_json(&d.join(format!("{}.plan.json", sp.program.id)), sp)
    }

    pub fn generated_exists(&self, program_id: &str) -> bool {
        self.root.join("generated").join(format!("{}.c", program_id)).is_file()
    }

    pub fn write_record(&self, r: &ExecutionRecord) -> anyhow::Result<()> {
        write_json(&self.dir("records")?.join(format!("{}.json", r.program_id)), r)
    }

    pub fn read_record(&self, program_id: &str) -> anyhow::Result<ExecutionRecord> {
        read_json(&self.root.join("records").join(format!("{}.json", program_id)))
    }

    pub fn write_oracle(&self, o: &OracleRatio) -> anyhow::Result<()> {
        write_json(&self.path("oracle.json"), o)
    }

    pub fn read_oracle(&self) -> anyhow::Result<OracleRatio> {
        read_json(&self.path("oracle.json"))
    }

    pub fn write_events(&self, events: &[Event]) -> anyhow::Result<()> {
        let mut text = String::new();
        for e in events {
            text.push_str(&serde_json::to_string(e)?);
            text.push('\n');
        }
        fs::write(self.path("events.log"), text)?;
        Ok(())
    }

    pub fn append_events(&self, events: &[Event]) -> anyhow::Result<()> {
        let mut f = fs::OpenOptions::new().create(true).append(true).open(self.path("events.log"))?;
        for e in events {
            writeln!(f, "{}", serde_json::to_string(e)?)?;
        }
        Ok(())
    }

    pub fn read_events(&self) -> anyhow::Result<Vec<Event>> {
        let text = fs::read_to_string(self.path("events.log")).context("reading events.log")?;
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("events.log line {}", i + 1)))
            .collect()
    }

    /// Writes the state with a SHA-256 of its JSON on the first line.
    pub fn save_checkpoint(&self, state: &CampaignState) -> anyhow::Result<()> {
        let body = serde_json::to_string(state)?;
        let tmp = self.path("checkpoint.tmp");
        fs::write(&tmp, format!("sha256 {}\n{}", hex(&Sha256::digest(body.as_bytes())), body))?;
        fs::rename(&tmp, self.path("checkpoint"))?;
        Ok(())
    }

    /// Loads a checkpoint, checking its hash and that every top program's
    /// files are still present.
    pub fn load_checkpoint(&self, path: &Path) -> anyhow::Result<CampaignState> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let (head, body) = text.split_once('\n').ok_or_else(|| CheckpointError::Corrupt("no header".into()))?;
        let want = head.strip_prefix("sha256 ").ok_or_else(|| CheckpointError::Corrupt("bad header".into()))?;
        if hex(&Sha256::digest(body.as_bytes())) != want {
            bail!(CheckpointError::Corrupt("content hash mismatch".into()));
        }
        let state: CampaignState =
            serde_json::from_str(body).map_err(|e| CheckpointError::Corrupt(format!("unreadable state: {}", e)))?;
        for t in &state.top {
            let id = &t.program.program.id;
            if !self.generated_exists(id) {
                bail!(CheckpointError::Corrupt(format!("generated/{}.c is missing", id)));
            }
        }
        Ok(state)
    }

    /// Removes the outputs of a previous campaign run.
    pub fn clear_campaign(&self) -> anyhow::Result<()> {
        for d in ["pool", "generated", "records", "work"] {
            let p = self.path(d);
            if p.exists() {
                fs::remove_dir_all(&p)?;
            }
        }
        for f in ["events.log", "checkpoint", "oracle.json", "report.txt", "report.json", "config.echo.toml", "runtimes.json"] {
            let p = self.path(f);
            if p.exists() {
                fs::remove_file(&p)?;
            }
        }
        Ok(())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{:02x}", b)).collect()
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Reads every file of `dir` ending in `suffix`, in file-name order.
/// A missing directory reads as empty.
fn read_all<T>(dir: &Path, suffix: &str, read: impl Fn(&Path) -> anyhow::Result<T>) -> anyhow::Result<Vec<T>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(suffix)))
        .collect();
    paths.sort();
    paths.iter().map(|p| read(p)).collect()
}
