//! Corpus preparation: the initial operator pool, seed generation and seed profiling.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use warpforge_core::minic::{validate_subset, SourceProgram};
use warpforge_core::operator::{extract_operators, ExtractOptions, OperatorKind};
use warpforge_core::seedgen::{generate_seed, SeedGenOptions};

use crate::native::{profile_seed, Native};
use crate::store::{StoredProfile, Workspace};

#[derive(Clone, Debug, Default)]
pub struct BootstrapSummary {
    pub programs: usize,
    pub per_kind: BTreeMap<OperatorKind, usize>,
    /// `(file, reason)` for every program left out.
    pub skipped: Vec<(String, String)>,
}

impl BootstrapSummary {
    pub fn total(&self) -> usize {
        self.per_kind.values().sum()
    }
}

/// Extracts operators from every `.c` file of `historical` into `operators/`.
pub fn bootstrap_operators(historical: &Path, ws: &Workspace, opts: &ExtractOptions) -> anyhow::Result<BootstrapSummary> {
    let mut files: Vec<_> = std::fs::read_dir(historical)
        .with_context(|| format!("reading {}", historical.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "c"))
        .collect();
    files.sort();
    let mut summary = BootstrapSummary::default();
    let mut seen = std::collections::BTreeSet::new();
    for path in files {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let id = path.file_stem().unwrap().to_string_lossy().into_owned();
        let text = std::fs::read_to_string(&path)?;
        let program = SourceProgram::new(id, text, path.to_string_lossy());
        let violations = validate_subset(&program);
        if !violations.is_empty() {
            let why: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            summary.skipped.push((name, why.join("; ")));
            continue;
        }
        let unit = program.parse()?;
        summary.programs += 1;
        for op in extract_operators(&unit, &program.id, 0, opts) {
            if seen.insert(op.op_id.clone()) {
                *summary.per_kind.entry(op.kind).or_default() += 1;
                ws.write_operator("operators", &op)?;
            }
        }
    }
    if summary.total() == 0 {
        bail!("no operators extracted from {}", historical.display());
    }
    Ok(summary)
}

/// Writes `count` seeds that compile, run cleanly and profile. Candidates
/// that fail are replaced by the generator's next draw.
pub fn generate_seed_corpus(count: usize, rng_seed: u64, ws: &Workspace, native: &Native) -> anyhow::Result<Vec<SourceProgram>> {
    anyhow::ensure!(count >= 1, "seed count must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let opts = SeedGenOptions::default();
    let mut out = Vec::new();
    for i in 0..count {
        let id = format!("seed_{:03}", i);
        let mut tries = 0;
        loop {
            tries += 1;
            let seed = generate_seed(&mut rng, &id, &opts)?;
            match profile_seed(&seed, native) {
                Ok(_) => {
                    ws.write_seed(&seed)?;
                    out.push(seed);
                    break;
                }
                Err(e) if tries < 50 => eprintln!("{}: candidate rejected ({})", id, e),
                Err(e) => bail!("{}: no candidate passed after {} tries: {}", id, tries, e),
            }
        }
    }
    Ok(out)
}

/// `(seed id, reason)` for each seed that failed profiling.
pub type Rejected = Vec<(String, String)>;

/// Profiles every seed in `seeds/`. Rejected seeds are reported, not fatal.
pub fn profile_seeds(ws: &Workspace, native: &Native) -> anyhow::Result<(Vec<StoredProfile>, Rejected)> {
    let mut ok = Vec::new();
    let mut rejected = Vec::new();
    for seed in ws.read_seeds()? {
        match profile_seed(&seed, native) {
            Ok((profile, events)) => {
                let stored = StoredProfile { profile, events };
                ws.write_profile(&stored)?;
                ok.push(stored);
            }
            Err(e) => rejected.push((seed.id.clone(), e.to_string())),
        }
    }
    Ok((ok, rejected))
}
