//! Campaign configuration, read from a TOML file.

use std::path::Path;
use std::time::Duration;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use warpforge_core::campaign::CampaignParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Toolchain {
    /// Native compiler used for profiling and verification.
    #[serde(default = "default_cc_native")]
    pub cc_native: String,
    /// C to WASI module compiler.
    #[serde(default = "default_cc_wasm")]
    pub cc_wasm: String,
}

fn default_cc_native() -> String {
    "cc -O0 -w -fwrapv -o {output} {input} -lm".into()
}

fn default_cc_wasm() -> String {
    "emcc -O2 -o {output} {input}".into()
}

impl Default for Toolchain {
    fn default() -> Self {
        Toolchain { cc_native: default_cc_native(), cc_wasm: default_cc_wasm() }
    }
}

/// A runtime driven through its command line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeConfig {
    pub name: String,
    /// Ahead-of-time compile, with `{input}` (the module) and `{output}`.
    /// Without it the module itself is run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aot_cmd: Option<String>,
    /// Runs `{module}` (the AOT artifact when there is one).
    pub run_cmd: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_cmd: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    #[serde(default = "d_n")]
    pub n: usize,
    #[serde(default = "d_m")]
    pub m: u32,
    #[serde(default = "d_k")]
    pub k: u64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "d_max_lines")]
    pub max_operator_lines: u32,
}

fn d_n() -> usize {
    20
}
fn d_m() -> u32 {
    5
}
fn d_k() -> u64 {
    1000
}
fn d_max_lines() -> u32 {
    60
}
fn d_reps() -> u32 {
    5
}
fn d_warmup() -> u32 {
    1
}
fn d_timeout() -> f64 {
    60.0
}
fn d_native_timeout() -> f64 {
    10.0
}
fn d_seed_count() -> usize {
    100
}

impl Default for CampaignSection {
    fn default() -> Self {
        CampaignSection { n: d_n(), m: d_m(), k: d_k(), rng_seed: 0, max_operator_lines: d_max_lines() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    /// Directory of historical programs operators are extracted from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub historical: Option<String>,
    /// Seeds written by `gen-seeds`.
    #[serde(default = "d_seed_count")]
    pub seed_count: usize,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection { historical: None, seed_count: d_seed_count() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Timed runs per runtime.
    #[serde(default = "d_reps")]
    pub repetitions: u32,
    /// Untimed runs before the timed ones.
    #[serde(default = "d_warmup")]
    pub warmup: u32,
    /// Per-run limit on a runtime, in seconds.
    #[serde(default = "d_timeout")]
    pub timeout_s: f64,
    /// Limit on native profiling and verification runs, in seconds.
    #[serde(default = "d_native_timeout")]
    pub native_timeout_s: f64,
    #[serde(default)]
    pub toolchain: Toolchain,
    #[serde(default)]
    pub campaign: CampaignSection,
    #[serde(default)]
    pub corpus: CorpusSection,
    #[serde(default)]
    pub runtimes: Vec<RuntimeConfig>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            repetitions: d_reps(),
            warmup: d_warmup(),
            timeout_s: d_timeout(),
            native_timeout_s: d_native_timeout(),
            toolchain: Toolchain::default(),
            campaign: CampaignSection::default(),
            corpus: CorpusSection::default(),
            runtimes: Vec::new(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> anyhow::Result<Config> {
        let c: Config = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> anyhow::Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Config::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.repetitions >= 1, "repetitions must be at least 1");
        anyhow::ensure!(self.timeout_s > 0.0 && self.native_timeout_s > 0.0, "timeouts must be positive");
        let c = &self.campaign;
        anyhow::ensure!(c.n >= 1 && c.m >= 1 && c.k >= 1, "campaign n, m and k must be at least 1");
        let mut names: Vec<&str> = self.runtimes.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        anyhow::ensure!(names.len() == self.runtimes.len(), "runtime names must be unique");
        Ok(())
    }

    pub fn params(&self) -> CampaignParams {
        CampaignParams {
            n: self.campaign.n,
            m: self.campaign.m,
            k: self.campaign.k,
            rng_seed: self.campaign.rng_seed,
            max_operator_lines: self.campaign.max_operator_lines,
        }
    }

    pub fn run_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_s)
    }

    pub fn native_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.native_timeout_s)
    }
}
