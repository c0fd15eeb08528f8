//! Native compilation and instrumented runs: seed coverage, seed profiles,
//! and the reachability check for synthesized programs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use warpforge_core::cost::EventCounts;
use warpforge_core::minic::{parse, render, render_instrumented, FrontendError, MarkerMode, SourceProgram};
use warpforge_core::profile::{profile_variable_usage, SeedProfile, Trace};
use warpforge_core::synth::SynthesizedProgram;

use crate::config::Config;
use crate::process::{self, RunError};

#[derive(Debug, thiserror::Error)]
pub enum NativeError {
    #[error("native compile failed:\n{log}")]
    Compile { log: String },
    #[error("native run timed out")]
    Timeout,
    #[error("native run failed ({status}): {stderr}")]
    NonZeroExit { status: String, stderr: String },
    #[error("instrumented run left no complete trace")]
    NoTrace,
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Run(RunError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The host C compiler plus limits for the runs it produces.
#[derive(Clone, Debug)]
pub struct Native {
    pub cc: String,
    pub timeout: Duration,
    /// Parent of per-run temporary directories.
    pub work_dir: Option<PathBuf>,
}

/// Result of one instrumented run.
#[derive(Clone, Debug, PartialEq)]
pub struct NativeRun {
    pub trace: Trace,
    pub stdout: String,
}

impl Native {
    pub fn from_config(c: &Config) -> Native {
        Native { cc: c.toolchain.cc_native.clone(), timeout: c.native_timeout(), work_dir: None }
    }

    fn temp_dir(&self) -> std::io::Result<tempfile::TempDir> {
        match &self.work_dir {
            Some(d) => {
                std::fs::create_dir_all(d)?;
                tempfile::Builder::new().prefix("wf").tempdir_in(d)
            }
            None => tempfile::Builder::new().prefix("wf").tempdir(),
        }
    }

    /// Compiles `text` into `dir` and returns the executable.
    pub fn compile(&self, text: &str, dir: &Path) -> Result<PathBuf, NativeError> {
        let src = dir.join("prog.c");
        let exe = dir.join("prog");
        std::fs::write(&src, text)?;
        let argv = process::expand(&self.cc, &[("input", path_str(&src)), ("output", path_str(&exe))]);
        let out = process::run(&argv, &[], Some(dir), Duration::from_secs(120)).map_err(NativeError::Run)?;
        if !out.status.success() {
            return Err(NativeError::Compile { log: out.stderr_text() });
        }
        Ok(exe)
    }

    /// Runs an executable, requiring exit status 0 within the time limit.
    pub fn execute(&self, exe: &Path, trace: Option<&Path>) -> Result<String, NativeError> {
        let argv = vec![path_str(exe).to_string()];
        let env: Vec<(&str, &Path)> = trace.map(|t| ("WG_TRACE", t)).into_iter().collect();
        let out = match process::run(&argv, &env, exe.parent(), self.timeout) {
            Ok(o) => o,
            Err(RunError::Timeout { .. }) => return Err(NativeError::Timeout),
            Err(e) => return Err(NativeError::Run(e)),
        };
        if !out.status.success() {
            return Err(NativeError::NonZeroExit { status: out.status.to_string(), stderr: out.stderr_text() });
        }
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    }

    /// Compiles and runs `text` once; the trace is read back from `WG_TRACE`.
    pub fn run_traced(&self, text: &str) -> Result<NativeRun, NativeError> {
        let dir = self.temp_dir()?;
        let exe = self.compile(text, dir.path())?;
        let trace_path = dir.path().join("trace.txt");
        let stdout = self.execute(&exe, Some(&trace_path))?;
        let trace = Trace::parse(&std::fs::read_to_string(&trace_path).unwrap_or_default());
        if !trace.complete {
            return Err(NativeError::NoTrace);
        }
        Ok(NativeRun { trace, stdout })
    }

    /// Compiles and runs `text` without instrumentation.
    pub fn run_plain(&self, text: &str) -> Result<String, NativeError> {
        let dir = self.temp_dir()?;
        let exe = self.compile(text, dir.path())?;
        self.execute(&exe, None)
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("work paths are UTF-8")
}

/// Coverage, standard output and event counts of one native run of a seed.
#[derive(Clone, Debug, PartialEq)]
pub struct Coverage {
    pub covered_lines: BTreeSet<u32>,
    pub baseline_output: String,
    pub events: EventCounts,
}

pub fn collect_coverage(seed: &SourceProgram, native: &Native) -> Result<Coverage, NativeError> {
    let unit = seed.parse()?;
    // coverage markers and event counters share one run
    let with_events = render_instrumented(&unit, MarkerMode::All, true);
    let run = native.run_traced(&with_events.text)?;
    Ok(Coverage {
        covered_lines: run.trace.covered_lines(&with_events.markers),
        baseline_output: run.stdout,
        events: run.trace.events,
    })
}

/// Canonicalizes a seed and profiles it. The returned seed text is the
/// canonical rendering, so profile line numbers refer to it.
pub fn profile_seed(seed: &SourceProgram, native: &Native) -> Result<(SeedProfile, EventCounts), NativeError> {
    let unit = parse(&seed.text)?;
    let canonical = SourceProgram::new(seed.id.clone(), render(&unit), seed.path.clone());
    let unit = canonical.parse()?;
    let usage = profile_variable_usage(&unit);
    let cov = collect_coverage(&canonical, native)?;
    let profile = SeedProfile {
        seed: canonical,
        usage,
        covered_lines: cov.covered_lines,
        exec_ok: true,
        baseline_output: cov.baseline_output,
    };
    Ok((profile, cov.events))
}

/// Outcome of checking that an inserted operator runs.
#[derive(Clone, Debug, PartialEq)]
pub struct Verified {
    /// The marker on the operator's first line fired.
    pub reached: bool,
    pub events: EventCounts,
    pub stdout: String,
}

/// Instruments only the operator's first line and runs the program once,
/// counting events in the same run.
pub fn verify_insertion(sp: &SynthesizedProgram, native: &Native) -> Result<Verified, NativeError> {
    let unit = sp.program.parse()?;
    let inst = render_instrumented(&unit, MarkerMode::Lines([sp.op_line].into_iter().collect()), true);
    let run = native.run_traced(&inst.text)?;
    let reached = run.trace.covered_lines(&inst.markers).contains(&sp.op_line);
    Ok(Verified { reached, events: run.trace.events, stdout: run.stdout })
}
