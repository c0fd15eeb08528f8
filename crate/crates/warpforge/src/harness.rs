//! Execution backends: command-line Wasm runtimes timed in AOT mode, and
//! simulated runtimes that price a native run's event counts.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use warpforge_core::cost::{CostModel, EventCounts};
use warpforge_core::dist::ExecutionRecord;
use warpforge_core::minic::SourceProgram;

use crate::config::{Config, RuntimeConfig};
use crate::process::{self, RunError};

/// What the native verification run observed; shared by every backend.
#[derive(Clone, Copy, Debug)]
pub struct Observed<'a> {
    pub events: &'a EventCounts,
    pub stdout: &'a str,
}

pub trait Backend {
    /// Runtime names in campaign order.
    fn runtimes(&self) -> Vec<String>;
    /// `(name, version)` pairs for the report.
    fn versions(&self) -> Vec<(String, String)>;
    /// Measures `program` on every runtime. Failures come back as failed records.
    fn execute(&mut self, program: &SourceProgram, observed: Observed<'_>) -> ExecutionRecord;
}

/// Runtimes whose execution time is a weighted sum of event counts.
#[derive(Clone, Debug)]
pub struct Simulated {
    pub model: CostModel,
    pub repetitions: u32,
}

impl Backend for Simulated {
    fn runtimes(&self) -> Vec<String> {
        self.model.runtimes.iter().map(|r| r.name.clone()).collect()
    }

    fn versions(&self) -> Vec<(String, String)> {
        self.model.runtimes.iter().map(|r| (r.name.clone(), "simulated".to_string())).collect()
    }

    fn execute(&mut self, program: &SourceProgram, observed: Observed<'_>) -> ExecutionRecord {
        let names = self.runtimes();
        let raw: Vec<Vec<f64>> =
            self.model.times(observed.events).into_iter().map(|t| vec![t; self.repetitions as usize]).collect();
        ExecutionRecord::from_times(&program.id, &names, raw)
            .unwrap_or_else(|e| ExecutionRecord::failed(&program.id, &names, &names[0], &e.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("wasm compile failed: {log}")]
    WasmCompile { log: String },
    #[error("AOT compile failed: {log}")]
    AotCompile { log: String },
    #[error("run timed out")]
    RunTimeout,
    #[error("runtime failed ({status}): {stderr}")]
    NonZeroExit { status: String, stderr: String },
    #[error("standard output differs from the native run")]
    OutputMismatch,
    #[error(transparent)]
    Run(RunError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Serializes timed runs across the whole process.
static RUN_TOKEN: Mutex<()> = Mutex::new(());
static MEASURING: AtomicBool = AtomicBool::new(false);

/// A healthy command-line runtime.
#[derive(Clone, Debug)]
pub struct Adapter {
    pub config: RuntimeConfig,
    pub version: String,
}

impl Adapter {
    pub fn name(&self) -> &str {
        &self.config.name
    }

    /// The AOT artifact for `module`, or the module itself when the runtime
    /// has no separate compile step.
    pub fn precompile(&self, module: &Path, dir: &Path, timeout: Duration) -> Result<PathBuf, HarnessError> {
        let Some(aot) = &self.config.aot_cmd else { return Ok(module.to_path_buf()) };
        let out_path = dir.join(format!("{}.aot", self.name()));
        let argv = process::expand(aot, &[("input", path_str(module)), ("output", path_str(&out_path))]);
        let out = process::run(&argv, &[], Some(dir), timeout).map_err(HarnessError::Run)?;
        if !out.status.success() {
            return Err(HarnessError::AotCompile { log: out.stderr_text() });
        }
        Ok(out_path)
    }

    /// `warmup` untimed runs, then `repetitions` timed ones. Returns the
    /// wall-clock seconds and the standard output of the last run.
    pub fn measure(
        &self,
        artifact: &Path,
        repetitions: u32,
        warmup: u32,
        timeout: Duration,
    ) -> Result<(Vec<f64>, String), HarnessError> {
        let argv = process::expand(&self.config.run_cmd, &[("module", path_str(artifact))]);
        let _token = RUN_TOKEN.lock().unwrap_or_else(|p| p.into_inner());
        let was = MEASURING.swap(true, Ordering::SeqCst);
        assert!(!was, "overlapping timed runs");
        let result = (|| {
            let mut times = Vec::new();
            let mut stdout = String::new();
            for i in 0..warmup + repetitions {
                let out = match process::run(&argv, &[], artifact.parent(), timeout) {
                    Ok(o) => o,
                    Err(RunError::Timeout { .. }) => return Err(HarnessError::RunTimeout),
                    Err(e) => return Err(HarnessError::Run(e)),
                };
                if !out.status.success() {
                    return Err(HarnessError::NonZeroExit { status: out.status.to_string(), stderr: out.stderr_text() });
                }
                if i >= warmup {
                    times.push(out.elapsed.as_secs_f64());
                }
                stdout = String::from_utf8_lossy(&out.stdout).into_owned();
            }
            Ok((times, stdout))
        })();
        MEASURING.store(false, Ordering::SeqCst);
        result
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("work paths are UTF-8")
}

/// Compiles C source to a WASI module with the configured toolchain.
pub fn compile_to_wasm(cc_wasm: &str, text: &str, dir: &Path) -> Result<PathBuf, HarnessError> {
    let src = dir.join("prog.c");
    let module = dir.join("prog.wasm");
    std::fs::write(&src, text)?;
    let argv = process::expand(cc_wasm, &[("input", path_str(&src)), ("output", path_str(&module))]);
    let out = process::run(&argv, &[], Some(dir), Duration::from_secs(300)).map_err(HarnessError::Run)?;
    if !out.status.success() || !module.is_file() {
        return Err(HarnessError::WasmCompile { log: out.stderr_text() });
    }
    Ok(module)
}

/// Real runtimes driven through their command lines.
pub struct CommandHarness {
    pub cc_wasm: String,
    pub adapters: Vec<Adapter>,
    pub repetitions: u32,
    pub warmup: u32,
    pub timeout: Duration,
    pub work_dir: Option<PathBuf>,
}

/// Health-check result for one configured runtime.
#[derive(Clone, Debug)]
pub struct Health {
    pub name: String,
    pub version: String,
    pub error: Option<String>,
}

const HEALTH_PROGRAM: &str = "#include <stdio.h>\nint main(void) {\n  printf(\"ok %d\\n\", 6 * 7);\n  return 0;\n}\n";

impl CommandHarness {
    /// Probes every configured runtime; only healthy ones are kept.
    pub fn from_config(c: &Config) -> (CommandHarness, Vec<Health>) {
        let mut h = CommandHarness {
            cc_wasm: c.toolchain.cc_wasm.clone(),
            adapters: Vec::new(),
            repetitions: c.repetitions,
            warmup: c.warmup,
            timeout: c.run_timeout(),
            work_dir: None,
        };
        let mut report = Vec::new();
        let module = h.temp_dir().map_err(HarnessError::from).and_then(|d| {
            let m = compile_to_wasm(&h.cc_wasm, HEALTH_PROGRAM, d.path())?;
            Ok((d, m))
        });
        for rc in &c.runtimes {
            let version = rc.version_cmd.as_deref().map(probe_version).unwrap_or_default();
            let adapter = Adapter { config: rc.clone(), version: version.clone() };
            let error = match &module {
                Err(e) => Some(e.to_string()),
                Ok((dir, m)) => match adapter
                    .precompile(m, dir.path(), h.timeout)
                    .and_then(|a| adapter.measure(&a, 1, 0, h.timeout))
                {
                    Ok((_, out)) if out == "ok 42\n" => None,
                    Ok((_, out)) => Some(format!("unexpected output {:?}", out)),
                    Err(e) => Some(e.to_string()),
                },
            };
            if error.is_none() {
                h.adapters.push(adapter);
            }
            report.push(Health { name: rc.name.clone(), version, error });
        }
        (h, report)
    }

    fn temp_dir(&self) -> std::io::Result<tempfile::TempDir> {
        match &self.work_dir {
            Some(d) => {
                std::fs::create_dir_all(d)?;
                tempfile::Builder::new().prefix("wasm").tempdir_in(d)
            }
            None => tempfile::Builder::new().prefix("wasm").tempdir(),
        }
    }

    fn try_execute(&self, program: &SourceProgram, stdout: &str) -> Result<Vec<Vec<f64>>, (String, HarnessError)> {
        let first = self.adapters.first().map(|a| a.name().to_string()).unwrap_or_default();
        let dir = self.temp_dir().map_err(|e| (first.clone(), e.into()))?;
        let module = compile_to_wasm(&self.cc_wasm, &program.text, dir.path()).map_err(|e| (first, e))?;
        let mut raw = Vec::new();
        for a in &self.adapters {
            let tag = |e| (a.name().to_string(), e);
            let artifact = a.precompile(&module, dir.path(), self.timeout).map_err(tag)?;
            let (times, out) = a.measure(&artifact, self.repetitions, self.warmup, self.timeout).map_err(tag)?;
            if out != stdout {
                return Err(tag(HarnessError::OutputMismatch));
            }
            raw.push(times);
        }
        Ok(raw)
    }
}

fn probe_version(cmd: &str) -> String {
    let argv = process::expand(cmd, &[]);
    match process::run(&argv, &[], None, Duration::from_secs(10)) {
        Ok(o) if o.status.success() => String::from_utf8_lossy(&o.stdout).lines().next().unwrap_or("").trim().to_string(),
        _ => "unknown".into(),
    }
}

impl Backend for CommandHarness {
    fn runtimes(&self) -> Vec<String> {
        self.adapters.iter().map(|a| a.name().to_string()).collect()
    }

    fn versions(&self) -> Vec<(String, String)> {
        self.adapters.iter().map(|a| (a.name().to_string(), a.version.clone())).collect()
    }

    fn execute(&mut self, program: &SourceProgram, observed: Observed<'_>) -> ExecutionRecord {
        let names = self.runtimes();
        match self.try_execute(program, observed.stdout) {
            Ok(raw) => ExecutionRecord::from_times(&program.id, &names, raw)
                .unwrap_or_else(|e| ExecutionRecord::failed(&program.id, &names, &names[0], &e.to_string())),
            Err((runtime, e)) => ExecutionRecord::failed(&program.id, &names, &runtime, &e.to_string()),
        }
    }
}
