//! External commands: template expansion and timed, killable runs.

use std::io::Read;
use std::path::Path;
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

/// Splits a command template on whitespace and substitutes `{name}`
/// placeholders in every word. Quoting is not supported, so substituted
/// paths must not contain spaces.
pub fn expand(template: &str, vars: &[(&str, &str)]) -> Vec<String> {
    template
        .split_whitespace()
        .map(|word| {
            let mut w = word.to_string();
            for (k, v) in vars {
                w = w.replace(&format!("{{{}}}", k), v);
            }
            w
        })
        .collect()
}

#[derive(Debug)]
pub struct ProcOutput {
    pub status: ExitStatus,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    /// Wall-clock from spawn to exit.
    pub elapsed: Duration,
}

impl ProcOutput {
    pub fn stderr_text(&self) -> String {
        String::from_utf8_lossy(&self.stderr).into_owned()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("empty command")]
    Empty,
    #[error("cannot start `{program}`: {source}")]
    Spawn { program: String, source: std::io::Error },
    #[error("`{program}` timed out after {secs:.1} s")]
    Timeout { program: String, secs: f64 },
    #[error("waiting for `{program}`: {source}")]
    Wait { program: String, source: std::io::Error },
}

/// Runs `argv` to completion or until `timeout`, killing it on expiry.
pub fn run(argv: &[String], env: &[(&str, &Path)], cwd: Option<&Path>, timeout: Duration) -> Result<ProcOutput, RunError> {
    let (program, args) = argv.split_first().ok_or(RunError::Empty)?;
    let mut cmd = Command::new(program);
    cmd.args(args).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    if let Some(dir) = cwd {
        cmd.current_dir(dir);
    }
    let start = Instant::now();
    let mut child = cmd.spawn().map_err(|source| RunError::Spawn { program: program.clone(), source })?;
    // drain both pipes concurrently so a chatty child cannot block
    let mut out = child.stdout.take().unwrap();
    let mut err = child.stderr.take().unwrap();
    let out_thread = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = out.read_to_end(&mut buf);
        buf
    });
    let err_thread = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = err.read_to_end(&mut buf);
        buf
    });
    let waited = child.wait_timeout(timeout).map_err(|source| RunError::Wait { program: program.clone(), source })?;
    let status = match waited {
        Some(s) => s,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            let _ = out_thread.join();
            let _ = err_thread.join();
            return Err(RunError::Timeout { program: program.clone(), secs: timeout.as_secs_f64() });
        }
    };
    let elapsed = start.elapsed();
    let stdout = out_thread.join().unwrap_or_default();
    let stderr = err_thread.join().unwrap_or_default();
    Ok(ProcOutput { status, stdout, stderr, elapsed })
}

/// Whether `program` resolves to an executable on `PATH` (or is a path to one).
pub fn on_path(program: &str) -> bool {
    let p = Path::new(program);
    if p.components().count() > 1 {
        return p.is_file();
    }
    std::env::var_os("PATH")
        .map(|paths| std::env::split_paths(&paths).any(|d| d.join(program).is_file()))
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_are_substituted_per_word() {
        let argv = expand("cc -o {output} {input} -lm", &[("input", "a.c"), ("output", "a.out")]);
        assert_eq!(argv, ["cc", "-o", "a.out", "a.c", "-lm"]);
        assert_eq!(expand("run --dir={dir}", &[("dir", "/x")]), ["run", "--dir=/x"]);
    }

    #[test]
    fn captures_output_and_status() {
        let out = run(&expand("sh -c {s}", &[("s", "echo")]), &[], None, Duration::from_secs(5)).unwrap();
        assert!(out.status.success());
        assert_eq!(out.stdout, b"\n");
    }

    #[test]
    fn kills_on_timeout() {
        let argv: Vec<String> = ["sleep", "5"].iter().map(|s| s.to_string()).collect();
        let t = Instant::now();
        let err = run(&argv, &[], None, Duration::from_millis(200)).unwrap_err();
        assert!(matches!(err, RunError::Timeout { .. }));
        assert!(t.elapsed() < Duration::from_secs(3));
    }

    #[test]
    fn missing_program_is_a_spawn_error() {
        let argv = vec!["definitely-not-a-real-tool-xyz".to_string()];
        assert!(matches!(run(&argv, &[], None, Duration::from_secs(1)), Err(RunError::Spawn { .. })));
        assert!(!on_path("definitely-not-a-real-tool-xyz"));
        assert!(on_path("sh"));
    }
}
