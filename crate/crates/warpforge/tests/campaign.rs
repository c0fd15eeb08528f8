use std::fs;
use std::path::Path;
use std::process::Command;

use warpforge::bootstrap::bootstrap_operators;
use warpforge::store::Workspace;
use warpforge_core::operator::{ExtractOptions, OperatorKind};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/historical");
const PLANTED: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/planted_model.json");

fn warpforge(out: &Path, config: &Path, args: &[&str]) -> String {
    let o = Command::new(env!("CARGO_BIN_EXE_warpforge"))
        .arg("--out-dir")
        .arg(out)
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .unwrap();
    assert!(o.status.success(), "{:?} failed: {}", args, String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("small.toml");
    fs::write(
        &p,
        "native_timeout_s = 2\n\n[campaign]\nn = 5\nk = 25\nrng_seed = 9\n\n[corpus]\nseed_count = 6\n",
    )
    .unwrap();
    p
}

#[test]
fn bootstrap_is_stable_and_skips_unsupported_programs() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("hist");
    fs::create_dir(&hist).unwrap();
    for e in fs::read_dir(CORPUS).unwrap() {
        let p = e.unwrap().path();
        fs::copy(&p, hist.join(p.file_name().unwrap())).unwrap();
    }
    fs::write(
        hist.join("switchy.c"),
        "int main() {\n  int x = 1;\n  switch (x) {\n  case 1:\n    x = 2;\n  }\n  return x;\n}\n",
    )
    .unwrap();
    let ws = Workspace::new(dir.path().join("out"));
    let s = bootstrap_operators(&hist, &ws, &ExtractOptions::default()).unwrap();
    assert_eq!(s.programs, 6);
    assert_eq!(s.skipped.len(), 1);
    assert!(s.skipped[0].0 == "switchy.c" && s.skipped[0].1.contains("switch"));
    assert!(s.per_kind[&OperatorKind::Looping] > 0 && s.per_kind[&OperatorKind::Sequential] > 0);
    let ops = ws.read_operators("operators").unwrap();
    assert_eq!(ops.len(), s.total());
    assert!(ops.iter().any(|o| o.stats.fp_heavy()) && ops.iter().any(|o| !o.stats.fp_heavy()));

    let again = bootstrap_operators(&hist, &ws, &ExtractOptions::default()).unwrap();
    assert_eq!(again.per_kind, s.per_kind);
    assert_eq!(ws.read_operators("operators").unwrap(), ops);
}

#[test]
fn report_rebuilds_from_the_campaign_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("c");
    warpforge(&out, &cfg, &["bootstrap-ops", CORPUS]);
    warpforge(&out, &cfg, &["gen-seeds"]);
    assert!(warpforge(&out, &cfg, &["profile-seeds"]).contains("profiled 6 seeds"));
    warpforge(&out, &cfg, &["run", "--simulate", PLANTED]);
    let txt = fs::read(out.join("report.txt")).unwrap();
    let json = fs::read(out.join("report.json")).unwrap();
    for f in ["events.log", "checkpoint", "oracle.json", "config.echo.toml", "runtimes.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    fs::remove_file(out.join("report.txt")).unwrap();
    fs::remove_file(out.join("report.json")).unwrap();
    let printed = warpforge(dir.path(), &cfg, &["report", "--from-log", out.to_str().unwrap()]);
    assert_eq!(fs::read(out.join("report.txt")).unwrap(), txt);
    assert_eq!(fs::read(out.join("report.json")).unwrap(), json);
    assert_eq!(printed.as_bytes(), &txt[..]);
    let text = String::from_utf8(txt).unwrap();
    for section in ["## oracle ratio", "## top programs", "## score growth", "## issue groups"] {
        assert!(text.contains(section), "{section}");
    }
}

#[test]
fn corrupt_checkpoints_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("c");
    warpforge(&out, &cfg, &["bootstrap-ops", CORPUS]);
    warpforge(&out, &cfg, &["gen-seeds", "--count", "3"]);
    warpforge(&out, &cfg, &["profile-seeds"]);
    let msg = warpforge(&out, &cfg, &["run", "--simulate", PLANTED, "--stop-after", "5"]);
    assert!(msg.contains("stopped after 5"), "{msg}");
    assert!(!out.join("report.txt").exists());

    let cp = out.join("checkpoint");
    let good = fs::read_to_string(&cp).unwrap();
    fs::write(&cp, good.replacen("\"generated_count\":5", "\"generated_count\":6", 1)).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_warpforge"))
        .args(["--out-dir", out.to_str().unwrap(), "--config", cfg.to_str().unwrap()])
        .args(["run", "--simulate", PLANTED, "--resume", cp.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("corrupt"));

    fs::write(&cp, &good).unwrap();
    warpforge(&out, &cfg, &["run", "--simulate", PLANTED, "--resume", cp.to_str().unwrap()]);
    assert!(out.join("report.txt").is_file());
}

#[test]
fn check_adapters_fails_without_runtimes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("none.toml");
    fs::write(&cfg, "[toolchain]\ncc_wasm = \"no-such-wasm-cc -o {output} {input}\"\n\n[[runtimes]]\nname = \"x\"\nrun_cmd = \"no-such-runtime {module}\"\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_warpforge"))
        .args(["--config", cfg.to_str().unwrap(), "check-adapters"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL  x"));
}
