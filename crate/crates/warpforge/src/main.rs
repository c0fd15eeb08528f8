use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use warpforge::bootstrap::{bootstrap_operators, generate_seed_corpus, profile_seeds};
use warpforge::config::Config;
use warpforge::driver::{load_cost_model, run_campaign, RunOptions};
use warpforge::harness::CommandHarness;
use warpforge::native::Native;
use warpforge::report::write_report;
use warpforge::store::Workspace;
use warpforge_core::operator::ExtractOptions;

#[derive(Parser)]
#[command(name = "warpforge", version, about = "Generate C programs that expose performance differences between Wasm runtimes")]
struct Cli {
    /// Campaign configuration (TOML); defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Campaign directory.
    #[arg(long, global = true, default_value = "warpforge-out")]
    out_dir: PathBuf,
    /// Overrides `campaign.rng_seed`.
    #[arg(long, global = true)]
    rng_seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Extract the initial operator pool from historical programs.
    BootstrapOps {
        /// Directory of historical `.c` programs (default: `corpus.historical`).
        dir: Option<PathBuf>,
    },
    /// Generate seed programs into `seeds/`.
    GenSeeds {
        #[arg(long)]
        count: Option<usize>,
    },
    /// Profile every seed (variable usage and covered lines).
    ProfileSeeds,
    /// Run a campaign and write the report.
    Run {
        /// Use simulated runtimes from this cost model instead of real ones.
        #[arg(long)]
        simulate: Option<PathBuf>,
        /// Continue from a checkpoint file.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Stop after this many scored programs, leaving a checkpoint.
        #[arg(long)]
        stop_after: Option<u64>,
    },
    /// Rebuild the report from a campaign directory.
    Report {
        /// Campaign directory (default: `--out-dir`).
        #[arg(long)]
        from_log: Option<PathBuf>,
    },
    /// Check that every configured runtime compiles and runs a trivial module.
    CheckAdapters,
}

fn load_config(cli: &Cli) -> anyhow::Result<Config> {
    let mut c = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.rng_seed {
        c.campaign.rng_seed = s;
    }
    Ok(c)
}

fn real_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let config = load_config(&cli)?;
    let ws = Workspace::new(&cli.out_dir);
    let mut native = Native::from_config(&config);
    native.work_dir = Some(ws.work_dir());
    match &cli.cmd {
        Cmd::BootstrapOps { dir } => {
            let dir = match (dir, &config.corpus.historical) {
                (Some(d), _) => d.clone(),
                (None, Some(d)) => PathBuf::from(d),
                (None, None) => bail!("no historical directory given"),
            };
            let opts = ExtractOptions { max_operator_lines: config.campaign.max_operator_lines };
            let s = bootstrap_operators(&dir, &ws, &opts)?;
            for (file, why) in &s.skipped {
                eprintln!("skipped {}: {}", file, why);
            }
            println!("{} operators from {} programs", s.total(), s.programs);
            for (kind, n) in &s.per_kind {
                println!("  {:<10} {}", kind.name(), n);
            }
        }
        Cmd::GenSeeds { count } => {
            let n = count.unwrap_or(config.corpus.seed_count);
            let seeds = generate_seed_corpus(n, config.campaign.rng_seed, &ws, &native)?;
            println!("wrote {} seeds to {}", seeds.len(), ws.path("seeds").display());
        }
        Cmd::ProfileSeeds => {
            let (ok, rejected) = profile_seeds(&ws, &native)?;
            for (id, why) in &rejected {
                eprintln!("rejected {}: {}", id, why);
            }
            println!("profiled {} seeds, rejected {}", ok.len(), rejected.len());
            if ok.is_empty() {
                bail!("no usable seeds");
            }
        }
        Cmd::Run { simulate, resume, stop_after } => {
            let opts = RunOptions { stop_after: *stop_after, resume: resume.clone() };
            let outcome = match simulate {
                Some(model) => {
                    let mut sim = load_cost_model(model, config.repetitions)?;
                    run_campaign(&ws, &config, &mut sim, &native, &opts)?
                }
                None => {
                    let (mut h, health) = CommandHarness::from_config(&config);
                    h.work_dir = Some(ws.work_dir());
                    for r in health.iter().filter(|r| r.error.is_some()) {
                        eprintln!("excluding {}: {}", r.name, r.error.as_deref().unwrap_or(""));
                    }
                    if h.adapters.len() < 2 {
                        bail!("{} healthy runtimes; at least 2 are needed", h.adapters.len());
                    }
                    run_campaign(&ws, &config, &mut h, &native, &opts)?
                }
            };
            if outcome.finished {
                println!("{} programs scored; report in {}", outcome.state.generated_count, ws.path("report.txt").display());
            } else {
                println!(
                    "stopped after {} programs; resume with --resume {}",
                    outcome.state.generated_count,
                    ws.path("checkpoint").display()
                );
            }
        }
        Cmd::Report { from_log } => {
            let ws = from_log.as_ref().map(Workspace::new).unwrap_or(ws);
            let report = write_report(&ws).context("rebuilding the report")?;
            print!("{}", report.to_text());
        }
        Cmd::CheckAdapters => {
            let (h, health) = CommandHarness::from_config(&config);
            for r in &health {
                match &r.error {
                    None => println!("ok    {:<16} {}", r.name, r.version),
                    Some(e) => println!("FAIL  {:<16} {}", r.name, e),
                }
            }
            if h.adapters.len() < 2 {
                bail!("{} of {} runtimes healthy; at least 2 are needed", h.adapters.len(), health.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::FAILURE
        }
    }
}
