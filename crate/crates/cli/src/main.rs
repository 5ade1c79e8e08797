use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use laurent_cli::acceptance::{run_criterion, run_suite, CRITERIA, DEFAULT_SEED};
use laurent_cli::config::ExperimentConfig;
use laurent_cli::experiments::{report, run, RunError, Subcommand};
use laurent_cli::output::{resolve_out_dir, write_atomic, write_experiment};

/// Laurent series experiments on Reinhardt domains.
#[derive(Parser)]
#[command(name = "laurent", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (else the config's out_dir, then $LAURENT_OUT_DIR, then ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for `report`.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Coefficient table and aliasing estimates.
    Coeffs(Common),
    /// Seminorm reports and the C^k/box sandwich.
    Seminorms(Common),
    /// Tail profile of term seminorms.
    Tails(Common),
    /// Coefficient bound certificates.
    BoundCheck(Common),
    /// Threshold N0 and random superset checks.
    NetCauchy(Common),
    /// Random rearrangement checks.
    Permute(Common),
    /// All experiments for one config, or the default suite without one.
    Report(Common),
    /// Runs acceptance criteria and prints one line each.
    Acceptance {
        #[command(flatten)]
        common: Common,
        /// Criterion number 1..=12; all when omitted.
        #[arg(long)]
        criterion: Option<u32>,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, RunError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| laurent_cli::config::InvalidConfig("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn io_err(e: std::io::Error) -> RunError {
    RunError::Compute(e.into())
}

fn single(sub: Subcommand, common: &Common) -> Result<bool, RunError> {
    let cfg = load(common)?;
    let out = run(sub, &cfg)?;
    let dir = resolve_out_dir(common.out.as_deref(), cfg.out_dir.as_deref());
    write_experiment(&dir, &out).map_err(io_err)?;
    println!("{}: {}", out.name, if out.passed { "PASS" } else { "FAIL" });
    Ok(out.passed)
}

fn run_report(common: &Common) -> Result<bool, RunError> {
    let workers = common.workers.max(1);
    if common.config.is_none() {
        let dir = resolve_out_dir(common.out.as_deref(), None);
        let passed = run_suite(&dir, common.seed.unwrap_or(DEFAULT_SEED), workers)?;
        println!("default suite: {}", if passed { "PASS" } else { "FAIL" });
        return Ok(passed);
    }
    let cfg = load(common)?;
    let dir = resolve_out_dir(common.out.as_deref(), cfg.out_dir.as_deref());
    let mut passed = true;
    for out in report(&cfg, workers)? {
        write_experiment(&dir, &out).map_err(io_err)?;
        println!("{}: {}", out.name, if out.passed { "PASS" } else { "FAIL" });
        passed &= out.passed;
    }
    Ok(passed)
}

fn run_acceptance(common: &Common, criterion: Option<u32>) -> Result<bool, RunError> {
    let seed = common.seed.unwrap_or(DEFAULT_SEED);
    let numbers: Vec<u32> = match criterion {
        Some(n) => vec![n],
        None => CRITERIA.collect(),
    };
    let dir = resolve_out_dir(common.out.as_deref(), None).join("acceptance");
    let mut passed = true;
    for n in numbers {
        let outcome = run_criterion(n, seed)?;
        for a in &outcome.artifacts {
            write_atomic(&dir, &a.name, &a.bytes).map_err(io_err)?;
        }
        println!("{}", outcome.line());
        passed &= outcome.passed;
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Coeffs(c) => single(Subcommand::Coeffs, c),
        Command::Seminorms(c) => single(Subcommand::Seminorms, c),
        Command::Tails(c) => single(Subcommand::Tails, c),
        Command::BoundCheck(c) => single(Subcommand::BoundCheck, c),
        Command::NetCauchy(c) => single(Subcommand::NetCauchy, c),
        Command::Permute(c) => single(Subcommand::Permute, c),
        Command::Report(c) => run_report(c),
        Command::Acceptance { common, criterion } => run_acceptance(common, *criterion),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(RunError::Config(e)) => {
            eprintln!("laurent: {e}");
            ExitCode::from(2)
        }
        Err(RunError::Compute(e)) => {
            eprintln!("laurent: {e}");
            ExitCode::from(1)
        }
    }
}
