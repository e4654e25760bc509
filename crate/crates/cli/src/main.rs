use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use fdcim_cli::config::Config;
use fdcim_cli::{exit_code, run, Experiment, DEFAULT_OUT_DIR, OUT_DIR_ENV};

#[derive(Debug, Parser)]
#[command(name = "fdcim", version, about = "Deterministic experiments for the fdcim simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output root directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Label for the run directory; defaults to the subcommand name.
    #[arg(long, global = true)]
    experiment: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Orthogonality, fast-transform and blockwise round-trip checks.
    Transform,
    /// Early-termination workload and exactness on Walsh crossbars.
    Crossbar,
    /// Transfer curve of one converter configuration.
    Adc,
    /// Optimal asymmetric search trees over MAV code distributions.
    Asymsearch,
    /// Area/energy ratios, design space and layer parameter accounting.
    Cost,
    /// DNL/INL and shared-array mismatch over random capacitor draws.
    DnlInl,
    /// Every experiment into one directory.
    All,
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::Transform => Experiment::Transform,
            Command::Crossbar => Experiment::Crossbar,
            Command::Adc => Experiment::Adc,
            Command::Asymsearch => Experiment::Asymsearch,
            Command::Cost => Experiment::Cost,
            Command::DnlInl => Experiment::DnlInl,
            Command::All => Experiment::All,
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.common.seed {
        cfg.seed = seed;
    }
    if let Some(label) = cli.common.experiment {
        cfg.experiment = Some(label);
    }
    let out = cli
        .common
        .out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let outcome = run(cli.command.experiment(), &cfg, &out)?;
    println!("{}", outcome.dir.display());
    for name in &outcome.artifacts {
        println!("  {name}");
    }
    println!("  manifest.toml (config {})", outcome.config_hash);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
