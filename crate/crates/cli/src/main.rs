use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use polaron_cli::{parse_config, run_subcommand, Subcommand};
use polaron_core::ModelVariant;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Phonon scattering rates and Stark shifts against detuning.
    Rates,
    /// Steady-state intensities against laser detuning.
    Sweep,
    /// Lorentzian linewidth per pump amplitude.
    Fwhm,
    /// Integrated intensity per pump amplitude.
    Ipl,
    /// Sweep deviation between consecutive truncations.
    Convergence,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Variant {
    Full,
    Epme,
    OnePhonon,
    NoPhonon,
}

/// Steady-state photoluminescence of a driven quantum dot in a cavity with
/// phonon coupling.
#[derive(Debug, Parser)]
#[command(name = "polaron-pl", version)]
struct Args {
    command: Cmd,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Normalize plotted curves to unit peak. CSV output is never normalized.
    #[arg(long)]
    normalize: bool,
    /// Model variant, overriding the config file.
    #[arg(long, value_enum)]
    variant: Option<Variant>,
}

fn run(args: Args) -> Result<()> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg = parse_config(&text).with_context(|| format!("in {}", args.config.display()))?;
    if let Some(v) = args.variant {
        cfg.variant = match v {
            Variant::Full => ModelVariant::FullTcl,
            Variant::Epme => ModelVariant::Epme,
            Variant::OnePhonon => ModelVariant::OnePhonon,
            Variant::NoPhonon => ModelVariant::NoPhonon,
        };
    }
    cfg.run.normalize |= args.normalize;
    let cmd = match args.command {
        Cmd::Rates => Subcommand::Rates,
        Cmd::Sweep => Subcommand::Sweep,
        Cmd::Fwhm => Subcommand::Fwhm,
        Cmd::Ipl => Subcommand::Ipl,
        Cmd::Convergence => Subcommand::Convergence,
    };
    for f in run_subcommand(cmd, &cfg, &args.out)? {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
