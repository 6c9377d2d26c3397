use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use satroute_cli::{
    cmd_analyze, cmd_compare, cmd_optimize, cmd_simulate, cmd_sweep, cmd_table2, load_config, CliResult,
    ExperimentConfig, Method,
};
use satroute_core::sphere::Alpha2Mode;

#[derive(Parser)]
#[command(
    name = "satroute",
    version,
    about = "Multi-hop relay routing over random satellite constellations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (`key = value` lines); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed of the Monte Carlo realizations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of Monte Carlo realizations.
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Output CSV path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Hop-count search used to pick the route length.
    #[arg(long, global = true, value_parser = ["1", "2"])]
    method: Option<String>,
    /// Rule deriving the middle-hop scaling factor.
    #[arg(long, global = true)]
    alpha2: Option<Alpha2Arg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Alpha2Arg {
    Additive,
    Multiplicative,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Analytic metrics for one configuration.
    Analyze,
    /// Candidate tables of both hop-count searches.
    Optimize,
    /// Monte Carlo metrics for the configured strategies.
    Simulate,
    /// Reference constellations at a quarter-circle separation.
    Table2,
    /// Analytic and simulated metrics over the sweep grid.
    Sweep,
    /// Strategy comparison over the sweep grid.
    Compare,
}

fn configure(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::defaults(),
    };
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(n) = cli.realizations {
        if n == 0 {
            return Err(satroute_cli::ConfigError::Invariant {
                key: "realizations".into(),
                message: "must be at least 1".into(),
            }
            .into());
        }
        cfg.num_realizations = n;
    }
    if let Some(m) = &cli.method {
        cfg.method = if m == "1" { Method::One } else { Method::Two };
    }
    if let Some(a) = cli.alpha2 {
        cfg.alpha2_mode = match a {
            Alpha2Arg::Additive => Alpha2Mode::Additive,
            Alpha2Arg::Multiplicative => Alpha2Mode::Multiplicative,
        };
    }
    if cli.out.is_some() {
        cfg.output = cli.out.clone();
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = configure(cli)?;
    let csv = match cli.command {
        Command::Analyze => cmd_analyze(&cfg)?,
        Command::Optimize => cmd_optimize(&cfg)?,
        Command::Simulate => cmd_simulate(&cfg)?,
        Command::Table2 => cmd_table2(&cfg)?,
        Command::Sweep => cmd_sweep(&cfg)?,
        Command::Compare => cmd_compare(&cfg)?,
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
