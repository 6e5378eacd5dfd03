use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gds_cli::config::{Analysis, ExperimentConfig};
use gds_cli::error::{CliError, Result};
use gds_cli::presets::{self, PRESETS};
use gds_cli::{enforce, run_config, write_outputs};

#[derive(Parser)]
#[command(name = "gds", version, about = "Numerical checks for generalized dominated splittings on tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify each splitting: dominated, GDS, or neither.
    Classify(Common),
    /// Lyapunov spectrum at each sample point.
    Lyapunov(Common),
    /// Recurrence times to A_eps and the accompanying bound.
    Recurrence(Common),
    /// Smallest N with max a_N < 0 on the grid, and measure averages.
    LemmaSearch(Common),
    /// liminf of a_n/n along sample orbits.
    Liminf(Common),
    /// Box-counting density of sample orbits.
    Minimality(Common),
    /// Every analysis on the golden example (or --config), verdicts enforced.
    VerifyExample(Common),
    /// Run the analyses listed in the config.
    Run(Common),
    /// Print the shipped presets.
    ListPresets,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped config by name; see `list-presets`.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Directory for report.json, timing.json, summary.txt and plots/.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Points per circle axis; toral axes get N/4.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

fn load(common: &Common, default_preset: Option<&str>) -> Result<ExperimentConfig> {
    if let Some(path) = &common.config {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return ExperimentConfig::from_toml_str(&src);
    }
    match common.preset.as_deref().or(default_preset) {
        Some(name) => presets::load(name),
        None => Err(CliError::validation("--config", "pass --config PATH or --preset NAME")),
    }
}

fn execute(common: Common, analysis: Option<Analysis>) -> Result<()> {
    if let Some(k) = common.threads {
        if k == 0 {
            return Err(CliError::validation("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::validation("--threads", e.to_string()))?;
    }
    let default_preset = (analysis == Some(Analysis::VerifyExample)).then_some("verify-example");
    let mut config = load(&common, default_preset)?;
    if let Some(a) = analysis {
        config.analyses = vec![a];
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(n) = common.grid {
        if n == 0 {
            return Err(CliError::validation("--grid", "must be at least 1"));
        }
        config.set_grid_resolution(n);
    }
    let report = run_config(&config)?;
    print!("{}", report.summary());
    if let Some(dir) = &common.out {
        write_outputs(&report, dir)?;
        println!("\nwrote {}", dir.display());
    }
    enforce(&report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListPresets => {
            for p in PRESETS {
                println!("{:<20} {}", p.name, p.description);
            }
            Ok(())
        }
        Command::Classify(c) => execute(c, Some(Analysis::Classify)),
        Command::Lyapunov(c) => execute(c, Some(Analysis::Lyapunov)),
        Command::Recurrence(c) => execute(c, Some(Analysis::Recurrence)),
        Command::LemmaSearch(c) => execute(c, Some(Analysis::LemmaSearch)),
        Command::Liminf(c) => execute(c, Some(Analysis::Liminf)),
        Command::Minimality(c) => execute(c, Some(Analysis::Minimality)),
        Command::VerifyExample(c) => execute(c, Some(Analysis::VerifyExample)),
        Command::Run(c) => execute(c, None),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
