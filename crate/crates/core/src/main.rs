use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use csma_ecgame::harness::{self, Scenario, ScenarioConfig};

/// Erasure-coding redundancy game on slotted CSMA: sweeps, mode comparison,
/// equilibrium search and oracle validation.
#[derive(Debug, Parser)]
#[command(name = "ecgame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write `<scenario>-<seed>.csv`.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the `scenario` key.
        #[arg(long)]
        scenario: Option<Scenario>,
        /// Overrides the `seed` key.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write an SVG plot (sweep-r and modes).
        #[arg(long)]
        svg: bool,
    },
    /// Run the oracle checks; exits 2 if any fails.
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Write `validate-<seed>.csv` here as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;

fn load(path: &PathBuf) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ScenarioConfig::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn execute(cfg: &ScenarioConfig, write: bool) -> Result<bool> {
    let out = harness::run_scenario(cfg)?;
    if write {
        for path in harness::write_outputs(cfg, &out)? {
            println!("wrote {}", path.display());
        }
    }
    if cfg.scenario == Scenario::Validate {
        let checks = out.table.metadata_value("checks").unwrap_or("?");
        let failures = out.table.metadata_value("failures").unwrap_or("?");
        println!("validate: {checks} checks, {failures} failures");
    }
    Ok(out.passed)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, scenario, seed, out, svg } => {
            let mut cfg = load(&config)?;
            if let Some(s) = scenario {
                cfg.scenario = s;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.output_dir = out;
            cfg.emit_svg = svg;
            execute(&cfg, true)
        }
        Command::Validate { config, out } => {
            let mut cfg = load(&config)?;
            cfg.scenario = Scenario::Validate;
            let write = out.is_some();
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            execute(&cfg, write)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VALIDATION),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
