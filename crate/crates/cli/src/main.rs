use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dsqkd_cli::commands::{self, SessionFormat};
use dsqkd_cli::{CliError, CommandOutput, ConfigMap, RunConfig};

#[derive(Parser)]
#[command(
    name = "dsqkd",
    version,
    about = "Dispersion-supported sideband BB84 link simulator"
)]
struct Cli {
    /// Configuration file (`section.key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, or directory for multi-panel commands.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `session.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `section.key=value`, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// QBER against receiver position, with the AM-AM baseline.
    QberCurve,
    /// Simulated OSA traces for each length and ΔΦ ∈ {0, π}.
    Spectrum,
    /// Normalized sideband powers against ΔΦ for each length.
    Sidebands,
    /// Contrast against fiber length.
    Contrast,
    /// Solve the design criterion for length, frequency or dispersion.
    Design,
    /// Monte-Carlo BB84 session.
    Session {
        /// Emit a CSV row instead of key=value lines.
        #[arg(long)]
        csv: bool,
        /// Run at this many evenly spaced positions in [0, L] (CSV output).
        #[arg(long, value_name = "STEPS")]
        sweep_z: Option<usize>,
    },
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut map = ConfigMap::default();
    if let Some(path) = &cli.config {
        map.apply_file(path)?;
    }
    for a in &cli.set {
        map.apply_assignment(a)?;
    }
    if let Some(seed) = cli.seed {
        map.set("session.seed", &seed.to_string())?;
    }
    RunConfig::from_map(&map)
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit(out: Option<&Path>, result: CommandOutput) -> Result<(), CliError> {
    for n in &result.notes {
        eprintln!("{n}");
    }
    match (out, result.panels.as_slice()) {
        (Some(p), [single]) => fs::write(p, &single.body)?,
        (Some(dir), panels) => {
            fs::create_dir_all(dir)?;
            for panel in panels {
                fs::write(dir.join(format!("{}.csv", panel.name)), &panel.body)?;
            }
        }
        (None, panels) => {
            let mut stdout = std::io::stdout().lock();
            for panel in panels {
                if panels.len() > 1 {
                    writeln!(stdout, "# {}", panel.name)?;
                }
                stdout.write_all(panel.body.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::QberCurve => emit(out, commands::qber_curve(&cfg)?),
        Command::Spectrum => emit(out, commands::spectrum(&cfg)?),
        Command::Sidebands => emit(out, commands::sidebands(&cfg)?),
        Command::Contrast => emit(out, commands::contrast_curve(&cfg)?),
        Command::Design => write_text(out, &commands::design(&cfg)?),
        Command::Session { csv, sweep_z } => {
            let text = match sweep_z {
                Some(steps) => commands::session_sweep(&cfg, *steps)?,
                None if *csv => commands::session(&cfg, SessionFormat::Csv)?,
                None => commands::session(&cfg, SessionFormat::KeyValue)?,
            };
            write_text(out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
