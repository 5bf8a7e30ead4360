use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rbfractal::cli::{cmd_render, cmd_report, cmd_verify, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "rbfractal", version, about = "Non-stationary fractal functions from RB operator sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample every schedule to CSV (and PGM when enabled).
    Render(Common),
    /// Run the verification suites; exits 1 if any check fails.
    Verify(Common),
    /// Print the convergence table of every schedule.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; the built-in catalog when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the randomized checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Truncation depth for every schedule.
    #[arg(long)]
    depth: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::catalog(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = self.depth {
            cfg.override_depth(d);
        }
        Ok(cfg)
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Render(c) => {
            let cfg = c.load()?;
            let out = c.out.unwrap_or_else(|| PathBuf::from("out"));
            let listing: String = cmd_render(&cfg, &out)?
                .iter()
                .map(|p| format!("{}\n", p.display()))
                .collect();
            emit(&listing);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(c) => {
            let cfg = c.load()?;
            let outcome = cmd_verify(&cfg, c.out.as_deref())?;
            emit(&outcome.text);
            Ok(if outcome.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Report(c) => {
            let cfg = c.load()?;
            emit(&cmd_report(&cfg, c.out.as_deref())?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
