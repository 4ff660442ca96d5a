use clap::{Parser, Subcommand};
use resbem_cli::config::{RunConfig, Task};
use resbem_cli::run::Run;
use std::path::PathBuf;
use std::process::ExitCode;

/// Scattering resonances of layered media with small inclusions.
#[derive(Parser)]
#[command(name = "resbem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration (defaults to the bundled disk scene).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the random probe matrices.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; changes speed only.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Search the configured regions for resonances.
    Resonances,
    /// Polarization tensors of the inclusions.
    Polarization,
    /// Track a resonance over the epsilon list and compare with the prediction.
    Sweep,
    /// Run the invariant suite on the bundled disk scene.
    Validate,
    /// Roots of the disk dispersion relation.
    #[command(name = "oracle-disk")]
    OracleDisk,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let task = match cli.command {
        Command::Resonances => Task::Resonances,
        Command::Polarization => Task::Polarization,
        Command::Sweep => Task::Sweep,
        Command::Validate => Task::Validate,
        Command::OracleDisk => Task::OracleDisk,
    };
    let config = match &cli.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::bundled()),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "kind": "config", "path": e.path, "message": e.message }));
            return ExitCode::from(2);
        }
    };
    if cli.threads == Some(0) {
        eprintln!("{}", serde_json::json!({ "kind": "config", "path": "--threads", "message": "must be at least 1" }));
        return ExitCode::from(2);
    }
    let code = Run::new(task, config, cli.out, cli.seed, cli.threads).execute();
    ExitCode::from(code as u8)
}
