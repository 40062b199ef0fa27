use std::path::PathBuf;
use std::process::ExitCode;

use chargecav::cli::{run_path, Overrides, ScenarioKind};
use clap::{Args, Parser, Subcommand};

/// Batch runner for charge-qubit cavity scenarios.
#[derive(Parser)]
#[command(name = "sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit a gate against its target and thresholds.
    GateAudit(Common),
    /// Run a pulse schedule.
    Schedule(Common),
    /// Run a two-cavity transfer scenario.
    Transfer(Common),
    /// Sweep one parameter of a gate or transfer scenario.
    Sweep(Common),
    /// Eigenvalues of a Hamiltonian.
    Spectrum(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output path, overriding the scenario's output_path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Command-specific tolerance override.
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (kind, args) = match cli.command {
        Command::GateAudit(a) => (ScenarioKind::GateAudit, a),
        Command::Schedule(a) => (ScenarioKind::Schedule, a),
        Command::Transfer(a) => (ScenarioKind::Transfer, a),
        Command::Sweep(a) => (ScenarioKind::Sweep, a),
        Command::Spectrum(a) => (ScenarioKind::Spectrum, a),
    };
    let overrides = Overrides {
        out: args.out,
        tol: args.tol,
    };
    let (code, message) = run_path(kind, &args.config, &overrides);
    if code == 0 {
        println!("{message}");
    } else {
        eprintln!("{message}");
    }
    ExitCode::from(code as u8)
}
