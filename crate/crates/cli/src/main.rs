//! `noetherlab` command-line front end.

mod commands;
mod failure;
mod ini;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "noetherlab", version, about = "Scenario files in, reports and CSV out")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate scenarios and audit their conserved quantities.
    Simulate(SimulateArgs),
    /// Effective potential, turning points and Kepler elements.
    Radial(RadialArgs),
    /// Equilibrium search and normal modes.
    Modes(ModesArgs),
    /// Hamilton-Jacobi residual and separation constants.
    Hj(HjArgs),
    /// Lattice field runs.
    #[command(subcommand)]
    Field(FieldCommand),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Scenario files; several go to one subdirectory each.
    #[arg(required = true)]
    pub scenarios: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads for independent scenarios.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Killing-equation residual below which a field counts as a symmetry.
    #[arg(long, default_value_t = noetherlab::conserve::KILLING_TOL)]
    pub killing_tol: f64,
}

#[derive(Args)]
pub struct RadialArgs {
    pub scenario: Option<PathBuf>,
    /// Radial potential in `r`; Newton `-M/r` when omitted.
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long = "M")]
    pub m: Option<f64>,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long = "E", allow_hyphen_values = true)]
    pub e: Option<f64>,
    #[arg(long)]
    pub rmin: Option<f64>,
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ModesArgs {
    pub scenario: PathBuf,
    /// Starting point for the equilibrium search, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub guess: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct HjArgs {
    pub scenario: Option<PathBuf>,
    /// `two_center` or `kepler`.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long = "M")]
    pub m: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Absolute residual tolerance; scale-aware default otherwise.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FieldCommand {
    /// Klein-Gordon on a 1D lattice.
    Kg(KgArgs),
    /// Yee-grid Maxwell in a periodic box.
    Maxwell(MaxwellArgs),
}

#[derive(Args)]
pub struct KgArgs {
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub every: Option<usize>,
    /// `periodic` or `fixed`.
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub speed: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct MaxwellArgs {
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub every: Option<usize>,
    /// Defaults to `NOETHERLAB_SEED`, then the scenario, then 2024.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Radial(a) => commands::radial(&a),
        Command::Modes(a) => commands::modes(&a),
        Command::Hj(a) => commands::hj(&a),
        Command::Field(FieldCommand::Kg(a)) => commands::kg(&a),
        Command::Field(FieldCommand::Maxwell(a)) => commands::maxwell(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("noetherlab: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
