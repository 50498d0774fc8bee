//! `abi`: symbolic certification, identity checks, simulation and decay
//! reports for the augmented Born-Infeld system.
//!
//! Exit codes: 0 pass, 1 usage or configuration error, 2 verification
//! failure, 3 numerical blow-up.

mod commands;
mod config;
mod manifest;
mod state_arg;

use std::path::PathBuf;
use std::process::ExitCode;

use abi_core::AbiError;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_BLOWUP: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "abi", version, about = "Verification and simulation toolkit for the augmented Born-Infeld system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact residue computation of the projected interaction tensors.
    VerifySymbols(VerifyArgs),
    /// Sample the phase identities at random off-axis points.
    CheckIdentities(IdentityArgs),
    /// Run the nonlinear pseudo-spectral solver from a config file.
    Simulate(SimulateArgs),
    /// Linear dispersion fit and u0 smallness probe from a config file.
    DecayReport(DecayArgs),
    /// Dump A0 and the eigenprojectors at one frequency as JSON.
    Projectors(ProjectorArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    All,
    N,
    Nprime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Subsystem {
    Full,
    /// The `(tau, v)` block, where `b = d = 0`.
    Chaplygin,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub kind: KindArg,
    /// Restrict to these sign triples, e.g. `+,-+` (repeatable).
    #[arg(long = "interaction")]
    pub interactions: Vec<String>,
    #[arg(long, value_enum, default_value = "full")]
    pub subsystem: Subsystem,
    /// Add 1 to entry `out,k,i` of every tensor before reduction.
    #[arg(long, value_name = "OUT,K,I")]
    pub mutate_entry: Option<String>,
    /// Also extract and check ideal cofactors.
    #[arg(long)]
    pub cofactors: bool,
    /// Random points for the numeric pre-flight gates.
    #[arg(long, default_value_t = 32)]
    pub preflight_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct IdentityArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    /// Fixed background as `key=value` items (`tau0=1 b0=0.1,0,0 ...`);
    /// omitted means a random background per point.
    #[arg(long, num_args = 1..)]
    pub state: Vec<String>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "run")]
    pub out: PathBuf,
    /// Validate the config and print the step plan without running.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Args, Debug)]
pub struct DecayArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "decay")]
    pub out: PathBuf,
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Args, Debug)]
pub struct ProjectorArgs {
    /// Frequency as `x,y,z`.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: String,
    #[arg(long, num_args = 1..)]
    pub state: Vec<String>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("ABI_THREADS") {
        let n: usize =
            v.trim().parse().map_err(|_| anyhow::anyhow!("ABI_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("ABI_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = init_threads().and_then(|_| match cli.command {
        Command::VerifySymbols(a) => commands::verify_symbols(&a),
        Command::CheckIdentities(a) => commands::check_identities(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::DecayReport(a) => commands::decay_report(&a),
        Command::Projectors(a) => commands::projectors(&a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if matches!(e.downcast_ref::<AbiError>(), Some(AbiError::BlowUp { .. })) {
                ExitCode::from(EXIT_BLOWUP)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
