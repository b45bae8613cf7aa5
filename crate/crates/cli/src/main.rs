//! `weakqp` command-line front-end.

mod bohm;
mod error;
mod named;
mod ontology;
mod output;
mod qp;
mod verify;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct Global {
    /// Complex alpha as RE[,IM]; defaults to 0.5.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (qp, ontology, verify) or directory (bohm).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Scenario JSON file.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Worker threads for trajectory integration; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Parser)]
#[command(name = "weakqp", version, about = "Weak values, alpha-parameterized quasiprobabilities and Bohmian trajectories")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Conditional, joint or marginal quasiprobabilities.
    Qp(qp::QpArgs),
    /// Grid wavefunction evolution, trajectories and local-value fields.
    Bohm,
    /// Synlogicality classification of a built-in ontological model.
    Ontology,
    /// Run the identity suite on random instances.
    Verify(verify::VerifyArgs),
}

fn load_scenario(global: &Global) -> CliResult<Option<Value>> {
    let Some(path) = &global.scenario else {
        return Ok(None);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read scenario {}: {e}", path.display())))?;
    Ok(Some(serde_json::from_str(&text)?))
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return error::invalid("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("cannot start thread pool: {e}")))?;
    }
    if let Some(a) = &cli.global.alpha {
        a.parse::<weakqp::AlphaParam>()?;
    }
    let scenario = load_scenario(&cli.global)?;
    match &cli.command {
        Command::Qp(args) => qp::run(args, &cli.global, scenario),
        Command::Bohm => bohm::run(&cli.global, scenario),
        Command::Ontology => ontology::run(&cli.global, scenario),
        Command::Verify(args) => verify::run(args, &cli.global),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weakqp: {e}");
            e.exit_code()
        }
    }
}
