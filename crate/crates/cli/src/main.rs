//! `wiretap`: evaluate, optimise and simulate assisted wiretap codes.
//!
//! Exit status is 0 on success, 2 on invalid input and 3 when a request
//! exceeds a dimension or size cap. Failures are printed to stderr as one
//! JSON object with `kind` and `message`, plus `path`, `line`, `column` and
//! `offset` for errors located in an input file.

mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wiretap_core::measures::MeasureCaps;
use wiretap_core::rates::RateMode;

use commands::{AnalyzeOptions, Format};
use failure::{CliResult, Failure};

#[derive(Parser)]
#[command(name = "wiretap", version, about = "Private rates of resource-assisted quantum wiretap channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_mode(s: &str) -> Result<RateMode, String> {
    s.parse().map_err(|e: wiretap_core::Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the rate of a scenario's ensemble or modulations.
    RateEval {
        #[arg(long)]
        scenario: PathBuf,
        /// theorem1, trivial or unassisted; defaults to the scenario's mode.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<RateMode>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Search for the best single-letter ensemble.
    RateOptimize {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<RateMode>,
        /// Optimizer settings as JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Directory for result.json and witness.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense coding advantage, entanglement of purification and their duality.
    ResourceAnalyze {
        /// State on two factors (purified onto a fresh third) or a pure
        /// state on three.
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated labels `A',B',C'`.
        #[arg(long, value_delimiter = ',')]
        partition: Option<Vec<String>>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        dim_a_cap: Option<usize>,
        #[arg(long)]
        dim_f_cap: Option<usize>,
    },
    /// Monte Carlo simulation of the random binning code.
    CodeSim {
        #[arg(long)]
        scenario: PathBuf,
        /// Simulation settings as JSON: n, epsilon, trials, rate, max_dim.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Directory for sim.csv and sim.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a worked-example scenario.
    Gallery {
        name: String,
        /// Joint distribution `P[x][y][z]` for the classical example.
        #[arg(long)]
        pmf: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<commands::Output> {
    match cli.command {
        Command::RateEval { scenario, mode, format } => commands::rate_eval(&scenario, mode, format),
        Command::RateOptimize { scenario, mode, config, seed, out } => {
            commands::rate_optimize(&scenario, mode, config.as_deref(), seed, out.as_deref())
        }
        Command::ResourceAnalyze { state, partition, config, seed, dim_a_cap, dim_f_cap } => {
            let opts = AnalyzeOptions {
                partition: partition.as_deref(),
                config: config.as_deref(),
                seed,
                caps: MeasureCaps { dim_a_cap, dim_f_cap },
            };
            commands::resource_analyze(&state, &opts)
        }
        Command::CodeSim { scenario, config, seed, format, out } => {
            commands::code_sim(&scenario, config.as_deref(), seed, format, out.as_deref())
        }
        Command::Gallery { name, pmf, out } => commands::gallery_cmd(&name, pmf.as_deref(), out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            if let Some(s) = out.stderr {
                eprintln!("{s}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", f.to_json());
    ExitCode::from(f.exit_code as u8)
}
