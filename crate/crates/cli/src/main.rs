//! `twistq` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 I/O or parse error,
//! 3 budget (search budget or dense qubit cap) exceeded.
//!
//! With `--out DIR` each command writes `DIR/<command>.json` plus a
//! `<command>.meta.json` side file holding the wall-clock timestamp; the
//! main artifact is byte-identical across reruns. Without `--out` the
//! artifact goes to stdout.
//!
//! Artifact envelope:
//! `{"command", "config": {x, y, format, adjacency, seed, budget, dense_cap}, "result"}`.
//! `build` results hold the three product complexes (grades, cell labels,
//! boundary triplets `[row, col]`), homology bases as 0/1 strings with
//! Künneth tags, and the triple-intersection tensor as `[α, β, γ]` entries.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twistq::metrics::DEFAULT_BUDGET;
use twistq::protocol::MAX_DENSE_QUBITS;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Parse(String),
    Budget(String),
    Verify(String),
    Core(twistq::Error),
}

impl From<twistq::Error> for CliError {
    fn from(e: twistq::Error) -> Self {
        match e {
            twistq::Error::Parse { .. } => CliError::Parse(e.to_string()),
            twistq::Error::Size(n, cap) => {
                CliError::Budget(format!("{n} qubits exceed the dense cap of {cap}; rerun with --backend ledger"))
            }
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verify(_) | CliError::Core(_) => 1,
            CliError::Usage(_) | CliError::Io(_) | CliError::Parse(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => format!("usage: {m}"),
            CliError::Io(m) => format!("i/o error: {m}"),
            CliError::Parse(m) => m.clone(),
            CliError::Budget(m) => format!("budget exceeded: {m}"),
            CliError::Verify(m) => format!("verification failed: {m}"),
            CliError::Core(e) => e.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "twistq", version, about = "Twisted hypergraph-product codes: build, verify, simulate")]
struct Cli {
    /// Parity-check matrix of the first factor code.
    #[arg(long, global = true)]
    x: Option<PathBuf>,
    /// Second factor code; defaults to --x.
    #[arg(long, global = true)]
    y: Option<PathBuf>,
    /// alist | dense01 | json
    #[arg(long, global = true, default_value = "alist")]
    format: String,
    /// min-index | symmetrized
    #[arg(long, global = true, default_value = "min-index")]
    adjacency: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long = "dense-cap", global = true, default_value_t = MAX_DENSE_QUBITS)]
    dense_cap: usize,
    /// Vectors examined per distance search.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Product complexes, homology bases and the intersection tensor.
    Build,
    /// Untwisted and twisted stabilizer generators.
    Stabilizers,
    /// Run every symbolic check; exit 1 on any failure.
    Verify {
        /// Random coboundary shifts and Leibniz trials.
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Triple-intersection tensor and the logical action for each ρ.
    Intersections,
    /// Distances, subsystem distances and spurious-class flags.
    Distance {
        /// Weight at or below which a class counts as spurious.
        #[arg(long, default_value_t = twistq::metrics::DEFAULT_THRESHOLD)]
        threshold: usize,
    },
    /// Seeded gauging-measurement trials.
    Simulate {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// dense | ledger
        #[arg(long, default_value = "dense")]
        backend: String,
        /// Transcript or outcome file whose μ and z are replayed.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Initialization plan for disjoint magic pairs and its certificate.
    Fountain,
    /// Rates, ground-space dimensions and the fountain summary.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Stabilizers => "stabilizers",
            Command::Verify { .. } => "verify",
            Command::Intersections => "intersections",
            Command::Distance { .. } => "distance",
            Command::Simulate { .. } => "simulate",
            Command::Fountain => "fountain",
            Command::Report => "report",
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::new(cli.x, cli.y, &cli.format, &cli.adjacency, cli.seed, cli.budget, cli.dense_cap, cli.out)?;
    let name = cli.cmd.name();
    match cli.cmd {
        Command::Build => commands::build(&cfg, name),
        Command::Stabilizers => commands::stabilizers(&cfg, name),
        Command::Verify { trials } => commands::verify(&cfg, name, trials),
        Command::Intersections => commands::intersections(&cfg, name),
        Command::Distance { threshold } => commands::distance(&cfg, name, threshold),
        Command::Simulate { trials, backend, replay } => commands::simulate(&cfg, name, trials, &backend, replay.as_deref()),
        Command::Fountain => commands::fountain(&cfg, name),
        Command::Report => commands::report(&cfg, name),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twistq: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(twistq::Error::Size(30, 26)).code(), 3);
        assert_eq!(CliError::from(twistq::Error::Parse { line: 1, col: 2, msg: "x".into() }).code(), 2);
        assert_eq!(CliError::from(twistq::Error::NotACocycle).code(), 1);
        assert_eq!(CliError::Verify(String::new()).code(), 1);
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["twistq", "verify", "--x", "a", "--seed", "4", "--trials", "7"]).unwrap();
        assert_eq!(cli.seed, 4);
        assert!(matches!(cli.cmd, Command::Verify { trials: 7 }));
    }
}
