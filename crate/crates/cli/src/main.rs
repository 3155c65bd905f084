mod commands;
mod config;
mod error;
mod provenance;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use skatinfer::DeckKind;

use error::Failure;

/// Policy-based world inference for Skat: fitting, self-play, TSSR sweeps and tournaments.
#[derive(Debug, Parser)]
#[command(name = "skatinfer", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct Global {
    /// Master seed; every output is a function of the config and this seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: one per core). Never changes results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Deck in use. Commands reading logs default to the log's deck.
    #[arg(long, global = true, value_enum)]
    pub deck: Option<DeckArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DeckArg {
    Full,
    Mini,
}

impl Global {
    pub fn deck(&self) -> Option<DeckKind> {
        self.deck.map(|d| match d {
            DeckArg::Full => DeckKind::Full,
            DeckArg::Mini => DeckKind::Mini,
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a count-table policy (and optionally KI tables) from game logs.
    FitPolicy(commands::fit_policy::FitPolicyArgs),
    /// Generate a self-play game log.
    Selfplay(commands::selfplay::SelfplayArgs),
    /// TSSR curves of inference variants over logged games.
    Tssr(commands::tssr::TssrArgs),
    /// Play a cardplay tournament from a manifest.
    Tournament(commands::tournament::TournamentArgs),
    /// Replay game logs strictly and summarize each game.
    Replay(commands::replay::ReplayArgs),
    /// Per-decision inference trace of one logged game.
    TraceInference(commands::trace::TraceArgs),
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.global.workers {
        if n == 0 {
            return Err(Failure::config("--workers must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.into()))?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::FitPolicy(a) => commands::fit_policy::run(g, a),
        Command::Selfplay(a) => commands::selfplay::run(g, a),
        Command::Tssr(a) => commands::tssr::run(g, a),
        Command::Tournament(a) => commands::tournament::run(g, a),
        Command::Replay(a) => commands::replay::run(g, a),
        Command::TraceInference(a) => commands::trace::run(g, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    // a panic below is a broken invariant, not a usage problem
    match panic::catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
        Err(_) => ExitCode::from(4),
    }
}
