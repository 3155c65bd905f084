use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use skatinfer::gamelog::{write_header, write_record};
use skatinfer::selfplay::generate;
use skatinfer::{Deck, DeckKind};

use super::create;
use crate::config::load_policy;
use crate::error::{Classify, Failure};
use crate::provenance::{config_digest, provenance};
use crate::Global;

#[derive(Debug, Args)]
pub struct SelfplayArgs {
    /// Number of games.
    #[arg(long)]
    pub games: usize,
    /// Output game log (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Policy for all three seats: `heuristic`, `uniform` or a table file.
    #[arg(long, default_value = "heuristic")]
    pub policy: String,
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    deck: DeckKind,
    seed: u64,
    games: usize,
    policy: &'a str,
}

pub fn run(g: &Global, a: &SelfplayArgs) -> Result<(), Failure> {
    let deck = g.deck().unwrap_or(DeckKind::Full);
    let (policy, policy_id) = load_policy(&a.policy, Path::new(""), deck)?;
    let digest = config_digest(&RunConfig {
        command: "selfplay",
        deck,
        seed: g.seed,
        games: a.games,
        policy: &policy_id,
    });
    let records = generate(&policy, Deck::of_kind(deck), a.games, g.seed);
    let mut w = create(&a.out)?;
    let what = format!("cannot write {}", a.out.display());
    write_header(&mut w, &provenance(&digest)).config(&what)?;
    for r in &records {
        write_record(&mut w, r).config(&what)?;
    }
    w.flush().config(&what)?;
    eprintln!("wrote {} games to {}", records.len(), a.out.display());
    Ok(())
}
