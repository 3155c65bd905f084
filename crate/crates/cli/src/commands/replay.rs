use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use skatinfer::gamelog::{GameRecord, LogHeader, Provenance};
use skatinfer::rules::score_game;
use skatinfer::{DeckKind, GameType, Seat};

use super::emit;
use crate::error::{Classify, Failure};
use crate::provenance::{config_digest, provenance, sha256_hex};
use crate::Global;

pub const REPLAY_FORMAT: &str = "skatinfer-replay/1";

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Game log to check.
    #[arg(long)]
    pub logs: PathBuf,
    /// Summary output (JSON lines); stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    deck: Option<DeckKind>,
    logs: &'a str,
}

#[derive(Serialize)]
struct Header<'a> {
    format: &'static str,
    provenance: &'a Provenance,
}

#[derive(Serialize)]
struct GameSummary {
    line: usize,
    id: Option<u64>,
    deck: DeckKind,
    declaration: Option<GameType>,
    soloist: Option<Seat>,
    soloist_points: u16,
    won: bool,
    game_value: u16,
    score: i32,
    cards_played: usize,
}

/// Unlike log ingestion, replay accepts no malformed lines: every record must
/// parse, replay legally and reproduce its recorded result.
pub fn run(g: &Global, a: &ReplayArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.logs).config(format!("cannot read game log {}", a.logs.display()))?;
    let digest = config_digest(&RunConfig {
        command: "replay",
        deck: g.deck(),
        logs: &sha256_hex(text.as_bytes()),
    });
    let prov = provenance(&digest);
    let mut out = serde_json::to_vec(&Header {
        format: REPLAY_FORMAT,
        provenance: &prov,
    })
    .internal("header does not serialize")?;
    out.push(b'\n');
    let mut games = 0;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.trim();
        if line.is_empty() || (games == 0 && serde_json::from_str::<LogHeader>(line).is_ok()) {
            continue;
        }
        let rec: GameRecord = serde_json::from_str(line).data(format!("line {n}: not a game record"))?;
        if let Some(d) = g.deck() {
            if rec.deck != d {
                return Err(Failure::config(format!("line {n}: a {}-deck game, but the deck is set to {d}", rec.deck)));
            }
        }
        let end = rec.replay().data(format!("line {n}: replay failed"))?;
        end.check_invariants()
            .map_err(|e| Failure::Internal(anyhow::anyhow!("line {n}: {e}")))?;
        let score = score_game(&end).internal(format!("line {n}: finished game does not score"))?;
        let summary = GameSummary {
            line: n,
            id: rec.id,
            deck: rec.deck,
            declaration: end.declaration,
            soloist: score.soloist,
            soloist_points: score.soloist_points,
            won: score.won,
            game_value: score.game_value,
            score: score.score,
            cards_played: end.cards_played(),
        };
        serde_json::to_writer(&mut out, &summary).internal("summary does not serialize")?;
        out.push(b'\n');
        games += 1;
    }
    emit(a.out.as_deref(), &out)?;
    eprintln!("replayed {games} games");
    Ok(())
}
