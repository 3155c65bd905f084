//! JSON-lines game records: one game per line, optionally preceded by a header line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{Card, Deck, DeckKind, Hand, Seat};
use crate::rules::{score_game, Action, GameScore, GameState, GameType, RulesError};

pub const LOG_FORMAT: &str = "skatinfer-log/1";

#[derive(Debug, Error)]
pub enum LogError {
    #[error("malformed deal string: {0}")]
    Deal(String),
    #[error("malformed action {0:?}")]
    Action(String),
    #[error("replay failed at step {step}: {source}")]
    Replay { step: usize, source: RulesError },
    #[error("record is incomplete: {0}")]
    Incomplete(&'static str),
    #[error("recorded result does not match the replayed score")]
    ResultMismatch,
    #[error("too many malformed lines: {malformed} of {total}")]
    TooManyMalformed { malformed: usize, total: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Who produced a file and from what configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format: String,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    #[serde(default)]
    pub id: Option<u64>,
    #[serde(default = "default_deck")]
    pub deck: DeckKind,
    pub deal: String,
    pub bids: Vec<String>,
    pub declaration: Option<GameType>,
    #[serde(default)]
    pub discard: Option<[Card; 2]>,
    #[serde(default)]
    pub cardplay: Vec<Card>,
    #[serde(default)]
    pub result: Option<GameScore>,
}

fn default_deck() -> DeckKind {
    DeckKind::Full
}

pub fn encode_deal(deck: &Deck, hands: &[Hand; 3], skat: Hand) -> String {
    (0..32u8)
        .map(|i| {
            let c = Card::from_index(i);
            if !deck.cards.contains(c) {
                '.'
            } else if skat.contains(c) {
                's'
            } else {
                let s = hands.iter().position(|h| h.contains(c)).unwrap_or(0);
                (b'0' + s as u8) as char
            }
        })
        .collect()
}

pub fn decode_deal(s: &str) -> Result<([Hand; 3], Hand), LogError> {
    if s.len() != 32 {
        return Err(LogError::Deal(s.to_string()));
    }
    let mut hands = [Hand::EMPTY; 3];
    let mut skat = Hand::EMPTY;
    for (i, ch) in s.bytes().enumerate() {
        let c = Card::from_index(i as u8);
        match ch {
            b'0'..=b'2' => hands[(ch - b'0') as usize].insert(c),
            b's' => skat.insert(c),
            b'.' => {}
            _ => return Err(LogError::Deal(s.to_string())),
        }
    }
    Ok((hands, skat))
}

fn encode_bid(a: &Action) -> String {
    match a {
        Action::Bid(v) => v.to_string(),
        Action::Accept => "yes".into(),
        _ => "pass".into(),
    }
}

fn decode_bid(s: &str) -> Result<Action, LogError> {
    match s {
        "yes" => Ok(Action::Accept),
        "pass" => Ok(Action::Pass),
        _ => s.parse().map(Action::Bid).map_err(|_| LogError::Action(s.to_string())),
    }
}

impl GameRecord {
    /// Builds a record from a finished game.
    pub fn from_state(state: &GameState, id: Option<u64>) -> Result<GameRecord, RulesError> {
        let result = score_game(state)?;
        let mut bids = Vec::new();
        let mut discard = None;
        let mut cardplay = Vec::new();
        for (_, a) in &state.history {
            match a {
                Action::Bid(_) | Action::Accept | Action::Pass => bids.push(encode_bid(a)),
                Action::Discard(d) => discard = Some(*d),
                Action::PlayCard(c) => cardplay.push(*c),
                _ => {}
            }
        }
        Ok(GameRecord {
            id,
            deck: state.deck.kind,
            deal: encode_deal(&state.deck, &state.dealt, state.dealt_skat),
            bids,
            declaration: state.declaration,
            discard,
            cardplay,
            result: Some(result),
        })
    }

    pub fn deck(&self) -> Deck {
        Deck::of_kind(self.deck)
    }

    pub fn initial_state(&self) -> Result<GameState, LogError> {
        let (hands, skat) = decode_deal(&self.deal)?;
        GameState::from_deal(self.deck(), hands, skat).map_err(|_| LogError::Deal(self.deal.clone()))
    }

    /// Every action of the game in order, including pickup and declaration.
    pub fn actions(&self) -> Result<Vec<Action>, LogError> {
        let mut out: Vec<Action> = self.bids.iter().map(|b| decode_bid(b)).collect::<Result<_, _>>()?;
        if let Some(g) = self.declaration {
            if g.hand {
                out.push(Action::DeclareHand);
            } else {
                let d = self.discard.ok_or(LogError::Incomplete("pickup game without discard"))?;
                out.push(Action::PickupSkat);
                out.push(Action::Discard(d));
            }
            out.push(Action::Declare(g));
        }
        out.extend(self.cardplay.iter().map(|&c| Action::PlayCard(c)));
        Ok(out)
    }

    /// Replays up to (not including) the first card of cardplay.
    pub fn replay_precardplay(&self) -> Result<GameState, LogError> {
        let mut g = self.initial_state()?;
        let n = self.actions()?.len() - self.cardplay.len();
        for (step, a) in self.actions()?.into_iter().take(n).enumerate() {
            g.apply_mut(a).map_err(|source| LogError::Replay { step, source })?;
        }
        Ok(g)
    }

    /// Replays the whole game and checks the recorded result.
    pub fn replay(&self) -> Result<GameState, LogError> {
        let mut g = self.initial_state()?;
        for (step, a) in self.actions()?.into_iter().enumerate() {
            g.apply_mut(a).map_err(|source| LogError::Replay { step, source })?;
        }
        if !g.is_terminal() {
            return Err(LogError::Incomplete("game does not reach a terminal state"));
        }
        if let Some(r) = self.result {
            if score_game(&g).map_err(|source| LogError::Replay { step: 0, source })? != r {
                return Err(LogError::ResultMismatch);
            }
        }
        Ok(g)
    }

    /// Soloist according to the recorded result.
    pub fn soloist(&self) -> Option<Seat> {
        self.result.and_then(|r| r.soloist)
    }
}

pub fn write_header<W: Write>(w: &mut W, provenance: &Provenance) -> Result<(), LogError> {
    let h = LogHeader {
        format: LOG_FORMAT.to_string(),
        provenance: provenance.clone(),
    };
    serde_json::to_writer(&mut *w, &h)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_record<W: Write>(w: &mut W, rec: &GameRecord) -> Result<(), LogError> {
    serde_json::to_writer(&mut *w, rec)?;
    w.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Default)]
pub struct LogContents {
    pub header: Option<LogHeader>,
    pub games: Vec<GameRecord>,
    /// Lines that failed to parse or replay.
    pub malformed: usize,
}

/// Reads a log, skipping malformed lines; aborts if more than 10% are malformed.
pub fn read_log<R: BufRead>(reader: R) -> Result<LogContents, LogError> {
    let mut out = LogContents::default();
    let mut total = 0;
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if out.header.is_none() && out.games.is_empty() && out.malformed == 0 {
            if let Ok(h) = serde_json::from_str::<LogHeader>(line) {
                out.header = Some(h);
                continue;
            }
        }
        total += 1;
        match serde_json::from_str::<GameRecord>(line) {
            Ok(rec) if rec.replay().is_ok() => out.games.push(rec),
            _ => out.malformed += 1,
        }
    }
    if out.malformed * 10 > total {
        return Err(LogError::TooManyMalformed {
            malformed: out.malformed,
            total,
        });
    }
    if out.malformed > 0 {
        log::warn!("skipped {} malformed log lines", out.malformed);
    }
    Ok(out)
}
