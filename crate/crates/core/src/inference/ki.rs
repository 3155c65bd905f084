//! Knowledge inference: hand-strength tables keyed by bidding outcome.
//!
//! Each non-viewer hand is re-weighted by `P(strength | role, bid, game) / P(strength)`,
//! estimated from game logs. Card play never enters the weight.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cards::{Deck, DeckKind, Hand, Seat};
use crate::gamelog::{GameRecord, Provenance};
use crate::num::Real;
use crate::policy::{best_strength, strength_bucket};
use crate::rules::{bid_ladder, level_of, Action, GameState, Phase};
use crate::worlds::{Configuration, InfoSet, Observed};

use super::ReachWeight;

pub const KI_FORMAT: &str = "skatinfer-ki/1";

/// Strength-bucket frequencies per `role/bid-bucket/declared-kind` key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KiTables {
    pub format: String,
    pub deck: DeckKind,
    pub strength_buckets: u8,
    pub alpha: f64,
    pub games: u64,
    pub counts: BTreeMap<String, Vec<f64>>,
    pub marginal: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// Highest level each seat bid or accepted.
pub fn auction_levels<I: IntoIterator<Item = (Seat, Action)>>(history: I, ladder: &[u16]) -> [u8; 3] {
    let mut levels = [0u8; 3];
    let mut current: Option<u16> = None;
    for (seat, a) in history {
        match a {
            Action::Bid(v) => {
                current = Some(v);
                levels[seat.index()] = levels[seat.index()].max(level_of(ladder, current));
            }
            Action::Accept => levels[seat.index()] = levels[seat.index()].max(level_of(ladder, current)),
            Action::Pass => {}
            _ => break,
        }
    }
    levels
}

fn bid_bucket(level: u8, ladder_len: usize) -> u8 {
    if level == 0 {
        0
    } else {
        1 + ((level as usize - 1) * 3 / ladder_len.max(1)) as u8
    }
}

impl KiTables {
    pub fn empty(deck: DeckKind, strength_buckets: u8, alpha: f64) -> KiTables {
        KiTables {
            format: KI_FORMAT.to_string(),
            deck,
            strength_buckets,
            alpha,
            games: 0,
            counts: BTreeMap::new(),
            marginal: vec![0.0; strength_buckets as usize],
            provenance: None,
        }
    }

    fn key(role_soloist: bool, bid: u8, decl: &str) -> String {
        format!("{}/b{bid}/{decl}", if role_soloist { "sol" } else { "def" })
    }

    fn keys_for(deck: &Deck, history: &[(Seat, Action)], soloist: Seat, decl: &str) -> [String; 3] {
        let ladder = bid_ladder(deck);
        let levels = auction_levels(history.iter().copied(), ladder);
        Seat::ALL.map(|s| {
            let b = bid_bucket(levels[s.index()], ladder.len());
            if s == soloist {
                Self::key(true, b, decl)
            } else {
                Self::key(false, b, "-")
            }
        })
    }

    fn bucket_of(&self, cards: Hand, deck: &Deck) -> usize {
        strength_bucket(best_strength(cards, deck).1, self.strength_buckets) as usize
    }

    /// Adds one finished game. Passed-in games carry no soloist and are skipped.
    pub fn add_game(&mut self, end: &GameState) -> bool {
        let (Some(soloist), Some(g)) = (end.soloist, end.declaration) else {
            return false;
        };
        let decl = format!("{:?}", g.kind);
        let keys = Self::keys_for(&end.deck, &end.history, soloist, &decl);
        let n = self.strength_buckets as usize;
        for s in Seat::ALL {
            let cards = end.hands[s.index()].union(end.played[s.index()]);
            let b = self.bucket_of(cards, &end.deck);
            self.counts.entry(keys[s.index()].clone()).or_insert_with(|| vec![0.0; n])[b] += 1.0;
            self.marginal[b] += 1.0;
        }
        self.games += 1;
        true
    }

    pub fn fit(records: &[GameRecord], deck: DeckKind, strength_buckets: u8, alpha: f64) -> KiTables {
        let mut t = KiTables::empty(deck, strength_buckets, alpha);
        for rec in records {
            if let Ok(end) = rec.replay() {
                t.add_game(&end);
            }
        }
        t
    }

    /// Smoothed `P(bucket | key) / P(bucket)`; 1 for an unseen key.
    pub fn factor(&self, key: &str, bucket: usize) -> f64 {
        let Some(row) = self.counts.get(key) else {
            return 1.0;
        };
        let n = self.strength_buckets as f64;
        let (row_total, total): (f64, f64) = (row.iter().sum(), self.marginal.iter().sum());
        let conditional = (row[bucket] + self.alpha) / (row_total + self.alpha * n);
        let marginal = (self.marginal[bucket] + self.alpha) / (total + self.alpha * n);
        conditional / marginal
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> Result<KiTables, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Product over the other players of the table factor for their hypothesized holding.
/// Weight 1 until the auction has produced a declaration.
pub fn ki_weight<P: Real>(c: &Configuration, tables: &KiTables, info: &InfoSet) -> ReachWeight<P> {
    let (Some(soloist), Some(g)) = (info.soloist, info.declaration) else {
        return ReachWeight::one();
    };
    if matches!(info.phase, Phase::Deal | Phase::Bidding) {
        return ReachWeight::one();
    }
    let history: Vec<(Seat, Action)> = info
        .history
        .iter()
        .filter_map(|&(s, o)| match o {
            Observed::Seen(a) => Some((s, a)),
            Observed::HiddenDiscard => None,
        })
        .collect();
    let decl = format!("{:?}", g.kind);
    let keys = KiTables::keys_for(&info.deck, &history, soloist, &decl);
    let mut w = ReachWeight::one();
    for s in Seat::ALL.into_iter().filter(|&s| s != info.viewer) {
        let cards = c.hands[s.index()].union(info.played[s.index()]);
        let b = tables.bucket_of(cards, &info.deck);
        w = w.times(P::of(tables.factor(&keys[s.index()], b)));
    }
    w
}
