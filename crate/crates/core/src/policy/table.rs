//! Count tables fitted from game logs, with additive smoothing.
//!
//! Every decision maps to a string key built from bucketed, actor-observable
//! features. Probabilities are `(n_a + α) / (Σ_{b legal} n_b + α·|legal|)`,
//! so a key never seen in training gives the uniform distribution.
//! Max-bid levels are only seen as intervals; their counts are the expected
//! counts of a Turnbull-style EM fit. Card play is a choice from a varying
//! legal set, so its counts are effective counts of a Luce choice model
//! fitted by MM; with a constant legal set they are the raw counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{Card, DeckKind, Hand};
use crate::gamelog::{GameRecord, Provenance};
use crate::num::Real;
use crate::rules::{level_of, GameKind, GameState, GameType, Phase, TRUMP_CLASS};
use crate::worlds::Observed;

use super::features::best_strength;
use super::schedule::{decision_points, PointObservation};
use super::{strength_bucket, Choice, DecisionContext, DecisionKind, Observation, PolicyModel};

pub const TABLE_FORMAT: &str = "skatinfer-table/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucketing {
    /// Fine keys: more context, needs more data.
    Standard,
    /// Few keys per decision kind.
    Coarse,
}

impl Bucketing {
    pub fn id(self) -> &'static str {
        match self {
            Bucketing::Standard => "standard",
            Bucketing::Coarse => "coarse",
        }
    }

    pub fn from_id(s: &str) -> Option<Bucketing> {
        match s {
            "standard" => Some(Bucketing::Standard),
            "coarse" => Some(Bucketing::Coarse),
            _ => None,
        }
    }

    fn strength_buckets(self) -> u8 {
        match self {
            Bucketing::Standard => 8,
            Bucketing::Coarse => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("unsupported table format {0:?}")]
    Format(String),
    #[error("smoothing constant must be positive, got {0}")]
    Alpha(f64),
    #[error("{skipped} of {total} games could not be replayed")]
    TooManyMalformed { skipped: usize, total: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TablePolicy {
    pub format: String,
    pub version: String,
    pub deck: DeckKind,
    pub bucketing: Bucketing,
    pub alpha: f64,
    /// Games the counts were fitted from.
    pub games: usize,
    /// Key → choice id → (possibly fractional) count.
    pub counts: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn level_bucket(level: u8) -> u8 {
    match level {
        0 => 0,
        1..=2 => 1,
        3..=5 => 2,
        _ => 3,
    }
}

fn game_id(game: &GameType) -> String {
    game.to_string()
}

fn level_id(l: u8) -> String {
    format!("l{l}")
}

fn discard_key(kind: GameKind) -> &'static str {
    if kind.is_null() {
        "discard/null"
    } else {
        "discard/trump"
    }
}

fn discard_feature(card: Card, kind: GameKind) -> String {
    let t = if kind.is_trump(card) { 'T' } else { 'P' };
    format!("{t}{}", card.rank().letter())
}

impl TablePolicy {
    pub fn empty(deck: DeckKind, bucketing: Bucketing, alpha: f64) -> Result<Self, TableError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(TableError::Alpha(alpha));
        }
        Ok(TablePolicy {
            format: TABLE_FORMAT.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            deck,
            bucketing,
            alpha,
            games: 0,
            counts: BTreeMap::new(),
            provenance: None,
        })
    }

    /// Fits tables from complete game records. Records that fail to replay are
    /// skipped; more than 10% of them is an error.
    pub fn fit(records: &[GameRecord], deck: DeckKind, bucketing: Bucketing, alpha: f64) -> Result<Self, TableError> {
        let mut fitter = TableFitter::new(TablePolicy::empty(deck, bucketing, alpha)?);
        let mut skipped = 0;
        for rec in records {
            if fitter.add_record(rec).is_err() {
                skipped += 1;
            }
        }
        if skipped * 10 > records.len() {
            return Err(TableError::TooManyMalformed {
                skipped,
                total: records.len(),
            });
        }
        if skipped > 0 {
            log::warn!("skipped {skipped} games that failed to replay");
        }
        Ok(fitter.finish())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, TableError> {
        let t: TablePolicy = serde_json::from_str(s)?;
        if t.format != TABLE_FORMAT {
            return Err(TableError::Format(t.format));
        }
        if !(t.alpha > 0.0 && t.alpha.is_finite()) {
            return Err(TableError::Alpha(t.alpha));
        }
        Ok(t)
    }

    fn strength_of(&self, cards: Hand, state: &GameState) -> (GameKind, u8) {
        let (kind, s) = best_strength(cards, &state.deck);
        (kind, strength_bucket(s, self.bucketing.strength_buckets()))
    }

    /// Table key of a decision. Pickup discards additionally use the per-card `discard/` tables.
    pub fn key(&self, ctx: &DecisionContext<'_>) -> String {
        let s = ctx.state;
        let hand = ctx.actor_hand();
        match ctx.kind {
            k if k.is_max_bid() => {
                let (_, b) = self.strength_of(hand, s);
                match self.bucketing {
                    Bucketing::Standard => {
                        let c = level_bucket(level_of(s.ladder(), s.auction.bid));
                        format!("{k:?}/s{b}/c{c}")
                    }
                    Bucketing::Coarse => format!("{k:?}/s{b}"),
                }
            }
            DecisionKind::PickupOrHand => format!("pickup/s{}", self.strength_of(hand, s).1),
            DecisionKind::DiscardAndDeclare => {
                let h = if s.phase == Phase::Declare { "hand" } else { "pickup" };
                let (kind, b) = self.strength_of(hand, s);
                match self.bucketing {
                    Bucketing::Standard => format!("declare/{h}/{kind}/s{b}"),
                    Bucketing::Coarse => format!("declare/{h}/s{b}"),
                }
            }
            _ => self.play_key(s, hand),
        }
    }

    fn play_key(&self, s: &GameState, hand: Hand) -> String {
        let g = s.declaration.expect("cardplay has a declaration");
        let kind = g.kind;
        let game = if kind.is_null() && g.ouvert {
            "null-ouvert".to_string()
        } else {
            kind.to_string()
        };
        let soloist = s.soloist.expect("cardplay has a soloist");
        let role = match (s.to_move.0 + 3 - soloist.0) % 3 {
            0 => "S",
            1 => "D1",
            _ => "D2",
        };
        let (led, holds) = match s.current_trick.first() {
            None => ("-", "-"),
            Some(&(_, c)) => {
                let class = kind.class(c);
                let led = if class == TRUMP_CLASS && !kind.is_null() { "T" } else { "P" };
                let holds = !hand.intersect(kind.class_mask(class, &s.deck)).is_empty();
                (led, if holds { "y" } else { "n" })
            }
        };
        match self.bucketing {
            Bucketing::Standard => {
                let trumps = if kind.is_null() {
                    0
                } else {
                    hand.iter().filter(|&c| kind.is_trump(c)).count().min(4)
                };
                format!("play/{game}/t{}/{led}/{role}/k{trumps}/{holds}", s.tricks.len())
            }
            Bucketing::Coarse => format!("play/{game}/{led}/{role}/{holds}"),
        }
    }

    fn count(&self, key: &str, id: &str) -> f64 {
        self.counts.get(key).and_then(|t| t.get(id)).copied().unwrap_or(0.0)
    }

    /// Smoothed distribution over `ids` under `key`.
    fn smoothed(&self, key: &str, ids: &[String]) -> Vec<f64> {
        let n: Vec<f64> = ids.iter().map(|id| self.count(key, id)).collect();
        let z: f64 = n.iter().sum::<f64>() + self.alpha * ids.len() as f64;
        n.into_iter().map(|x| (x + self.alpha) / z).collect()
    }

    /// Per-card discard weights `(d + α) / (h + 2α)` for the held cards.
    fn discard_weights(&self, cards: &[Card], kind: GameKind) -> Vec<f64> {
        let key = discard_key(kind);
        cards
            .iter()
            .map(|&c| {
                let f = discard_feature(c, kind);
                let d = self.count(key, &format!("d:{f}"));
                let h = self.count(key, &format!("h:{f}"));
                (d + self.alpha) / (h + 2.0 * self.alpha)
            })
            .collect()
    }

    fn pair_normalizer(w: &[f64]) -> f64 {
        let sum: f64 = w.iter().sum();
        let sq: f64 = w.iter().map(|x| x * x).sum();
        (sum * sum - sq) / 2.0
    }

    fn game_distribution(&self, ctx: &DecisionContext<'_>) -> (Vec<GameType>, Vec<f64>) {
        let hand_game = ctx.state.phase == Phase::Declare;
        let games = GameType::all_declarations(&ctx.state.deck, hand_game);
        let ids: Vec<String> = games.iter().map(game_id).collect();
        let p = self.smoothed(&self.key(ctx), &ids);
        (games, p)
    }

    fn distribution_f64(&self, ctx: &DecisionContext<'_>) -> Vec<f64> {
        match ctx.kind {
            k if k.is_max_bid() => {
                let ids: Vec<String> = (0..=ctx.ladder_len()).map(level_id).collect();
                self.smoothed(&self.key(ctx), &ids)
            }
            DecisionKind::PickupOrHand => self.smoothed(&self.key(ctx), &["pickup".into(), "hand".into()]),
            DecisionKind::DiscardAndDeclare => {
                let (games, gp) = self.game_distribution(ctx);
                if ctx.state.phase == Phase::Declare {
                    return gp;
                }
                let cards = ctx.actor_hand().cards();
                let tables: Vec<(Vec<f64>, f64)> = games
                    .iter()
                    .map(|g| {
                        let w = self.discard_weights(&cards, g.kind);
                        let z = Self::pair_normalizer(&w);
                        (w, z)
                    })
                    .collect();
                let mut out = Vec::with_capacity(cards.len() * (cards.len() - 1) / 2 * games.len());
                for i in 0..cards.len() {
                    for j in i + 1..cards.len() {
                        for (gi, (w, z)) in tables.iter().enumerate() {
                            out.push(gp[gi] * w[i] * w[j] / z);
                        }
                    }
                }
                out
            }
            _ => {
                let ids: Vec<String> = ctx.state.playable().iter().map(|c| c.to_string()).collect();
                self.smoothed(&self.key(ctx), &ids)
            }
        }
    }

    fn probability_f64(&self, ctx: &DecisionContext<'_>, choice: &Choice) -> f64 {
        if !ctx.is_legal(choice) {
            return 0.0;
        }
        match choice {
            Choice::Declare { discard, game } => {
                let (games, gp) = self.game_distribution(ctx);
                let pg = games.iter().position(|g| g == game).map_or(0.0, |i| gp[i]);
                match discard {
                    None => pg,
                    Some([a, b]) => {
                        let cards = ctx.actor_hand().cards();
                        let w = self.discard_weights(&cards, game.kind);
                        let wi = |c: &Card| cards.iter().position(|x| x == c).map_or(0.0, |i| w[i]);
                        pg * wi(a) * wi(b) / Self::pair_normalizer(&w)
                    }
                }
            }
            Choice::MaxBid(l) => self.distribution_f64(ctx)[*l as usize],
            Choice::Pickup => self.distribution_f64(ctx)[0],
            Choice::Hand => self.distribution_f64(ctx)[1],
            Choice::Play(c) => {
                let key = self.key(ctx);
                let legal = ctx.state.playable();
                let total: f64 = legal.iter().map(|x| self.count(&key, &x.to_string())).sum();
                (self.count(&key, &c.to_string()) + self.alpha) / (total + self.alpha * legal.len() as f64)
            }
        }
    }
}

impl<P: Real> PolicyModel<P> for TablePolicy {
    fn distribution(&self, ctx: &DecisionContext<'_>) -> Vec<P> {
        self.distribution_f64(ctx).into_iter().map(P::of).collect()
    }

    fn probability(&self, ctx: &DecisionContext<'_>, choice: &Choice) -> P {
        P::of(self.probability_f64(ctx, choice))
    }
}

/// Accumulates observations, then resolves interval-censored max-bids by EM.
#[derive(Clone, Debug)]
pub struct TableFitter {
    table: TablePolicy,
    /// Key → (number of levels, (lo, hi) → count), with `hi` capped at the level count.
    intervals: BTreeMap<String, (u8, BTreeMap<(u8, u8), f64>)>,
    /// Key → (legal set, chosen card) → count.
    plays: BTreeMap<String, BTreeMap<(Hand, Card), f64>>,
}

impl TableFitter {
    pub fn new(table: TablePolicy) -> Self {
        TableFitter {
            table,
            intervals: BTreeMap::new(),
            plays: BTreeMap::new(),
        }
    }

    fn bump(&mut self, key: &str, id: String, by: f64) {
        *self
            .table
            .counts
            .entry(key.to_string())
            .or_default()
            .entry(id)
            .or_insert(0.0) += by;
    }

    /// Records one observed decision. Uninformative level intervals are skipped.
    pub fn observe(&mut self, ctx: &DecisionContext<'_>, obs: &Observation) {
        let key = self.table.key(ctx);
        match *obs {
            Observation::Levels { lo, hi } => {
                let n = ctx.ladder_len() + 1;
                let hi = hi.map_or(n, |h| h.min(n));
                if lo >= hi || (lo == 0 && hi == n) {
                    return;
                }
                let entry = self.intervals.entry(key).or_insert_with(|| (n, BTreeMap::new()));
                *entry.1.entry((lo, hi)).or_insert(0.0) += 1.0;
            }
            Observation::Exact(choice) => match choice {
                Choice::MaxBid(l) => self.bump(&key, level_id(l), 1.0),
                Choice::Pickup => self.bump(&key, "pickup".into(), 1.0),
                Choice::Hand => self.bump(&key, "hand".into(), 1.0),
                Choice::Play(c) => {
                    let legal = ctx.state.playable();
                    *self.plays.entry(key).or_default().entry((legal, c)).or_insert(0.0) += 1.0;
                }
                Choice::Declare { discard, game } => {
                    self.bump(&key, game_id(&game), 1.0);
                    if let Some(pair) = discard {
                        let dk = discard_key(game.kind);
                        for c in ctx.actor_hand().iter() {
                            self.bump(dk, format!("h:{}", discard_feature(c, game.kind)), 1.0);
                        }
                        for c in pair {
                            self.bump(dk, format!("d:{}", discard_feature(c, game.kind)), 1.0);
                        }
                    }
                }
            },
        }
    }

    /// Replays a complete record and observes every decision in it.
    pub fn add_record(&mut self, rec: &GameRecord) -> Result<(), crate::gamelog::LogError> {
        let end = rec.replay()?;
        let history: Vec<_> = end.history.iter().map(|&(s, a)| (s, Observed::Seen(a))).collect();
        let points = decision_points(&history, &end.deck);
        let mut state = rec.initial_state()?;
        let mut applied = 0;
        for p in points {
            while applied < p.prefix {
                state.apply_mut(end.history[applied].1).expect("record replayed once already");
                applied += 1;
            }
            let PointObservation::Known(obs) = p.obs else {
                continue;
            };
            let ctx = DecisionContext {
                kind: p.kind,
                state: &state,
                actor: p.actor,
            };
            if ctx.validate().is_ok() {
                self.observe(&ctx, &obs);
            }
        }
        self.table.games += 1;
        Ok(())
    }

    /// Resolves censored max-bids and card-play choice sets, and returns the table.
    pub fn finish(mut self) -> TablePolicy {
        let alpha = self.table.alpha;
        let plays = std::mem::take(&mut self.plays);
        for (key, obs) in plays {
            let table = self.table.counts.entry(key).or_default();
            for (c, n) in luce_counts(&obs, alpha) {
                table.insert(c.to_string(), n);
            }
        }
        let intervals = std::mem::take(&mut self.intervals);
        for (key, (n, obs)) in intervals {
            let n = n as usize;
            let exact: Vec<f64> = (0..n).map(|l| self.table.count(&key, &level_id(l as u8))).collect();
            let expected = turnbull(&exact, &obs, alpha);
            for (l, e) in expected.into_iter().enumerate() {
                if e > 0.0 {
                    self.table
                        .counts
                        .entry(key.clone())
                        .or_default()
                        .insert(level_id(l as u8), e);
                }
            }
        }
        self.table
    }
}

/// Expected level counts for interval-censored observations, with `alpha`
/// pseudo-counts per level (the fixed point of the smoothed EM update).
pub fn turnbull(exact: &[f64], intervals: &BTreeMap<(u8, u8), f64>, alpha: f64) -> Vec<f64> {
    let n = exact.len();
    let total: f64 = exact.iter().sum::<f64>() + intervals.values().sum::<f64>();
    let mut p = vec![1.0 / n as f64; n];
    let mut e = exact.to_vec();
    for _ in 0..5000 {
        e.copy_from_slice(exact);
        for (&(lo, hi), &c) in intervals {
            let (lo, hi) = (lo as usize, (hi as usize).min(n));
            let mass: f64 = p[lo..hi].iter().sum();
            for l in lo..hi {
                e[l] += c * p[l] / mass;
            }
        }
        let z = total + alpha * n as f64;
        let mut delta: f64 = 0.0;
        for l in 0..n {
            let q = (e[l] + alpha) / z;
            delta = delta.max((q - p[l]).abs());
            p[l] = q;
        }
        if delta < 1e-12 {
            break;
        }
    }
    e
}

/// Effective counts `θ_c − α` of the smoothed Luce model `P(c | L) = θ_c / Σ_{b∈L} θ_b`.
///
/// Maximum likelihood by the MM update `θ_c = wins_c / Σ_{v: c∈L_v} 1/Θ_v`, scaled so
/// that `Σ θ = Σ wins`; for a constant legal set this gives `θ_c = wins_c + α`.
pub fn luce_counts(obs: &BTreeMap<(Hand, Card), f64>, alpha: f64) -> Vec<(Card, f64)> {
    let all = obs.keys().fold(Hand::EMPTY, |m, (l, _)| m.union(*l));
    let cards = all.cards();
    let idx = |c: Card| cards.iter().position(|&x| x == c).expect("card is in some legal set");
    let mut groups: BTreeMap<Hand, f64> = BTreeMap::new();
    let mut wins = vec![0.0; cards.len()];
    for (&(l, c), &n) in obs {
        *groups.entry(l).or_insert(0.0) += n;
        wins[idx(c)] += n;
    }
    // smoothing enters as α wins per card in one pseudo-visit over every card,
    // which also keeps the comparison graph connected
    groups.insert(all, groups.get(&all).copied().unwrap_or(0.0) + alpha * cards.len() as f64);
    wins.iter_mut().for_each(|w| *w += alpha);
    let groups: Vec<(Vec<usize>, f64)> = groups.into_iter().map(|(l, n)| (l.iter().map(idx).collect(), n)).collect();
    let scale: f64 = wins.iter().sum();
    let mut theta = vec![scale / cards.len() as f64; cards.len()];
    let mut denom = vec![0.0; cards.len()];
    for _ in 0..10_000 {
        denom.iter_mut().for_each(|d| *d = 0.0);
        for (members, n) in &groups {
            let total: f64 = members.iter().map(|&i| theta[i]).sum();
            for &i in members {
                denom[i] += n / total;
            }
        }
        let next: Vec<f64> = (0..cards.len()).map(|i| wins[i] / denom[i]).collect();
        let z: f64 = next.iter().sum();
        let mut delta: f64 = 0.0;
        for i in 0..cards.len() {
            let t = next[i] * scale / z;
            delta = delta.max(((t - theta[i]) / theta[i]).abs());
            theta[i] = t;
        }
        if delta < 1e-13 {
            break;
        }
    }
    cards.into_iter().zip(theta).map(|(c, t)| (c, t - alpha)).collect()
}
