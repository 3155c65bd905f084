//! A scripted stochastic player: softmax choices over simple hand and trick features.
//!
//! Every legal choice keeps positive probability, so it can generate game logs
//! and also serve as the exact opponent model when inferring on those logs.

use serde::{Deserialize, Serialize};

use crate::cards::{Card, Deck, Hand, Rank};
use crate::num::Real;
use crate::rules::{level_of, GameKind, GameState, GameType, Phase};

use super::features::{best_strength, current_trick_leader, game_strength, trick_winning_cards};
use super::{Choice, DecisionContext, DecisionKind, PolicyModel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicParams {
    /// Larger values concentrate max-bid mass around the target level.
    pub bid_sharpness: f64,
    /// Strength at which a hand starts to be worth a bid.
    pub bid_threshold: f64,
    /// Target levels gained per unit of strength above the threshold.
    pub bid_slope: f64,
    /// Strength at which playing without the skat becomes likely.
    pub hand_threshold: f64,
    pub declare_sharpness: f64,
    pub discard_sharpness: f64,
    pub play_sharpness: f64,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        HeuristicParams {
            bid_sharpness: 1.5,
            bid_threshold: 8.5,
            bid_slope: 0.9,
            hand_threshold: 14.0,
            declare_sharpness: 1.5,
            discard_sharpness: 1.0,
            play_sharpness: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HeuristicPolicy {
    pub params: HeuristicParams,
}

/// Value the game would have if won without schneider, for bid planning.
fn planned_value(cards: Hand, game: &GameType, deck: &Deck) -> u16 {
    if game.kind.is_null() {
        return game.null_value();
    }
    let extra = u16::from(game.hand)
        + 2 * u16::from(game.schneider_announced)
        + 2 * u16::from(game.schwarz_announced)
        + u16::from(game.ouvert);
    game.base_value() * (game.matadors(cards, deck) + 1 + extra)
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

fn discard_logit(card: Card, kind: GameKind) -> f64 {
    if kind.is_null() {
        return match card.rank() {
            Rank::Ace => 2.0,
            Rank::King => 1.5,
            Rank::Queen => 1.0,
            Rank::Jack => 0.7,
            Rank::Ten => 0.5,
            Rank::Nine => 0.0,
            Rank::Eight => -0.5,
            Rank::Seven => -1.0,
        };
    }
    if card.is_jack() {
        return -4.0;
    }
    if kind.is_trump(card) {
        return -2.0;
    }
    match card.rank() {
        Rank::Ace => -0.5,
        Rank::Ten => 1.0,
        Rank::King => 0.8,
        Rank::Queen => 0.5,
        _ => 0.7,
    }
}

fn announcement_offset(game: &GameType) -> f64 {
    if game.kind.is_null() {
        return if game.ouvert { -1.5 } else { 0.0 };
    }
    -2.5 * f64::from(u8::from(game.schneider_announced))
        - 1.5 * f64::from(u8::from(game.schwarz_announced))
        - 2.0 * f64::from(u8::from(game.ouvert))
}

impl HeuristicPolicy {
    pub fn new(params: HeuristicParams) -> Self {
        HeuristicPolicy { params }
    }

    fn level_distribution(&self, ctx: &DecisionContext<'_>) -> Vec<f64> {
        let s = ctx.state;
        let hand = ctx.actor_hand();
        let (kind, strength) = best_strength(hand, &s.deck);
        let ladder = s.ladder();
        let value = planned_value(hand, &GameType::plain(kind), &s.deck);
        let cap = level_of(ladder, ladder.iter().rev().find(|&&v| v <= value).copied());
        let p = &self.params;
        let target = (p.bid_slope * (strength - p.bid_threshold)).clamp(0.0, f64::from(cap));
        let logits: Vec<f64> = (0..=ladder.len())
            .map(|l| -p.bid_sharpness * (l as f64 - target).abs())
            .collect();
        softmax(&logits)
    }

    fn hand_probability(&self, ctx: &DecisionContext<'_>) -> f64 {
        let (_, strength) = best_strength(ctx.actor_hand(), &ctx.state.deck);
        1.0 / (1.0 + (-(strength - self.params.hand_threshold)).exp())
    }

    fn declaration_distribution(&self, state: &GameState, cards: Hand, hand_game: bool) -> (Vec<GameType>, Vec<f64>) {
        let games = GameType::all_declarations(&state.deck, hand_game);
        let bid = state.bid.unwrap_or(0);
        let logits: Vec<f64> = games
            .iter()
            .map(|g| {
                let overbid = if planned_value(cards, g, &state.deck) < bid { 3.0 } else { 0.0 };
                self.params.declare_sharpness * game_strength(cards, g.kind) + announcement_offset(g) - overbid
            })
            .collect();
        let probs = softmax(&logits);
        (games, probs)
    }

    /// Exponentiated discard weights of the held cards under `kind`.
    fn discard_weights(&self, cards: &[Card], kind: GameKind) -> Vec<f64> {
        cards
            .iter()
            .map(|&c| (self.params.discard_sharpness * discard_logit(c, kind)).exp())
            .collect()
    }

    fn pair_probability(&self, cards: &[Card], kind: GameKind, pair: [Card; 2]) -> f64 {
        let w = self.discard_weights(cards, kind);
        let sum: f64 = w.iter().sum();
        let sq: f64 = w.iter().map(|x| x * x).sum();
        let z = (sum * sum - sq) / 2.0;
        let wi = |c: Card| cards.iter().position(|&x| x == c).map_or(0.0, |i| w[i]);
        wi(pair[0]) * wi(pair[1]) / z
    }

    fn play_logits(&self, state: &GameState) -> (Vec<Card>, Vec<f64>) {
        let cards = state.playable().cards();
        let g = state.declaration.expect("cardplay has a declaration");
        let kind = g.kind;
        let actor = state.to_move;
        let soloist = state.soloist == Some(actor);
        let winners = trick_winning_cards(state);
        let leading = state.current_trick.is_empty();
        let partner_winning = current_trick_leader(state).is_some_and(|s| {
            s != actor && (state.soloist != Some(s)) && !soloist
        });
        let trick_points: f64 = state.current_trick.iter().map(|&(_, c)| f64::from(c.points())).sum();
        let logits = cards
            .iter()
            .map(|&c| {
                let pts = f64::from(c.points());
                let trump = kind.is_trump(c);
                let l = if kind.is_null() {
                    let rank = f64::from(kind.strength(c));
                    if soloist {
                        match (leading, winners.contains(c)) {
                            (true, _) => -0.4 * rank,
                            (false, false) => 2.0 + 0.3 * rank,
                            (false, true) => -0.3 * rank,
                        }
                    } else {
                        -0.15 * rank
                    }
                } else if leading {
                    match (soloist, trump, c.rank()) {
                        (true, true, _) => 0.8,
                        (_, false, Rank::Ace) => 1.0,
                        (false, true, _) => -0.5,
                        _ => -0.05 * pts,
                    }
                } else if partner_winning {
                    0.08 * pts - if winners.contains(c) && trump { 0.5 } else { 0.0 }
                } else if winners.contains(c) {
                    1.0 + 0.03 * trick_points - 0.02 * pts
                } else {
                    -0.1 * pts
                };
                self.params.play_sharpness * l
            })
            .collect();
        (cards, logits)
    }
}

impl<P: Real> PolicyModel<P> for HeuristicPolicy {
    fn distribution(&self, ctx: &DecisionContext<'_>) -> Vec<P> {
        let probs: Vec<f64> = match ctx.kind {
            k if k.is_max_bid() => self.level_distribution(ctx),
            DecisionKind::PickupOrHand => {
                let h = self.hand_probability(ctx);
                vec![1.0 - h, h]
            }
            DecisionKind::DiscardAndDeclare => {
                let cards = ctx.actor_hand();
                if ctx.state.phase == Phase::Discard {
                    let list = cards.cards();
                    let (games, gp) = self.declaration_distribution(ctx.state, cards, false);
                    let mut out = Vec::with_capacity(list.len() * list.len() / 2 * games.len());
                    let pair_tables: Vec<(Vec<f64>, f64)> = games
                        .iter()
                        .map(|g| {
                            let w = self.discard_weights(&list, g.kind);
                            let sum: f64 = w.iter().sum();
                            let sq: f64 = w.iter().map(|x| x * x).sum();
                            (w, (sum * sum - sq) / 2.0)
                        })
                        .collect();
                    for i in 0..list.len() {
                        for j in i + 1..list.len() {
                            for (gi, (w, z)) in pair_tables.iter().enumerate() {
                                out.push(gp[gi] * w[i] * w[j] / z);
                            }
                        }
                    }
                    out
                } else {
                    self.declaration_distribution(ctx.state, cards, true).1
                }
            }
            _ => softmax(&self.play_logits(ctx.state).1),
        };
        probs.into_iter().map(P::of).collect()
    }

    fn probability(&self, ctx: &DecisionContext<'_>, choice: &Choice) -> P {
        if !ctx.is_legal(choice) {
            return P::zero();
        }
        let p = match (ctx.kind, choice) {
            (DecisionKind::DiscardAndDeclare, Choice::Declare { discard, game }) => {
                let cards = ctx.actor_hand();
                let (games, gp) = self.declaration_distribution(ctx.state, cards, discard.is_none());
                let pg = games.iter().position(|x| x == game).map_or(0.0, |i| gp[i]);
                match discard {
                    Some(pair) => pg * self.pair_probability(&cards.cards(), game.kind, *pair),
                    None => pg,
                }
            }
            (DecisionKind::PickupOrHand, c) => {
                let h = self.hand_probability(ctx);
                if *c == Choice::Hand {
                    h
                } else {
                    1.0 - h
                }
            }
            (k, Choice::MaxBid(l)) if k.is_max_bid() => self.level_distribution(ctx)[*l as usize],
            (DecisionKind::PlayCard, Choice::Play(c)) => {
                let (cards, logits) = self.play_logits(ctx.state);
                let probs = softmax(&logits);
                cards.iter().position(|x| x == c).map_or(0.0, |i| probs[i])
            }
            _ => 0.0,
        };
        P::of(p)
    }

    fn level_mass(&self, ctx: &DecisionContext<'_>, lo: u8, hi: Option<u8>) -> P {
        let d = self.level_distribution(ctx);
        let hi = hi.map_or(d.len(), |h| (h as usize).min(d.len()));
        P::of(d.get(lo as usize..hi).map_or(0.0, |s| s.iter().sum()))
    }
}
