#![allow(dead_code)]

pub mod brute;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skatinfer::rules::{deal_deck, Action, GameState, Phase};
use skatinfer::{Deck, Hand};

/// Plays uniformly random legal actions, calling `visit` before each one.
pub fn random_playout(deck: Deck, seed: u64, mut visit: impl FnMut(&GameState)) -> GameState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = deal_deck(deck, rng.gen());
    while !g.is_terminal() {
        visit(&g);
        let legal = g.legal_actions().unwrap();
        // passing often keeps auctions short
        let a = if g.phase == Phase::Bidding && rng.gen_bool(0.4) {
            *legal.last().unwrap()
        } else {
            *legal.choose(&mut rng).unwrap()
        };
        g.apply_mut(a).unwrap();
    }
    g
}

/// Plays a random game that reaches cardplay, stopping once `cards` cards are down.
pub fn random_cardplay_state(deck: Deck, seed: u64, cards: usize) -> Option<GameState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = deal_deck(deck, rng.gen());
    while !g.is_terminal() {
        if g.phase == Phase::Cardplay && g.cards_played() >= cards {
            return Some(g);
        }
        let legal = g.legal_actions().unwrap();
        let a = match g.phase {
            Phase::Bidding => match legal.first() {
                Some(Action::Bid(v)) if g.bid.is_none() && rng.gen_bool(0.7) => Action::Bid(*v),
                _ if legal.contains(&Action::Accept) && rng.gen_bool(0.5) => Action::Accept,
                _ => Action::Pass,
            },
            _ => *legal.choose(&mut rng).unwrap(),
        };
        g.apply_mut(a).unwrap();
    }
    None
}

pub fn hand(s: &str) -> Hand {
    Hand::from_cards(s.split_whitespace().map(|c| c.parse().unwrap()))
}

/// Every decision point of a finished game with the state it was taken in.
pub fn points_with_states(end: &GameState) -> Vec<(skatinfer::policy::DecisionPoint, GameState)> {
    use skatinfer::worlds::Observed;
    let history: Vec<_> = end.history.iter().map(|&(s, a)| (s, Observed::Seen(a))).collect();
    let points = skatinfer::policy::decision_points(&history, &end.deck);
    let mut g = GameState::from_deal(end.deck, end.dealt, end.dealt_skat).unwrap();
    let mut applied = 0;
    let mut out = Vec::new();
    for p in points {
        while applied < p.prefix {
            g.apply_mut(end.history[applied].1).unwrap();
            applied += 1;
        }
        out.push((p, g.clone()));
    }
    out
}
