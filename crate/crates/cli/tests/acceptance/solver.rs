use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use skatinfer::ddsolver::{solve, OpenState};
use skatinfer::rules::{deal_deck, Action, GameKind, GameState, GameType, Phase};
use skatinfer::Deck;

use crate::Outcome;

const PER_TYPE: usize = 1000;
const MAX_CARDS: usize = 5;

/// A random card-play position with at most `MAX_CARDS` cards in any hand,
/// or `None` when the random line ends the game first.
fn endgame(kind: GameKind, seed: u64) -> Option<GameState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = deal_deck(Deck::full(), rng.gen());
    g.apply_mut(Action::Bid(18)).ok()?;
    g.apply_mut(Action::Pass).ok()?;
    g.apply_mut(Action::Pass).ok()?;
    let hand_game = rng.gen_bool(0.3);
    if hand_game {
        g.apply_mut(Action::DeclareHand).ok()?;
    } else {
        g.apply_mut(Action::PickupSkat).ok()?;
        let mut cards = g.hands[1].cards();
        cards.shuffle(&mut rng);
        let mut pair = [cards[0], cards[1]];
        pair.sort();
        g.apply_mut(Action::Discard(pair)).ok()?;
    }
    let decl = GameType {
        hand: hand_game,
        ..GameType::plain(kind)
    };
    g.apply_mut(Action::Declare(decl)).ok()?;
    let target = rng.gen_range(1..=MAX_CARDS);
    let extra = rng.gen_range(0..3);
    let max_left = |g: &GameState| g.hands.iter().map(|h| h.len()).max().unwrap_or(0);
    while g.phase == Phase::Cardplay && max_left(&g) > target {
        let legal = g.legal_actions().ok()?;
        g.apply_mut(*legal.choose(&mut rng)?).ok()?;
    }
    for _ in 0..extra {
        if g.phase != Phase::Cardplay {
            break;
        }
        let legal = g.legal_actions().ok()?;
        g.apply_mut(*legal.choose(&mut rng)?).ok()?;
    }
    (g.phase == Phase::Cardplay).then_some(g)
}

/// Unpruned minimax over the rules engine: soloist card points including the
/// skat, or 1/0 for a won/lost null game.
fn minimax(g: &GameState) -> u16 {
    if g.phase == Phase::Terminal {
        let kind = g.declaration.expect("declared").kind;
        return if kind.is_null() {
            u16::from(g.tricks_won[0] == 0)
        } else {
            g.card_points[0] + g.skat.points()
        };
    }
    let values = g
        .legal_actions()
        .expect("card play")
        .into_iter()
        .map(|a| minimax(&g.apply_action(a).expect("legal")));
    if Some(g.to_move) == g.soloist {
        values.max().expect("a legal card")
    } else {
        values.min().expect("a legal card")
    }
}

fn positions(name: &str, kinds: &[GameKind], stream: u64) -> Vec<GameState> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < PER_TYPE {
        let kind = kinds[seed as usize % kinds.len()];
        if let Some(g) = endgame(kind, skatinfer::seeds::derive_seed(&[stream, seed])) {
            out.push(g);
        }
        seed += 1;
        assert!(seed < 100 * PER_TYPE as u64, "too few {name} endgames");
    }
    out
}

pub fn exactness() -> Outcome {
    let suits = [GameKind::Diamonds, GameKind::Hearts, GameKind::Spades, GameKind::Clubs];
    let types: [(&str, &[GameKind]); 3] = [("suit", &suits), ("grand", &[GameKind::Grand]), ("null", &[GameKind::Null])];
    let mut details = Vec::new();
    let mut pass = true;
    for (i, (name, kinds)) in types.into_iter().enumerate() {
        let games = positions(name, kinds, 0x5017 + i as u64);
        let mismatches = games
            .par_iter()
            .filter(|g| solve(&OpenState::from_game(g).expect("open state")) != minimax(g))
            .count();
        let five = games.iter().filter(|g| g.hands.iter().map(|h| h.len()).max() == Some(MAX_CARDS)).count();
        pass &= mismatches == 0;
        details.push(format!("{name} {mismatches}/{} mismatches ({five} with {MAX_CARDS} cards)", games.len()));
    }
    Outcome::new(pass, details.join(", "))
}
