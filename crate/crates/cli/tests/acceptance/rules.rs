use std::time::Instant;

use rayon::prelude::*;
use skatinfer::policy::{HeuristicPolicy, PolicyModel, UniformPolicy};
use skatinfer::rules::{Action, GameKind, GameState, Phase};
use skatinfer::selfplay::play_game;
use skatinfer::seeds::derive_seed;
use skatinfer::{Card, Deck, Hand, Rank};

use crate::Outcome;

const GAMES: u64 = 100_000;
const TIME_LIMIT_S: f64 = 60.0;

/// Follow-suit class of a card, written out from the rules: jacks and the
/// trump suit form one class, null games have no trumps.
fn class(card: Card, kind: GameKind) -> u8 {
    let suit = card.suit() as u8;
    match kind {
        GameKind::Null => suit,
        GameKind::Grand if card.rank() == Rank::Jack => 4,
        GameKind::Grand => suit,
        _ if card.rank() == Rank::Jack || Some(card.suit()) == kind.trump_suit() => 4,
        _ => suit,
    }
}

/// Violations found while stepping through one finished game.
fn audit(end: &GameState) -> Vec<String> {
    let mut bad = Vec::new();
    let mut g = match GameState::from_deal(end.deck, end.dealt, end.dealt_skat) {
        Ok(g) => g,
        Err(e) => return vec![format!("deal rejected: {e}")],
    };
    for &(_, a) in &end.history {
        match g.legal_actions() {
            Ok(legal) if legal.contains(&a) => {}
            _ => bad.push(format!("illegal {a:?}")),
        }
        if let (Phase::Cardplay, Action::PlayCard(c)) = (g.phase, a) {
            let kind = g.declaration.map(|d| d.kind).unwrap_or(GameKind::Grand);
            if let Some(&(_, lead)) = g.current_trick.first() {
                let led = class(lead, kind);
                let hand: Hand = g.hands[g.to_move.index()];
                if class(c, kind) != led && hand.iter().any(|h| class(h, kind) == led) {
                    bad.push(format!("{c} does not follow {lead}"));
                }
            }
        }
        if let Err(e) = g.apply_mut(a) {
            bad.push(format!("apply failed: {e}"));
            return bad;
        }
        if let Err(e) = g.check_invariants() {
            bad.push(e);
        }
    }
    let total = g.card_points[0]
        + g.card_points[1]
        + g.skat.points()
        + g.hands.iter().map(|h| h.points()).sum::<u16>()
        + g.current_trick.iter().map(|&(_, c)| c.points()).sum::<u16>();
    if total != 120 {
        bad.push(format!("card points total {total}"));
    }
    bad
}

/// Full-deck self-play: even games heuristic, odd games uniformly random.
pub fn conformance() -> Outcome {
    let heuristic = HeuristicPolicy::default();
    let t = Instant::now();
    let results: Vec<(bool, Vec<String>)> = (0..GAMES)
        .into_par_iter()
        .map(|i| {
            let model: &dyn PolicyModel<f64> = if i % 2 == 0 { &heuristic } else { &UniformPolicy };
            let end = play_game(model, Deck::full(), derive_seed(&[0xacce, i]));
            (end.cards_played() > 0, audit(&end))
        })
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let played = results.iter().filter(|r| r.0).count();
    let violations: usize = results.iter().map(|r| r.1.len()).sum();
    let first = results.iter().flat_map(|r| &r.1).next();
    Outcome::new(
        violations == 0 && secs < TIME_LIMIT_S,
        format!(
            "{GAMES} games ({played} with card play), {violations} violations{}, {secs:.1} s (limit {TIME_LIMIT_S} s)",
            first.map(|v| format!(" e.g. {v}")).unwrap_or_default()
        ),
    )
}
