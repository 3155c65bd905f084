//! Hand and trick features shared by the heuristic policy, table bucketing and KI.

use crate::cards::{Card, Deck, Hand, Rank};
use crate::rules::{GameKind, GameState};

fn suit_card_value(card: Card, kind: GameKind) -> f64 {
    let trump = kind.is_trump(card);
    match (card.rank(), trump) {
        (Rank::Jack, _) => 3.0,
        (Rank::Ace, true) => 2.0,
        (Rank::Ten, true) => 1.7,
        (_, true) => 1.0,
        (Rank::Ace, false) => 1.3,
        (Rank::Ten, false) => 0.5,
        _ => 0.0,
    }
}

fn grand_card_value(card: Card) -> f64 {
    match card.rank() {
        Rank::Jack => 3.2,
        Rank::Ace => 1.8,
        Rank::Ten => 0.9,
        _ => 0.0,
    }
}

fn null_card_value(card: Card) -> f64 {
    match card.rank() {
        Rank::Seven => 1.2,
        Rank::Eight => 1.0,
        Rank::Nine => 0.7,
        Rank::Ten => 0.4,
        Rank::Jack => 0.1,
        _ => -0.6,
    }
}

/// How playable `cards` are as a game of `kind`, scaled to a ten-card hand.
pub fn game_strength(cards: Hand, kind: GameKind) -> f64 {
    if cards.is_empty() {
        return 0.0;
    }
    let raw: f64 = match kind {
        GameKind::Null => cards.iter().map(null_card_value).sum(),
        GameKind::Grand => {
            let mut v: f64 = cards.iter().map(grand_card_value).sum();
            // a ten is worth more next to its own ace
            for c in cards.iter().filter(|c| c.rank() == Rank::Ten) {
                if cards.contains(Card::new(c.suit(), Rank::Ace)) {
                    v += 0.6;
                }
            }
            v - 2.0
        }
        _ => cards.iter().map(|c| suit_card_value(c, kind)).sum(),
    };
    raw * 10.0 / cards.len() as f64
}

/// Game kinds that can be declared with `deck`.
pub fn playable_kinds(deck: &Deck) -> Vec<GameKind> {
    GameKind::ALL
        .into_iter()
        .filter(|k| k.trump_suit().is_none_or(|s| deck.suits().contains(&s)))
        .collect()
}

/// Strongest game for `cards` and its strength.
pub fn best_strength(cards: Hand, deck: &Deck) -> (GameKind, f64) {
    let mut best = (GameKind::Grand, f64::NEG_INFINITY);
    for kind in playable_kinds(deck) {
        let s = game_strength(cards, kind);
        if s > best.1 {
            best = (kind, s);
        }
    }
    best
}

/// Quantizes a strength into `n` buckets over the range where bidding decisions change.
pub fn strength_bucket(strength: f64, n: u8) -> u8 {
    let (lo, hi) = (4.0, 16.0);
    let x = ((strength - lo) / (hi - lo) * f64::from(n)).floor();
    x.clamp(0.0, f64::from(n - 1)) as u8
}

/// Playable cards that would take the lead in the current trick; empty when leading.
pub fn trick_winning_cards(state: &GameState) -> Hand {
    let (Some(g), Some(&(_, first))) = (state.declaration, state.current_trick.first()) else {
        return Hand::EMPTY;
    };
    let kind = g.kind;
    let mut best = first;
    for &(_, c) in state.current_trick.iter().skip(1) {
        if beats(c, best, kind) {
            best = c;
        }
    }
    state.playable().iter().filter(|&c| beats(c, best, kind)).collect()
}

/// Whether `card` beats the currently winning `best` (which sits in the led or winning class).
pub fn beats(card: Card, best: Card, kind: GameKind) -> bool {
    let (cc, bc) = (kind.class(card), kind.class(best));
    if cc == bc {
        return kind.strength(card) > kind.strength(best);
    }
    !kind.is_null() && kind.is_trump(card)
}

/// Seat currently winning the trick in progress.
pub fn current_trick_leader(state: &GameState) -> Option<crate::cards::Seat> {
    let g = state.declaration?;
    let mut it = state.current_trick.iter();
    let &(mut seat, mut best) = it.next()?;
    for &(s, c) in it {
        if beats(c, best, g.kind) {
            best = c;
            seat = s;
        }
    }
    Some(seat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(s: &str) -> Hand {
        Hand::from_cards(s.split_whitespace().map(|c| c.parse().unwrap()))
    }

    #[test]
    fn jacks_make_strong_suit_hands() {
        let deck = Deck::full();
        let strong = h("CJ SJ CA CT CK C9 C8 HA SA D7");
        let weak = h("D7 D8 H9 HQ S8 SQ C7 DK H7 S9");
        let (kind, s) = best_strength(strong, &deck);
        assert_eq!(kind, GameKind::Clubs);
        assert!(s > best_strength(weak, &deck).1 + 5.0);
        assert_eq!(best_strength(weak, &deck).0, GameKind::Null);
    }

    #[test]
    fn buckets_are_monotone_and_bounded() {
        let mut last = 0;
        for i in 0..200 {
            let b = strength_bucket(f64::from(i) * 0.1, 6);
            assert!(b >= last && b < 6);
            last = b;
        }
        assert_eq!(strength_bucket(-3.0, 6), 0);
        assert_eq!(strength_bucket(99.0, 6), 5);
    }

    #[test]
    fn mini_deck_offers_two_suits() {
        let kinds = playable_kinds(&Deck::mini());
        assert_eq!(kinds, [GameKind::Spades, GameKind::Clubs, GameKind::Grand, GameKind::Null]);
    }
}
