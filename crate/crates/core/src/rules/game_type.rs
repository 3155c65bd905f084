use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cards::{Card, Deck, Hand, Rank, Seat, Suit};

use super::RulesError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Diamonds,
    Hearts,
    Spades,
    Clubs,
    Grand,
    Null,
}

impl GameKind {
    pub const ALL: [GameKind; 6] = [
        GameKind::Diamonds,
        GameKind::Hearts,
        GameKind::Spades,
        GameKind::Clubs,
        GameKind::Grand,
        GameKind::Null,
    ];

    pub fn of_suit(suit: Suit) -> GameKind {
        match suit {
            Suit::Diamonds => GameKind::Diamonds,
            Suit::Hearts => GameKind::Hearts,
            Suit::Spades => GameKind::Spades,
            Suit::Clubs => GameKind::Clubs,
        }
    }

    pub fn trump_suit(self) -> Option<Suit> {
        match self {
            GameKind::Diamonds => Some(Suit::Diamonds),
            GameKind::Hearts => Some(Suit::Hearts),
            GameKind::Spades => Some(Suit::Spades),
            GameKind::Clubs => Some(Suit::Clubs),
            GameKind::Grand | GameKind::Null => None,
        }
    }

    pub fn is_null(self) -> bool {
        self == GameKind::Null
    }

    pub fn is_suit(self) -> bool {
        self.trump_suit().is_some()
    }

    pub fn base_value(self) -> u16 {
        match self {
            GameKind::Diamonds => 9,
            GameKind::Hearts => 10,
            GameKind::Spades => 11,
            GameKind::Clubs => 12,
            GameKind::Grand => 24,
            GameKind::Null => 23,
        }
    }

    /// Suit class of a card under this game: 0..=3 plain suits, [`TRUMP_CLASS`] for trumps.
    pub fn class(self, card: Card) -> u8 {
        match self {
            GameKind::Null => card.suit() as u8,
            _ if card.is_jack() => TRUMP_CLASS,
            _ if Some(card.suit()) == self.trump_suit() => TRUMP_CLASS,
            _ => card.suit() as u8,
        }
    }

    pub fn is_trump(self, card: Card) -> bool {
        self.class(card) == TRUMP_CLASS
    }

    /// All cards of `deck` in the given suit class.
    pub fn class_mask(self, class: u8, deck: &Deck) -> Hand {
        const JACKS: u32 = 0x1010_1010;
        let suit = |c: u8| 0xFFu32 << (8 * c);
        let bits = match (self, self.trump_suit()) {
            (GameKind::Null, _) if class < TRUMP_CLASS => suit(class),
            (GameKind::Null, _) => 0,
            (_, trump) if class == TRUMP_CLASS => JACKS | trump.map_or(0, |t| suit(t as u8)),
            (_, Some(t)) if t as u8 == class => 0,
            _ => suit(class) & !JACKS,
        };
        Hand(bits).intersect(deck.cards)
    }

    /// Ordering used to decide tricks; only meaningful within one suit class.
    pub fn strength(self, card: Card) -> u8 {
        if self.is_null() {
            return card.rank() as u8;
        }
        if card.is_jack() {
            return 20 + card.suit() as u8;
        }
        let plain = match card.rank() {
            Rank::Seven => 0,
            Rank::Eight => 1,
            Rank::Nine => 2,
            Rank::Queen => 3,
            Rank::King => 4,
            Rank::Ten => 5,
            Rank::Ace => 6,
            Rank::Jack => unreachable!(),
        };
        if self.is_trump(card) {
            10 + plain
        } else {
            plain
        }
    }

    /// Trumps of the deck from highest to lowest (empty for null).
    pub fn trump_order(self, deck: &Deck) -> Vec<Card> {
        if self.is_null() {
            return Vec::new();
        }
        let mut order: Vec<Card> = deck.cards.iter().filter(|&c| self.is_trump(c)).collect();
        order.sort_by_key(|&c| std::cmp::Reverse(self.strength(c)));
        order
    }
}

pub const TRUMP_CLASS: u8 = 4;

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GameKind::Diamonds => "diamonds",
            GameKind::Hearts => "hearts",
            GameKind::Spades => "spades",
            GameKind::Clubs => "clubs",
            GameKind::Grand => "grand",
            GameKind::Null => "null",
        };
        f.write_str(s)
    }
}

/// A declared game: kind plus modifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GameType {
    pub kind: GameKind,
    #[serde(default)]
    pub hand: bool,
    #[serde(default)]
    pub ouvert: bool,
    #[serde(default, rename = "schneider")]
    pub schneider_announced: bool,
    #[serde(default, rename = "schwarz")]
    pub schwarz_announced: bool,
}

impl GameType {
    pub fn plain(kind: GameKind) -> GameType {
        GameType {
            kind,
            hand: false,
            ouvert: false,
            schneider_announced: false,
            schwarz_announced: false,
        }
    }

    pub fn base_value(&self) -> u16 {
        self.kind.base_value()
    }

    /// Fixed value of a null game (23 / 35 / 46 / 59).
    pub fn null_value(&self) -> u16 {
        match (self.hand, self.ouvert) {
            (false, false) => 23,
            (true, false) => 35,
            (false, true) => 46,
            (true, true) => 59,
        }
    }

    pub fn validate(&self, deck: &Deck) -> Result<(), RulesError> {
        if let Some(s) = self.kind.trump_suit() {
            if !deck.suits().contains(&s) {
                return Err(RulesError::IllegalDeclaration("trump suit is not in the deck"));
            }
        }
        let announced = self.schneider_announced || self.schwarz_announced;
        if self.kind.is_null() {
            if announced {
                return Err(RulesError::IllegalDeclaration(
                    "null games take no schneider or schwarz announcement",
                ));
            }
            return Ok(());
        }
        if announced && !self.hand {
            return Err(RulesError::IllegalDeclaration("announcements require a hand game"));
        }
        if self.schwarz_announced && !self.schneider_announced {
            return Err(RulesError::IllegalDeclaration("schwarz announced implies schneider announced"));
        }
        if self.ouvert && !(self.hand && self.schwarz_announced) {
            return Err(RulesError::IllegalDeclaration(
                "an open suit or grand game must be a hand game with schwarz announced",
            ));
        }
        Ok(())
    }

    /// Every legal declaration for a hand or pickup game in `deck`, in a fixed order.
    pub fn all_declarations(deck: &Deck, hand: bool) -> Vec<GameType> {
        let mut out = Vec::new();
        for kind in GameKind::ALL {
            let base = GameType {
                hand,
                ..GameType::plain(kind)
            };
            if kind.is_null() {
                out.push(base);
                out.push(GameType { ouvert: true, ..base });
                continue;
            }
            if base.validate(deck).is_err() {
                continue;
            }
            out.push(base);
            if hand {
                let schneider = GameType {
                    schneider_announced: true,
                    ..base
                };
                let schwarz = GameType {
                    schwarz_announced: true,
                    ..schneider
                };
                out.push(schneider);
                out.push(schwarz);
                out.push(GameType { ouvert: true, ..schwarz });
            }
        }
        out
    }

    /// "With/against N" count over the soloist's cards including the skat.
    pub fn matadors(&self, soloist_cards: Hand, deck: &Deck) -> u16 {
        let order = self.kind.trump_order(deck);
        let Some(&top) = order.first() else {
            return 0;
        };
        let with = soloist_cards.contains(top);
        order
            .iter()
            .take_while(|&&c| soloist_cards.contains(c) == with)
            .count() as u16
    }
}

impl fmt::Display for GameType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if self.hand {
            f.write_str(" hand")?;
        }
        if self.schneider_announced {
            f.write_str(" schneider")?;
        }
        if self.schwarz_announced {
            f.write_str(" schwarz")?;
        }
        if self.ouvert {
            f.write_str(" ouvert")?;
        }
        Ok(())
    }
}

/// Winner of a complete trick under `kind`.
pub fn trick_winner(trick: &[(Seat, Card); 3], kind: GameKind) -> Seat {
    let led = kind.class(trick[0].1);
    let trump_played = trick.iter().any(|&(_, c)| kind.is_trump(c));
    let winning_class = if trump_played && !kind.is_null() { TRUMP_CLASS } else { led };
    trick
        .iter()
        .filter(|&&(_, c)| kind.class(c) == winning_class)
        .max_by_key(|&&(_, c)| kind.strength(c))
        .map(|&(s, _)| s)
        .expect("led card belongs to its own class")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Card {
        s.parse().unwrap()
    }

    #[test]
    fn jack_trumps_in_suit_game() {
        let t = [(Seat(0), c("H7")), (Seat(1), c("DJ")), (Seat(2), c("S9"))];
        assert_eq!(trick_winner(&t, GameKind::Hearts), Seat(1));
    }

    #[test]
    fn null_order_places_jack_between_ten_and_queen() {
        let t = [(Seat(0), c("ST")), (Seat(1), c("SJ")), (Seat(2), c("SA"))];
        assert_eq!(trick_winner(&t, GameKind::Null), Seat(2));
        let t = [(Seat(0), c("ST")), (Seat(1), c("SJ")), (Seat(2), c("S9"))];
        assert_eq!(trick_winner(&t, GameKind::Null), Seat(1));
    }

    #[test]
    fn led_suit_wins_without_trump() {
        let t = [(Seat(0), c("SK")), (Seat(1), c("SA")), (Seat(2), c("DA"))];
        assert_eq!(trick_winner(&t, GameKind::Clubs), Seat(1));
        // ten beats king in suit and grand games
        let t = [(Seat(2), c("SK")), (Seat(0), c("ST")), (Seat(1), c("S9"))];
        assert_eq!(trick_winner(&t, GameKind::Grand), Seat(0));
    }

    #[test]
    fn jack_order() {
        let t = [(Seat(0), c("DJ")), (Seat(1), c("CJ")), (Seat(2), c("SJ"))];
        assert_eq!(trick_winner(&t, GameKind::Grand), Seat(1));
        let t = [(Seat(0), c("CA")), (Seat(1), c("HJ")), (Seat(2), c("CT"))];
        assert_eq!(trick_winner(&t, GameKind::Clubs), Seat(1));
    }

    #[test]
    fn matadors_counting() {
        let deck = Deck::full();
        let clubs = GameType::plain(GameKind::Clubs);
        let with2 = Hand::from_cards([c("CJ"), c("SJ"), c("DJ"), c("C7")]);
        assert_eq!(clubs.matadors(with2, &deck), 2);
        let against3 = Hand::from_cards([c("DJ"), c("CA")]);
        assert_eq!(clubs.matadors(against3, &deck), 3);
        let grand = GameType::plain(GameKind::Grand);
        let all_jacks = Hand::from_cards([c("CJ"), c("SJ"), c("HJ"), c("DJ")]);
        assert_eq!(grand.matadors(all_jacks, &deck), 4);
        assert_eq!(GameType::plain(GameKind::Null).matadors(all_jacks, &deck), 0);
    }

    #[test]
    fn class_masks_partition_the_deck() {
        for deck in [Deck::full(), Deck::mini()] {
            for kind in GameKind::ALL {
                let mut seen = Hand::EMPTY;
                for class in 0..=TRUMP_CLASS {
                    let m = kind.class_mask(class, &deck);
                    assert!(m.iter().all(|c| kind.class(c) == class));
                    assert!(seen.is_disjoint(m));
                    seen = seen.union(m);
                }
                assert_eq!(seen, deck.cards);
            }
        }
    }

    #[test]
    fn base_values_match_table() {
        let v: Vec<u16> = GameKind::ALL.iter().map(|k| k.base_value()).collect();
        assert_eq!(v, [9, 10, 11, 12, 24, 23]);
    }

    #[test]
    fn declaration_validation() {
        let deck = Deck::full();
        let mut g = GameType::plain(GameKind::Spades);
        g.schneider_announced = true;
        assert!(g.validate(&deck).is_err());
        g.hand = true;
        assert!(g.validate(&deck).is_ok());
        assert!(GameType::plain(GameKind::Hearts).validate(&Deck::mini()).is_err());
        assert_eq!(GameType::all_declarations(&deck, false).len(), 7);
        assert_eq!(GameType::all_declarations(&deck, true).len(), 22);
        assert_eq!(GameType::all_declarations(&Deck::mini(), true).len(), 14);
    }
}
