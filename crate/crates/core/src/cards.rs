//! Cards, hands, seats and deck descriptions.
//!
//! Every card has a fixed index in `[0, 32)` (`suit * 8 + rank`), whatever
//! deck is in play. A [`Deck`] selects the subset of cards in use together
//! with hand and skat sizes, which is how the 14-card mini deck shares all
//! code with the full 32-card game.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CardParseError {
    #[error("invalid card `{0}`")]
    Card(String),
    #[error("invalid deck `{0}` (expected `full` or `mini`)")]
    Deck(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suit {
    Diamonds = 0,
    Hearts = 1,
    Spades = 2,
    Clubs = 3,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Diamonds, Suit::Hearts, Suit::Spades, Suit::Clubs];

    pub fn from_index(i: u8) -> Suit {
        Suit::ALL[i as usize]
    }

    pub fn letter(self) -> char {
        match self {
            Suit::Diamonds => 'D',
            Suit::Hearts => 'H',
            Suit::Spades => 'S',
            Suit::Clubs => 'C',
        }
    }

    /// All card positions of this suit.
    pub fn mask(self) -> Hand {
        Hand(0xFF << (self as u32 * 8))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Seven = 0,
    Eight = 1,
    Nine = 2,
    Ten = 3,
    Jack = 4,
    Queen = 5,
    King = 6,
    Ace = 7,
}

impl Rank {
    pub const ALL: [Rank; 8] = [
        Rank::Seven,
        Rank::Eight,
        Rank::Nine,
        Rank::Ten,
        Rank::Jack,
        Rank::Queen,
        Rank::King,
        Rank::Ace,
    ];

    pub fn from_index(i: u8) -> Rank {
        Rank::ALL[i as usize]
    }

    pub fn letter(self) -> char {
        match self {
            Rank::Seven => '7',
            Rank::Eight => '8',
            Rank::Nine => '9',
            Rank::Ten => 'T',
            Rank::Jack => 'J',
            Rank::Queen => 'Q',
            Rank::King => 'K',
            Rank::Ace => 'A',
        }
    }

    /// Card points: A=11, 10=10, K=4, Q=3, J=2, others 0.
    pub fn points(self) -> u16 {
        match self {
            Rank::Ace => 11,
            Rank::Ten => 10,
            Rank::King => 4,
            Rank::Queen => 3,
            Rank::Jack => 2,
            _ => 0,
        }
    }
}

/// One of the 32 Skat cards.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Card(u8);

impl Card {
    pub fn new(suit: Suit, rank: Rank) -> Card {
        Card(suit as u8 * 8 + rank as u8)
    }

    pub fn from_index(i: u8) -> Card {
        assert!(i < 32, "card index {i} out of range");
        Card(i)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn suit(self) -> Suit {
        Suit::from_index(self.0 / 8)
    }

    pub fn rank(self) -> Rank {
        Rank::from_index(self.0 % 8)
    }

    pub fn points(self) -> u16 {
        self.rank().points()
    }

    pub fn is_jack(self) -> bool {
        self.rank() == Rank::Jack
    }

    pub fn bit(self) -> u32 {
        1 << self.0
    }
}

pub fn card_points(card: Card) -> u16 {
    card.points()
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.suit().letter(), self.rank().letter())
    }
}

impl fmt::Debug for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Card {
    type Err = CardParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || CardParseError::Card(s.to_string());
        let mut chars = s.chars();
        let (Some(sc), Some(rc), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(err());
        };
        let suit = Suit::ALL
            .into_iter()
            .find(|x| x.letter() == sc.to_ascii_uppercase())
            .ok_or_else(err)?;
        let rank = Rank::ALL
            .into_iter()
            .find(|x| x.letter() == rc.to_ascii_uppercase())
            .ok_or_else(err)?;
        Ok(Card::new(suit, rank))
    }
}

impl Serialize for Card {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Card {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A set of cards as a 32-bit index set.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hand(pub u32);

impl Hand {
    pub const EMPTY: Hand = Hand(0);

    pub fn from_cards<I: IntoIterator<Item = Card>>(cards: I) -> Hand {
        Hand(cards.into_iter().fold(0, |m, c| m | c.bit()))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, card: Card) -> bool {
        self.0 & card.bit() != 0
    }

    pub fn insert(&mut self, card: Card) {
        self.0 |= card.bit();
    }

    pub fn remove(&mut self, card: Card) {
        self.0 &= !card.bit();
    }

    pub fn with(self, card: Card) -> Hand {
        Hand(self.0 | card.bit())
    }

    pub fn without(self, card: Card) -> Hand {
        Hand(self.0 & !card.bit())
    }

    pub fn union(self, other: Hand) -> Hand {
        Hand(self.0 | other.0)
    }

    pub fn intersect(self, other: Hand) -> Hand {
        Hand(self.0 & other.0)
    }

    pub fn minus(self, other: Hand) -> Hand {
        Hand(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Hand) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: Hand) -> bool {
        self.0 & !other.0 == 0
    }

    /// Cards in ascending index order.
    pub fn iter(self) -> HandIter {
        HandIter(self.0)
    }

    pub fn cards(self) -> Vec<Card> {
        self.iter().collect()
    }

    pub fn points(self) -> u16 {
        self.iter().map(Card::points).sum()
    }

    pub fn lowest(self) -> Option<Card> {
        (self.0 != 0).then(|| Card(self.0.trailing_zeros() as u8))
    }
}

impl fmt::Debug for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", names.join(" "))
    }
}

impl FromIterator<Card> for Hand {
    fn from_iter<I: IntoIterator<Item = Card>>(iter: I) -> Self {
        Hand::from_cards(iter)
    }
}

pub struct HandIter(u32);

impl Iterator for HandIter {
    type Item = Card;

    fn next(&mut self) -> Option<Card> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(Card(i as u8))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for HandIter {}

/// Table position: 0 = forehand, 1 = middlehand, 2 = rearhand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Seat(pub u8);

impl Seat {
    pub const FOREHAND: Seat = Seat(0);
    pub const MIDDLEHAND: Seat = Seat(1);
    pub const REARHAND: Seat = Seat(2);
    pub const ALL: [Seat; 3] = [Seat(0), Seat(1), Seat(2)];

    pub fn next(self) -> Seat {
        Seat((self.0 + 1) % 3)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Seat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeckKind {
    Full,
    Mini,
}

impl FromStr for DeckKind {
    type Err = CardParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(DeckKind::Full),
            "mini" => Ok(DeckKind::Mini),
            _ => Err(CardParseError::Deck(s.to_string())),
        }
    }
}

impl fmt::Display for DeckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeckKind::Full => "full",
            DeckKind::Mini => "mini",
        })
    }
}

/// Which cards are in play and how they are dealt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Deck {
    pub kind: DeckKind,
    pub cards: Hand,
    pub hand_size: usize,
    pub skat_size: usize,
}

impl Deck {
    pub fn full() -> Deck {
        Deck {
            kind: DeckKind::Full,
            cards: Hand(u32::MAX),
            hand_size: 10,
            skat_size: 2,
        }
    }

    /// MiniSkat: spades and clubs, ranks 8 through ace, 4-card hands, 2-card skat.
    pub fn mini() -> Deck {
        let per_suit = 0xFE; // all ranks but the seven
        Deck {
            kind: DeckKind::Mini,
            cards: Hand((per_suit << (Suit::Spades as u32 * 8)) | (per_suit << (Suit::Clubs as u32 * 8))),
            hand_size: 4,
            skat_size: 2,
        }
    }

    pub fn of_kind(kind: DeckKind) -> Deck {
        match kind {
            DeckKind::Full => Deck::full(),
            DeckKind::Mini => Deck::mini(),
        }
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn suits(&self) -> Vec<Suit> {
        Suit::ALL
            .into_iter()
            .filter(|s| !self.cards.intersect(s.mask()).is_empty())
            .collect()
    }

    pub fn total_points(&self) -> u16 {
        self.cards.points()
    }

    /// Points the soloist needs to win a suit or grand game (61 of 120).
    pub fn win_threshold(&self) -> u16 {
        self.total_points() / 2 + 1
    }

    /// Schneider threshold (90 of 120).
    pub fn schneider_threshold(&self) -> u16 {
        self.total_points() * 3 / 4
    }

    pub fn tricks(&self) -> usize {
        self.hand_size
    }
}
