use std::fmt;

use arrayvec::ArrayVec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cards::{Card, Deck, Hand, Seat};

use super::bidding::{bid_ladder, Auction, AuctionOutcome};
use super::game_type::{trick_winner, GameType};
use super::RulesError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Deal,
    Bidding,
    PickupOrHand,
    Discard,
    Declare,
    Cardplay,
    Terminal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    Bid(u16),
    Pass,
    Accept,
    PickupSkat,
    DeclareHand,
    Discard([Card; 2]),
    Declare(GameType),
    PlayCard(Card),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Bid(v) => write!(f, "{v}"),
            Action::Pass => f.write_str("pass"),
            Action::Accept => f.write_str("yes"),
            Action::PickupSkat => f.write_str("pickup"),
            Action::DeclareHand => f.write_str("hand"),
            Action::Discard([a, b]) => write!(f, "discard {a} {b}"),
            Action::Declare(g) => write!(f, "declare {g}"),
            Action::PlayCard(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Trick {
    pub leader: Seat,
    pub cards: [Card; 3],
    pub winner: Seat,
}

/// Full perfect-information game state.
///
/// `card_points` and `tricks_won` are indexed by party: 0 soloist, 1 defenders.
/// Skat points are not in `card_points`; scoring adds them to the soloist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    pub deck: Deck,
    pub phase: Phase,
    pub dealt: [Hand; 3],
    pub dealt_skat: Hand,
    pub hands: [Hand; 3],
    pub skat: Hand,
    pub auction: Auction,
    pub bid: Option<u16>,
    pub soloist: Option<Seat>,
    pub picked_up: bool,
    pub declaration: Option<GameType>,
    pub current_trick: ArrayVec<(Seat, Card), 3>,
    pub tricks: Vec<Trick>,
    pub played: [Hand; 3],
    pub card_points: [u16; 2],
    pub tricks_won: [u8; 2],
    pub to_move: Seat,
    pub history: Vec<(Seat, Action)>,
}

/// Deals a full 32-card game.
pub fn deal(seed: u64) -> GameState {
    deal_deck(Deck::full(), seed)
}

pub fn deal_deck(deck: Deck, seed: u64) -> GameState {
    let mut cards = deck.cards.cards();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cards.shuffle(&mut rng);
    let n = deck.hand_size;
    let hands = [0, 1, 2].map(|i| Hand::from_cards(cards[i * n..(i + 1) * n].iter().copied()));
    let skat = Hand::from_cards(cards[3 * n..].iter().copied());
    GameState::from_deal(deck, hands, skat).expect("shuffled deck is a valid deal")
}

impl GameState {
    pub fn from_deal(deck: Deck, hands: [Hand; 3], skat: Hand) -> Result<GameState, RulesError> {
        let all = hands.iter().fold(skat, |m, h| m.union(*h));
        let sizes_ok = hands.iter().all(|h| h.len() == deck.hand_size) && skat.len() == deck.skat_size;
        let disjoint = hands[0].is_disjoint(hands[1])
            && hands[0].is_disjoint(hands[2])
            && hands[1].is_disjoint(hands[2])
            && hands.iter().all(|h| h.is_disjoint(skat));
        if !(sizes_ok && disjoint && all == deck.cards) {
            return Err(RulesError::InvalidDeal);
        }
        Ok(GameState {
            deck,
            phase: Phase::Bidding,
            dealt: hands,
            dealt_skat: skat,
            hands,
            skat,
            auction: Auction::default(),
            bid: None,
            soloist: None,
            picked_up: false,
            declaration: None,
            current_trick: ArrayVec::new(),
            tricks: Vec::new(),
            played: [Hand::EMPTY; 3],
            card_points: [0; 2],
            tricks_won: [0; 2],
            to_move: Seat::MIDDLEHAND,
            history: Vec::new(),
        })
    }

    pub fn is_terminal(&self) -> bool {
        self.phase == Phase::Terminal
    }

    pub fn ladder(&self) -> &'static [u16] {
        bid_ladder(&self.deck)
    }

    /// Party index of a seat: 0 for the soloist, 1 for a defender.
    pub fn party(&self, seat: Seat) -> usize {
        usize::from(self.soloist != Some(seat))
    }

    pub fn cards_played(&self) -> usize {
        self.played.iter().map(|h| h.len()).sum()
    }

    pub fn all_played(&self) -> Hand {
        self.played[0].union(self.played[1]).union(self.played[2])
    }

    /// The soloist's twelve cards after pickup (hand, played and discard together).
    pub fn soloist_twelve(&self) -> Option<Hand> {
        let s = self.soloist?;
        Some(self.hands[s.index()].union(self.played[s.index()]).union(self.skat))
    }

    fn led_class(&self) -> Option<u8> {
        let g = self.declaration?;
        self.current_trick.first().map(|&(_, c)| g.kind.class(c))
    }

    /// Cards `seat` may play: the led suit class when held, otherwise anything.
    pub fn playable(&self) -> Hand {
        let hand = self.hands[self.to_move.index()];
        let (Some(g), Some(led)) = (self.declaration, self.led_class()) else {
            return hand;
        };
        let follow = g.kind.class_mask(led, &self.deck).intersect(hand);
        if follow.is_empty() {
            hand
        } else {
            follow
        }
    }

    pub fn legal_actions(&self) -> Result<Vec<Action>, RulesError> {
        Ok(match self.phase {
            Phase::Terminal => return Err(RulesError::GameOver),
            Phase::Deal => return Err(RulesError::WrongPhase(self.phase)),
            Phase::Bidding => self.auction.legal(self.ladder()),
            Phase::PickupOrHand => vec![Action::PickupSkat, Action::DeclareHand],
            Phase::Discard => {
                let cards = self.hands[self.to_move.index()].cards();
                let mut out = Vec::with_capacity(cards.len() * (cards.len() - 1) / 2);
                for i in 0..cards.len() {
                    for j in i + 1..cards.len() {
                        out.push(Action::Discard([cards[i], cards[j]]));
                    }
                }
                out
            }
            Phase::Declare => GameType::all_declarations(&self.deck, !self.picked_up)
                .into_iter()
                .map(Action::Declare)
                .collect(),
            Phase::Cardplay => self.playable().iter().map(Action::PlayCard).collect(),
        })
    }

    pub fn apply_action(&self, action: Action) -> Result<GameState, RulesError> {
        let mut next = self.clone();
        next.apply_mut(action)?;
        Ok(next)
    }

    /// In-place successor; on error the state is left unchanged.
    pub fn apply_mut(&mut self, action: Action) -> Result<(), RulesError> {
        let actor = self.to_move;
        let illegal = |rule: &'static str| RulesError::IllegalAction { action, rule };
        match (self.phase, action) {
            (Phase::Terminal, _) => return Err(RulesError::GameOver),
            (Phase::Bidding, Action::Bid(_) | Action::Pass | Action::Accept) => {
                let ladder = self.ladder();
                match self.auction.apply(action, ladder)? {
                    AuctionOutcome::Continue => self.to_move = self.auction.to_move(),
                    AuctionOutcome::Won { soloist, bid } => {
                        self.soloist = Some(soloist);
                        self.bid = Some(bid);
                        self.phase = Phase::PickupOrHand;
                        self.to_move = soloist;
                    }
                    AuctionOutcome::PassedIn => self.phase = Phase::Terminal,
                }
            }
            (Phase::PickupOrHand, Action::PickupSkat) => {
                let s = actor.index();
                self.hands[s] = self.hands[s].union(self.skat);
                self.skat = Hand::EMPTY;
                self.picked_up = true;
                self.phase = Phase::Discard;
            }
            (Phase::PickupOrHand, Action::DeclareHand) => self.phase = Phase::Declare,
            (Phase::Discard, Action::Discard([a, b])) => {
                let hand = self.hands[actor.index()];
                if a == b || !hand.contains(a) || !hand.contains(b) {
                    return Err(illegal("the discard must be two distinct cards held by the soloist"));
                }
                self.hands[actor.index()] = hand.without(a).without(b);
                self.skat = Hand::from_cards([a, b]);
                self.phase = Phase::Declare;
            }
            (Phase::Declare, Action::Declare(g)) => {
                if g.hand == self.picked_up {
                    return Err(illegal("the hand flag must match whether the skat was picked up"));
                }
                g.validate(&self.deck)?;
                self.declaration = Some(g);
                self.phase = Phase::Cardplay;
                self.to_move = Seat::FOREHAND;
            }
            (Phase::Cardplay, Action::PlayCard(card)) => {
                if !self.hands[actor.index()].contains(card) {
                    return Err(illegal("a player can only play a card from their own hand"));
                }
                if !self.playable().contains(card) {
                    return Err(illegal("players must follow the led suit when they can"));
                }
                self.play_card(actor, card);
            }
            _ => return Err(illegal("action does not belong to the current phase")),
        }
        self.history.push((actor, action));
        Ok(())
    }

    fn play_card(&mut self, actor: Seat, card: Card) {
        self.hands[actor.index()].remove(card);
        self.played[actor.index()].insert(card);
        self.current_trick.push((actor, card));
        if self.current_trick.len() < 3 {
            self.to_move = actor.next();
            return;
        }
        let kind = self.declaration.expect("cardplay has a declaration").kind;
        let cards: [(Seat, Card); 3] = [self.current_trick[0], self.current_trick[1], self.current_trick[2]];
        let winner = trick_winner(&cards, kind);
        let party = self.party(winner);
        self.card_points[party] += cards.iter().map(|(_, c)| c.points()).sum::<u16>();
        self.tricks_won[party] += 1;
        self.tricks.push(Trick {
            leader: cards[0].0,
            cards: cards.map(|(_, c)| c),
            winner,
        });
        self.current_trick.clear();
        self.to_move = winner;
        let soloist_lost_null = kind.is_null() && party == 0;
        if soloist_lost_null || self.tricks.len() == self.deck.tricks() {
            self.phase = Phase::Terminal;
        }
    }

    /// Checks card and point conservation plus hand-size bookkeeping.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = Hand::EMPTY;
        let mut total = 0;
        let parts = self.hands.iter().chain(self.played.iter()).chain([&self.skat]);
        for h in parts {
            if !seen.is_disjoint(*h) {
                return Err(format!("card held twice: {:?}", seen.intersect(*h)));
            }
            seen = seen.union(*h);
            total += h.len();
        }
        if seen != self.deck.cards || total != self.deck.len() {
            return Err("cards do not partition the deck".into());
        }
        let in_trick = Hand::from_cards(self.current_trick.iter().map(|&(_, c)| c));
        let in_tricks = Hand::from_cards(self.tricks.iter().flat_map(|t| t.cards));
        if in_trick.union(in_tricks) != self.all_played() {
            return Err("played cards disagree with the trick record".into());
        }
        let unplayed: u16 = self.hands.iter().map(|h| h.points()).sum();
        let sum = self.card_points[0] + self.card_points[1] + unplayed + self.skat.points() + in_trick.points();
        if sum != self.deck.total_points() {
            return Err(format!("card points sum to {sum}"));
        }
        if self.phase == Phase::Cardplay {
            let done = self.tricks.len();
            for seat in Seat::ALL {
                let in_current = self.current_trick.iter().any(|&(s, _)| s == seat);
                let expect = self.deck.hand_size - done - usize::from(in_current);
                if self.hands[seat.index()].len() != expect {
                    return Err(format!("seat {seat} holds {} cards, expected {expect}", self.hands[seat.index()].len()));
                }
            }
        }
        if let Some(g) = self.declaration {
            // follow-suit audit over every completed trick
            let mut hands = self.dealt;
            if let Some(s) = self.soloist {
                if self.picked_up {
                    hands[s.index()] = self.soloist_twelve().unwrap().minus(self.skat);
                }
            }
            for trick in &self.tricks {
                let led = g.kind.class(trick.cards[0]);
                let mut seat = trick.leader;
                for &c in &trick.cards {
                    let h = hands[seat.index()];
                    let can_follow = !g.kind.class_mask(led, &self.deck).intersect(h).is_empty();
                    if can_follow && g.kind.class(c) != led {
                        return Err(format!("seat {seat} revoked with {c}"));
                    }
                    hands[seat.index()].remove(c);
                    seat = seat.next();
                }
            }
        }
        Ok(())
    }
}
