use serde::{Deserialize, Serialize};

use crate::cards::{Card, Deck, Hand, Seat};
use crate::rules::{Action, GameState, GameType, Phase, Trick};

/// An action as another player sees it. Only the soloist's discard is ever hidden.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observed {
    Seen(Action),
    HiddenDiscard,
}

/// One player's view of a game in progress.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoSet {
    pub deck: Deck,
    pub viewer: Seat,
    pub phase: Phase,
    pub to_move: Seat,
    pub own_dealt: Hand,
    pub own_hand: Hand,
    pub history: Vec<(Seat, Observed)>,
    pub soloist: Option<Seat>,
    pub declaration: Option<GameType>,
    pub bid: Option<u16>,
    pub picked_up: bool,
    pub played: [Hand; 3],
    pub tricks: Vec<Trick>,
    pub current_trick: Vec<(Seat, Card)>,
    /// Cards shown by an ouvert declaration (the soloist's hand at that moment).
    pub exposed: Hand,
    /// Current skat contents when the viewer knows them.
    pub known_skat: Option<Hand>,
    /// The skat as dealt, when the viewer knows it.
    pub known_dealt_skat: Option<Hand>,
    pub hand_counts: [usize; 3],
    pub skat_count: usize,
    /// `voids[seat][class]`: the seat failed to follow a lead of that suit class.
    pub voids: [[bool; 5]; 3],
}

impl InfoSet {
    pub fn observe(state: &GameState, viewer: Seat) -> InfoSet {
        let v = viewer.index();
        let is_soloist = state.soloist == Some(viewer);
        let history = state
            .history
            .iter()
            .map(|&(s, a)| match a {
                Action::Discard(_) if s != viewer => (s, Observed::HiddenDiscard),
                _ => (s, Observed::Seen(a)),
            })
            .collect();
        let exposed = match (state.declaration, state.soloist) {
            // laid open at declaration: everything the soloist has held since
            (Some(g), Some(s)) if g.ouvert => state.hands[s.index()].union(state.played[s.index()]),
            _ => Hand::EMPTY,
        };
        let known_skat = (is_soloist && state.picked_up).then_some(state.skat);
        let known_dealt_skat = (is_soloist && state.picked_up).then_some(state.dealt_skat);
        let mut info = InfoSet {
            deck: state.deck,
            viewer,
            phase: state.phase,
            to_move: state.to_move,
            own_dealt: state.dealt[v],
            own_hand: state.hands[v],
            history,
            soloist: state.soloist,
            declaration: state.declaration,
            bid: state.bid,
            picked_up: state.picked_up,
            played: state.played,
            tricks: state.tricks.clone(),
            current_trick: state.current_trick.to_vec(),
            exposed,
            known_skat,
            known_dealt_skat,
            hand_counts: state.hands.map(|h| h.len()),
            skat_count: state.skat.len(),
            voids: [[false; 5]; 3],
        };
        info.voids = info.infer_voids();
        info
    }

    /// Void flags implied by the trick record.
    pub fn infer_voids(&self) -> [[bool; 5]; 3] {
        let mut voids = [[false; 5]; 3];
        let Some(g) = self.declaration else {
            return voids;
        };
        let mut mark = |leader: Seat, cards: &[Card]| {
            let Some(&lead) = cards.first() else { return };
            let led = g.kind.class(lead);
            let mut seat = leader;
            for &c in cards {
                if g.kind.class(c) != led {
                    voids[seat.index()][led as usize] = true;
                }
                seat = seat.next();
            }
        };
        for t in &self.tricks {
            mark(t.leader, &t.cards);
        }
        if let Some(&(leader, _)) = self.current_trick.first() {
            let cards: Vec<Card> = self.current_trick.iter().map(|&(_, c)| c).collect();
            mark(leader, &cards);
        }
        voids
    }

    pub fn all_played(&self) -> Hand {
        self.played[0].union(self.played[1]).union(self.played[2])
    }

    pub fn cards_played(&self) -> usize {
        self.all_played().len()
    }

    /// Exposed ouvert cards still in the soloist's hand.
    pub fn exposed_in_hand(&self) -> Hand {
        match self.soloist {
            Some(s) => self.exposed.minus(self.played[s.index()]),
            None => Hand::EMPTY,
        }
    }

    /// The cards the viewer cannot place with certainty.
    pub fn unseen(&self) -> Hand {
        let mut known = self.own_hand.union(self.all_played()).union(self.exposed_in_hand());
        if let Some(k) = self.known_skat {
            known = known.union(k);
        }
        self.deck.cards.minus(known)
    }

    /// Whether the viewer saw a pickup it cannot see into.
    pub fn hidden_pickup(&self) -> bool {
        self.picked_up && self.known_dealt_skat.is_none()
    }

    /// Number of states per configuration: C(hand + skat, skat) after a hidden pickup, else 1.
    pub fn state_multiplicity(&self) -> u64 {
        if self.hidden_pickup() {
            let n = (self.deck.hand_size + self.deck.skat_size) as u64;
            crate::combinatorics::binomial(n, self.deck.skat_size as u64)
        } else {
            1
        }
    }

    /// Whether the card may lie with `seat` given the void flags.
    pub fn may_hold(&self, seat: Seat, card: Card) -> bool {
        match self.declaration {
            Some(g) => !self.voids[seat.index()][g.kind.class(card) as usize],
            None => true,
        }
    }
}
