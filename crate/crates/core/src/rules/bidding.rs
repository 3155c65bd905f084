//! The bid ladder and the three-stage auction.
//!
//! Stage 1: middlehand bids to forehand. Stage 2: rearhand bids to the
//! stage-1 winner. Stage 3 only happens when nobody has bid at all:
//! forehand may still play at the lowest bid or pass the game in.

use std::sync::OnceLock;

use crate::cards::{Deck, DeckKind, Seat};

use super::{Action, RulesError};

/// Number of ladder values MiniSkat uses (18 through 33).
pub const MINI_LADDER_LEN: usize = 8;

fn full_ladder() -> &'static [u16] {
    static LADDER: OnceLock<Vec<u16>> = OnceLock::new();
    LADDER.get_or_init(|| {
        let mut v: Vec<u16> = Vec::new();
        for base in [9u16, 10, 11, 12] {
            v.extend((2..=18).map(|m| base * m));
        }
        v.extend((2..=11).map(|m| 24 * m));
        v.extend([23, 35, 46, 59]);
        v.retain(|&x| x >= 18);
        v.sort_unstable();
        v.dedup();
        v
    })
}

/// Legal bid values in ascending order.
pub fn bid_ladder(deck: &Deck) -> &'static [u16] {
    match deck.kind {
        DeckKind::Full => full_ladder(),
        DeckKind::Mini => &full_ladder()[..MINI_LADDER_LEN],
    }
}

/// Ordinal of a bid value: 0 is "no bid", `i` is `ladder[i - 1]`.
pub fn level_of(ladder: &[u16], value: Option<u16>) -> u8 {
    match value {
        None => 0,
        Some(v) => ladder.iter().position(|&x| x == v).map_or(0, |i| i as u8 + 1),
    }
}

pub fn value_of(ladder: &[u16], level: u8) -> Option<u16> {
    (level > 0).then(|| ladder[level as usize - 1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AuctionStage {
    /// Middlehand bids to forehand.
    First,
    /// Rearhand bids to the winner of the first stage.
    Second { answerer: Seat },
    /// Nobody bid; forehand may open at the lowest value.
    Last,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AuctionOutcome {
    Continue,
    Won { soloist: Seat, bid: u16 },
    PassedIn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Auction {
    pub stage: AuctionStage,
    /// Highest value said so far.
    pub bid: Option<u16>,
    /// True when the bidder of the current stage is to act.
    pub bidder_to_act: bool,
}

impl Default for Auction {
    fn default() -> Self {
        Auction {
            stage: AuctionStage::First,
            bid: None,
            bidder_to_act: true,
        }
    }
}

impl Auction {
    pub fn bidder(&self) -> Seat {
        match self.stage {
            AuctionStage::First => Seat::MIDDLEHAND,
            AuctionStage::Second { .. } => Seat::REARHAND,
            AuctionStage::Last => Seat::FOREHAND,
        }
    }

    pub fn answerer(&self) -> Seat {
        match self.stage {
            AuctionStage::First => Seat::FOREHAND,
            AuctionStage::Second { answerer } => answerer,
            AuctionStage::Last => Seat::FOREHAND,
        }
    }

    pub fn to_move(&self) -> Seat {
        if self.bidder_to_act {
            self.bidder()
        } else {
            self.answerer()
        }
    }

    pub fn legal(&self, ladder: &[u16]) -> Vec<Action> {
        if !self.bidder_to_act {
            return vec![Action::Accept, Action::Pass];
        }
        if self.stage == AuctionStage::Last {
            return vec![Action::Bid(ladder[0]), Action::Pass];
        }
        let mut out: Vec<Action> = ladder
            .iter()
            .filter(|&&v| self.bid.is_none_or(|b| v > b))
            .map(|&v| Action::Bid(v))
            .collect();
        out.push(Action::Pass);
        out
    }

    pub fn apply(&mut self, action: Action, ladder: &[u16]) -> Result<AuctionOutcome, RulesError> {
        if !self.legal(ladder).contains(&action) {
            return Err(RulesError::IllegalAction {
                action,
                rule: "bids must be raised along the ladder; answers are accept or pass",
            });
        }
        match (self.stage, action) {
            (AuctionStage::Last, Action::Bid(v)) => {
                return Ok(AuctionOutcome::Won {
                    soloist: Seat::FOREHAND,
                    bid: v,
                })
            }
            (AuctionStage::Last, _) => return Ok(AuctionOutcome::PassedIn),
            _ => {}
        }
        if self.bidder_to_act {
            match action {
                Action::Bid(v) => {
                    self.bid = Some(v);
                    self.bidder_to_act = false;
                    Ok(AuctionOutcome::Continue)
                }
                _ => Ok(self.close_stage(self.answerer())),
            }
        } else {
            match action {
                Action::Accept => {
                    self.bidder_to_act = true;
                    Ok(AuctionOutcome::Continue)
                }
                _ => Ok(self.close_stage(self.bidder())),
            }
        }
    }

    fn close_stage(&mut self, winner: Seat) -> AuctionOutcome {
        match self.stage {
            AuctionStage::First => {
                self.stage = AuctionStage::Second { answerer: winner };
                self.bidder_to_act = true;
                AuctionOutcome::Continue
            }
            AuctionStage::Second { .. } => match self.bid {
                Some(bid) => AuctionOutcome::Won { soloist: winner, bid },
                None => {
                    self.stage = AuctionStage::Last;
                    self.bidder_to_act = true;
                    AuctionOutcome::Continue
                }
            },
            AuctionStage::Last => unreachable!("last stage resolves in apply"),
        }
    }
}

/// Atomic action of a player who bids or holds up to `max_level` and no further.
///
/// Bidders always raise to the next ladder value; this is the behaviour
/// the max-bid abstraction of the opponent model assumes.
pub fn max_bid_action(auction: &Auction, max_level: u8, ladder: &[u16]) -> Action {
    let current = level_of(ladder, auction.bid);
    if auction.bidder_to_act {
        if auction.stage == AuctionStage::Last {
            return if max_level >= 1 { Action::Bid(ladder[0]) } else { Action::Pass };
        }
        let next = current + 1;
        if (next as usize) <= ladder.len() && next <= max_level {
            Action::Bid(ladder[next as usize - 1])
        } else {
            Action::Pass
        }
    } else if current <= max_level {
        Action::Accept
    } else {
        Action::Pass
    }
}
