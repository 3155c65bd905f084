//! Turns an observed action history into the decision points a policy is queried at.
//!
//! Needs only public information, so every viewer derives the same schedule.

use crate::cards::{Card, Deck, Seat};
use crate::rules::{bid_ladder, level_of, Action, Auction, AuctionOutcome, AuctionStage, GameType};
use crate::worlds::Observed;

use super::{Choice, DecisionKind, Observation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointObservation {
    Known(Observation),
    /// A declaration whose discard the viewer did not see; in a hypothesized
    /// world the discard is whatever that world puts in the skat.
    HiddenDiscard(GameType),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecisionPoint {
    pub kind: DecisionKind,
    pub actor: Seat,
    /// Number of history actions applied before the decision's context position.
    pub prefix: usize,
    pub obs: PointObservation,
}

impl DecisionPoint {
    /// Whether the observation carries no information (a factor of exactly one).
    pub fn is_vacuous(&self) -> bool {
        matches!(self.obs, PointObservation::Known(Observation::Levels { lo: 0, hi: None }))
    }
}

#[derive(Clone, Copy, Debug)]
struct Stage {
    start: usize,
    bidder_lo: u8,
    answerer_lo: u8,
}

fn stage_kinds(stage: AuctionStage) -> (DecisionKind, DecisionKind) {
    match stage {
        AuctionStage::First => (DecisionKind::MaxBidBidder, DecisionKind::MaxBidAnswerer),
        _ => (DecisionKind::MaxBidContinue, DecisionKind::MaxBidContinueAnswer),
    }
}

fn levels(kind: DecisionKind, actor: Seat, prefix: usize, lo: u8, hi: Option<u8>) -> DecisionPoint {
    DecisionPoint {
        kind,
        actor,
        prefix,
        obs: PointObservation::Known(Observation::Levels { lo, hi }),
    }
}

fn sorted_pair([a, b]: [Card; 2]) -> [Card; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Decision points revealed by `history`, ordered by prefix.
pub fn decision_points(history: &[(Seat, Observed)], deck: &Deck) -> Vec<DecisionPoint> {
    let ladder = bid_ladder(deck);
    let mut out = Vec::new();
    let mut auction = Auction::default();
    let mut stage = Stage {
        start: 0,
        bidder_lo: 0,
        answerer_lo: 0,
    };
    let mut bidding = true;
    // index in `out` of the second-stage winner's point, refined by the last call
    let mut last_call: Option<usize> = None;
    let mut i = 0;
    while i < history.len() {
        let (seat, obs) = history[i];
        let Observed::Seen(action) = obs else {
            // a hidden discard is always followed by the declaration
            if let Some(&(_, Observed::Seen(Action::Declare(game)))) = history.get(i + 1) {
                out.push(DecisionPoint {
                    kind: DecisionKind::DiscardAndDeclare,
                    actor: seat,
                    prefix: i,
                    obs: PointObservation::HiddenDiscard(game),
                });
            }
            i += 2;
            continue;
        };
        if bidding {
            let current = level_of(ladder, auction.bid);
            let before = auction;
            let (bidder_kind, answerer_kind) = stage_kinds(before.stage);
            let outcome = auction.apply(action, ladder).unwrap_or(AuctionOutcome::Continue);
            if before.stage == AuctionStage::Last {
                if let Some(j) = last_call {
                    if let PointObservation::Known(Observation::Levels { lo, hi }) = &mut out[j].obs {
                        if matches!(action, Action::Bid(_)) {
                            *lo = (*lo).max(1);
                        } else {
                            *hi = Some(hi.map_or(1, |h| h.min(1)));
                        }
                    }
                }
            } else {
                match (before.bidder_to_act, action) {
                    (true, Action::Bid(v)) => stage.bidder_lo = level_of(ladder, Some(v)),
                    (false, Action::Accept) => stage.answerer_lo = current,
                    (true, _) => {
                        out.push(levels(bidder_kind, before.bidder(), stage.start, stage.bidder_lo, Some(current + 1)));
                        out.push(levels(answerer_kind, before.answerer(), stage.start, stage.answerer_lo, None));
                        if before.stage != AuctionStage::First {
                            last_call = Some(out.len() - 1);
                        }
                    }
                    (false, _) => {
                        out.push(levels(bidder_kind, before.bidder(), stage.start, stage.bidder_lo, None));
                        out.push(levels(answerer_kind, before.answerer(), stage.start, stage.answerer_lo, Some(current)));
                    }
                }
                if auction.stage != before.stage {
                    stage = Stage {
                        start: i + 1,
                        bidder_lo: 0,
                        answerer_lo: 0,
                    };
                }
            }
            if outcome != AuctionOutcome::Continue {
                bidding = false;
            }
            i += 1;
            continue;
        }
        match action {
            Action::PickupSkat | Action::DeclareHand => out.push(DecisionPoint {
                kind: DecisionKind::PickupOrHand,
                actor: seat,
                prefix: i,
                obs: PointObservation::Known(Observation::Exact(if action == Action::PickupSkat {
                    Choice::Pickup
                } else {
                    Choice::Hand
                })),
            }),
            Action::Discard(pair) => {
                if let Some(&(_, Observed::Seen(Action::Declare(game)))) = history.get(i + 1) {
                    out.push(DecisionPoint {
                        kind: DecisionKind::DiscardAndDeclare,
                        actor: seat,
                        prefix: i,
                        obs: PointObservation::Known(Observation::Exact(Choice::Declare {
                            discard: Some(sorted_pair(pair)),
                            game,
                        })),
                    });
                    i += 1;
                }
            }
            Action::Declare(game) => out.push(DecisionPoint {
                kind: DecisionKind::DiscardAndDeclare,
                actor: seat,
                prefix: i,
                obs: PointObservation::Known(Observation::Exact(Choice::Declare { discard: None, game })),
            }),
            Action::PlayCard(c) => out.push(DecisionPoint {
                kind: DecisionKind::PlayCard,
                actor: seat,
                prefix: i,
                obs: PointObservation::Known(Observation::Exact(Choice::Play(c))),
            }),
            _ => {}
        }
        i += 1;
    }
    if bidding && auction.stage != AuctionStage::Last {
        // auction still running: both participants are known to be at least this high
        let (bk, ak) = stage_kinds(auction.stage);
        out.push(levels(bk, auction.bidder(), stage.start, stage.bidder_lo, None));
        out.push(levels(ak, auction.answerer(), stage.start, stage.answerer_lo, None));
    }
    out.sort_by_key(|p| p.prefix);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seen(h: &[(u8, Action)]) -> Vec<(Seat, Observed)> {
        h.iter().map(|&(s, a)| (Seat(s), Observed::Seen(a))).collect()
    }

    fn lv(p: &DecisionPoint) -> (u8, Option<u8>) {
        match p.obs {
            PointObservation::Known(Observation::Levels { lo, hi }) => (lo, hi),
            _ => panic!("not a level observation"),
        }
    }

    #[test]
    fn first_stage_intervals() {
        let deck = Deck::full();
        // middlehand bids 18, 20; forehand holds 18 then passes on 20; rearhand passes
        let h = seen(&[
            (1, Action::Bid(18)),
            (0, Action::Accept),
            (1, Action::Bid(20)),
            (0, Action::Pass),
            (2, Action::Pass),
        ]);
        let pts = decision_points(&h, &deck);
        assert_eq!(pts.len(), 4);
        assert_eq!((pts[0].kind, pts[0].actor), (DecisionKind::MaxBidBidder, Seat(1)));
        assert_eq!(lv(&pts[0]), (2, None));
        assert_eq!(lv(&pts[1]), (1, Some(2)));
        // second stage starts after four actions; rearhand passes at once over 20
        assert_eq!((pts[2].kind, pts[2].actor, pts[2].prefix), (DecisionKind::MaxBidContinue, Seat(2), 4));
        assert_eq!(lv(&pts[2]), (0, Some(3)));
        assert_eq!((pts[3].kind, pts[3].actor), (DecisionKind::MaxBidContinueAnswer, Seat(1)));
        assert!(pts[3].is_vacuous());
    }

    #[test]
    fn last_call_refines_forehand() {
        let deck = Deck::mini();
        let h = seen(&[(1, Action::Pass), (2, Action::Pass), (0, Action::Bid(18))]);
        let pts = decision_points(&h, &deck);
        assert_eq!(lv(&pts[0]), (0, Some(1)));
        assert!(pts[1].is_vacuous()); // forehand won the first stage without a bid
        assert_eq!(lv(&pts[2]), (0, Some(1)));
        assert_eq!((pts[3].actor, lv(&pts[3])), (Seat(0), (1, None)));
        let h = seen(&[(1, Action::Pass), (2, Action::Pass), (0, Action::Pass)]);
        let pts = decision_points(&h, &deck);
        assert_eq!((pts[3].actor, lv(&pts[3])), (Seat(0), (0, Some(1))));
    }

    #[test]
    fn hidden_discard_becomes_one_point() {
        let deck = Deck::mini();
        let g = GameType::plain(crate::rules::GameKind::Clubs);
        let mut h = seen(&[(1, Action::Bid(18)), (0, Action::Pass), (2, Action::Pass), (1, Action::PickupSkat)]);
        h.push((Seat(1), Observed::HiddenDiscard));
        h.push((Seat(1), Observed::Seen(Action::Declare(g))));
        let pts = decision_points(&h, &deck);
        let last = pts.last().unwrap();
        assert_eq!(last.kind, DecisionKind::DiscardAndDeclare);
        assert_eq!(last.prefix, 4);
        assert_eq!(last.obs, PointObservation::HiddenDiscard(g));
        assert_eq!(pts[pts.len() - 2].kind, DecisionKind::PickupOrHand);
    }
}
