//! Opponent models π(h, a) and the bid abstraction they are queried through.
//!
//! Bidding is modelled as one "maximum willingness" choice per player and
//! auction stage: a level `l` (0 = pass at once, `i` = `ladder[i - 1]`) drawn
//! from the position at the start of the stage. A player then raises to the
//! next ladder value, or accepts, while that stays within `l`. What others
//! see of `l` is an interval of levels, and its probability is the mass the
//! model puts on that interval.
//!
//! Contract for implementors: a policy may only read what the acting player
//! can observe in `DecisionContext::state`: the actor's own cards, public
//! actions, played cards, the declaration and an ouvert hand. Reading other
//! hands, the skat or the dealt skat breaks inference.

mod features;
mod heuristic;
mod schedule;
mod table;

use thiserror::Error;

use crate::cards::{Card, Hand, Seat};
use crate::num::Real;
use crate::rules::{AuctionStage, GameState, GameType, Phase};

pub use features::{best_strength, game_strength, strength_bucket, trick_winning_cards};
pub use heuristic::{HeuristicParams, HeuristicPolicy};
pub use schedule::{decision_points, DecisionPoint, PointObservation};
pub use table::{turnbull, Bucketing, TableError, TableFitter, TablePolicy, TABLE_FORMAT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum DecisionKind {
    /// Middlehand's willingness in the first auction stage.
    MaxBidBidder,
    /// Forehand's willingness in the first auction stage.
    MaxBidAnswerer,
    /// Rearhand's willingness in the second stage.
    MaxBidContinue,
    /// The first-stage winner's willingness in the second stage (and, if nobody bid, at the last call).
    MaxBidContinueAnswer,
    PickupOrHand,
    DiscardAndDeclare,
    PlayCard,
}

impl DecisionKind {
    pub const ALL: [DecisionKind; 7] = [
        DecisionKind::MaxBidBidder,
        DecisionKind::MaxBidAnswerer,
        DecisionKind::MaxBidContinue,
        DecisionKind::MaxBidContinueAnswer,
        DecisionKind::PickupOrHand,
        DecisionKind::DiscardAndDeclare,
        DecisionKind::PlayCard,
    ];

    pub fn is_max_bid(self) -> bool {
        matches!(
            self,
            DecisionKind::MaxBidBidder
                | DecisionKind::MaxBidAnswerer
                | DecisionKind::MaxBidContinue
                | DecisionKind::MaxBidContinueAnswer
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Choice {
    MaxBid(u8),
    Pickup,
    Hand,
    /// Discard (pickup games only, sorted) and declaration as one decision.
    Declare { discard: Option<[Card; 2]>, game: GameType },
    Play(Card),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("decision kind {kind:?} does not match the state ({reason})")]
    KindMismatch { kind: DecisionKind, reason: &'static str },
    #[error("choice {0:?} is not legal here")]
    NotLegal(Choice),
    #[error("observation does not fit decision kind {0:?}")]
    BadObservation(DecisionKind),
}

#[derive(Clone, Copy, Debug)]
pub struct DecisionContext<'a> {
    pub kind: DecisionKind,
    /// The position the choice is made in; for max-bid kinds, the start of the stage.
    pub state: &'a GameState,
    pub actor: Seat,
}

impl<'a> DecisionContext<'a> {
    pub fn new(kind: DecisionKind, state: &'a GameState, actor: Seat) -> Result<Self, PolicyError> {
        let ctx = DecisionContext { kind, state, actor };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        let s = self.state;
        let fail = |reason| Err(PolicyError::KindMismatch { kind: self.kind, reason });
        let stage = s.auction.stage;
        match self.kind {
            k if k.is_max_bid() => {
                if s.phase != Phase::Bidding {
                    return fail("max-bid decisions happen during bidding");
                }
                let (want_stage, seat) = match (k, stage) {
                    (DecisionKind::MaxBidBidder, _) => (AuctionStage::First, Seat::MIDDLEHAND),
                    (DecisionKind::MaxBidAnswerer, _) => (AuctionStage::First, Seat::FOREHAND),
                    (DecisionKind::MaxBidContinue, AuctionStage::Second { answerer }) => {
                        (AuctionStage::Second { answerer }, Seat::REARHAND)
                    }
                    (DecisionKind::MaxBidContinueAnswer, AuctionStage::Second { answerer }) => {
                        (AuctionStage::Second { answerer }, answerer)
                    }
                    _ => return fail("second-stage decisions need a second-stage position"),
                };
                if stage != want_stage || self.actor != seat {
                    return fail("actor or auction stage does not match");
                }
            }
            DecisionKind::PickupOrHand => {
                if s.phase != Phase::PickupOrHand || s.soloist != Some(self.actor) {
                    return fail("pickup decisions belong to the soloist after the auction");
                }
            }
            DecisionKind::DiscardAndDeclare => {
                let ok = s.phase == Phase::Discard || (s.phase == Phase::Declare && !s.picked_up);
                if !ok || s.soloist != Some(self.actor) {
                    return fail("declaration belongs to the soloist");
                }
            }
            _ => {
                if s.phase != Phase::Cardplay || s.to_move != self.actor {
                    return fail("card choices need the actor to move in cardplay");
                }
            }
        }
        Ok(())
    }

    /// Number of max-bid levels above pass.
    pub fn ladder_len(&self) -> u8 {
        self.state.ladder().len() as u8
    }

    pub fn actor_hand(&self) -> Hand {
        self.state.hands[self.actor.index()]
    }

    /// Every legal choice, in the order `PolicyModel::distribution` reports them.
    pub fn legal_choices(&self) -> Vec<Choice> {
        match self.kind {
            k if k.is_max_bid() => (0..=self.ladder_len()).map(Choice::MaxBid).collect(),
            DecisionKind::PickupOrHand => vec![Choice::Pickup, Choice::Hand],
            DecisionKind::DiscardAndDeclare => {
                let deck = &self.state.deck;
                if self.state.phase == Phase::Discard {
                    let cards = self.actor_hand().cards();
                    let games = GameType::all_declarations(deck, false);
                    let mut out = Vec::with_capacity(cards.len() * cards.len() / 2 * games.len());
                    for i in 0..cards.len() {
                        for j in i + 1..cards.len() {
                            for &game in &games {
                                out.push(Choice::Declare {
                                    discard: Some([cards[i], cards[j]]),
                                    game,
                                });
                            }
                        }
                    }
                    out
                } else {
                    GameType::all_declarations(deck, true)
                        .into_iter()
                        .map(|game| Choice::Declare { discard: None, game })
                        .collect()
                }
            }
            _ => self.state.playable().iter().map(Choice::Play).collect(),
        }
    }

    pub fn is_legal(&self, choice: &Choice) -> bool {
        match (self.kind, choice) {
            (k, Choice::MaxBid(l)) if k.is_max_bid() => *l <= self.ladder_len(),
            (DecisionKind::PickupOrHand, Choice::Pickup | Choice::Hand) => true,
            (DecisionKind::DiscardAndDeclare, Choice::Declare { discard, game }) => {
                let hand_game = self.state.phase == Phase::Declare;
                let discard_ok = match discard {
                    None => hand_game,
                    Some([a, b]) => !hand_game && a < b && self.actor_hand().contains(*a) && self.actor_hand().contains(*b),
                };
                discard_ok && game.hand == hand_game && game.validate(&self.state.deck).is_ok()
            }
            (DecisionKind::PlayCard, Choice::Play(c)) => self.state.playable().contains(*c),
            _ => false,
        }
    }
}

/// What other players learn about one decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observation {
    Exact(Choice),
    /// A max-bid level somewhere in `[lo, hi)`; `hi = None` means unbounded.
    Levels { lo: u8, hi: Option<u8> },
}

/// An opponent model: a distribution over legal choices for any decision context.
pub trait PolicyModel<P: Real>: Send + Sync {
    /// Probabilities aligned with `ctx.legal_choices()`.
    fn distribution(&self, ctx: &DecisionContext<'_>) -> Vec<P>;

    fn probability(&self, ctx: &DecisionContext<'_>, choice: &Choice) -> P {
        let legal = ctx.legal_choices();
        match legal.iter().position(|c| c == choice) {
            Some(i) => self.distribution(ctx)[i],
            None => P::zero(),
        }
    }

    /// Mass on max-bid levels `lo..hi`.
    fn level_mass(&self, ctx: &DecisionContext<'_>, lo: u8, hi: Option<u8>) -> P {
        let dist = self.distribution(ctx);
        let hi = hi.map_or(dist.len(), |h| (h as usize).min(dist.len()));
        dist.get(lo as usize..hi).map_or(P::zero(), |s| s.iter().copied().sum())
    }
}

impl<P: Real, T: PolicyModel<P> + ?Sized> PolicyModel<P> for std::sync::Arc<T> {
    fn distribution(&self, ctx: &DecisionContext<'_>) -> Vec<P> {
        (**self).distribution(ctx)
    }
    fn probability(&self, ctx: &DecisionContext<'_>, choice: &Choice) -> P {
        (**self).probability(ctx, choice)
    }
    fn level_mass(&self, ctx: &DecisionContext<'_>, lo: u8, hi: Option<u8>) -> P {
        (**self).level_mass(ctx, lo, hi)
    }
}

/// Validated query: the distribution paired with the legal choices.
pub fn query<P: Real, M: PolicyModel<P> + ?Sized>(
    model: &M,
    ctx: &DecisionContext<'_>,
) -> Result<Vec<(Choice, P)>, PolicyError> {
    ctx.validate()?;
    Ok(ctx.legal_choices().into_iter().zip(model.distribution(ctx)).collect())
}

/// Probability that the decision at `ctx` produces observation `obs`.
pub fn observed_action_probability<P: Real, M: PolicyModel<P> + ?Sized>(
    model: &M,
    ctx: &DecisionContext<'_>,
    obs: &Observation,
) -> Result<P, PolicyError> {
    match obs {
        Observation::Exact(choice) => {
            if !ctx.is_legal(choice) {
                return Err(PolicyError::NotLegal(*choice));
            }
            Ok(model.probability(ctx, choice))
        }
        Observation::Levels { lo, hi } => {
            if !ctx.kind.is_max_bid() {
                return Err(PolicyError::BadObservation(ctx.kind));
            }
            if hi.is_some_and(|h| h <= *lo) {
                return Ok(P::zero());
            }
            Ok(model.level_mass(ctx, *lo, *hi))
        }
    }
}

/// Samples a choice index from a distribution with one uniform draw `u ∈ [0, 1)`.
pub fn pick_index<P: Real>(dist: &[P], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in dist.iter().enumerate() {
        acc += p.as_f64();
        if u < acc {
            return i;
        }
    }
    dist.iter().rposition(|p| p.as_f64() > 0.0).unwrap_or(0)
}

/// Every legal choice equally likely.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformPolicy;

impl<P: Real> PolicyModel<P> for UniformPolicy {
    fn distribution(&self, ctx: &DecisionContext<'_>) -> Vec<P> {
        let n = ctx.legal_choices().len();
        vec![P::one() / P::of(n as f64); n]
    }

    fn probability(&self, ctx: &DecisionContext<'_>, choice: &Choice) -> P {
        if !ctx.is_legal(choice) {
            return P::zero();
        }
        let n = match ctx.kind {
            k if k.is_max_bid() => ctx.ladder_len() as usize + 1,
            DecisionKind::PickupOrHand => 2,
            DecisionKind::PlayCard => ctx.state.playable().len(),
            _ => ctx.legal_choices().len(),
        };
        P::one() / P::of(n as f64)
    }

    fn level_mass(&self, ctx: &DecisionContext<'_>, lo: u8, hi: Option<u8>) -> P {
        let n = ctx.ladder_len() + 1;
        let hi = hi.map_or(n, |h| h.min(n));
        P::of(hi.saturating_sub(lo) as f64) / P::of(f64::from(n))
    }
}
