//! Reach weights: products of opponent-model probabilities along the observed history.

use crate::cards::{Card, Deck, Hand, Seat};
use crate::num::Real;
use crate::policy::{
    decision_points, observed_action_probability, Choice, DecisionContext, DecisionKind, DecisionPoint, Observation,
    PointObservation, PolicyModel,
};
use crate::rules::{Action, GameState};
use crate::worlds::{Configuration, InfoSet, Observed, State, WorldSpace, WorldsError};

use super::InferenceError;

/// A probability kept as its logarithm; `-inf` is a zero-probability world.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ReachWeight<P: Real> {
    pub log_weight: P,
}

impl<P: Real> ReachWeight<P> {
    pub fn one() -> Self {
        ReachWeight { log_weight: P::zero() }
    }

    pub fn zero() -> Self {
        ReachWeight {
            log_weight: P::neg_infinity(),
        }
    }

    pub fn from_probability(p: P) -> Self {
        ReachWeight { log_weight: p.ln() }
    }

    /// Multiplies in one more factor.
    pub fn times(self, p: P) -> Self {
        self.combine(Self::from_probability(p))
    }

    pub fn combine(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        ReachWeight {
            log_weight: self.log_weight + other.log_weight,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_weight == P::neg_infinity()
    }

    pub fn weight(&self) -> P {
        self.log_weight.exp()
    }
}

fn sorted_pair(h: Hand) -> Option<[Card; 2]> {
    match h.cards()[..] {
        [a, b] => Some([a, b]),
        _ => None,
    }
}

/// The opponent decision points of an information set, ready to be replayed in any world.
#[derive(Clone, Debug)]
pub struct HistoryModel {
    deck: Deck,
    history: Vec<(Seat, Observed)>,
    /// Points that do not depend on which cards the soloist found in the skat.
    shared: Vec<DecisionPoint>,
    /// The soloist's auction and pickup decisions after a pickup the viewer could not see.
    prepickup: Vec<DecisionPoint>,
}

impl HistoryModel {
    pub fn new(info: &InfoSet) -> HistoryModel {
        let hidden = info.hidden_pickup();
        let mut shared = Vec::new();
        let mut prepickup = Vec::new();
        for p in decision_points(&info.history, &info.deck) {
            if p.actor == info.viewer || p.is_vacuous() {
                continue;
            }
            let before_pickup = p.kind.is_max_bid() || p.kind == DecisionKind::PickupOrHand;
            if hidden && Some(p.actor) == info.soloist && before_pickup {
                prepickup.push(p);
            } else {
                shared.push(p);
            }
        }
        HistoryModel {
            deck: info.deck,
            history: info.history.clone(),
            shared,
            prepickup,
        }
    }

    pub fn shared_points(&self) -> &[DecisionPoint] {
        &self.shared
    }

    pub fn prepickup_points(&self) -> &[DecisionPoint] {
        &self.prepickup
    }

    /// Log product of observation probabilities of `points` (sorted by prefix),
    /// replaying the history from the deal `hands`/`dealt_skat`. A hidden
    /// discard is taken to be `discard`.
    pub fn log_weight<P: Real, M: PolicyModel<P> + ?Sized>(
        &self,
        policy: &M,
        hands: [Hand; 3],
        dealt_skat: Hand,
        discard: Hand,
        points: &[DecisionPoint],
    ) -> Result<ReachWeight<P>, InferenceError> {
        if points.is_empty() {
            return Ok(ReachWeight::one());
        }
        let mut state = GameState::from_deal(self.deck, hands, dealt_skat).map_err(|_| WorldsError::Inconsistent)?;
        let mut applied = 0;
        let mut w = ReachWeight::one();
        for p in points {
            while applied < p.prefix {
                self.apply(&mut state, applied, discard)?;
                applied += 1;
            }
            let obs = match p.obs {
                PointObservation::Known(o) => o,
                PointObservation::HiddenDiscard(game) => Observation::Exact(Choice::Declare {
                    discard: Some(sorted_pair(discard).ok_or(WorldsError::Inconsistent)?),
                    game,
                }),
            };
            let ctx = DecisionContext::new(p.kind, &state, p.actor)?;
            w = w.times(observed_action_probability(policy, &ctx, &obs)?);
            if w.is_zero() {
                return Ok(w);
            }
        }
        Ok(w)
    }

    fn apply(&self, state: &mut GameState, i: usize, discard: Hand) -> Result<(), InferenceError> {
        let action = match self.history[i].1 {
            Observed::Seen(a) => a,
            Observed::HiddenDiscard => Action::Discard(sorted_pair(discard).ok_or(WorldsError::Inconsistent)?),
        };
        state.apply_mut(action).map_err(|_| WorldsError::Inconsistent)?;
        Ok(())
    }

    /// Weight of the shared points for a configuration, replayed from the
    /// representative deal that puts the final skat back as the dealt skat
    /// (any member state before the discard).
    pub fn shared_weight<P: Real, M: PolicyModel<P> + ?Sized>(
        &self,
        space: &WorldSpace,
        policy: &M,
        c: &Configuration,
    ) -> Result<ReachWeight<P>, InferenceError> {
        let rep = if space.info().hidden_pickup() && c.skat.len() == self.deck.skat_size {
            State {
                config: *c,
                dealt_skat: c.skat,
            }
        } else {
            space.states_for_configuration(c)[0]
        };
        let (hands, dealt_skat) = space.dealt(&rep);
        self.log_weight(policy, hands, dealt_skat, c.skat, &self.shared)
    }

    /// Weight of the soloist's pre-pickup points in a particular state.
    pub fn prepickup_weight<P: Real, M: PolicyModel<P> + ?Sized>(
        &self,
        space: &WorldSpace,
        policy: &M,
        s: &State,
    ) -> Result<ReachWeight<P>, InferenceError> {
        let (hands, dealt_skat) = space.dealt(s);
        self.log_weight(policy, hands, dealt_skat, s.config.skat, &self.prepickup)
    }

    /// Every opponent point evaluated in the state itself.
    pub fn full_weight<P: Real, M: PolicyModel<P> + ?Sized>(
        &self,
        space: &WorldSpace,
        policy: &M,
        s: &State,
    ) -> Result<ReachWeight<P>, InferenceError> {
        let (hands, dealt_skat) = space.dealt(s);
        let mut all: Vec<DecisionPoint> = self.shared.iter().chain(&self.prepickup).copied().collect();
        all.sort_by_key(|p| p.prefix);
        self.log_weight(policy, hands, dealt_skat, s.config.skat, &all)
    }
}

/// η(world | I): the product over other players' decision points, evaluated in the
/// perfect-information game the world implies. The viewer's own choices count as 1.
pub fn reach_weight<P: Real, M: PolicyModel<P> + ?Sized>(
    world: &State,
    info: &InfoSet,
    policy: &M,
) -> Result<ReachWeight<P>, InferenceError> {
    let space = WorldSpace::new(info);
    if !space.consistent_state(world) {
        return Err(WorldsError::Inconsistent.into());
    }
    HistoryModel::new(info).full_weight(&space, policy, world)
}
