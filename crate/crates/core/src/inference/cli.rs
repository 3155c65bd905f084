//! Card-location inference: per-card location marginals multiplied as if independent.

use std::sync::Arc;

use crate::cards::{Card, Hand, Seat};
use crate::num::Real;
use crate::policy::PolicyModel;
use crate::worlds::{Configuration, InfoSet, WorldSpace, SKAT};

use super::{ReachWeight, WeightedWorlds};

/// `P(card at location)` for locations seat 0..2 and the skat.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginals<P: Real> {
    /// Cards the table covers.
    pub cards: Hand,
    /// Indexed by card index.
    pub probs: Vec<[P; 4]>,
}

impl<P: Real> Marginals<P> {
    pub fn empty() -> Self {
        Marginals {
            cards: Hand::EMPTY,
            probs: vec![[P::zero(); 4]; 32],
        }
    }

    pub fn get(&self, card: Card, location: usize) -> P {
        self.probs[card.index() as usize][location]
    }
}

/// Where CLI takes its marginals from.
#[derive(Clone)]
pub enum MarginalSource<P: Real> {
    /// Marginals of a policy-inference posterior over states (`budget` samples).
    Posterior { policy: Arc<dyn PolicyModel<P>>, budget: usize },
    /// Proportional to the free room in each allowed location, ignoring all play.
    HandSize,
    Fixed(Marginals<P>),
}

impl<P: Real> std::fmt::Debug for MarginalSource<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MarginalSource::Posterior { budget, .. } => write!(f, "Posterior {{ budget: {budget} }}"),
            MarginalSource::HandSize => f.write_str("HandSize"),
            MarginalSource::Fixed(_) => f.write_str("Fixed"),
        }
    }
}

/// `P(card at location) = Σ` weights of the worlds placing it there.
pub fn marginals_from_weights<P: Real>(w: &WeightedWorlds<P>) -> Marginals<P> {
    let mut m = Marginals::empty();
    for (world, weight) in &w.entries {
        let c = world.config();
        m.cards = m.cards.union(c.hands[0]).union(c.hands[1]).union(c.hands[2]).union(c.skat);
        for card in c.hands[0].union(c.hands[1]).union(c.hands[2]).union(c.skat).iter() {
            let loc = c.location(card).expect("card is held somewhere");
            m.probs[card.index() as usize][loc] += *weight;
        }
    }
    m
}

/// Hand-size proportional marginals over the locations each unseen card may occupy.
pub fn hand_size_marginals<P: Real>(space: &WorldSpace) -> Option<Marginals<P>> {
    let info = space.info();
    let unseen = info.unseen();
    let any = space.sample_configurations(1, 0).ok()?.pop()?;
    let room: [usize; 4] = [0, 1, 2, SKAT].map(|l| {
        let held = if l == SKAT { any.skat } else { any.hands[l] };
        held.intersect(unseen).len()
    });
    let mut m = Marginals::empty();
    m.cards = unseen;
    for card in unseen.iter() {
        let allowed = |l: usize| l == SKAT || info.may_hold(Seat(l as u8), card);
        let total: usize = (0..4).filter(|&l| allowed(l)).map(|l| room[l]).sum();
        for (l, &r) in room.iter().enumerate() {
            if allowed(l) && total > 0 {
                m.probs[card.index() as usize][l] = P::of(r as f64 / total as f64);
            }
        }
    }
    Some(m)
}

/// Product over covered cards of `P(card at its location in c)`.
pub fn cli_weight<P: Real>(c: &Configuration, marginals: &Marginals<P>) -> ReachWeight<P> {
    let mut w = ReachWeight::one();
    for card in marginals.cards.iter() {
        if let Some(loc) = c.location(card) {
            w = w.times(marginals.get(card, loc));
            if w.is_zero() {
                break;
            }
        }
    }
    w
}

/// Marginals for `info` from `source`.
pub(super) fn resolve_marginals<P: Real>(
    source: &MarginalSource<P>,
    info: &InfoSet,
    space: &WorldSpace,
    seed: u64,
) -> Result<Marginals<P>, super::InferenceError> {
    Ok(match source {
        MarginalSource::Fixed(m) => m.clone(),
        MarginalSource::HandSize => hand_size_marginals(space).ok_or(crate::worlds::WorldsError::Contradictory)?,
        MarginalSource::Posterior { policy, budget } => {
            let v = super::InferenceVariant::pif(*budget, policy.clone());
            marginals_from_weights(&super::estimate_dist(info, &v, seed)?)
        }
    })
}
