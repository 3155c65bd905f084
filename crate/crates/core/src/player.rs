//! Determinized card play: weight sampled worlds, solve each one open-handed,
//! play the card with the best weighted value.

use rayon::prelude::*;
use thiserror::Error;

use crate::cards::{Card, Seat};
use crate::ddsolver::{OpenState, Solver};
use crate::inference::{estimate_dist, InferenceError, InferenceVariant};
use crate::num::Real;
use crate::rules::Phase;
use crate::seeds::derive_seed;
use crate::worlds::{Configuration, InfoSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlayerError {
    #[error("the viewer is not to move in card play")]
    NotToMove,
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

#[derive(Clone, Debug)]
pub struct PlayerConfig<P: Real> {
    pub inference: InferenceVariant<P>,
    /// Worlds actually solved; the highest-weight ones are kept.
    pub evaluation_budget: usize,
}

impl<P: Real> PlayerConfig<P> {
    pub fn new(inference: InferenceVariant<P>, evaluation_budget: usize) -> Self {
        PlayerConfig {
            inference,
            evaluation_budget,
        }
    }

    /// Seed for one decision: deal seed, viewer and cards already played.
    pub fn decision_seed(deal_seed: u64, info: &InfoSet) -> u64 {
        derive_seed(&[deal_seed, u64::from(info.viewer.0), info.cards_played() as u64])
    }
}

/// Weighted values of the legal cards, from the viewer's side.
#[derive(Clone, Debug, PartialEq)]
pub struct MoveValues<P: Real> {
    /// Ascending by card.
    pub values: Vec<(Card, P)>,
    pub worlds_solved: usize,
}

impl<P: Real> MoveValues<P> {
    /// Highest value; ties go to the lowest card.
    pub fn best(&self) -> Card {
        let mut best = self.values[0];
        for &(c, v) in &self.values[1..] {
            if v > best.1 {
                best = (c, v);
            }
        }
        best.0
    }
}

/// The open position `info` implies in world `c`.
pub fn open_state(info: &InfoSet, c: &Configuration) -> Option<OpenState> {
    let game = info.declaration?;
    let soloist = info.soloist?;
    let mut points = [c.skat.points(), 0];
    let mut soloist_took_trick = false;
    for t in &info.tricks {
        let party = usize::from(t.winner != soloist);
        points[party] += t.cards.iter().map(|c| c.points()).sum::<u16>();
        soloist_took_trick |= party == 0;
    }
    Some(OpenState {
        deck: info.deck,
        hands: c.hands,
        current_trick: info.current_trick.iter().copied().collect(),
        to_move: info.to_move,
        game,
        soloist,
        points,
        soloist_took_trick,
    })
}

/// Turns a solver value into the viewer's side: points or a win indicator.
fn viewer_value(open: &OpenState, viewer: Seat, v: u16) -> u16 {
    if viewer == open.soloist {
        v
    } else if open.is_null() {
        1 - v
    } else {
        open.deck.total_points() - v
    }
}

/// Keeps the positive-weight worlds, at most `budget` of them by descending
/// weight (earlier entries first on ties), renormalized.
pub fn retain_worlds<P: Real>(worlds: Vec<(Configuration, P)>, budget: usize) -> Vec<(Configuration, P)> {
    let mut kept: Vec<(usize, Configuration, P)> = worlds
        .into_iter()
        .enumerate()
        .filter(|(_, (_, w))| *w > P::zero())
        .map(|(i, (c, w))| (i, c, w))
        .collect();
    kept.sort_by(|a, b| b.2.partial_cmp(&a.2).expect("weights are not NaN").then(a.0.cmp(&b.0)));
    kept.truncate(budget.max(1));
    kept.sort_by_key(|k| k.0);
    let total: P = kept.iter().map(|k| k.2).sum();
    kept.into_iter().map(|(_, c, w)| (c, w / total)).collect()
}

/// Weighted double-dummy values of every legal card.
pub fn move_values<P: Real>(info: &InfoSet, cfg: &PlayerConfig<P>, seed: u64) -> Result<MoveValues<P>, PlayerError> {
    if info.phase != Phase::Cardplay || info.to_move != info.viewer {
        return Err(PlayerError::NotToMove);
    }
    let dist = estimate_dist(info, &cfg.inference, seed)?;
    let worlds = retain_worlds(dist.configurations(), cfg.evaluation_budget);
    let per_world: Vec<Vec<(Card, u16)>> = worlds
        .par_iter()
        .map(|(c, _)| {
            let open = open_state(info, c).expect("card play has a declaration");
            Solver::default()
                .action_values(&open)
                .into_iter()
                .map(|(card, v)| (card, viewer_value(&open, info.viewer, v)))
                .collect()
        })
        .collect();
    let cards: Vec<Card> = per_world[0].iter().map(|e| e.0).collect();
    let mut totals = vec![P::zero(); cards.len()];
    for ((_, w), values) in worlds.iter().zip(&per_world) {
        debug_assert!(values.iter().map(|e| e.0).eq(cards.iter().copied()));
        for (t, (_, v)) in totals.iter_mut().zip(values) {
            *t += *w * P::of(f64::from(*v));
        }
    }
    Ok(MoveValues {
        values: cards.into_iter().zip(totals).collect(),
        worlds_solved: worlds.len(),
    })
}

/// The card the determinized player chooses.
pub fn choose_move<P: Real>(info: &InfoSet, cfg: &PlayerConfig<P>, seed: u64) -> Result<Card, PlayerError> {
    Ok(move_values(info, cfg, seed)?.best())
}
