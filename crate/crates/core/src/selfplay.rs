//! Games generated by letting a policy play all three seats.
//!
//! Bidding follows the max-bid abstraction exactly: at the start of each
//! auction stage both participants draw a level from the policy, then bid or
//! hold up to it. The last call reuses forehand's second-stage level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cards::{Deck, Seat};
use crate::gamelog::GameRecord;
use crate::policy::{pick_index, Choice, DecisionContext, DecisionKind, PolicyModel};
use crate::rules::{deal_deck, max_bid_action, Action, AuctionStage, GameState, Phase, RulesError};
use crate::seeds::derive_seed;

fn sample<M: PolicyModel<f64> + ?Sized>(
    model: &M,
    kind: DecisionKind,
    state: &GameState,
    actor: Seat,
    rng: &mut ChaCha8Rng,
) -> Choice {
    let ctx = DecisionContext { kind, state, actor };
    let legal = ctx.legal_choices();
    let dist = model.distribution(&ctx);
    legal[pick_index(&dist, rng.gen::<f64>())]
}

/// Plays `state` to the end with `policies[seat]` choosing for each seat.
///
/// Max-bid levels are drawn from the position where a stage is first seen, so
/// `state` should not be in the middle of an auction stage.
pub fn play_out(
    mut state: GameState,
    policies: [&dyn PolicyModel<f64>; 3],
    rng: &mut ChaCha8Rng,
) -> Result<GameState, RulesError> {
    let mut max_levels = [0u8; 3];
    let mut drawn_stage: Option<AuctionStage> = None;
    while !state.is_terminal() {
        match state.phase {
            Phase::Bidding => {
                let a = state.auction;
                if drawn_stage != Some(a.stage) && a.stage != AuctionStage::Last {
                    let (bk, ak) = match a.stage {
                        AuctionStage::First => (DecisionKind::MaxBidBidder, DecisionKind::MaxBidAnswerer),
                        _ => (DecisionKind::MaxBidContinue, DecisionKind::MaxBidContinueAnswer),
                    };
                    for (kind, seat) in [(bk, a.bidder()), (ak, a.answerer())] {
                        if let Choice::MaxBid(l) = sample(policies[seat.index()], kind, &state, seat, rng) {
                            max_levels[seat.index()] = l;
                        }
                    }
                    drawn_stage = Some(a.stage);
                }
                let act = max_bid_action(&a, max_levels[a.to_move().index()], state.ladder());
                state.apply_mut(act)?;
            }
            Phase::PickupOrHand => {
                let s = state.to_move;
                let c = sample(policies[s.index()], DecisionKind::PickupOrHand, &state, s, rng);
                state.apply_mut(if c == Choice::Hand { Action::DeclareHand } else { Action::PickupSkat })?;
            }
            Phase::Discard | Phase::Declare => {
                let s = state.to_move;
                if let Choice::Declare { discard, game } =
                    sample(policies[s.index()], DecisionKind::DiscardAndDeclare, &state, s, rng)
                {
                    if let Some(pair) = discard {
                        state.apply_mut(Action::Discard(pair))?;
                    }
                    state.apply_mut(Action::Declare(game))?;
                }
            }
            Phase::Cardplay => {
                let s = state.to_move;
                if let Choice::Play(c) = sample(policies[s.index()], DecisionKind::PlayCard, &state, s, rng) {
                    state.apply_mut(Action::PlayCard(c))?;
                }
            }
            Phase::Deal | Phase::Terminal => return Err(RulesError::WrongPhase(state.phase)),
        }
    }
    Ok(state)
}

/// One complete game from deal seed `seed`.
pub fn play_game(model: &dyn PolicyModel<f64>, deck: Deck, seed: u64) -> GameState {
    let state = deal_deck(deck, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 1]));
    play_out(state, [model; 3], &mut rng).expect("policies only pick legal choices")
}

/// `n` self-play records; game `i` is dealt from `derive_seed(&[seed, i])`.
pub fn generate<M: PolicyModel<f64>>(model: &M, deck: Deck, n: usize, seed: u64) -> Vec<GameRecord> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let g = play_game(model, deck, derive_seed(&[seed, i]));
            GameRecord::from_state(&g, Some(i)).expect("finished game converts to a record")
        })
        .collect()
}
