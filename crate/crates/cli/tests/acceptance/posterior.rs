use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use skatinfer::inference::{estimate_dist, InferenceVariant, World};
use skatinfer::policy::PolicyModel;
use skatinfer::rules::Phase;
use skatinfer::selfplay::generate;
use skatinfer::worlds::{State, WorldSpace};
use skatinfer::Deck;

use crate::common::brute::{mini_table, viewer_points, BruteForce};
use crate::Outcome;

const MIN_HISTORIES: usize = 200;
const TOLERANCE: f64 = 1e-9;

/// Full-enumeration PIF against the Bayes posterior computed by brute force
/// over every deal, under a smoothed table policy that plays every seat.
pub fn oracle_equivalence() -> Outcome {
    let table = mini_table();
    let policy: Arc<dyn PolicyModel<f64>> = Arc::new(table.clone());
    let logs = generate(table, Deck::mini(), 400, 0x9051);
    let mut cases = Vec::new();
    for (gi, rec) in logs.iter().enumerate() {
        let end = rec.replay().expect("self-play replays");
        for (pi, (info, truth)) in viewer_points(&end).into_iter().enumerate() {
            if (gi + pi) % 5 == 0 && WorldSpace::new(&info).count_states() <= 10_000 {
                cases.push((info, truth));
            }
        }
    }
    cases.truncate(240);
    let phases = |p: Phase| cases.iter().filter(|c| c.0.phase == p).count();
    let (bidding, cardplay) = (phases(Phase::Bidding), phases(Phase::Cardplay));
    let hidden = cases.iter().filter(|c| c.0.hidden_pickup()).count();
    let errors: Vec<f64> = cases
        .par_iter()
        .map(|(info, truth)| {
            let exact = BruteForce::new(info, table).posterior();
            let space = WorldSpace::new(info);
            let v = InferenceVariant::pif(space.count_states() as usize, policy.clone());
            let w = estimate_dist(info, &v, 3).expect("PIF enumerates");
            let est: HashMap<State, f64> = w
                .entries
                .iter()
                .map(|(world, p)| match world {
                    World::State(s) => (*s, *p),
                    World::Config(c) => (State { config: *c, dealt_skat: c.skat }, *p),
                })
                .collect();
            if !exact.contains_key(truth) {
                return f64::INFINITY;
            }
            let mut err: f64 = 0.0;
            for (s, p) in &exact {
                err = err.max((p - est.get(s).copied().unwrap_or(f64::INFINITY)).abs());
            }
            for (s, q) in &est {
                err = err.max((exact.get(s).copied().unwrap_or(0.0) - q).abs());
            }
            err
        })
        .collect();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    Outcome::new(
        cases.len() >= MIN_HISTORIES && worst < TOLERANCE,
        format!(
            "{} histories ({bidding} bidding, {cardplay} card play, {hidden} hidden pickup), max |error| {worst:.2e} (limit {TOLERANCE:e})",
            cases.len()
        ),
    )
}
