use std::sync::Arc;

use skatinfer::inference::InferenceVariant;
use skatinfer::player::PlayerConfig;
use skatinfer::policy::PolicyModel;
use skatinfer::selfplay::generate;
use skatinfer::tournament::{playable_deals, run_pairwise, Player, TournamentReport};
use skatinfer::Deck;

use crate::common::brute::mini_table;
use crate::Outcome;

const DEALS: usize = 1000;
const SELF_PLAY_DEALS: usize = 200;
const P_LIMIT: f64 = 0.05;
const SAMPLE_BUDGET: usize = 200;
const EVALUATION_BUDGET: usize = 30;

fn delta(r: &TournamentReport, name: &str) -> (f64, f64) {
    let d = r.deltas.iter().find(|d| d.name == name).expect("pairwise delta");
    (d.value, d.p_value)
}

/// PI under the generating policy against NI on MiniSkat deals, plus a
/// player against itself.
pub fn direction() -> Outcome {
    let table = mini_table();
    let policy: Arc<dyn PolicyModel<f64>> = Arc::new(table.clone());
    let deals: Vec<_> = playable_deals(&generate(table, Deck::mini(), DEALS * 2, 0x7e))
        .into_iter()
        .take(DEALS)
        .collect();
    let pi = Player::new(
        "PI",
        PlayerConfig::new(InferenceVariant::pi(SAMPLE_BUDGET, policy), EVALUATION_BUDGET),
    );
    let ni = Player::new("NI", PlayerConfig::new(InferenceVariant::ni(SAMPLE_BUDGET), EVALUATION_BUDGET));
    let r = run_pairwise(&pi, &ni, &deals, 0x7e).expect("tournament runs");
    let (tp, p) = delta(&r, "delta_tp");
    let (def, p_def) = delta(&r, "delta_def");
    let (sol, p_sol) = delta(&r, "delta_sol");

    let same = run_pairwise(&pi, &pi, &deals[..SELF_PLAY_DEALS], 0x7e).expect("tournament runs");
    let nonzero = same.deltas.iter().filter(|d| d.value != 0.0).count();
    Outcome::new(
        r.n_matches >= DEALS && tp > 0.0 && p < P_LIMIT && nonzero == 0,
        format!(
            "{} deals: delta_tp {tp:+.2} (p = {p:.1e}, limit {P_LIMIT}), delta_def {def:+.2} (p = {p_def:.2}), \
             delta_sol {sol:+.2} (p = {p_sol:.2}); PI vs PI on {} deals: {nonzero} non-zero deltas",
            r.n_matches, same.n_matches
        ),
    )
}
