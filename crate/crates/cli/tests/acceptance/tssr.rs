use std::sync::Arc;

use rayon::prelude::*;
use skatinfer::inference::{InferenceVariant, KiTables, MarginalSource};
use skatinfer::metrics::{
    config_log_weights, instrument_game, tssr_curve, tssr_enumerated, tssr_from_log_weights, tssr_sampled, BinomialSpec,
    Injection, TssrSample,
};
use skatinfer::policy::{HeuristicPolicy, PolicyModel};
use skatinfer::rules::{GameState, Phase};
use skatinfer::selfplay::{generate, play_game};
use skatinfer::seeds::derive_seed;
use skatinfer::tournament::paired_ttest;
use skatinfer::worlds::{Configuration, InfoSet, State, WorldSpace};
use skatinfer::{Deck, DeckKind};

use crate::common::brute::{mini_table, viewer_points};
use crate::Outcome;

fn cardplay_points(end: &GameState) -> Vec<(InfoSet, State)> {
    viewer_points(end)
        .into_iter()
        .filter(|(i, _)| i.phase == Phase::Cardplay)
        .collect()
}

fn table_policy() -> Arc<dyn PolicyModel<f64>> {
    Arc::new(mini_table().clone())
}

// ---- criterion 4 ----------------------------------------------------------

const FIXED_GAMES: usize = 150;
const FULL_DECK_GAMES: u64 = 12;
const NI_TOLERANCE: f64 = 1e-6;
const END_TOLERANCE: f64 = 1e-9;

/// NI is 1 and Cheat is |I| wherever the set can be enumerated, and every
/// variant's curve ends at 1.
pub fn fixed_points() -> Outcome {
    let table = mini_table();
    let policy = table_policy();
    let mini = generate(table, Deck::mini(), FIXED_GAMES, 0xf1);
    let ends: Vec<GameState> = mini.iter().map(|r| r.replay().expect("self-play replays")).collect();

    // every history of the small deck, bidding included
    let mut points: Vec<(InfoSet, State)> = ends.iter().flat_map(viewer_points).collect();
    // late full-deck positions, where enumeration is still cheap
    let heuristic = HeuristicPolicy::default();
    for seed in 0..FULL_DECK_GAMES {
        let end = play_game(&heuristic, Deck::full(), derive_seed(&[0xf1, seed]));
        points.extend(
            cardplay_points(&end)
                .into_iter()
                .filter(|(i, _)| WorldSpace::new(i).count_configurations() <= 20_000),
        );
    }
    let (ni_worst, cheat_misses) = points
        .par_iter()
        .map(|(info, truth)| {
            let count = WorldSpace::new(info).count_configurations() as f64;
            let ni = tssr_enumerated(info, &InferenceVariant::<f64>::ni(1), &truth.config, 0).expect("NI enumerates");
            let cheat =
                tssr_enumerated(info, &InferenceVariant::<f64>::cheat(1, *truth), &truth.config, 0).expect("Cheat enumerates");
            ((ni - 1.0).abs(), usize::from(cheat != count))
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));

    // curves of all six variants; the last decision of a game has one world
    let ki = Arc::new(KiTables::fit(&generate(table, Deck::mini(), 2000, 0xf2), DeckKind::Mini, 8, 1.0));
    let variants = |budget: usize, policy: &Arc<dyn PolicyModel<f64>>| {
        vec![
            InferenceVariant::ni(budget),
            InferenceVariant::pi(budget, policy.clone()),
            InferenceVariant::pif(budget, policy.clone()),
            InferenceVariant::cli(
                budget,
                MarginalSource::Posterior {
                    policy: policy.clone(),
                    budget,
                },
            ),
            InferenceVariant::ki(budget, ki.clone()),
            InferenceVariant::cheat(budget, State::default()),
        ]
    };
    let mini_variants = variants(100_000, &policy);
    let mini_samples: Vec<TssrSample> = ends
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, end)| instrument_game(end, i as u64, &mini_variants, Injection::Binomial, 1).expect("instrumented"))
        .collect();
    let heuristic: Arc<dyn PolicyModel<f64>> = Arc::new(heuristic);
    let mut full_variants = variants(60, &heuristic);
    // KI tables are per deck
    let full_ki = KiTables::fit(&generate(&HeuristicPolicy::default(), Deck::full(), 300, 0xf3), DeckKind::Full, 8, 1.0);
    full_variants[4] = InferenceVariant::ki(60, Arc::new(full_ki));
    let full_samples: Vec<TssrSample> = (0..4u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let end = play_game(&HeuristicPolicy::default(), Deck::full(), derive_seed(&[0xf4, seed]));
            instrument_game(&end, seed, &full_variants, Injection::Binomial, 1).expect("instrumented")
        })
        .collect();
    let (mut endings, mut end_worst) = (0, 0.0f64);
    let mut complete_decks = 0;
    for (samples, deck) in [(&mini_samples, Deck::mini()), (&full_samples, Deck::full())] {
        let mut labels = std::collections::BTreeSet::new();
        // games cut short (a lost null game) never reach the final card
        let final_card = (deck.len() - 3) as u8;
        for p in tssr_curve(samples).iter().filter(|p| p.card_number == final_card) {
            endings += 1;
            end_worst = end_worst.max((p.mean_tssr - 1.0).abs());
            labels.insert(p.variant.clone());
        }
        complete_decks += usize::from(labels.len() == 6);
    }
    Outcome::new(
        ni_worst <= NI_TOLERANCE && cheat_misses == 0 && complete_decks == 2 && end_worst <= END_TOLERANCE,
        format!(
            "{} histories: max |NI - 1| {ni_worst:.1e} (limit {NI_TOLERANCE:e}), Cheat != |I| at {cheat_misses}; \
             {endings} curve endings ({complete_decks}/2 decks with all six variants), max |TSSR - 1| {end_worst:.1e} (limit {END_TOLERANCE:e})",
            points.len()
        ),
    )
}

// ---- criterion 5 ----------------------------------------------------------

const CONSISTENCY_GAMES: usize = 60;
const SEEDS: u64 = 1000;
const MAX_RELATIVE_ERROR: f64 = 0.05;

/// The injection estimate averaged over seeds against the direct value, on
/// every third card-play decision of PIF under the generating policy. The
/// sample size is |I| - 1, the largest at which the estimator is used.
pub fn estimator_consistency() -> Outcome {
    let table = mini_table();
    let policy = table_policy();
    let logs = generate(table, Deck::mini(), CONSISTENCY_GAMES, 0xc5);
    let mut cases = Vec::new();
    for rec in &logs {
        let end = rec.replay().expect("self-play replays");
        for (info, truth) in cardplay_points(&end).into_iter().step_by(3) {
            if WorldSpace::new(&info).count_configurations() >= 3 {
                cases.push((info, truth));
            }
        }
    }
    let v = InferenceVariant::pif(1, policy);
    let results: Vec<(f64, f64, u64, bool)> = cases
        .par_iter()
        .enumerate()
        .map(|(ci, (info, truth))| {
            let space = WorldSpace::new(info);
            let configs: Vec<Configuration> = space.configurations().collect();
            let count = configs.len() as u64;
            let lw = config_log_weights(info, &v, &configs, 0).expect("PIF weighs");
            let rank = space.rank(&truth.config).expect("truth is consistent");
            let direct = tssr_enumerated(info, &v, &truth.config, 0).expect("PIF enumerates");
            let spec = BinomialSpec::new(count as usize - 1, count);
            let seed = |s: u64| derive_seed(&[0xc5, ci as u64, s]);
            let mean = (0..SEEDS)
                .map(|s| tssr_from_log_weights(&spec, rank, &lw, seed(s)).expect("estimate"))
                .sum::<f64>()
                / SEEDS as f64;
            // the precomputed route must be the sampled estimator itself
            let same = (0..3).all(|s| {
                let a = tssr_sampled(info, &v, &truth.config, &spec, seed(s)).expect("sampled");
                let b = tssr_from_log_weights(&spec, rank, &lw, seed(s)).expect("estimate");
                (a - b).abs() <= 1e-12 * a.abs().max(1.0)
            });
            ((mean - direct) / direct, direct, count, same)
        })
        .collect();
    let fails = results.iter().filter(|r| r.0.abs() > MAX_RELATIVE_ERROR).count();
    let routes_differ = results.iter().filter(|r| !r.3).count();
    let worst = results.iter().max_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    let mean_abs = results.iter().map(|r| r.0.abs()).sum::<f64>() / results.len().max(1) as f64;
    let large = results.iter().filter(|r| r.2 >= 30);
    let (large_n, large_fail) = large.fold((0, 0), |(n, f), r| (n + 1, f + usize::from(r.0.abs() > MAX_RELATIVE_ERROR)));
    Outcome::new(
        !results.is_empty() && fails == 0 && routes_differ == 0,
        format!(
            "{} information sets x {SEEDS} seeds: {fails} beyond {:.0}% relative error, mean |error| {:.2}%, \
             worst {:+.1}% at |I| = {}; |I| >= 30: {large_fail}/{large_n} beyond; sampled vs precomputed mismatches {routes_differ}",
            results.len(),
            MAX_RELATIVE_ERROR * 100.0,
            mean_abs * 100.0,
            worst.map_or(0.0, |w| w.0 * 100.0),
            worst.map_or(0, |w| w.2),
        ),
    )
}

// ---- criterion 7 ----------------------------------------------------------

const ORDERING_GAMES: usize = 500;
const ORDERING_P: f64 = 0.01;

/// Per-game mean direct TSSR of PIF under the generating policy, CLI with
/// marginals of that same posterior, and NI.
pub fn ordering() -> Outcome {
    let table = mini_table();
    let policy = table_policy();
    let logs = generate(table, Deck::mini(), ORDERING_GAMES * 2, 0x07);
    let ends: Vec<GameState> = logs
        .iter()
        .filter(|r| r.declaration.is_some())
        .take(ORDERING_GAMES)
        .map(|r| r.replay().expect("self-play replays"))
        .collect();
    let budget = 1_000_000;
    let variants = [
        InferenceVariant::pif(budget, policy.clone()),
        InferenceVariant::cli(
            budget,
            MarginalSource::Posterior {
                policy: policy.clone(),
                budget,
            },
        ),
        InferenceVariant::ni(budget),
    ];
    let per_game: Vec<[f64; 3]> = ends
        .par_iter()
        .enumerate()
        .map(|(i, end)| {
            let samples = instrument_game(end, i as u64, &variants, Injection::Binomial, 7).expect("instrumented");
            assert!(samples.iter().all(|s| s.direct), "MiniSkat sets are enumerated");
            let mut sums = [0.0; 3];
            for (j, s) in samples.iter().enumerate() {
                sums[j % 3] += s.tssr;
            }
            let n = (samples.len() / 3).max(1) as f64;
            sums.map(|s| s / n)
        })
        .collect();
    let col = |j: usize| per_game.iter().map(|g| g[j]).collect::<Vec<f64>>();
    let (pif, cli, ni) = (col(0), col(1), col(2));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let p_pif_cli = paired_ttest(&pif, &cli).expect("paired samples");
    let p_cli_ni = paired_ttest(&cli, &ni).expect("paired samples");
    let (m_pif, m_cli, m_ni) = (mean(&pif), mean(&cli), mean(&ni));
    Outcome::new(
        ends.len() >= ORDERING_GAMES && m_pif > m_cli && m_cli > m_ni && p_pif_cli < ORDERING_P && p_cli_ni < ORDERING_P,
        format!(
            "{} games: PIF {m_pif:.3} > CLI {m_cli:.3} (p = {p_pif_cli:.1e}) > NI {m_ni:.3} (p = {p_cli_ni:.1e}), limit p < {ORDERING_P}",
            ends.len()
        ),
    )
}
