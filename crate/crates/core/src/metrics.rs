//! True state sampling ratio (TSSR): how many times likelier an inference
//! makes the true world than uniform sampling, and its average over games.
//!
//! Worlds are card configurations throughout. For PIF a configuration's
//! weight is the sum of its states' weights.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::binomial_pmf;
use crate::inference::{
    estimate_dist, weigh_configurations, weigh_states, InferenceError, InferenceVariant, VariantId, WeightedWorlds,
};
use crate::num::{log_sum_exp, Real};
use crate::rules::{GameKind, GameState, GameType, Phase, RulesError};
use crate::seeds::derive_seed;
use crate::worlds::{Configuration, InfoSet, State, WorldSpace};

/// Binomial terms with less mass than this are left out of the sampled estimate.
pub const BINOMIAL_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("direct TSSR needs every world weighted ({sampled} of {total})")]
    NotEnumerated { sampled: usize, total: u64 },
    #[error("the true world is inconsistent with the information set")]
    Inconsistent,
    #[error("invalid binomial spec: n = {n}, p = {p}")]
    InvalidSpec { n: usize, p: f64 },
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Rules(#[from] RulesError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameClass {
    Grand,
    Suit,
    Null,
    NullOuvert,
}

impl GameClass {
    pub fn of(g: &GameType) -> GameClass {
        match g.kind {
            GameKind::Grand => GameClass::Grand,
            GameKind::Null if g.ouvert => GameClass::NullOuvert,
            GameKind::Null => GameClass::Null,
            _ => GameClass::Suit,
        }
    }
}

impl fmt::Display for GameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameClass::Grand => "grand",
            GameClass::Suit => "suit",
            GameClass::Null => "null",
            GameClass::NullOuvert => "null_ouvert",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Soloist,
    Defender,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Soloist => "soloist",
            Role::Defender => "defender",
        })
    }
}

/// TSSR of one variant at one card-play decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TssrSample {
    pub variant: String,
    pub game: u64,
    pub game_type: GameClass,
    pub role: Role,
    /// Cards played before the decision.
    pub card_number: u8,
    pub tssr: f64,
    pub world_count: u64,
    /// Computed from the full enumeration rather than the injection estimate.
    pub direct: bool,
}

/// How often the true world appears in a sample of `n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Injection {
    /// k ~ Bin(n, 1/|I|) copies.
    #[default]
    Binomial,
    /// At most once, with probability n/|I|.
    Hypergeometric,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinomialSpec {
    pub n: usize,
    pub p: f64,
    pub threshold: f64,
    pub injection: Injection,
}

impl BinomialSpec {
    pub fn new(n: usize, world_count: u64) -> BinomialSpec {
        BinomialSpec {
            n,
            p: 1.0 / world_count as f64,
            threshold: BINOMIAL_THRESHOLD,
            injection: Injection::Binomial,
        }
    }

    pub fn with_injection(self, injection: Injection) -> BinomialSpec {
        BinomialSpec { injection, ..self }
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.n == 0 || !(self.p > 0.0 && self.p <= 1.0) {
            return Err(MetricsError::InvalidSpec { n: self.n, p: self.p });
        }
        Ok(())
    }

    /// `(k, mass)` for every multiplicity k ≥ 1 that is kept.
    ///
    /// When no binomial term clears the threshold the single k = 1 term is
    /// kept, since the estimate renormalizes over the kept terms anyway.
    pub fn terms(&self) -> Vec<(usize, f64)> {
        match self.injection {
            Injection::Hypergeometric => vec![(1, (self.n as f64 * self.p).min(1.0))],
            Injection::Binomial => {
                let mode = ((self.n as f64 + 1.0) * self.p).floor() as usize;
                let mut out = Vec::new();
                for k in 1..=self.n {
                    let mass: f64 = binomial_pmf(self.n as u64, k as u64, self.p);
                    if mass > self.threshold {
                        out.push((k, mass));
                    } else if k > mode {
                        break;
                    }
                }
                if out.is_empty() {
                    out.push((1, 1.0));
                }
                out
            }
        }
    }
}

/// Direct TSSR η(true)·|I| from a fully enumerated distribution.
pub fn tssr_direct<P: Real>(w: &WeightedWorlds<P>, info: &InfoSet, truth: &Configuration) -> Result<P, MetricsError> {
    if (w.sampled_count as u64) < w.total_count {
        return Err(MetricsError::NotEnumerated {
            sampled: w.sampled_count,
            total: w.total_count,
        });
    }
    let space = WorldSpace::new(info);
    if !space.consistent(truth) {
        return Err(MetricsError::Inconsistent);
    }
    Ok(w.config_weight(truth) * P::of(space.count_configurations() as f64))
}

/// Direct TSSR after enumerating every world of `info`.
pub fn tssr_enumerated<P: Real>(
    info: &InfoSet,
    variant: &InferenceVariant<P>,
    truth: &Configuration,
    seed: u64,
) -> Result<P, MetricsError> {
    let space = WorldSpace::new(info);
    let all = if variant.id == VariantId::PIF {
        space.count_states()
    } else {
        space.count_configurations()
    };
    let mut full = variant.clone();
    full.sample_budget = full.sample_budget.max(all as usize);
    let w = estimate_dist(info, &full, seed)?;
    tssr_direct(&w, info, truth)
}

/// Unnormalized log weights of configurations under `variant`.
pub fn config_log_weights<P: Real>(
    info: &InfoSet,
    variant: &InferenceVariant<P>,
    configs: &[Configuration],
    seed: u64,
) -> Result<Vec<P>, MetricsError> {
    if variant.id != VariantId::PIF {
        let w = weigh_configurations(info, variant, configs, seed)?;
        return Ok(w.into_iter().map(|w| w.log_weight).collect());
    }
    let policy = variant
        .policy
        .as_deref()
        .ok_or(InferenceError::MissingComponent(VariantId::PIF, "policy"))?;
    let space = WorldSpace::new(info);
    let per_config: Vec<Vec<State>> = configs.iter().map(|c| space.states_for_configuration(c)).collect();
    let flat: Vec<State> = per_config.iter().flatten().copied().collect();
    let w = weigh_states(info, policy, &flat)?;
    let mut out = Vec::with_capacity(configs.len());
    let mut at = 0;
    for states in &per_config {
        let logs: Vec<P> = w[at..at + states.len()].iter().map(|w| w.log_weight).collect();
        out.push(log_sum_exp(&logs));
        at += states.len();
    }
    Ok(out)
}

/// One kept multiplicity with the ranks of the worlds sampled alongside it.
#[derive(Clone, Debug)]
struct Draw {
    k: usize,
    mass: f64,
    companions: Vec<u64>,
}

/// For each kept k, `n - k` distinct non-true ranks drawn uniformly.
fn draws(spec: &BinomialSpec, world_count: u64, truth_rank: u64, seed: u64) -> Vec<Draw> {
    let others = world_count - 1;
    spec.terms()
        .into_iter()
        .map(|(k, mass)| {
            let m = (spec.n - k.min(spec.n)).min(others as usize);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, k as u64]));
            let mut companions: Vec<u64> = index::sample(&mut rng, others as usize, m)
                .into_iter()
                .map(|i| {
                    let i = i as u64;
                    if i >= truth_rank {
                        i + 1
                    } else {
                        i
                    }
                })
                .collect();
            companions.sort_unstable();
            Draw { k, mass, companions }
        })
        .collect()
}

/// n · Σ mass·k·η_k / Σ mass·k, with η_k the normalized weight of one of the
/// k true copies. An all-zero sample counts as uniform.
fn combine<P: Real>(n: usize, draws: &[Draw], truth_lw: P, lw: impl Fn(u64) -> P) -> P {
    let mut num = P::zero();
    let mut den = P::zero();
    for d in draws {
        let k = P::of(d.k as f64);
        let mut logs: Vec<P> = d.companions.iter().map(|&r| lw(r)).collect();
        logs.push(truth_lw + k.ln());
        let total = log_sum_exp(&logs);
        let eta = if total == P::neg_infinity() {
            P::one() / P::of((d.k + d.companions.len()) as f64)
        } else {
            (truth_lw - total).exp()
        };
        let m = P::of(d.mass) * k;
        num += m * eta;
        den += m;
    }
    P::of(n as f64) * num / den
}

/// Injection estimate from precomputed log weights indexed by configuration rank.
pub fn tssr_from_log_weights<P: Real>(
    spec: &BinomialSpec,
    truth_rank: u64,
    log_weights: &[P],
    seed: u64,
) -> Result<P, MetricsError> {
    spec.validate()?;
    let world_count = log_weights.len() as u64;
    if truth_rank >= world_count {
        return Err(MetricsError::Inconsistent);
    }
    let d = draws(spec, world_count, truth_rank, seed);
    Ok(combine(spec.n, &d, log_weights[truth_rank as usize], |r| log_weights[r as usize]))
}

/// Sampled TSSR: the true world is injected k times into a uniform sample of
/// `spec.n` worlds, for every kept k. Defers to the direct value when the
/// sample would cover the whole information set.
pub fn tssr_sampled<P: Real>(
    info: &InfoSet,
    variant: &InferenceVariant<P>,
    truth: &Configuration,
    spec: &BinomialSpec,
    seed: u64,
) -> Result<P, MetricsError> {
    spec.validate()?;
    let space = WorldSpace::new(info);
    let world_count = space.count_configurations();
    let truth_rank = space.rank(truth).ok_or(MetricsError::Inconsistent)?;
    if spec.n as u64 >= world_count {
        return tssr_enumerated(info, variant, truth, seed);
    }
    let d = draws(spec, world_count, truth_rank, seed);
    let ranks: Vec<u64> = d
        .iter()
        .flat_map(|d| d.companions.iter().copied())
        .chain([truth_rank])
        .collect::<BTreeSet<u64>>()
        .into_iter()
        .collect();
    let configs: Vec<Configuration> = ranks.iter().map(|&r| space.unrank(r)).collect();
    let logs = config_log_weights(info, variant, &configs, seed)?;
    let lw = |r: u64| logs[ranks.binary_search(&r).expect("weighed above")];
    Ok(combine(spec.n, &d, lw(truth_rank), lw))
}

/// TSSR with the variant's own budget: direct when the information set has
/// at most `sample_budget` configurations, sampled otherwise. The flag says
/// which one was used.
pub fn tssr<P: Real>(
    info: &InfoSet,
    variant: &InferenceVariant<P>,
    truth: &Configuration,
    injection: Injection,
    seed: u64,
) -> Result<(P, bool), MetricsError> {
    let count = WorldSpace::new(info).count_configurations();
    if count <= variant.sample_budget as u64 {
        return Ok((tssr_enumerated(info, variant, truth, seed)?, true));
    }
    let spec = BinomialSpec::new(variant.sample_budget, count).with_injection(injection);
    Ok((tssr_sampled(info, variant, truth, &spec, seed)?, false))
}

/// TSSR samples of every variant at every card-play decision of a finished game.
///
/// A Cheat variant is handed the true state of each decision.
pub fn instrument_game<P: Real>(
    end: &GameState,
    game: u64,
    variants: &[InferenceVariant<P>],
    injection: Injection,
    seed: u64,
) -> Result<Vec<TssrSample>, MetricsError> {
    let mut g = GameState::from_deal(end.deck, end.dealt, end.dealt_skat)?;
    let mut out = Vec::new();
    for &(seat, a) in &end.history {
        if g.phase == Phase::Cardplay {
            let info = InfoSet::observe(&g, seat);
            let truth = State::from_game(&g);
            let game_type = GameClass::of(&g.declaration.expect("card play has a declaration"));
            let role = if g.soloist == Some(seat) {
                Role::Soloist
            } else {
                Role::Defender
            };
            let world_count = WorldSpace::new(&info).count_configurations();
            let card_number = info.cards_played() as u8;
            for (i, v) in variants.iter().enumerate() {
                let mut v = v.clone();
                if v.id == VariantId::Cheat {
                    v.truth = Some(truth);
                }
                let s = derive_seed(&[seed, game, u64::from(card_number), i as u64]);
                let (t, direct) = tssr(&info, &v, &truth.config, injection, s)?;
                out.push(TssrSample {
                    variant: v.label(),
                    game,
                    game_type,
                    role,
                    card_number,
                    tssr: t.as_f64(),
                    world_count,
                    direct,
                });
            }
        }
        g.apply_mut(a)?;
    }
    Ok(out)
}

/// One row of a TSSR curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub variant: String,
    pub game_type: GameClass,
    pub role: Role,
    pub card_number: u8,
    pub mean_tssr: f64,
    /// Standard error over per-game means; 0 with a single game.
    pub stderr: f64,
    /// Number of games contributing.
    pub n_obs: usize,
}

/// Mean and standard error of TSSR per (variant, game type, role, card number).
///
/// Games are the independent units: samples of one game in the same cell are
/// averaged first. Rows come out sorted by their grouping key.
pub fn tssr_curve(samples: &[TssrSample]) -> Vec<CurvePoint> {
    type Cell = (String, GameClass, Role, u8);
    let mut cells: BTreeMap<Cell, BTreeMap<u64, (f64, usize)>> = BTreeMap::new();
    for s in samples {
        let key = (s.variant.clone(), s.game_type, s.role, s.card_number);
        let e = cells.entry(key).or_default().entry(s.game).or_insert((0.0, 0));
        e.0 += s.tssr;
        e.1 += 1;
    }
    cells
        .into_iter()
        .map(|((variant, game_type, role, card_number), games)| {
            let means: Vec<f64> = games.values().map(|&(sum, n)| sum / n as f64).collect();
            let n = means.len();
            let mean = means.iter().sum::<f64>() / n as f64;
            let stderr = if n > 1 {
                let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            CurvePoint {
                variant,
                game_type,
                role,
                card_number,
                mean_tssr: mean,
                stderr,
                n_obs: n,
            }
        })
        .collect()
}

/// Writes curve rows as `variant,game_type,role,card_number,mean_tssr,stderr,n_obs`.
pub fn write_curve_csv<W: Write>(w: W, points: &[CurvePoint]) -> Result<(), MetricsError> {
    let mut out = csv::Writer::from_writer(w);
    for p in points {
        out.serialize(p)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}
