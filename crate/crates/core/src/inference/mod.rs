//! World-distribution estimation for an information set.
//!
//! [`estimate_dist`] samples worlds from the exact index space of an
//! information set and weights them according to the chosen variant:
//! uniform (NI), bid tables (KI), independent card marginals (CLI), policy
//! reach probabilities per configuration (PI) or per state (PIF), or the true
//! world (Cheat).

mod cli;
mod ki;
mod reach;

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{entropy, normalize_log, Real};
use crate::policy::{PolicyError, PolicyModel};
use crate::seeds::derive_seed;
use crate::worlds::{Configuration, InfoSet, State, WorldSpace, WorldsError};

pub use cli::{cli_weight, hand_size_marginals, marginals_from_weights, MarginalSource, Marginals};
pub use ki::{auction_levels, ki_weight, KiTables, KI_FORMAT};
pub use reach::{reach_weight, HistoryModel, ReachWeight};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InferenceError {
    #[error(transparent)]
    Worlds(#[from] WorldsError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("variant {0} needs a {1}")]
    MissingComponent(VariantId, &'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VariantId {
    NI,
    KI,
    CLI,
    PI,
    PIF,
    Cheat,
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VariantId::NI => "NI",
            VariantId::KI => "KI",
            VariantId::CLI => "CLI",
            VariantId::PI => "PI",
            VariantId::PIF => "PIF",
            VariantId::Cheat => "C",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for VariantId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "NI" => VariantId::NI,
            "KI" => VariantId::KI,
            "CLI" => VariantId::CLI,
            "PI" => VariantId::PI,
            "PIF" => VariantId::PIF,
            "C" | "CHEAT" => VariantId::Cheat,
            _ => return Err(format!("unknown inference variant {s:?}")),
        })
    }
}

/// An inference method plus everything it needs.
#[derive(Clone)]
pub struct InferenceVariant<P: Real> {
    pub id: VariantId,
    pub sample_budget: usize,
    pub policy: Option<Arc<dyn PolicyModel<P>>>,
    pub marginal_source: Option<MarginalSource<P>>,
    pub ki_tables: Option<Arc<KiTables>>,
    /// The real world, for the cheating variant.
    pub truth: Option<State>,
}

impl<P: Real> fmt::Debug for InferenceVariant<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InferenceVariant")
            .field("id", &self.id)
            .field("sample_budget", &self.sample_budget)
            .field("policy", &self.policy.is_some())
            .field("marginal_source", &self.marginal_source)
            .field("ki_tables", &self.ki_tables.is_some())
            .field("truth", &self.truth)
            .finish()
    }
}

impl<P: Real> InferenceVariant<P> {
    fn bare(id: VariantId, sample_budget: usize) -> Self {
        InferenceVariant {
            id,
            sample_budget,
            policy: None,
            marginal_source: None,
            ki_tables: None,
            truth: None,
        }
    }

    pub fn ni(sample_budget: usize) -> Self {
        Self::bare(VariantId::NI, sample_budget)
    }

    pub fn pi(sample_budget: usize, policy: Arc<dyn PolicyModel<P>>) -> Self {
        InferenceVariant {
            policy: Some(policy),
            ..Self::bare(VariantId::PI, sample_budget)
        }
    }

    pub fn pif(sample_budget: usize, policy: Arc<dyn PolicyModel<P>>) -> Self {
        InferenceVariant {
            policy: Some(policy),
            ..Self::bare(VariantId::PIF, sample_budget)
        }
    }

    pub fn cli(sample_budget: usize, source: MarginalSource<P>) -> Self {
        InferenceVariant {
            marginal_source: Some(source),
            ..Self::bare(VariantId::CLI, sample_budget)
        }
    }

    pub fn ki(sample_budget: usize, tables: Arc<KiTables>) -> Self {
        InferenceVariant {
            ki_tables: Some(tables),
            ..Self::bare(VariantId::KI, sample_budget)
        }
    }

    pub fn cheat(sample_budget: usize, truth: State) -> Self {
        InferenceVariant {
            truth: Some(truth),
            ..Self::bare(VariantId::Cheat, sample_budget)
        }
    }

    /// Short name such as `PI20` (budget in thousands).
    pub fn label(&self) -> String {
        if self.sample_budget >= 1000 && self.sample_budget % 1000 == 0 {
            format!("{}{}", self.id, self.sample_budget / 1000)
        } else {
            self.id.to_string()
        }
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        let missing = |what| Err(InferenceError::MissingComponent(self.id, what));
        match self.id {
            VariantId::PI | VariantId::PIF if self.policy.is_none() => missing("policy"),
            VariantId::CLI if self.marginal_source.is_none() => missing("marginal source"),
            VariantId::KI if self.ki_tables.is_none() => missing("KI table"),
            VariantId::Cheat if self.truth.is_none() => missing("true state"),
            _ => Ok(()),
        }
    }

    fn policy(&self) -> Result<&dyn PolicyModel<P>, InferenceError> {
        self.policy
            .as_deref()
            .ok_or(InferenceError::MissingComponent(self.id, "policy"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum World {
    Config(Configuration),
    State(State),
}

impl World {
    pub fn config(&self) -> &Configuration {
        match self {
            World::Config(c) => c,
            World::State(s) => &s.config,
        }
    }
}

/// Sampled worlds with normalized weights.
#[derive(Clone, Debug)]
pub struct WeightedWorlds<P: Real> {
    pub variant: VariantId,
    pub entries: Vec<(World, P)>,
    pub sampled_count: usize,
    /// Size of the space sampled from (configurations or states).
    pub total_count: u64,
    /// Every sampled world had weight zero and the weights were reset to uniform.
    pub zero_mass_fallback: bool,
}

impl<P: Real> WeightedWorlds<P> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> P {
        self.entries.iter().fold(P::zero(), |a, e| a + e.1)
    }

    pub fn weights(&self) -> Vec<P> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn entropy(&self) -> P {
        entropy(&self.weights())
    }

    /// Total weight of the entries with this configuration.
    pub fn config_weight(&self, c: &Configuration) -> P {
        // folded from +0: an empty f64 sum is -0
        self.entries.iter().filter(|e| e.0.config() == c).fold(P::zero(), |a, e| a + e.1)
    }

    /// Weights merged per configuration, in first-appearance order.
    pub fn configurations(&self) -> Vec<(Configuration, P)> {
        let mut index: HashMap<Configuration, usize> = HashMap::new();
        let mut out: Vec<(Configuration, P)> = Vec::new();
        for (w, p) in &self.entries {
            let c = *w.config();
            match index.get(&c) {
                Some(&i) => out[i].1 += *p,
                None => {
                    index.insert(c, out.len());
                    out.push((c, *p));
                }
            }
        }
        out
    }

    pub fn positive_count(&self) -> usize {
        self.entries.iter().filter(|e| e.1 > P::zero()).count()
    }
}

static ZERO_MASS_FALLBACKS: AtomicU64 = AtomicU64::new(0);

/// How often [`estimate_dist`] has fallen back to uniform weights in this process.
pub fn zero_mass_fallbacks() -> u64 {
    ZERO_MASS_FALLBACKS.load(Ordering::Relaxed)
}

/// Unnormalized weights of configurations under a configuration-level variant
/// (NI, KI, CLI, PI, Cheat). `seed` only matters for sampled CLI marginals.
pub fn weigh_configurations<P: Real>(
    info: &InfoSet,
    variant: &InferenceVariant<P>,
    configs: &[Configuration],
    seed: u64,
) -> Result<Vec<ReachWeight<P>>, InferenceError> {
    variant.validate()?;
    let space = WorldSpace::new(info);
    weigh_configurations_in(&space, variant, configs, seed)
}

fn weigh_configurations_in<P: Real>(
    space: &WorldSpace,
    variant: &InferenceVariant<P>,
    configs: &[Configuration],
    seed: u64,
) -> Result<Vec<ReachWeight<P>>, InferenceError> {
    let info = space.info();
    match variant.id {
        VariantId::NI => Ok(vec![ReachWeight::one(); configs.len()]),
        VariantId::Cheat => {
            let truth = variant.truth.expect("validated").config;
            Ok(configs
                .iter()
                .map(|c| if *c == truth { ReachWeight::one() } else { ReachWeight::zero() })
                .collect())
        }
        VariantId::KI => {
            let tables = variant.ki_tables.as_deref().expect("validated");
            Ok(configs.par_iter().map(|c| ki_weight(c, tables, info)).collect())
        }
        VariantId::CLI => {
            let source = variant.marginal_source.as_ref().expect("validated");
            let m = cli::resolve_marginals(source, info, space, derive_seed(&[seed, 0xC11]))?;
            Ok(configs.par_iter().map(|c| cli_weight(c, &m)).collect())
        }
        VariantId::PI | VariantId::PIF => {
            let policy = variant.policy()?;
            let model = HistoryModel::new(info);
            configs
                .par_iter()
                .map(|c| model.shared_weight(space, policy, c))
                .collect()
        }
    }
}

/// Unnormalized policy weights of full states (every opponent decision point).
pub fn weigh_states<P: Real>(
    info: &InfoSet,
    policy: &dyn PolicyModel<P>,
    states: &[State],
) -> Result<Vec<ReachWeight<P>>, InferenceError> {
    let space = WorldSpace::new(info);
    weigh_states_in(&space, policy, states)
}

fn weigh_states_in<P: Real>(
    space: &WorldSpace,
    policy: &dyn PolicyModel<P>,
    states: &[State],
) -> Result<Vec<ReachWeight<P>>, InferenceError> {
    let model = HistoryModel::new(space.info());
    // the shared factor depends only on the configuration
    let mut distinct: Vec<Configuration> = states.iter().map(|s| s.config).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let shared: Vec<ReachWeight<P>> = distinct
        .par_iter()
        .map(|c| model.shared_weight(space, policy, c))
        .collect::<Result<_, _>>()?;
    let needs_prepickup = !model.prepickup_points().is_empty();
    states
        .par_iter()
        .map(|s| {
            let i = distinct.binary_search(&s.config).expect("collected above");
            let w = shared[i];
            if !needs_prepickup || w.is_zero() {
                return Ok(w);
            }
            Ok(w.combine(model.prepickup_weight(space, policy, s)?))
        })
        .collect()
}

/// Samples up to `sample_budget` worlds for `info` and returns their normalized weights.
pub fn estimate_dist<P: Real>(
    info: &InfoSet,
    variant: &InferenceVariant<P>,
    seed: u64,
) -> Result<WeightedWorlds<P>, InferenceError> {
    variant.validate()?;
    let space = WorldSpace::new(info);
    let (worlds, log_weights, total_count) = if variant.id == VariantId::PIF {
        let states = space.sample_states(variant.sample_budget, seed)?;
        let w = weigh_states_in(&space, variant.policy()?, &states)?;
        (states.into_iter().map(World::State).collect::<Vec<_>>(), w, space.count_states())
    } else {
        let mut configs = space.sample_configurations(variant.sample_budget, seed)?;
        if let Some(truth) = variant.truth.filter(|_| variant.id == VariantId::Cheat) {
            if !configs.contains(&truth.config) {
                configs.push(truth.config);
            }
        }
        let w = weigh_configurations_in(&space, variant, &configs, seed)?;
        (
            configs.into_iter().map(World::Config).collect(),
            w,
            space.count_configurations(),
        )
    };
    let logs: Vec<P> = log_weights.iter().map(|w| w.log_weight).collect();
    let (weights, fallback) = match normalize_log(&logs) {
        Some(w) => (w, false),
        None => {
            ZERO_MASS_FALLBACKS.fetch_add(1, Ordering::Relaxed);
            log::warn!(
                "{}: all {} sampled worlds have zero weight; using uniform weights",
                variant.id,
                worlds.len()
            );
            let u = P::one() / P::of(worlds.len() as f64);
            (vec![u; worlds.len()], true)
        }
    };
    Ok(WeightedWorlds {
        variant: variant.id,
        sampled_count: worlds.len(),
        entries: worlds.into_iter().zip(weights).collect(),
        total_count,
        zero_mass_fallback: fallback,
    })
}
