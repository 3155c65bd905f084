//! Run configuration files and the models they reference.
//!
//! Everything a command needs is loaded and validated here before any
//! compute starts. Each loaded piece also yields an identity, with files
//! replaced by their content digests, that feeds the run's config digest.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use skatinfer::gamelog::{read_log, GameRecord};
use skatinfer::inference::{InferenceVariant, KiTables, MarginalSource, VariantId};
use skatinfer::player::PlayerConfig;
use skatinfer::policy::{HeuristicPolicy, PolicyModel, TablePolicy, UniformPolicy};
use skatinfer::tournament::{Mode, Player};
use skatinfer::worlds::State;
use skatinfer::DeckKind;

use crate::error::{Classify, Failure};
use crate::provenance::sha256_hex;

/// Relative paths in a config file are taken from the file's directory.
pub fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub struct Logs {
    pub games: Vec<GameRecord>,
    pub digest: String,
}

/// Reads a game log. Records of a deck other than `deck` are rejected.
pub fn read_logs(path: &Path, deck: Option<DeckKind>) -> Result<Logs, Failure> {
    let bytes = fs::read(path).config(format!("cannot read game log {}", path.display()))?;
    let contents = read_log(&bytes[..]).data(format!("cannot parse game log {}", path.display()))?;
    if let Some(d) = deck {
        if let Some(r) = contents.games.iter().find(|r| r.deck != d) {
            return Err(Failure::config(format!(
                "{} holds {}-deck games but the deck is set to {d}",
                path.display(),
                r.deck
            )));
        }
    }
    Ok(Logs {
        games: contents.games,
        digest: sha256_hex(&bytes),
    })
}

/// The deck of a log: the requested one, else the first record's.
pub fn log_deck(requested: Option<DeckKind>, games: &[GameRecord]) -> DeckKind {
    requested.or_else(|| games.first().map(|g| g.deck)).unwrap_or(DeckKind::Full)
}

pub type Policy = Arc<dyn PolicyModel<f64>>;

/// `heuristic`, `uniform`, or the path of a fitted table.
pub fn load_policy(src: &str, base: &Path, deck: DeckKind) -> Result<(Policy, String), Failure> {
    match src {
        "heuristic" => Ok((Arc::new(HeuristicPolicy::default()), "heuristic".into())),
        "uniform" => Ok((Arc::new(UniformPolicy), "uniform".into())),
        path => {
            let path = resolve(base, path);
            let text = fs::read_to_string(&path).config(format!("cannot read policy {}", path.display()))?;
            let table = TablePolicy::from_json(&text).data(format!("cannot parse policy {}", path.display()))?;
            if table.deck != deck {
                return Err(Failure::config(format!(
                    "policy {} was fitted on the {} deck, not {deck}",
                    path.display(),
                    table.deck
                )));
            }
            Ok((Arc::new(table), format!("table:{}", sha256_hex(text.as_bytes()))))
        }
    }
}

pub fn load_ki(path: &str, base: &Path, deck: DeckKind) -> Result<(Arc<KiTables>, String), Failure> {
    let path = resolve(base, path);
    let text = fs::read_to_string(&path).config(format!("cannot read KI tables {}", path.display()))?;
    let tables = KiTables::from_json(&text).data(format!("cannot parse KI tables {}", path.display()))?;
    if tables.deck != deck {
        return Err(Failure::config(format!(
            "KI tables {} are for the {} deck, not {deck}",
            path.display(),
            tables.deck
        )));
    }
    Ok((Arc::new(tables), sha256_hex(text.as_bytes())))
}

/// An inference variant as written in a config.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSpec {
    /// One of NI, KI, CLI, PI, PIF, Cheat.
    pub variant: String,
    pub sample_budget: usize,
    #[serde(default)]
    pub policy: Option<String>,
    /// CLI only: `posterior` (the default, needs a policy) or `hand_size`.
    #[serde(default)]
    pub marginals: Option<String>,
    /// Sample budget of the posterior behind CLI marginals; defaults to `sample_budget`.
    #[serde(default)]
    pub marginal_budget: Option<usize>,
    #[serde(default)]
    pub ki_tables: Option<String>,
}

/// A resolved variant, with only the components it uses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VariantIdentity {
    pub variant: String,
    pub sample_budget: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginals: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginal_budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ki_tables: Option<String>,
}

impl VariantSpec {
    pub fn build(&self, base: &Path, deck: DeckKind) -> Result<(InferenceVariant<f64>, VariantIdentity), Failure> {
        let id: VariantId = self.variant.parse().map_err(Failure::config)?;
        let budget = self.sample_budget;
        if budget == 0 {
            return Err(Failure::config(format!("variant {id}: sample_budget must be positive")));
        }
        let mut identity = VariantIdentity {
            variant: id.to_string(),
            sample_budget: budget,
            policy: None,
            marginals: None,
            marginal_budget: None,
            ki_tables: None,
        };
        let needs_policy = |what: &str| -> Result<(Policy, String), Failure> {
            let src = self
                .policy
                .as_deref()
                .ok_or_else(|| Failure::config(format!("variant {id} needs a policy for {what}")))?;
            load_policy(src, base, deck)
        };
        let variant = match id {
            VariantId::NI => InferenceVariant::ni(budget),
            VariantId::Cheat => InferenceVariant::cheat(budget, State::default()),
            VariantId::PI | VariantId::PIF => {
                let (policy, pid) = needs_policy("reach weights")?;
                identity.policy = Some(pid);
                if id == VariantId::PI {
                    InferenceVariant::pi(budget, policy)
                } else {
                    InferenceVariant::pif(budget, policy)
                }
            }
            VariantId::CLI => match self.marginals.as_deref().unwrap_or("posterior") {
                "posterior" => {
                    let (policy, pid) = needs_policy("posterior marginals")?;
                    let mb = self.marginal_budget.unwrap_or(budget);
                    if mb == 0 {
                        return Err(Failure::config("marginal_budget must be positive"));
                    }
                    identity.policy = Some(pid);
                    identity.marginals = Some("posterior".into());
                    identity.marginal_budget = Some(mb);
                    InferenceVariant::cli(budget, MarginalSource::Posterior { policy, budget: mb })
                }
                "hand_size" => {
                    identity.marginals = Some("hand_size".into());
                    InferenceVariant::cli(budget, MarginalSource::HandSize)
                }
                other => return Err(Failure::config(format!("unknown marginal source {other:?}"))),
            },
            VariantId::KI => {
                let path = self
                    .ki_tables
                    .as_deref()
                    .ok_or_else(|| Failure::config("variant KI needs ki_tables"))?;
                let (tables, digest) = load_ki(path, base, deck)?;
                identity.ki_tables = Some(digest);
                InferenceVariant::ki(budget, tables)
            }
        };
        variant.validate().config(format!("variant {id}"))?;
        Ok((variant, identity))
    }
}

/// A player configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerSpec {
    pub name: String,
    pub variant: String,
    pub sample_budget: usize,
    /// Worlds solved per decision; the heaviest ones are kept.
    pub evaluation_budget: usize,
    #[serde(default)]
    pub policy: Option<String>,
    #[serde(default)]
    pub marginals: Option<String>,
    #[serde(default)]
    pub marginal_budget: Option<usize>,
    #[serde(default)]
    pub ki_tables: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlayerIdentity {
    pub name: String,
    pub evaluation_budget: usize,
    pub inference: VariantIdentity,
}

impl PlayerSpec {
    pub fn variant_spec(&self) -> VariantSpec {
        VariantSpec {
            variant: self.variant.clone(),
            sample_budget: self.sample_budget,
            policy: self.policy.clone(),
            marginals: self.marginals.clone(),
            marginal_budget: self.marginal_budget,
            ki_tables: self.ki_tables.clone(),
        }
    }

    pub fn build(&self, base: &Path, deck: DeckKind) -> Result<(Player, PlayerIdentity), Failure> {
        if self.name.is_empty() {
            return Err(Failure::config("player name is empty"));
        }
        if self.evaluation_budget == 0 {
            return Err(Failure::config(format!("player {}: evaluation_budget must be positive", self.name)));
        }
        let (variant, inference) = self.variant_spec().build(base, deck)?;
        let player = Player::new(self.name.clone(), PlayerConfig::new(variant, self.evaluation_budget));
        Ok((
            player,
            PlayerIdentity {
                name: self.name.clone(),
                evaluation_budget: self.evaluation_budget,
                inference,
            },
        ))
    }
}

/// A player given inline or as the path of a player file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlayerRef {
    File(String),
    Inline(PlayerSpec),
}

impl PlayerRef {
    /// The player settings plus the directory its relative paths start from.
    pub fn load(&self, base: &Path) -> Result<(PlayerSpec, PathBuf), Failure> {
        match self {
            PlayerRef::Inline(spec) => Ok((spec.clone(), base.to_path_buf())),
            PlayerRef::File(p) => {
                let path = resolve(base, p);
                let text = fs::read_to_string(&path).config(format!("cannot read player file {}", path.display()))?;
                let spec = serde_json::from_str(&text).config(format!("invalid player file {}", path.display()))?;
                Ok((spec, parent_dir(&path)))
            }
        }
    }
}

fn default_mode() -> Mode {
    Mode::Pairwise
}

/// A tournament manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Game log the deals, bids and declarations are taken from.
    pub deals: String,
    /// Number of playable deals to use, from the start of the log; all if absent.
    #[serde(default)]
    pub matches: Option<usize>,
    /// Defaults to the global `--seed`.
    #[serde(default)]
    pub master_seed: Option<u64>,
    pub players: [PlayerRef; 2],
    /// Result-row ledger; defaults to `checkpoint.jsonl` in the output directory.
    #[serde(default)]
    pub checkpoint: Option<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest, Failure> {
        let text = fs::read_to_string(path).config(format!("cannot read manifest {}", path.display()))?;
        serde_json::from_str(&text).config(format!("invalid manifest {}", path.display()))
    }
}
