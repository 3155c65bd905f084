use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use skatinfer::inference::KiTables;
use skatinfer::policy::{Bucketing, TableError, TablePolicy};
use skatinfer::DeckKind;

use crate::config::{log_deck, read_logs};
use crate::error::{Classify, Failure};
use crate::provenance::{config_digest, provenance};
use crate::Global;

#[derive(Debug, Args)]
pub struct FitPolicyArgs {
    /// Game log to fit from.
    #[arg(long)]
    pub logs: PathBuf,
    /// Output table file (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Context bucketing: `standard` or `coarse`.
    #[arg(long, default_value = "standard")]
    pub bucketing: String,
    /// Additive smoothing per choice.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Also fit KI bid tables and write them here.
    #[arg(long)]
    pub ki_out: Option<PathBuf>,
    /// Hand-strength buckets of the KI tables.
    #[arg(long, default_value_t = 8)]
    pub ki_buckets: u8,
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    deck: DeckKind,
    bucketing: &'a str,
    alpha: f64,
    ki_buckets: Option<u8>,
    logs: &'a str,
}

pub fn run(g: &Global, a: &FitPolicyArgs) -> Result<(), Failure> {
    let bucketing = Bucketing::from_id(&a.bucketing)
        .ok_or_else(|| Failure::config(format!("unknown bucketing {:?}", a.bucketing)))?;
    if !(a.alpha > 0.0 && a.alpha.is_finite()) {
        return Err(Failure::config(format!("--alpha must be positive, got {}", a.alpha)));
    }
    if a.ki_out.is_some() && a.ki_buckets == 0 {
        return Err(Failure::config("--ki-buckets must be positive"));
    }
    let logs = read_logs(&a.logs, g.deck())?;
    let deck = log_deck(g.deck(), &logs.games);
    let digest = config_digest(&RunConfig {
        command: "fit-policy",
        deck,
        bucketing: bucketing.id(),
        alpha: a.alpha,
        ki_buckets: a.ki_out.as_ref().map(|_| a.ki_buckets),
        logs: &logs.digest,
    });
    let mut table = TablePolicy::fit(&logs.games, deck, bucketing, a.alpha).map_err(|e| match e {
        TableError::TooManyMalformed { .. } => Failure::Data(e.into()),
        e => Failure::Internal(e.into()),
    })?;
    table.provenance = Some(provenance(&digest));
    std::fs::write(&a.out, table.to_json() + "\n").config(format!("cannot write {}", a.out.display()))?;
    if let Some(path) = &a.ki_out {
        let mut ki = KiTables::fit(&logs.games, deck, a.ki_buckets, a.alpha);
        ki.provenance = Some(provenance(&digest));
        let json = ki.to_json().internal("KI tables do not serialize")?;
        std::fs::write(path, json + "\n").config(format!("cannot write {}", path.display()))?;
    }
    eprintln!(
        "fitted {} games: {} table keys -> {}",
        table.games,
        table.counts.len(),
        a.out.display()
    );
    Ok(())
}
