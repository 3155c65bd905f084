use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use skatinfer::gamelog::Provenance;
use skatinfer::metrics::{instrument_game, tssr_curve, write_curve_csv, Injection, TssrSample};
use skatinfer::tournament::deal_id;
use skatinfer::DeckKind;

use super::create;
use crate::config::{log_deck, read_logs, VariantIdentity, VariantSpec};
use crate::error::{Classify, Failure};
use crate::provenance::{config_digest, csv_comment, provenance};
use crate::Global;

pub const SAMPLES_FORMAT: &str = "skatinfer-tssr-samples/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InjectionArg {
    Binomial,
    Hypergeometric,
}

impl From<InjectionArg> for Injection {
    fn from(a: InjectionArg) -> Injection {
        match a {
            InjectionArg::Binomial => Injection::Binomial,
            InjectionArg::Hypergeometric => Injection::Hypergeometric,
        }
    }
}

#[derive(Debug, Args)]
pub struct TssrArgs {
    /// Game log to instrument.
    #[arg(long)]
    pub logs: PathBuf,
    /// Comma-separated variants, e.g. `NI,CLI,PIF,Cheat`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub variants: Vec<String>,
    /// Sample budget of every variant; smaller information sets are enumerated.
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
    /// Policy for PI, PIF and posterior CLI marginals.
    #[arg(long)]
    pub policy: Option<String>,
    /// CLI marginal source: `posterior` or `hand_size`.
    #[arg(long)]
    pub marginals: Option<String>,
    #[arg(long)]
    pub marginal_budget: Option<usize>,
    #[arg(long)]
    pub ki_tables: Option<String>,
    /// Multiplicity model of the sampled estimator.
    #[arg(long, value_enum, default_value = "binomial")]
    pub injection: InjectionArg,
    /// Use at most this many games that reach card play.
    #[arg(long)]
    pub games: Option<usize>,
    /// Output curve CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write every per-decision sample (JSON lines).
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    deck: DeckKind,
    seed: u64,
    variants: Vec<VariantIdentity>,
    injection: Injection,
    games: Option<usize>,
    logs: &'a str,
}

#[derive(Serialize)]
struct SamplesHeader<'a> {
    format: &'static str,
    provenance: &'a Provenance,
}

pub fn run(g: &Global, a: &TssrArgs) -> Result<(), Failure> {
    let logs = read_logs(&a.logs, g.deck())?;
    let deck = log_deck(g.deck(), &logs.games);
    let mut variants = Vec::new();
    let mut identities = Vec::new();
    for name in &a.variants {
        let spec = VariantSpec {
            variant: name.trim().to_string(),
            sample_budget: a.budget,
            policy: a.policy.clone(),
            marginals: a.marginals.clone(),
            marginal_budget: a.marginal_budget,
            ki_tables: a.ki_tables.clone(),
        };
        let (v, id) = spec.build(Path::new(""), deck)?;
        variants.push(v);
        identities.push(id);
    }
    let injection = Injection::from(a.injection);
    let digest = config_digest(&RunConfig {
        command: "tssr",
        deck,
        seed: g.seed,
        variants: identities,
        injection,
        games: a.games,
        logs: &logs.digest,
    });
    let prov = provenance(&digest);

    let games: Vec<(u64, &_)> = logs
        .games
        .iter()
        .enumerate()
        .filter(|(_, r)| r.declaration.is_some())
        .map(|(i, r)| (deal_id(r, i), r))
        .take(a.games.unwrap_or(usize::MAX))
        .collect();
    let per_game: Vec<Vec<TssrSample>> = games
        .par_iter()
        .map(|&(id, rec)| {
            let end = rec.replay().data(format!("game {id} does not replay"))?;
            instrument_game(&end, id, &variants, injection, g.seed).internal(format!("instrumenting game {id}"))
        })
        .collect::<Result<_, Failure>>()?;
    let samples: Vec<TssrSample> = per_game.into_iter().flatten().collect();
    if let Some(path) = &a.samples {
        let mut w = create(path)?;
        let what = format!("cannot write {}", path.display());
        let header = SamplesHeader {
            format: SAMPLES_FORMAT,
            provenance: &prov,
        };
        serde_json::to_writer(&mut w, &header).config(&what)?;
        writeln!(w).config(&what)?;
        for s in &samples {
            serde_json::to_writer(&mut w, s).config(&what)?;
            writeln!(w).config(&what)?;
        }
        w.flush().config(&what)?;
    }
    let curve = tssr_curve(&samples);
    let mut w = create(&a.out)?;
    let what = format!("cannot write {}", a.out.display());
    w.write_all(csv_comment(&prov).as_bytes()).config(&what)?;
    write_curve_csv(&mut w, &curve).config(&what)?;
    w.flush().config(&what)?;
    eprintln!(
        "{} games, {} samples, {} curve points -> {}",
        games.len(),
        samples.len(),
        curve.len(),
        a.out.display()
    );
    Ok(())
}
