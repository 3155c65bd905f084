use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use skatinfer::gamelog::Provenance;
use skatinfer::tournament::{playable_deals, report_csv, run_tournament, Mode, ResultRow, TournamentError, TournamentReport};
use skatinfer::DeckKind;

use crate::config::{log_deck, parent_dir, read_logs, resolve, Manifest, PlayerIdentity};
use crate::error::{Classify, Failure};
use crate::provenance::{config_digest, csv_comment, provenance};
use crate::Global;

pub const CHECKPOINT_FORMAT: &str = "skatinfer-checkpoint/1";

#[derive(Debug, Args)]
pub struct TournamentArgs {
    /// Tournament manifest (JSON).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for `report.json`, `report.csv` and the default checkpoint.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Jobs run in parallel per checkpointed block.
    #[arg(long, default_value_t = 64)]
    pub block: usize,
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    mode: Mode,
    deck: DeckKind,
    master_seed: u64,
    matches: usize,
    deals: &'a str,
    players: &'a [PlayerIdentity; 2],
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    format: String,
    provenance: Provenance,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    provenance: &'a Provenance,
    report: &'a TournamentReport,
}

impl From<TournamentError> for Failure {
    fn from(e: TournamentError) -> Failure {
        match e {
            TournamentError::Log(..) | TournamentError::NoCardplay(_) | TournamentError::NoDeals => Failure::Data(e.into()),
            e => Failure::Internal(e.into()),
        }
    }
}

/// Rows of an existing checkpoint. A torn last line from an interrupted
/// write is dropped and cut from the file.
fn load_checkpoint(path: &Path, digest: &str) -> Result<Vec<ResultRow>, Failure> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e).config(format!("cannot read checkpoint {}", path.display())),
    };
    let repair = |len: usize| -> Result<(), Failure> {
        let what = format!("cannot repair checkpoint {}", path.display());
        let f = OpenOptions::new().write(true).open(path).config(&what)?;
        f.set_len(len as u64).config(&what)
    };
    if !text.contains('\n') {
        // nothing past a torn header survives
        repair(0)?;
        return Ok(Vec::new());
    }
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    let header: CheckpointHeader = serde_json::from_str(lines[0].trim_end())
        .data(format!("checkpoint {} has no valid header", path.display()))?;
    if header.format != CHECKPOINT_FORMAT || header.provenance.config_sha256 != digest {
        return Err(Failure::config(format!(
            "checkpoint {} belongs to a different configuration; remove it or change the output directory",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    let mut valid = lines[0].len();
    for (i, line) in lines.iter().enumerate().skip(1) {
        if !line.ends_with('\n') {
            // only the last piece can lack a newline
            log::warn!("dropping a torn final checkpoint line");
            break;
        }
        match serde_json::from_str::<ResultRow>(line.trim_end()) {
            Ok(r) => rows.push(r),
            Err(_) if i + 1 == lines.len() => {
                log::warn!("dropping a torn final checkpoint line");
                break;
            }
            Err(e) => return Err(e).data(format!("corrupt checkpoint {}", path.display())),
        }
        valid += line.len();
    }
    if valid < text.len() {
        repair(valid)?;
    }
    Ok(rows)
}

fn open_checkpoint(path: &Path, prov: &Provenance, fresh: bool) -> Result<File, Failure> {
    let what = format!("cannot write checkpoint {}", path.display());
    let mut f = OpenOptions::new().create(true).append(true).open(path).config(&what)?;
    if fresh {
        let header = CheckpointHeader {
            format: CHECKPOINT_FORMAT.to_string(),
            provenance: prov.clone(),
        };
        let mut line = serde_json::to_vec(&header).internal("checkpoint header does not serialize")?;
        line.push(b'\n');
        f.write_all(&line).config(&what)?;
    }
    Ok(f)
}

pub fn run(g: &Global, a: &TournamentArgs) -> Result<(), Failure> {
    let manifest = Manifest::load(&a.manifest)?;
    let base = parent_dir(&a.manifest);
    let logs = read_logs(&resolve(&base, &manifest.deals), g.deck())?;
    let deck = log_deck(g.deck(), &logs.games);
    let mut deals = playable_deals(&logs.games);
    if let Some(m) = manifest.matches {
        if m > deals.len() {
            return Err(Failure::data(format!(
                "manifest asks for {m} matches but the deal log has {} playable deals",
                deals.len()
            )));
        }
        deals.truncate(m);
    }
    if deals.is_empty() {
        return Err(Failure::data("the deal log has no playable deals"));
    }
    let mut players = Vec::new();
    let mut identities = Vec::new();
    for r in &manifest.players {
        let (spec, dir) = r.load(&base)?;
        let (p, id) = spec.build(&dir, deck)?;
        players.push(p);
        identities.push(id);
    }
    let identities: [PlayerIdentity; 2] = identities.try_into().expect("two players");
    if identities[0].name == identities[1].name && identities[0] != identities[1] {
        return Err(Failure::config(format!(
            "two different players share the name {:?}; seeds derive from names",
            identities[0].name
        )));
    }
    if a.block == 0 {
        return Err(Failure::config("--block must be positive"));
    }
    let master = manifest.master_seed.unwrap_or(g.seed);
    let digest = config_digest(&RunConfig {
        command: "tournament",
        mode: manifest.mode,
        deck,
        master_seed: master,
        matches: deals.len(),
        deals: &logs.digest,
        players: &identities,
    });
    let prov = provenance(&digest);

    fs::create_dir_all(&a.out_dir).config(format!("cannot create {}", a.out_dir.display()))?;
    let checkpoint = match &manifest.checkpoint {
        Some(p) => resolve(&base, p),
        None => a.out_dir.join("checkpoint.jsonl"),
    };
    let done = load_checkpoint(&checkpoint, &digest)?;
    let fresh = fs::metadata(&checkpoint).map(|m| m.len() == 0).unwrap_or(true);
    let mut ledger = open_checkpoint(&checkpoint, &prov, fresh)?;
    if !done.is_empty() {
        eprintln!("resuming from {} finished rows", done.len());
    }
    let report = run_tournament::<Failure>(
        manifest.mode,
        [&players[0], &players[1]],
        &deals,
        master,
        &done,
        a.block,
        |row| {
            let mut line = serde_json::to_vec(row).internal("result rows serialize")?;
            line.push(b'\n');
            ledger
                .write_all(&line)
                .config(format!("cannot write checkpoint {}", checkpoint.display()))
        },
    )?;
    ledger
        .sync_all()
        .config(format!("cannot sync checkpoint {}", checkpoint.display()))?;

    let json_path = a.out_dir.join("report.json");
    let mut json = serde_json::to_vec_pretty(&ReportFile {
        provenance: &prov,
        report: &report,
    })
    .internal("report does not serialize")?;
    json.push(b'\n');
    fs::write(&json_path, json).config(format!("cannot write {}", json_path.display()))?;
    let csv = csv_comment(&prov) + &report_csv(&report);
    let csv_path = a.out_dir.join("report.csv");
    fs::write(&csv_path, &csv).config(format!("cannot write {}", csv_path.display()))?;
    print!("{csv}");
    Ok(())
}
