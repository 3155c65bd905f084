//! Card-play tournaments over logged deals.
//!
//! Bidding and declaration are replayed from the log; only card play is
//! played by the competing players. Scores are the soloist's raw game score.
//! An arrangement `XvYZ` has X as soloist and Y, Z as the first and second
//! defender in seat order after the soloist.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::cards::{Card, Seat};
use crate::gamelog::{GameRecord, LogError};
use crate::inference::{InferenceVariant, VariantId};
use crate::player::{choose_move, PlayerConfig, PlayerError};
use crate::rules::{score_game, Action, GameState, Phase, RulesError};
use crate::seeds::derive_seed;
use crate::worlds::{InfoSet, State};

/// Deltas with a p-value at or above this are flagged as not significant.
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum TournamentError {
    #[error("deal {0}: {1}")]
    Log(u64, LogError),
    #[error("deal {0} has no card play (passed in)")]
    NoCardplay(u64),
    #[error(transparent)]
    Rules(#[from] RulesError),
    #[error(transparent)]
    Player(#[from] PlayerError),
    #[error("paired samples need equal lengths of at least 2 (got {0} and {1})")]
    Samples(usize, usize),
    #[error("no deals to play")]
    NoDeals,
}

/// A named determinized card player.
#[derive(Clone, Debug)]
pub struct Player {
    pub name: String,
    pub config: PlayerConfig<f64>,
}

impl Player {
    pub fn new(name: impl Into<String>, config: PlayerConfig<f64>) -> Player {
        Player {
            name: name.into(),
            config,
        }
    }

    /// A cheating player; the true state is filled in at every decision.
    pub fn cheat(name: impl Into<String>, sample_budget: usize, evaluation_budget: usize) -> Player {
        let v = InferenceVariant::cheat(sample_budget, State::default());
        Player::new(name, PlayerConfig::new(v, evaluation_budget))
    }

    /// Card for the seat to move in `g`. A cheating player is handed the true state.
    pub fn choose(&self, g: &GameState, seed: u64) -> Result<Card, PlayerError> {
        let info = InfoSet::observe(g, g.to_move);
        if self.config.inference.id == VariantId::Cheat {
            let mut cfg = self.config.clone();
            cfg.inference.truth = Some(State::from_game(g));
            return choose_move(&info, &cfg, seed);
        }
        choose_move(&info, &self.config, seed)
    }
}

/// Who sits where: soloist plus first and second defender, as indices into
/// the tournament's player pair (0 = A, 1 = B).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arrangement {
    pub soloist: u8,
    pub defenders: [u8; 2],
}

impl Arrangement {
    const fn new(soloist: u8, d1: u8, d2: u8) -> Arrangement {
        Arrangement {
            soloist,
            defenders: [d1, d2],
        }
    }

    pub const PAIRWISE: [Arrangement; 4] = [
        Arrangement::new(0, 1, 1),
        Arrangement::new(1, 0, 0),
        Arrangement::new(0, 0, 0),
        Arrangement::new(1, 1, 1),
    ];

    pub const MIXED: [Arrangement; 4] = [
        Arrangement::new(0, 0, 1),
        Arrangement::new(0, 1, 0),
        Arrangement::new(1, 0, 1),
        Arrangement::new(1, 1, 0),
    ];
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = |i: u8| if i == 0 { 'A' } else { 'B' };
        write!(f, "{}v{}{}", l(self.soloist), l(self.defenders[0]), l(self.defenders[1]))
    }
}

impl std::str::FromStr for Arrangement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let idx = |c: u8| match c {
            b'A' => Ok(0),
            b'B' => Ok(1),
            _ => Err(format!("bad arrangement {s:?}")),
        };
        match s.as_bytes() {
            [a, b'v', b, c] => Ok(Arrangement::new(idx(*a)?, idx(*b)?, idx(*c)?)),
            _ => Err(format!("bad arrangement {s:?}")),
        }
    }
}

/// One played deal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matchup {
    pub deal_id: u64,
    pub soloist_type: String,
    pub defender_types: [String; 2],
    pub soloist: Seat,
    /// Per seat: the soloist's score, and the defenders' shared team score.
    pub scores: [i32; 3],
}

impl Matchup {
    pub fn soloist_score(&self) -> i32 {
        self.scores[self.soloist.index()]
    }

    /// The defenders' shared score, always minus the soloist's.
    pub fn defender_score(&self) -> i32 {
        self.scores[self.soloist.next().index()]
    }
}

fn name_key(name: &str) -> u64 {
    derive_seed(&name.bytes().map(u64::from).collect::<Vec<_>>())
}

/// Seed of one deal under one seating; seatings of identical players share it.
pub fn arrangement_seed(master: u64, deal_id: u64, soloist: &Player, defenders: [&Player; 2]) -> u64 {
    derive_seed(&[
        master,
        deal_id,
        name_key(&soloist.name),
        name_key(&defenders[0].name),
        name_key(&defenders[1].name),
    ])
}

/// Deal id used for seeding and reporting: the logged id or the position.
pub fn deal_id(rec: &GameRecord, index: usize) -> u64 {
    rec.id.unwrap_or(index as u64)
}

/// Plays the card play of `deal` with the given soloist and defenders.
pub fn play_arrangement(
    deal: &GameRecord,
    id: u64,
    soloist: &Player,
    defenders: [&Player; 2],
    master: u64,
) -> Result<Matchup, TournamentError> {
    let mut g = deal.replay_precardplay().map_err(|e| TournamentError::Log(id, e))?;
    if g.phase != Phase::Cardplay {
        return Err(TournamentError::NoCardplay(id));
    }
    let sol = g.soloist.expect("card play has a soloist");
    let seed = arrangement_seed(master, id, soloist, defenders);
    while g.phase == Phase::Cardplay {
        let seat = g.to_move;
        let player = if seat == sol {
            soloist
        } else if seat == sol.next() {
            defenders[0]
        } else {
            defenders[1]
        };
        let decision = derive_seed(&[seed, g.cards_played() as u64]);
        let card = player.choose(&g, decision)?;
        g.apply_mut(Action::PlayCard(card))?;
    }
    let score = score_game(&g)?.score;
    let mut scores = [-score; 3];
    scores[sol.index()] = score;
    Ok(Matchup {
        deal_id: id,
        soloist_type: soloist.name.clone(),
        defender_types: [defenders[0].name.clone(), defenders[1].name.clone()],
        soloist: sol,
        scores,
    })
}

/// Two-sided paired t-test p-value of `x` against `y`.
///
/// Zero variance of the differences gives 1 for a zero mean and 0 otherwise.
pub fn paired_ttest(x: &[f64], y: &[f64]) -> Result<f64, TournamentError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(TournamentError::Samples(x.len(), y.len()));
    }
    let n = x.len() as f64;
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Ok(if mean == 0.0 { 1.0 } else { 0.0 });
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("at least one degree of freedom");
    Ok((2.0 * dist.sf(t.abs())).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Pairwise,
    Sixway,
}

impl Mode {
    pub fn arrangements(self) -> Vec<Arrangement> {
        match self {
            Mode::Pairwise => Arrangement::PAIRWISE.to_vec(),
            Mode::Sixway => Arrangement::PAIRWISE.iter().chain(&Arrangement::MIXED).copied().collect(),
        }
    }
}

/// One finished (deal, arrangement) job; the unit of checkpointing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRow {
    pub deal_id: u64,
    pub arrangement: Arrangement,
    pub soloist_score: i32,
}

/// Per-deal soloist scores of every arrangement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DealScores {
    pub deal_id: u64,
    pub scores: BTreeMap<String, i32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrangementMean {
    pub arrangement: String,
    pub mean_tp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub name: String,
    pub value: f64,
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TournamentReport {
    pub mode: Mode,
    pub players: [String; 2],
    pub n_matches: usize,
    pub arrangements: Vec<ArrangementMean>,
    pub deltas: Vec<Delta>,
    pub games: Vec<DealScores>,
}

/// A delta as `(plus - minus) / divisor` summed over arrangements, tested as
/// a paired comparison of the two sides.
struct DeltaDef {
    name: &'static str,
    plus: &'static [&'static str],
    minus: &'static [&'static str],
    divisor: f64,
}

const PAIRWISE_DELTAS: [DeltaDef; 3] = [
    DeltaDef {
        name: "delta_tp",
        plus: &["AvBB"],
        minus: &["BvAA"],
        divisor: 3.0,
    },
    DeltaDef {
        name: "delta_def",
        plus: &["AvBB", "BvBB"],
        minus: &["AvAA", "BvAA"],
        divisor: 6.0,
    },
    DeltaDef {
        name: "delta_sol",
        plus: &["AvAA", "AvBB"],
        minus: &["BvAA", "BvBB"],
        divisor: 6.0,
    },
];

// each swap term appears once in plus and once in minus
const MIXED_DELTAS: [DeltaDef; 3] = [
    DeltaDef {
        name: "delta_sol_mixed",
        plus: &["AvAB", "AvBA"],
        minus: &["BvAB", "BvBA"],
        divisor: 6.0,
    },
    DeltaDef {
        name: "delta_def_b",
        plus: &["AvAB", "AvBA", "BvAB", "BvBA"],
        minus: &["AvAA", "AvAA", "BvAA", "BvAA"],
        divisor: 12.0,
    },
    DeltaDef {
        name: "delta_def_a",
        plus: &["AvBB", "AvBB", "BvBB", "BvBB"],
        minus: &["AvAB", "AvBA", "BvAB", "BvBA"],
        divisor: 12.0,
    },
];

fn side(games: &[DealScores], names: &[&str]) -> Vec<f64> {
    games
        .iter()
        .map(|g| names.iter().map(|n| f64::from(g.scores[*n])).sum())
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Report statistics from a per-deal score matrix. Each delta is the mean of
/// its per-deal values; p-values come from the paired t-test.
pub fn summarize(mode: Mode, players: [String; 2], games: Vec<DealScores>) -> TournamentReport {
    let arrangements = mode
        .arrangements()
        .into_iter()
        .map(|a| {
            let name = a.to_string();
            ArrangementMean {
                mean_tp: mean(&side(&games, &[name.as_str()])),
                arrangement: name,
            }
        })
        .collect();
    let defs: Vec<&DeltaDef> = match mode {
        Mode::Pairwise => PAIRWISE_DELTAS.iter().collect(),
        Mode::Sixway => PAIRWISE_DELTAS.iter().chain(&MIXED_DELTAS).collect(),
    };
    let deltas = defs
        .into_iter()
        .map(|d| {
            let plus = side(&games, d.plus);
            let minus = side(&games, d.minus);
            let per_deal: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / d.divisor).collect();
            let p_value = paired_ttest(&plus, &minus).unwrap_or(1.0);
            Delta {
                name: d.name.to_string(),
                value: mean(&per_deal),
                p_value,
                significant: p_value < SIGNIFICANCE,
            }
        })
        .collect();
    TournamentReport {
        mode,
        players,
        n_matches: games.len(),
        arrangements,
        deltas,
        games,
    }
}

/// Plays every (deal, arrangement) job not in `done`, handing finished rows
/// to `on_row` in job order, then summarizes all rows.
///
/// Jobs run in parallel in blocks of `block` jobs; `on_row` sees each block
/// only once it is complete, so an interrupted run loses at most one block.
pub fn run_tournament<E: From<TournamentError>>(
    mode: Mode,
    players: [&Player; 2],
    deals: &[GameRecord],
    master: u64,
    done: &[ResultRow],
    block: usize,
    mut on_row: impl FnMut(&ResultRow) -> Result<(), E>,
) -> Result<TournamentReport, E> {
    if deals.is_empty() {
        return Err(TournamentError::NoDeals.into());
    }
    let mut scores: BTreeMap<(u64, Arrangement), i32> =
        done.iter().map(|r| ((r.deal_id, r.arrangement), r.soloist_score)).collect();
    let jobs: Vec<(usize, u64, Arrangement)> = deals
        .iter()
        .enumerate()
        .flat_map(|(i, d)| {
            let id = deal_id(d, i);
            mode.arrangements().into_iter().map(move |a| (i, id, a))
        })
        .filter(|(_, id, a)| !scores.contains_key(&(*id, *a)))
        .collect();
    for chunk in jobs.chunks(block.max(1)) {
        let rows: Vec<Result<ResultRow, TournamentError>> = chunk
            .par_iter()
            .map(|&(i, id, a)| {
                let sol = players[a.soloist as usize];
                let defs = [players[a.defenders[0] as usize], players[a.defenders[1] as usize]];
                let m = play_arrangement(&deals[i], id, sol, defs, master)?;
                Ok(ResultRow {
                    deal_id: id,
                    arrangement: a,
                    soloist_score: m.soloist_score(),
                })
            })
            .collect();
        for row in rows {
            let row = row?;
            on_row(&row)?;
            scores.insert((row.deal_id, row.arrangement), row.soloist_score);
        }
    }
    let games = deals
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let id = deal_id(d, i);
            DealScores {
                deal_id: id,
                scores: mode
                    .arrangements()
                    .into_iter()
                    .map(|a| (a.to_string(), scores[&(id, a)]))
                    .collect(),
            }
        })
        .collect();
    Ok(summarize(mode, [players[0].name.clone(), players[1].name.clone()], games))
}

/// The four pairwise arrangements of every deal.
pub fn run_pairwise(a: &Player, b: &Player, deals: &[GameRecord], master: u64) -> Result<TournamentReport, TournamentError> {
    run_tournament(Mode::Pairwise, [a, b], deals, master, &[], 256, |_| Ok(()))
}

/// Pairwise plus the four mixed-defense arrangements of every deal.
pub fn run_sixway(a: &Player, b: &Player, deals: &[GameRecord], master: u64) -> Result<TournamentReport, TournamentError> {
    run_tournament(Mode::Sixway, [a, b], deals, master, &[], 256, |_| Ok(()))
}

/// Deals that reach card play, with their ids.
pub fn playable_deals(records: &[GameRecord]) -> Vec<GameRecord> {
    records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.declaration.is_some())
        .map(|(i, r)| GameRecord {
            id: Some(deal_id(r, i)),
            ..r.clone()
        })
        .collect()
}

/// Per-arrangement means and deltas as CSV rows, significance-flagged with
/// `*` when p >= 0.05.
pub fn report_csv(report: &TournamentReport) -> String {
    let mut out = String::from("kind,name,value,p_value,flag\n");
    for a in &report.arrangements {
        out += &format!("arrangement,{},{},,\n", a.arrangement, a.mean_tp);
    }
    for d in &report.deltas {
        let flag = if d.significant { "" } else { "*" };
        out += &format!("delta,{},{},{},{}\n", d.name, d.value, d.p_value, flag);
    }
    out
}
