use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use skatinfer::gamelog::Provenance;
use skatinfer::inference::{estimate_dist, VariantId};
use skatinfer::metrics::tssr_direct;
use skatinfer::rules::{Action, Phase};
use skatinfer::seeds::derive_seed;
use skatinfer::tournament::deal_id;
use skatinfer::worlds::{Configuration, InfoSet, State, WorldSpace};
use skatinfer::{Card, Deck, DeckKind, GameState, Seat};

use super::emit;
use crate::config::{log_deck, read_logs, VariantIdentity, VariantSpec};
use crate::error::{Classify, Failure};
use crate::provenance::{config_digest, provenance};
use crate::Global;

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Game log holding the game.
    #[arg(long)]
    pub logs: PathBuf,
    /// Game id (or line index for records without one).
    #[arg(long)]
    pub game: u64,
    /// Inference variant to trace.
    #[arg(long)]
    pub variant: String,
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub marginals: Option<String>,
    #[arg(long)]
    pub marginal_budget: Option<usize>,
    #[arg(long)]
    pub ki_tables: Option<String>,
    /// Only decisions of this seat (0, 1 or 2).
    #[arg(long)]
    pub seat: Option<u8>,
    /// Heaviest worlds listed per decision.
    #[arg(long, default_value_t = 5)]
    pub top: usize,
    /// Output JSON; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    deck: DeckKind,
    seed: u64,
    game: u64,
    variant: &'a VariantIdentity,
    seat: Option<u8>,
    top: usize,
    logs: &'a str,
}

#[derive(Serialize)]
struct WeightedWorld {
    /// Per card index: hand digit, `s` for the skat, `-` once played, `.` outside the deck.
    world: String,
    weight: f64,
    truth: bool,
}

#[derive(Serialize)]
struct Decision {
    card_number: usize,
    seat: Seat,
    played: Card,
    configurations: u64,
    states: u64,
    sampled: usize,
    positive: usize,
    entropy: f64,
    truth_weight: f64,
    /// Present when the whole information set was weighed.
    tssr: Option<f64>,
    zero_mass_fallback: bool,
    top: Vec<WeightedWorld>,
}

#[derive(Serialize)]
struct Trace<'a> {
    provenance: &'a Provenance,
    game: u64,
    variant: String,
    decisions: Vec<Decision>,
}

pub fn run(g: &Global, a: &TraceArgs) -> Result<(), Failure> {
    let logs = read_logs(&a.logs, g.deck())?;
    let deck = log_deck(g.deck(), &logs.games);
    if a.seat.is_some_and(|s| s > 2) {
        return Err(Failure::config("--seat must be 0, 1 or 2"));
    }
    let spec = VariantSpec {
        variant: a.variant.clone(),
        sample_budget: a.budget,
        policy: a.policy.clone(),
        marginals: a.marginals.clone(),
        marginal_budget: a.marginal_budget,
        ki_tables: a.ki_tables.clone(),
    };
    let (variant, identity) = spec.build(Path::new(""), deck)?;
    let rec = logs
        .games
        .iter()
        .enumerate()
        .find(|(i, r)| deal_id(r, *i) == a.game)
        .map(|(_, r)| r)
        .ok_or_else(|| Failure::data(format!("no game {} in {}", a.game, a.logs.display())))?;
    let digest = config_digest(&RunConfig {
        command: "trace-inference",
        deck,
        seed: g.seed,
        game: a.game,
        variant: &identity,
        seat: a.seat,
        top: a.top,
        logs: &logs.digest,
    });
    let prov = provenance(&digest);

    let end = rec.replay().data(format!("game {} does not replay", a.game))?;
    let mut state = GameState::from_deal(end.deck, end.dealt, end.dealt_skat).internal("logged deal")?;
    let mut decisions = Vec::new();
    for &(seat, action) in &end.history {
        if let (Phase::Cardplay, Action::PlayCard(played)) = (state.phase, action) {
            if a.seat.is_none_or(|s| s == seat.0) {
                decisions.push(trace_decision(&state, seat, played, &variant, g.seed, a)?);
            }
        }
        state.apply_mut(action).internal("logged action")?;
    }
    let trace = Trace {
        provenance: &prov,
        game: a.game,
        variant: variant.label(),
        decisions,
    };
    let mut out = serde_json::to_vec_pretty(&trace).internal("trace does not serialize")?;
    out.push(b'\n');
    emit(a.out.as_deref(), &out)
}

fn encode_world(deck: &Deck, c: &Configuration) -> String {
    (0..32u8)
        .map(|i| {
            let card = Card::from_index(i);
            if !deck.cards.contains(card) {
                '.'
            } else if c.skat.contains(card) {
                's'
            } else {
                match c.hands.iter().position(|h| h.contains(card)) {
                    Some(s) => (b'0' + s as u8) as char,
                    None => '-',
                }
            }
        })
        .collect()
}

fn trace_decision(
    state: &GameState,
    seat: Seat,
    played: Card,
    variant: &skatinfer::InferenceVariantF64,
    seed: u64,
    a: &TraceArgs,
) -> Result<Decision, Failure> {
    let info = InfoSet::observe(state, seat);
    let space = WorldSpace::new(&info);
    let truth = State::from_game(state);
    let mut v = variant.clone();
    if v.id == VariantId::Cheat {
        v.truth = Some(truth);
    }
    let card_number = info.cards_played();
    let w = estimate_dist(&info, &v, derive_seed(&[seed, a.game, card_number as u64]))
        .internal(format!("inference at card {card_number}"))?;
    let tssr = if (w.sampled_count as u64) >= w.total_count {
        Some(tssr_direct(&w, &info, &truth.config).internal("direct TSSR")?)
    } else {
        None
    };
    let mut configs = w.configurations();
    // heaviest first, ties in world order
    configs.sort_by(|x, y| y.1.total_cmp(&x.1));
    let top = configs
        .iter()
        .take(a.top)
        .map(|(c, weight)| WeightedWorld {
            world: encode_world(&info.deck, c),
            weight: *weight,
            truth: *c == truth.config,
        })
        .collect();
    Ok(Decision {
        card_number,
        seat,
        played,
        configurations: space.count_configurations(),
        states: space.count_states(),
        sampled: w.sampled_count,
        positive: w.positive_count(),
        entropy: w.entropy(),
        truth_weight: w.config_weight(&truth.config),
        tssr,
        zero_mass_fallback: w.zero_mass_fallback,
        top,
    })
}
