//! Exact Bayes posteriors by brute-force enumeration, for MiniSkat-sized cases.

use std::collections::HashMap;
use std::sync::OnceLock;

use skatinfer::cards::Card;
use skatinfer::policy::{Bucketing, Choice, DecisionContext, DecisionKind, HeuristicPolicy, PolicyModel, TablePolicy};
use skatinfer::rules::{bid_ladder, max_bid_action, Action, Auction, AuctionOutcome, AuctionStage, GameState};
use skatinfer::selfplay::generate;
use skatinfer::worlds::{InfoSet, Observed, State};
use skatinfer::{Deck, DeckKind, Hand, Seat};

/// A smoothed table fitted on heuristic games; every choice has positive probability.
pub fn mini_table() -> &'static TablePolicy {
    static T: OnceLock<TablePolicy> = OnceLock::new();
    T.get_or_init(|| {
        let logs = generate(&HeuristicPolicy::default(), Deck::mini(), 2000, 5);
        TablePolicy::fit(&logs, DeckKind::Mini, Bucketing::Standard, 1.0).unwrap()
    })
}

/// Views of the player about to act, taken along the game, with the true state.
pub fn viewer_points(end: &GameState) -> Vec<(InfoSet, State)> {
    let mut g = GameState::from_deal(end.deck, end.dealt, end.dealt_skat).unwrap();
    let mut out = Vec::new();
    for &(seat, a) in &end.history {
        out.push((InfoSet::observe(&g, seat), State::from_game(&g)));
        g.apply_mut(a).unwrap();
    }
    out
}

pub fn subsets(cards: &[Card], k: usize) -> Vec<Hand> {
    if k == 0 {
        return vec![Hand::EMPTY];
    }
    if cards.len() < k {
        return Vec::new();
    }
    let mut out: Vec<Hand> = subsets(&cards[1..], k - 1).into_iter().map(|h| h.with(cards[0])).collect();
    out.extend(subsets(&cards[1..], k));
    out
}

pub fn sorted(pair: [Card; 2]) -> [Card; 2] {
    let mut p = pair;
    p.sort();
    p
}

/// Exact Bayes posterior over states, by enumerating every deal of the cards the
/// viewer was not dealt (and every hidden discard) and multiplying the generating
/// policy's probability of every observed decision, the viewer's included.
/// Auction stages are scored by summing over all pairs of stage levels whose
/// max-bid play reproduces the observed stage.
pub struct BruteForce<'a> {
    info: &'a InfoSet,
    policy: &'a dyn PolicyModel<f64>,
    stages: Vec<(usize, usize, Vec<(u8, u8)>)>,
    after_auction: usize,
}

impl<'a> BruteForce<'a> {
    pub fn new(info: &'a InfoSet, policy: &'a dyn PolicyModel<f64>) -> Self {
        let ladder = bid_ladder(&info.deck);
        let n = ladder.len() as u8;
        let actions: Vec<(Seat, Action)> = info
            .history
            .iter()
            .map(|&(s, o)| match o {
                Observed::Seen(a) => (s, a),
                Observed::HiddenDiscard => (s, Action::Pass),
            })
            .collect();
        let mut auction = Auction::default();
        let mut idx = 0;
        let mut stages = Vec::new();
        let mut done = false;
        while !done && idx < actions.len() {
            let start_auction = auction;
            let start = idx;
            let first = start_auction.stage == AuctionStage::First;
            while idx < actions.len() {
                let out = auction.apply(actions[idx].1, ladder).unwrap();
                idx += 1;
                if out != AuctionOutcome::Continue {
                    done = true;
                    break;
                }
                if first && auction.stage != AuctionStage::First {
                    break;
                }
            }
            let bidder = start_auction.bidder();
            let mut pairs = Vec::new();
            for lb in 0..=n {
                for la in 0..=n {
                    let mut a = start_auction;
                    let ok = actions[start..idx].iter().all(|&(seat, act)| {
                        let level = if seat == bidder { lb } else { la };
                        let matches = a.to_move() == seat && max_bid_action(&a, level, ladder) == act;
                        if matches {
                            a.apply(act, ladder).unwrap();
                        }
                        matches
                    });
                    if ok {
                        pairs.push((lb, la));
                    }
                }
            }
            stages.push((start, idx, pairs));
        }
        BruteForce {
            info,
            policy,
            stages,
            after_auction: idx,
        }
    }

    fn prob(&self, kind: DecisionKind, g: &GameState, actor: Seat, choice: Choice) -> f64 {
        let ctx = DecisionContext::new(kind, g, actor).unwrap();
        self.policy.probability(&ctx, &choice)
    }

    pub fn posterior(&self) -> HashMap<State, f64> {
        let info = self.info;
        let deck = info.deck;
        let v = info.viewer.index();
        let rest = deck.cards.minus(info.own_dealt).cards();
        let others: Vec<usize> = (0..3).filter(|&s| s != v).collect();
        let mut out = HashMap::new();
        for ha in subsets(&rest, deck.hand_size) {
            let rem: Vec<Card> = rest.iter().copied().filter(|&c| !ha.contains(c)).collect();
            for hb in subsets(&rem, deck.hand_size) {
                let skat = Hand::from_cards(rem.iter().copied()).minus(hb);
                let mut hands = [Hand::EMPTY; 3];
                hands[v] = info.own_dealt;
                hands[others[0]] = ha;
                hands[others[1]] = hb;
                let plausible = others.iter().all(|&s| {
                    let mut may = hands[s];
                    if info.soloist == Some(Seat(s as u8)) && info.picked_up {
                        may = may.union(skat);
                    }
                    info.played[s].is_subset(may)
                });
                if plausible {
                    self.deal(hands, skat, &mut out);
                }
            }
        }
        let total: f64 = out.values().sum();
        for p in out.values_mut() {
            *p /= total;
        }
        out
    }

    fn deal(&self, hands: [Hand; 3], skat: Hand, out: &mut HashMap<State, f64>) {
        let mut g = GameState::from_deal(self.info.deck, hands, skat).unwrap();
        let mut p = 1.0;
        for (start, end, pairs) in &self.stages {
            let kinds = match g.auction.stage {
                AuctionStage::First => (DecisionKind::MaxBidBidder, DecisionKind::MaxBidAnswerer),
                _ => (DecisionKind::MaxBidContinue, DecisionKind::MaxBidContinueAnswer),
            };
            let db = self
                .policy
                .distribution(&DecisionContext::new(kinds.0, &g, g.auction.bidder()).unwrap());
            let da = self
                .policy
                .distribution(&DecisionContext::new(kinds.1, &g, g.auction.answerer()).unwrap());
            p *= pairs
                .iter()
                .map(|&(lb, la)| db[lb as usize] * da[la as usize])
                .sum::<f64>();
            for &(_, o) in &self.info.history[*start..*end] {
                let Observed::Seen(a) = o else { unreachable!() };
                g.apply_mut(a).unwrap();
            }
        }
        if p > 0.0 {
            self.rest(g, p, self.after_auction, out);
        }
    }

    fn discard_factor(&self, g: &GameState, seat: Seat, pair: [Card; 2], i: usize) -> f64 {
        let ctx = DecisionContext::new(DecisionKind::DiscardAndDeclare, g, seat).unwrap();
        match self.info.history.get(i + 1) {
            Some(&(_, Observed::Seen(Action::Declare(game)))) => self.policy.probability(
                &ctx,
                &Choice::Declare {
                    discard: Some(pair),
                    game,
                },
            ),
            _ => {
                let dist = self.policy.distribution(&ctx);
                ctx.legal_choices()
                    .iter()
                    .zip(dist)
                    .filter(|(c, _)| matches!(c, Choice::Declare { discard: Some(d), .. } if *d == pair))
                    .map(|(_, p)| p)
                    .sum()
            }
        }
    }

    fn rest(&self, mut g: GameState, mut p: f64, from: usize, out: &mut HashMap<State, f64>) {
        let history = &self.info.history;
        for i in from..history.len() {
            let (seat, o) = history[i];
            let a = match o {
                Observed::HiddenDiscard => {
                    for pair in subsets(&g.hands[seat.index()].cards(), 2) {
                        let c = pair.cards();
                        let pair = [c[0], c[1]];
                        let f = self.discard_factor(&g, seat, pair, i);
                        let mut g2 = g.clone();
                        if f > 0.0 && g2.apply_mut(Action::Discard(pair)).is_ok() {
                            self.rest(g2, p * f, i + 1, out);
                        }
                    }
                    return;
                }
                Observed::Seen(a) => a,
            };
            p *= match a {
                Action::PickupSkat => self.prob(DecisionKind::PickupOrHand, &g, seat, Choice::Pickup),
                Action::DeclareHand => self.prob(DecisionKind::PickupOrHand, &g, seat, Choice::Hand),
                Action::Discard(pair) => self.discard_factor(&g, seat, sorted(pair), i),
                Action::Declare(game) if !g.picked_up => self.prob(
                    DecisionKind::DiscardAndDeclare,
                    &g,
                    seat,
                    Choice::Declare { discard: None, game },
                ),
                Action::Declare(_) => 1.0,
                Action::PlayCard(c) => {
                    if !g.playable().contains(c) {
                        return;
                    }
                    self.prob(DecisionKind::PlayCard, &g, seat, Choice::Play(c))
                }
                _ => unreachable!("bids are scored per stage"),
            };
            if p == 0.0 || g.apply_mut(a).is_err() {
                return;
            }
        }
        if InfoSet::observe(&g, self.info.viewer) == *self.info {
            *out.entry(State::from_game(&g)).or_default() += p;
        }
    }
}
