//! Double-dummy evaluation of open-handed card play.
//!
//! Suit and grand games are solved for the soloist's exact final card points
//! (skat included) with the defenders as one minimizing side. Null games are
//! solved for a win indicator. The search is fail-soft alpha-beta with a
//! transposition table over trick-start positions.

use std::collections::HashMap;

use arrayvec::ArrayVec;

use crate::cards::{Card, Deck, Hand, Seat};
use crate::rules::{trick_winner, GameKind, GameState, GameType, Phase, TRUMP_CLASS};

/// A fully revealed position in card play.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenState {
    pub deck: Deck,
    pub hands: [Hand; 3],
    pub current_trick: ArrayVec<(Seat, Card), 3>,
    pub to_move: Seat,
    pub game: GameType,
    pub soloist: Seat,
    /// Card points banked so far by soloist (skat included) and defenders.
    pub points: [u16; 2],
    /// Whether the soloist has taken a trick (decides null games).
    pub soloist_took_trick: bool,
}

impl OpenState {
    /// The open position of a game in card play.
    pub fn from_game(g: &GameState) -> Option<OpenState> {
        if g.phase != Phase::Cardplay {
            return None;
        }
        Some(OpenState {
            deck: g.deck,
            hands: g.hands,
            current_trick: g.current_trick.clone(),
            to_move: g.to_move,
            game: g.declaration?,
            soloist: g.soloist?,
            points: [g.card_points[0] + g.skat.points(), g.card_points[1]],
            soloist_took_trick: g.tricks_won[0] > 0,
        })
    }

    pub fn is_null(&self) -> bool {
        self.game.kind.is_null()
    }

    /// Cards the player to move may play.
    pub fn playable(&self) -> Hand {
        let hand = self.hands[self.to_move.index()];
        let Some(&(_, led)) = self.current_trick.first() else {
            return hand;
        };
        let kind = self.game.kind;
        let follow = hand.intersect(kind.class_mask(kind.class(led), &self.deck));
        if follow.is_empty() {
            hand
        } else {
            follow
        }
    }

    pub fn cards_left(&self) -> usize {
        self.hands.iter().map(|h| h.len()).sum()
    }

    /// Plays one card, completing the trick when it is the third.
    pub fn play(&mut self, card: Card) {
        let seat = self.to_move;
        self.hands[seat.index()].remove(card);
        self.current_trick.push((seat, card));
        if self.current_trick.len() < 3 {
            self.to_move = seat.next();
            return;
        }
        let t = [self.current_trick[0], self.current_trick[1], self.current_trick[2]];
        let winner = trick_winner(&t, self.game.kind);
        let party = usize::from(winner != self.soloist);
        self.points[party] += t.iter().map(|(_, c)| c.points()).sum::<u16>();
        if party == 0 {
            self.soloist_took_trick = true;
        }
        self.current_trick.clear();
        self.to_move = winner;
    }

    /// Whether no further play can change the value.
    pub fn is_over(&self) -> bool {
        (self.is_null() && self.soloist_took_trick) || (self.cards_left() == 0 && self.current_trick.is_empty())
    }

    /// Value of a finished position: soloist points, or 1/0 for a won/lost null game.
    pub fn final_value(&self) -> u16 {
        if self.is_null() {
            u16::from(!self.soloist_took_trick)
        } else {
            self.points[0]
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub tt_hits: u64,
    /// Deepest ply reached below the root.
    pub depth: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub transposition_table: bool,
    pub move_ordering: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            transposition_table: true,
            move_ordering: true,
        }
    }
}

/// Bounds on the points still to come for the soloist from a trick start.
#[derive(Clone, Copy, Debug)]
struct Entry {
    lo: u16,
    hi: u16,
    best: Option<Card>,
}

type Key = (u32, u32, u32, u8);

/// One search instance with its own transposition table.
#[derive(Debug)]
pub struct Solver {
    config: SolverConfig,
    tt: HashMap<Key, Entry>,
    stats: SearchStats,
    /// Game the table belongs to; a different game clears it.
    tt_game: Option<(GameType, Seat)>,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(SolverConfig::default())
    }
}

/// Search position: the open state minus the banked points, which never
/// influence future play.
struct Node {
    kind: GameKind,
    masks: [Hand; 5],
    soloist: Seat,
    null: bool,
    hands: [Hand; 3],
    trick: ArrayVec<(Seat, Card), 3>,
    to_move: Seat,
}

impl Node {
    fn playable(&self) -> Hand {
        let hand = self.hands[self.to_move.index()];
        match self.trick.first() {
            None => hand,
            Some(&(_, led)) => {
                let follow = hand.intersect(self.masks[self.kind.class(led) as usize]);
                if follow.is_empty() {
                    hand
                } else {
                    follow
                }
            }
        }
    }
}

impl Solver {
    pub fn new(config: SolverConfig) -> Solver {
        Solver {
            config,
            tt: HashMap::new(),
            stats: SearchStats::default(),
            tt_game: None,
        }
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = SearchStats::default();
    }

    fn node(&mut self, s: &OpenState) -> Node {
        let kind = s.game.kind;
        if self.tt_game != Some((s.game, s.soloist)) {
            self.tt.clear();
            self.tt_game = Some((s.game, s.soloist));
        }
        Node {
            kind,
            masks: [0, 1, 2, 3, TRUMP_CLASS].map(|c| kind.class_mask(c, &s.deck)),
            soloist: s.soloist,
            null: kind.is_null(),
            hands: s.hands,
            trick: s.current_trick.clone(),
            to_move: s.to_move,
        }
    }

    /// Exact value of `s`: the soloist's final card points (suit and grand) or
    /// 1 for a won and 0 for a lost null game.
    pub fn solve(&mut self, s: &OpenState) -> u16 {
        if s.is_over() {
            return s.final_value();
        }
        let mut n = self.node(s);
        if s.is_null() {
            self.search(&mut n, 0, 1, 0)
        } else {
            let remaining = s.deck.total_points() - s.points[0] - s.points[1];
            s.points[0] + self.search(&mut n, 0, remaining, 0)
        }
    }

    /// Value of every playable card, ascending by card.
    pub fn action_values(&mut self, s: &OpenState) -> Vec<(Card, u16)> {
        s.playable()
            .iter()
            .map(|c| {
                let mut next = s.clone();
                next.play(c);
                (c, self.solve(&next))
            })
            .collect()
    }

    fn ordered_moves(&self, n: &Node, tt_move: Option<Card>) -> ArrayVec<Card, 12> {
        let mut moves: ArrayVec<Card, 12> = n.playable().iter().collect();
        if self.config.move_ordering {
            let kind = n.kind;
            moves.sort_by_key(|&c| {
                let first = Some(c) == tt_move;
                let trump = !n.null && kind.is_trump(c);
                (!first, !trump, std::cmp::Reverse(c.points()), std::cmp::Reverse(kind.strength(c)))
            });
        }
        moves
    }

    /// Future soloist value from `n`, fail-soft within `(alpha, beta)`.
    fn search(&mut self, n: &mut Node, mut alpha: u16, mut beta: u16, ply: u32) -> u16 {
        self.stats.nodes += 1;
        self.stats.depth = self.stats.depth.max(ply);
        let at_trick_start = n.trick.is_empty();
        if at_trick_start && n.hands.iter().all(|h| h.is_empty()) {
            // a null game that gets here was never lost
            return u16::from(n.null);
        }
        let key: Key = (n.hands[0].0, n.hands[1].0, n.hands[2].0, n.to_move.0);
        let mut tt_move = None;
        if at_trick_start && self.config.transposition_table {
            if let Some(e) = self.tt.get(&key).copied() {
                self.stats.tt_hits += 1;
                if e.lo == e.hi || e.lo >= beta {
                    return e.lo;
                }
                if e.hi <= alpha {
                    return e.hi;
                }
                alpha = alpha.max(e.lo);
                beta = beta.min(e.hi);
                tt_move = e.best;
            }
        }
        let (alpha0, beta0) = (alpha, beta);
        let maximizing = n.to_move == n.soloist;
        let mut best_value = if maximizing { 0 } else { u16::MAX };
        let mut best_move = None;
        for card in self.ordered_moves(n, tt_move) {
            let mover = n.to_move;
            n.hands[mover.index()].remove(card);
            n.trick.push((mover, card));
            let value = if n.trick.len() < 3 {
                n.to_move = mover.next();
                self.search(n, alpha, beta, ply + 1)
            } else {
                let t = [n.trick[0], n.trick[1], n.trick[2]];
                let winner = trick_winner(&t, n.kind);
                let saved = std::mem::take(&mut n.trick);
                n.to_move = winner;
                let v = if n.null {
                    if winner == n.soloist {
                        0
                    } else {
                        self.search(n, alpha, beta, ply + 1)
                    }
                } else {
                    let pts: u16 = if winner == n.soloist {
                        t.iter().map(|(_, c)| c.points()).sum()
                    } else {
                        0
                    };
                    if pts >= beta {
                        // already a fail-high; `pts` is a valid lower bound
                        pts
                    } else {
                        pts + self.search(n, alpha.saturating_sub(pts), beta - pts, ply + 1)
                    }
                };
                n.trick = saved;
                v
            };
            n.trick.pop();
            n.hands[mover.index()].insert(card);
            n.to_move = mover;
            if maximizing {
                if value > best_value || best_move.is_none() {
                    best_value = value;
                    best_move = Some(card);
                }
                alpha = alpha.max(value);
            } else {
                if value < best_value {
                    best_value = value;
                    best_move = Some(card);
                }
                beta = beta.min(value);
            }
            if alpha >= beta {
                break;
            }
        }
        if at_trick_start && self.config.transposition_table {
            let e = self.tt.entry(key).or_insert(Entry {
                lo: 0,
                hi: u16::MAX,
                best: None,
            });
            if best_value <= alpha0 {
                e.hi = e.hi.min(best_value);
            } else if best_value >= beta0 {
                e.lo = e.lo.max(best_value);
            } else {
                e.lo = best_value;
                e.hi = best_value;
            }
            e.best = best_move;
        }
        best_value
    }
}

/// Solves `s` with a fresh default solver.
pub fn solve(s: &OpenState) -> u16 {
    Solver::default().solve(s)
}

/// Per-card values of `s` with a fresh default solver.
pub fn action_values(s: &OpenState) -> Vec<(Card, u16)> {
    Solver::default().action_values(s)
}
