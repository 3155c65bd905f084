use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skatinfer::ddsolver::{action_values, solve, OpenState, Solver, SolverConfig};
use skatinfer::rules::{deal_deck, Action, GameKind, GameState, GameType, Phase};
use skatinfer::{Card, Deck};

/// A random position in card play with at most `max_cards` cards per hand.
fn endgame(deck: Deck, kind: GameKind, max_cards: usize, rng: &mut ChaCha8Rng) -> GameState {
    let mut g = deal_deck(deck, rng.gen());
    g.apply_mut(Action::Bid(18)).unwrap();
    g.apply_mut(Action::Pass).unwrap();
    g.apply_mut(Action::Pass).unwrap();
    let hand_game = rng.gen_bool(0.3);
    if hand_game {
        g.apply_mut(Action::DeclareHand).unwrap();
    } else {
        g.apply_mut(Action::PickupSkat).unwrap();
        let mut cards = g.hands[1].cards();
        cards.shuffle(rng);
        let mut pair = [cards[0], cards[1]];
        pair.sort();
        g.apply_mut(Action::Discard(pair)).unwrap();
    }
    let decl = GameType {
        hand: hand_game,
        ..GameType::plain(kind)
    };
    g.apply_mut(Action::Declare(decl)).unwrap();
    let target = rng.gen_range(1..=max_cards.min(deck.hand_size));
    let extra = rng.gen_range(0..3);
    let max_left = |g: &GameState| g.hands.iter().map(|h| h.len()).max().unwrap();
    while g.phase == Phase::Cardplay && max_left(&g) > target {
        let legal = g.legal_actions().unwrap();
        g.apply_mut(*legal.choose(rng).unwrap()).unwrap();
    }
    for _ in 0..extra {
        if g.phase != Phase::Cardplay {
            break;
        }
        let legal = g.legal_actions().unwrap();
        g.apply_mut(*legal.choose(rng).unwrap()).unwrap();
    }
    g
}

fn cardplay_position(deck: Deck, kind: GameKind, max_cards: usize, rng: &mut ChaCha8Rng) -> GameState {
    loop {
        let g = endgame(deck, kind, max_cards, rng);
        if g.phase == Phase::Cardplay {
            return g;
        }
    }
}

/// Unpruned minimax over the rules engine.
fn minimax(g: &GameState) -> u16 {
    if g.phase == Phase::Terminal {
        let kind = g.declaration.unwrap().kind;
        return if kind.is_null() {
            u16::from(g.tricks_won[0] == 0)
        } else {
            g.card_points[0] + g.skat.points()
        };
    }
    let values = g.legal_actions().unwrap().into_iter().map(|a| minimax(&g.apply_action(a).unwrap()));
    if Some(g.to_move) == g.soloist {
        values.max().unwrap()
    } else {
        values.min().unwrap()
    }
}

fn minimax_action_values(g: &GameState) -> Vec<(Card, u16)> {
    let mut out: Vec<(Card, u16)> = g
        .legal_actions()
        .unwrap()
        .into_iter()
        .map(|a| {
            let Action::PlayCard(c) = a else { unreachable!() };
            (c, minimax(&g.apply_action(a).unwrap()))
        })
        .collect();
    out.sort();
    out
}

fn kinds(types: &str) -> Vec<GameKind> {
    match types {
        "suit" => vec![GameKind::Diamonds, GameKind::Hearts, GameKind::Spades, GameKind::Clubs],
        "grand" => vec![GameKind::Grand],
        _ => vec![GameKind::Null],
    }
}

fn exactness(types: &str, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = kinds(types);
    let mut solved = 0;
    let mut five = 0;
    while solved < 1000 {
        let kind = *kinds.choose(&mut rng).unwrap();
        let g = endgame(Deck::full(), kind, 5, &mut rng);
        if g.phase != Phase::Cardplay {
            continue;
        }
        let open = OpenState::from_game(&g).unwrap();
        assert_eq!(solve(&open), minimax(&g), "{types} endgame {g:?}");
        five += usize::from(g.hands.iter().map(|h| h.len()).max() == Some(5));
        solved += 1;
    }
    assert!(five >= 100, "{five} endgames with five cards");
}

#[test]
fn suit_endgames_match_minimax() {
    exactness("suit", 1);
}

#[test]
fn grand_endgames_match_minimax() {
    exactness("grand", 2);
}

#[test]
fn null_endgames_match_minimax() {
    exactness("null", 3);
}

#[test]
fn action_values_match_minimax_and_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    while checked < 1000 {
        let kind = *GameKind::ALL.choose(&mut rng).unwrap();
        let g = endgame(Deck::full(), kind, 4, &mut rng);
        if g.phase != Phase::Cardplay {
            continue;
        }
        let open = OpenState::from_game(&g).unwrap();
        let values = action_values(&open);
        assert_eq!(values, minimax_action_values(&g));
        let best = if g.to_move == open.soloist {
            values.iter().map(|v| v.1).max()
        } else {
            values.iter().map(|v| v.1).min()
        };
        assert_eq!(best, Some(solve(&open)));
        checked += 1;
    }
}

#[test]
fn transposition_table_does_not_change_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let plain = SolverConfig {
        transposition_table: false,
        move_ordering: false,
    };
    let mut checked = 0;
    let mut hits = 0;
    while checked < 10_000 {
        let deck = if rng.gen_bool(0.5) { Deck::mini() } else { Deck::full() };
        let kind = *GameKind::ALL.iter().filter(|k| k.trump_suit().is_none_or(|s| deck.suits().contains(&s))).collect::<Vec<_>>().choose(&mut rng).unwrap();
        let g = endgame(deck, *kind, 6, &mut rng);
        if g.phase != Phase::Cardplay {
            continue;
        }
        let open = OpenState::from_game(&g).unwrap();
        let mut with_tt = Solver::default();
        let v = with_tt.solve(&open);
        assert_eq!(v, Solver::new(plain).solve(&open));
        let tt_only = SolverConfig {
            transposition_table: true,
            move_ordering: false,
        };
        assert_eq!(v, Solver::new(tt_only).solve(&open));
        hits += with_tt.stats().tt_hits;
        checked += 1;
    }
    assert!(hits > 0);
}

#[test]
fn last_trick_is_forced() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..300 {
        let kind = *GameKind::ALL.choose(&mut rng).unwrap();
        let mut g = endgame(Deck::full(), kind, 1, &mut rng);
        if g.phase != Phase::Cardplay || g.hands.iter().any(|h| h.len() > 1) {
            continue;
        }
        let open = OpenState::from_game(&g).unwrap();
        let value = solve(&open);
        while g.phase == Phase::Cardplay {
            let only = g.legal_actions().unwrap();
            assert_eq!(only.len(), 1);
            g.apply_mut(only[0]).unwrap();
        }
        let expected = if kind.is_null() {
            u16::from(g.tricks_won[0] == 0)
        } else {
            g.card_points[0] + g.skat.points()
        };
        assert_eq!(value, expected);
    }
}

#[test]
fn null_with_a_soloist_trick_is_lost_at_once() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut g = cardplay_position(Deck::full(), GameKind::Null, 10, &mut rng);
    let mut open = OpenState::from_game(&g).unwrap();
    open.soloist_took_trick = true;
    let mut solver = Solver::default();
    assert_eq!(solver.solve(&open), 0);
    assert_eq!(solver.stats().nodes, 0);
    // the rules engine ends such a game immediately as well
    while g.phase == Phase::Cardplay && g.tricks_won[0] == 0 {
        let a = g.legal_actions().unwrap()[0];
        g.apply_mut(a).unwrap();
    }
    assert!(g.tricks_won[0] == 0 || g.phase == Phase::Terminal);
}

#[test]
fn values_stay_within_the_deck_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..300 {
        let deck = Deck::mini();
        let kind = *[GameKind::Spades, GameKind::Clubs, GameKind::Grand].choose(&mut rng).unwrap();
        let g = endgame(deck, kind, 4, &mut rng);
        if g.phase != Phase::Cardplay {
            continue;
        }
        let open = OpenState::from_game(&g).unwrap();
        let v = solve(&open);
        assert!(v >= open.points[0] && v <= deck.total_points() - open.points[1]);
    }
}

#[test]
fn full_deck_solve_from_the_first_trick() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for kind in [GameKind::Clubs, GameKind::Grand, GameKind::Null] {
        let g = cardplay_position(Deck::full(), kind, 10, &mut rng);
        let open = OpenState::from_game(&g).unwrap();
        let mut a = Solver::default();
        let mut b = Solver::default();
        let v = a.solve(&open);
        assert_eq!(v, b.solve(&open));
        assert_eq!(a.stats(), b.stats());
        assert!(v <= 120);
    }
}

#[test]
fn equivalent_cards_have_equal_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut found = 0;
    for _ in 0..2000 {
        let kind = *GameKind::ALL.choose(&mut rng).unwrap();
        let g = endgame(Deck::full(), kind, 5, &mut rng);
        if g.phase != Phase::Cardplay {
            continue;
        }
        let open = OpenState::from_game(&g).unwrap();
        let values = action_values(&open);
        let out_of_play = g.played.iter().fold(g.skat, |acc, h| acc.union(*h));
        for (i, &(a, va)) in values.iter().enumerate() {
            for &(b, vb) in &values[i + 1..] {
                let same_class = kind.class(a) == kind.class(b);
                let adjacent = {
                    let (lo, hi) = if kind.strength(a) < kind.strength(b) { (a, b) } else { (b, a) };
                    Deck::full().cards.iter().all(|c| {
                        kind.class(c) != kind.class(a)
                            || kind.strength(c) <= kind.strength(lo)
                            || kind.strength(c) >= kind.strength(hi)
                            || out_of_play.contains(c)
                    })
                };
                let same_points = kind.is_null() || a.points() == b.points();
                if same_class && adjacent && same_points {
                    assert_eq!(va, vb, "{a} and {b} in {g:?}");
                    found += 1;
                }
            }
        }
    }
    assert!(found > 100);
}

#[test]
fn open_state_tracks_the_rules_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let kind = *GameKind::ALL.choose(&mut rng).unwrap();
        let mut g = cardplay_position(Deck::full(), kind, 10, &mut rng);
        let mut open = OpenState::from_game(&g).unwrap();
        while g.phase == Phase::Cardplay {
            let Action::PlayCard(c) = *g.legal_actions().unwrap().choose(&mut rng).unwrap() else { unreachable!() };
            assert_eq!(open.playable(), g.playable());
            open.play(c);
            g.apply_mut(Action::PlayCard(c)).unwrap();
            assert_eq!(open.to_move, g.to_move);
            assert_eq!(open.points[1], g.card_points[1]);
        }
        assert!(open.is_over());
        assert_eq!(open.points[0], g.card_points[0] + g.skat.points());
    }
}
