use skatinfer::rules::{deal, Action, GameKind, GameState, GameType};
use skatinfer::worlds::{InfoSet, WorldSpace};
use skatinfer::Seat;

use crate::Outcome;

/// Seat 1 wins the auction at 18 and declares `kind` at card-play start.
fn declared(seed: u64, kind: GameKind, hand: bool, ouvert: bool) -> GameState {
    let mut g = deal(seed);
    for a in [Action::Bid(18), Action::Pass, Action::Pass] {
        g.apply_mut(a).expect("auction");
    }
    if hand {
        g.apply_mut(Action::DeclareHand).expect("hand game");
    } else {
        g.apply_mut(Action::PickupSkat).expect("pickup");
        let cards = g.hands[1].cards();
        g.apply_mut(Action::Discard([cards[0], cards[1]])).expect("discard");
    }
    let game = GameType {
        hand,
        ouvert,
        ..GameType::plain(kind)
    };
    g.apply_mut(Action::Declare(game)).expect("declaration");
    g
}

pub fn cardinalities() -> Outcome {
    let defender = WorldSpace::new(&InfoSet::observe(&declared(2, GameKind::Grand, false, false), Seat(0)));
    let soloist = WorldSpace::new(&InfoSet::observe(&declared(1, GameKind::Clubs, false, false), Seat(1)));
    let ouvert = WorldSpace::new(&InfoSet::observe(&declared(4, GameKind::Null, true, true), Seat(0)));
    let got = [
        defender.count_states(),
        soloist.count_configurations(),
        ouvert.count_configurations(),
    ];
    let want = [2_816_789_976u64, 184_756, 66];
    // the ouvert space must also enumerate to exactly that many distinct worlds
    let listed = ouvert.configurations().collect::<std::collections::BTreeSet<_>>().len() as u64;
    Outcome::new(
        got == want && listed == want[2],
        format!(
            "defender states after pickup {}, soloist configurations {}, null-ouvert defender worlds {} ({listed} enumerated); expected {want:?}",
            got[0], got[1], got[2]
        ),
    )
}
