use serde::{Deserialize, Serialize};

use crate::cards::{Deck, Hand, Seat};

use super::game_type::GameType;
use super::state::GameState;
use super::RulesError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameScore {
    /// `None` when every player passed.
    pub soloist: Option<Seat>,
    /// Soloist card points including the skat (suit and grand games).
    pub soloist_points: u16,
    pub won: bool,
    pub game_value: u16,
    /// Soloist's score: `+game_value` when won, `-2 * game_value` when lost.
    pub score: i32,
    pub schneider: bool,
    pub schwarz: bool,
    pub overbid: bool,
}

impl GameScore {
    pub fn passed_in() -> GameScore {
        GameScore {
            soloist: None,
            soloist_points: 0,
            won: false,
            game_value: 0,
            score: 0,
            schneider: false,
            schwarz: false,
            overbid: false,
        }
    }
}

/// Scores an outcome from its ingredients.
///
/// `soloist_points` already includes the skat, `soloist_tricks` and
/// `defender_tricks` count tricks taken, and `bid` is the auction value.
pub fn score_outcome(
    game: &GameType,
    deck: &Deck,
    matadors: u16,
    soloist_points: u16,
    soloist_tricks: u8,
    defender_tricks: u8,
    bid: u16,
) -> GameScore {
    let total = deck.total_points();
    let schneider_line = deck.schneider_threshold();
    let schneider = soloist_points >= schneider_line || total - soloist_points >= schneider_line;
    let schwarz = soloist_tricks == 0 || defender_tricks == 0;
    let (mut won, mut game_value, overbid);
    if game.kind.is_null() {
        won = soloist_tricks == 0;
        game_value = game.null_value();
        overbid = game_value < bid;
    } else {
        let multiplier = matadors
            + 1
            + u16::from(game.hand)
            + u16::from(schneider || game.schneider_announced)
            + u16::from(game.schneider_announced)
            + u16::from(schwarz || game.schwarz_announced)
            + u16::from(game.schwarz_announced)
            + u16::from(game.ouvert);
        let base = game.base_value();
        game_value = base * multiplier;
        won = soloist_points >= deck.win_threshold()
            && (!game.schneider_announced || soloist_points >= schneider_line)
            && (!game.schwarz_announced || defender_tricks == 0);
        overbid = game_value < bid;
        if overbid {
            game_value = bid.div_ceil(base) * base;
        }
    }
    if overbid {
        won = false;
    }
    let score = if won { i32::from(game_value) } else { -2 * i32::from(game_value) };
    GameScore {
        soloist: None,
        soloist_points,
        won,
        game_value,
        score,
        schneider,
        schwarz,
        overbid,
    }
}

pub fn score_game(state: &GameState) -> Result<GameScore, RulesError> {
    if !state.is_terminal() {
        return Err(RulesError::NotTerminal);
    }
    let (Some(soloist), Some(game)) = (state.soloist, state.declaration) else {
        return Ok(GameScore::passed_in());
    };
    let mut twelve: Hand = state.soloist_twelve().expect("soloist is set");
    if !state.picked_up {
        twelve = twelve.union(state.dealt_skat);
    }
    let matadors = game.matadors(twelve, &state.deck);
    let points = if game.kind.is_null() {
        state.card_points[0]
    } else {
        state.card_points[0] + state.skat.points()
    };
    let bid = state.bid.expect("a soloist implies a bid");
    let mut out = score_outcome(
        &game,
        &state.deck,
        matadors,
        points,
        state.tricks_won[0],
        state.tricks_won[1],
        bid,
    );
    out.soloist = Some(soloist);
    Ok(out)
}
