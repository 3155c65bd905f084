//! Three-player Skat: dealing, bidding, declaration, trick play and scoring.

pub mod bidding;
pub mod game_type;
pub mod scoring;
pub mod state;

use thiserror::Error;

pub use bidding::{bid_ladder, level_of, max_bid_action, value_of, Auction, AuctionOutcome, AuctionStage};
pub use game_type::{trick_winner, GameKind, GameType, TRUMP_CLASS};
pub use scoring::{score_game, score_outcome, GameScore};
pub use state::{deal, deal_deck, Action, GameState, Phase, Trick};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RulesError {
    #[error("game over")]
    GameOver,
    #[error("game is not finished")]
    NotTerminal,
    #[error("action not available in phase {0:?}")]
    WrongPhase(Phase),
    #[error("illegal action {action}: {rule}")]
    IllegalAction { action: Action, rule: &'static str },
    #[error("illegal declaration: {0}")]
    IllegalDeclaration(&'static str),
    #[error("hands and skat do not partition the deck")]
    InvalidDeal,
}
