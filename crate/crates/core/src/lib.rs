pub mod cards;
pub mod combinatorics;
pub mod ddsolver;
pub mod gamelog;
pub mod inference;
pub mod metrics;
pub mod num;
pub mod player;
pub mod policy;
pub mod rules;
pub mod seeds;
pub mod selfplay;
pub mod tournament;
pub mod worlds;

pub use cards::{card_points, Card, Deck, DeckKind, Hand, Rank, Seat, Suit};
pub use num::Real;
pub use rules::{Action, GameKind, GameScore, GameState, GameType, Phase, RulesError};

/// Double-precision aliases of the scalar-generic types.
pub type InferenceVariantF64 = inference::InferenceVariant<f64>;
pub type WeightedWorldsF64 = inference::WeightedWorlds<f64>;
pub type ReachWeightF64 = inference::ReachWeight<f64>;
pub type MarginalsF64 = inference::Marginals<f64>;
pub type MarginalSourceF64 = inference::MarginalSource<f64>;
pub type PlayerConfigF64 = player::PlayerConfig<f64>;
pub type MoveValuesF64 = player::MoveValues<f64>;
