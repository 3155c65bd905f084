//! Hidden-card worlds consistent with an information set.

mod infoset;
mod space;

use thiserror::Error;

pub use infoset::{InfoSet, Observed};
pub use space::{Configuration, State, WorldSpace, SKAT};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorldsError {
    #[error("contradictory observations")]
    Contradictory,
    #[error("world is inconsistent with the information set")]
    Inconsistent,
}

pub fn count_configurations(info: &InfoSet) -> u64 {
    WorldSpace::new(info).count_configurations()
}

pub fn count_states(info: &InfoSet) -> u64 {
    WorldSpace::new(info).count_states()
}

pub fn sample_configurations(info: &InfoSet, k: usize, seed: u64) -> Result<Vec<Configuration>, WorldsError> {
    WorldSpace::new(info).sample_configurations(k, seed)
}

pub fn states_for_configuration(c: &Configuration, info: &InfoSet) -> Result<Vec<State>, WorldsError> {
    let space = WorldSpace::new(info);
    if !space.consistent(c) {
        return Err(WorldsError::Inconsistent);
    }
    Ok(space.states_for_configuration(c))
}

pub fn consistent(c: &Configuration, info: &InfoSet) -> bool {
    WorldSpace::new(info).consistent(c)
}
