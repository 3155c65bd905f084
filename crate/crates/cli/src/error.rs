use std::fmt::Display;

use thiserror::Error;

/// A failed command, classified by who has to fix it.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("invalid configuration: {0:#}")]
    Config(anyhow::Error),
    #[error("bad input data: {0:#}")]
    Data(anyhow::Error),
    #[error("internal invariant violated: {0:#}")]
    Internal(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    pub fn config(msg: impl Display) -> Failure {
        Failure::Config(anyhow::anyhow!("{msg}"))
    }

    pub fn data(msg: impl Display) -> Failure {
        Failure::Data(anyhow::anyhow!("{msg}"))
    }
}

/// Attach a classification and context to any error.
pub trait Classify<T> {
    fn config(self, what: impl Display) -> Result<T, Failure>;
    fn data(self, what: impl Display) -> Result<T, Failure>;
    fn internal(self, what: impl Display) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config(self, what: impl Display) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into().context(what.to_string())))
    }

    fn data(self, what: impl Display) -> Result<T, Failure> {
        self.map_err(|e| Failure::Data(e.into().context(what.to_string())))
    }

    fn internal(self, what: impl Display) -> Result<T, Failure> {
        self.map_err(|e| Failure::Internal(e.into().context(what.to_string())))
    }
}
