use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    /// Atom extraction claimed more mass than the sequence carries.
    #[error("detected atom mass {detected} exceeds total mass {total}")]
    OverDetection { detected: f64, total: f64 },

    #[error("incompatible measures: {0}")]
    Incompatible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn precondition<S: Into<String>>(cond: bool, msg: S) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg.into()))
    }
}
