use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside an operation's domain (zero where nonzero is required, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular curve: a = {a}, b = {b}")]
    SingularCurve { a: String, b: String },

    /// A recorded or derived value failed exact re-verification.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("torsion list: {0}")]
    TorsionList(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
