use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side contract was not met (mismatched grids, bad schedule).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A run configuration that cannot be executed (unstable step, bad grid).
    #[error("configuration error: {0}")]
    Config(String),

    /// The integration interval reaches a point where the schedule diverges.
    #[error("schedule is singular at Θ = {theta} (t = {t})")]
    Singularity { theta: f64, t: f64 },

    #[error("unknown identity `{name}`; valid names: {valid}")]
    UnknownIdentity { name: String, valid: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
