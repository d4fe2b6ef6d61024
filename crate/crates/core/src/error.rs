use thiserror::Error;

/// Errors produced by the sensing library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("input format error: {0}")]
    Format(String),

    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("denominator guard tripped on {flagged} of {total} samples")]
    DenominatorGuard { flagged: usize, total: usize },

    #[error("Mobius pole on the trajectory at sample {k}")]
    Singularity { k: usize },

    #[error("degenerate scenario: {0}")]
    Degenerate(String),

    #[error("undefined phase: dynamic component is zero at sample {k}")]
    UndefinedPhase { k: usize },

    #[error("autocorrelation undefined for a zero-variance series")]
    UndefinedAcf,

    #[error("no feasible genome: window unusable")]
    NoFeasibleGenome,

    #[error("no streams to combine")]
    NoStreams,

    #[error("no complete window: {accepted} accepted frames, {needed} needed")]
    NoWindow { accepted: usize, needed: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
