use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("granular-ball has no members")]
    EmptyBall,

    /// All members of the ball coincide; it cannot be bisected.
    #[error("terminal ball: all member points are identical")]
    TerminalBall,

    #[error("member count mismatch: children hold {children} points, parent holds {parent}")]
    CountMismatch { parent: usize, children: usize },

    #[error("insufficient balls: {requested} peaks requested but only {available} balls exist (raise M or alpha)")]
    InsufficientBalls { requested: usize, available: usize },

    #[error("insufficient key balls (W < k): W = {w}, k = {k}; raise s, alpha or M")]
    InsufficientKeyBalls { w: usize, k: usize },

    #[error("label length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}
