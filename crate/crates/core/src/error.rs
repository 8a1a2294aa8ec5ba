use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building data, evaluating a measure, or
/// running a decomposition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("data matrix needs at least {min} rows, got {got}")]
    TooFewRows { min: usize, got: usize },

    #[error("expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("row count mismatch: {left} vs {right}")]
    RowCountMismatch { left: usize, right: usize },

    #[error("non-finite value in column `{column}` at row {row}")]
    NonFinite { column: String, row: usize },

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("column `{0}` has zero variance")]
    ZeroVarianceColumn(String),

    #[error("correlation matrix of the feature subset is singular (determinant {0:e})")]
    SingularCorrelationMatrix(f64),

    #[error("sample covariance is singular (smallest eigenvalue {0:e})")]
    SingularCovariance(f64),

    #[error("kernel bandwidth must be strictly positive, got {0}")]
    NonPositiveBandwidth(f64),

    #[error("median pairwise distance is zero; cannot pick a kernel bandwidth")]
    DegenerateBandwidth,

    #[error("ridge regularization must be non-negative, got {0}")]
    NegativeRidge(f64),

    #[error("{measure} value {value} is outside its valid range")]
    Inconsistent { measure: &'static str, value: f64 },

    #[error("player {player} out of range for a {players}-player game")]
    PlayerOutOfRange { player: usize, players: usize },

    #[error("team size {size} out of range for a {players}-player game")]
    TeamSizeOutOfRange { size: usize, players: usize },

    #[error("exact Shapley computation over {players} players exceeds the limit of {limit}")]
    DimensionTooLarge { players: usize, limit: usize },

    #[error("games are limited to 64 players, got {0}")]
    TooManyPlayers(usize),

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} target is required for this attribution")]
    MissingTarget(&'static str),

    #[error("resample size {size} is invalid for {rows} rows")]
    InsufficientRows { size: usize, rows: usize },

    #[error("decomposition values sum to zero; cannot normalize")]
    ZeroTotal,

    #[error("design matrix is rank deficient")]
    RankDeficientDesign,
}

impl Error {
    /// True for failures that stem from the numbers themselves (singular
    /// matrices, degenerate bandwidths) rather than from malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::ZeroVarianceColumn(_)
                | Error::SingularCorrelationMatrix(_)
                | Error::SingularCovariance(_)
                | Error::DegenerateBandwidth
                | Error::Inconsistent { .. }
                | Error::ZeroTotal
                | Error::RankDeficientDesign
        )
    }
}
