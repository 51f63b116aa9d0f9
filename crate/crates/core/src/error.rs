use thiserror::Error;

/// Errors produced by the numerical laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),
    #[error("ball leaves the domain: {0}")]
    OutOfDomain(String),
    #[error("ill-posed operator: {0}")]
    IllPosedOperator(String),
    #[error(
        "eigensolver did not converge in {iterations} iterations (best residual {best_residual:e})"
    )]
    Convergence {
        iterations: usize,
        best_residual: f64,
    },
    #[error("empty domain")]
    EmptyDomain,
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),
    #[error("field is identically zero up to tolerance")]
    AllNodal,
    #[error("distance is infinite: mask has no false node")]
    InfiniteDistance,
    #[error("unknown component {0}")]
    UnknownComponent(usize),
    #[error("ball radius {radius} is below 2h = {min}")]
    UnderResolvedBall { radius: f64, min: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("field has an empty nodal set")]
    NoNodalSet,
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("asymmetry constant undefined: complement is empty")]
    UndefinedAlpha,
    #[error("no zero set in cube")]
    NoZeroSet,
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("log-domain error: {0}")]
    LogDomain(String),
    #[error("insufficient data: {0} points, need at least 3")]
    InsufficientData(usize),
    #[error("nothing to report")]
    NothingToReport,
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
