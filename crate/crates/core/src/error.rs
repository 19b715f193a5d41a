use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed interval: lo {lo} > hi {hi}")]
    MalformedInterval { lo: String, hi: String },
    #[error("interval set is not contained in the hull {hull}")]
    OutsideHull { hull: String },
    #[error("invalid Moran spec: {0}")]
    InvalidSpec(String),
    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u64,
    },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("rectangle {rect} straddles the boundary of U")]
    StraddlesDomain { rect: String },
    #[error("rectangle {rect} is outside the natural domain of `{model}`")]
    OutsideModelDomain { model: String, rect: String },
    #[error("invalid function model: {0}")]
    InvalidModel(String),
    #[error("invalid overlapping IFS: {0}")]
    InvalidOverlapSpec(String),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("both factors must use the same c_k and n_k sequences")]
    MismatchedSequences,
}

impl Error {
    /// Stable machine-readable code, used by the CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedInterval { .. } => "malformed-interval",
            Error::OutsideHull { .. } => "outside-hull",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::CapExceeded { .. } => "cap-exceeded",
            Error::InvalidWindow(_) => "invalid-window",
            Error::StraddlesDomain { .. } => "straddles-domain",
            Error::OutsideModelDomain { .. } => "outside-model-domain",
            Error::InvalidModel(_) => "invalid-model",
            Error::InvalidOverlapSpec(_) => "invalid-overlap-spec",
            Error::UnknownCase(_) => "unknown-case",
            Error::InvalidParams(_) => "invalid-params",
            Error::MismatchedSequences => "mismatched-sequences",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
