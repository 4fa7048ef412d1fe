use thiserror::Error;

/// Errors produced by the channel toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e} exceeds {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not positive semi-definite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("POVM element {index} is not positive semi-definite (minimum eigenvalue {min_eigenvalue:.3e})")]
    PovmElementNotPsd { index: usize, min_eigenvalue: f64 },

    #[error("POVM element {0} is zero")]
    ZeroPovmElement(usize),

    #[error("POVM elements do not sum to the identity (residual {0:.3e})")]
    IncompleteSum(f64),

    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),

    #[error("vector does not have unit norm (norm {0})")]
    NotNormalized(f64),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel is not trace-preserving (residual {0:.3e})")]
    NotTracePreserving(f64),

    #[error("Kraus operator {index} has rank {rank}, expected rank one")]
    RankTooHigh { index: usize, rank: usize },

    #[error("basis vectors are not orthonormal (deviation {0:.3e})")]
    NonOrthonormalBasis(f64),

    #[error("projectors are not complete and mutually orthogonal (residual {0:.3e})")]
    IncompleteProjectors(f64),

    #[error("left marginal deviates from the maximally mixed state by {0:.3e}")]
    MarginalNotMaximallyMixed(f64),

    #[error("decomposition precondition failed: rank(state) = {state_rank}, rank(left marginal) = {marginal_rank}, expected both = {expected}")]
    PreconditionRankMismatch {
        state_rank: usize,
        marginal_rank: usize,
        expected: usize,
    },

    #[error("decomposition reduction stalled at {terms} terms: {reason}")]
    MergeStall { terms: usize, reason: String },

    #[error("reconstruction residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ReconstructionFailed { residual: f64, tolerance: f64 },

    #[error("negative outcome probability {0:.3e}")]
    NegativeProbability(f64),

    #[error("channel is not entanglement breaking: {0}")]
    NotEbt(String),

    #[error("entanglement-breaking status is undecided: {0}")]
    Undecided(String),

    #[error("unsupported dimension {0}: only qubit channels are supported")]
    UnsupportedDimension(usize),

    #[error("map does not preserve Hermiticity (imaginary part {0:.3e})")]
    NotHermiticityPreserving(f64),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{field}: {source}")]
    Field {
        field: String,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Attaches a field path to an error raised while validating part of a spec file.
    pub fn in_field(self, field: impl Into<String>) -> Error {
        Error::Field {
            field: field.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with any field context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Field { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
