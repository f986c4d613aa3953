use thiserror::Error;

/// Every failure the library can report.
///
/// Variants map one-to-one onto the stable error codes emitted by the CLI
/// (see [`Error::code`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Schema(String),
    #[error("masses sum to {total}, expected 1")]
    Normalization { total: String },
    #[error("duplicate atom id `{0}`")]
    DuplicateAtom(String),
    #[error("diffuse pieces sum to {pieces}, space has diffuse mass {expected}")]
    MassMismatch { pieces: String, expected: String },
    #[error("unknown atom id `{0}`")]
    UnknownAtom(String),
    #[error("argument {0} outside [0, 1]")]
    Domain(String),
    #[error("x is not majorised by y")]
    NotInOrbit,
    #[error("value {0} is not attained")]
    ValueNotAttained(String),
    #[error("perturbation direction is zero almost everywhere")]
    DegenerateDirection,
    #[error("x satisfies the extremality criterion; no witness exists")]
    CriterionSatisfied,
    #[error("space has diffuse mass; only purely atomic spaces are supported")]
    NotAtomic,
    #[error("size {size} exceeds the limit {limit}")]
    SizeLimit { size: usize, limit: usize },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("matrix is not diagonal (off-diagonal magnitude {0:e})")]
    NotDiagonal(f64),
    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),
    #[error("x is not majorised by y")]
    NotMajorised,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Schema(_) => "SchemaError",
            Error::Normalization { .. } => "NormalizationError",
            Error::DuplicateAtom(_) => "DuplicateAtomError",
            Error::MassMismatch { .. } => "MassMismatchError",
            Error::UnknownAtom(_) => "UnknownAtomError",
            Error::Domain(_) => "DomainError",
            Error::NotInOrbit => "NotInOrbit",
            Error::ValueNotAttained(_) => "ValueNotAttained",
            Error::DegenerateDirection => "DegenerateDirection",
            Error::CriterionSatisfied => "CriterionSatisfied",
            Error::NotAtomic => "NotAtomic",
            Error::SizeLimit { .. } => "SizeLimit",
            Error::NotHermitian(_) => "NotHermitian",
            Error::DimensionMismatch(..) => "DimensionMismatch",
            Error::NotUnitary(_) => "NotUnitary",
            Error::NotDiagonal(_) => "NotDiagonal",
            Error::NotDoublyStochastic(_) => "NotDoublyStochastic",
            Error::NotMajorised => "NotMajorised",
            Error::Invariant(_) => "InvariantViolation",
        }
    }

    /// True for failures caused by the caller's input rather than by a bug.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Invariant(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
