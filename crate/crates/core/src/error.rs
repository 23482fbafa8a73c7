use thiserror::Error;

/// Every failure the library can report.
///
/// One enum for the whole crate keeps the C ABI error mapping flat; the
/// variants still name the contract that was violated.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("division by a zero constituent")]
    ZeroDivisor,
    #[error("divisor has a constant constituent; degree division needs deg g > 0")]
    DegreeZero,
    #[error("period {period} exceeds the configured cap {cap}")]
    PeriodBlowup { period: u64, cap: u64 },
    #[error("no quasi-polynomial with period <= {max_period} and degree <= {max_degree} reproduces the samples")]
    NoFit { max_period: u64, max_degree: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("dimension {got} exceeds cap {cap}")]
    DimensionCap { got: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("normal-form cross-check failed at t = {t}: {detail}")]
    CrossCheck { t: u64, detail: String },
    #[error("cone generators are not linearly independent")]
    NotSimplicial,
    #[error("parallelepiped enumeration box has {size} points, cap is {cap}")]
    VolumeCap { size: u128, cap: u128 },
    #[error("denominator exponent {0:?} is not lexicographically positive")]
    NotNormalized(Vec<i64>),
    #[error("denominator exponent has no certifiable eventual sign")]
    MixedSign,
    #[error("no unique eventual lexicographic minimum")]
    Tie,
    #[error("polytope is not simple at a vertex")]
    NotSimple,
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("polyhedron is empty")]
    Empty,
    #[error("polyhedron leaves the nonnegative orthant")]
    NegativeOrthant,
    #[error("hull vertex count is not eventually constant per class (offending t: {0:?})")]
    UnstableVertexCount(Vec<u64>),
    #[error("membership or containment could not be certified: {0}")]
    Uncertified(String),
    #[error("smallest generator {0} exceeds the cap")]
    GeneratorCap(String),
    #[error("generator is not positive at t = {0}")]
    NonPositiveGenerator(u64),
    #[error("value {0} is not an integer")]
    NotInteger(String),
    #[error("integer overflow in fixed-width arithmetic")]
    Overflow,
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable variant name, used in machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        self.describe().0
    }

    /// Stable nonzero code per variant; the C ABI returns these.
    pub fn code(&self) -> i32 {
        self.describe().1
    }

    fn describe(&self) -> (&'static str, i32) {
        match self {
            Error::Parse(_) => ("Parse", 1),
            Error::ZeroDivisor => ("ZeroDivisor", 2),
            Error::DegreeZero => ("DegreeZero", 3),
            Error::PeriodBlowup { .. } => ("PeriodBlowup", 4),
            Error::NoFit { .. } => ("NoFit", 5),
            Error::Singular => ("Singular", 6),
            Error::DimensionCap { .. } => ("DimensionCap", 7),
            Error::Dimension(_) => ("Dimension", 8),
            Error::CrossCheck { .. } => ("CrossCheck", 9),
            Error::NotSimplicial => ("NotSimplicial", 10),
            Error::VolumeCap { .. } => ("VolumeCap", 11),
            Error::NotNormalized(_) => ("NotNormalized", 12),
            Error::MixedSign => ("MixedSign", 13),
            Error::Tie => ("Tie", 14),
            Error::NotSimple => ("NotSimple", 15),
            Error::Unbounded => ("Unbounded", 16),
            Error::Empty => ("Empty", 17),
            Error::NegativeOrthant => ("NegativeOrthant", 18),
            Error::UnstableVertexCount(_) => ("UnstableVertexCount", 19),
            Error::Uncertified(_) => ("Uncertified", 20),
            Error::GeneratorCap(_) => ("GeneratorCap", 21),
            Error::NonPositiveGenerator(_) => ("NonPositiveGenerator", 22),
            Error::NotInteger(_) => ("NotInteger", 23),
            Error::Overflow => ("Overflow", 24),
            Error::Invalid(_) => ("Invalid", 25),
        }
    }
}
