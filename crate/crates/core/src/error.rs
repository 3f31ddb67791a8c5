use thiserror::Error;

/// Errors raised while building problems or running the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("nodes {0} and {1} coincide")]
    DuplicateNodes(usize, usize),
    #[error("too few nodes: m = {m} but a basis of dimension {n} needs at least {}", n + 1)]
    TooFewNodes { m: usize, n: usize },
    #[error("basis matrix is rank deficient")]
    RankDeficientBasis,
    #[error("real-mode problem has a nonzero imaginary part at index {0}")]
    NonRealData(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("length mismatch: {nodes} nodes but {values} values")]
    LengthMismatch { nodes: usize, values: usize },
    #[error("unknown built-in problem `{0}`")]
    UnknownProblem(String),
    #[error("Arnoldi breakdown at step {0}: weight support too small or nodes coincide")]
    BreakdownRankDeficient(usize),
    #[error("basis has no Arnoldi recurrence; reverse evaluation unavailable")]
    NoRecurrence,
    #[error("zero subdiagonal entry in the recurrence at column {0}")]
    DivisionByZeroSubdiagonal(usize),
    #[error("operation needs a monomial basis")]
    NeedsMonomialBasis,
    #[error("weight update denominator vanished (interpolation reached)")]
    ZeroDenominator,
    #[error("filtering left {support} nodes; at least {needed} are required")]
    AllWeightsFiltered { support: usize, needed: usize },
    #[error("inner SMW system is not positive definite")]
    IndefiniteSystem,
    #[error("non-finite iterate at iteration {0}")]
    NonFiniteIterate(usize),
    #[error("problem size {size} exceeds cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("LP is unbounded")]
    Unbounded,
    #[error("LP is infeasible")]
    Infeasible,
    #[error("operation needs real-mode data")]
    ComplexData,
    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
