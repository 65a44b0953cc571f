use thiserror::Error;

/// Errors surfaced by the exact engine.
///
/// Mathematical checks that are expected to fail on bad input (master
/// equations, axiom audits) report their findings as values, not through
/// this type. `Error` is reserved for contract violations: inverting zero,
/// mixing models of different shape, indexing outside a declared range.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("inversion of zero scalar")]
    ZeroInversion,

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix entries must be real scalars")]
    NotReal,

    #[error("matrix is not square (rows {rows}, cols {cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{what} index {index} out of range 1..={bound}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("operands live over different models ({left} vs {right})")]
    SignatureMismatch { left: String, right: String },

    #[error("fiber rank {rank} is odd, a Witt splitting needs an even rank")]
    OddRank { rank: usize },

    #[error("frame vectors are not isotropic: g({a},{b}) != 0")]
    NotIsotropic { a: usize, b: usize },

    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
