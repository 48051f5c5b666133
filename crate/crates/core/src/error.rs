use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix polynomial appears singular (det P vanishes at the sample point {sample})")]
    NotRegular { sample: String },

    #[error("leading coefficient is numerically singular (reciprocal condition {rcond:.3e})")]
    SingularLeadingCoefficient { rcond: f64 },

    #[error(
        "eigenvalue on or near the contour: node {node} (z = {z}) has condition estimate {condition:.3e}"
    )]
    EigenvalueNearContour {
        node: usize,
        z: String,
        condition: f64,
    },

    #[error("probe block {which} has numerical rank {rank}, expected {expected}")]
    RankDeficientProbes {
        which: &'static str,
        rank: usize,
        expected: usize,
    },

    #[error("need at least {needed} moments, have {available}")]
    InsufficientMoments { needed: usize, available: usize },

    #[error(
        "Hankel matrix of size {requested} is singular (numerical rank {rank}); truncate to m = {rank}"
    )]
    SingularHankel { requested: usize, rank: usize },

    #[error("{what} is numerically singular (condition estimate {condition:.3e})")]
    Singular { what: &'static str, condition: f64 },

    #[error("all weights are zero; the condition number is undefined")]
    ZeroWeights,

    #[error("{count} subsets exceed the enumeration cap of {cap}")]
    TooManySubsets { count: u128, cap: usize },

    #[error("{count} diagonal branches exceed the cap of {cap}")]
    TooManyBranches { count: usize, cap: usize },

    #[error("coefficient T_{coeff} is not upper triangular (entry ({row},{col}) is nonzero)")]
    NotTriangular {
        coeff: usize,
        row: usize,
        col: usize,
    },

    #[error("entry ({row},{col}) depends nonlinearly on the free parameters")]
    NonlinearFamily { row: usize, col: usize },

    #[error("residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
