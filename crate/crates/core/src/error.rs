use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix dimension {dim} is invalid: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("laplace expansion is limited to dimension {max}, got {dim}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("matrix is not antisymmetric: |a[{i}][{j}] + a[{j}][{i}]| = {deviation:e}")]
    NotAntisymmetric { i: usize, j: usize, deviation: f64 },

    #[error("quaternion matrix is not self-dual at block pair ({i}, {j}): deviation {deviation:e}")]
    NotSelfDual { i: usize, j: usize, deviation: f64 },

    #[error("unsupported gamma order {0}: expected a positive integer or half-integer")]
    UnsupportedGammaOrder(f64),

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tol:e}")]
    QuadratureNonConvergence { estimate: f64, tol: f64 },

    #[error("skew-orthogonalisation broke down at pair {pair}: |r| = {norm:e}")]
    SkewBreakdown { pair: usize, norm: f64 },

    #[error("degenerate weight: odd-size normalisation {0:e} is too small")]
    DegenerateWeight(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("duplicate point {0} in configuration")]
    DuplicatePoint(String),

    #[error("S(x_m, x_m) underflowed at x_m = {x_m}; largest usable x_m is about {largest_usable}")]
    Underflow { x_m: f64, largest_usable: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    EigenNonConvergence { iterations: usize },

    #[error("unmatched complex eigenvalue {re} + {im}i")]
    UnmatchedConjugate { re: f64, im: f64 },

    #[error("result has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
