use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("gcd({a}, {c}) != 1")]
    NotCoprime { a: i64, c: i64 },
    #[error("modulus c must be nonzero")]
    ZeroModulus,
    #[error("matrix has determinant {0}, expected 1")]
    Determinant(i128),
    #[error("wrong monodromy class: {0}")]
    Class(String),
    #[error("monodromy is +-Id; mapping torus formulas exclude it")]
    IdentityClass,
    #[error("connection not admissible: {0}")]
    Admissibility(String),
    #[error("gauge phase lambda only allowed when nu is integral")]
    Gauge,
    #[error("no closed formula for this input: {0}")]
    OutOfScope(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("phase lists differ in length ({plus} vs {minus})")]
    DimensionMismatch { plus: usize, minus: usize },
    #[error("degree l must be nonzero")]
    ZeroDegree,
    #[error("(g, h) lies on the integer lattice")]
    LatticePoint,
    #[error("series did not converge after {terms} terms (tail bound {tail:e})")]
    NonConvergence { terms: usize, tail: f64 },
    #[error("quadrature failed, achieved error estimate {achieved:e}")]
    Quadrature { achieved: f64 },
}

impl Error {
    /// True for failures of numerical convergence as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Quadrature { .. })
    }
}
