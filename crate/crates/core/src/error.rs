use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("eigenvalue iteration did not converge at index {index}")]
    NoConvergence { index: usize },

    #[error("matrix is not diagonalizable within the conditioning bound (cond = {cond:.3e})")]
    NotDiagonalizable { cond: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("anti-unitary symmetry violated: commutation residual {residual:.3e} exceeds {tol:.1e}")]
    SymmetryViolated { residual: f64, tol: f64 },

    #[error("complex eigenvalue {value} at index {index} has no conjugate partner")]
    UnpairedEigenvalue { index: usize, value: Complex64 },

    #[error("state is not mapped onto a multiple of itself (overlap {overlap:.3e})")]
    NotProportional { overlap: f64 },

    #[error("value {value} is not unimodular")]
    NotUnimodular { value: Complex64 },

    #[error("no root of the matching function in the search region")]
    NoRootInRegion,

    #[error("M = {m}, zeta = {zeta}: outside the real-spectrum regime zeta^2 < 1/4")]
    OutOfRegime { m: u32, zeta: f64 },

    #[error("unsupported Khare-Mandal index M = {0} (expected 2, 3 or 4)")]
    UnknownM(u32),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("bracket [{lo}, {hi}] does not straddle a change in the complex-pair count")]
    BracketInvalid { lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
