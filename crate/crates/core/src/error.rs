use thiserror::Error;

/// Errors raised by the simulator.
///
/// The variants fall into two families that the CLI maps onto distinct exit
/// codes: input problems (`is_config_error`) and numerical failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("cannot parse Pauli string {0:?}")]
    PauliParse(String),
    #[error("unknown code {0:?}")]
    UnknownCode(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("error basis is not orthonormal (residual {residual:e}); the code is degenerate for this budget")]
    DegenerateErrorBasis { residual: f64 },
    #[error("coupling matrices are not xy-symmetric (max |J^xy - J^yx| = {0:e})")]
    AsymmetricCoupling(f64),
    #[error("{n_spins} spins is too large for dense diagonalization (limit {limit})")]
    TooLarge { n_spins: usize, limit: usize },
    #[error("propagation failed: {0}")]
    Propagation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_config_error(&self) -> bool {
        !matches!(
            self,
            Error::Propagation(_) | Error::DegenerateErrorBasis { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
