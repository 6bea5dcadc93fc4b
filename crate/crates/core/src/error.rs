use thiserror::Error;

/// Failures raised by the library. Numerical rejections carry the offending residual.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error(
        "operator is not positive semidefinite (most negative eigenvalue {min_eigenvalue:.3e})"
    )]
    NotPositive { min_eigenvalue: f64 },
    #[error("operation increases trace (largest effect eigenvalue {max_eigenvalue:.17e})")]
    TraceIncreasing { max_eigenvalue: f64 },
    #[error(
        "Kraus operators violate sum E_j^dag E_j <= I (largest eigenvalue {max_eigenvalue:.17e})"
    )]
    KrausBoundViolated { max_eigenvalue: f64 },
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("more columns ({cols}) than rows ({rows})")]
    TooManyColumns { rows: usize, cols: usize },
    #[error("columns are not orthonormal (residual {residual:.3e})")]
    NotIsometry { residual: f64 },
    #[error("not a channel (normalization residual {residual:.3e})")]
    NotChannel { residual: f64 },
    #[error("not a density matrix: {0}")]
    NotState(String),
    #[error("supermap is not deterministic (residual {residual:.3e})")]
    NotDeterministic { residual: f64 },
    #[error("supermap has no Kraus operators")]
    EmptyKraus,
    #[error("tester normalization violated (residual {residual:.3e})")]
    NotNormalized { residual: f64 },
    #[error("invalid POVM (residual {residual:.3e})")]
    InvalidPovm { residual: f64 },
    #[error("not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("state is not faithful")]
    NotFaithful,
    #[error("POVM not informationally complete (rank {rank} of {required})")]
    PovmNotInformationallyComplete { rank: usize, required: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
