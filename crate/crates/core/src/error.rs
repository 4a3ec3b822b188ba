use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e} exceeds tolerance {tol:.3e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("operator is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace:.12} instead of 1")]
    TraceNotOne { trace: f64 },

    #[error("vector is not normalized (squared norm {norm_sq:.12})")]
    NotUnit { norm_sq: f64 },

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("state spectrum incompatible with the requested orbit (max deviation {deviation:.3e})")]
    IncompatibleSpectrum { deviation: f64 },

    #[error("effects are not linearly independent (smallest Gram singular value {min_sv:.3e})")]
    DependentEffects { min_sv: f64 },

    #[error("effects do not sum to the identity (deviation {deviation:.3e})")]
    EffectSumNotIdentity { deviation: f64 },

    #[error("rotation generator does not annihilate the identity direction (norm {norm:.3e})")]
    GeneratorMovesIdentity { norm: f64 },

    #[error("positivity unrecoverable at the requested perturbation size {epsilon:.3e}")]
    PositivityUnrecoverable { epsilon: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("tensor power dimension {dim}^{copies} exceeds the supported cap {cap}")]
    SizeOverflow { dim: usize, copies: u32, cap: usize },

    #[error("complement certification failed: {0}")]
    CertificationFailed(String),

    #[error("Schmidt coefficients are repeated; enable reweighting to handle degenerate spectra")]
    RepeatedSchmidtCoefficients,

    #[error("outcome data is inconsistent: {0}")]
    InconsistentOutcomes(String),

    #[error("degenerate sampler: all sampled points coincide")]
    DegenerateSampler,

    #[error("document error: {0}")]
    Document(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
