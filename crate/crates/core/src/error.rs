use thiserror::Error;

/// Errors raised while building sectors, operators and reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension q must be at least {min}, got {q}")]
    InvalidDimension { q: usize, min: usize },

    #[error("mode index {mode} out of range 1..={q}")]
    ModeOutOfRange { mode: usize, q: usize },

    #[error("sector (q={q}, n={n}) has {dim} states, above the cap of {cap}")]
    DimensionCap {
        q: usize,
        n: usize,
        dim: u128,
        cap: usize,
    },

    #[error("sector mismatch: expected (q={expected_q}, n={expected_n}), found (q={found_q}, n={found_n})")]
    SectorMismatch {
        expected_q: usize,
        expected_n: usize,
        found_q: usize,
        found_n: usize,
    },

    #[error("sector n={n} is not instantiated (top sector is n={top})")]
    SectorNotInstantiated { n: usize, top: usize },

    #[error("vector length {found} does not match sector dimension {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid generator indices ({i}, {j}) for q={q}")]
    InvalidGenerator { i: usize, j: usize, q: usize },

    #[error("invalid subalgebra dimension q'={q_prime} for q={q}")]
    InvalidSubdimension { q_prime: usize, q: usize },

    #[error("n_max={n_max} is too small; at least {min} is required")]
    NMaxTooSmall { n_max: usize, min: usize },

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("eigensolver failed to converge on a block of dimension {dim}")]
    EigensolverFailed { dim: usize },

    #[error("integer overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("snapping failed in sector (q={q}, n={n}) while refining with {operator}: eigenvalue {eigenvalue} (eigenspace of dimension {dim})")]
    SnapFailed {
        q: usize,
        n: usize,
        operator: String,
        eigenvalue: f64,
        dim: usize,
    },

    #[error("malformed data: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
