use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure classes of the public
/// operations: domain violations on math kernels, non-convergence of series or
/// quadrature, geometric degeneracies, and configuration problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// UE fell outside the triangulated region (convex hull of the BS set).
    #[error("out of coverage: {0}")]
    OutOfCoverage(String),

    #[error("placement error: {0}")]
    Placement(String),

    /// UE co-located with a BS; path loss is singular there.
    #[error("singularity: {0}")]
    Singularity(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
