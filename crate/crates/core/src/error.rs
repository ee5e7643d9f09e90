use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("element kind {element} is incompatible with {cells} cells")]
    KindMismatch { element: String, cells: String },

    #[error("refraction index regime violated at ({x}, {y}): n = {n}")]
    Regime { x: f64, y: f64, n: f64 },

    #[error("basis construction failed: {0}")]
    Basis(String),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("singular matrix at pivot {pivot}; perturb the shift")]
    Singular { pivot: usize },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error(
        "eigensolver did not converge: {converged} of {wanted} pairs after {restarts} restarts"
    )]
    NoConvergence {
        converged: usize,
        wanted: usize,
        restarts: usize,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
