use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A†| = {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("pre- and post-selected states are orthogonal (|<phi|psi>| = {overlap:e})")]
    OrthogonalPrePost { overlap: f64 },

    #[error("operation requires a {expected} distribution, got {found}")]
    WrongKind { expected: &'static str, found: &'static str },

    #[error("matrix is not a projector (max |P^2 - P| = {deviation:e})")]
    NotProjector { deviation: f64 },

    #[error("density operator invalid: {0}")]
    InvalidDensity(String),

    #[error("value field and wavefunction live on different grids")]
    GridMismatch,

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("trajectory {trajectory} hit a node of the wavefunction at t = {time}, x = {position}")]
    NodeEncounter {
        trajectory: usize,
        time: f64,
        position: f64,
    },

    #[error("density p(x|psi) = {density:e} is too small at the requested point")]
    ZeroDensityPoint { density: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
