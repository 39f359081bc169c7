use crate::system::Label;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building or transforming relational
/// Gaussian states.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate particle label `{0}`")]
    DuplicateLabel(Label),
    #[error("mass of particle `{label}` must be strictly positive, got {mass}")]
    NonPositiveMass { label: Label, mass: f64 },
    #[error("a particle system needs at least two particles, got {0}")]
    TooFewParticles(usize),
    #[error("unknown particle label `{0}`")]
    UnknownLabel(Label),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix not symmetric: max |M - M^T| entry {max_asym:e} exceeds {tol:e}")]
    NonSymmetric { max_asym: f64, tol: f64 },
    #[error("moment query references `{0}`, which this perspective does not describe")]
    UnknownParticle(Label),
    #[error("correlation requested with a zero-variance operand")]
    ZeroVarianceCorrelation,
    #[error("covariance matrix has odd dimension {0}")]
    OddDimension(usize),
    #[error("symplectic eigenvalue range [{lo}, {hi}] must satisfy 1/2 <= lo <= hi")]
    InvalidNuRange { lo: f64, hi: f64 },
    #[error("source and target frame are both `{0}`")]
    SameFrame(Label),
    #[error("invalid frame choice: {0}")]
    InvalidFrameChoice(String),
    #[error("listed frame `{0}` overlaps the observed pair")]
    FrameOverlapsPair(Label),
    #[error("hamiltonian frame `{hamiltonian}` does not match state frame `{state}`")]
    FrameMismatch { hamiltonian: Label, state: Label },
    #[error("subsystem covariance determinant {0} is not positive")]
    NonPositiveDeterminant(f64),
    #[error("parameter `{name}` must be strictly positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("momentum grids support 1 or 2 axes, got {0}")]
    UnsupportedDimension(usize),
    #[error("grid count {got} is not a power of two in [{min}, {max}]")]
    InvalidGridCount { got: usize, min: usize, max: usize },
    #[error("momentum covariance is not positive definite")]
    NonPositiveDefiniteCovariance,
    #[error("grid too coarse: estimated quadrature error {err:e} on a momentum variance exceeds {tol:e}")]
    GridTooCoarse { err: f64, tol: f64 },
    #[error("substitution needs source samples at {coordinate} on axis {axis}, beyond the stored extent")]
    InterpolationOutOfRange { axis: usize, coordinate: f64 },
    #[error("grid differentiation unstable: stencil disagreement {dev:e} exceeds {tol:e}")]
    DifferentiationUnstable { dev: f64, tol: f64 },
}
