use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid frame selector {0} for n = {1}")]
    InvalidSelector(String, usize),

    #[error("integration exceeded the step limit of {0}")]
    StepLimitExceeded(usize),

    #[error("non-finite state at t = {0}")]
    NonFiniteState(f64),

    #[error("function produced a non-finite value")]
    NonFiniteValue,

    #[error("singular Jacobian at iteration {0}")]
    SingularJacobian(usize),

    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },

    #[error("controls are not normalized: sum of r_i^2 = {0}")]
    NotNormalized(f64),

    #[error("velocity is not unit speed: |w|^2 = {0}")]
    NotUnitSpeed(f64),

    #[error("curve carries no control samples")]
    MissingControls,

    #[error("covector vanishes identically")]
    ZeroCovector,

    #[error("no shooting start converged ({starts} starts tried)")]
    NoSolutionFound { starts: usize },

    #[error("structure constants are not antisymmetric at ({0}, {1}, {2})")]
    InvalidStructureConstants(usize, usize, usize),

    #[error("connection and structure constants are inconsistent (torsion at ({0}, {1}))")]
    InconsistentInputs(usize, usize),

    #[error("vectors span a degenerate plane")]
    DegeneratePlane,

    #[error("no conjugate point before t = {0}")]
    NoConjugatePointFound(f64),

    #[error("field is not a contact transformation; residual {residual}")]
    NotContact { residual: String },

    #[error("catalog member {0} failed the contact test")]
    ConstructionFailed(String),

    #[error("linearization of {name} is not in the isotropy algebra: {reason}")]
    NotInIsotropyAlgebra { name: String, reason: String },

    #[error("bracket [{left}, {right}] leaves the catalog span; residual {residual}")]
    NotClosed {
        left: String,
        right: String,
        residual: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
