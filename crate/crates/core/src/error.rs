use thiserror::Error;

/// Errors raised by the tomography workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode count must be at least 1")]
    ZeroModes,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode index {index} out of range for {n} modes")]
    ModeOutOfRange { index: usize, n: usize },

    #[error("mode index {0} listed more than once")]
    DuplicateMode(usize),

    #[error("gate acts on {gate_modes} modes but {listed} were listed")]
    ModeListLength { gate_modes: usize, listed: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symplectic: residual {residual:e}")]
    NotSymplectic { residual: f64 },

    #[error("{what} is not symmetric: asymmetry {asymmetry:e}")]
    NotSymmetric { what: &'static str, asymmetry: f64 },

    #[error("state violates the uncertainty relation: min eigenvalue of V + iΩ/2 is {min_eigenvalue:e}")]
    Unphysical { min_eigenvalue: f64 },

    #[error("noise matrix B is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NoiseNotPositive { min_eigenvalue: f64 },

    #[error("channel is not completely positive: min eigenvalue of B + iΩ - iAΩAᵀ is {min_eigenvalue:e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("measurement for setting `{0}` is missing")]
    MissingSetting(String),

    #[error("duplicate setting label `{0}`")]
    DuplicateLabel(String),

    #[error("singular linear system while estimating {what} (pivot {pivot:e})")]
    SingularSystem { what: String, pivot: f64 },

    #[error("inconsistent measurements for {probe}: discriminant {discriminant:e} is negative")]
    InconsistentMeasurements { probe: String, discriminant: f64 },

    #[error("Fock truncation insufficient at cutoff {cutoff}: trace deficit {leakage:e}; raise cutoff")]
    Truncation { cutoff: usize, leakage: f64 },

    #[error("Fock oracle did not converge below cutoff {max_cutoff}: last change {last_change:e}")]
    NotConverged { max_cutoff: usize, last_change: f64 },

    #[error("matrix exponential residual {residual:e} exceeds tolerance")]
    ExpmResidual { residual: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
