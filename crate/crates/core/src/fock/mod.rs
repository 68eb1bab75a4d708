//! Brute-force photon statistics of one- and two-mode Gaussian states on a
//! truncated Fock basis.
//!
//! States are built from number or coherent states by exponentiating the
//! quadratic generators of squeezing, rotation, beam splitting and
//! displacement. Nothing here uses covariance matrices, so the results
//! serve as an independent check of the closed forms in [`crate::state`].

pub mod expm;
pub mod operator;
pub mod oracle;
pub mod state;
pub mod workspace;

pub use operator::FockOperator;
pub use oracle::{evaluate_at_cutoff, oracle_moments, OracleConfig, OracleReport, OracleValue};
pub use state::{
    build_gaussian_fock, build_gaussian_fock_with, fock_mean_and_variance, FockRecipe, FockState,
    ThermalStrategy, LEAKAGE_TOL,
};
pub use workspace::FockWorkspace;
