//! Gaussian state and channel tomography from total photon-number
//! measurements, with a finite-shot simulator and a truncated-Fock oracle.

pub mod channel;
pub mod channel_tomography;
pub mod curves;
pub mod error;
pub mod exec;
pub mod fock;
pub mod linalg;
pub mod measurement;
pub mod quadrature;
pub mod random;
pub mod state;
pub mod state_tomography;
pub mod symplectic;

pub use channel::{CpDiagnostic, GaussianChannel};
pub use channel_tomography::{ChannelEstimate, ChannelPlan, RootPolicy};
pub use error::{Error, Result};
pub use exec::Execution;
pub use measurement::{GateSpec, MeasurementSetting, Measurements, SettingKind, ShotBudget};
pub use state::{
    GaussianState, Moments, PhotonStatistics, SqueezedThermalParams, TwoModeBenchmark,
    VarianceForm,
};
pub use state_tomography::{EstimatorOptions, GateChoice, GateParams, StateEstimate, StatePlan};
pub use symplectic::{DisplacementVector, GateLabel, Quadrature, SymplecticGate};
