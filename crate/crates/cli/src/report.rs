//! Report documents. Each type doubles as the schema: deserialising a
//! report into its type (unknown fields rejected) validates it.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use pnrtomo::{RootPolicy, VarianceForm};

use crate::config::Shots;

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn vector(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsReport {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

impl MomentsReport {
    pub fn new(d: &DVector<f64>, v: &DMatrix<f64>) -> Self {
        Self {
            mean: vector(d),
            covariance: rows(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualsReport {
    pub intra: Vec<f64>,
    pub inter: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateErrors {
    pub mean_max_abs: f64,
    pub covariance_max_abs: f64,
    pub covariance_frobenius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateTomoReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub shots: Shots,
    pub modes: usize,
    pub setting_count: usize,
    pub optimal_setting_count: usize,
    pub measurements: BTreeMap<String, f64>,
    pub estimate: MomentsReport,
    pub raw_estimate: MomentsReport,
    pub projected: bool,
    pub mean_photon: f64,
    pub trace: f64,
    pub physicality_margin: f64,
    pub residuals: ResidualsReport,
    pub truth: MomentsReport,
    pub errors: StateErrors,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpReport {
    pub noise_min_eigenvalue: f64,
    pub cp_min_eigenvalue: f64,
    pub is_cp: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootCandidateReport {
    pub mean_photon: f64,
    pub mean: Vec<f64>,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootReport {
    /// Zero-based probe index.
    pub probe: usize,
    pub discriminant: f64,
    pub candidates: Vec<RootCandidateReport>,
    pub chosen: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelTruth {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelErrors {
    pub a_max_abs: f64,
    pub b_max_abs: f64,
    pub a_frobenius: f64,
    pub b_frobenius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelTomoReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub shots: Shots,
    pub modes: usize,
    pub setting_count: usize,
    pub optimal_setting_count: usize,
    pub root_policy: RootPolicy,
    pub measurements: BTreeMap<String, f64>,
    pub a_hat: Vec<Vec<f64>>,
    pub b_hat: Vec<Vec<f64>>,
    pub cp: CpReport,
    /// More than one root combination fits the data under the policy.
    pub ambiguous: bool,
    pub cp_consistent_combinations: Option<usize>,
    pub roots: Vec<RootReport>,
    pub first_probe: MomentsReport,
    pub probe_covariance_spread: f64,
    pub truth: ChannelTruth,
    pub errors: ChannelErrors,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesReport {
    pub schema_version: u32,
    pub command: String,
    pub form: VarianceForm,
    pub modes: usize,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// File name of the CSV side file, when one was written.
    pub csv: Option<String>,
}
