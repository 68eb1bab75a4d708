//! The experimental primitive: the average total photon number after an
//! optional displacement or gate, either exact or with finite-shot noise.

use std::collections::BTreeMap;
use std::fmt;

use rand::RngExt;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::random;
use crate::state::{GaussianState, PhotonStatistics, VarianceForm};
use crate::symplectic::{DisplacementVector, Quadrature, SymplecticGate};

/// A gate applied before photon counting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GateSpec {
    /// `S(r)·R(φ)` on one mode.
    P { mode: usize, r: f64, phi: f64 },
    /// `(S(r)⊕I)·B(π/4)·(R(φ)⊕I)` on an ordered pair of modes.
    Q { modes: [usize; 2], r: f64, phi: f64 },
}

impl GateSpec {
    pub fn gate(&self, n: usize) -> Result<SymplecticGate> {
        match *self {
            GateSpec::P { mode, r, phi } => SymplecticGate::p_gate(r, phi).embed(&[mode], n),
            GateSpec::Q { modes, r, phi } => SymplecticGate::q_gate(r, phi).embed(&modes, n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SettingKind {
    Bare,
    Displaced {
        mode: usize,
        axis: Quadrature,
        amount: f64,
    },
    Gated {
        gate: GateSpec,
    },
}

/// One distinct experiment, identified by its label.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementSetting {
    pub label: String,
    pub kind: SettingKind,
}

impl MeasurementSetting {
    pub fn bare() -> Self {
        Self {
            label: "N".into(),
            kind: SettingKind::Bare,
        }
    }

    pub fn displaced(mode: usize, axis: Quadrature, amount: f64) -> Self {
        Self {
            label: format!("D({axis}{mode},{amount:+?})"),
            kind: SettingKind::Displaced { mode, axis, amount },
        }
    }

    pub fn gated(gate: GateSpec) -> Self {
        let label = match gate {
            GateSpec::P { mode, r, phi } => format!("P{mode}(r={r:?},phi={phi:?})"),
            GateSpec::Q { modes, r, phi } => {
                format!("Q{},{}(r={r:?},phi={phi:?})", modes[0], modes[1])
            }
        };
        Self {
            label,
            kind: SettingKind::Gated { gate },
        }
    }

    /// Same experiment under a namespaced label, e.g. per channel probe.
    pub fn prefixed(&self, prefix: &str) -> Self {
        Self {
            label: format!("{prefix}/{}", self.label),
            kind: self.kind,
        }
    }

    /// Exact mean photon number and its single-shot variance.
    pub fn moments(&self, state: &GaussianState) -> Result<(f64, f64)> {
        let n = state.n();
        match self.kind {
            SettingKind::Bare => Ok((state.mean_photon(), state.photon_variance())),
            SettingKind::Displaced { mode, axis, amount } => {
                let r = DisplacementVector::along(n, mode, axis, amount)?;
                Ok((
                    state.displaced_mean_photon(&r)?,
                    state.displaced_photon_variance(&r)?,
                ))
            }
            SettingKind::Gated { gate } => {
                let g = gate.gate(n)?;
                Ok((
                    state.gated_mean_photon(&g)?,
                    state.gated_photon_variance(&g, VarianceForm::Transformed)?,
                ))
            }
        }
    }
}

/// Exact expectation values, or a per-setting shot count with a seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ShotBudget {
    Exact,
    Shots {
        shots: u64,
        seed: u64,
        /// Per-label shot counts that replace the uniform `shots`.
        #[serde(skip_serializing_if = "BTreeMap::is_empty")]
        overrides: BTreeMap<String, u64>,
    },
}

impl ShotBudget {
    pub fn shots(shots: u64, seed: u64) -> Self {
        ShotBudget::Shots {
            shots,
            seed,
            overrides: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ShotBudget::Shots {
            shots, overrides, ..
        } = self
        {
            if *shots == 0 {
                return Err(Error::InvalidParameter("shot count must be at least 1".into()));
            }
            if let Some((label, _)) = overrides.iter().find(|(_, m)| **m == 0) {
                return Err(Error::InvalidParameter(format!(
                    "shot count for `{label}` must be at least 1"
                )));
            }
        }
        Ok(())
    }

    pub fn shots_for(&self, label: &str) -> Option<u64> {
        match self {
            ShotBudget::Exact => None,
            ShotBudget::Shots {
                shots, overrides, ..
            } => Some(*overrides.get(label).unwrap_or(shots)),
        }
    }
}

/// Measured averages keyed by setting label.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Measurements(BTreeMap<String, f64>);

impl Measurements {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: impl Into<String>, value: f64) -> Result<()> {
        let label = label.into();
        if !value.is_finite() {
            return Err(Error::NonFinite("measurement value"));
        }
        if self.0.contains_key(&label) {
            return Err(Error::DuplicateLabel(label));
        }
        self.0.insert(label, value);
        Ok(())
    }

    pub fn get(&self, label: &str) -> Result<f64> {
        self.0
            .get(label)
            .copied()
            .ok_or_else(|| Error::MissingSetting(label.to_string()))
    }

    pub fn extend(&mut self, other: Measurements) -> Result<()> {
        for (k, v) in other.0 {
            self.insert(k, v)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &f64)> {
        self.0.iter()
    }
}

impl FromIterator<(String, f64)> for Measurements {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for Measurements {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.0 {
            writeln!(f, "{k}\t{v:.16e}")?;
        }
        Ok(())
    }
}

const NOISE_DOMAIN: &str = "shot-noise";

/// Simulates one setting.
///
/// In shot mode the estimate is `exact + z·sqrt(Var/M)` with `z ~ N(0, 1)`
/// drawn from a stream keyed by `(seed, label)`.
pub fn measure(
    state: &GaussianState,
    setting: &MeasurementSetting,
    budget: &ShotBudget,
) -> Result<f64> {
    let (mean, var) = setting.moments(state)?;
    match budget {
        ShotBudget::Exact => Ok(mean),
        ShotBudget::Shots { seed, .. } => {
            let m = budget.shots_for(&setting.label).unwrap_or(1);
            if m == 0 {
                return Err(Error::InvalidParameter("shot count must be at least 1".into()));
            }
            let z: f64 = random::keyed(*seed, NOISE_DOMAIN, &setting.label).sample(StandardNormal);
            Ok(mean + z * (var.max(0.0) / m as f64).sqrt())
        }
    }
}

/// Simulates every setting of a plan. Labels must be distinct.
pub fn measure_all(
    state: &GaussianState,
    settings: &[MeasurementSetting],
    budget: &ShotBudget,
    exec: Execution,
) -> Result<Measurements> {
    budget.validate()?;
    check_distinct(settings)?;
    let values = exec.map(settings, |s| measure(state, s, budget));
    let mut out = Measurements::new();
    for (s, v) in settings.iter().zip(values) {
        out.insert(s.label.clone(), v?)?;
    }
    Ok(out)
}

pub fn check_distinct(settings: &[MeasurementSetting]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for s in settings {
        if !seen.insert(s.label.as_str()) {
            return Err(Error::DuplicateLabel(s.label.clone()));
        }
    }
    Ok(())
}
