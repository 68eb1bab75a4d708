//! Quadrature moments expressed through photon-number averages, and the
//! variance those photon-number estimators inherit.
//!
//! Each term below is measured on a separate copy of the state, so the
//! estimators are sums of independent averages and their variances add with
//! squared coefficients.

use serde::Serialize;

use crate::error::Result;
use crate::measurement::{GateSpec, MeasurementSetting};
use crate::state::GaussianState;
use crate::state_tomography::GateParams;
use crate::symplectic::Quadrature;

/// `⟨qᵢ⟩ = m(D(1,0)) − N̄ − ½` (likewise for `p`).
pub fn quadrature_mean(displaced: f64, bare: f64) -> f64 {
    displaced - bare - 0.5
}

/// `⟨qᵢ²⟩ = 6[m(√3, 0) − 2·m(√2, 0) + N̄]`, symmetrically ordered.
///
/// The coefficient pattern follows from `PᵀP − I = diag(−2/3, 2)` and
/// `diag(−1/2, 1)` for the two gates: `(m₃ − N̄) − 2(m₂ − N̄) = ⟨q²⟩/6`.
pub fn q_squared(m_sqrt3: f64, m_sqrt2: f64, bare: f64) -> f64 {
    6.0 * (m_sqrt3 - 2.0 * m_sqrt2 + bare)
}

/// Single-shot variance of the `⟨q⟩` estimator.
pub fn quadrature_estimator_variance(var_displaced: f64, var_bare: f64) -> f64 {
    var_displaced + var_bare
}

/// Single-shot variance of the `⟨q²⟩` estimator: `36(Var₃ + 4Var₂ + Var_N)`.
pub fn q_squared_estimator_variance(var_sqrt3: f64, var_sqrt2: f64, var_bare: f64) -> f64 {
    36.0 * (var_sqrt3 + 4.0 * var_sqrt2 + var_bare)
}

/// Per-shot estimator variances for one mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureVariances {
    pub q: f64,
    pub p: f64,
    pub q_squared: f64,
}

pub fn quadrature_variances(state: &GaussianState, mode: usize) -> Result<QuadratureVariances> {
    let var = |s: MeasurementSetting| s.moments(state).map(|(_, v)| v);
    let bare = var(MeasurementSetting::bare())?;
    let vq = var(MeasurementSetting::displaced(mode, Quadrature::Q, 1.0))?;
    let vp = var(MeasurementSetting::displaced(mode, Quadrature::P, 1.0))?;
    let gate = |gain: f64| {
        let g = GateParams::from_gain(gain, 0.0);
        MeasurementSetting::gated(GateSpec::P {
            mode,
            r: g.r,
            phi: g.phi,
        })
    };
    let v3 = var(gate(3f64.sqrt()))?;
    let v2 = var(gate(2f64.sqrt()))?;
    Ok(QuadratureVariances {
        q: quadrature_estimator_variance(vq, bare),
        p: quadrature_estimator_variance(vp, bare),
        q_squared: q_squared_estimator_variance(v3, v2, bare),
    })
}
