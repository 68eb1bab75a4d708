//! Photon-number mean and variance curves for the benchmark states, swept
//! over displacement or squeezing, emitted as CSV.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{GateSpec, MeasurementSetting};
use crate::state::{GaussianState, PhotonStatistics, SqueezedThermalParams, TwoModeBenchmark, VarianceForm};
use crate::state_tomography::GateParams;
use crate::symplectic::Quadrature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    U,
    S,
}

/// Inclusive grid `start, start + step, …, stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    pub fn points(&self) -> Result<Vec<f64>> {
        if ![self.start, self.stop, self.step].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("sweep grid"));
        }
        if !(self.step > 0.0) || self.stop < self.start {
            return Err(Error::InvalidParameter(format!(
                "sweep needs step > 0 and stop >= start, got start={} stop={} step={}",
                self.start, self.stop, self.step
            )));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(Error::InvalidParameter(format!(
                "sweep has {count} points; at most 1000000 allowed"
            )));
        }
        Ok((0..count)
            .map(|k| self.start + k as f64 * self.step)
            .collect())
    }
}

/// State family whose parameter is swept.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveState {
    SingleMode { params: SqueezedThermalParams },
    TwoMode { benchmark: TwoModeBenchmark },
}

impl CurveState {
    /// State at sweep value `x`. Sweeping `s` on the two-mode state sets both
    /// factors' squeezing.
    pub fn at(&self, variable: SweepVariable, x: f64) -> Result<GaussianState> {
        match *self {
            CurveState::SingleMode { mut params } => {
                match variable {
                    SweepVariable::U => params.u = x,
                    SweepVariable::S => params.s = x,
                }
                GaussianState::squeezed_thermal(&params)
            }
            CurveState::TwoMode { mut benchmark } => {
                match variable {
                    SweepVariable::U => benchmark.u = x,
                    SweepVariable::S => {
                        benchmark.first.s = x;
                        benchmark.second.s = x;
                    }
                }
                GaussianState::two_mode_benchmark(&benchmark)
            }
        }
    }

    pub fn modes(&self) -> usize {
        match self {
            CurveState::SingleMode { .. } => 1,
            CurveState::TwoMode { .. } => 2,
        }
    }

    /// The probe gates compared in the variance study for this family.
    pub fn default_gates(&self) -> Vec<GateParams> {
        let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
        match self {
            CurveState::SingleMode { .. } => vec![
                GateParams::from_gain(s2, 0.0),
                GateParams::from_gain(s3, 0.0),
                GateParams::from_gain(s2, FRAC_PI_4),
            ],
            CurveState::TwoMode { .. } => vec![
                GateParams::from_gain(s2, 0.0),
                GateParams::from_gain(s3, 0.0),
                GateParams::from_gain(s2, FRAC_PI_2),
                GateParams::from_gain(s3, FRAC_PI_2),
            ],
        }
    }

    fn gate_spec(&self, g: GateParams) -> GateSpec {
        match self {
            CurveState::SingleMode { .. } => GateSpec::P {
                mode: 0,
                r: g.r,
                phi: g.phi,
            },
            CurveState::TwoMode { .. } => GateSpec::Q {
                modes: [0, 1],
                r: g.r,
                phi: g.phi,
            },
        }
    }
}

/// Column name fragment for a gate, e.g. `P[gain=1.414214;phi=0.785398]`.
pub fn gate_column(kind: &str, g: GateParams) -> String {
    format!("{kind}[gain={:.6};phi={:.6}]", g.r.exp(), g.phi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// CSV with a header row and every value in `{:.16e}` (17 significant
    /// digits).
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Mean and variance of the bare, mode-0 displaced, and each gated photon
/// count along the sweep.
pub fn variance_curves(
    state: &CurveState,
    sweep: &Sweep,
    gates: &[GateParams],
    form: VarianceForm,
) -> Result<CurveTable> {
    let n = state.modes();
    let kind = if n == 1 { "P" } else { "Q" };
    let var_name = match sweep.variable {
        SweepVariable::U => "u",
        SweepVariable::S => "s",
    };
    let mut columns: Vec<String> = [
        var_name,
        "mean_bare",
        "var_bare",
        "mean_disp_q",
        "var_disp_q",
        "mean_disp_p",
        "var_disp_p",
        "dmean_disp_q",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for g in gates {
        let c = gate_column(kind, *g);
        columns.push(format!("mean_{c}"));
        columns.push(format!("var_{c}"));
    }
    let dq = MeasurementSetting::displaced(0, Quadrature::Q, 1.0);
    let dp = MeasurementSetting::displaced(0, Quadrature::P, 1.0);
    let mut rows = Vec::new();
    for x in sweep.points()? {
        let st = state.at(sweep.variable, x)?;
        let bare_mean = st.mean_photon();
        let (mq, vq) = dq.moments(&st)?;
        let (mp, vp) = dp.moments(&st)?;
        let mut row = vec![x, bare_mean, st.photon_variance(), mq, vq, mp, vp, mq - bare_mean];
        for g in gates {
            let gate = state.gate_spec(*g).gate(n)?;
            row.push(st.gated_mean_photon(&gate)?);
            row.push(st.gated_photon_variance(&gate, form)?);
        }
        rows.push(row);
    }
    Ok(CurveTable { columns, rows })
}

/// Single-mode family used for the displacement sweep of the variance
/// study: `N_th = 1`, `β = π/3`, `s = 0.6`.
pub fn single_mode_reference() -> CurveState {
    CurveState::SingleMode {
        params: SqueezedThermalParams::new(1.0, 0.6, std::f64::consts::FRAC_PI_3, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Sweep {
        Sweep {
            variable: SweepVariable::U,
            start: 0.0,
            stop: 2.0,
            step: 0.05,
        }
    }

    #[test]
    fn grid_is_inclusive() {
        let p = grid().points().unwrap();
        assert_eq!(p.len(), 41);
        assert!((p[40] - 2.0).abs() < 1e-12);
        let bad = Sweep { step: 0.0, ..grid() };
        assert!(bad.points().is_err());
    }

    #[test]
    fn reference_values_and_differences() {
        let st = CurveState::SingleMode {
            params: SqueezedThermalParams::new(1.0, 0.0, 0.0, 0.0),
        };
        let t = variance_curves(&st, &grid(), &st.default_gates(), VarianceForm::Transformed)
            .unwrap();
        assert!((t.column("var_bare").unwrap()[0] - 2.0).abs() < 1e-12);
        let u = t.column("u").unwrap();
        let d = t.column("dmean_disp_q").unwrap();
        for (u, d) in u.iter().zip(d) {
            // ½(‖(u+1, u)‖² − ‖(u, u)‖²) = u + ½
            assert!((d - (u + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn gated_columns_increase_with_displacement() {
        let st = single_mode_reference();
        let t = variance_curves(&st, &grid(), &st.default_gates(), VarianceForm::Transformed)
            .unwrap();
        for name in t.columns.iter().filter(|c| c.starts_with("var_")) {
            let col = t.column(name).unwrap();
            assert!(col.windows(2).all(|w| w[1] > w[0]), "{name}");
        }
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 42);
        assert!(csv.starts_with("u,mean_bare,var_bare"));
    }
}
