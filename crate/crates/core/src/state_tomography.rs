//! Gaussian state tomography from `2n² + 3n` photon-number averages.
//!
//! Layout of the plan:
//! * one bare measurement, giving `N̄ = ⟨N⟩`;
//! * a unit displacement along every quadrature, giving the mean vector and,
//!   with `N̄`, the trace of `V`;
//! * three single-mode gates per mode (two for the last mode, whose
//!   `σqq + σpp` follows from the trace), giving every diagonal block;
//! * four two-mode gates per unordered pair, giving every off-diagonal block.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg;
use crate::measurement::{measure_all, GateSpec, MeasurementSetting, Measurements, ShotBudget};
use crate::state::{GaussianState, Moments, PhotonStatistics};
use crate::symplectic::{Quadrature, SymplecticGate};

/// Squeezing and phase of one probe gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateParams {
    pub r: f64,
    pub phi: f64,
}

impl GateParams {
    /// Parameters for a squeezing gain `e^r = gain`.
    pub fn from_gain(gain: f64, phi: f64) -> Self {
        Self { r: gain.ln(), phi }
    }
}

/// Gate and displacement constants used by a plan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateChoice {
    /// Displacement amplitude of the mean-estimation settings.
    pub displacement: f64,
    /// Single-mode gates. The last mode uses only the first and third.
    pub intra: [GateParams; 3],
    pub inter: [GateParams; 4],
}

impl Default for GateChoice {
    fn default() -> Self {
        let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
        Self {
            displacement: 1.0,
            intra: [
                GateParams::from_gain(s2, 0.0),
                GateParams::from_gain(s3, 0.0),
                GateParams::from_gain(s2, FRAC_PI_4),
            ],
            inter: [
                GateParams::from_gain(s2, 0.0),
                GateParams::from_gain(s3, 0.0),
                GateParams::from_gain(s2, FRAC_PI_2),
                GateParams::from_gain(s3, FRAC_PI_2),
            ],
        }
    }
}

impl GateChoice {
    pub fn validate(&self) -> Result<()> {
        let all = std::iter::once(self.displacement)
            .chain(self.intra.iter().flat_map(|g| [g.r, g.phi]))
            .chain(self.inter.iter().flat_map(|g| [g.r, g.phi]));
        for x in all {
            if !x.is_finite() {
                return Err(Error::NonFinite("gate choice"));
            }
        }
        if self.displacement == 0.0 {
            return Err(Error::InvalidParameter(
                "displacement amplitude must be non-zero".into(),
            ));
        }
        // the three linear systems must be solvable for these constants
        linalg::solve(&intra_matrix(&self.intra), &DVector::zeros(3), "intra-mode system")?;
        let last = [self.intra[0], self.intra[2]];
        linalg::solve(&last_mode_matrix(&last), &DVector::zeros(3), "last-mode system")?;
        linalg::solve(&inter_matrix(&self.inter), &DVector::zeros(4), "inter-mode system")?;
        Ok(())
    }
}

/// `PᵀP − I` for a single-mode gate.
pub fn intra_kernel(g: GateParams) -> Matrix2<f64> {
    let p = SymplecticGate::p_gate(g.r, g.phi).gram();
    Matrix2::new(p[(0, 0)] - 1.0, p[(0, 1)], p[(1, 0)], p[(1, 1)] - 1.0)
}

/// `QᵀQ − I` for a two-mode gate.
pub fn inter_kernel(g: GateParams) -> DMatrix<f64> {
    SymplecticGate::q_gate(g.r, g.phi).gram() - DMatrix::identity(4, 4)
}

/// Coefficients `(k₁, k₂, k₃)` of `PᵀP − I = [[k₁, k₃], [k₃, k₂]]`.
pub fn intra_coefficients(g: GateParams) -> [f64; 3] {
    let k = intra_kernel(g);
    [k[(0, 0)], k[(1, 1)], 0.5 * (k[(0, 1)] + k[(1, 0)])]
}

fn intra_row(g: GateParams) -> [f64; 3] {
    let [k1, k2, k3] = intra_coefficients(g);
    [k1, k2, 2.0 * k3]
}

fn intra_matrix(gs: &[GateParams; 3]) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| intra_row(gs[i])[j])
}

fn last_mode_matrix(gs: &[GateParams; 2]) -> DMatrix<f64> {
    let rows = [intra_row(gs[0]), intra_row(gs[1]), [1.0, 1.0, 0.0]];
    DMatrix::from_fn(3, 3, |i, j| rows[i][j])
}

/// Row `i` holds the off-diagonal block of `QᵀQ − I` for gate `i`, ordered
/// `(γqq, γqp, γpq, γpp)`.
fn inter_matrix(gs: &[GateParams; 4]) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| {
        let k = inter_kernel(gs[i]);
        k[(j / 2, 2 + j % 2)]
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntraSettings {
    pub mode: usize,
    pub gates: Vec<GateParams>,
    pub settings: Vec<MeasurementSetting>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterSettings {
    pub modes: [usize; 2],
    pub settings: Vec<MeasurementSetting>,
}

/// The measurement plan, grouped by the role each setting plays.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatePlan {
    pub n: usize,
    pub choice: GateChoice,
    pub bare: MeasurementSetting,
    /// Ordered `q₀, p₀, q₁, p₁, …`.
    pub displaced: Vec<MeasurementSetting>,
    pub intra: Vec<IntraSettings>,
    pub inter: Vec<InterSettings>,
}

impl StatePlan {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_choice(n, GateChoice::default())
    }

    pub fn with_choice(n: usize, choice: GateChoice) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        choice.validate()?;
        let displaced = (0..n)
            .flat_map(|m| {
                [Quadrature::Q, Quadrature::P]
                    .map(|ax| MeasurementSetting::displaced(m, ax, choice.displacement))
            })
            .collect();
        let intra = (0..n)
            .map(|mode| {
                let gates: Vec<GateParams> = if mode + 1 < n {
                    choice.intra.to_vec()
                } else {
                    vec![choice.intra[0], choice.intra[2]]
                };
                let settings = gates
                    .iter()
                    .map(|g| {
                        MeasurementSetting::gated(GateSpec::P {
                            mode,
                            r: g.r,
                            phi: g.phi,
                        })
                    })
                    .collect();
                IntraSettings {
                    mode,
                    gates,
                    settings,
                }
            })
            .collect();
        let mut inter = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let settings = choice
                    .inter
                    .iter()
                    .map(|g| {
                        MeasurementSetting::gated(GateSpec::Q {
                            modes: [i, j],
                            r: g.r,
                            phi: g.phi,
                        })
                    })
                    .collect();
                inter.push(InterSettings {
                    modes: [i, j],
                    settings,
                });
            }
        }
        Ok(Self {
            n,
            choice,
            bare: MeasurementSetting::bare(),
            displaced,
            intra,
            inter,
        })
    }

    /// Every setting in plan order.
    pub fn settings(&self) -> Vec<MeasurementSetting> {
        let mut out = vec![self.bare.clone()];
        out.extend(self.displaced.iter().cloned());
        out.extend(self.intra.iter().flat_map(|b| b.settings.iter().cloned()));
        out.extend(self.inter.iter().flat_map(|b| b.settings.iter().cloned()));
        out
    }

    pub fn len(&self) -> usize {
        1 + self.displaced.len()
            + self.intra.iter().map(|b| b.settings.len()).sum::<usize>()
            + self.inter.iter().map(|b| b.settings.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same plan with every label namespaced by `prefix`.
    pub fn prefixed(&self, prefix: &str) -> Self {
        let pre = |s: &MeasurementSetting| s.prefixed(prefix);
        Self {
            n: self.n,
            choice: self.choice,
            bare: pre(&self.bare),
            displaced: self.displaced.iter().map(pre).collect(),
            intra: self
                .intra
                .iter()
                .map(|b| IntraSettings {
                    mode: b.mode,
                    gates: b.gates.clone(),
                    settings: b.settings.iter().map(pre).collect(),
                })
                .collect(),
            inter: self
                .inter
                .iter()
                .map(|b| InterSettings {
                    modes: b.modes,
                    settings: b.settings.iter().map(pre).collect(),
                })
                .collect(),
        }
    }
}

/// `2n² + 3n`.
pub fn optimal_state_setting_count(n: usize) -> usize {
    2 * n * n + 3 * n
}

/// Mean vector from displaced averages: `d̂ⱼ = (mⱼ − N̄ − a²/2)/a`.
pub fn mean_from_displaced(displaced: &[f64], n_bar: f64, amount: f64) -> DVector<f64> {
    DVector::from_iterator(
        displaced.len(),
        displaced
            .iter()
            .map(|m| (m - n_bar - 0.5 * amount * amount) / amount),
    )
}

/// `(d̂, N̄)` from the bare and displaced settings of a plan.
pub fn estimate_mean(plan: &StatePlan, results: &Measurements) -> Result<(DVector<f64>, f64)> {
    let n_bar = results.get(&plan.bare.label)?;
    let m = plan
        .displaced
        .iter()
        .map(|s| results.get(&s.label))
        .collect::<Result<Vec<_>>>()?;
    Ok((mean_from_displaced(&m, n_bar, plan.choice.displacement), n_bar))
}

/// `Tr V = 2N̄ − ‖d̂‖² + n`.
pub fn estimate_trace(d: &DVector<f64>, n_bar: f64, n: usize) -> f64 {
    2.0 * n_bar - d.norm_squared() + n as f64
}

fn mode_mean(d: &DVector<f64>, mode: usize) -> nalgebra::Vector2<f64> {
    nalgebra::Vector2::new(d[2 * mode], d[2 * mode + 1])
}

fn solve_with_residual(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    what: &str,
) -> Result<(DVector<f64>, f64)> {
    let x = linalg::solve(a, b, what)?;
    let residual = linalg::max_abs_vec(&(a * &x - b));
    Ok((x, residual))
}

/// Diagonal blocks `V̂ᵢᵢ` and the residual of each linear solve.
pub fn estimate_intra(
    plan: &StatePlan,
    results: &Measurements,
    d: &DVector<f64>,
    n_bar: f64,
    trace: f64,
) -> Result<(Vec<Matrix2<f64>>, Vec<f64>)> {
    let n = plan.n;
    let mut blocks = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut trace_left = trace;
    for block in &plan.intra {
        let mode = block.mode;
        let dm = mode_mean(d, mode);
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (g, s) in block.gates.iter().zip(&block.settings) {
            let k = intra_kernel(*g);
            rows.push(intra_row(*g));
            rhs.push(2.0 * (results.get(&s.label)? - n_bar) - dm.dot(&(k * dm)));
        }
        if block.gates.len() == 2 {
            rows.push([1.0, 1.0, 0.0]);
            rhs.push(trace_left);
        }
        let a = DMatrix::from_fn(3, 3, |i, j| rows[i][j]);
        let (x, res) = solve_with_residual(
            &a,
            &DVector::from_vec(rhs),
            &format!("intra-mode block of mode {mode}"),
        )?;
        let v = Matrix2::new(x[0], x[2], x[2], x[1]);
        trace_left -= x[0] + x[1];
        blocks.push(v);
        residuals.push(res);
    }
    Ok((blocks, residuals))
}

/// Off-diagonal blocks `V̂ᵢⱼ` (`i < j`, plan order) and solve residuals.
pub fn estimate_inter(
    plan: &StatePlan,
    results: &Measurements,
    d: &DVector<f64>,
    n_bar: f64,
    intra: &[Matrix2<f64>],
) -> Result<(Vec<Matrix2<f64>>, Vec<f64>)> {
    let mut blocks = Vec::with_capacity(plan.inter.len());
    let mut residuals = Vec::with_capacity(plan.inter.len());
    let a = inter_matrix(&plan.choice.inter);
    for block in &plan.inter {
        let [i, j] = block.modes;
        let dij = DVector::from_vec(vec![d[2 * i], d[2 * i + 1], d[2 * j], d[2 * j + 1]]);
        let mut rhs = DVector::zeros(4);
        for (k, (g, s)) in plan.choice.inter.iter().zip(&block.settings).enumerate() {
            let ker = inter_kernel(*g);
            let kii = ker.fixed_view::<2, 2>(0, 0).into_owned();
            let kjj = ker.fixed_view::<2, 2>(2, 2).into_owned();
            let local = 0.5 * ((intra[i] * kii).trace() + (intra[j] * kjj).trace());
            rhs[k] = results.get(&s.label)? - n_bar - local - 0.5 * dij.dot(&(&ker * &dij));
        }
        let (x, res) = solve_with_residual(&a, &rhs, &format!("inter-mode block ({i}, {j})"))?;
        blocks.push(Matrix2::new(x[0], x[1], x[2], x[3]));
        residuals.push(res);
    }
    Ok((blocks, residuals))
}

/// Options applied after the linear inversion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorOptions {
    /// Clip symplectic eigenvalues of `V̂` at ½. Off by default: the estimator
    /// is linear and raw output is reported unless asked otherwise.
    #[serde(default)]
    pub project: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residuals {
    pub intra: Vec<f64>,
    pub inter: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateEstimate {
    /// Reported moments: `raw`, or its projection when requested.
    pub moments: Moments,
    pub raw: Moments,
    pub mean_photon: f64,
    pub trace: f64,
    pub residuals: Residuals,
    /// Minimum eigenvalue of `V̂ + iΩ/2` for the raw estimate.
    pub physicality_margin: f64,
    pub projected: bool,
    pub setting_count: usize,
}

/// Inverts a complete set of plan results.
pub fn estimate_state(
    plan: &StatePlan,
    results: &Measurements,
    options: EstimatorOptions,
) -> Result<StateEstimate> {
    let n = plan.n;
    let (d, n_bar) = estimate_mean(plan, results)?;
    let trace = estimate_trace(&d, n_bar, n);
    let (intra, intra_res) = estimate_intra(plan, results, &d, n_bar, trace)?;
    let (inter, inter_res) = estimate_inter(plan, results, &d, n_bar, &intra)?;
    let mut v = DMatrix::zeros(2 * n, 2 * n);
    for (m, b) in intra.iter().enumerate() {
        v.fixed_view_mut::<2, 2>(2 * m, 2 * m).copy_from(b);
    }
    for (blk, b) in plan.inter.iter().zip(&inter) {
        let [i, j] = blk.modes;
        v.fixed_view_mut::<2, 2>(2 * i, 2 * j).copy_from(b);
        v.fixed_view_mut::<2, 2>(2 * j, 2 * i).copy_from(&b.transpose());
    }
    let raw = Moments::new(d, linalg::symmetrize(&v))?;
    let physicality_margin = raw.physicality_margin();
    let moments = if options.project {
        raw.project_to_physical()
    } else {
        raw.clone()
    };
    Ok(StateEstimate {
        moments,
        raw,
        mean_photon: n_bar,
        trace,
        residuals: Residuals {
            intra: intra_res,
            inter: inter_res,
        },
        physicality_margin,
        projected: options.project,
        setting_count: plan.len(),
    })
}

/// Simulates the plan on `state` and inverts the results.
pub fn tomograph_state(
    state: &GaussianState,
    plan: &StatePlan,
    budget: &ShotBudget,
    options: EstimatorOptions,
    exec: Execution,
) -> Result<(StateEstimate, Measurements)> {
    if state.n() != plan.n {
        return Err(Error::DimensionMismatch {
            expected: 2 * plan.n,
            found: 2 * state.n(),
        });
    }
    let results = measure_all(state, &plan.settings(), budget, exec)?;
    Ok((estimate_state(plan, &results, options)?, results))
}
