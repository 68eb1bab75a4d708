//! Gaussian channel tomography from `6n² + n` photon-number averages.
//!
//! The first coherent probe gets a full state plan, which fixes its output
//! mean and the output covariance `V_G = (AAᵀ + B)/2` shared by every probe.
//! Each remaining probe gets only the `2n` displaced settings; its missing
//! bare average is recovered from the trace of `V_G` through a quadratic.
//!
//! That quadratic has two roots and, for unit displacements, both reproduce
//! the probe's measurements exactly: `(N̄ + δ, d − δ𝟙)` with `δ = (1 + Σd)/n`
//! is always the other root. The measurements alone cannot tell them apart,
//! so the choice is an explicit [`RootPolicy`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{diagnose, CpDiagnostic, GaussianChannel, CP_FLOOR};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg;
use crate::measurement::{measure_all, MeasurementSetting, Measurements, ShotBudget};
use crate::state::PhotonStatistics;
use crate::state_tomography::{
    estimate_state, mean_from_displaced, EstimatorOptions, GateChoice, StateEstimate, StatePlan,
};
use crate::symplectic::DisplacementVector;

/// How to choose between the two roots of each probe's quadratic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootPolicy {
    /// Enumerate every combination of roots across probes, keep those whose
    /// `(Â, B̂)` satisfies the CP condition, and take the minimum-norm one
    /// among the survivors. Falls back to `MinNorm` when no combination is
    /// CP or when there are too many probes to enumerate.
    #[default]
    CpConsistent,
    /// Root whose `d̂` has the smaller Euclidean norm.
    MinNorm,
    /// Root with the smaller `N̄`.
    MinN,
    /// `MinNorm` selection, with both roots flagged in the log.
    ReportBoth,
}

impl RootPolicy {
    pub fn name(self) -> &'static str {
        match self {
            RootPolicy::CpConsistent => "cp-consistent",
            RootPolicy::MinNorm => "min-norm",
            RootPolicy::MinN => "min-n",
            RootPolicy::ReportBoth => "report-both",
        }
    }
}

impl std::str::FromStr for RootPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cp-consistent" => Ok(RootPolicy::CpConsistent),
            "min-norm" => Ok(RootPolicy::MinNorm),
            "min-n" => Ok(RootPolicy::MinN),
            "report-both" => Ok(RootPolicy::ReportBoth),
            other => Err(Error::InvalidParameter(format!(
                "unknown root policy `{other}` (expected cp-consistent, min-norm, min-n or report-both)"
            ))),
        }
    }
}

/// Largest number of free probes for which `CpConsistent` enumerates.
pub const MAX_ENUMERATED_PROBES: usize = 15;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootCandidate {
    pub mean_photon: f64,
    pub mean: Vec<f64>,
    pub norm: f64,
}

/// Both roots of one probe's quadratic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootRecovery {
    pub discriminant: f64,
    /// Ascending in `mean_photon`. Equal entries for a double root.
    pub candidates: [RootCandidate; 2],
}

impl RootRecovery {
    /// Index of the smaller-norm candidate.
    pub fn min_norm(&self) -> usize {
        if self.candidates[1].norm < self.candidates[0].norm {
            1
        } else {
            0
        }
    }
}

/// Solves `2N − Σ((mⱼ − N − a²/2)/a)² + n = Tr V` for `N` and returns both
/// roots with their mean vectors.
///
/// A negative discriminant beyond rounding is reported as inconsistent
/// measurements. A double root is returned twice.
pub fn recover_mean_via_trace(
    displaced: &[f64],
    trace: f64,
    n: usize,
    amount: f64,
    probe: &str,
) -> Result<RootRecovery> {
    if displaced.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: displaced.len(),
        });
    }
    let a2 = amount * amount;
    let c: Vec<f64> = displaced.iter().map(|m| m - 0.5 * a2).collect();
    let s1: f64 = c.iter().sum();
    let s2: f64 = c.iter().map(|x| x * x).sum();
    // 2n N² − 2(a² + S₁) N + S₂ + a²(Tr V − n) = 0
    let qa = 2.0 * n as f64;
    let qb = -2.0 * (a2 + s1);
    let qc = s2 + a2 * (trace - n as f64);
    let disc = qb * qb - 4.0 * qa * qc;
    let scale = qb * qb + (4.0 * qa * qc).abs();
    if disc < -1e-12 * scale.max(1.0) {
        return Err(Error::InconsistentMeasurements {
            probe: probe.to_string(),
            discriminant: disc,
        });
    }
    let root = disc.max(0.0).sqrt();
    // cancellation-free pair: q = −(b + sign(b)√Δ)/2, roots q/a and c/q
    let q = -0.5 * (qb + qb.signum() * root);
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / qa, qc / q)
    };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    let cand = |nb: f64| {
        let d = mean_from_displaced(displaced, nb, amount);
        RootCandidate {
            mean_photon: nb,
            norm: d.norm(),
            mean: d.iter().cloned().collect(),
        }
    };
    Ok(RootRecovery {
        discriminant: disc,
        candidates: [cand(lo), cand(hi)],
    })
}

/// The plan: probe 0 carries a full state plan, the others `2n` displaced
/// settings each.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelPlan {
    pub n: usize,
    /// Coherent probe means, one per column of `A` to recover.
    pub probes: Vec<DVector<f64>>,
    pub first: StatePlan,
    pub others: Vec<Vec<MeasurementSetting>>,
}

pub fn probe_prefix(k: usize) -> String {
    format!("e{}", k + 1)
}

impl ChannelPlan {
    /// Unit-vector probes `e₁ … e₂ₙ`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        let probes = (0..2 * n)
            .map(|k| DisplacementVector::unit(n, k).map(|d| d.into_vector()))
            .collect::<Result<Vec<_>>>()?;
        Self::with_probes(probes, GateChoice::default())
    }

    /// Arbitrary probe means; they must form an invertible matrix.
    pub fn with_probes(probes: Vec<DVector<f64>>, choice: GateChoice) -> Result<Self> {
        let dim = probes.len();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "need 2n probes, got {dim}"
            )));
        }
        let n = dim / 2;
        for p in &probes {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if !p.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite("probe mean"));
            }
        }
        let pm = DMatrix::from_columns(&probes);
        linalg::solve(&pm, &DVector::zeros(dim), "probe matrix")?;
        let base = StatePlan::with_choice(n, choice)?;
        let first = base.prefixed(&probe_prefix(0));
        let others = (1..dim)
            .map(|k| {
                base.displaced
                    .iter()
                    .map(|s| s.prefixed(&probe_prefix(k)))
                    .collect()
            })
            .collect();
        Ok(Self {
            n,
            probes,
            first,
            others,
        })
    }

    pub fn settings(&self) -> Vec<MeasurementSetting> {
        let mut out = self.first.settings();
        out.extend(self.others.iter().flatten().cloned());
        out
    }

    pub fn len(&self) -> usize {
        self.first.len() + self.others.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `6n² + n`.
pub fn optimal_channel_setting_count(n: usize) -> usize {
    6 * n * n + n
}

/// Per-probe record of the root choice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootLog {
    pub probe: usize,
    pub recovery: RootRecovery,
    pub chosen: usize,
    /// Relative trace-equation residual of the chosen root.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelEstimate {
    pub a_hat: DMatrix<f64>,
    pub b_hat: DMatrix<f64>,
    pub cp: CpDiagnostic,
    pub policy: RootPolicy,
    pub roots: Vec<RootLog>,
    /// Root combinations consistent with complete positivity (only counted
    /// by `CpConsistent`; `None` otherwise).
    pub cp_consistent_combinations: Option<usize>,
    pub first_probe: StateEstimate,
    pub setting_count: usize,
}

impl ChannelEstimate {
    /// True when more than one root combination survives the policy's test,
    /// or, for non-enumerating policies, when any probe had distinct roots.
    pub fn is_ambiguous(&self) -> bool {
        match self.cp_consistent_combinations {
            Some(c) => c > 1,
            None => self
                .roots
                .iter()
                .any(|r| r.recovery.candidates[0] != r.recovery.candidates[1]),
        }
    }
}

fn assemble(
    probes: &DMatrix<f64>,
    first_mean: &DVector<f64>,
    columns: &[&[f64]],
    v_g: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let dim = probes.nrows();
    let mut outputs = DMatrix::zeros(dim, dim);
    outputs.set_column(0, first_mean);
    for (k, col) in columns.iter().enumerate() {
        outputs.set_column(k + 1, &DVector::from_column_slice(col));
    }
    // outputs = A·P  ⇒  Aᵀ = P⁻ᵀ·outputsᵀ
    let pt = probes.transpose();
    let mut at = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let col = linalg::solve(&pt, &outputs.row(j).transpose(), "probe matrix")?;
        at.set_column(j, &col);
    }
    let a = at.transpose();
    let b = linalg::symmetrize(&(v_g * 2.0 - &a * a.transpose()));
    Ok((a, b))
}

/// Inverts a complete set of channel-plan results.
pub fn estimate_channel(
    plan: &ChannelPlan,
    results: &Measurements,
    options: EstimatorOptions,
    policy: RootPolicy,
) -> Result<ChannelEstimate> {
    let n = plan.n;
    let first = estimate_state(&plan.first, results, options)?;
    // the raw estimate feeds B̂ so that the channel inversion stays linear
    let v_g = &first.raw.v;
    let trace = first.trace;
    let amount = plan.first.choice.displacement;
    let mut roots = Vec::with_capacity(plan.others.len());
    for (k, settings) in plan.others.iter().enumerate() {
        let m = settings
            .iter()
            .map(|s| results.get(&s.label))
            .collect::<Result<Vec<_>>>()?;
        let rec = recover_mean_via_trace(&m, trace, n, amount, &probe_prefix(k + 1))?;
        roots.push(rec);
    }
    let probes = DMatrix::from_columns(&plan.probes);
    let first_mean = &first.raw.d;

    let mut chosen: Vec<usize> = roots.iter().map(RootRecovery::min_norm).collect();
    if policy == RootPolicy::MinN {
        chosen = vec![0; roots.len()];
    }
    let mut cp_count = None;
    if policy == RootPolicy::CpConsistent && roots.len() <= MAX_ENUMERATED_PROBES {
        let combos = 1usize << roots.len();
        let mut best: Option<(f64, usize)> = None;
        let mut count = 0;
        for mask in 0..combos {
            let pick: Vec<usize> = (0..roots.len()).map(|k| (mask >> k) & 1).collect();
            let cols: Vec<&[f64]> = roots
                .iter()
                .zip(&pick)
                .map(|(r, &c)| r.candidates[c].mean.as_slice())
                .collect();
            let (a, b) = assemble(&probes, first_mean, &cols, v_g)?;
            let d = diagnose(&a, &b);
            if d.noise_min_eigenvalue >= CP_FLOOR && d.cp_min_eigenvalue >= CP_FLOOR {
                count += 1;
                let norm: f64 = roots
                    .iter()
                    .zip(&pick)
                    .map(|(r, &c)| r.candidates[c].norm.powi(2))
                    .sum();
                if best.is_none_or(|(b, _)| norm < b) {
                    best = Some((norm, mask));
                }
            }
        }
        // distinct-root duplicates (double roots) collapse to one combination
        let distinct = roots
            .iter()
            .filter(|r| r.candidates[0] != r.candidates[1])
            .count();
        let dup = roots.len() - distinct;
        cp_count = Some(count >> dup);
        if let Some((_, mask)) = best {
            chosen = (0..roots.len()).map(|k| (mask >> k) & 1).collect();
        }
    }

    let cols: Vec<&[f64]> = roots
        .iter()
        .zip(&chosen)
        .map(|(r, &c)| r.candidates[c].mean.as_slice())
        .collect();
    let (a_hat, b_hat) = assemble(&probes, first_mean, &cols, v_g)?;
    let cp = diagnose(&a_hat, &b_hat);
    let logs = roots
        .into_iter()
        .zip(chosen)
        .enumerate()
        .map(|(k, (recovery, c))| {
            let cand = &recovery.candidates[c];
            let d2: f64 = cand.mean.iter().map(|x| x * x).sum();
            let lhs = 2.0 * cand.mean_photon - d2 + n as f64;
            let residual = (lhs - trace).abs() / trace.abs().max(1.0);
            RootLog {
                probe: k + 1,
                recovery,
                chosen: c,
                residual,
            }
        })
        .collect();
    Ok(ChannelEstimate {
        a_hat,
        b_hat,
        cp,
        policy,
        roots: logs,
        cp_consistent_combinations: cp_count,
        first_probe: first,
        setting_count: plan.len(),
    })
}

/// Simulation outcome with the probe-independence check on `V_G`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRun {
    pub estimate: ChannelEstimate,
    pub results: Measurements,
    /// Largest entry-wise deviation between any probe's output covariance
    /// and the first probe's.
    pub probe_covariance_spread: f64,
}

/// Sends every probe through `channel`, simulates its settings and inverts.
pub fn tomograph_channel(
    channel: &GaussianChannel,
    plan: &ChannelPlan,
    budget: &ShotBudget,
    options: EstimatorOptions,
    policy: RootPolicy,
    exec: Execution,
) -> Result<ChannelRun> {
    if channel.n() != plan.n {
        return Err(Error::DimensionMismatch {
            expected: 2 * plan.n,
            found: 2 * channel.n(),
        });
    }
    let outputs = plan
        .probes
        .iter()
        .map(|p| channel.probe_output(p))
        .collect::<Result<Vec<_>>>()?;
    let v0 = outputs[0].covariance();
    let spread = outputs
        .iter()
        .map(|o| linalg::max_abs(&(o.covariance() - v0)))
        .fold(0.0, f64::max);
    let mut jobs: Vec<(usize, Vec<MeasurementSetting>)> = vec![(0, plan.first.settings())];
    jobs.extend(plan.others.iter().cloned().enumerate().map(|(k, s)| (k + 1, s)));
    let parts = exec.map(&jobs, |(k, settings)| {
        measure_all(&outputs[*k], settings, budget, Execution::Sequential)
    });
    let mut results = Measurements::new();
    for p in parts {
        results.extend(p?)?;
    }
    let estimate = estimate_channel(plan, &results, options, policy)?;
    Ok(ChannelRun {
        estimate,
        results,
        probe_covariance_spread: spread,
    })
}
