//! Setting-by-setting photon statistics on the truncated basis, with the
//! cutoff doubled until the answers stop moving.

use std::f64::consts::FRAC_PI_4;

use super::state::{prepare, Amplitudes, FockRecipe, FockState, ThermalStrategy, LEAKAGE_TOL};
use super::workspace::FockWorkspace;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measurement::{GateSpec, MeasurementSetting, SettingKind};
use crate::symplectic::Quadrature;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub start_cutoff: usize,
    pub max_cutoff: usize,
    /// Largest change in any mean or variance between two successive
    /// cutoffs that counts as converged.
    pub tolerance: f64,
    pub strategy: ThermalStrategy,
    pub execution: Execution,
}

impl OracleConfig {
    pub fn for_modes(modes: usize) -> Self {
        Self {
            start_cutoff: 16,
            max_cutoff: if modes == 1 { 512 } else { 256 },
            tolerance: 1e-8,
            strategy: ThermalStrategy::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleValue {
    pub label: String,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub values: Vec<OracleValue>,
    /// Cutoff of the reported values.
    pub cutoff: usize,
    /// Largest change against the previous cutoff.
    pub last_change: f64,
    /// Worst leakage over all settings at the reported cutoff.
    pub leakage: f64,
}

/// Enlarged dimension for a trailing squeeze: a squeeze stretches photon
/// numbers by up to `e^{2|r|}`, and whatever still reaches the guard band
/// of the enlarged basis is reported as leakage.
fn lift_dimension(r: f64, cutoff: usize) -> usize {
    let stretch = (1.0 + (2.0 * r.abs()).exp()).round() as usize;
    (cutoff * stretch).next_power_of_two()
}

/// Squeezes `mode` while re-expressing it on `dim` levels, so the output
/// is not cut back to the input cutoff.
fn lift_squeeze(a: &mut Amplitudes, mode: usize, r: f64, cutoff: usize, ws: &FockWorkspace) -> Result<()> {
    if r == 0.0 {
        return Ok(());
    }
    let dim = lift_dimension(r, cutoff);
    let s = ws.squeeze(r, dim)?;
    a.apply(mode, s.columns(0, cutoff));
    Ok(())
}

fn check_mode(mode: usize, n: usize) -> Result<()> {
    if mode >= n {
        return Err(Error::ModeOutOfRange { index: mode, n });
    }
    Ok(())
}

/// `(‖ψ‖², ⟨N⟩, ⟨N²⟩, guard-band weight)` of one member after `kind`.
fn member_setting(
    a: &Amplitudes,
    kind: &SettingKind,
    modes: usize,
    cutoff: usize,
    ws: &FockWorkspace,
) -> Result<[f64; 4]> {
    let mut out = a.clone();
    match *kind {
        SettingKind::Bare => {}
        SettingKind::Displaced { mode, axis, amount } => {
            check_mode(mode, modes)?;
            let (q, p) = match axis {
                Quadrature::Q => (amount, 0.0),
                Quadrature::P => (0.0, amount),
            };
            out.displace(mode, q, p, ws)?;
        }
        SettingKind::Gated { gate: GateSpec::P { mode, r, phi } } => {
            check_mode(mode, modes)?;
            out.phase(mode, phi);
            lift_squeeze(&mut out, mode, r, cutoff, ws)?;
        }
        SettingKind::Gated { gate: GateSpec::Q { modes: pair, r, phi } } => {
            check_mode(pair[0], modes)?;
            check_mode(pair[1], modes)?;
            if pair[0] == pair[1] {
                return Err(Error::DuplicateMode(pair[0]));
            }
            // the beam splitter treats its first mode as mode 0
            if pair[0] == 1 {
                out.swap_modes();
            }
            out.phase(0, phi);
            out.beamsplitter(FRAC_PI_4, ws)?;
            lift_squeeze(&mut out, 0, r, cutoff, ws)?;
        }
    }
    let (z, m1, m2) = out.number_moments();
    Ok([z, m1, m2, out.boundary_population()])
}

/// Mean and variance for each setting at one fixed cutoff, plus the worst
/// leakage.
pub fn evaluate_at_cutoff(
    state: &FockState,
    settings: &[MeasurementSetting],
    ws: &FockWorkspace,
    exec: Execution,
) -> Result<(Vec<OracleValue>, f64)> {
    let per_member = exec.map(&state.members, |(w, a)| -> Result<Vec<[f64; 4]>> {
        settings
            .iter()
            .map(|s| {
                member_setting(a, &s.kind, state.modes(), state.cutoff(), ws)
                    .map(|m| m.map(|x| w * x))
            })
            .collect()
    });
    let mut sums = vec![[0.0; 4]; settings.len()];
    for member in per_member {
        for (acc, m) in sums.iter_mut().zip(member?) {
            for k in 0..4 {
                acc[k] += m[k];
            }
        }
    }
    let mut leakage = 0.0f64;
    let values = settings
        .iter()
        .zip(&sums)
        .map(|(s, &[z, m1, m2, edge])| {
            leakage = leakage.max(state.discarded_weight() + edge);
            let mean = m1 / z;
            OracleValue {
                label: s.label.clone(),
                mean,
                variance: m2 / z - mean * mean,
            }
        })
        .collect();
    Ok((values, leakage))
}

/// Photon statistics for every setting, doubling the cutoff from
/// `config.start_cutoff` until no mean or variance moves by more than
/// `config.tolerance` and the leakage is within [`LEAKAGE_TOL`].
pub fn oracle_moments(
    recipe: &FockRecipe,
    settings: &[MeasurementSetting],
    config: &OracleConfig,
    ws: &FockWorkspace,
) -> Result<OracleReport> {
    let run = |cutoff| -> Result<(Vec<OracleValue>, f64)> {
        let state = prepare(recipe, cutoff, config.strategy, ws)?;
        evaluate_at_cutoff(&state, settings, ws, config.execution)
    };
    let mut cutoff = config.start_cutoff;
    let (mut prev, _) = run(cutoff)?;
    let mut last_change = f64::INFINITY;
    while 2 * cutoff <= config.max_cutoff {
        cutoff *= 2;
        let (cur, leakage) = run(cutoff)?;
        last_change = prev
            .iter()
            .zip(&cur)
            .map(|(a, b)| (a.mean - b.mean).abs().max((a.variance - b.variance).abs()))
            .fold(0.0, f64::max);
        if last_change < config.tolerance && leakage <= LEAKAGE_TOL {
            return Ok(OracleReport {
                values: cur,
                cutoff,
                last_change,
                leakage,
            });
        }
        prev = cur;
    }
    Err(Error::NotConverged {
        max_cutoff: config.max_cutoff,
        last_change,
    })
}
