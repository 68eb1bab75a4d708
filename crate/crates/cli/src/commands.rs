use nalgebra::{DMatrix, DVector};

use pnrtomo::channel_tomography::{optimal_channel_setting_count, tomograph_channel};
use pnrtomo::curves::{variance_curves, CurveTable};
use pnrtomo::state_tomography::{optimal_state_setting_count, tomograph_state};
use pnrtomo::{
    ChannelPlan, EstimatorOptions, Execution, GateChoice, Measurements, PhotonStatistics,
    RootPolicy, StatePlan,
};

use crate::config::{ChannelTomoConfig, CurvesConfig, Shots, StateTomoConfig, SCHEMA_VERSION};
use crate::error::{CliError, CliResult};
use crate::report::*;

/// Largest tolerated difference between probe output covariances.
pub const PROBE_SPREAD_TOL: f64 = 1e-9;

fn finite(what: &str, xs: impl IntoIterator<Item = f64>) -> CliResult<()> {
    if xs.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(CliError::Invariant(format!("{what} is not finite")))
    }
}

fn measurement_map(m: &Measurements) -> CliResult<std::collections::BTreeMap<String, f64>> {
    finite("a simulated measurement", m.iter().map(|(_, v)| *v))?;
    Ok(m.iter().map(|(k, v)| (k.clone(), *v)).collect())
}

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

pub fn state_tomo(cfg: &StateTomoConfig, exec: Execution) -> CliResult<StateTomoReport> {
    let state = cfg.state.build(cfg.seed)?;
    let n = state.n();
    let choice = match &cfg.gates {
        Some(g) => g.choice()?,
        None => GateChoice::default(),
    };
    let plan = StatePlan::with_choice(n, choice).map_err(CliError::setup)?;
    let budget = cfg.shots.budget(cfg.seed, &cfg.shot_overrides);
    budget.validate().map_err(CliError::setup)?;
    let options = EstimatorOptions {
        project: cfg.project,
    };
    let (est, results) =
        tomograph_state(&state, &plan, &budget, options, exec).map_err(CliError::run)?;
    let measurements = measurement_map(&results)?;
    finite("the state estimate", est.raw.v.iter().chain(est.raw.d.iter()).copied())?;
    let dv = &est.moments.d - state.mean();
    let vv = &est.moments.v - state.covariance();
    Ok(StateTomoReport {
        schema_version: SCHEMA_VERSION,
        command: "state-tomo".into(),
        seed: cfg.seed,
        shots: cfg.shots,
        modes: n,
        setting_count: est.setting_count,
        optimal_setting_count: optimal_state_setting_count(n),
        measurements,
        estimate: MomentsReport::new(&est.moments.d, &est.moments.v),
        raw_estimate: MomentsReport::new(&est.raw.d, &est.raw.v),
        projected: est.projected,
        mean_photon: est.mean_photon,
        trace: est.trace,
        physicality_margin: est.physicality_margin,
        residuals: ResidualsReport {
            intra: est.residuals.intra.clone(),
            inter: est.residuals.inter.clone(),
        },
        truth: MomentsReport::new(state.mean(), state.covariance()),
        errors: StateErrors {
            mean_max_abs: dv.amax(),
            covariance_max_abs: max_abs(&vv),
            covariance_frobenius: frobenius(&vv),
        },
    })
}

pub fn channel_tomo(
    cfg: &ChannelTomoConfig,
    policy: RootPolicy,
    exec: Execution,
) -> CliResult<ChannelTomoReport> {
    let channel = cfg.channel.build(cfg.seed)?;
    let n = channel.n();
    let choice = match &cfg.gates {
        Some(g) => g.choice()?,
        None => GateChoice::default(),
    };
    let probes: Vec<DVector<f64>> = match &cfg.probes {
        Some(p) => p.iter().map(|v| DVector::from_column_slice(v)).collect(),
        None => (0..2 * n)
            .map(|k| DVector::from_fn(2 * n, |i, _| if i == k { 1.0 } else { 0.0 }))
            .collect(),
    };
    let plan = ChannelPlan::with_probes(probes, choice)
    .map_err(CliError::setup)?;
    if plan.n != n {
        return Err(CliError::Config(format!(
            "probes describe {} modes but the channel has {n}",
            plan.n
        )));
    }
    let budget = cfg.shots.budget(cfg.seed, &cfg.shot_overrides);
    budget.validate().map_err(CliError::setup)?;
    let options = EstimatorOptions {
        project: cfg.project,
    };
    let run = tomograph_channel(&channel, &plan, &budget, options, policy, exec)
        .map_err(CliError::run)?;
    if run.probe_covariance_spread > PROBE_SPREAD_TOL {
        return Err(CliError::Invariant(format!(
            "probe output covariances differ by {:e}",
            run.probe_covariance_spread
        )));
    }
    let est = &run.estimate;
    let measurements = measurement_map(&run.results)?;
    finite("the channel estimate", est.a_hat.iter().chain(est.b_hat.iter()).copied())?;
    let da = &est.a_hat - channel.a();
    let db = &est.b_hat - channel.b();
    let roots = est
        .roots
        .iter()
        .map(|r| RootReport {
            probe: r.probe,
            discriminant: r.recovery.discriminant,
            candidates: r
                .recovery
                .candidates
                .iter()
                .map(|c| RootCandidateReport {
                    mean_photon: c.mean_photon,
                    mean: c.mean.clone(),
                    norm: c.norm,
                })
                .collect(),
            chosen: r.chosen,
            residual: r.residual,
        })
        .collect();
    let first = &est.first_probe.moments;
    Ok(ChannelTomoReport {
        schema_version: SCHEMA_VERSION,
        command: "channel-tomo".into(),
        seed: cfg.seed,
        shots: cfg.shots,
        modes: n,
        setting_count: est.setting_count,
        optimal_setting_count: optimal_channel_setting_count(n),
        root_policy: policy,
        measurements,
        a_hat: rows(&est.a_hat),
        b_hat: rows(&est.b_hat),
        cp: CpReport {
            noise_min_eigenvalue: est.cp.noise_min_eigenvalue,
            cp_min_eigenvalue: est.cp.cp_min_eigenvalue,
            is_cp: est.cp.is_cp,
        },
        ambiguous: est.is_ambiguous(),
        cp_consistent_combinations: est.cp_consistent_combinations,
        roots,
        first_probe: MomentsReport::new(&first.d, &first.v),
        probe_covariance_spread: run.probe_covariance_spread,
        truth: ChannelTruth {
            a: rows(channel.a()),
            b: rows(channel.b()),
        },
        errors: ChannelErrors {
            a_max_abs: max_abs(&da),
            b_max_abs: max_abs(&db),
            a_frobenius: frobenius(&da),
            b_frobenius: frobenius(&db),
        },
    })
}

pub fn curves(cfg: &CurvesConfig) -> CliResult<(CurvesReport, CurveTable)> {
    let gates = match &cfg.gates {
        Some(gs) => gs.iter().map(|g| g.params()).collect::<CliResult<Vec<_>>>()?,
        None => cfg.state.default_gates(),
    };
    let table = variance_curves(&cfg.state, &cfg.sweep, &gates, cfg.form).map_err(CliError::setup)?;
    finite("a curve value", table.rows.iter().flatten().copied())?;
    let report = CurvesReport {
        schema_version: SCHEMA_VERSION,
        command: "variance-curves".into(),
        form: cfg.form,
        modes: cfg.state.modes(),
        columns: table.columns.clone(),
        rows: table.rows.clone(),
        csv: None,
    };
    Ok((report, table))
}

/// `--shots` and `--seed` take precedence over the config file.
pub fn apply_overrides(seed: &mut u64, shots: &mut Shots, cli_seed: Option<u64>, cli_shots: Option<Shots>) {
    if let Some(s) = cli_seed {
        *seed = s;
    }
    if let Some(s) = cli_shots {
        *shots = s;
    }
}
