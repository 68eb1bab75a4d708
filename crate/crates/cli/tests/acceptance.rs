//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Every threshold below is fixed; a criterion that cannot meet it prints
//! FAIL with the numbers that blocked it.

use std::f64::consts::{FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::RngExt;

use pnrtomo::channel::catalog;
use pnrtomo::channel_tomography::{optimal_channel_setting_count, tomograph_channel};
use pnrtomo::fock::{oracle_moments, FockRecipe, FockWorkspace, OracleConfig};
use pnrtomo::measurement::{GateSpec, MeasurementSetting, SettingKind};
use pnrtomo::random::{keyed, random_state, random_symplectic, StreamRng};
use pnrtomo::state::PHYSICALITY_FLOOR;
use pnrtomo::state_tomography::{optimal_state_setting_count, tomograph_state};
use pnrtomo::symplectic::SYMPLECTIC_TOL;
use pnrtomo::{
    ChannelPlan, EstimatorOptions, Execution, GateParams, GaussianState,
    PhotonStatistics, Quadrature, RootPolicy, ShotBudget, SqueezedThermalParams, StatePlan,
    SymplecticGate, TwoModeBenchmark, VarianceForm,
};

const STATE_TOL: f64 = 1e-9;
const CHANNEL_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-12;
const SLOPE: f64 = -0.5;
const SLOPE_TOL: f64 = 0.1;
/// Slack on physicality of channel outputs.
const CHANNEL_PHYSICALITY_SLACK: f64 = 1e-9;
const PROBE_SPREAD_TOL: f64 = 1e-9;

type Check = Result<String, String>;

fn max_abs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

fn rng(criterion: &str, label: impl std::fmt::Display) -> StreamRng {
    keyed(20_24, criterion, &label.to_string())
}

fn c1() -> Check {
    let mut bad = Vec::new();
    for n in 1..=4 {
        let s = StatePlan::new(n).map_err(|e| e.to_string())?.len();
        let c = ChannelPlan::new(n).map_err(|e| e.to_string())?.len();
        if s != 2 * n * n + 3 * n || s != optimal_state_setting_count(n) {
            bad.push(format!("state n={n}: {s}"));
        }
        if c != 6 * n * n + n || c != optimal_channel_setting_count(n) {
            bad.push(format!("channel n={n}: {c}"));
        }
    }
    if bad.is_empty() {
        Ok("state 5/14/27/44, channel 7/26/57/100".into())
    } else {
        Err(bad.join("; "))
    }
}

fn c2() -> Check {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for n in 1..=4 {
        let plan = StatePlan::new(n).map_err(|e| e.to_string())?;
        for k in 0..100 {
            let st = random_state(n, &mut rng("c2", format!("{n}/{k}"))).map_err(|e| e.to_string())?;
            let (est, _) = tomograph_state(
                &st,
                &plan,
                &ShotBudget::Exact,
                EstimatorOptions::default(),
                Execution::default(),
            )
            .map_err(|e| format!("n={n} state {k}: {e}"))?;
            let e = (&est.moments.d - st.mean())
                .amax()
                .max(max_abs(&est.moments.v, st.covariance()));
            worst = worst.max(e);
            if !(e <= STATE_TOL) {
                failures += 1;
            }
        }
    }
    let msg = format!("400 states, worst max-abs error {worst:.2e} (tol {STATE_TOL:.0e})");
    if failures == 0 {
        Ok(msg)
    } else {
        Err(format!("{failures} over tolerance; {msg}"))
    }
}

fn c3() -> Check {
    let seeds: Vec<u64> = (0..25).collect();
    let mut lines = Vec::new();
    let mut total_fail = 0;
    let mut worst_catalog = 0.0f64;
    for n in 1..=3 {
        let plan = ChannelPlan::new(n).map_err(|e| e.to_string())?;
        let mut random_pass = 0;
        let mut ambiguous_fail = 0;
        for (name, ch) in catalog(n, &seeds).map_err(|e| e.to_string())? {
            let run = tomograph_channel(
                &ch,
                &plan,
                &ShotBudget::Exact,
                EstimatorOptions::default(),
                RootPolicy::default(),
                Execution::default(),
            )
            .map_err(|e| format!("n={n} {name}: {e}"))?;
            let est = &run.estimate;
            let e = max_abs(&est.a_hat, ch.a()).max(max_abs(&est.b_hat, ch.b()));
            let ok = e <= CHANNEL_TOL;
            if name.starts_with("random") {
                random_pass += ok as usize;
                if !ok && est.cp_consistent_combinations.unwrap_or(0) > 1 {
                    ambiguous_fail += 1;
                }
            } else {
                worst_catalog = worst_catalog.max(e);
            }
            total_fail += !ok as usize;
        }
        lines.push(format!(
            "n={n}: random {random_pass}/25 within tol ({ambiguous_fail} of the misses had >1 CP-consistent root combination)"
        ));
    }
    let msg = format!(
        "catalog worst {worst_catalog:.2e}; {} (tol {CHANNEL_TOL:.0e})",
        lines.join("; ")
    );
    if total_fail == 0 {
        Ok(msg)
    } else {
        Err(format!("{total_fail} channels over tolerance; {msg}"))
    }
}

fn p_gate(mode: usize, gain: f64, phi: f64) -> MeasurementSetting {
    let g = GateParams::from_gain(gain, phi);
    MeasurementSetting::gated(GateSpec::P { mode, r: g.r, phi: g.phi })
}

fn single_mode_point(r: &mut StreamRng) -> SqueezedThermalParams {
    SqueezedThermalParams::new(
        r.random_range(0.0..=1.5),
        r.random_range(-0.7..=0.7),
        r.random_range(0.0..PI),
        r.random_range(-1.0..=1.0),
    )
}

/// Largest gap between closed form and oracle, and between the untransformed
/// variance and the oracle on gated settings.
fn oracle_gaps(
    recipe: &FockRecipe,
    state: &GaussianState,
    settings: &[MeasurementSetting],
    ws: &FockWorkspace,
) -> Result<(f64, f64), String> {
    let cfg = OracleConfig::for_modes(recipe.modes());
    let rep = oracle_moments(recipe, settings, &cfg, ws).map_err(|e| e.to_string())?;
    let mut gap = 0.0f64;
    let mut printed_gap = 0.0f64;
    for (s, v) in settings.iter().zip(&rep.values) {
        let (m, var) = s.moments(state).map_err(|e| e.to_string())?;
        gap = gap.max((m - v.mean).abs()).max((var - v.variance).abs());
        if let SettingKind::Gated { gate } = s.kind {
            let g = gate.gate(state.n()).map_err(|e| e.to_string())?;
            let alt = state
                .gated_photon_variance(&g, VarianceForm::AsPrinted)
                .map_err(|e| e.to_string())?;
            printed_gap = printed_gap.max((alt - v.variance).abs());
        }
    }
    Ok((gap, printed_gap))
}

fn c4() -> Check {
    let ws = FockWorkspace::new();
    let mut one = StatePlan::new(1).map_err(|e| e.to_string())?.settings();
    one.push(p_gate(0, 3f64.sqrt(), FRAC_PI_4));
    one.push(MeasurementSetting::displaced(0, Quadrature::P, -1.0));
    let two = StatePlan::new(2).map_err(|e| e.to_string())?.settings();
    let (mut worst, mut printed) = ([0.0f64; 2], [0.0f64; 2]);
    let mut over = 0;
    for k in 0..50 {
        let p = single_mode_point(&mut rng("c4-1", k));
        let st = GaussianState::squeezed_thermal(&p).map_err(|e| e.to_string())?;
        let (g, a) = oracle_gaps(&FockRecipe::SingleMode(p), &st, &one, &ws)
            .map_err(|e| format!("n=1 point {k} {p:?}: {e}"))?;
        over += (g > ORACLE_TOL) as usize;
        worst[0] = worst[0].max(g);
        printed[0] = printed[0].max(a);
    }
    for k in 0..20 {
        let mut r = rng("c4-2", k);
        let mut first = single_mode_point(&mut r);
        let mut second = single_mode_point(&mut r);
        first.u = 0.0;
        second.u = 0.0;
        let b = TwoModeBenchmark {
            first,
            second,
            u: r.random_range(-1.0..=1.0),
        };
        let st = GaussianState::two_mode_benchmark(&b).map_err(|e| e.to_string())?;
        let (g, a) = oracle_gaps(&FockRecipe::TwoMode(b), &st, &two, &ws)
            .map_err(|e| format!("n=2 point {k} {b:?}: {e}"))?;
        over += (g > ORACLE_TOL) as usize;
        worst[1] = worst[1].max(g);
        printed[1] = printed[1].max(a);
    }
    let decided = printed[0].max(printed[1]) > 1e3 * ORACLE_TOL;
    let msg = format!(
        "50 n=1 points x {} settings worst {:.2e}, 20 n=2 points x {} settings worst {:.2e} (tol {ORACLE_TOL:.0e}); \
         transformed variance form selected, untransformed form misses by up to {:.3}",
        one.len(),
        worst[0],
        two.len(),
        worst[1],
        printed[0].max(printed[1])
    );
    if over == 0 && decided {
        Ok(msg)
    } else {
        Err(format!("{over} points over tolerance, form decided: {decided}; {msg}"))
    }
}

fn c5() -> Check {
    let p = SqueezedThermalParams::new(1.0, 0.0, 0.0, 0.0);
    let st = GaussianState::squeezed_thermal(&p).map_err(|e| e.to_string())?;
    let closed = [p.mean_photon(), p.photon_variance(), st.mean_photon(), st.photon_variance()];
    let cf = (closed[0] - 1.0)
        .abs()
        .max((closed[1] - 2.0).abs())
        .max((closed[2] - 1.0).abs())
        .max((closed[3] - 2.0).abs());
    let rep = oracle_moments(
        &FockRecipe::SingleMode(p),
        &[MeasurementSetting::bare()],
        &OracleConfig::for_modes(1),
        &FockWorkspace::new(),
    )
    .map_err(|e| e.to_string())?;
    let v = &rep.values[0];
    let og = (v.mean - 1.0).abs().max((v.variance - 2.0).abs());
    let msg = format!(
        "closed form off by {cf:.1e} (tol {CLOSED_FORM_TOL:.0e}), oracle ({:.12}, {:.12}) at cutoff {} off by {og:.1e} (tol {ORACLE_TOL:.0e})",
        v.mean, v.variance, rep.cutoff
    );
    if cf <= CLOSED_FORM_TOL && og <= ORACLE_TOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6() -> Check {
    let b = TwoModeBenchmark {
        first: SqueezedThermalParams::new(0.5, 0.3, 0.4, 0.0),
        second: SqueezedThermalParams::new(1.0, -0.2, 1.3, 0.0),
        u: 0.5,
    };
    let st = GaussianState::two_mode_benchmark(&b).map_err(|e| e.to_string())?;
    let plan = StatePlan::new(2).map_err(|e| e.to_string())?;
    let shots = [100u64, 1_000, 10_000, 100_000, 1_000_000];
    let mut mean_err = Vec::new();
    for &m in &shots {
        let mut acc = 0.0;
        for seed in 0..100 {
            let (est, _) = tomograph_state(
                &st,
                &plan,
                &ShotBudget::shots(m, seed),
                EstimatorOptions { project: false },
                Execution::default(),
            )
            .map_err(|e| format!("M={m} seed {seed}: {e}"))?;
            acc += (&est.moments.v - st.covariance()).norm();
        }
        mean_err.push(acc / 100.0);
    }
    let xs: Vec<f64> = shots.iter().map(|&m| (m as f64).log10()).collect();
    let ys: Vec<f64> = mean_err.iter().map(|e| e.log10()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 5.0, ys.iter().sum::<f64>() / 5.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let msg = format!(
        "slope {slope:.4} (want {SLOPE} +/- {SLOPE_TOL}); mean Frobenius errors {}",
        mean_err.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
    );
    if (slope - SLOPE).abs() <= SLOPE_TOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7() -> Check {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("fig.toml");
    std::fs::write(
        &cfg,
        format!(
            "schema_version = 1\n\
             [state]\nfamily = \"single-mode\"\nparams = {{ n_th = 1.0, s = 0.6, beta = {:?}, u = 0.0 }}\n\
             [sweep]\nvariable = \"u\"\nstart = 0.0\nstop = 2.0\nstep = 0.05\n",
            PI / 3.0
        ),
    )
    .map_err(|e| e.to_string())?;
    let out = dir.path().join("fig.json");
    let (mut so, mut se) = (Vec::new(), Vec::new());
    let code = pnrtomo_cli::run(
        [
            "pnrtomo",
            "variance-curves",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &mut so,
        &mut se,
    );
    if code != 0 {
        return Err(format!("variance-curves exited {code}: {}", String::from_utf8_lossy(&se)));
    }
    let text = std::fs::read_to_string(dir.path().join("fig.csv")).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty csv")?.split(',').collect();
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap_or(f64::NAN)).collect())
        .collect();
    let col = |name: &str| -> Result<Vec<f64>, String> {
        let k = header.iter().position(|h| *h == name).ok_or(format!("missing column {name}"))?;
        Ok(rows.iter().map(|r| r[k]).collect())
    };
    let u = col("u")?;
    let bare = col("var_bare")?;
    let low = col("var_P[gain=1.414214;phi=0.785398]")?;
    let high = col("var_P[gain=1.732051;phi=0.000000]")?;
    let cross = col("var_P[gain=1.414214;phi=0.000000]")?;
    let below_at_zero = low[0] < bare[0];
    let always_above = high.iter().zip(&bare).all(|(h, b)| h > b);
    let d: Vec<f64> = cross.iter().zip(&bare).map(|(c, b)| c - b).collect();
    let crossing = d.windows(2).position(|w| w[0].signum() != w[1].signum());
    let monotone = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("var_P"))
        .all(|(k, _)| rows.windows(2).all(|w| w[1][k] > w[0][k]));
    let msg = format!(
        "{} rows; (sqrt2,pi/4) {:.4} vs bare {:.4} at u=0; (sqrt3,0) above on all rows: {always_above}; \
         (sqrt2,0) crosses between u={}; gated columns increasing: {monotone}",
        rows.len(),
        low[0],
        bare[0],
        crossing.map_or("none".to_string(), |i| format!("{:.2} and {:.2}", u[i], u[i + 1])),
    );
    if rows.len() == 41 && below_at_zero && always_above && crossing.is_some() && monotone {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8() -> Check {
    let mut violations = Vec::new();
    let mut checked = 0usize;
    let mut note = |ok: bool, what: String| {
        checked += 1;
        if !ok {
            violations.push(what);
        }
    };
    // symplectic certificates on elementary gates with parameters in [-3, 3]
    for k in 0..200 {
        let mut r = rng("c8-gates", k);
        let mut x = || r.random_range(-3.0..=3.0);
        let (a, b, c, d) = (x(), x(), x(), x());
        let gates = [
            SymplecticGate::rotation(a),
            SymplecticGate::squeeze(b),
            SymplecticGate::beamsplitter(c),
            SymplecticGate::p_gate(b, d),
            SymplecticGate::q_gate(b, a),
        ];
        for g in gates {
            let res = g.symplectic_residual();
            note(res <= SYMPLECTIC_TOL, format!("gate {:?} residual {res:.1e}", g.label()));
            let modes: &[usize] = if g.n() == 1 { &[2] } else { &[2, 0] };
            let res = g.embed(modes, 3).map_err(|e| e.to_string())?.symplectic_residual();
            note(res <= SYMPLECTIC_TOL, format!("embedded {:?} residual {res:.1e}", g.label()));
        }
    }
    // physicality under random gates
    for n in 1..=4 {
        for k in 0..50 {
            let mut r = rng("c8-phys", format!("{n}/{k}"));
            let st = random_state(n, &mut r).map_err(|e| e.to_string())?;
            let g = random_symplectic(n, 1.0, &mut r).map_err(|e| e.to_string())?;
            let res = g.symplectic_residual();
            note(res <= 1e-10, format!("random symplectic n={n} #{k} residual {res:.1e}"));
            let out = st.apply_gate(&g).map_err(|e| e.to_string())?;
            let m = out.physicality_margin();
            note(m >= PHYSICALITY_FLOOR, format!("gated state n={n} #{k} margin {m:.1e}"));
        }
    }
    // CP catalog and physical outputs
    let seeds: Vec<u64> = (0..25).collect();
    for n in 1..=3 {
        let plan = ChannelPlan::new(n).map_err(|e| e.to_string())?;
        for (name, ch) in catalog(n, &seeds).map_err(|e| e.to_string())? {
            let cp = ch.diagnostic();
            note(cp.is_cp, format!("{name} n={n} not CP ({:.1e})", cp.cp_min_eigenvalue));
            for k in 0..4 {
                let st = random_state(n, &mut rng("c8-cp", format!("{name}/{n}/{k}")))
                    .map_err(|e| e.to_string())?;
                let m = ch.apply(&st).map_err(|e| e.to_string())?.physicality_margin();
                note(
                    m >= -CHANNEL_PHYSICALITY_SLACK,
                    format!("{name} n={n} output margin {m:.1e}"),
                );
            }
            // probe independence of the output covariance
            let run = tomograph_channel(
                &ch,
                &plan,
                &ShotBudget::Exact,
                EstimatorOptions::default(),
                RootPolicy::MinNorm,
                Execution::default(),
            )
            .map_err(|e| e.to_string())?;
            note(
                run.probe_covariance_spread <= PROBE_SPREAD_TOL,
                format!("{name} n={n} probe spread {:.1e}", run.probe_covariance_spread),
            );
            let vg = (ch.a() * ch.a().transpose() + ch.b()) * 0.5;
            let e = max_abs(&run.estimate.first_probe.moments.v, &vg);
            note(e <= CHANNEL_TOL, format!("{name} n={n} V_G mismatch {e:.1e}"));
        }
    }
    if violations.is_empty() {
        Ok(format!("{checked} checks, 0 violations"))
    } else {
        let shown: Vec<_> = violations.iter().take(5).cloned().collect();
        Err(format!("{} of {checked} checks violated: {}", violations.len(), shown.join("; ")))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, Option<Duration>, fn() -> Check); 8] = [
        ("C1", "optimal setting counts", Some(Duration::from_secs(1)), c1),
        ("C2", "state round trip, exact backend", Some(Duration::from_secs(30)), c2),
        ("C3", "channel round trip, exact backend", Some(Duration::from_secs(60)), c3),
        ("C4", "closed forms vs Fock oracle", Some(Duration::from_secs(300)), c4),
        ("C5", "thermal spot values", None, c5),
        ("C6", "finite-shot error scaling", Some(Duration::from_secs(300)), c6),
        ("C7", "variance curve shapes", None, c7),
        ("C8", "invariant suites", None, c8),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let t = Instant::now();
        let outcome = f();
        let dt = t.elapsed();
        let late = limit.is_some_and(|l| dt > l);
        let limit_text = limit.map_or(String::new(), |l| format!(", limit {} s", l.as_secs()));
        let (pass, detail) = match outcome {
            Ok(d) if !late => (true, d),
            Ok(d) => (false, format!("over time limit; {d}")),
            Err(d) => (false, d),
        };
        failed += !pass as usize;
        println!(
            "[{}] {id} {name} ({:.2} s{limit_text}): {detail}",
            if pass { "PASS" } else { "FAIL" },
            dt.as_secs_f64()
        );
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
