//! TOML run configurations. Unknown keys are rejected everywhere.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use pnrtomo::channel::RANDOM_CP_MARGIN;
use pnrtomo::curves::{CurveState, Sweep};
use pnrtomo::{
    GateChoice, GateParams, GaussianChannel, GaussianState, RootPolicy, ShotBudget,
    SqueezedThermalParams, TwoModeBenchmark, VarianceForm,
};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// `"exact"` or a positive shot count per setting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Shots {
    #[default]
    Exact,
    Count(u64),
}

impl FromStr for Shots {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "exact" {
            return Ok(Shots::Exact);
        }
        match s.parse::<u64>() {
            Ok(0) => Err("shot count must be at least 1".into()),
            Ok(m) => Ok(Shots::Count(m)),
            Err(_) => Err(format!("expected a positive integer or `exact`, got `{s}`")),
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Count(m) => write!(f, "{m}"),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Count(m) => s.serialize_u64(*m),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(0) => Err(serde::de::Error::custom("shot count must be at least 1")),
            Raw::Count(m) => Ok(Shots::Count(m)),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl Shots {
    pub fn budget(self, seed: u64, overrides: &BTreeMap<String, u64>) -> ShotBudget {
        match self {
            Shots::Exact => ShotBudget::Exact,
            Shots::Count(shots) => ShotBudget::Shots {
                shots,
                seed,
                overrides: overrides.clone(),
            },
        }
    }
}

/// A gate given by its gain `e^r` and phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainPhase {
    pub gain: f64,
    #[serde(default)]
    pub phi: f64,
}

impl GainPhase {
    pub fn params(self) -> CliResult<GateParams> {
        if !(self.gain.is_finite() && self.gain > 0.0 && self.phi.is_finite()) {
            return Err(CliError::Config(format!(
                "gate gain must be finite and positive, got gain={} phi={}",
                self.gain, self.phi
            )));
        }
        Ok(GateParams::from_gain(self.gain, self.phi))
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub displacement: f64,
    pub intra: [GainPhase; 3],
    pub inter: [GainPhase; 4],
}

impl GateConfig {
    pub fn choice(&self) -> CliResult<GateChoice> {
        let intra = [self.intra[0].params()?, self.intra[1].params()?, self.intra[2].params()?];
        let mut inter = [GateParams::from_gain(1.0, 0.0); 4];
        for (slot, g) in inter.iter_mut().zip(&self.inter) {
            *slot = g.params()?;
        }
        let choice = GateChoice {
            displacement: self.displacement,
            intra,
            inter,
        };
        choice.validate().map_err(CliError::setup)?;
        Ok(choice)
    }
}

/// Squeezed thermal factor without its own displacement.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub n_th: f64,
    pub s: f64,
    pub beta: f64,
}

impl Factor {
    fn params(self) -> SqueezedThermalParams {
        SqueezedThermalParams::new(self.n_th, self.s, self.beta, 0.0)
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> CliResult<DMatrix<f64>> {
    let k = rows.len();
    if k == 0 || rows.iter().any(|r| r.len() != k) {
        return Err(CliError::Config(format!("{what} must be a non-empty square matrix")));
    }
    Ok(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Vacuum { modes: usize },
    Explicit { mean: Vec<f64>, covariance: Vec<Vec<f64>> },
    SqueezedThermal { n_th: f64, s: f64, beta: f64, u: f64 },
    TwoMode { first: Factor, second: Factor, u: f64 },
    /// Random physical state drawn from `seed` (the run seed when absent).
    Random { modes: usize, seed: Option<u64> },
}

impl StateSpec {
    pub fn build(&self, run_seed: u64) -> CliResult<GaussianState> {
        match self {
            StateSpec::Vacuum { modes } => GaussianState::vacuum(*modes).map_err(CliError::setup),
            StateSpec::Explicit { mean, covariance } => {
                let v = matrix(covariance, "covariance")?;
                GaussianState::new(DVector::from_column_slice(mean), v).map_err(CliError::setup)
            }
            StateSpec::SqueezedThermal { n_th, s, beta, u } => {
                GaussianState::squeezed_thermal(&SqueezedThermalParams::new(*n_th, *s, *beta, *u))
                    .map_err(CliError::setup)
            }
            StateSpec::TwoMode { first, second, u } => {
                GaussianState::two_mode_benchmark(&TwoModeBenchmark {
                    first: first.params(),
                    second: second.params(),
                    u: *u,
                })
                .map_err(CliError::setup)
            }
            StateSpec::Random { modes, seed } => {
                let seed = seed.unwrap_or(run_seed);
                let mut rng = pnrtomo::random::keyed(seed, "random-state", &modes.to_string());
                pnrtomo::random::random_state(*modes, &mut rng).map_err(CliError::setup)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelSpec {
    Identity { modes: usize },
    Attenuator { modes: usize, eta: f64 },
    Amplifier { modes: usize, gain: f64 },
    ClassicalNoise { modes: usize, noise: f64 },
    /// Random CP channel drawn from `seed` (the run seed when absent).
    Random {
        modes: usize,
        seed: Option<u64>,
        margin: Option<f64>,
    },
    Explicit { a: Vec<Vec<f64>>, b: Vec<Vec<f64>> },
}

impl ChannelSpec {
    pub fn build(&self, run_seed: u64) -> CliResult<GaussianChannel> {
        let ch = match self {
            ChannelSpec::Identity { modes } => GaussianChannel::identity(*modes),
            ChannelSpec::Attenuator { modes, eta } => GaussianChannel::attenuator(*modes, *eta),
            ChannelSpec::Amplifier { modes, gain } => GaussianChannel::amplifier(*modes, *gain),
            ChannelSpec::ClassicalNoise { modes, noise } => {
                GaussianChannel::classical_noise(*modes, *noise)
            }
            ChannelSpec::Random {
                modes,
                seed,
                margin,
            } => GaussianChannel::random(
                *modes,
                seed.unwrap_or(run_seed),
                margin.unwrap_or(RANDOM_CP_MARGIN),
            ),
            ChannelSpec::Explicit { a, b } => {
                GaussianChannel::new(matrix(a, "channel matrix a")?, matrix(b, "channel noise b")?)
            }
        };
        ch.map_err(CliError::setup)
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateTomoConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub shots: Shots,
    #[serde(default)]
    pub shot_overrides: BTreeMap<String, u64>,
    /// Clip the estimate to the physical set.
    #[serde(default)]
    pub project: bool,
    pub gates: Option<GateConfig>,
    pub state: StateSpec,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelTomoConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub shots: Shots,
    #[serde(default)]
    pub shot_overrides: BTreeMap<String, u64>,
    #[serde(default)]
    pub project: bool,
    #[serde(default)]
    pub root_policy: RootPolicy,
    pub gates: Option<GateConfig>,
    /// Probe displacements; unit vectors when absent.
    pub probes: Option<Vec<Vec<f64>>>,
    pub channel: ChannelSpec,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub form: VarianceForm,
    pub state: CurveState,
    pub sweep: Sweep,
    /// Probe gates; the family's default set when absent.
    pub gates: Option<Vec<GainPhase>>,
}

pub trait Versioned {
    fn schema_version(&self) -> u32;
}

impl Versioned for StateTomoConfig {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

impl Versioned for ChannelTomoConfig {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

impl Versioned for CurvesConfig {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

pub fn parse<T: for<'de> Deserialize<'de> + Versioned>(text: &str) -> CliResult<T> {
    let cfg: T = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if cfg.schema_version() != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
            cfg.schema_version()
        )));
    }
    Ok(cfg)
}

pub fn load<T: for<'de> Deserialize<'de> + Versioned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}
