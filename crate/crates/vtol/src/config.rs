//! TOML schemas: scenarios, the design pipeline and transfer functions.

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use vtol_core::error::HarnessError;
use vtol_core::harness::{builtin, PipelineConfig, Scenario, BUILTIN_SCENARIOS};
use vtol_core::lti::{butterworth2, fitted_plant, notch, pid_tf, ContinuousTF, PlantFitParams};

use crate::error::{Error, Result};

/// Prefix selecting a built-in scenario instead of a file.
pub const BUILTIN_PREFIX: &str = "builtin:";

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|source| Error::Toml {
        path: path.to_path_buf(),
        source,
    })
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string_pretty(value).map_err(|e| Error::Config(format!("cannot serialize: {e}")))
}

/// Loads `builtin:<name>` or a scenario file, and validates it.
pub fn load_scenario(source: &str) -> Result<Scenario> {
    let sc = match source.strip_prefix(BUILTIN_PREFIX) {
        Some(name) => builtin(name).ok_or_else(|| {
            Error::Config(format!("unknown builtin scenario `{name}` (known: {})", BUILTIN_SCENARIOS.join(", ")))
        })?,
        None => read_toml(Path::new(source))?,
    };
    sc.validate()?;
    Ok(sc)
}

pub fn load_pipeline(path: Option<&Path>) -> Result<PipelineConfig> {
    let cfg = match path {
        Some(p) => read_toml(p)?,
        None => PipelineConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// One factor of a series transfer function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TfTerm {
    /// Coefficients in ascending powers of `s`, delay in seconds.
    Rational {
        num: Vec<f64>,
        den: Vec<f64>,
        #[serde(default)]
        delay: f64,
    },
    Gain { k: f64 },
    /// The identified plant structure; omitted fields take the published
    /// coefficients.
    FittedPlant {
        #[serde(default)]
        params: PlantFitParams,
    },
    Pid { kp: f64, ki: f64, kd: f64, deriv_corner_hz: f64 },
    Notch { center_hz: f64, k1: f64, k2: f64 },
    Butterworth2 { corner_hz: f64 },
}

/// Series product of terms, e.g. plant × PID × notch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfConfig {
    pub term: Vec<TfTerm>,
}

impl TfTerm {
    pub fn build(&self) -> std::result::Result<ContinuousTF, HarnessError> {
        Ok(match self {
            TfTerm::Rational { num, den, delay } => ContinuousTF::new(num.clone(), den.clone(), *delay)?,
            TfTerm::Gain { k } => ContinuousTF::gain(*k),
            TfTerm::FittedPlant { params } => fitted_plant(params)?,
            TfTerm::Pid {
                kp,
                ki,
                kd,
                deriv_corner_hz,
            } => pid_tf(*kp, *ki, *kd, *deriv_corner_hz)?,
            TfTerm::Notch { center_hz, k1, k2 } => notch(*center_hz, *k1, *k2)?,
            TfTerm::Butterworth2 { corner_hz } => butterworth2(*corner_hz)?,
        })
    }
}

impl TfConfig {
    pub fn build(&self) -> Result<ContinuousTF> {
        let mut terms = self.term.iter();
        let first = terms
            .next()
            .ok_or_else(|| Error::Config("transfer function needs at least one [[term]]".into()))?;
        let mut tf = first.build()?;
        for t in terms {
            tf = tf.series(&t.build()?);
        }
        Ok(tf)
    }

    /// Published plant with the default pitch rate controller in series.
    pub fn designed_loop() -> Self {
        let rate = vtol_core::control::RateLoopConfig::default();
        let n = &rate.notch[1];
        Self {
            term: vec![
                TfTerm::FittedPlant {
                    params: PlantFitParams::default(),
                },
                TfTerm::Pid {
                    kp: rate.kp[1],
                    ki: rate.ki[1],
                    kd: rate.kd[1],
                    deriv_corner_hz: rate.deriv_corner_hz,
                },
                TfTerm::Notch {
                    center_hz: n.center_hz,
                    k1: n.k1,
                    k2: n.k2,
                },
            ],
        }
    }
}
