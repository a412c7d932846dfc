//! Error types shared across the core crate.

use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum LtiError {
    ZeroDenominator,
    NegativeDelay(f64),
    InvalidFrequency(f64),
    /// A pole sits on the imaginary axis at the requested frequency.
    Unbounded { freq_hz: f64 },
    InvalidParameter(&'static str),
    /// The loop magnitude never crosses 0 dB downward inside the band.
    NoCrossover { lo_hz: f64, hi_hz: f64 },
    Improper { num_degree: usize, den_degree: usize },
}

impl fmt::Display for LtiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LtiError::ZeroDenominator => write!(f, "denominator is identically zero"),
            LtiError::NegativeDelay(d) => write!(f, "delay must be finite and >= 0, got {d}"),
            LtiError::InvalidFrequency(x) => write!(f, "frequency must be > 0, got {x}"),
            LtiError::Unbounded { freq_hz } => {
                write!(f, "pole on the imaginary axis at {freq_hz} Hz")
            }
            LtiError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            LtiError::NoCrossover { lo_hz, hi_hz } => {
                write!(f, "no gain crossover in [{lo_hz}, {hi_hz}] Hz")
            }
            LtiError::Improper { num_degree, den_degree } => write!(
                f,
                "improper transfer function: numerator degree {num_degree} > denominator degree {den_degree}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlantError {
    InvalidParameter(&'static str),
    /// State became non-finite during integration.
    NonFinite { t: f64 },
    Lti(LtiError),
}

impl fmt::Display for PlantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlantError::InvalidParameter(m) => write!(f, "invalid plant parameter: {m}"),
            PlantError::NonFinite { t } => write!(f, "non-finite plant state at t = {t} s"),
            PlantError::Lti(e) => write!(f, "plant filter: {e}"),
        }
    }
}

impl From<LtiError> for PlantError {
    fn from(e: LtiError) -> Self {
        PlantError::Lti(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SysIdError {
    InvalidParameter(&'static str),
    /// Input and output records differ in length or sample rate.
    MismatchedRecords,
    RecordTooShort { needed: usize, got: usize },
    /// The optimizer did not reach the tolerance; carries the best cost
    /// found and the initial estimate it started from.
    NotConverged {
        cost: f64,
        initial: alloc::boxed::Box<crate::lti::PlantFitParams>,
    },
    /// The simulated experiment left the finite/bounded region.
    Diverged { t: f64 },
    Lti(LtiError),
}

impl fmt::Display for SysIdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SysIdError::InvalidParameter(m) => write!(f, "invalid identification parameter: {m}"),
            SysIdError::MismatchedRecords => write!(f, "input and output records do not match"),
            SysIdError::RecordTooShort { needed, got } => {
                write!(f, "record too short: need {needed} samples, got {got}")
            }
            SysIdError::NotConverged { cost, .. } => {
                write!(f, "model fit did not converge (best cost {cost})")
            }
            SysIdError::Diverged { t } => write!(f, "sweep diverged at t = {t} s"),
            SysIdError::Lti(e) => write!(f, "{e}"),
        }
    }
}

impl From<LtiError> for SysIdError {
    fn from(e: LtiError) -> Self {
        SysIdError::Lti(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlError {
    InvalidParameter(&'static str),
    /// A controller input was NaN or infinite; names the offending signal.
    NonFinite(&'static str),
    Lti(LtiError),
}

impl fmt::Display for ControlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlError::InvalidParameter(m) => write!(f, "invalid controller parameter: {m}"),
            ControlError::NonFinite(what) => write!(f, "non-finite controller input: {what}"),
            ControlError::Lti(e) => write!(f, "controller filter: {e}"),
        }
    }
}

impl From<LtiError> for ControlError {
    fn from(e: LtiError) -> Self {
        ControlError::Lti(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HarnessError {
    InvalidScenario(alloc::string::String),
    /// Simulation produced non-finite values; the run is aborted.
    NumericalAbort { t: f64, what: &'static str },
    Plant(PlantError),
    Control(ControlError),
    SysId(SysIdError),
    Lti(LtiError),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::InvalidScenario(m) => write!(f, "invalid scenario: {m}"),
            HarnessError::NumericalAbort { t, what } => {
                write!(f, "numerical abort at t = {t} s: {what}")
            }
            HarnessError::Plant(e) => write!(f, "{e}"),
            HarnessError::Control(e) => write!(f, "{e}"),
            HarnessError::SysId(e) => write!(f, "{e}"),
            HarnessError::Lti(e) => write!(f, "{e}"),
        }
    }
}

impl From<PlantError> for HarnessError {
    fn from(e: PlantError) -> Self {
        HarnessError::Plant(e)
    }
}
impl From<ControlError> for HarnessError {
    fn from(e: ControlError) -> Self {
        HarnessError::Control(e)
    }
}
impl From<SysIdError> for HarnessError {
    fn from(e: SysIdError) -> Self {
        HarnessError::SysId(e)
    }
}
impl From<LtiError> for HarnessError {
    fn from(e: LtiError) -> Self {
        HarnessError::Lti(e)
    }
}

impl core::error::Error for LtiError {}
impl core::error::Error for PlantError {}
impl core::error::Error for SysIdError {}
impl core::error::Error for ControlError {}
impl core::error::Error for HarnessError {}
