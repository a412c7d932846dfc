#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::control::ControllerConfig;
use crate::error::HarnessError;
use crate::lti::PlantFitParams;
use crate::plant::{NonlinearPlantConfig, SensorConfig};
use crate::sysid::ChirpConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum PlantMode {
    /// Six-degree-of-freedom airframe at the plant rate with sensors.
    #[default]
    Nonlinear,
    /// Pitch axis only, realized from the identified transfer function at
    /// the controller rate.
    LinearAxis,
}

/// A timed change to the setpoints or controller.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "action", rename_all = "snake_case", deny_unknown_fields))]
pub enum Action {
    /// Attitude setpoint as Z-X-Y angles, degrees. Leaves rate mode.
    Attitude { roll_deg: f64, pitch_deg: f64, yaw_deg: f64 },
    /// Linear pitch ramp from the current pitch setpoint.
    PitchRamp { to_deg: f64, duration: f64 },
    Altitude { height: f64 },
    Notch { axis: usize, enabled: bool },
    /// Direct body-rate command, rad/s, bypassing the attitude loop.
    RateCommand { rates: [f64; 3] },
    /// Chirp added to the torque command of one axis.
    Sweep { axis: usize, chirp: ChirpConfig },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Event {
    pub t: f64,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub action: Action,
}

/// Pass/fail rule evaluated on the telemetry of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields))]
pub enum Check {
    /// Growing pitch-rate oscillation inside `[t0, t1)` at `freq_hz ± tol_hz`,
    /// then envelope convergence within `settle_s` after `enable_t`.
    DivergenceThenConvergence {
        t0: f64,
        t1: f64,
        freq_hz: f64,
        tol_hz: f64,
        enable_t: f64,
        settle_s: f64,
    },
    /// Largest overshoot of the measured rate over its command steps.
    RateTracking { axis: usize, t0: f64, max_overshoot_pct: f64 },
    /// Largest height error from `t0` on.
    AltitudeHold { t0: f64, max_error_m: f64 },
    /// First-order fit of the measured pitch after a pitch step at `t`.
    PitchStep {
        t: f64,
        window: f64,
        min_r2: f64,
        max_overshoot_pct: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct InitialCondition {
    pub pitch_deg: f64,
    pub height: f64,
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self {
            pitch_deg: 90.0,
            height: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Scenario {
    pub name: String,
    pub plant_mode: PlantMode,
    pub duration: f64,
    pub seed: u64,
    pub controller: ControllerConfig,
    pub plant: NonlinearPlantConfig,
    pub sensor: SensorConfig,
    /// Transfer function used in linear-axis mode.
    pub linear_plant: PlantFitParams,
    /// White gyro noise at the controller rate in linear-axis mode, rad/s.
    pub linear_gyro_noise: f64,
    pub initial: InitialCondition,
    pub events: Vec<Event>,
    pub checks: Vec<Check>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: String::from("custom"),
            plant_mode: PlantMode::Nonlinear,
            duration: 10.0,
            seed: 1,
            controller: ControllerConfig::default(),
            plant: NonlinearPlantConfig::default(),
            sensor: SensorConfig::default(),
            linear_plant: PlantFitParams::default(),
            linear_gyro_noise: 0.0025,
            initial: InitialCondition::default(),
            events: Vec::new(),
            checks: Vec::new(),
        }
    }
}

fn invalid(msg: String) -> HarnessError {
    HarnessError::InvalidScenario(msg)
}

impl Scenario {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(invalid(format!("duration must be > 0, got {}", self.duration)));
        }
        self.controller.validate()?;
        let ratio = self.plant.sample_hz / self.controller.rate.sample_hz;
        if self.plant_mode == PlantMode::Nonlinear
            && (self.sensor.decimation as f64 != ratio || ratio.fract() != 0.0)
        {
            return Err(invalid(format!(
                "plant rate {} Hz / sensor decimation {} does not give the {} Hz controller rate",
                self.plant.sample_hz, self.sensor.decimation, self.controller.rate.sample_hz
            )));
        }
        if !(self.linear_gyro_noise >= 0.0) {
            return Err(invalid(String::from("linear_gyro_noise must be >= 0")));
        }
        let mut last = f64::NEG_INFINITY;
        for (i, e) in self.events.iter().enumerate() {
            if !(e.t >= 0.0 && e.t.is_finite()) {
                return Err(invalid(format!("event {i}: time must be >= 0")));
            }
            if e.t < last {
                return Err(invalid(format!("event {i} at t = {} s is earlier than the one before", e.t)));
            }
            last = e.t;
            match &e.action {
                Action::Notch { axis, .. } | Action::Sweep { axis, .. } if *axis > 2 => {
                    return Err(invalid(format!("event {i}: axis must be 0, 1 or 2")));
                }
                Action::PitchRamp { duration, .. } if !(*duration > 0.0) => {
                    return Err(invalid(format!("event {i}: ramp duration must be > 0")));
                }
                Action::Sweep { chirp, .. } => {
                    chirp.validate()?;
                    if chirp.sample_hz != self.controller.rate.sample_hz {
                        return Err(invalid(format!("event {i}: sweep must run at the controller rate")));
                    }
                }
                Action::RateCommand { rates } if rates.iter().any(|r| !r.is_finite()) => {
                    return Err(invalid(format!("event {i}: rate command must be finite")));
                }
                _ => {}
            }
        }
        for (i, c) in self.checks.iter().enumerate() {
            let ok = match c {
                Check::DivergenceThenConvergence { t0, t1, tol_hz, settle_s, .. } => {
                    t1 > t0 && *tol_hz > 0.0 && *settle_s > 0.0
                }
                Check::RateTracking { axis, .. } => *axis <= 2,
                Check::AltitudeHold { max_error_m, .. } => *max_error_m > 0.0,
                Check::PitchStep { window, .. } => *window > 0.0,
            };
            if !ok {
                return Err(invalid(format!("check {i} is malformed")));
            }
        }
        Ok(())
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_SCENARIOS: [&str; 3] = ["hover_notch_ab", "rate_step", "transition"];

/// Scripted reproductions of the hover notch A/B test, pitch-rate square
/// wave tracking, and the forward accelerate/decelerate flight.
pub fn builtin(name: &str) -> Option<Scenario> {
    let ev = |t: f64, action: Action| Event { t, action };
    let hover = Scenario::default();
    match name {
        "hover_notch_ab" => Some(Scenario {
            name: name.into(),
            duration: 16.0,
            events: alloc::vec![
                ev(0.0, Action::Notch { axis: 1, enabled: false }),
                ev(10.0, Action::Notch { axis: 1, enabled: true }),
            ],
            checks: alloc::vec![Check::DivergenceThenConvergence {
                t0: 0.0,
                t1: 10.0,
                freq_hz: 14.0,
                tol_hz: 1.0,
                enable_t: 10.0,
                settle_s: 3.0,
            }],
            ..hover
        }),
        "rate_step" => {
            let mut events = alloc::vec![ev(1.0, Action::RateCommand { rates: [0.0; 3] })];
            for k in 0..8 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                events.push(ev(2.0 + k as f64, Action::RateCommand { rates: [0.0, 0.5 * sign, 0.0] }));
            }
            events.push(ev(10.0, Action::RateCommand { rates: [0.0; 3] }));
            Some(Scenario {
                name: name.into(),
                duration: 12.0,
                events,
                checks: alloc::vec![Check::RateTracking {
                    axis: 1,
                    t0: 1.5,
                    max_overshoot_pct: 5.0,
                }],
                ..hover
            })
        }
        "transition" => Some(Scenario {
            name: name.into(),
            duration: 32.0,
            events: alloc::vec![
                ev(0.0, Action::Altitude { height: 10.0 }),
                ev(5.0, Action::PitchRamp { to_deg: 85.0, duration: 5.0 }),
                ev(20.0, Action::Attitude { roll_deg: 0.0, pitch_deg: 90.0, yaw_deg: 0.0 }),
            ],
            checks: alloc::vec![
                Check::AltitudeHold { t0: 0.0, max_error_m: 2.0 },
                Check::PitchStep {
                    t: 20.0,
                    window: 6.0,
                    min_r2: 0.95,
                    max_overshoot_pct: 5.0,
                },
            ],
            ..hover
        }),
        _ => None,
    }
}
