//! Runtime cascade: attitude P loop, 250 Hz body-rate PID with notch, and
//! the altitude loop with thrust feedforward.

mod altitude;
mod attitude_loop;
mod rate;

pub use altitude::{
    altitude_ff_thrust, altitude_loop_step, AltitudeLoopConfig, AltitudeLoopState, AltitudeOutput, FeedforwardThrust,
    FlightCondition, MIN_VERTICAL_AUTHORITY,
};
pub use attitude_loop::{attitude_controller_step, AttitudeLoopConfig};
pub use rate::{rate_controller_step, NotchConfig, RateLoopConfig, RateLoopState, RATE_LOOP_HZ};

use nalgebra::Vector3;

use crate::attitude::UnitQuaternion;
use crate::error::ControlError;
use crate::plant::{AeroTable, AircraftParams};

/// Command sent to the mixer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    /// Normalized torque per body axis.
    pub torque_cmd: Vector3<f64>,
    /// Normalized collective in `[0, 1]`.
    pub thrust_cmd: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ControllerConfig {
    pub rate: RateLoopConfig,
    pub attitude: AttitudeLoopConfig,
    pub altitude: AltitudeLoopConfig,
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        self.rate.validate()?;
        self.attitude.validate()?;
        self.altitude.validate()
    }
}

/// Measurements available to the controller at one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurements {
    pub q: UnitQuaternion,
    pub omega: Vector3<f64>,
    /// Height above the start point, m (positive up).
    pub height: f64,
    /// Vertical speed, NED (positive down), m/s.
    pub vz: f64,
    pub airspeed: f64,
    pub alpha: f64,
}

/// Setpoints for one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setpoints {
    pub q: UnitQuaternion,
    pub height: f64,
    /// Added to the attitude loop output, rad/s.
    pub rate_offset: Vector3<f64>,
    /// Replaces the attitude loop output when set, rad/s.
    pub rate_override: Option<Vector3<f64>>,
}

impl Setpoints {
    pub fn attitude(q: UnitQuaternion, height: f64) -> Self {
        Self {
            q,
            height,
            rate_offset: Vector3::zeros(),
            rate_override: None,
        }
    }
}

/// Everything the cascade produced at one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeOutput {
    pub output: ControlOutput,
    pub omega_cmd: Vector3<f64>,
    pub altitude: AltitudeOutput,
    pub rate_saturated: [bool; 3],
}

/// Attitude, rate and altitude loops with their state.
#[derive(Debug, Clone)]
pub struct Cascade {
    cfg: ControllerConfig,
    params: AircraftParams,
    table: AeroTable,
    rate: RateLoopState,
    altitude: AltitudeLoopState,
}

impl Cascade {
    pub fn new(cfg: ControllerConfig, params: AircraftParams, table: AeroTable) -> Result<Self, ControlError> {
        cfg.validate()?;
        Ok(Self {
            rate: RateLoopState::new(&cfg.rate)?,
            altitude: AltitudeLoopState::new(),
            cfg,
            params,
            table,
        })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn rate_state(&self) -> &RateLoopState {
        &self.rate
    }

    pub fn altitude_state(&self) -> &AltitudeLoopState {
        &self.altitude
    }

    pub fn set_notch_enabled(&mut self, axis: usize, on: bool) {
        self.rate.set_notch_enabled(axis, on);
    }

    pub fn step(&mut self, meas: &Measurements, sp: &Setpoints) -> Result<CascadeOutput, ControlError> {
        let omega_cmd = match sp.rate_override {
            Some(w) => w,
            None => attitude_controller_step(&meas.q, &sp.q, &self.cfg.attitude) + sp.rate_offset,
        };
        let torque_cmd = rate_controller_step(&meas.omega, &omega_cmd, &self.cfg.rate, &mut self.rate)?;
        let flight = FlightCondition {
            q: meas.q,
            airspeed: meas.airspeed,
            alpha: meas.alpha,
        };
        let altitude = altitude_loop_step(
            meas.height,
            sp.height,
            meas.vz,
            &mut self.altitude,
            &self.cfg.altitude,
            &self.params,
            &self.table,
            &flight,
        )?;
        Ok(CascadeOutput {
            output: ControlOutput {
                torque_cmd,
                thrust_cmd: altitude.thrust_cmd,
            },
            omega_cmd,
            altitude,
            rate_saturated: self.rate.saturated(),
        })
    }
}
