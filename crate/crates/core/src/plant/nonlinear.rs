use nalgebra::Vector3;

use super::aero::AeroTable;
use super::mixer::{Mixer, MotorCommand};
use super::params::AircraftParams;
use super::rigid::{step_dynamics, BodyInputs, RigidBodyModel, RigidBodyState};
use super::torque_path::TorquePathConfig;
use crate::error::PlantError;
use crate::lti::DigitalFilter;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct NonlinearPlantConfig {
    pub aircraft: AircraftParams,
    pub torque_path: TorquePathConfig,
    /// Linear aerodynamic rate damping per body axis, N·m·s.
    pub rate_damping: [f64; 3],
    /// Integration rate, Hz.
    pub sample_hz: f64,
}

impl Default for NonlinearPlantConfig {
    fn default() -> Self {
        Self {
            aircraft: AircraftParams::default(),
            torque_path: TorquePathConfig::default(),
            rate_damping: [0.0; 3],
            sample_hz: 1000.0,
        }
    }
}

/// What happened during one plant step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantStep {
    pub motors: MotorCommand,
    pub aero_clamped: bool,
}

/// Rigid-body airframe with shaped torque paths, thrust allocation and
/// motor limits.
#[derive(Debug, Clone)]
pub struct NonlinearPlant {
    model: RigidBodyModel,
    mixer: Mixer,
    filters: [DigitalFilter; 3],
    torque_scale: Vector3<f64>,
    dt: f64,
    t: f64,
    state: RigidBodyState,
    last: MotorCommand,
}

impl NonlinearPlant {
    pub fn new(cfg: &NonlinearPlantConfig, table: AeroTable, initial: RigidBodyState) -> Result<Self, PlantError> {
        if !(cfg.sample_hz >= 500.0) {
            return Err(PlantError::InvalidParameter("plant rate must be >= 500 Hz"));
        }
        let model = RigidBodyModel::new(&cfg.aircraft, table, Vector3::from(cfg.rate_damping))?;
        let mixer = Mixer::new(&cfg.aircraft)?;
        let filters = [
            cfg.torque_path.axis_filter(0, cfg.sample_hz)?,
            cfg.torque_path.axis_filter(1, cfg.sample_hz)?,
            cfg.torque_path.axis_filter(2, cfg.sample_hz)?,
        ];
        let i = cfg.aircraft.inertia_matrix();
        let torque_scale = Vector3::new(
            cfg.torque_path.torque_scale(0, i[(0, 0)]),
            cfg.torque_path.torque_scale(1, i[(1, 1)]),
            cfg.torque_path.torque_scale(2, i[(2, 2)]),
        );
        let hover = cfg.aircraft.hover_command;
        Ok(Self {
            model,
            mixer,
            filters,
            torque_scale,
            dt: 1.0 / cfg.sample_hz,
            t: 0.0,
            state: initial,
            last: MotorCommand::uniform(hover),
        })
    }

    pub fn state(&self) -> &RigidBodyState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn last_motors(&self) -> &MotorCommand {
        &self.last
    }

    pub fn mixer(&self) -> &Mixer {
        &self.mixer
    }

    pub fn model(&self) -> &RigidBodyModel {
        &self.model
    }

    /// Advances one integration step with a normalized torque command and a
    /// normalized collective command.
    pub fn step(&mut self, torque_cmd: &Vector3<f64>, thrust_cmd: f64) -> Result<PlantStep, PlantError> {
        let mut shaped = Vector3::zeros();
        for i in 0..3 {
            shaped[i] = self.filters[i].process(torque_cmd[i]) * self.torque_scale[i];
        }
        let motors = self.mixer.mix(&shaped, thrust_cmd);
        let (torque, thrust) = self.mixer.wrench(&motors);
        let out = step_dynamics(&self.model, &self.state, &BodyInputs { thrust, torque }, self.dt, self.t)?;
        self.state = out.state;
        self.t += self.dt;
        self.last = motors;
        Ok(PlantStep {
            motors,
            aero_clamped: out.aero_clamped,
        })
    }
}
