//! Simulation plants: a nonlinear rigid-body tail-sitter with table
//! aerodynamics and thrust allocation, and a linear single-axis plant
//! realized from a transfer function. Also sensor and rotor-vibration
//! models.

mod aero;
mod linear;
mod mixer;
mod nonlinear;
mod params;
mod rigid;
mod sensor;
mod torque_path;

pub use aero::{
    aero_force_body, aero_forces, angle_of_attack, velocity_axes_body, AeroCoefficients,
    AeroForces, AeroModelParams, AeroTable,
};
pub use linear::LinearAxisPlant;
pub use mixer::{Mixer, MotorCommand};
pub use nonlinear::{NonlinearPlant, NonlinearPlantConfig, PlantStep};
pub use params::AircraftParams;
pub use rigid::{accelerations, step_dynamics, BodyInputs, RigidBodyModel, RigidBodyState, StepOutcome};
pub use sensor::{RotorVibration, RotorVibrationConfig, SensorConfig, SensorModel, SensorSample};
pub use torque_path::{FlexibleModeParams, TorquePathConfig};
