use nalgebra::{Matrix3, Vector3};

use crate::error::PlantError;

/// Mass, inertia, wing and rotor geometry of the airframe.
///
/// Body axes follow the fixed-wing convention: `x` out of the nose, `y` out
/// of the right wing, `z` through the belly. Rotor thrust acts along `+x`,
/// so hovering is a 90° nose-up pitch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AircraftParams {
    /// kg
    pub mass: f64,
    /// kg·m², body frame
    pub inertia: [[f64; 3]; 3],
    /// m²
    pub wing_area: f64,
    /// kg/m³
    pub rho: f64,
    /// m/s²
    pub g: f64,
    /// Rotor hub positions in the body frame, m.
    pub rotor_positions: [[f64; 3]; 4],
    /// Spin direction of each rotor (+1 or -1); sets the sign of its drag
    /// torque about body `x`.
    pub rotor_spin: [f64; 4],
    /// Rotor drag torque per newton of thrust, m.
    pub drag_torque_coeff: f64,
    /// Normalized collective command that holds hover.
    pub hover_command: f64,
}

impl Default for AircraftParams {
    fn default() -> Self {
        Self {
            mass: 1.5,
            inertia: [[0.045, 0.0, 0.0], [0.0, 0.018, 0.0], [0.0, 0.0, 0.06]],
            // 0.9 m span, 0.2 m root chord, 0.48 taper.
            wing_area: 0.9 * 0.2 * (1.0 + 0.48) / 2.0,
            rho: 1.225,
            g: 9.81,
            rotor_positions: [
                [0.0, 0.22, -0.12],
                [0.0, -0.22, 0.12],
                [0.0, 0.22, 0.12],
                [0.0, -0.22, -0.12],
            ],
            rotor_spin: [1.0, 1.0, -1.0, -1.0],
            drag_torque_coeff: 0.016,
            hover_command: 0.47,
        }
    }
}

impl AircraftParams {
    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.inertia[r][c])
    }

    pub fn weight(&self) -> f64 {
        self.mass * self.g
    }

    /// Thrust of one rotor per unit normalized command, N.
    pub fn motor_thrust_coeff(&self) -> f64 {
        self.weight() / (4.0 * self.hover_command)
    }

    /// Total thrust per unit normalized collective, N (`mg / T_h`).
    pub fn thrust_coeff(&self) -> f64 {
        self.weight() / self.hover_command
    }

    pub fn rotor_position(&self, i: usize) -> Vector3<f64> {
        Vector3::from(self.rotor_positions[i])
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.mass) {
            return Err(PlantError::InvalidParameter("mass must be > 0"));
        }
        if !pos(self.wing_area) {
            return Err(PlantError::InvalidParameter("wing area must be > 0"));
        }
        if !pos(self.rho) || !pos(self.g) {
            return Err(PlantError::InvalidParameter("rho and g must be > 0"));
        }
        if !(self.hover_command > 0.0 && self.hover_command < 1.0) {
            return Err(PlantError::InvalidParameter("hover command must be in (0, 1)"));
        }
        let i = self.inertia_matrix();
        if (i - i.transpose()).abs().max() > 1e-12 {
            return Err(PlantError::InvalidParameter("inertia must be symmetric"));
        }
        if i.cholesky().is_none() {
            return Err(PlantError::InvalidParameter("inertia must be positive definite"));
        }
        if !self.drag_torque_coeff.is_finite() {
            return Err(PlantError::InvalidParameter("drag torque coefficient must be finite"));
        }
        super::mixer::Mixer::new(self).map(|_| ())
    }
}
