use nalgebra::{Matrix4, Vector3, Vector4};

use super::params::AircraftParams;
use crate::error::PlantError;

/// Four normalized rotor commands and whether any of them was limited.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorCommand {
    pub u: [f64; 4],
    pub saturated: bool,
}

impl MotorCommand {
    pub fn uniform(u: f64) -> Self {
        let c = u.clamp(0.0, 1.0);
        Self {
            u: [c; 4],
            saturated: c != u,
        }
    }
}

/// Thrust allocation: maps `(τx, τy, τz, T)` to per-rotor commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixer {
    /// Rows `(τx, τy, τz, T)` per column of rotor thrust in newtons.
    allocation: Matrix4<f64>,
    inverse: Matrix4<f64>,
    motor_coeff: f64,
    thrust_coeff: f64,
}

impl Mixer {
    pub fn new(params: &AircraftParams) -> Result<Self, PlantError> {
        let mut a = Matrix4::zeros();
        for i in 0..4 {
            let r = params.rotor_position(i);
            a[(0, i)] = params.rotor_spin[i] * params.drag_torque_coeff;
            a[(1, i)] = r.z;
            a[(2, i)] = -r.y;
            a[(3, i)] = 1.0;
        }
        let inverse = a
            .try_inverse()
            .filter(|m| m.iter().all(|v| v.is_finite()))
            .ok_or(PlantError::InvalidParameter("rotor allocation matrix is singular"))?;
        if (a * inverse - Matrix4::identity()).abs().max() > 1e-9 {
            return Err(PlantError::InvalidParameter("rotor allocation matrix is ill-conditioned"));
        }
        Ok(Self {
            allocation: a,
            inverse,
            motor_coeff: params.motor_thrust_coeff(),
            thrust_coeff: params.thrust_coeff(),
        })
    }

    pub fn allocation(&self) -> &Matrix4<f64> {
        &self.allocation
    }

    /// Per-rotor thrust in newtons for a motor command.
    pub fn rotor_thrusts(&self, cmd: &MotorCommand) -> Vector4<f64> {
        Vector4::from(cmd.u) * self.motor_coeff
    }

    /// Body torque and total thrust produced by a motor command.
    pub fn wrench(&self, cmd: &MotorCommand) -> (Vector3<f64>, f64) {
        let w = self.allocation * self.rotor_thrusts(cmd);
        (Vector3::new(w[0], w[1], w[2]), w[3])
    }

    /// Allocates a body torque (N·m) and normalized collective command.
    ///
    /// Limits are resolved with priority collective, then `τx`/`τy`, then
    /// `τz`: each lower-priority contribution is scaled down until every
    /// rotor fits in `[0, 1]`.
    pub fn mix(&self, torque: &Vector3<f64>, thrust_cmd: f64) -> MotorCommand {
        let mut saturated = false;
        let collective = if thrust_cmd.is_finite() {
            thrust_cmd.clamp(0.0, 1.0)
        } else {
            0.0
        };
        if collective != thrust_cmd {
            saturated = true;
        }
        let col = |k: usize| self.inverse.column(k).into_owned() / self.motor_coeff;
        let rp = col(0) * torque.x + col(1) * torque.y;
        let yaw = col(2) * torque.z;
        let base = Vector4::repeat(collective);
        let a = max_scale(&base, &rp);
        let base = base + rp * a;
        let b = max_scale(&base, &yaw);
        if a < 1.0 || b < 1.0 {
            saturated = true;
        }
        let raw = base + yaw * b;
        let mut u = [0.0; 4];
        for i in 0..4 {
            u[i] = raw[i].clamp(0.0, 1.0);
            if (u[i] - raw[i]).abs() > 1e-12 {
                saturated = true;
            }
        }
        MotorCommand { u, saturated }
    }

    /// Normalized collective needed for a total thrust in newtons.
    pub fn collective_for(&self, thrust: f64) -> f64 {
        thrust / self.thrust_coeff
    }
}

/// Largest `s` in `[0, 1]` with `base + s·d` inside `[0, 1]` componentwise.
fn max_scale(base: &Vector4<f64>, d: &Vector4<f64>) -> f64 {
    let mut s: f64 = 1.0;
    for i in 0..4 {
        if !d[i].is_finite() {
            return 0.0;
        }
        if d[i] > 0.0 {
            s = s.min(((1.0 - base[i]) / d[i]).max(0.0));
        } else if d[i] < 0.0 {
            s = s.min((-base[i] / d[i]).max(0.0));
        }
    }
    s
}
