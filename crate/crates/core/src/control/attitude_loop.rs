use nalgebra::Vector3;

use crate::attitude::{attitude_error, rate_command, UnitQuaternion};
use crate::error::ControlError;

/// Proportional attitude gains per body axis, 1/s.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AttitudeLoopConfig {
    pub gain: [f64; 3],
}

impl Default for AttitudeLoopConfig {
    fn default() -> Self {
        Self { gain: [3.0; 3] }
    }
}

impl AttitudeLoopConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        if self.gain.iter().all(|k| *k > 0.0 && k.is_finite()) {
            Ok(())
        } else {
            Err(ControlError::InvalidParameter("attitude gains must be > 0"))
        }
    }
}

/// Body-rate command that turns `q_meas` towards `q_cmd`.
pub fn attitude_controller_step(
    q_meas: &UnitQuaternion,
    q_cmd: &UnitQuaternion,
    cfg: &AttitudeLoopConfig,
) -> Vector3<f64> {
    rate_command(&Vector3::from(cfg.gain), &attitude_error(q_meas, q_cmd))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_gives_zero() {
        let q = UnitQuaternion::from_axis_angle(Vector3::new(0.3, -0.5, 0.8), 1.1);
        let w = attitude_controller_step(&q, &q, &AttitudeLoopConfig::default());
        assert!(w.norm() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_gain() {
        assert!(AttitudeLoopConfig { gain: [3.0, 0.0, 3.0] }.validate().is_err());
    }
}
