use alloc::vec;

use crate::error::PlantError;
use crate::lti::{discretize_tustin_sections, ContinuousTF, DigitalFilter, PlantFitParams, ResonancePair};

/// Structural resonance and anti-resonance seen on the pitch torque path.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlexibleModeParams {
    pub peak: ResonancePair,
    pub offpeak: ResonancePair,
}

impl Default for FlexibleModeParams {
    fn default() -> Self {
        let p = PlantFitParams::default();
        Self {
            peak: p.peak,
            offpeak: p.offpeak,
        }
    }
}

impl FlexibleModeParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        self.peak.validate()?;
        self.offpeak.validate()?;
        if !(self.peak.den_damping < self.peak.num_damping) {
            return Err(PlantError::InvalidParameter(
                "resonance must amplify: peak denominator damping below numerator damping",
            ));
        }
        if !(self.offpeak.num_damping < self.offpeak.den_damping) {
            return Err(PlantError::InvalidParameter(
                "anti-resonance must attenuate: off-peak numerator damping below denominator damping",
            ));
        }
        Ok(())
    }

    pub fn to_tf(&self) -> Result<ContinuousTF, PlantError> {
        Ok(self.peak.to_tf()?.series(&self.offpeak.to_tf()?))
    }
}

/// Shaping between a normalized torque command and the physical torque of
/// one axis. Together with the rigid body `1/(I s)` it reproduces the
/// identified rate response.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TorquePathConfig {
    pub model: PlantFitParams,
    pub flex: FlexibleModeParams,
    /// Per-axis switch for the flexible-mode filter.
    pub flex_axes: [bool; 3],
    /// Delay applied on the torque path, s. The rest of the identified
    /// delay comes from sensing and the controller sample-and-hold.
    pub actuator_delay: f64,
    /// Rate gain of each axis relative to the identified pitch axis.
    pub axis_gain: [f64; 3],
}

impl Default for TorquePathConfig {
    fn default() -> Self {
        Self {
            model: PlantFitParams::default(),
            flex: FlexibleModeParams::default(),
            flex_axes: [false, true, false],
            actuator_delay: 0.017,
            axis_gain: [1.0; 3],
        }
    }
}

impl TorquePathConfig {
    /// Normalized-torque shaping for one axis: low-pass, the rigid-body
    /// transfer with its integrator removed, optional flexible modes and
    /// the actuator delay. Unit DC gain.
    pub fn axis_tf(&self, axis: usize) -> Result<ContinuousTF, PlantError> {
        let b0 = self.model.dy_num[0];
        if !(b0 > 0.0) {
            return Err(PlantError::InvalidParameter("rigid-body gain must be > 0"));
        }
        if !(self.actuator_delay >= 0.0) {
            return Err(PlantError::InvalidParameter("actuator delay must be >= 0"));
        }
        let dy = ContinuousTF::new(
            vec![1.0, self.model.dy_num[1] / b0, self.model.dy_num[2] / b0],
            vec![1.0, self.model.dy_tau],
            0.0,
        )?;
        let mut tf = self.model.lf()?.series(&dy);
        if self.flex_axes[axis] {
            self.flex.validate()?;
            tf = tf.series(&self.flex.to_tf()?);
        }
        Ok(tf.with_delay(self.actuator_delay)?)
    }

    pub fn axis_filter(&self, axis: usize, sample_hz: f64) -> Result<DigitalFilter, PlantError> {
        Ok(discretize_tustin_sections(&self.axis_tf(axis)?, sample_hz)?)
    }

    /// Physical torque per unit filtered command for an axis with moment of
    /// inertia `inertia`, N·m.
    pub fn torque_scale(&self, axis: usize, inertia: f64) -> f64 {
        self.axis_gain[axis] * inertia * self.model.dy_num[0]
    }
}
