use crate::error::PlantError;
use crate::lti::{discretize_tustin_sections, ContinuousTF, DigitalFilter};

/// Single-axis plant realized from a transfer function: normalized torque
/// command in, measured body rate out, one sample per controller tick.
///
/// `step(u_k)` returns the measurement the controller reads at tick `k+1`,
/// so the response from the input sequence to the measurement sequence is
/// the transfer function itself (delay rounded to whole ticks).
#[derive(Debug, Clone)]
pub struct LinearAxisPlant {
    filter: DigitalFilter,
    tf: ContinuousTF,
    measurement: f64,
}

impl LinearAxisPlant {
    /// Discretizes `tf` at `sample_hz`, each resonant section prewarped at
    /// its own natural frequency.
    pub fn new(tf: &ContinuousTF, sample_hz: f64) -> Result<Self, PlantError> {
        if tf.poles().iter().any(|p| p.re > 1e-9) {
            return Err(PlantError::InvalidParameter("linear plant must be stable or integrating"));
        }
        if !(sample_hz > 0.0) {
            return Err(PlantError::InvalidParameter("sample rate must be > 0"));
        }
        // One tick of the delay is the hand-over to the next controller tick.
        let inner = tf.with_delay((tf.delay() - 1.0 / sample_hz).max(0.0))?;
        Ok(Self {
            filter: discretize_tustin_sections(&inner, sample_hz)?,
            tf: tf.clone(),
            measurement: 0.0,
        })
    }

    /// Applies `u` for one tick and returns the next measurement.
    pub fn step(&mut self, u: f64) -> f64 {
        self.measurement = self.filter.process(u);
        self.measurement
    }

    /// Measurement available at the current tick.
    pub fn measurement(&self) -> f64 {
        self.measurement
    }

    pub fn reset(&mut self) {
        self.filter.reset();
        self.measurement = 0.0;
    }

    pub fn sample_hz(&self) -> f64 {
        self.filter.sample_hz()
    }

    pub fn filter(&self) -> &DigitalFilter {
        &self.filter
    }

    pub fn tf(&self) -> &ContinuousTF {
        &self.tf
    }
}
