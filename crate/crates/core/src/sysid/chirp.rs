#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::SysIdError;

/// Exponential chirp `u(t) = A sin φ(t)` sweeping `f0 → f1` over `duration`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ChirpConfig {
    pub f0: f64,
    pub f1: f64,
    pub duration: f64,
    pub amplitude: f64,
    pub sample_hz: f64,
}

impl Default for ChirpConfig {
    fn default() -> Self {
        Self {
            f0: 1.0,
            f1: 60.0,
            duration: 60.0,
            amplitude: 0.02,
            sample_hz: 250.0,
        }
    }
}

impl ChirpConfig {
    /// `f0 = f1` is accepted and produces a pure sinusoid. A zero amplitude
    /// is accepted so that noise-only records can be produced.
    pub fn validate(&self) -> Result<(), SysIdError> {
        if !(self.sample_hz > 0.0 && self.sample_hz.is_finite()) {
            return Err(SysIdError::InvalidParameter("sample rate must be > 0"));
        }
        if !(self.f0 > 0.0 && self.f0 <= self.f1 && self.f1 < self.sample_hz / 2.0) {
            return Err(SysIdError::InvalidParameter("need 0 < f0 <= f1 < sample_hz/2"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(SysIdError::InvalidParameter("duration must be > 0"));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(SysIdError::InvalidParameter("amplitude must be >= 0"));
        }
        Ok(())
    }

    /// Frequency ratio per second, `k = (f1/f0)^(1/T)`.
    pub fn k(&self) -> f64 {
        (self.f1 / self.f0).powf(1.0 / self.duration)
    }

    pub fn samples(&self) -> usize {
        (self.duration * self.sample_hz).round() as usize
    }

    pub fn phase(&self, t: f64) -> f64 {
        let ln_k = self.k().ln();
        if ln_k.abs() < 1e-12 {
            2.0 * PI * self.f0 * t
        } else {
            2.0 * PI * self.f0 * ((ln_k * t).exp_m1()) / ln_k
        }
    }

    pub fn instantaneous_hz(&self, t: f64) -> f64 {
        self.f0 * self.k().powf(t)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * self.phase(t).sin()
    }
}

/// Uniformly sampled scalar record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub sample_hz: f64,
    pub t0: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(sample_hz: f64, t0: f64, values: Vec<f64>) -> Result<Self, SysIdError> {
        if !(sample_hz > 0.0 && sample_hz.is_finite()) {
            return Err(SysIdError::InvalidParameter("sample rate must be > 0"));
        }
        if !t0.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(SysIdError::InvalidParameter("time series must be finite"));
        }
        Ok(Self { sample_hz, t0, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 / self.sample_hz
    }

    pub fn duration(&self) -> f64 {
        self.values.len() as f64 / self.sample_hz
    }
}

pub fn chirp(cfg: &ChirpConfig) -> Result<TimeSeries, SysIdError> {
    cfg.validate()?;
    let values = (0..cfg.samples())
        .map(|k| cfg.value(k as f64 / cfg.sample_hz))
        .collect();
    TimeSeries::new(cfg.sample_hz, 0.0, values)
}
