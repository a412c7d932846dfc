#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Vector3;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::PlantError;
use crate::lti::{butterworth2, discretize_tustin, DigitalFilter};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SensorConfig {
    /// Gyro white noise, rad/s.
    pub gyro_noise_std: f64,
    pub antialias_hz: f64,
    /// Input samples per output sample.
    pub decimation: usize,
    pub altitude_noise_std: f64,
    pub vz_noise_std: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            gyro_noise_std: 0.005,
            antialias_hz: 100.0,
            decimation: 4,
            altitude_noise_std: 0.01,
            vz_noise_std: 0.01,
        }
    }
}

/// Decimated measurement handed to the controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSample {
    pub timestamp: f64,
    pub omega_meas: Vector3<f64>,
    /// Height above the origin (−z in NED), m.
    pub altitude_meas: f64,
    /// NED vertical velocity, m/s (positive down).
    pub v_z_meas: f64,
}

/// Gyro noise, anti-alias filtering and decimation from the plant rate to
/// the controller rate.
#[derive(Debug, Clone)]
pub struct SensorModel {
    cfg: SensorConfig,
    input_hz: f64,
    filters: [DigitalFilter; 3],
    rng: ChaCha8Rng,
    count: u64,
}

impl SensorModel {
    pub fn new(cfg: SensorConfig, input_hz: f64, seed: u64) -> Result<Self, PlantError> {
        if cfg.decimation == 0 {
            return Err(PlantError::InvalidParameter("decimation must be >= 1"));
        }
        for s in [cfg.gyro_noise_std, cfg.altitude_noise_std, cfg.vz_noise_std] {
            if !(s >= 0.0) {
                return Err(PlantError::InvalidParameter("noise levels must be >= 0"));
            }
        }
        let tf = butterworth2(cfg.antialias_hz)?;
        let f = discretize_tustin(&tf, input_hz, None)?;
        Ok(Self {
            cfg,
            input_hz,
            filters: [f.clone(), f.clone(), f],
            rng: ChaCha8Rng::seed_from_u64(seed),
            count: 0,
        })
    }

    pub fn output_hz(&self) -> f64 {
        self.input_hz / self.cfg.decimation as f64
    }

    /// Settles the filters at a constant rate.
    pub fn prime(&mut self, omega: &Vector3<f64>) {
        for i in 0..3 {
            self.filters[i].prime(omega[i]);
        }
    }

    /// Feeds one plant-rate sample; returns a measurement on every
    /// `decimation`-th call, starting with the first.
    pub fn push(&mut self, omega_true: &Vector3<f64>, altitude: f64, v_z: f64) -> Option<SensorSample> {
        let mut filtered = Vector3::zeros();
        for i in 0..3 {
            let n: f64 = StandardNormal.sample(&mut self.rng);
            filtered[i] = self.filters[i].process(omega_true[i] + self.cfg.gyro_noise_std * n);
        }
        let k = self.count;
        self.count += 1;
        if !k.is_multiple_of(self.cfg.decimation as u64) {
            return None;
        }
        let na: f64 = StandardNormal.sample(&mut self.rng);
        let nv: f64 = StandardNormal.sample(&mut self.rng);
        Some(SensorSample {
            timestamp: (k / self.cfg.decimation as u64) as f64 / self.output_hz(),
            omega_meas: filtered,
            altitude_meas: altitude + self.cfg.altitude_noise_std * na,
            v_z_meas: v_z + self.cfg.vz_noise_std * nv,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RotorVibrationConfig {
    /// RMS of the disturbance on each axis, rad/s.
    pub amplitude: f64,
    pub band_hz: [f64; 2],
    pub tones: usize,
}

impl Default for RotorVibrationConfig {
    fn default() -> Self {
        Self {
            amplitude: 0.02,
            band_hz: [75.0, 90.0],
            tones: 8,
        }
    }
}

/// Sum of sinusoids in the rotor band with seeded frequencies and phases.
#[derive(Debug, Clone)]
pub struct RotorVibration {
    /// `(frequency Hz, amplitude, phase)` per tone and axis.
    tones: [Vec<(f64, f64, f64)>; 3],
}

impl RotorVibration {
    pub fn new(cfg: &RotorVibrationConfig, seed: u64) -> Result<Self, PlantError> {
        let [lo, hi] = cfg.band_hz;
        if !(lo > 0.0 && hi > lo) || !(cfg.amplitude >= 0.0) {
            return Err(PlantError::InvalidParameter("vibration band or amplitude invalid"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_7070);
        let freq = Uniform::new(lo, hi).map_err(|_| PlantError::InvalidParameter("vibration band"))?;
        let phase = Uniform::new(0.0, 2.0 * PI).map_err(|_| PlantError::InvalidParameter("phase"))?;
        let n = cfg.tones.max(1);
        // Each tone carries an equal share of the requested RMS.
        let a = cfg.amplitude * (2.0 / n as f64).sqrt();
        let mut tones: [Vec<(f64, f64, f64)>; 3] = Default::default();
        for axis in tones.iter_mut() {
            for _ in 0..n {
                axis.push((freq.sample(&mut rng), a, phase.sample(&mut rng)));
            }
        }
        Ok(Self { tones })
    }

    pub fn value(&self, t: f64) -> Vector3<f64> {
        let mut out = Vector3::zeros();
        for (i, axis) in self.tones.iter().enumerate() {
            out[i] = axis
                .iter()
                .map(|(f, a, p)| a * (2.0 * PI * f * t + p).sin())
                .sum();
        }
        out
    }

    pub fn tone_frequencies(&self, axis: usize) -> impl Iterator<Item = f64> + '_ {
        self.tones[axis].iter().map(|t| t.0)
    }
}
