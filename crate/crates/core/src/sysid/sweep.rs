use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Normal};

use super::chirp::{ChirpConfig, TimeSeries};
use crate::error::SysIdError;
use crate::plant::LinearAxisPlant;

/// Single-axis plant driven one controller tick at a time.
pub trait RatePlant {
    fn sample_hz(&self) -> f64;
    /// Applies `u` for one tick and returns the next rate measurement.
    fn step(&mut self, u: f64) -> Result<f64, SysIdError>;
}

impl RatePlant for LinearAxisPlant {
    fn sample_hz(&self) -> f64 {
        LinearAxisPlant::sample_hz(self)
    }

    fn step(&mut self, u: f64) -> Result<f64, SysIdError> {
        Ok(LinearAxisPlant::step(self, u))
    }
}

/// Rates beyond this are treated as divergence.
const DIVERGENCE_RATE: f64 = 1e3;

/// Recorded sweep: injected chirp, total plant input and measured rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub sample_hz: f64,
    pub t: Vec<f64>,
    pub u_injected: Vec<f64>,
    pub u_total: Vec<f64>,
    pub omega_meas: Vec<f64>,
}

impl SweepRecord {
    pub fn input(&self) -> Result<TimeSeries, SysIdError> {
        TimeSeries::new(self.sample_hz, 0.0, self.u_total.clone())
    }

    pub fn output(&self) -> Result<TimeSeries, SysIdError> {
        TimeSeries::new(self.sample_hz, 0.0, self.omega_meas.clone())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Runs a chirp experiment. Each tick the controller (if any) maps the
/// current measurement to `τ`, the chirp sample `u` is added and
/// `τ + u` is applied. Gaussian noise of `noise_std` is added to every
/// measurement the controller and the record see.
pub fn sweep_experiment<P: RatePlant>(
    plant: &mut P,
    cfg: &ChirpConfig,
    mut controller: Option<&mut dyn FnMut(f64) -> f64>,
    noise_std: f64,
    seed: u64,
) -> Result<SweepRecord, SysIdError> {
    cfg.validate()?;
    if (plant.sample_hz() - cfg.sample_hz).abs() > 1e-9 * cfg.sample_hz {
        return Err(SysIdError::InvalidParameter("chirp and plant sample rates differ"));
    }
    let noise = Normal::new(0.0, noise_std).map_err(|_| SysIdError::InvalidParameter("noise std must be >= 0"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.samples();
    let mut rec = SweepRecord {
        sample_hz: cfg.sample_hz,
        t: Vec::with_capacity(n),
        u_injected: Vec::with_capacity(n),
        u_total: Vec::with_capacity(n),
        omega_meas: Vec::with_capacity(n),
    };
    let mut truth = 0.0;
    for k in 0..n {
        let t = k as f64 / cfg.sample_hz;
        let meas = truth + noise.sample(&mut rng);
        let tau = controller.as_mut().map_or(0.0, |c| c(meas));
        let u = cfg.value(t);
        let total = tau + u;
        rec.t.push(t);
        rec.u_injected.push(u);
        rec.u_total.push(total);
        rec.omega_meas.push(meas);
        truth = plant.step(total)?;
        if !truth.is_finite() || truth.abs() > DIVERGENCE_RATE || !total.is_finite() {
            return Err(SysIdError::Diverged { t });
        }
    }
    Ok(rec)
}
