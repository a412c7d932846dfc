//! Frequency-domain identification: exponential chirp excitation, FRF
//! estimation with frequency-dependent resolution, and parametric fitting
//! of the rate-plant model structure.

mod chirp;
mod fit;
mod frf;
mod simplex;
mod sweep;

pub use chirp::{chirp, ChirpConfig, TimeSeries};
pub use fit::{band_errors, fit_cost, fit_plant_model, BandError, FitConfig, FitResult};
pub use frf::{estimate_frf, synthesize_frf, FrfConfig, FrfEstimate};
pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};
pub use sweep::{sweep_experiment, RatePlant, SweepRecord};
