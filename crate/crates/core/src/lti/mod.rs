//! Continuous transfer functions with delay, frequency response, loop
//! margins, filter design and Tustin discretization.

mod discrete;
mod freq;
pub mod poly;
mod tf;

pub use discrete::{discretize_tustin, discretize_tustin_sections, Biquad, BiquadCascade, DelayLine, DigitalFilter};
pub use freq::{
    bode, closed_loop_bandwidth, closed_loop_poles, closed_loop_stability, logspace,
    magnitude_slope, margins, points_for, ClosedLoopStability, FrequencyResponse, PhaseTracker,
    StabilityMargins,
};
pub use tf::{
    butterworth2, fitted_plant, notch, pade_delay, pid_tf, ContinuousTF, PlantFitParams,
    ResonancePair,
};
