#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::poly;
use super::tf::{pade_delay, ContinuousTF};
use crate::error::LtiError;

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Points needed to cover `[lo, hi]` at `per_decade` density.
pub fn points_for(lo: f64, hi: f64, per_decade: usize) -> usize {
    ((hi / lo).log10() * per_decade as f64).ceil() as usize + 1
}

/// Sampled frequency response with a continuous (unwrapped) phase.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    freqs: Vec<f64>,
    values: Vec<Complex64>,
    phase_deg: Vec<f64>,
}

impl FrequencyResponse {
    /// Builds a response from measured samples; the phase is unwrapped by
    /// continuation from the first sample.
    pub fn new(freqs: Vec<f64>, values: Vec<Complex64>) -> Result<Self, LtiError> {
        if freqs.len() != values.len() || freqs.is_empty() {
            return Err(LtiError::InvalidParameter("frequency and value lengths differ"));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) || !(freqs[0] > 0.0) {
            return Err(LtiError::InvalidParameter("frequencies must be positive and strictly increasing"));
        }
        let mut phase = Vec::with_capacity(values.len());
        let mut prev = 0.0;
        for (i, v) in values.iter().enumerate() {
            let p = v.arg().to_degrees();
            let p = if i == 0 { p } else { unwrap_near(p, prev) };
            phase.push(p);
            prev = p;
        }
        Ok(Self {
            freqs,
            values,
            phase_deg: phase,
        })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn magnitude_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| 20.0 * v.norm().log10()).collect()
    }

    pub fn phase_deg(&self) -> &[f64] {
        &self.phase_deg
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }
}

fn unwrap_near(p: f64, reference: f64) -> f64 {
    p + 360.0 * ((reference - p) / 360.0).round()
}

/// Evaluates the continuous phase of a transfer function from its factored
/// form, so lightly damped pairs and long delays never confuse unwrapping.
#[derive(Debug, Clone)]
pub struct PhaseTracker {
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    offset_deg: f64,
    delay: f64,
}

impl PhaseTracker {
    pub fn new(tf: &ContinuousTF) -> Self {
        let num = tf.num();
        let den = tf.den();
        let lead = num[num.len() - 1] / den[den.len() - 1];
        Self {
            zeros: poly::roots(num),
            poles: poly::roots(den),
            offset_deg: if lead < 0.0 { 180.0 } else { 0.0 },
            delay: tf.delay(),
        }
    }

    pub fn phase_deg(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz;
        let arg = |r: &Complex64| {
            let c = Complex64::new(-r.re, w - r.im);
            let a = c.im.atan2(c.re);
            if c.re < 0.0 && a < 0.0 {
                a + 2.0 * PI
            } else {
                a
            }
        };
        let z: f64 = self.zeros.iter().map(arg).sum();
        let p: f64 = self.poles.iter().map(arg).sum();
        (z - p).to_degrees() + self.offset_deg - 360.0 * freq_hz * self.delay
    }
}

/// Frequency response of `tf` on a log grid with at least
/// `points_per_decade` samples per decade. Samples at axis poles are skipped.
pub fn bode(
    tf: &ContinuousTF,
    lo_hz: f64,
    hi_hz: f64,
    points_per_decade: usize,
) -> Result<FrequencyResponse, LtiError> {
    if !(lo_hz > 0.0) || !(hi_hz > lo_hz) {
        return Err(LtiError::InvalidFrequency(lo_hz));
    }
    let tracker = PhaseTracker::new(tf);
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    let mut phase = Vec::new();
    for f in logspace(lo_hz, hi_hz, points_for(lo_hz, hi_hz, points_per_decade.max(2))) {
        match tf.eval(f) {
            Ok(v) => {
                freqs.push(f);
                values.push(v);
                phase.push(tracker.phase_deg(f));
            }
            Err(LtiError::Unbounded { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(FrequencyResponse {
        freqs,
        values,
        phase_deg: phase,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityMargins {
    pub gain_crossover_hz: f64,
    pub phase_margin_deg: f64,
    pub phase_crossover_hz: Option<f64>,
    pub gain_margin_db: Option<f64>,
    /// Every frequency in the band where |L| passes through 0 dB.
    pub all_gain_crossings_hz: Vec<f64>,
}

const MARGIN_GRID_PER_DECADE: usize = 1000;

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    // `f(lo)` and `f(hi)` have opposite signs; bisect in log frequency.
    let flo = f(lo);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if hi - lo < 1e-10 {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

fn log_mag(tf: &ContinuousTF, f: f64) -> f64 {
    match tf.eval(f) {
        Ok(v) => v.norm().ln(),
        Err(_) => f64::INFINITY,
    }
}

/// Gain and phase margins of the loop `l` inside `band_hz`.
pub fn margins(l: &ContinuousTF, band_hz: (f64, f64)) -> Result<StabilityMargins, LtiError> {
    let (lo, hi) = band_hz;
    if !(lo > 0.0) || !(hi > lo) {
        return Err(LtiError::InvalidFrequency(lo));
    }
    let tracker = PhaseTracker::new(l);
    let grid = logspace(lo, hi, points_for(lo, hi, MARGIN_GRID_PER_DECADE));
    let lm: Vec<f64> = grid.iter().map(|f| log_mag(l, *f)).collect();

    let mut crossings = Vec::new();
    let mut first_down = None;
    for i in 0..grid.len() - 1 {
        let (a, b) = (lm[i], lm[i + 1]);
        if (a >= 0.0) != (b >= 0.0) {
            let fc = bisect(grid[i], grid[i + 1], |f| log_mag(l, f));
            crossings.push(fc);
            if first_down.is_none() && a >= 0.0 && b < 0.0 {
                first_down = Some(fc);
            }
        }
    }
    let fc = first_down.ok_or(LtiError::NoCrossover { lo_hz: lo, hi_hz: hi })?;
    let pm = 180.0 + tracker.phase_deg(fc);

    // Phase crossover: first passage of the phase through an odd multiple
    // of -180 degrees.
    let branch = |f: f64| ((tracker.phase_deg(f) + 180.0) / 360.0).floor();
    let mut phase_cross = None;
    for i in 0..grid.len() - 1 {
        let (ba, bb) = (branch(grid[i]), branch(grid[i + 1]));
        if ba != bb {
            let level = 360.0 * ba.max(bb) - 180.0;
            let f = bisect(grid[i], grid[i + 1], |f| tracker.phase_deg(f) - level);
            phase_cross = Some(f);
            break;
        }
    }
    let gm = phase_cross.and_then(|f| l.eval(f).ok().map(|v| -20.0 * v.norm().log10()));
    Ok(StabilityMargins {
        gain_crossover_hz: fc,
        phase_margin_deg: pm,
        phase_crossover_hz: phase_cross,
        gain_margin_db: gm,
        all_gain_crossings_hz: crossings,
    })
}

/// Least-squares slope of `20 log10 |L|` against `log10 f` over 50
/// log-spaced points.
pub fn magnitude_slope(l: &ContinuousTF, f_lo_hz: f64, f_hi_hz: f64) -> Result<f64, LtiError> {
    if !(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz) {
        return Err(LtiError::InvalidFrequency(f_lo_hz));
    }
    let mut xs = Vec::with_capacity(50);
    let mut ys = Vec::with_capacity(50);
    for f in logspace(f_lo_hz, f_hi_hz, 50) {
        xs.push(f.log10());
        ys.push(20.0 * l.eval(f)?.norm().log10());
    }
    Ok(linear_fit_slope(&xs, &ys))
}

pub(crate) fn linear_fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Closed-loop poles of unity negative feedback around `l`, with the delay
/// replaced by a Padé approximant of the given order.
pub fn closed_loop_poles(l: &ContinuousTF, pade_order: usize) -> Result<Vec<Complex64>, LtiError> {
    let pade = pade_delay(l.delay(), pade_order)?;
    let num = poly::mul(l.num(), pade.num());
    let den = poly::mul(l.den(), pade.den());
    Ok(poly::roots(&poly::add(&num, &den)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopStability {
    pub stable: bool,
    /// Largest real part among closed-loop poles, 1/s.
    pub max_real_part: f64,
    /// Frequency of the least stable pole, Hz.
    pub dominant_freq_hz: f64,
}

pub fn closed_loop_stability(l: &ContinuousTF) -> Result<ClosedLoopStability, LtiError> {
    let poles = closed_loop_poles(l, 10)?;
    let worst = poles
        .iter()
        .copied()
        .max_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(core::cmp::Ordering::Equal))
        .ok_or(LtiError::InvalidParameter("loop has no poles"))?;
    Ok(ClosedLoopStability {
        stable: worst.re < 0.0,
        max_real_part: worst.re,
        dominant_freq_hz: worst.im.abs() / (2.0 * PI),
    })
}

/// Lowest frequency where |L/(1+L)| drops below -3 dB, if any in band.
pub fn closed_loop_bandwidth(l: &ContinuousTF, band_hz: (f64, f64)) -> Option<f64> {
    let (lo, hi) = band_hz;
    let t = |f: f64| -> f64 {
        match l.eval(f) {
            Ok(v) => (v / (Complex64::new(1.0, 0.0) + v)).norm().ln() + 0.5 * 2f64.ln(),
            Err(_) => 0.0,
        }
    };
    let grid = logspace(lo, hi, points_for(lo, hi, 200));
    for w in grid.windows(2) {
        if t(w[0]) >= 0.0 && t(w[1]) < 0.0 {
            return Some(bisect(w[0], w[1], t));
        }
    }
    None
}
