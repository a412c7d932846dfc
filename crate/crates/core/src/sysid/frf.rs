#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::chirp::TimeSeries;
use crate::error::SysIdError;
use crate::lti::{logspace, ContinuousTF, FrequencyResponse};

/// Estimator settings: output grid, cycles of each frequency per window,
/// segment overlap and the coherence needed for a bin to be trusted.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FrfConfig {
    pub f_lo: f64,
    pub f_hi: f64,
    pub n_freqs: usize,
    pub cycles_per_window: f64,
    /// Longest window as a fraction of the record, so every bin averages
    /// several segments.
    pub max_window_fraction: f64,
    pub overlap: f64,
    pub coherence_threshold: f64,
}

impl Default for FrfConfig {
    fn default() -> Self {
        Self {
            f_lo: 1.0,
            f_hi: 60.0,
            n_freqs: 120,
            cycles_per_window: 200.0,
            max_window_fraction: 0.25,
            overlap: 0.5,
            coherence_threshold: 0.6,
        }
    }
}

impl FrfConfig {
    pub fn validate(&self) -> Result<(), SysIdError> {
        if !(self.f_lo > 0.0 && self.f_lo < self.f_hi && self.f_hi.is_finite()) {
            return Err(SysIdError::InvalidParameter("need 0 < f_lo < f_hi"));
        }
        if self.n_freqs < 2 {
            return Err(SysIdError::InvalidParameter("need at least two output frequencies"));
        }
        if !(self.cycles_per_window >= 1.0) {
            return Err(SysIdError::InvalidParameter("cycles per window must be >= 1"));
        }
        if !(self.max_window_fraction > 0.0 && self.max_window_fraction <= 1.0) {
            return Err(SysIdError::InvalidParameter("window fraction must be in (0, 1]"));
        }
        if !(0.0..0.95).contains(&self.overlap) {
            return Err(SysIdError::InvalidParameter("overlap must be in [0, 0.95)"));
        }
        if !(0.0..=1.0).contains(&self.coherence_threshold) {
            return Err(SysIdError::InvalidParameter("coherence threshold must be in [0, 1]"));
        }

        Ok(())
    }
}

/// Frequency response estimate with per-bin coherence.
#[derive(Debug, Clone, PartialEq)]
pub struct FrfEstimate {
    pub freqs: Vec<f64>,
    pub h: Vec<Complex64>,
    pub coherence: Vec<f64>,
    pub coherence_threshold: f64,
    /// Input auto-spectrum per bin, averaged over segments; empty for
    /// synthesized estimates.
    pub input_power: Vec<f64>,
}

impl FrfEstimate {
    pub fn new(freqs: Vec<f64>, h: Vec<Complex64>, coherence: Vec<f64>, coherence_threshold: f64) -> Result<Self, SysIdError> {
        if freqs.len() != h.len() || freqs.len() != coherence.len() {
            return Err(SysIdError::MismatchedRecords);
        }
        if freqs.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(SysIdError::InvalidParameter("frequencies must be positive"));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SysIdError::InvalidParameter("frequencies must be increasing"));
        }
        if coherence.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(SysIdError::InvalidParameter("coherence must be in [0, 1]"));
        }
        if h.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(SysIdError::InvalidParameter("response must be finite"));
        }
        Ok(Self {
            freqs,
            h,
            coherence,
            coherence_threshold,
            input_power: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn is_trusted(&self, i: usize) -> bool {
        self.coherence[i] >= self.coherence_threshold
    }

    pub fn trusted_fraction(&self) -> f64 {
        if self.freqs.is_empty() {
            return 0.0;
        }
        (0..self.len()).filter(|&i| self.is_trusted(i)).count() as f64 / self.len() as f64
    }

    pub fn mean_coherence(&self) -> f64 {
        self.coherence.iter().sum::<f64>() / self.coherence.len().max(1) as f64
    }

    /// The estimate as a response with continuously unwrapped phase.
    pub fn response(&self) -> Result<FrequencyResponse, SysIdError> {
        Ok(FrequencyResponse::new(self.freqs.clone(), self.h.clone())?)
    }
}

/// Exact response of `tf` on `freqs` with unit coherence.
pub fn synthesize_frf(tf: &ContinuousTF, freqs: &[f64]) -> Result<FrfEstimate, SysIdError> {
    let h = freqs.iter().map(|f| tf.eval(*f)).collect::<Result<Vec<_>, _>>()?;
    FrfEstimate::new(freqs.to_vec(), h, alloc::vec![1.0; freqs.len()], 0.6)
}

/// Least-squares line removal, then a periodic Hann window and a single-bin
/// DFT at `cycles_per_sample` (cycles per sample).
fn windowed_bin(x: &[f64], cycles_per_sample: f64) -> Complex64 {
    let n = x.len();
    let nf = n as f64;
    let mean_k = (nf - 1.0) / 2.0;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (k, v) in x.iter().enumerate() {
        let dk = k as f64 - mean_k;
        sxy += dk * (v - mean_x);
        sxx += dk * dk;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };

    let step = Complex64::from_polar(1.0, -2.0 * PI * cycles_per_sample);
    let wstep = Complex64::from_polar(1.0, 2.0 * PI / nf);
    let mut rot = Complex64::new(1.0, 0.0);
    let mut wrot = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, v) in x.iter().enumerate() {
        let r = v - mean_x - slope * (k as f64 - mean_k);
        let w = 0.5 - 0.5 * wrot.re;
        acc += rot * (w * r);
        rot *= step;
        wrot *= wstep;
        if k % 1024 == 1023 {
            rot /= rot.norm();
            wrot /= wrot.norm();
        }
    }
    acc
}

/// Cross/auto-spectral estimate `H = S_uy / S_uu` with a window of
/// `cycles_per_window` periods of each output frequency (capped at a
/// fraction of the record), Hann windows and overlapping segments.
/// Coherence is `|S_uy|² / (S_uu S_yy)`; bins below the threshold are kept
/// and flagged through [`FrfEstimate::is_trusted`].
pub fn estimate_frf(u: &TimeSeries, y: &TimeSeries, cfg: &FrfConfig) -> Result<FrfEstimate, SysIdError> {
    cfg.validate()?;
    if u.len() != y.len() || (u.sample_hz - y.sample_hz).abs() > 1e-9 * u.sample_hz {
        return Err(SysIdError::MismatchedRecords);
    }
    let fs = u.sample_hz;
    if cfg.f_hi >= fs / 2.0 {
        return Err(SysIdError::InvalidParameter("f_hi must be below the Nyquist frequency"));
    }
    let len = u.len();
    let needed = (4.0 * fs / cfg.f_lo).ceil() as usize;
    if len < needed {
        return Err(SysIdError::RecordTooShort { needed, got: len });
    }
    let max_window = ((len as f64) * cfg.max_window_fraction).floor() as usize;

    let freqs = logspace(cfg.f_lo, cfg.f_hi, cfg.n_freqs);
    let mut h = Vec::with_capacity(freqs.len());
    let mut coh = Vec::with_capacity(freqs.len());
    let mut power = Vec::with_capacity(freqs.len());
    for &f in &freqs {
        let n = ((cfg.cycles_per_window * fs / f).round() as usize).min(max_window).max(8);
        // Segment starts spread evenly so the last window ends at the record
        // end, with at most the configured hop between starts.
        let max_hop = ((1.0 - cfg.overlap) * n as f64).max(1.0);
        let count = ((len - n) as f64 / max_hop).ceil() as usize + 1;
        let step = if count > 1 { (len - n) as f64 / (count - 1) as f64 } else { 0.0 };
        let cps = f / fs;
        let mut suu = 0.0;
        let mut syy = 0.0;
        let mut suy = Complex64::new(0.0, 0.0);
        let mut segments = 0usize;
        for k in 0..count {
            let start = (k as f64 * step).round() as usize;
            let uk = windowed_bin(&u.values[start..start + n], cps);
            let yk = windowed_bin(&y.values[start..start + n], cps);
            suu += uk.norm_sqr();
            syy += yk.norm_sqr();
            suy += uk.conj() * yk;
            segments += 1;
        }
        if suu > 0.0 {
            h.push(suy / suu);
        } else {
            h.push(Complex64::new(0.0, 0.0));
        }
        let c = if suu > 0.0 && syy > 0.0 {
            (suy.norm_sqr() / (suu * syy)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        coh.push(c);
        power.push(suu / segments.max(1) as f64);
    }
    let mut est = FrfEstimate::new(freqs, h, coh, cfg.coherence_threshold)?;
    est.input_power = power;
    Ok(est)
}
