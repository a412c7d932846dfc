#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::poly;
use super::tf::ContinuousTF;
use crate::error::LtiError;

/// Second-order digital section with `a0 = 1`, run in transposed direct
/// form II.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
    s1: f64,
    s2: f64,
}

impl Biquad {
    pub fn new(b0: f64, b1: f64, b2: f64, a1: f64, a2: f64) -> Self {
        Self {
            b0,
            b1,
            b2,
            a1,
            a2,
            s1: 0.0,
            s2: 0.0,
        }
    }

    pub fn coefficients(&self) -> [f64; 5] {
        [self.b0, self.b1, self.b2, self.a1, self.a2]
    }

    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.s1;
        self.s1 = self.b1 * x - self.a1 * y + self.s2;
        self.s2 = self.b2 * x - self.a2 * y;
        y
    }

    pub fn reset(&mut self) {
        self.s1 = 0.0;
        self.s2 = 0.0;
    }

    pub fn dc_gain(&self) -> Option<f64> {
        let den = 1.0 + self.a1 + self.a2;
        if den.abs() < 1e-15 {
            None
        } else {
            Some((self.b0 + self.b1 + self.b2) / den)
        }
    }

    /// Loads the state reached after a long constant input `x`. Sections
    /// without a finite DC gain are left at rest.
    pub fn prime(&mut self, x: f64) -> f64 {
        match self.dc_gain() {
            Some(g) => {
                let y = g * x;
                self.s2 = self.b2 * x - self.a2 * y;
                self.s1 = self.b1 * x - self.a1 * y + self.s2;
                y
            }
            None => {
                self.reset();
                0.0
            }
        }
    }

    /// Response at `z = e^(jθ)`.
    pub fn response(&self, theta: f64) -> Complex64 {
        let z1 = Complex64::new(0.0, -theta).exp();
        let z2 = z1 * z1;
        (self.b0 + z1 * self.b1 + z2 * self.b2) / (1.0 + z1 * self.a1 + z2 * self.a2)
    }

    /// Poles in the z-plane.
    pub fn poles(&self) -> Vec<Complex64> {
        // z² + a1 z + a2
        poly::roots(&[self.a2, self.a1, 1.0])
    }

    /// Magnitudes of the section's poles.
    pub fn pole_radii(&self) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (o, z) in out.iter_mut().zip(self.poles().iter()) {
            *o = z.norm();
        }
        out
    }
}

/// Series chain of biquads at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct BiquadCascade {
    sections: Vec<Biquad>,
    sample_hz: f64,
}

impl BiquadCascade {
    pub fn new(sections: Vec<Biquad>, sample_hz: f64) -> Self {
        Self {
            sections,
            sample_hz,
        }
    }

    pub fn passthrough(sample_hz: f64) -> Self {
        Self::new(Vec::new(), sample_hz)
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn sample_hz(&self) -> f64 {
        self.sample_hz
    }

    pub fn process(&mut self, x: f64) -> f64 {
        self.sections.iter_mut().fold(x, |acc, s| s.process(acc))
    }

    pub fn reset(&mut self) {
        self.sections.iter_mut().for_each(Biquad::reset);
    }

    pub fn prime(&mut self, x: f64) -> f64 {
        self.sections.iter_mut().fold(x, |acc, s| s.prime(acc))
    }

    pub fn response(&self, freq_hz: f64) -> Complex64 {
        let theta = 2.0 * PI * freq_hz / self.sample_hz;
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(theta))
    }

    pub fn dc_gain(&self) -> Option<f64> {
        self.sections
            .iter()
            .try_fold(1.0, |acc, s| s.dc_gain().map(|g| acc * g))
    }
}

/// Integer-sample delay line.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLine {
    buf: VecDeque<f64>,
    len: usize,
}

impl DelayLine {
    pub fn new(samples: usize) -> Self {
        Self {
            buf: core::iter::repeat_n(0.0, samples).collect(),
            len: samples,
        }
    }

    pub fn samples(&self) -> usize {
        self.len
    }

    pub fn process(&mut self, x: f64) -> f64 {
        if self.len == 0 {
            return x;
        }
        self.buf.push_back(x);
        self.buf.pop_front().unwrap_or(0.0)
    }

    pub fn fill(&mut self, x: f64) {
        self.buf.iter_mut().for_each(|v| *v = x);
    }
}

/// Runnable form of a continuous transfer function: biquads followed by an
/// integer delay line. The fraction of the delay that does not fit a whole
/// sample is dropped and reported in `delay_remainder`.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalFilter {
    pub cascade: BiquadCascade,
    pub delay: DelayLine,
    pub delay_remainder: f64,
}

impl DigitalFilter {
    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.cascade.process(x);
        self.delay.process(y)
    }

    pub fn reset(&mut self) {
        self.cascade.reset();
        self.delay.fill(0.0);
    }

    pub fn prime(&mut self, x: f64) -> f64 {
        let y = self.cascade.prime(x);
        self.delay.fill(y);
        y
    }

    pub fn response(&self, freq_hz: f64) -> Complex64 {
        let n = self.delay.samples() as f64;
        let theta = 2.0 * PI * freq_hz / self.cascade.sample_hz();
        self.cascade.response(freq_hz) * Complex64::new(0.0, -theta * n).exp()
    }

    pub fn sample_hz(&self) -> f64 {
        self.cascade.sample_hz()
    }
}

/// A real first- or second-order factor normalized to unit value at `s = 0`
/// (or a plain `s` for a root at the origin).
#[derive(Debug, Clone)]
struct Factor {
    coeffs: Vec<f64>,
    wn: f64,
    damping: f64,
}

impl Factor {
    fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

fn factors_of(roots: &[Complex64]) -> Vec<Factor> {
    let mut reals: Vec<f64> = roots.iter().filter(|r| r.im == 0.0).map(|r| r.re).collect();
    reals.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(core::cmp::Ordering::Equal));
    let mut out = Vec::new();
    for r in roots.iter().filter(|r| r.im > 0.0) {
        let m2 = r.norm_sqr();
        let wn = m2.sqrt();
        out.push(Factor {
            coeffs: vec![1.0, -2.0 * r.re / m2, 1.0 / m2],
            wn,
            damping: -r.re / wn,
        });
    }
    // Real roots are grouped in pairs of neighbouring magnitude.
    let mut i = 0;
    while i < reals.len() {
        let f1 = real_factor(reals[i]);
        if i + 1 < reals.len() {
            let f2 = real_factor(reals[i + 1]);
            out.push(Factor {
                coeffs: poly::mul(&f1, &f2),
                wn: (reals[i].abs() * reals[i + 1].abs()).sqrt(),
                damping: 1.0,
            });
            i += 2;
        } else {
            out.push(Factor {
                coeffs: f1,
                wn: reals[i].abs(),
                damping: 1.0,
            });
            i += 1;
        }
    }
    out.sort_by(|a, b| {
        a.wn.partial_cmp(&b.wn)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.order().cmp(&b.order()))
    });
    out
}

fn real_factor(r: f64) -> Vec<f64> {
    if r == 0.0 {
        vec![0.0, 1.0]
    } else {
        vec![1.0, -1.0 / r]
    }
}

fn lowest_nonzero(p: &[f64]) -> f64 {
    p.iter().copied().find(|c| *c != 0.0).unwrap_or(0.0)
}

/// Bilinear transform of `tf` at `sample_hz`, factored into sections sorted
/// by pole natural frequency. With `prewarp_hz` the response is exact at
/// that frequency.
pub fn discretize_tustin(
    tf: &ContinuousTF,
    sample_hz: f64,
    prewarp_hz: Option<f64>,
) -> Result<DigitalFilter, LtiError> {
    discretize(tf, sample_hz, prewarp_hz, false)
}

/// Bilinear transform with each section prewarped at the natural frequency
/// of its least-damped pole or zero pair, so every resonance and
/// anti-resonance keeps its frequency. Sections without a lightly damped
/// pair (damping below 0.3) are not prewarped.
pub fn discretize_tustin_sections(tf: &ContinuousTF, sample_hz: f64) -> Result<DigitalFilter, LtiError> {
    discretize(tf, sample_hz, None, true)
}

const LIGHT_DAMPING: f64 = 0.3;

fn prewarp_constant(wn: f64, sample_hz: f64) -> f64 {
    wn / (wn / (2.0 * sample_hz)).tan()
}

fn discretize(
    tf: &ContinuousTF,
    sample_hz: f64,
    prewarp_hz: Option<f64>,
    per_section: bool,
) -> Result<DigitalFilter, LtiError> {
    if !(sample_hz > 0.0) || !sample_hz.is_finite() {
        return Err(LtiError::InvalidFrequency(sample_hz));
    }
    let nd = poly::degree(tf.num());
    let dd = poly::degree(tf.den());
    if nd > dd {
        return Err(LtiError::Improper {
            num_degree: nd,
            den_degree: dd,
        });
    }
    let c = match prewarp_hz {
        None => 2.0 * sample_hz,
        Some(fp) => {
            if !(fp > 0.0) || fp >= sample_hz / 2.0 {
                return Err(LtiError::InvalidFrequency(fp));
            }
            prewarp_constant(2.0 * PI * fp, sample_hz)
        }
    };

    let pole_factors = factors_of(&poly::roots(tf.den()));
    let mut zero_factors = factors_of(&poly::roots(tf.num()));
    let gain = lowest_nonzero(tf.num()) / lowest_nonzero(tf.den());

    // Sharpest zeros first, each to the closest pole section with room.
    zero_factors.sort_by(|a, b| {
        a.damping
            .partial_cmp(&b.damping)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut sections: Vec<(Vec<f64>, Vec<f64>)> = pole_factors
        .iter()
        .map(|p| (vec![1.0], p.coeffs.clone()))
        .collect();
    // Least-damped complex pair per section as (damping, wn).
    let mut sharpest: Vec<Option<(f64, f64)>> = pole_factors
        .iter()
        .map(|p| (p.damping < LIGHT_DAMPING).then_some((p.damping, p.wn)))
        .collect();
    let mut pending = Vec::new();
    for z in zero_factors {
        let mut best: Option<(usize, f64)> = None;
        for (i, (num, den)) in sections.iter().enumerate() {
            if num.len() - 1 + z.order() > den.len() - 1 {
                continue;
            }
            let pw = pole_factors[i].wn;
            let dist = if z.wn == 0.0 || pw == 0.0 {
                if z.wn == pw {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (z.wn / pw).ln().abs()
            };
            if best.is_none_or(|(_, d)| dist < d) {
                best = Some((i, dist));
            }
        }
        match best {
            Some((i, _)) => {
                sections[i].0 = poly::mul(&sections[i].0, &z.coeffs);
                if z.damping < LIGHT_DAMPING && sharpest[i].is_none_or(|(d, _)| z.damping < d) {
                    sharpest[i] = Some((z.damping, z.wn));
                }
            }
            None => pending.push(z),
        }
    }
    // A quadratic zero that found only first-order room: merge two
    // first-order pole sections to make space.
    for z in pending {
        let firsts: Vec<usize> = sections
            .iter()
            .enumerate()
            .filter(|(_, (n, d))| d.len() == 2 && n.len() == 1)
            .map(|(i, _)| i)
            .collect();
        if firsts.len() < 2 {
            return Err(LtiError::InvalidParameter("cannot pair zeros with pole sections"));
        }
        let (i, j) = (firsts[0], firsts[1]);
        let den = poly::mul(&sections[i].1, &sections[j].1);
        sections[i] = (z.coeffs, den);
        sharpest[i] = (z.damping < LIGHT_DAMPING).then_some((z.damping, z.wn));
        sections.remove(j);
        sharpest.remove(j);
    }

    let mut biquads = Vec::with_capacity(sections.len());
    for (k, (num, den)) in sections.iter().enumerate() {
        let g = if k == 0 { gain } else { 1.0 };
        let ck = match sharpest[k] {
            Some((_, wn)) if per_section && wn > 0.0 && wn < 0.9 * PI * sample_hz => prewarp_constant(wn, sample_hz),
            _ => c,
        };
        biquads.push(bilinear_section(&poly::scale(num, g), den, ck));
    }
    if biquads.is_empty() {
        biquads.push(Biquad::new(gain, 0.0, 0.0, 0.0, 0.0));
    }

    let exact = tf.delay() * sample_hz;
    let n = exact.round();
    Ok(DigitalFilter {
        cascade: BiquadCascade::new(biquads, sample_hz),
        delay: DelayLine::new(n as usize),
        delay_remainder: (exact - n) / sample_hz,
    })
}

fn bilinear_section(num: &[f64], den: &[f64], c: f64) -> Biquad {
    let at = |p: &[f64], i: usize| p.get(i).copied().unwrap_or(0.0);
    let map = |p: &[f64]| {
        let (p0, p1, p2) = (at(p, 0), at(p, 1) * c, at(p, 2) * c * c);
        [p0 + p1 + p2, 2.0 * p0 - 2.0 * p2, p0 - p1 + p2]
    };
    let (b, a) = if den.len() <= 2 && num.len() <= 2 {
        let bm = [at(num, 0) + at(num, 1) * c, at(num, 0) - at(num, 1) * c, 0.0];
        let am = [at(den, 0) + at(den, 1) * c, at(den, 0) - at(den, 1) * c, 0.0];
        (bm, am)
    } else {
        (map(num), map(den))
    };
    let a0 = a[0];
    Biquad::new(b[0] / a0, b[1] / a0, b[2] / a0, a[1] / a0, a[2] / a0)
}
