#[allow(unused_imports)]
use num_traits::Float;
use alloc::boxed::Box;
use alloc::string::String;
use core::fmt::Write;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use super::frf::FrfEstimate;
use super::simplex::{nelder_mead, SimplexOptions};
use crate::error::SysIdError;
use crate::lti::{PlantFitParams, ResonancePair};

/// Settings of the two-stage fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FitConfig {
    pub band_hz: (f64, f64),
    /// Weight of squared phase error (deg²) against squared magnitude error (dB²).
    pub phase_weight: f64,
    pub restarts: usize,
    /// Standard deviation of the log-parameter perturbation of restarts 1.. .
    pub restart_spread: f64,
    pub seed: u64,
    pub max_evals: usize,
    /// Best cost above this after all restarts is reported as non-convergence.
    pub converge_cost: f64,
    /// Fit the low-pass coefficients too instead of holding them fixed.
    pub fit_lowpass: bool,
    /// `s` and `s²` coefficients of the low-pass, used when it is held fixed
    /// and as the starting point otherwise.
    pub lowpass_den: [f64; 2],
    pub min_trusted_fraction: f64,
    pub max_delay: f64,
    /// Peak search range for the initial estimate.
    pub resonance_search_hz: (f64, f64),
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            band_hz: (1.0, 60.0),
            phase_weight: 0.1,
            restarts: 5,
            restart_spread: 0.15,
            seed: 0,
            max_evals: 6000,
            converge_cost: 4.0,
            fit_lowpass: false,
            lowpass_den: PlantFitParams::default().lf_den,
            min_trusted_fraction: 0.5,
            max_delay: 0.1,
            resonance_search_hz: (4.0, 45.0),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), SysIdError> {
        let (lo, hi) = self.band_hz;
        if !(lo > 0.0 && hi > lo) {
            return Err(SysIdError::InvalidParameter("fit band must satisfy 0 < lo < hi"));
        }
        if !(self.phase_weight >= 0.0) {
            return Err(SysIdError::InvalidParameter("phase weight must be >= 0"));
        }
        if self.restarts == 0 {
            return Err(SysIdError::InvalidParameter("need at least one restart"));
        }
        if !(self.lowpass_den[0] > 0.0 && self.lowpass_den[1] > 0.0) {
            return Err(SysIdError::InvalidParameter("low-pass coefficients must be > 0"));
        }
        if !(self.max_delay > 0.0 && self.max_delay <= 0.1) {
            return Err(SysIdError::InvalidParameter("max delay must be in (0, 0.1] s"));
        }
        Ok(())
    }
}

/// Worst-case fit error inside one frequency band.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandError {
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub bins: usize,
    pub max_db: f64,
    pub max_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: PlantFitParams,
    /// Coherence-weighted mean of `dB² + w·deg²` over trusted bins.
    pub cost: f64,
    /// Stage-1 estimate the optimizer started from.
    pub initial: PlantFitParams,
    pub initial_cost: f64,
    pub restart_costs: Vec<f64>,
    pub band_errors: Vec<BandError>,
}

impl FitResult {
    /// Structured text: every fitted parameter, the residual and the
    /// per-band error table against the measured response.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut o = String::new();
        let _ = writeln!(o, "fitted plant:");
        let _ = writeln!(o, "  lf_den = [{}, {}]", p.lf_den[0], p.lf_den[1]);
        let _ = writeln!(o, "  dy_num = [{}, {}, {}]", p.dy_num[0], p.dy_num[1], p.dy_num[2]);
        let _ = writeln!(o, "  dy_tau = {}", p.dy_tau);
        for (name, r) in [("peak", &p.peak), ("offpeak", &p.offpeak)] {
            let _ = writeln!(
                o,
                "  {name}: freq_hz = {}, num_damping = {}, den_damping = {}",
                r.freq_hz, r.num_damping, r.den_damping
            );
        }
        let _ = writeln!(o, "  delay = {}", p.delay);
        let _ = writeln!(o, "residual:");
        let _ = writeln!(o, "  cost = {}", self.cost);
        let _ = writeln!(o, "  initial_cost = {}", self.initial_cost);
        let _ = writeln!(o, "  restart_costs = {:?}", self.restart_costs);
        let _ = writeln!(o, "band errors (trusted bins):");
        let _ = writeln!(o, "  {:>8} {:>8} {:>5} {:>9} {:>9}", "lo_hz", "hi_hz", "bins", "max_db", "max_deg");
        for b in &self.band_errors {
            let _ = writeln!(
                o,
                "  {:>8.2} {:>8.2} {:>5} {:>9.3} {:>9.3}",
                b.lo_hz, b.hi_hz, b.bins, b.max_db, b.max_deg
            );
        }
        o
    }
}

fn resonance(s: Complex64, w: f64, zn: f64, zd: f64) -> Complex64 {
    let x = s / w;
    let x2 = x * x;
    (x2 + x * (2.0 * zn) + 1.0) / (x2 + x * (2.0 * zd) + 1.0)
}

/// Model response at `s = jω` without building a transfer function.
pub(crate) fn model_response(p: &PlantFitParams, s: Complex64) -> Complex64 {
    let lf = Complex64::new(1.0, 0.0) / (s * p.lf_den[0] + s * s * p.lf_den[1] + 1.0);
    let dy = (s * p.dy_num[1] + s * s * p.dy_num[2] + p.dy_num[0]) / ((s * p.dy_tau + 1.0) * s);
    let pk = resonance(s, p.peak.omega(), p.peak.num_damping, p.peak.den_damping);
    let op = resonance(s, p.offpeak.omega(), p.offpeak.num_damping, p.offpeak.den_damping);
    lf * dy * pk * op * (-s * p.delay).exp()
}

#[derive(Clone, Copy)]
struct Bin {
    s: Complex64,
    h: Complex64,
    w: f64,
    f: f64,
}

fn bins(frf: &FrfEstimate, band: (f64, f64)) -> Vec<Bin> {
    (0..frf.len())
        .filter(|&i| frf.is_trusted(i) && frf.freqs[i] >= band.0 - 1e-9 && frf.freqs[i] <= band.1 + 1e-9)
        .map(|i| Bin {
            s: Complex64::new(0.0, 2.0 * PI * frf.freqs[i]),
            h: frf.h[i],
            w: frf.coherence[i],
            f: frf.freqs[i],
        })
        .collect()
}

fn ratio_errors(h: Complex64, m: Complex64) -> (f64, f64) {
    let r = h / m;
    (20.0 * r.norm().log10(), r.arg().to_degrees())
}

fn cost_on(bins: &[Bin], p: &PlantFitParams, phase_weight: f64) -> f64 {
    let mut acc = 0.0;
    let mut wsum = 0.0;
    for b in bins {
        let (db, deg) = ratio_errors(b.h, model_response(p, b.s));
        acc += b.w * (db * db + phase_weight * deg * deg);
        wsum += b.w;
    }
    if wsum > 0.0 {
        acc / wsum
    } else {
        f64::INFINITY
    }
}

/// Coherence-weighted mean of squared magnitude error (dB) plus
/// `phase_weight` times squared phase error (deg) over trusted bins in
/// `band_hz`.
pub fn fit_cost(frf: &FrfEstimate, params: &PlantFitParams, band_hz: (f64, f64), phase_weight: f64) -> f64 {
    cost_on(&bins(frf, band_hz), params, phase_weight)
}

/// Worst magnitude and phase error of `params` against the trusted bins of
/// `frf` inside each band given by consecutive `edges`.
pub fn band_errors(frf: &FrfEstimate, params: &PlantFitParams, edges: &[f64]) -> Vec<BandError> {
    edges
        .windows(2)
        .map(|e| {
            let bs = bins(frf, (e[0], e[1]));
            let mut out = BandError {
                lo_hz: e[0],
                hi_hz: e[1],
                bins: bs.len(),
                max_db: 0.0,
                max_deg: 0.0,
            };
            for b in &bs {
                let (db, deg) = ratio_errors(b.h, model_response(params, b.s));
                out.max_db = out.max_db.max(db.abs());
                out.max_deg = out.max_deg.max(deg.abs());
            }
            out
        })
        .collect()
}

const DEFAULT_BAND_EDGES: [f64; 6] = [1.0, 3.0, 10.0, 20.0, 40.0, 60.0];

/// Weighted least-squares fit of `c0 + c1 x + c2 x²`.
fn quadratic_trend(x: &[f64], y: &[f64], w: &[f64]) -> [f64; 3] {
    let mut a = nalgebra::Matrix3::<f64>::zeros();
    let mut b = nalgebra::Vector3::<f64>::zeros();
    for ((xi, yi), wi) in x.iter().zip(y).zip(w) {
        let phi = nalgebra::Vector3::new(1.0, *xi, xi * xi);
        a += phi * phi.transpose() * *wi;
        b += phi * (*wi * yi);
    }
    match a.try_inverse() {
        Some(inv) => {
            let c = inv * b;
            [c[0], c[1], c[2]]
        }
        None => [y.iter().sum::<f64>() / y.len().max(1) as f64, 0.0, 0.0],
    }
}

fn lowpass(s: Complex64, den: &[f64; 2]) -> Complex64 {
    Complex64::new(1.0, 0.0) / (s * den[0] + s * s * den[1] + 1.0)
}

/// Stage 1: resonances from the detrended magnitude of `H·s`, then for each
/// delay on a grid a linear (Levy) fit of the rigid-body numerator and
/// pole; the delay with the lowest full cost wins.
fn initial_estimate(bins: &[Bin], cfg: &FitConfig) -> PlantFitParams {
    let g: Vec<Complex64> = bins.iter().map(|b| b.h * b.s / lowpass(b.s, &cfg.lowpass_den)).collect();
    let x: Vec<f64> = bins.iter().map(|b| b.f.ln()).collect();
    let mag: Vec<f64> = g.iter().map(|v| 20.0 * v.norm().max(1e-300).log10()).collect();
    let w: Vec<f64> = bins.iter().map(|b| b.w).collect();
    let c = quadratic_trend(&x, &mag, &w);
    let resid: Vec<f64> = x.iter().zip(&mag).map(|(xi, m)| m - (c[0] + c[1] * xi + c[2] * xi * xi)).collect();

    let (slo, shi) = cfg.resonance_search_hz;
    let in_search = |i: usize| bins[i].f >= slo && bins[i].f <= shi;
    let pk_i = (0..bins.len())
        .filter(|&i| in_search(i))
        .max_by(|&a, &b| resid[a].total_cmp(&resid[b]));
    let (pk_f, pk_h) = pk_i.map_or((14.0, 0.0), |i| (bins[i].f, resid[i]));
    let off_i = (0..bins.len())
        .filter(|&i| in_search(i) && bins[i].f > pk_f * 1.05)
        .min_by(|&a, &b| resid[a].total_cmp(&resid[b]));
    let (off_f, off_d) = off_i.map_or((pk_f * 2.0, 0.0), |i| (bins[i].f, -resid[i]));

    let zd_pk = 0.03;
    let zn_pk = zd_pk * libm::pow(10.0, pk_h.clamp(0.0, 30.0) / 20.0);
    let zn_off = 0.03;
    let zd_off = zn_off * libm::pow(10.0, off_d.clamp(0.0, 30.0) / 20.0);
    let peak = ResonancePair {
        freq_hz: pk_f,
        num_damping: zn_pk,
        den_damping: zd_pk,
    };
    let offpeak = ResonancePair {
        freq_hz: off_f,
        num_damping: zn_off,
        den_damping: zd_off,
    };

    let plateau = {
        let lo: Vec<f64> = bins
            .iter()
            .zip(&g)
            .filter(|(b, _)| b.f <= bins[0].f * 2.0)
            .map(|(_, v)| v.norm())
            .collect();
        lo.iter().sum::<f64>() / lo.len().max(1) as f64
    };

    let mut best: Option<(f64, PlantFitParams)> = None;
    let steps = (cfg.max_delay.min(0.08) / 0.0005).round() as usize;
    for k in 0..=steps {
        let d = k as f64 * 0.0005;
        let mut a = Matrix4::<f64>::zeros();
        let mut rhs = Vector4::<f64>::zeros();
        for (b, gi) in bins.iter().zip(&g) {
            let wn = b.s.im;
            let z = gi / (resonance(b.s, peak.omega(), zn_pk, zd_pk) * resonance(b.s, offpeak.omega(), zn_off, zd_off))
                * Complex64::new(0.0, wn * d).exp();
            let scale = b.w / z.norm().max(1e-12);
            // z = b0 + b1 s + b2 s² − τ s z, split into real and imaginary rows.
            let sz = b.s * z;
            let rows = [
                (Vector4::new(1.0, 0.0, -wn * wn, -sz.re), z.re),
                (Vector4::new(0.0, wn, 0.0, -sz.im), z.im),
            ];
            for (phi, y) in rows {
                a += phi * phi.transpose() * (scale * scale);
                rhs += phi * (scale * scale * y);
            }
        }
        let Some(inv) = a.try_inverse() else { continue };
        let sol = inv * rhs;
        let b0 = if sol[0] > 0.0 { sol[0] } else { plateau.max(1e-6) };
        let p = PlantFitParams {
            lf_den: cfg.lowpass_den,
            dy_num: [b0, sol[1].max(b0 * 1e-6), sol[2].max(b0 * 1e-9)],
            dy_tau: sol[3].max(1e-5),
            peak,
            offpeak,
            delay: d,
        };
        let cst = cost_on(bins, &p, cfg.phase_weight);
        if best.as_ref().is_none_or(|(c0, _)| cst < *c0) {
            best = Some((cst, p));
        }
    }
    best.map(|(_, p)| p).unwrap_or(PlantFitParams {
        lf_den: cfg.lowpass_den,
        dy_num: [plateau.max(1e-6), plateau.max(1e-6) * 0.01, plateau.max(1e-6) * 1e-4],
        dy_tau: 0.05,
        peak,
        offpeak,
        delay: 0.0,
    })
}

const DELAY_SCALE: f64 = 0.01;

fn encode(p: &PlantFitParams, fit_lowpass: bool) -> Vec<f64> {
    let mut v = vec![
        p.dy_num[0].ln(),
        p.dy_num[1].ln(),
        p.dy_num[2].ln(),
        p.dy_tau.ln(),
        p.peak.freq_hz.ln(),
        p.peak.num_damping.ln(),
        p.peak.den_damping.ln(),
        p.offpeak.freq_hz.ln(),
        p.offpeak.num_damping.ln(),
        p.offpeak.den_damping.ln(),
        p.delay / DELAY_SCALE,
    ];
    if fit_lowpass {
        v.push(p.lf_den[0].ln());
        v.push(p.lf_den[1].ln());
    }
    v
}

fn decode(v: &[f64], lowpass_den: [f64; 2]) -> PlantFitParams {
    let e = libm::exp;
    PlantFitParams {
        lf_den: if v.len() > 11 { [e(v[11]), e(v[12])] } else { lowpass_den },
        dy_num: [e(v[0]), e(v[1]), e(v[2])],
        dy_tau: e(v[3]),
        peak: ResonancePair {
            freq_hz: e(v[4]),
            num_damping: e(v[5]),
            den_damping: e(v[6]),
        },
        offpeak: ResonancePair {
            freq_hz: e(v[7]),
            num_damping: e(v[8]),
            den_damping: e(v[9]),
        },
        delay: v[10] * DELAY_SCALE,
    }
}

/// Two-stage fit of the low-pass · rigid-body · resonance · anti-resonance
/// · delay structure to an FRF. Stage 1 builds an initial estimate from the
/// data; stage 2 minimizes the coherence-weighted log-magnitude and phase
/// error with a simplex search from that estimate and from seeded
/// perturbations of it, keeping the lowest cost (ties to the earliest).
pub fn fit_plant_model(frf: &FrfEstimate, cfg: &FitConfig) -> Result<FitResult, SysIdError> {
    cfg.validate()?;
    let in_band = (0..frf.len())
        .filter(|&i| frf.freqs[i] >= cfg.band_hz.0 - 1e-9 && frf.freqs[i] <= cfg.band_hz.1 + 1e-9)
        .count();
    let bs = bins(frf, cfg.band_hz);
    if in_band == 0 || (bs.len() as f64) < cfg.min_trusted_fraction * in_band as f64 || bs.len() < 8 {
        return Err(SysIdError::InvalidParameter("too few trusted bins in the fit band"));
    }

    let initial = initial_estimate(&bs, cfg);
    let initial_cost = cost_on(&bs, &initial, cfg.phase_weight);
    let max_delay = cfg.max_delay;
    let lowpass_den = cfg.lowpass_den;
    let cost_of = |bins: &[Bin], v: &[f64]| {
        let d = v[10] * DELAY_SCALE;
        if !(0.0..=max_delay).contains(&d) {
            return f64::INFINITY;
        }
        cost_on(bins, &decode(v, lowpass_den), cfg.phase_weight)
    };
    let objective = |v: &[f64]| cost_of(&bs, v);
    let opts = SimplexOptions {
        max_evals: cfg.max_evals,
        initial_step: 0.1,
        f_tol: 1e-9,
        x_tol: 1e-7,
    };

    // Coordinate-block refinement: rigid-body terms and delay away from the
    // resonances first, then the resonance pairs, before the joint search.
    let near = |f: f64, c: f64| f > 0.75 * c && f < 1.33 * c;
    let rigid_bins: Vec<Bin> = bs
        .iter()
        .filter(|b| !near(b.f, initial.peak.freq_hz) && !near(b.f, initial.offpeak.freq_hz))
        .copied()
        .collect();
    let mut x0 = encode(&initial, cfg.fit_lowpass);
    let blocks: [(&[usize], &[Bin]); 2] = [
        (&[0, 1, 2, 3, 10], if rigid_bins.len() >= 8 { &rigid_bins } else { &bs }),
        (&[4, 5, 6, 7, 8, 9], &bs),
    ];
    for (coords, data) in blocks {
        let base = x0.clone();
        let sub: Vec<f64> = coords.iter().map(|&i| base[i]).collect();
        let r = nelder_mead(
            |v: &[f64]| {
                let mut full = base.clone();
                for (k, &i) in coords.iter().enumerate() {
                    full[i] = v[k];
                }
                cost_of(data, &full)
            },
            &sub,
            &opts,
        );
        for (k, &i) in coords.iter().enumerate() {
            x0[i] = r.x[k];
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut restart_costs = Vec::with_capacity(cfg.restarts);
    for r in 0..cfg.restarts {
        let start: Vec<f64> = if r == 0 {
            x0.clone()
        } else {
            x0.iter()
                .enumerate()
                .map(|(i, v)| {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    let v = v + cfg.restart_spread * n * if i == 10 { 0.5 } else { 1.0 };
                    if i == 10 {
                        v.clamp(0.0, max_delay / DELAY_SCALE)
                    } else {
                        v
                    }
                })
                .collect()
        };
        let first = nelder_mead(objective, &start, &opts);
        // A fresh simplex around the first result escapes collapsed simplices.
        let second = nelder_mead(objective, &first.x, &opts);
        let run = if second.cost <= first.cost { second } else { first };
        restart_costs.push(run.cost);
        if best.as_ref().is_none_or(|(c, _)| run.cost < *c) {
            best = Some((run.cost, run.x));
        }
    }
    let (cost, x) = best.expect("at least one restart");
    if !(cost <= cfg.converge_cost) {
        return Err(SysIdError::NotConverged {
            cost,
            initial: Box::new(initial),
        });
    }
    let params = decode(&x, cfg.lowpass_den);
    let band_errors = band_errors(frf, &params, &DEFAULT_BAND_EDGES);
    Ok(FitResult {
        params,
        cost,
        initial,
        initial_cost,
        restart_costs,
        band_errors,
    })
}
