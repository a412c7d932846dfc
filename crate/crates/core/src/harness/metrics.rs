#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Subtracts the least-squares line through `x` (indexed by sample).
pub fn detrend(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return x.iter().map(|_| 0.0).collect();
    }
    let nf = n as f64;
    let mi = (nf - 1.0) / 2.0;
    let mx = x.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let d = i as f64 - mi;
        sxy += d * (v - mx);
        sxx += d * d;
    }
    let b = sxy / sxx;
    x.iter().enumerate().map(|(i, v)| v - mx - b * (i as f64 - mi)).collect()
}

/// RMS of the detrended signal over consecutive blocks of `block` samples,
/// as `(index of block centre, rms)`.
pub fn block_rms(x: &[f64], block: usize) -> Vec<(usize, f64)> {
    if block == 0 {
        return Vec::new();
    }
    x.chunks_exact(block)
        .enumerate()
        .map(|(i, c)| {
            let d = detrend(c);
            let rms = (d.iter().map(|v| v * v).sum::<f64>() / block as f64).sqrt();
            (i * block + block / 2, rms)
        })
        .collect()
}

/// Least-squares slope of `ln(rms)` against time: the exponential growth
/// rate of the envelope, 1/s.
pub fn envelope_growth(x: &[f64], fs: f64, block_s: f64) -> f64 {
    let block = (block_s * fs).round() as usize;
    let pts: Vec<(f64, f64)> = block_rms(x, block)
        .into_iter()
        .filter(|(_, r)| *r > 0.0)
        .map(|(i, r)| (i as f64 / fs, r.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    sxy / sxx
}

/// Envelope growth rate of every `window_s` window (advanced by `hop_s`)
/// that fits inside `x`, as `(window start offset s, growth 1/s)`.
pub fn sliding_growth(x: &[f64], fs: f64, window_s: f64, hop_s: f64, block_s: f64) -> Vec<(f64, f64)> {
    let w = (window_s * fs).round() as usize;
    let h = ((hop_s * fs).round() as usize).max(1);
    let mut out = Vec::new();
    let mut start = 0;
    while w > 0 && start + w <= x.len() {
        out.push((start as f64 / fs, envelope_growth(&x[start..start + w], fs, block_s)));
        start += h;
    }
    out
}

/// Frequency of the largest Hann-windowed periodogram value in
/// `[lo_hz, hi_hz]`, scanned on a `step_hz` grid.
pub fn dominant_frequency(x: &[f64], fs: f64, lo_hz: f64, hi_hz: f64, step_hz: f64) -> f64 {
    let d = detrend(x);
    let n = d.len();
    let w: Vec<f64> = (0..n)
        .map(|i| d[i] * (0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()))
        .collect();
    let mut best = (lo_hz, -1.0);
    let mut f = lo_hz;
    while f <= hi_hz + 1e-12 {
        let (mut re, mut im) = (0.0, 0.0);
        let dth = 2.0 * PI * f / fs;
        let (s, c) = dth.sin_cos();
        let (mut cr, mut ci) = (1.0, 0.0);
        for v in &w {
            re += v * cr;
            im -= v * ci;
            let nr = cr * c - ci * s;
            ci = cr * s + ci * c;
            cr = nr;
        }
        let p = re * re + im * im;
        if p > best.1 {
            best = (f, p);
        }
        f += step_hz;
    }
    best.0
}

/// Seconds after `x[0]` until the block RMS falls to `fraction` of
/// `reference` and stays there; `None` if it never settles.
pub fn settle_time(x: &[f64], fs: f64, block_s: f64, reference: f64, fraction: f64) -> Option<f64> {
    let block = (block_s * fs).round() as usize;
    let env = block_rms(x, block);
    let limit = fraction * reference;
    let mut settled_from = None;
    for (k, (_, r)) in env.iter().enumerate() {
        if *r <= limit {
            settled_from.get_or_insert(k);
        } else {
            settled_from = None;
        }
    }
    settled_from.map(|k| ((k + 1) * block) as f64 / fs)
}

/// Overshoot of one command step, percent of the step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOvershoot {
    pub t: f64,
    pub from: f64,
    pub to: f64,
    pub overshoot_pct: f64,
}

/// Finds the steps of a piecewise-constant command and measures how far the
/// response passes each new level before the next step.
pub fn step_overshoots(t: &[f64], cmd: &[f64], meas: &[f64]) -> Vec<StepOvershoot> {
    let mut edges: Vec<usize> = (1..cmd.len()).filter(|&k| (cmd[k] - cmd[k - 1]).abs() > 1e-9).collect();
    edges.push(cmd.len());
    let mut out = Vec::new();
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (from, to) = (cmd[a - 1], cmd[a]);
        let size = to - from;
        let dir = size.signum();
        let peak = meas[a..b].iter().map(|m| (m - to) * dir).fold(f64::NEG_INFINITY, f64::max);
        out.push(StepOvershoot {
            t: t[a],
            from,
            to,
            overshoot_pct: (100.0 * peak / size.abs()).max(0.0),
        });
    }
    out
}

/// `y ≈ a + b·exp(−(t − t0)/τ)` fitted by least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderFit {
    pub tau: f64,
    pub initial: f64,
    pub final_value: f64,
    pub r2: f64,
}

fn fit_for_tau(t: &[f64], y: &[f64], t0: f64, tau: f64) -> (f64, f64, f64) {
    // Linear least squares for a, b at fixed tau; returns (sse, a, b).
    let n = t.len() as f64;
    let e: Vec<f64> = t.iter().map(|ti| (-(ti - t0) / tau).exp()).collect();
    let se = e.iter().sum::<f64>();
    let see = e.iter().map(|v| v * v).sum::<f64>();
    let sy = y.iter().sum::<f64>();
    let sey = e.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let det = n * see - se * se;
    if det.abs() < 1e-300 {
        return (f64::INFINITY, 0.0, 0.0);
    }
    let a = (see * sy - se * sey) / det;
    let b = (n * sey - se * sy) / det;
    let sse = e.iter().zip(y).map(|(ei, yi)| (yi - a - b * ei).powi(2)).sum();
    (sse, a, b)
}

/// Fits a first-order response starting at `t0`. The time constant is found
/// by a log-spaced scan from 1 ms to 100 s refined by golden-section search.
pub fn first_order_fit(t: &[f64], y: &[f64], t0: f64) -> Option<FirstOrderFit> {
    if t.len() < 4 || t.len() != y.len() {
        return None;
    }
    let cost = |lt: f64| fit_for_tau(t, y, t0, lt.exp()).0;
    let (lo, hi) = (1e-3f64.ln(), 100f64.ln());
    let n = 400;
    let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let k = (0..=n).min_by(|&a, &b| cost(grid[a]).total_cmp(&cost(grid[b])))?;
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(n)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if cost(c) < cost(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let tau = (0.5 * (a + b)).exp();
    let (sse, fa, fb) = fit_for_tau(t, y, t0, tau);
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    Some(FirstOrderFit {
        tau,
        initial: fa + fb,
        final_value: fa,
        r2: if sst > 0.0 { 1.0 - sse / sst } else { 1.0 },
    })
}
