#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::metrics::*;
use super::scenario::{Check, Scenario};
use super::telemetry::Telemetry;

/// Sliding-window envelope detector settings.
pub const DIVERGENCE_WINDOW_S: f64 = 2.0;
pub const DIVERGENCE_HOP_S: f64 = 0.5;
pub const ENVELOPE_BLOCK_S: f64 = 0.25;
/// Envelope growth above this rate flags divergence, 1/s.
pub const DIVERGENCE_GROWTH: f64 = 0.1;
/// A window only counts as divergent once its envelope exceeds this RMS,
/// rad/s (8x the gyro noise floor at the controller rate); slope estimates
/// on a stationary noise floor scatter well past the growth threshold.
pub const DIVERGENCE_MIN_RMS: f64 = 0.02;
/// Envelope is converged once it falls to this fraction of its level at the
/// switch and stays there.
pub const CONVERGED_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Metrics, verdicts and artifacts of one run or pipeline execution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<CheckResult>,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.into(),
            ..Self::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult {
            name: name.into(),
            passed,
            detail,
        });
    }

    /// Plain-text rendering: metrics, then one PASS/FAIL line per check.
    pub fn to_text(&self) -> String {
        let mut s = format!("scenario: {}\n", self.scenario);
        s.push_str("metrics:\n");
        for (k, v) in &self.metrics {
            s.push_str(&format!("  {k} = {v}\n"));
        }
        s.push_str("checks:\n");
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("  {verdict} {}: {}\n", c.name, c.detail));
        }
        if !self.artifacts.is_empty() {
            s.push_str("artifacts:\n");
            for a in &self.artifacts {
                s.push_str(&format!("  {a}\n"));
            }
        }
        s.push_str(&format!("result: {}\n", if self.passed() { "PASS" } else { "FAIL" }));
        s
    }
}

fn slice_of(tel: &Telemetry, t0: f64, t1: f64, f: impl Fn(&super::TelemetryRow) -> f64) -> Vec<f64> {
    tel.rows[tel.window(t0, t1)].iter().map(f).collect()
}

/// Computes the metrics each check needs from the telemetry alone and
/// records a verdict per check.
pub fn evaluate(sc: &Scenario, tel: &Telemetry) -> RunReport {
    let mut rep = RunReport::new(&sc.name);
    let fs = tel.sample_hz().unwrap_or(sc.controller.rate.sample_hz);
    rep.set("duration_s", tel.rows.last().map_or(0.0, |r| r.t));
    for check in &sc.checks {
        match check {
            Check::DivergenceThenConvergence {
                t0,
                t1,
                freq_hz,
                tol_hz,
                enable_t,
                settle_s,
            } => {
                let before = slice_of(tel, *t0, *t1, |r| r.w_meas[1]);
                let growth = sliding_growth(&before, fs, DIVERGENCE_WINDOW_S, DIVERGENCE_HOP_S, ENVELOPE_BLOCK_S);
                let block = (ENVELOPE_BLOCK_S * fs).round() as usize;
                let win = (DIVERGENCE_WINDOW_S * fs).round() as usize;
                let significant: Vec<(f64, f64)> = growth
                    .iter()
                    .copied()
                    .filter(|(off, _)| {
                        let a = (off * fs).round() as usize;
                        block_rms(&before[a..(a + win).min(before.len())], block)
                            .iter()
                            .any(|b| b.1 > DIVERGENCE_MIN_RMS)
                    })
                    .collect();
                let (at, max_growth) = significant
                    .iter()
                    .copied()
                    .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
                let diverged = max_growth > DIVERGENCE_GROWTH;
                let osc = dominant_frequency(&before, fs, 1.0, fs / 2.0 - 1.0, 0.01);
                let reference = slice_of(tel, enable_t - 1.0, *enable_t, |r| r.w_meas[1]);
                let reference = block_rms(&reference, (ENVELOPE_BLOCK_S * fs).round() as usize)
                    .iter()
                    .map(|b| b.1)
                    .fold(0.0, f64::max);
                let after = slice_of(tel, *enable_t, f64::INFINITY, |r| r.w_meas[1]);
                let settle = settle_time(&after, fs, ENVELOPE_BLOCK_S, reference, CONVERGED_FRACTION);
                rep.set("divergence_detected", if diverged { 1.0 } else { 0.0 });
                rep.set("max_envelope_growth_per_s", max_growth);
                rep.set("max_growth_window_start_s", t0 + at);
                rep.set("significant_windows", significant.len() as f64);
                rep.set("oscillation_hz", osc);
                rep.set("pre_switch_envelope_rms", reference);
                rep.set("convergence_s", settle.unwrap_or(f64::INFINITY));
                rep.check(
                    "divergence",
                    diverged,
                    format!(
                        "max envelope growth {max_growth:.3}/s over windows above {DIVERGENCE_MIN_RMS} rad/s (threshold {DIVERGENCE_GROWTH}/s)"
                    ),
                );
                rep.check(
                    "oscillation frequency",
                    (osc - freq_hz).abs() <= *tol_hz,
                    format!("{osc:.2} Hz (expected {freq_hz} ± {tol_hz})"),
                );
                rep.check(
                    "convergence after switch",
                    settle.is_some_and(|s| s <= *settle_s),
                    match settle {
                        Some(s) => format!("{s:.2} s (limit {settle_s} s)"),
                        None => "never settled".to_string(),
                    },
                );
            }
            Check::RateTracking {
                axis,
                t0,
                max_overshoot_pct,
            } => {
                let r = tel.window(*t0, f64::INFINITY);
                let rows = &tel.rows[r];
                let t: Vec<f64> = rows.iter().map(|x| x.t).collect();
                let cmd: Vec<f64> = rows.iter().map(|x| x.w_cmd[*axis]).collect();
                let meas: Vec<f64> = rows.iter().map(|x| x.w_meas[*axis]).collect();
                let steps = step_overshoots(&t, &cmd, &meas);
                let worst = steps.iter().map(|s| s.overshoot_pct).fold(0.0, f64::max);
                rep.set("rate_steps", steps.len() as f64);
                rep.set("max_overshoot_pct", worst);
                rep.check(
                    "rate step overshoot",
                    !steps.is_empty() && worst <= *max_overshoot_pct,
                    format!("{worst:.2}% over {} steps (limit {max_overshoot_pct}%)", steps.len()),
                );
            }
            Check::AltitudeHold { t0, max_error_m } => {
                let err = slice_of(tel, *t0, f64::INFINITY, |r| (r.height - r.height_cmd).abs())
                    .into_iter()
                    .fold(0.0, f64::max);
                rep.set("max_altitude_error_m", err);
                rep.check(
                    "altitude hold",
                    err < *max_error_m,
                    format!("max |error| {err:.3} m (limit {max_error_m} m)"),
                );
            }
            Check::PitchStep {
                t,
                window,
                min_r2,
                max_overshoot_pct,
            } => {
                let range = tel.window(*t, t + window);
                let rows = &tel.rows[range.clone()];
                let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
                let y: Vec<f64> = rows.iter().map(|r| r.pitch_deg()).collect();
                let before = range.start.checked_sub(1).map(|i| tel.rows[i].pitch_cmd_deg());
                let target = rows.first().map(|r| r.pitch_cmd_deg());
                let fit = first_order_fit(&ts, &y, *t);
                let (r2, tau) = fit.map_or((f64::NAN, f64::NAN), |f| (f.r2, f.tau));
                let overshoot = match (before, target) {
                    (Some(a), Some(b)) if (b - a).abs() > 1e-9 => {
                        let dir = (b - a).signum();
                        let peak = y.iter().map(|v| (v - b) * dir).fold(f64::NEG_INFINITY, f64::max);
                        (100.0 * peak / (b - a).abs()).max(0.0)
                    }
                    _ => f64::NAN,
                };
                rep.set("pitch_step_r2", r2);
                rep.set("pitch_step_tau_s", tau);
                rep.set("pitch_step_overshoot_pct", overshoot);
                rep.check(
                    "pitch step first-order fit",
                    r2 > *min_r2,
                    format!("R² {r2:.4} (minimum {min_r2}), τ {tau:.3} s"),
                );
                rep.check(
                    "pitch step overshoot",
                    overshoot < *max_overshoot_pct,
                    format!("{overshoot:.2}% (limit {max_overshoot_pct}%)"),
                );
            }
        }
    }
    rep
}
