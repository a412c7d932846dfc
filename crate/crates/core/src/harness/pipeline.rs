#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;

use super::report::RunReport;
use crate::control::{NotchConfig, RateLoopConfig};
use crate::error::HarnessError;
use crate::lti::{
    bode, closed_loop_bandwidth, closed_loop_stability, fitted_plant, magnitude_slope, margins, pid_tf,
    ContinuousTF, FrequencyResponse, PlantFitParams, StabilityMargins,
};
use crate::plant::LinearAxisPlant;
use crate::sysid::{estimate_frf, fit_plant_model, sweep_experiment, ChirpConfig, FitConfig, FitResult, FrfConfig, FrfEstimate, SweepRecord};

/// Pass bands the pipeline report checks against.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PipelineTargets {
    pub peak_hz: f64,
    /// Relative tolerance on the fitted peak frequency.
    pub peak_tol: f64,
    pub crossover_hz: (f64, f64),
    pub phase_margin_deg: (f64, f64),
    pub slope_db_per_dec: (f64, f64),
    /// Required relative crossover gain of the notched design over the best
    /// stable notch-free design.
    pub min_bandwidth_gain: f64,
}

impl Default for PipelineTargets {
    fn default() -> Self {
        Self {
            peak_hz: 14.0,
            peak_tol: 0.02,
            crossover_hz: (5.8, 7.8),
            phase_margin_deg: (36.0, 52.0),
            slope_db_per_dec: (-22.0, -16.0),
            min_bandwidth_gain: 0.5,
        }
    }
}

/// Identification-to-design pipeline settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PipelineConfig {
    /// Plant the sweep runs on.
    pub plant: PlantFitParams,
    /// Chirp settings. A zero amplitude selects one so the peak rate of a
    /// noise-free trial sweep is `target_peak_rate`.
    pub chirp: ChirpConfig,
    pub target_peak_rate: f64,
    /// Proportional rate feedback holding the plant near trim during the sweep.
    pub stabilizer_kp: f64,
    pub gyro_noise: f64,
    pub seed: u64,
    pub frf: FrfConfig,
    pub fit: FitConfig,
    /// Gains and notch shape; the notch center is replaced by the fitted peak.
    pub rate: RateLoopConfig,
    pub axis: usize,
    pub skip_notch: bool,
    pub margin_band_hz: (f64, f64),
    pub slope_band_hz: (f64, f64),
    pub bode_band_hz: (f64, f64),
    pub bode_points_per_decade: usize,
    pub targets: PipelineTargets,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            plant: PlantFitParams::default(),
            chirp: ChirpConfig {
                amplitude: 0.0,
                ..ChirpConfig::default()
            },
            target_peak_rate: 1.0,
            stabilizer_kp: 0.05,
            gyro_noise: 0.0025,
            seed: 7,
            frf: FrfConfig::default(),
            fit: FitConfig::default(),
            rate: RateLoopConfig::default(),
            axis: 1,
            skip_notch: false,
            margin_band_hz: (0.5, 100.0),
            slope_band_hz: (0.6, 14.0),
            bode_band_hz: (0.5, 100.0),
            bode_points_per_decade: 100,
            targets: PipelineTargets::default(),
        }
    }
}

/// Loop figures of one controller on one plant model.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopAnalysis {
    pub margins: Option<StabilityMargins>,
    pub slope_db_per_dec: f64,
    pub peak_gain_db: f64,
    pub stable: bool,
    pub closed_loop_bandwidth_hz: Option<f64>,
    /// Several gain crossings or an unstable closed loop.
    pub conditionally_unstable: bool,
}

/// Largest stable notch-free loop found by scaling the PID gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityLimit {
    pub gain_scale: f64,
    pub crossover_hz: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub sweep: SweepRecord,
    pub frf: FrfEstimate,
    pub fit: FitResult,
    pub notch: Option<NotchConfig>,
    pub plant_tf: ContinuousTF,
    pub controller_tf: ContinuousTF,
    pub loop_tf: ContinuousTF,
    pub designed: LoopAnalysis,
    pub notch_free: LoopAnalysis,
    pub notch_free_limit: Option<StabilityLimit>,
    pub bode_plant: FrequencyResponse,
    pub bode_controller: FrequencyResponse,
    pub bode_loop: FrequencyResponse,
    pub report: RunReport,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidScenario(m.into()));
        if self.axis > 2 {
            return bad("axis must be 0, 1 or 2");
        }
        if !(self.target_peak_rate > 0.0) {
            return bad("target_peak_rate must be > 0");
        }
        if !(self.stabilizer_kp >= 0.0) || !(self.gyro_noise >= 0.0) {
            return bad("stabilizer_kp and gyro_noise must be >= 0");
        }
        for (lo, hi) in [self.margin_band_hz, self.slope_band_hz, self.bode_band_hz] {
            if !(lo > 0.0 && hi > lo) {
                return bad("frequency bands must satisfy 0 < lo < hi");
            }
        }
        if self.bode_points_per_decade < 100 {
            return bad("bode exports need at least 100 points per decade");
        }
        self.rate.validate()?;
        self.chirp.validate()?;
        self.frf.validate()?;
        self.fit.validate()?;
        Ok(())
    }
}

fn run_sweep(cfg: &PipelineConfig, plant: &ContinuousTF, chirp: &ChirpConfig, noise: f64) -> Result<SweepRecord, HarnessError> {
    let mut p = LinearAxisPlant::new(plant, chirp.sample_hz)?;
    let kp = cfg.stabilizer_kp;
    let mut stab = move |w: f64| -kp * w;
    Ok(sweep_experiment(&mut p, chirp, Some(&mut stab), noise, cfg.seed)?)
}

/// Chirp amplitude giving `target_peak_rate`; the response is linear in the
/// amplitude, so one noise-free unit sweep fixes it.
fn auto_amplitude(cfg: &PipelineConfig, plant: &ContinuousTF) -> Result<f64, HarnessError> {
    let unit = ChirpConfig {
        amplitude: 1.0,
        ..cfg.chirp.clone()
    };
    let rec = run_sweep(cfg, plant, &unit, 0.0)?;
    let peak = rec.omega_meas.iter().fold(0.0f64, |a, w| a.max(w.abs()));
    if !(peak > 0.0) {
        return Err(HarnessError::InvalidScenario("unit sweep produced no response".into()));
    }
    Ok(cfg.target_peak_rate / peak)
}

/// Loop figures of `l`. Margins failing for lack of a crossover are kept as
/// `None` rather than aborting.
pub fn analyze_loop(l: &ContinuousTF, margin_band: (f64, f64), slope_band: (f64, f64), peak_hz: f64) -> Result<LoopAnalysis, HarnessError> {
    let m = margins(l, margin_band).ok();
    let stab = closed_loop_stability(l)?;
    let crossings = m.as_ref().map_or(0, |m| m.all_gain_crossings_hz.len());
    Ok(LoopAnalysis {
        slope_db_per_dec: magnitude_slope(l, slope_band.0, slope_band.1)?,
        peak_gain_db: 20.0 * l.eval(peak_hz)?.norm().log10(),
        stable: stab.stable,
        closed_loop_bandwidth_hz: closed_loop_bandwidth(l, margin_band),
        conditionally_unstable: crossings > 1 || !stab.stable,
        margins: m,
    })
}

/// Largest PID gain scale (of the nominal gains) that keeps the notch-free
/// loop stable, found by a log sweep from 1e-3 up and bisection at the
/// first unstable point.
pub fn notch_free_limit(plant: &ContinuousTF, pid: &ContinuousTF, band: (f64, f64)) -> Result<Option<StabilityLimit>, HarnessError> {
    let stable = |g: f64| -> Result<bool, HarnessError> { Ok(closed_loop_stability(&plant.series(&pid.scaled(g)))?.stable) };
    let mut lo = None;
    let mut hi = None;
    let mut g = 1e-3;
    while g <= 1e3 {
        if stable(g)? {
            lo = Some(g);
        } else if lo.is_some() {
            hi = Some(g);
            break;
        }
        g *= 1.25;
    }
    let (Some(mut a), Some(mut b)) = (lo, hi) else {
        return Ok(None);
    };
    for _ in 0..60 {
        let m = (a * b).sqrt();
        if stable(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    let fc = margins(&plant.series(&pid.scaled(a)), band)?.gain_crossover_hz;
    Ok(Some(StabilityLimit {
        gain_scale: a,
        crossover_hz: fc,
    }))
}

fn within(x: f64, r: (f64, f64)) -> bool {
    x >= r.0 && x <= r.1
}

/// Sweep, FRF estimate, parametric fit, notch placement at the fitted peak
/// and loop analysis of the configured gains on the fitted model.
pub fn design_pipeline(cfg: &PipelineConfig) -> Result<PipelineResult, HarnessError> {
    cfg.validate()?;
    let truth = fitted_plant(&cfg.plant)?;
    let mut chirp = cfg.chirp.clone();
    if chirp.amplitude == 0.0 {
        chirp.amplitude = auto_amplitude(cfg, &truth)?;
    }
    let sweep = run_sweep(cfg, &truth, &chirp, cfg.gyro_noise)?;
    let frf = estimate_frf(&sweep.input()?, &sweep.output()?, &cfg.frf)?;
    let fit = fit_plant_model(&frf, &cfg.fit)?;
    let plant_tf = fitted_plant(&fit.params)?;

    let ax = cfg.axis;
    let r = &cfg.rate;
    let pid = pid_tf(r.kp[ax], r.ki[ax], r.kd[ax], r.deriv_corner_hz)?;
    let notch = (!cfg.skip_notch).then(|| NotchConfig {
        enabled: true,
        center_hz: fit.params.peak.freq_hz,
        ..r.notch[ax]
    });
    let controller_tf = match &notch {
        Some(n) => pid.series(&n.tf()?),
        None => pid.clone(),
    };
    let loop_tf = plant_tf.series(&controller_tf);
    let peak_hz = fit.params.peak.freq_hz;
    let designed = analyze_loop(&loop_tf, cfg.margin_band_hz, cfg.slope_band_hz, peak_hz)?;
    let notch_free = analyze_loop(&plant_tf.series(&pid), cfg.margin_band_hz, cfg.slope_band_hz, peak_hz)?;
    let limit = notch_free_limit(&plant_tf, &pid, cfg.margin_band_hz)?;

    let (lo, hi, ppd) = (cfg.bode_band_hz.0, cfg.bode_band_hz.1, cfg.bode_points_per_decade);
    let bode_plant = bode(&plant_tf, lo, hi, ppd)?;
    let bode_controller = bode(&controller_tf, lo, hi, ppd)?;
    let bode_loop = bode(&loop_tf, lo, hi, ppd)?;

    let mut rep = RunReport::new(if cfg.skip_notch { "pipeline_no_notch" } else { "pipeline" });
    let t = &cfg.targets;
    rep.set("sweep_amplitude", chirp.amplitude);
    rep.set("fit_cost", fit.cost);
    rep.set("frf_trusted_fraction", frf.trusted_fraction());
    rep.set("fitted_peak_hz", peak_hz);
    rep.set("fitted_offpeak_hz", fit.params.offpeak.freq_hz);
    rep.set("fitted_delay_s", fit.params.delay);
    rep.set("loop_gain_at_peak_db", designed.peak_gain_db);
    rep.set("notch_free_gain_at_peak_db", notch_free.peak_gain_db);
    rep.set("slope_db_per_dec", designed.slope_db_per_dec);
    rep.set("closed_loop_stable", if designed.stable { 1.0 } else { 0.0 });
    rep.set("conditional_instability", if designed.conditionally_unstable { 1.0 } else { 0.0 });
    if let Some(bw) = designed.closed_loop_bandwidth_hz {
        rep.set("closed_loop_bandwidth_hz", bw);
    }
    if let Some(n) = &notch {
        rep.set("notch_center_hz", n.center_hz);
    }
    let peak_err = (peak_hz / t.peak_hz - 1.0).abs();
    rep.check(
        "fitted peak frequency",
        peak_err <= t.peak_tol,
        format!("{peak_hz:.3} Hz (expected {} Hz ± {}%)", t.peak_hz, 100.0 * t.peak_tol),
    );
    match &designed.margins {
        Some(m) => {
            rep.set("crossover_hz", m.gain_crossover_hz);
            rep.set("phase_margin_deg", m.phase_margin_deg);
            rep.set("gain_crossings", m.all_gain_crossings_hz.len() as f64);
            if let Some(gm) = m.gain_margin_db {
                rep.set("gain_margin_db", gm);
            }
        }
        None => rep.check("gain crossover", false, "no crossover in band".into()),
    }
    let fc = designed.margins.as_ref().map_or(f64::NAN, |m| m.gain_crossover_hz);
    let pm = designed.margins.as_ref().map_or(f64::NAN, |m| m.phase_margin_deg);
    if cfg.skip_notch {
        rep.check(
            "peak above 0 dB without notch",
            designed.peak_gain_db > 0.0,
            format!("|L({peak_hz:.2} Hz)| = {:.2} dB", designed.peak_gain_db),
        );
        rep.check(
            "conditional instability flagged",
            designed.conditionally_unstable,
            format!("stable {}, {} gain crossings", designed.stable, rep.metric("gain_crossings").unwrap_or(0.0)),
        );
    } else {
        rep.check(
            "gain crossover",
            within(fc, t.crossover_hz),
            format!("{fc:.3} Hz (range {:?})", t.crossover_hz),
        );
        rep.check(
            "phase margin",
            within(pm, t.phase_margin_deg),
            format!("{pm:.2}° (range {:?})", t.phase_margin_deg),
        );
        rep.check(
            "magnitude slope",
            within(designed.slope_db_per_dec, t.slope_db_per_dec),
            format!(
                "{:.2} dB/dec over {:?} Hz (range {:?})",
                designed.slope_db_per_dec, cfg.slope_band_hz, t.slope_db_per_dec
            ),
        );
        rep.check(
            "resonance below 0 dB with notch",
            designed.peak_gain_db < 0.0,
            format!("|L({peak_hz:.2} Hz)| = {:.2} dB", designed.peak_gain_db),
        );
        rep.check(
            "closed loop stable",
            designed.stable,
            format!("stable {}", designed.stable),
        );
        match limit {
            Some(l) => {
                let gain = fc / l.crossover_hz - 1.0;
                rep.set("notch_free_max_gain_scale", l.gain_scale);
                rep.set("notch_free_max_crossover_hz", l.crossover_hz);
                rep.set("bandwidth_gain", gain);
                rep.check(
                    "bandwidth gain from notch",
                    designed.stable && gain >= t.min_bandwidth_gain,
                    format!(
                        "{:.0}% ({fc:.2} Hz vs {:.2} Hz notch-free limit, minimum {:.0}%)",
                        100.0 * gain,
                        l.crossover_hz,
                        100.0 * t.min_bandwidth_gain
                    ),
                );
            }
            None => rep.check("bandwidth gain from notch", false, "no notch-free stability limit found".into()),
        }
    }
    Ok(PipelineResult {
        sweep,
        frf,
        fit,
        notch,
        plant_tf,
        controller_tf,
        loop_tf,
        designed,
        notch_free,
        notch_free_limit: limit,
        bode_plant,
        bode_controller,
        bode_loop,
        report: rep,
    })
}

/// Names of the Bode exports in [`PipelineResult`], in order P, C, PC.
pub const BODE_EXPORTS: [&str; 3] = ["bode_plant", "bode_controller", "bode_loop"];

impl PipelineResult {
    pub fn bodes(&self) -> [(&'static str, &FrequencyResponse); 3] {
        [
            (BODE_EXPORTS[0], &self.bode_plant),
            (BODE_EXPORTS[1], &self.bode_controller),
            (BODE_EXPORTS[2], &self.bode_loop),
        ]
    }
}

