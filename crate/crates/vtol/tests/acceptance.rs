//! Acceptance suite: one PASS/FAIL line per primary criterion, tolerances
//! pinned below. Exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vtol_core::attitude::{attitude_error, euler_zxy_to_quat, EulerZXY, UnitQuaternion};
use vtol_core::control::RateLoopConfig;
use vtol_core::harness::{builtin, compare_runs, design_pipeline, notch_free_limit, run_scenario, PipelineConfig, RunReport};
use vtol_core::lti::{
    closed_loop_stability, discretize_tustin, fitted_plant, logspace, magnitude_slope, margins, notch, pid_tf,
    ContinuousTF, PlantFitParams,
};
use vtol_core::plant::{step_dynamics, AeroTable, AircraftParams, BodyInputs, LinearAxisPlant, RigidBodyModel, RigidBodyState};
use vtol_core::sysid::{estimate_frf, sweep_experiment, ChirpConfig, FrfConfig};

// Model coefficients.
const PEAK_HZ: f64 = 14.01;
const OFFPEAK_HZ: f64 = 26.98;
const EXTREMA_TOL_HZ: f64 = 0.1;
const MODEL_RUNTIME: Duration = Duration::from_secs(1);
// Loop shaping.
const CROSSOVER_RANGE_HZ: (f64, f64) = (5.8, 7.8);
const PM_RANGE_DEG: (f64, f64) = (36.0, 52.0);
const SLOPE_RANGE_DB_DEC: (f64, f64) = (-22.0, -16.0);
const SLOPE_BAND_HZ: (f64, f64) = (0.6, 14.0);
const MARGIN_BAND_HZ: (f64, f64) = (0.5, 100.0);
const LOOP_RUNTIME: Duration = Duration::from_secs(5);
// Notch necessity.
const NOTCH_AB_RUNTIME: Duration = Duration::from_secs(30);
// Bandwidth gain.
const MIN_BANDWIDTH_GAIN: f64 = 0.5;
const BANDWIDTH_RUNTIME: Duration = Duration::from_secs(60);
// System identification round trip.
const SYSID_PEAK_TOL: f64 = 0.02;
const SYSID_DELAY_TOL: f64 = 0.15;
const SYSID_MATCH_DB: f64 = 1.0;
const SYSID_MATCH_BAND_HZ: (f64, f64) = (1.5, 50.0);
const SYSID_RUNTIME: Duration = Duration::from_secs(60);
// Transition.
const TRANSITION_RUNTIME: Duration = Duration::from_secs(60);

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(x: f64, r: (f64, f64)) -> bool {
    x >= r.0 && x <= r.1
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let dt = t.elapsed();
    let fast = dt <= limit;
    o.passed &= fast;
    o.detail = format!("{}; runtime {:.2} s (limit {} s)", o.detail, dt.as_secs_f64(), limit.as_secs());
    o
}

fn published_plant() -> ContinuousTF {
    fitted_plant(&PlantFitParams::default()).unwrap()
}

fn published_pid() -> ContinuousTF {
    let r = RateLoopConfig::default();
    pid_tf(r.kp[1], r.ki[1], r.kd[1], r.deriv_corner_hz).unwrap()
}

fn designed_loop() -> ContinuousTF {
    let n = &RateLoopConfig::default().notch[1];
    published_plant().series(&published_pid()).series(&notch(n.center_hz, n.k1, n.k2).unwrap())
}

/// Frequency of the largest (or smallest) |P| on a fine grid, refined by
/// golden-section search.
fn extremum(tf: &ContinuousTF, lo: f64, hi: f64, maximum: bool) -> f64 {
    let score = |f: f64| {
        let m = tf.eval(f).unwrap().norm().ln();
        if maximum {
            -m
        } else {
            m
        }
    };
    let grid = logspace(lo, hi, 4000);
    let k = (0..grid.len()).min_by(|&a, &b| score(grid[a]).total_cmp(&score(grid[b]))).unwrap();
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if score(c) < score(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn model_coefficients() -> Outcome {
    let p = published_plant();
    let peak = extremum(&p, 10.0, 20.0, true);
    let dip = extremum(&p, 20.0, 40.0, false);
    outcome(
        (peak - PEAK_HZ).abs() <= EXTREMA_TOL_HZ && (dip - OFFPEAK_HZ).abs() <= EXTREMA_TOL_HZ,
        format!(
            "|P| peak at {peak:.4} Hz (expected {PEAK_HZ} ± {EXTREMA_TOL_HZ}), dip at {dip:.4} Hz (expected {OFFPEAK_HZ} ± {EXTREMA_TOL_HZ})"
        ),
    )
}

fn loop_shaping() -> Outcome {
    let l = designed_loop();
    let m = margins(&l, MARGIN_BAND_HZ).unwrap();
    let slope = magnitude_slope(&l, SLOPE_BAND_HZ.0, SLOPE_BAND_HZ.1).unwrap();
    let (fc, pm) = (m.gain_crossover_hz, m.phase_margin_deg);
    let ok = [within(fc, CROSSOVER_RANGE_HZ), within(pm, PM_RANGE_DEG), within(slope, SLOPE_RANGE_DB_DEC)];
    let tag = |b: bool| if b { "ok" } else { "out of range" };
    outcome(
        ok.iter().all(|b| *b),
        format!(
            "crossover {fc:.4} Hz {:?} {}; phase margin {pm:.3}° {:?} {}; slope {slope:.3} dB/dec {:?} {}",
            CROSSOVER_RANGE_HZ,
            tag(ok[0]),
            PM_RANGE_DEG,
            tag(ok[1]),
            SLOPE_RANGE_DB_DEC,
            tag(ok[2])
        ),
    )
}

fn checks_line(rep: &RunReport) -> String {
    rep.checks
        .iter()
        .map(|c| format!("{} {}: {}", if c.passed { "ok" } else { "FAILED" }, c.name, c.detail))
        .collect::<Vec<_>>()
        .join("; ")
}

fn notch_necessity() -> Outcome {
    let (_, rep) = run_scenario(&builtin("hover_notch_ab").unwrap()).unwrap();
    outcome(rep.passed(), checks_line(&rep))
}

fn bandwidth_gain() -> Outcome {
    let l = designed_loop();
    let fc = margins(&l, MARGIN_BAND_HZ).unwrap().gain_crossover_hz;
    let stable = closed_loop_stability(&l).unwrap().stable;
    let Some(limit) = notch_free_limit(&published_plant(), &published_pid(), MARGIN_BAND_HZ).unwrap() else {
        return outcome(false, "no notch-free stability limit found".into());
    };
    let gain = fc / limit.crossover_hz - 1.0;
    outcome(
        stable && gain >= MIN_BANDWIDTH_GAIN,
        format!(
            "notched crossover {fc:.3} Hz (closed loop stable: {stable}) vs notch-free limit {:.3} Hz at gain scale {:.3}: +{:.0}% (minimum {:.0}%)",
            limit.crossover_hz,
            limit.gain_scale,
            100.0 * gain,
            100.0 * MIN_BANDWIDTH_GAIN
        ),
    )
}

/// Worst composed-TF mismatch (dB) against the published plant over trusted
/// bins in the match band, and the number of such bins.
fn composed_mismatch(res: &vtol_core::harness::PipelineResult) -> (f64, usize) {
    let (p_fit, p_true) = (fitted_plant(&res.fit.params).unwrap(), published_plant());
    let mut worst: f64 = 0.0;
    let mut bins = 0;
    for i in 0..res.frf.len() {
        let f = res.frf.freqs[i];
        if res.frf.is_trusted(i) && within(f, SYSID_MATCH_BAND_HZ) {
            let r = p_fit.eval(f).unwrap() / p_true.eval(f).unwrap();
            worst = worst.max((20.0 * r.norm().log10()).abs());
            bins += 1;
        }
    }
    (worst, bins)
}

fn sysid_round_trip() -> Outcome {
    // The known plant without sensor noise; the noisy default pipeline is
    // reported alongside for information.
    let cfg = PipelineConfig {
        gyro_noise: 0.0,
        ..Default::default()
    };
    assert_eq!((cfg.chirp.f0, cfg.chirp.f1, cfg.chirp.duration), (1.0, 60.0, 60.0));
    let res = design_pipeline(&cfg).unwrap();
    let truth = PlantFitParams::default();
    let fit = &res.fit.params;
    let pk = fit.peak.freq_hz / truth.peak.freq_hz - 1.0;
    let dl = fit.delay / truth.delay - 1.0;
    let (worst, bins) = composed_mismatch(&res);
    let noisy = design_pipeline(&PipelineConfig::default()).unwrap();
    let (noisy_worst, _) = composed_mismatch(&noisy);
    outcome(
        pk.abs() <= SYSID_PEAK_TOL && dl.abs() <= SYSID_DELAY_TOL && worst <= SYSID_MATCH_DB && bins > 0,
        format!(
            "peak {:.3} Hz ({:+.2}%, limit ±{}%); delay {:.4} s ({:+.1}%, limit ±{}%); composed |ΔP| max {worst:.3} dB over {bins} trusted bins in {:?} Hz (limit {SYSID_MATCH_DB} dB); info: with gyro noise {noisy_worst:.3} dB",
            fit.peak.freq_hz,
            100.0 * pk,
            100.0 * SYSID_PEAK_TOL,
            fit.delay,
            100.0 * dl,
            100.0 * SYSID_DELAY_TOL,
            SYSID_MATCH_BAND_HZ
        ),
    )
}

fn transition() -> Outcome {
    let (_, rep) = run_scenario(&builtin("transition").unwrap()).unwrap();
    outcome(rep.passed(), checks_line(&rep))
}

fn hover_q() -> UnitQuaternion {
    euler_zxy_to_quat(&EulerZXY::new(0.0, FRAC_PI_2, 0.0))
}

fn random_quat(rng: &mut ChaCha8Rng) -> UnitQuaternion {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        if let Some(q) = UnitQuaternion::new(v[0], v[1], v[2], v[3]) {
            return q;
        }
    }
}

fn negated(q: &UnitQuaternion) -> UnitQuaternion {
    let a = q.to_array();
    UnitQuaternion::new(-a[0], -a[1], -a[2], -a[3]).unwrap()
}

fn prop_quaternions(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut worst_cover: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for _ in 0..1000 {
        let (q, qd) = (random_quat(rng), random_quat(rng));
        let a = attitude_error(&q, &qd).0;
        worst_cover = worst_cover
            .max((a - attitude_error(&negated(&q), &qd).0).norm())
            .max((a - attitude_error(&q, &negated(&qd)).0).norm());
        let e = EulerZXY::new(rng.random_range(-PI..PI), rng.random_range(-1.5..1.5), rng.random_range(-PI..PI));
        worst_norm = worst_norm.max((euler_zxy_to_quat(&e).norm() - 1.0).abs());
    }
    (worst_cover < 1e-12 && worst_norm < 1e-12, format!("double cover {worst_cover:.1e}, unit norm {worst_norm:.1e}"))
}

fn prop_notch(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let f0 = rng.random_range(0.5..100.0);
        let k1 = rng.random_range(0.01..2.0);
        let k2 = k1 * rng.random_range(0.01..0.99);
        let v = notch(f0, k1, k2).unwrap().eval(f0).unwrap();
        worst = worst.max((v.norm() - k2 / k1).abs()).max(v.arg().abs());
    }
    (worst < 1e-9, format!("center identity {worst:.1e}"))
}

fn prop_tustin() -> (bool, String) {
    let n = &RateLoopConfig::default().notch[1];
    let filters = [published_pid(), notch(n.center_hz, n.k1, n.k2).unwrap()];
    let (mut db, mut deg): (f64, f64) = (0.0, 0.0);
    for tf in &filters {
        let d = discretize_tustin(tf, 250.0, Some(n.center_hz)).unwrap();
        for f in logspace(0.1, 25.0, 300) {
            let r = d.response(f) / tf.eval(f).unwrap();
            db = db.max((20.0 * r.norm().log10()).abs());
            deg = deg.max(r.arg().to_degrees().abs());
        }
    }
    (db < 1.0 && deg < 5.0, format!("Tustin below fs/10 {db:.3} dB / {deg:.3}°"))
}

fn integrate(dt: f64, horizon: f64) -> RigidBodyState {
    let table = AeroTable::new(vec![-PI, PI], vec![0.0], vec![-2.0, 2.0], vec![0.3, 0.3]).unwrap();
    let model = RigidBodyModel::new(&AircraftParams::default(), table, Vector3::new(0.01, 0.01, 0.01)).unwrap();
    let mut s = RigidBodyState {
        p: Vector3::zeros(),
        v: Vector3::new(4.0, 0.5, -1.0),
        q: euler_zxy_to_quat(&EulerZXY::new(0.1, 1.2, 0.3)),
        omega: Vector3::new(0.8, -1.1, 0.6),
    };
    let u = BodyInputs {
        thrust: 12.0,
        torque: Vector3::new(0.01, 0.02, -0.015),
    };
    for k in 0..(horizon / dt).round() as usize {
        s = step_dynamics(&model, &s, &u, dt, k as f64 * dt).unwrap().state;
    }
    s
}

fn state_error(a: &RigidBodyState, b: &RigidBodyState) -> f64 {
    let dq: f64 = a.q.to_array().iter().zip(b.q.to_array()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    (a.p - b.p).norm() + (a.v - b.v).norm() + (a.omega - b.omega).norm() + dq
}

fn prop_rk4() -> (bool, String) {
    let reference = integrate(0.0625e-3, 1.0);
    let e1 = state_error(&integrate(2e-3, 1.0), &reference);
    let e2 = state_error(&integrate(1e-3, 1.0), &reference);
    let order = (e1 / e2).log2();
    (order >= 3.5, format!("RK4 order {order:.2}"))
}

fn prop_rigid_body() -> (bool, String) {
    let model = RigidBodyModel::new(&AircraftParams::default(), AeroTable::default(), Vector3::zeros()).unwrap();
    let i = model.inertia;
    let w0 = Vector3::new(1.0, 0.5, -2.0);
    let hover = BodyInputs {
        thrust: model.mass * model.g,
        torque: Vector3::zeros(),
    };
    let mut s = RigidBodyState {
        omega: w0,
        ..RigidBodyState::at_rest(hover_q())
    };
    for k in 0..10_000 {
        s = step_dynamics(&model, &s, &hover, 1e-3, k as f64 * 1e-3).unwrap().state;
    }
    let dh = ((i * s.omega).norm() - (i * w0).norm()).abs();
    let de = (0.5 * s.omega.dot(&(i * s.omega)) - 0.5 * w0.dot(&(i * w0))).abs();
    let rest = step_dynamics(&model, &RigidBodyState::at_rest(hover_q()), &hover, 1e-3, 0.0).unwrap().state;
    let fixed = rest.v.norm().max(rest.omega.norm());
    (
        dh < 1e-8 && de < 1e-8 && fixed < 1e-9,
        format!("torque-free |Iω| {dh:.1e}, energy {de:.1e}; hover T = mg drift {fixed:.1e}"),
    )
}

fn prop_frf() -> (bool, String) {
    let fs = 1000.0;
    let cfg = ChirpConfig {
        amplitude: 0.01,
        sample_hz: fs,
        ..Default::default()
    };
    let p = published_plant();
    let mut plant = LinearAxisPlant::new(&p, fs).unwrap();
    let rec = sweep_experiment(&mut plant, &cfg, None, 0.0, 0).unwrap();
    let e = estimate_frf(&rec.input().unwrap(), &rec.output().unwrap(), &FrfConfig::default()).unwrap();
    let (mut db, mut deg): (f64, f64) = (0.0, 0.0);
    let mut untrusted = 0;
    for i in 0..e.len() {
        if within(e.freqs[i], SYSID_MATCH_BAND_HZ) {
            untrusted += usize::from(!e.is_trusted(i));
            let r = e.h[i] / p.eval(e.freqs[i]).unwrap();
            db = db.max((20.0 * r.norm().log10()).abs());
            deg = deg.max(r.arg().to_degrees().abs());
        }
    }
    (
        db < 1.0 && deg < 6.0 && untrusted == 0,
        format!("noiseless FRF bias {db:.3} dB / {deg:.2}°"),
    )
}

fn prop_determinism() -> (bool, String) {
    let mut sc = builtin("hover_notch_ab").unwrap();
    sc.duration = 4.0;
    let rows = |sc| -> Vec<Vec<f64>> {
        run_scenario(sc).unwrap().0.rows.iter().map(|r| r.to_values().to_vec()).collect()
    };
    let (a, b) = (rows(&sc), rows(&sc));
    let h: Vec<String> = vtol_core::harness::TELEMETRY_COLUMNS.iter().map(|s| s.to_string()).collect();
    let same = compare_runs(&h, &a, &h, &b).unwrap().identical;
    (same, format!("bit-identical logs {same}"))
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let parts = [
        prop_quaternions(&mut rng),
        prop_notch(&mut rng),
        prop_tustin(),
        prop_rk4(),
        prop_rigid_body(),
        prop_frf(),
        prop_determinism(),
    ];
    outcome(
        parts.iter().all(|p| p.0),
        parts
            .iter()
            .map(|(ok, d)| format!("{}{d}", if *ok { "" } else { "FAILED " }))
            .collect::<Vec<_>>()
            .join("; "),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("model coefficients", MODEL_RUNTIME, model_coefficients),
        ("loop shaping", LOOP_RUNTIME, loop_shaping),
        ("notch necessity", NOTCH_AB_RUNTIME, notch_necessity),
        ("bandwidth gain from notch", BANDWIDTH_RUNTIME, bandwidth_gain),
        ("system identification round trip", SYSID_RUNTIME, sysid_round_trip),
        ("transition altitude hold", TRANSITION_RUNTIME, transition),
        ("property suites", Duration::from_secs(600), property_suites),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let o = timed(limit, f);
        failed += usize::from(!o.passed);
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
