use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use num_complex::Complex64;
use vtol_core::attitude::{euler_zxy_to_quat, EulerZXY, UnitQuaternion};
use vtol_core::lti::{butterworth2, ContinuousTF, PlantFitParams};
use vtol_core::plant::{
    step_dynamics, AeroTable, AircraftParams, BodyInputs, NonlinearPlant, NonlinearPlantConfig,
    RigidBodyModel, RigidBodyState, RotorVibration, RotorVibrationConfig, SensorConfig,
    SensorModel,
};

fn hover_q() -> UnitQuaternion {
    euler_zxy_to_quat(&EulerZXY::new(0.0, FRAC_PI_2, 0.0))
}

/// Coefficients linear in α so bilinear lookup is exact and smooth.
fn smooth_table() -> AeroTable {
    AeroTable::new(
        vec![-PI, PI],
        vec![0.0],
        vec![-2.0, 2.0],
        vec![0.3, 0.3],
    )
    .unwrap()
}

fn integrate(dt: f64, horizon: f64) -> RigidBodyState {
    let model = RigidBodyModel::new(&AircraftParams::default(), smooth_table(), Vector3::new(0.01, 0.01, 0.01)).unwrap();
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
    let n = (horizon / dt).round() as usize;
    for k in 0..n {
        s = step_dynamics(&model, &s, &u, dt, k as f64 * dt).unwrap().state;
    }
    s
}

fn state_error(a: &RigidBodyState, b: &RigidBodyState) -> f64 {
    let qa = a.q.to_array();
    let qb = b.q.to_array();
    let dq: f64 = qa.iter().zip(qb.iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    (a.p - b.p).norm() + (a.v - b.v).norm() + (a.omega - b.omega).norm() + dq
}

#[test]
fn rk4_convergence_order() {
    let reference = integrate(0.0625e-3, 1.0);
    let e1 = state_error(&integrate(2e-3, 1.0), &reference);
    let e2 = state_error(&integrate(1e-3, 1.0), &reference);
    let order = (e1 / e2).log2();
    assert!(order >= 3.5, "observed order {order} ({e1:e}, {e2:e})");
}

#[test]
fn torque_free_rotation_conserves_momentum_and_energy() {
    let model = RigidBodyModel::new(&AircraftParams::default(), AeroTable::default(), Vector3::zeros()).unwrap();
    let i = model.inertia;
    for w0 in [Vector3::new(0.0, 3.0, 0.0), Vector3::new(1.0, 0.5, -2.0)] {
        let mut s = RigidBodyState {
            omega: w0,
            ..RigidBodyState::at_rest(hover_q())
        };
        let h0 = (i * w0).norm();
        let e0 = 0.5 * w0.dot(&(i * w0));
        let u = BodyInputs {
            thrust: model.mass * model.g,
            torque: Vector3::zeros(),
        };
        for k in 0..10_000 {
            s = step_dynamics(&model, &s, &u, 1e-3, k as f64 * 1e-3).unwrap().state;
        }
        let w = s.omega;
        assert!(((i * w).norm() - h0).abs() < 1e-8);
        assert!((0.5 * w.dot(&(i * w)) - e0).abs() < 1e-8);
    }
}

#[test]
fn quaternion_norm_drift_per_step() {
    let model = RigidBodyModel::new(&AircraftParams::default(), AeroTable::default(), Vector3::zeros()).unwrap();
    let mut s = RigidBodyState {
        omega: Vector3::new(2.0, -3.0, 1.0),
        ..RigidBodyState::at_rest(hover_q())
    };
    let u = BodyInputs {
        thrust: 10.0,
        torque: Vector3::new(0.05, 0.0, 0.01),
    };
    for k in 0..2000 {
        s = step_dynamics(&model, &s, &u, 1e-3, k as f64 * 1e-3).unwrap().state;
        assert!((s.q.norm() - 1.0).abs() < 1e-9);
    }
}

fn project(y: &[f64], f: f64, fs: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, v) in y.iter().enumerate() {
        let t = k as f64 / fs;
        acc += Complex64::new(0.0, -2.0 * PI * f * t).exp() * v;
    }
    acc * (2.0 / y.len() as f64)
}

#[test]
fn nonlinear_pitch_rate_matches_rigid_low_frequency_model() {
    let mut cfg = NonlinearPlantConfig::default();
    cfg.torque_path.flex_axes = [false; 3];
    cfg.torque_path.actuator_delay = 0.0;
    let fit = PlantFitParams::default();
    // 260 / (s (1 + 0.0637 s)): the rigid-body part without the 22 Hz zeros.
    let approx = ContinuousTF::new(vec![fit.dy_num[0]], vec![0.0, 1.0, fit.dy_tau], 0.0).unwrap();
    let fs = cfg.sample_hz;
    for f in [1.0f64, 2.0, 3.0, 5.0] {
        let mut plant = NonlinearPlant::new(&cfg, AeroTable::default(), RigidBodyState::at_rest(hover_q())).unwrap();
        let amp = 0.002;
        let settle = (2.0 * fs) as usize;
        let periods = (4.0 * f).round().max(4.0);
        let n = (periods / f * fs).round() as usize;
        let mut input = Vec::with_capacity(n);
        let mut out = Vec::with_capacity(n);
        for k in 0..settle + n {
            let t = k as f64 / fs;
            let u = amp * (2.0 * PI * f * t).sin();
            plant.step(&Vector3::new(0.0, u, 0.0), cfg.aircraft.hover_command).unwrap();
            if k >= settle {
                input.push(u);
                out.push(plant.state().omega.y);
            }
        }
        let h = project(&out, f, fs) / project(&input, f, fs);
        let expect = approx.eval(f).unwrap();
        let db = 20.0 * (h.norm() / expect.norm()).log10();
        assert!(db.abs() < 3.0, "{f} Hz: {db} dB");
    }
}

#[test]
fn sensor_passes_14_hz_and_cuts_noise() {
    let cfg = SensorConfig {
        gyro_noise_std: 0.0,
        altitude_noise_std: 0.0,
        vz_noise_std: 0.0,
        ..Default::default()
    };
    let mut s = SensorModel::new(cfg, 1000.0, 0).unwrap();
    let mut out = Vec::new();
    for k in 0..20_000 {
        let t = k as f64 / 1000.0;
        let w = Vector3::new(0.0, (2.0 * PI * 14.0 * t).sin(), 0.0);
        if let Some(m) = s.push(&w, 0.0, 0.0) {
            if t >= 4.0 {
                out.push(m.omega_meas.y);
            }
        }
    }
    let h = project(&out, 14.0, 250.0);
    let db = 20.0 * h.norm().log10();
    assert!(db > -0.3 && db < 0.01, "{db}");

    // Noise only: variance ratio against the filter's equivalent noise bandwidth.
    let sigma = 0.05;
    let cfg = SensorConfig {
        gyro_noise_std: sigma,
        ..Default::default()
    };
    let mut s = SensorModel::new(cfg.clone(), 1000.0, 11).unwrap();
    let mut ys = Vec::new();
    for _ in 0..400_000 {
        if let Some(m) = s.push(&Vector3::zeros(), 0.0, 0.0) {
            ys.push(m.omega_meas.x);
        }
    }
    let var = ys.iter().map(|v| v * v).sum::<f64>() / ys.len() as f64;
    let b = butterworth2(cfg.antialias_hz).unwrap();
    let nyq = 500.0;
    let steps = 100_000;
    let mut integral = 0.0;
    for i in 0..steps {
        let f = (i as f64 + 0.5) * nyq / steps as f64;
        integral += b.eval(f).unwrap().norm_sqr();
    }
    let expect = sigma * sigma * integral / steps as f64;
    assert!((var / expect - 1.0).abs() < 0.10, "{var} vs {expect}");
}

#[test]
fn rotor_vibration_lives_in_band() {
    let v = RotorVibration::new(&RotorVibrationConfig::default(), 5).unwrap();
    let fs = 1000.0;
    let n = 1 << 14;
    let x: Vec<f64> = (0..n).map(|k| v.value(k as f64 / fs).x).collect();
    // Hann-windowed periodogram.
    let mut total = 0.0;
    let mut band = 0.0;
    for k in 0..n / 2 {
        let f = k as f64 * fs / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        if !(60.0..=105.0).contains(&f) && k % 8 != 0 {
            continue;
        }
        for (i, xi) in x.iter().enumerate() {
            let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos();
            acc += Complex64::new(0.0, -2.0 * PI * (k * i) as f64 / n as f64).exp() * (xi * w);
        }
        let p = acc.norm_sqr() * if (60.0..=105.0).contains(&f) { 1.0 } else { 8.0 };
        total += p;
        if (75.0..=90.0).contains(&f) {
            band += p;
        }
    }
    assert!(band / total > 0.99, "{}", band / total);

    // Power after the 69 Hz low-pass, against |P_lf|² averaged over the tones.
    let lf = PlantFitParams::default().lf().unwrap();
    let tones: Vec<f64> = v.tone_frequencies(0).collect();
    let mean_gain: f64 = tones.iter().map(|f| lf.eval(*f).unwrap().norm_sqr()).sum::<f64>() / tones.len() as f64;
    let atten_db = -10.0 * mean_gain.log10();
    assert!(atten_db > 3.5 && atten_db < 6.0, "{atten_db}");
}
