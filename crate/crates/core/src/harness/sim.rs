#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::Vector3;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use super::scenario::{Action, PlantMode, Scenario};
use super::telemetry::*;
use crate::attitude::{euler_zxy_to_quat, EulerZXY, UnitQuaternion};
use crate::control::{Cascade, CascadeOutput, Measurements, Setpoints};
use crate::error::{ControlError, HarnessError, PlantError};
use crate::lti::fitted_plant;
use crate::plant::{angle_of_attack, AeroTable, LinearAxisPlant, NonlinearPlant, RigidBodyState, SensorModel};
use crate::sysid::ChirpConfig;

/// Setpoints as the event script has left them.
#[derive(Debug, Clone)]
struct Script {
    roll: f64,
    pitch: f64,
    yaw: f64,
    ramp: Option<(f64, f64, f64, f64)>,
    height: f64,
    rates: Option<Vector3<f64>>,
    sweep: Option<(f64, usize, ChirpConfig)>,
    next: usize,
}

impl Script {
    fn new(sc: &Scenario) -> Self {
        Self {
            roll: 0.0,
            pitch: sc.initial.pitch_deg.to_radians(),
            yaw: 0.0,
            ramp: None,
            height: sc.initial.height,
            rates: None,
            sweep: None,
            next: 0,
        }
    }

    fn pitch_at(&self, t: f64) -> f64 {
        match self.ramp {
            Some((t0, from, to, dur)) => from + (to - from) * ((t - t0) / dur).clamp(0.0, 1.0),
            None => self.pitch,
        }
    }

    /// Applies every event due at `t`; notch switches go to the controller.
    fn advance(&mut self, sc: &Scenario, t: f64, ctrl: &mut Cascade) {
        while let Some(e) = sc.events.get(self.next) {
            if e.t > t + 1e-9 {
                break;
            }
            self.next += 1;
            match &e.action {
                Action::Attitude { roll_deg, pitch_deg, yaw_deg } => {
                    self.roll = roll_deg.to_radians();
                    self.pitch = pitch_deg.to_radians();
                    self.yaw = yaw_deg.to_radians();
                    self.ramp = None;
                    self.rates = None;
                }
                Action::PitchRamp { to_deg, duration } => {
                    let from = self.pitch_at(t);
                    self.pitch = to_deg.to_radians();
                    self.ramp = Some((e.t, from, self.pitch, *duration));
                    self.rates = None;
                }
                Action::Altitude { height } => self.height = *height,
                Action::Notch { axis, enabled } => ctrl.set_notch_enabled(*axis, *enabled),
                Action::RateCommand { rates } => self.rates = Some(Vector3::from(*rates)),
                Action::Sweep { axis, chirp } => self.sweep = Some((e.t, *axis, chirp.clone())),
            }
        }
    }

    fn setpoints(&self, t: f64) -> Setpoints {
        let q = euler_zxy_to_quat(&EulerZXY::new(self.roll, self.pitch_at(t), self.yaw));
        Setpoints {
            rate_override: self.rates,
            ..Setpoints::attitude(q, self.height)
        }
    }

    /// Chirp torque on the sweep axis, zero outside the sweep.
    fn injection(&self, t: f64) -> Option<(usize, f64)> {
        let (t0, axis, cfg) = self.sweep.as_ref()?;
        let tau = t - t0;
        (tau >= 0.0 && tau < cfg.duration).then(|| (*axis, cfg.value(tau)))
    }
}

fn control_abort(t: f64, e: ControlError) -> HarnessError {
    match e {
        ControlError::NonFinite(what) => HarnessError::NumericalAbort { t, what },
        other => HarnessError::Control(other),
    }
}

fn plant_abort(t: f64, e: PlantError) -> HarnessError {
    match e {
        PlantError::NonFinite { .. } => HarnessError::NumericalAbort { t, what: "plant state" },
        other => HarnessError::Plant(other),
    }
}

#[allow(clippy::too_many_arguments)]
fn row(
    t: f64,
    sp: &Setpoints,
    q_meas: &UnitQuaternion,
    w_meas: &Vector3<f64>,
    out: &CascadeOutput,
    torque: &Vector3<f64>,
    truth: (f64, f64, f64),
    flags: u32,
) -> TelemetryRow {
    TelemetryRow {
        t,
        q_cmd: sp.q.to_array(),
        q_meas: q_meas.to_array(),
        w_cmd: out.omega_cmd.into(),
        w_meas: (*w_meas).into(),
        torque_cmd: (*torque).into(),
        thrust_cmd: out.output.thrust_cmd,
        height: truth.0,
        height_cmd: sp.height,
        vz: truth.1,
        airspeed: truth.2,
        flags,
    }
}

fn controller_flags(out: &CascadeOutput, ctrl: &Cascade, script: &Script, sweeping: bool) -> u32 {
    let mut f = 0;
    if out.rate_saturated.iter().any(|s| *s) {
        f |= FLAG_RATE_SATURATED;
    }
    if out.altitude.feedforward.no_vertical_authority {
        f |= FLAG_NO_VERTICAL_AUTHORITY;
    }
    if ctrl.rate_state().notch_enabled(1) {
        f |= FLAG_PITCH_NOTCH_ON;
    }
    if sweeping {
        f |= FLAG_SWEEP_ACTIVE;
    }
    if script.rates.is_some() {
        f |= FLAG_RATE_MODE;
    }
    f
}

/// Runs a scenario to completion and returns one telemetry row per
/// controller tick.
pub fn simulate(sc: &Scenario) -> Result<Telemetry, HarnessError> {
    simulate_with_table(sc, &AeroTable::default())
}

/// As [`simulate`], with `table` used by both the plant and the
/// controller feedforward in nonlinear mode.
pub fn simulate_with_table(sc: &Scenario, table: &AeroTable) -> Result<Telemetry, HarnessError> {
    sc.validate()?;
    match sc.plant_mode {
        PlantMode::Nonlinear => simulate_nonlinear(sc, table.clone()),
        PlantMode::LinearAxis => simulate_linear(sc),
    }
}

fn log_row(t: f64, s: &RigidBodyState) -> SimLogRow {
    SimLogRow {
        t,
        p: s.p.into(),
        v: s.v.into(),
        q: s.q.to_array(),
        omega: s.omega.into(),
        motors: [f64::NAN; 4],
        saturated: false,
    }
}

fn simulate_nonlinear(sc: &Scenario, table: AeroTable) -> Result<Telemetry, HarnessError> {
    let mut ctrl = Cascade::new(sc.controller.clone(), sc.plant.aircraft.clone(), table.clone())?;
    let q0 = euler_zxy_to_quat(&EulerZXY::new(0.0, sc.initial.pitch_deg.to_radians(), 0.0));
    let initial = RigidBodyState {
        p: Vector3::new(0.0, 0.0, -sc.initial.height),
        ..RigidBodyState::at_rest(q0)
    };
    let mut plant = NonlinearPlant::new(&sc.plant, table, initial)?;
    let mut sensor = SensorModel::new(sc.sensor.clone(), sc.plant.sample_hz, sc.seed)?;
    sensor.prime(&Vector3::zeros());
    let mut script = Script::new(sc);
    let ticks = (sc.duration * sc.controller.rate.sample_hz).round() as usize;
    let steps = ticks * sc.sensor.decimation;
    let mut rows = alloc::vec::Vec::with_capacity(ticks);
    let mut hold = (Vector3::zeros(), sc.controller.altitude.hover_command);
    let mut plant_flags = 0;
    let mut pending: Option<TelemetryRow> = None;
    let mut sim_log = alloc::vec::Vec::with_capacity(ticks);
    for _ in 0..steps {
        let s = *plant.state();
        let r = s.q.to_rotation_matrix().0;
        let v_body = r.transpose() * s.v;
        if let Some(sample) = sensor.push(&s.omega, -s.p.z, s.v.z) {
            if let Some(mut done) = pending.take() {
                done.flags |= plant_flags;
                rows.push(done);
            }
            plant_flags = 0;
            let t = sample.timestamp;
            sim_log.push(log_row(t, &s));
            script.advance(sc, t, &mut ctrl);
            let sp = script.setpoints(t);
            let meas = Measurements {
                q: s.q,
                omega: sample.omega_meas,
                height: sample.altitude_meas,
                vz: sample.v_z_meas,
                airspeed: v_body.norm(),
                alpha: angle_of_attack(&v_body),
            };
            let out = ctrl.step(&meas, &sp).map_err(|e| control_abort(t, e))?;
            let mut torque = out.output.torque_cmd;
            let inject = script.injection(t);
            if let Some((axis, u)) = inject {
                torque[axis] += u;
            }
            hold = (torque, out.output.thrust_cmd);
            let flags = controller_flags(&out, &ctrl, &script, inject.is_some());
            pending = Some(row(t, &sp, &s.q, &sample.omega_meas, &out, &torque, (-s.p.z, s.v.z, v_body.norm()), flags));
        }
        let t = plant.time();
        let step = plant.step(&hold.0, hold.1).map_err(|e| plant_abort(t, e))?;
        if step.motors.saturated {
            plant_flags |= FLAG_MOTOR_SATURATED;
        }
        if let Some(last) = sim_log.last_mut() {
            if last.motors[0].is_nan() {
                last.motors = step.motors.u;
            }
            last.saturated |= step.motors.saturated;
        }
        if step.aero_clamped {
            plant_flags |= FLAG_AERO_CLAMPED;
        }
    }
    if let Some(mut done) = pending {
        done.flags |= plant_flags;
        rows.push(done);
    }
    Ok(Telemetry { rows, sim_log })
}

fn simulate_linear(sc: &Scenario) -> Result<Telemetry, HarnessError> {
    let fs = sc.controller.rate.sample_hz;
    let dt = 1.0 / fs;
    let mut ctrl = Cascade::new(sc.controller.clone(), sc.plant.aircraft.clone(), AeroTable::default())?;
    let mut plant = LinearAxisPlant::new(&fitted_plant(&sc.linear_plant)?, fs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let mut script = Script::new(sc);
    let mut pitch = sc.initial.pitch_deg.to_radians();
    let ticks = (sc.duration * fs).round() as usize;
    let mut rows = alloc::vec::Vec::with_capacity(ticks);
    for k in 0..ticks {
        let t = k as f64 / fs;
        let truth = plant.measurement();
        let n: f64 = StandardNormal.sample(&mut rng);
        let w_meas = Vector3::new(0.0, truth + sc.linear_gyro_noise * n, 0.0);
        let q = euler_zxy_to_quat(&EulerZXY::new(0.0, pitch, 0.0));
        script.advance(sc, t, &mut ctrl);
        let sp = script.setpoints(t);
        let meas = Measurements {
            q,
            omega: w_meas,
            height: sp.height,
            vz: 0.0,
            airspeed: 0.0,
            alpha: 0.0,
        };
        let out = ctrl.step(&meas, &sp).map_err(|e| control_abort(t, e))?;
        let mut torque = out.output.torque_cmd;
        let inject = script.injection(t);
        if let Some((axis, u)) = inject {
            torque[axis] += u;
        }
        let flags = controller_flags(&out, &ctrl, &script, inject.is_some());
        rows.push(row(t, &sp, &q, &w_meas, &out, &torque, (sp.height, 0.0, 0.0), flags));
        let next = plant.step(torque[1]);
        if !next.is_finite() {
            return Err(HarnessError::NumericalAbort { t, what: "linear plant output" });
        }
        pitch += 0.5 * (truth + next) * dt;
    }
    Ok(Telemetry {
        rows,
        sim_log: alloc::vec::Vec::new(),
    })
}
