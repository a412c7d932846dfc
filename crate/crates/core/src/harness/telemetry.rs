#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::String;
use alloc::vec::Vec;

use crate::attitude::{quat_to_euler_zxy, UnitQuaternion};

pub const FLAG_MOTOR_SATURATED: u32 = 1;
pub const FLAG_RATE_SATURATED: u32 = 2;
pub const FLAG_AERO_CLAMPED: u32 = 4;
pub const FLAG_NO_VERTICAL_AUTHORITY: u32 = 8;
pub const FLAG_PITCH_NOTCH_ON: u32 = 16;
pub const FLAG_SWEEP_ACTIVE: u32 = 32;
pub const FLAG_RATE_MODE: u32 = 64;

/// One controller tick of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelemetryRow {
    pub t: f64,
    pub q_cmd: [f64; 4],
    pub q_meas: [f64; 4],
    pub w_cmd: [f64; 3],
    pub w_meas: [f64; 3],
    pub torque_cmd: [f64; 3],
    pub thrust_cmd: f64,
    /// True height above the origin, m.
    pub height: f64,
    pub height_cmd: f64,
    /// True NED vertical speed, m/s.
    pub vz: f64,
    /// True airspeed, m/s.
    pub airspeed: f64,
    pub flags: u32,
}

/// Column names in the order [`TelemetryRow::to_values`] emits them.
pub const TELEMETRY_COLUMNS: [&str; 24] = [
    "t",
    "q_cmd_w",
    "q_cmd_x",
    "q_cmd_y",
    "q_cmd_z",
    "q_meas_w",
    "q_meas_x",
    "q_meas_y",
    "q_meas_z",
    "w_cmd_x",
    "w_cmd_y",
    "w_cmd_z",
    "w_meas_x",
    "w_meas_y",
    "w_meas_z",
    "torque_cmd_x",
    "torque_cmd_y",
    "torque_cmd_z",
    "thrust_cmd",
    "height",
    "height_cmd",
    "vz",
    "airspeed",
    "flags",
];

impl TelemetryRow {
    pub fn to_values(&self) -> [f64; 24] {
        let mut v = [0.0; 24];
        v[0] = self.t;
        v[1..5].copy_from_slice(&self.q_cmd);
        v[5..9].copy_from_slice(&self.q_meas);
        v[9..12].copy_from_slice(&self.w_cmd);
        v[12..15].copy_from_slice(&self.w_meas);
        v[15..18].copy_from_slice(&self.torque_cmd);
        v[18] = self.thrust_cmd;
        v[19] = self.height;
        v[20] = self.height_cmd;
        v[21] = self.vz;
        v[22] = self.airspeed;
        v[23] = self.flags as f64;
        v
    }

    pub fn from_values(v: &[f64]) -> Option<Self> {
        if v.len() != TELEMETRY_COLUMNS.len() {
            return None;
        }
        let arr = |a: usize, b: usize| -> [f64; 4] {
            let mut o = [0.0; 4];
            o[..b - a].copy_from_slice(&v[a..b]);
            o
        };
        let three = |a: usize| [v[a], v[a + 1], v[a + 2]];
        let flags = v[23];
        if !(flags >= 0.0 && flags.fract() == 0.0 && flags <= u32::MAX as f64) {
            return None;
        }
        Some(Self {
            t: v[0],
            q_cmd: arr(1, 5),
            q_meas: arr(5, 9),
            w_cmd: three(9),
            w_meas: three(12),
            torque_cmd: three(15),
            thrust_cmd: v[18],
            height: v[19],
            height_cmd: v[20],
            vz: v[21],
            airspeed: v[22],
            flags: flags as u32,
        })
    }

    /// Z-X-Y pitch of the measured attitude, degrees.
    pub fn pitch_deg(&self) -> f64 {
        pitch_of(&self.q_meas)
    }

    pub fn pitch_cmd_deg(&self) -> f64 {
        pitch_of(&self.q_cmd)
    }

    pub fn has(&self, flag: u32) -> bool {
        self.flags & flag != 0
    }
}

fn pitch_of(q: &[f64; 4]) -> f64 {
    match UnitQuaternion::new(q[0], q[1], q[2], q[3]) {
        Some(q) => quat_to_euler_zxy(&q).angles.pitch.to_degrees(),
        None => f64::NAN,
    }
}

/// Plant state at a controller tick and the motor commands applied until
/// the next one (nonlinear mode only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimLogRow {
    pub t: f64,
    /// NED position, m.
    pub p: [f64; 3],
    /// NED velocity, m/s.
    pub v: [f64; 3],
    /// Attitude (eta, ex, ey, ez).
    pub q: [f64; 4],
    /// Body rates, rad/s.
    pub omega: [f64; 3],
    /// Normalized motor commands in [0, 1].
    pub motors: [f64; 4],
    /// Any motor saturated during the tick.
    pub saturated: bool,
}

pub const SIM_LOG_COLUMNS: [&str; 19] = [
    "t", "px", "py", "pz", "vx", "vy", "vz", "eta", "ex", "ey", "ez", "wx", "wy", "wz", "m1", "m2", "m3", "m4",
    "sat_flag",
];

impl SimLogRow {
    pub fn to_values(&self) -> [f64; 19] {
        let mut v = [0.0; 19];
        v[0] = self.t;
        v[1..4].copy_from_slice(&self.p);
        v[4..7].copy_from_slice(&self.v);
        v[7..11].copy_from_slice(&self.q);
        v[11..14].copy_from_slice(&self.omega);
        v[14..18].copy_from_slice(&self.motors);
        v[18] = if self.saturated { 1.0 } else { 0.0 };
        v
    }
}

/// Time-ordered rows of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Telemetry {
    pub rows: Vec<TelemetryRow>,
    /// Plant-side log, one row per controller tick; empty in linear-axis mode.
    pub sim_log: Vec<SimLogRow>,
}

impl Telemetry {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn column(&self, f: impl Fn(&TelemetryRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Sample rate inferred from the first two rows.
    pub fn sample_hz(&self) -> Option<f64> {
        if self.rows.len() < 2 {
            return None;
        }
        let dt = self.rows[1].t - self.rows[0].t;
        (dt > 0.0).then(|| 1.0 / dt)
    }

    /// Index range of rows with `t0 <= t < t1`.
    pub fn window(&self, t0: f64, t1: f64) -> core::ops::Range<usize> {
        let a = self.rows.partition_point(|r| r.t < t0);
        let b = self.rows.partition_point(|r| r.t < t1);
        a..b.max(a)
    }

    pub fn header() -> String {
        TELEMETRY_COLUMNS.join(",")
    }
}
