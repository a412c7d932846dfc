#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::Vector3;

use crate::attitude::UnitQuaternion;
use crate::error::ControlError;
use crate::plant::{aero_force_body, AeroTable, AircraftParams};

/// Outer altitude P loop, feedforward gain and vertical-velocity PI.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AltitudeLoopConfig {
    /// Height error to vertical speed, 1/s.
    pub k_alt: f64,
    /// Desired vertical speed to desired vertical acceleration, 1/s.
    pub k_ff: f64,
    /// Normalized thrust per m/s of vertical-speed error.
    pub kp_z: f64,
    /// Normalized thrust per m of integrated vertical-speed error.
    pub ki_z: f64,
    /// Normalized collective at hover.
    pub hover_command: f64,
    /// Bound on the vertical-speed command, m/s.
    pub vz_limit: f64,
    /// Bound on the integrated vertical-speed error, m.
    pub integrator_limit: f64,
    pub sample_hz: f64,
}

impl Default for AltitudeLoopConfig {
    fn default() -> Self {
        Self {
            k_alt: 1.0,
            k_ff: 1.0,
            kp_z: 0.15,
            ki_z: 0.05,
            hover_command: 0.47,
            vz_limit: 3.0,
            integrator_limit: 5.0,
            sample_hz: 250.0,
        }
    }
}

impl AltitudeLoopConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        for g in [self.k_alt, self.k_ff, self.kp_z, self.ki_z] {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(ControlError::InvalidParameter("altitude gains must be finite and >= 0"));
            }
        }
        if !(self.hover_command > 0.0 && self.hover_command < 1.0) {
            return Err(ControlError::InvalidParameter("hover command must be in (0, 1)"));
        }
        if !(self.vz_limit > 0.0 && self.integrator_limit > 0.0 && self.sample_hz > 0.0) {
            return Err(ControlError::InvalidParameter("limits and rate must be > 0"));
        }
        Ok(())
    }

    /// Normalized command per newton of thrust, `k = T_h/(m·g)`.
    pub fn thrust_ratio(&self, params: &AircraftParams) -> f64 {
        self.hover_command / params.weight()
    }
}

/// Smallest `|r31|` for which the rotors can still set vertical force.
pub const MIN_VERTICAL_AUTHORITY: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedforwardThrust {
    /// Normalized collective, clamped to `[0, 1]`.
    pub command: f64,
    /// Solved rotor thrust, N; `NaN` without vertical authority.
    pub thrust: f64,
    /// Desired vertical acceleration (NED, down positive), m/s².
    pub accel_cmd: f64,
    pub no_vertical_authority: bool,
}

/// Collective that produces the vertical acceleration `k_ff·v_zd` at the
/// current attitude and airspeed.
///
/// The vertical force balance `m·a_zd = m·g + f_a,z + r31·T` (NED, thrust
/// along body `x`) is solved for `T`, with the aerodynamic force taken at
/// speed `airspeed` and angle of attack `alpha` without sideslip. When
/// `|r31|` is below [`MIN_VERTICAL_AUTHORITY`] the hover command is
/// returned and flagged.
pub fn altitude_ff_thrust(
    vz_cmd: f64,
    q: &UnitQuaternion,
    airspeed: f64,
    alpha: f64,
    cfg: &AltitudeLoopConfig,
    params: &AircraftParams,
    table: &AeroTable,
) -> FeedforwardThrust {
    let accel_cmd = cfg.k_ff * vz_cmd;
    let r = q.to_rotation_matrix();
    let r31 = r.at(2, 0);
    if r31.abs() < MIN_VERTICAL_AUTHORITY {
        return FeedforwardThrust {
            command: cfg.hover_command,
            thrust: f64::NAN,
            accel_cmd,
            no_vertical_authority: true,
        };
    }
    let v_body = Vector3::new(alpha.cos(), 0.0, alpha.sin()) * airspeed.max(0.0);
    let (f_body, _) = aero_force_body(&v_body, table, params.rho, params.wing_area);
    let f_z = (r.0 * f_body).z;
    let m = params.mass;
    let thrust = (m * accel_cmd - m * params.g - f_z) / r31;
    FeedforwardThrust {
        command: (cfg.thrust_ratio(params) * thrust).clamp(0.0, 1.0),
        thrust,
        accel_cmd,
        no_vertical_authority: false,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AltitudeLoopState {
    integral: f64,
}

impl AltitudeLoopState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Integrated vertical-speed error, m.
    pub fn integral(&self) -> f64 {
        self.integral
    }
}

/// Flight condition the altitude loop needs besides heights and speeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightCondition {
    pub q: UnitQuaternion,
    pub airspeed: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltitudeOutput {
    pub thrust_cmd: f64,
    /// Vertical-speed command, NED (down positive), m/s.
    pub vz_cmd: f64,
    pub feedforward: FeedforwardThrust,
    pub saturated: bool,
}

/// One tick of the altitude loop. Heights are positive up; vertical speeds
/// are NED (positive down), so climbing needs a negative `vz_cmd`. The PI
/// acts on `vz_cmd − vz_meas` with the sign that reduces thrust when the
/// aircraft sinks slower than commanded.
#[allow(clippy::too_many_arguments)]
pub fn altitude_loop_step(
    height_meas: f64,
    height_cmd: f64,
    vz_meas: f64,
    state: &mut AltitudeLoopState,
    cfg: &AltitudeLoopConfig,
    params: &AircraftParams,
    table: &AeroTable,
    flight: &FlightCondition,
) -> Result<AltitudeOutput, ControlError> {
    for (v, what) in [
        (height_meas, "measured height"),
        (height_cmd, "commanded height"),
        (vz_meas, "measured vertical speed"),
        (flight.airspeed, "airspeed"),
        (flight.alpha, "angle of attack"),
    ] {
        if !v.is_finite() {
            return Err(ControlError::NonFinite(what));
        }
    }
    let vz_cmd = (-cfg.k_alt * (height_cmd - height_meas)).clamp(-cfg.vz_limit, cfg.vz_limit);
    let ff = altitude_ff_thrust(vz_cmd, &flight.q, flight.airspeed, flight.alpha, cfg, params, table);
    let e = vz_cmd - vz_meas;
    let dt = 1.0 / cfg.sample_hz;
    let held = state.integral;
    let stepped = (held + e * dt).clamp(-cfg.integrator_limit, cfg.integrator_limit);
    let command = |integral: f64| ff.command - (cfg.kp_z * e + cfg.ki_z * integral);
    let raw = command(stepped);
    // Hold the integrator when it would drive the command further past a limit.
    let push = -(stepped - held);
    let winding = (raw > 1.0 && push > 0.0) || (raw < 0.0 && push < 0.0);
    let integral = if winding { held } else { stepped };
    state.integral = integral;
    let raw = command(integral);
    Ok(AltitudeOutput {
        thrust_cmd: raw.clamp(0.0, 1.0),
        vz_cmd,
        feedforward: ff,
        saturated: !(0.0..=1.0).contains(&raw),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    fn hover_q() -> UnitQuaternion {
        UnitQuaternion::from_axis_angle(Vector3::y(), FRAC_PI_2)
    }

    #[test]
    fn hover_feedforward_is_hover_command() {
        let cfg = AltitudeLoopConfig::default();
        let p = AircraftParams::default();
        let ff = altitude_ff_thrust(0.0, &hover_q(), 0.0, 0.0, &cfg, &p, &AeroTable::default());
        assert!(!ff.no_vertical_authority);
        assert!((ff.thrust - p.weight()).abs() < 1e-9);
        assert!((ff.command - cfg.hover_command).abs() < 1e-12);
    }

    #[test]
    fn descent_reduces_thrust_monotonically() {
        let cfg = AltitudeLoopConfig::default();
        let p = AircraftParams::default();
        let t = AeroTable::default();
        let mut prev = p.weight();
        for k in 1..20 {
            let ff = altitude_ff_thrust(0.25 * k as f64, &hover_q(), 0.0, 0.0, &cfg, &p, &t);
            assert!(ff.thrust < prev);
            prev = ff.thrust;
        }
    }

    #[test]
    fn level_attitude_has_no_authority() {
        let cfg = AltitudeLoopConfig::default();
        let ff = altitude_ff_thrust(
            0.0,
            &UnitQuaternion::identity(),
            12.0,
            0.05,
            &cfg,
            &AircraftParams::default(),
            &AeroTable::default(),
        );
        assert!(ff.no_vertical_authority);
        assert_eq!(ff.command, cfg.hover_command);
    }

    #[test]
    fn on_altitude_at_hover_commands_hover() {
        let cfg = AltitudeLoopConfig::default();
        let mut s = AltitudeLoopState::new();
        let flight = FlightCondition {
            q: hover_q(),
            airspeed: 0.0,
            alpha: 0.0,
        };
        let out = altitude_loop_step(10.0, 10.0, 0.0, &mut s, &cfg, &AircraftParams::default(), &AeroTable::default(), &flight)
            .unwrap();
        assert!((out.thrust_cmd - cfg.hover_command).abs() < 1e-12);
        assert_eq!(out.vz_cmd, 0.0);
    }

    #[test]
    fn speed_command_respects_limit() {
        let cfg = AltitudeLoopConfig::default();
        let mut s = AltitudeLoopState::new();
        let flight = FlightCondition {
            q: hover_q(),
            airspeed: 0.0,
            alpha: 0.0,
        };
        let p = AircraftParams::default();
        let t = AeroTable::default();
        let up = altitude_loop_step(0.0, 50.0, 0.0, &mut s, &cfg, &p, &t, &flight).unwrap();
        assert_eq!(up.vz_cmd, -cfg.vz_limit);
        let down = altitude_loop_step(50.0, 0.0, 0.0, &mut s, &cfg, &p, &t, &flight).unwrap();
        assert_eq!(down.vz_cmd, cfg.vz_limit);
        // Climbing asks for more than hover thrust.
        assert!(up.thrust_cmd > cfg.hover_command);
    }
}
