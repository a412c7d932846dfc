#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::Vector3;

use crate::error::ControlError;
use crate::lti::{butterworth2, discretize_tustin, notch, ContinuousTF, DigitalFilter};

/// Band-stop placed on one axis after the PID.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct NotchConfig {
    pub enabled: bool,
    pub center_hz: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for NotchConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            center_hz: 14.0,
            k1: 0.15,
            k2: 0.02,
        }
    }
}

impl NotchConfig {
    pub fn tf(&self) -> Result<ContinuousTF, ControlError> {
        Ok(notch(self.center_hz, self.k1, self.k2)?)
    }
}

/// Gains and filters of the body-rate PID, one entry per axis (roll, pitch,
/// yaw). Torques are normalized command units.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RateLoopConfig {
    pub kp: [f64; 3],
    pub ki: [f64; 3],
    pub kd: [f64; 3],
    /// Corner of the second-order Butterworth on the derivative, Hz.
    pub deriv_corner_hz: f64,
    pub notch: [NotchConfig; 3],
    /// Bound on the integrated rate error, rad.
    pub integrator_limit: f64,
    /// Bound on the torque command, normalized.
    pub output_limit: f64,
    pub sample_hz: f64,
}

pub const RATE_LOOP_HZ: f64 = 250.0;

impl Default for RateLoopConfig {
    fn default() -> Self {
        let pitch_notch = NotchConfig {
            enabled: true,
            ..NotchConfig::default()
        };
        Self {
            kp: [0.09; 3],
            ki: [0.1; 3],
            kd: [0.01; 3],
            deriv_corner_hz: 18.0,
            notch: [NotchConfig::default(), pitch_notch, NotchConfig::default()],
            integrator_limit: 5.0,
            output_limit: 0.5,
            sample_hz: RATE_LOOP_HZ,
        }
    }
}

impl RateLoopConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        if self.sample_hz != RATE_LOOP_HZ {
            return Err(ControlError::InvalidParameter("rate loop runs at 250 Hz"));
        }
        for g in self.kp.iter().chain(&self.ki).chain(&self.kd) {
            if !(*g >= 0.0 && g.is_finite()) {
                return Err(ControlError::InvalidParameter("PID gains must be finite and >= 0"));
            }
        }
        if !(self.deriv_corner_hz > 0.0 && self.deriv_corner_hz < self.sample_hz / 2.0) {
            return Err(ControlError::InvalidParameter("derivative corner must be in (0, fs/2)"));
        }
        if !(self.integrator_limit > 0.0 && self.integrator_limit.is_finite()) {
            return Err(ControlError::InvalidParameter("integrator limit must be > 0"));
        }
        if !(self.output_limit > 0.0 && self.output_limit.is_finite()) {
            return Err(ControlError::InvalidParameter("output limit must be > 0"));
        }
        for n in &self.notch {
            if !(n.center_hz < self.sample_hz / 2.0) {
                return Err(ControlError::InvalidParameter("notch center must be below fs/2"));
            }
            n.tf()?;
        }
        Ok(())
    }

    /// Continuous design `C(s)` of one axis: PID, times the notch when it is
    /// enabled.
    pub fn design_tf(&self, axis: usize) -> Result<ContinuousTF, ControlError> {
        let pid = crate::lti::pid_tf(self.kp[axis], self.ki[axis], self.kd[axis], self.deriv_corner_hz)?;
        let n = &self.notch[axis];
        Ok(if n.enabled { pid.series(&n.tf()?) } else { pid })
    }

    /// Largest integrated error whose integral term alone fills the output
    /// range, combined with the configured bound.
    pub fn integrator_bound(&self, axis: usize) -> f64 {
        if self.ki[axis] > 0.0 {
            self.integrator_limit.min(self.output_limit / self.ki[axis])
        } else {
            self.integrator_limit
        }
    }
}

#[derive(Debug, Clone)]
struct AxisState {
    integral: f64,
    prev_error: f64,
    derivative: DigitalFilter,
    notch: DigitalFilter,
    notch_on: bool,
    last_pid: f64,
}

/// Everything the rate loop remembers between ticks.
#[derive(Debug, Clone)]
pub struct RateLoopState {
    axes: [AxisState; 3],
    started: bool,
    saturated: [bool; 3],
}

impl RateLoopState {
    pub fn new(cfg: &RateLoopConfig) -> Result<Self, ControlError> {
        cfg.validate()?;
        let fs = cfg.sample_hz;
        let axis = |i: usize| -> Result<AxisState, ControlError> {
            // kd·s·B(s); zero when kd = 0.
            let d = ContinuousTF::new(alloc::vec![0.0, cfg.kd[i]], alloc::vec![1.0], 0.0)?
                .series(&butterworth2(cfg.deriv_corner_hz)?);
            let n = &cfg.notch[i];
            Ok(AxisState {
                integral: 0.0,
                prev_error: 0.0,
                derivative: discretize_tustin(&d, fs, None)?,
                notch: discretize_tustin(&n.tf()?, fs, Some(n.center_hz))?,
                notch_on: n.enabled,
                last_pid: 0.0,
            })
        };
        Ok(Self {
            axes: [axis(0)?, axis(1)?, axis(2)?],
            started: false,
            saturated: [false; 3],
        })
    }

    /// Integrated rate error per axis, rad.
    pub fn integral(&self) -> Vector3<f64> {
        Vector3::new(self.axes[0].integral, self.axes[1].integral, self.axes[2].integral)
    }

    /// Whether the last output hit the clamp, per axis.
    pub fn saturated(&self) -> [bool; 3] {
        self.saturated
    }

    pub fn notch_enabled(&self, axis: usize) -> bool {
        self.axes[axis].notch_on
    }

    /// Switches an axis notch at run time. On enable the filter is primed
    /// with the last PID output so the switch itself causes no transient.
    pub fn set_notch_enabled(&mut self, axis: usize, on: bool) {
        let a = &mut self.axes[axis];
        if on && !a.notch_on {
            a.notch.prime(a.last_pid);
        }
        a.notch_on = on;
    }
}

/// One 250 Hz tick of the body-rate loop: PID on the rate error with the
/// derivative taken on the measurement, optional notch, then the output
/// clamp. The integrator holds while the output is clamped in the direction
/// the error would push it.
pub fn rate_controller_step(
    omega_meas: &Vector3<f64>,
    omega_cmd: &Vector3<f64>,
    cfg: &RateLoopConfig,
    state: &mut RateLoopState,
) -> Result<Vector3<f64>, ControlError> {
    if !omega_meas.iter().all(|v| v.is_finite()) {
        return Err(ControlError::NonFinite("measured body rate"));
    }
    if !omega_cmd.iter().all(|v| v.is_finite()) {
        return Err(ControlError::NonFinite("commanded body rate"));
    }
    let dt = 1.0 / cfg.sample_hz;
    let first = !state.started;
    state.started = true;
    let mut out = Vector3::zeros();
    for i in 0..3 {
        let a = &mut state.axes[i];
        let e = omega_cmd[i] - omega_meas[i];
        if first {
            // Start as if the measurement had been constant forever.
            a.derivative.prime(-omega_meas[i]);
            a.prev_error = e;
        }
        let d = a.derivative.process(-omega_meas[i]);
        let bound = cfg.integrator_bound(i);
        let held = a.integral;
        let stepped = (held + 0.5 * (e + a.prev_error) * dt).clamp(-bound, bound);
        a.prev_error = e;

        let pid = |integral: f64| cfg.kp[i] * e + cfg.ki[i] * integral + d;
        let lim = cfg.output_limit;
        let shaped = |f: &mut DigitalFilter, on: bool, x: f64| if on { f.process(x) } else { x };

        let mut trial = a.notch.clone();
        let u = shaped(&mut trial, a.notch_on, pid(stepped));
        let winding = u.abs() > lim && u * (stepped - held) > 0.0;
        let (integral, u) = if winding {
            let u = shaped(&mut a.notch, a.notch_on, pid(held));
            (held, u)
        } else {
            a.notch = trial;
            (stepped, u)
        };
        a.integral = integral;
        a.last_pid = pid(integral);
        state.saturated[i] = u.abs() > lim;
        out[i] = u.clamp(-lim, lim);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(kp: f64, ki: f64, kd: f64) -> RateLoopConfig {
        RateLoopConfig {
            kp: [kp; 3],
            ki: [ki; 3],
            kd: [kd; 3],
            notch: [NotchConfig::default(); 3],
            ..RateLoopConfig::default()
        }
    }

    #[test]
    fn zero_error_gives_zero_output() {
        let cfg = RateLoopConfig::default();
        let mut s = RateLoopState::new(&cfg).unwrap();
        let w = Vector3::new(0.3, -0.2, 0.1);
        for _ in 0..500 {
            let u = rate_controller_step(&w, &w, &cfg, &mut s).unwrap();
            assert_eq!(u, Vector3::zeros());
        }
        assert_eq!(s.integral(), Vector3::zeros());
    }

    #[test]
    fn constant_error_without_integral_is_proportional() {
        let cfg = plain(0.09, 0.0, 0.01);
        let mut s = RateLoopState::new(&cfg).unwrap();
        let cmd = Vector3::new(0.5, 1.0, -0.7);
        let mut u = Vector3::zeros();
        for _ in 0..250 {
            u = rate_controller_step(&Vector3::zeros(), &cmd, &cfg, &mut s).unwrap();
        }
        assert!((u - cmd * 0.09).norm() < 1e-12);
    }

    #[test]
    fn setpoint_step_has_no_derivative_kick() {
        let cfg = plain(0.0, 0.0, 0.01);
        let mut s = RateLoopState::new(&cfg).unwrap();
        let u = rate_controller_step(&Vector3::zeros(), &Vector3::new(1.0, 1.0, 1.0), &cfg, &mut s).unwrap();
        assert_eq!(u, Vector3::zeros());
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let cfg = RateLoopConfig::default();
        let mut s = RateLoopState::new(&cfg).unwrap();
        let bad = Vector3::new(f64::NAN, 0.0, 0.0);
        assert_eq!(
            rate_controller_step(&bad, &Vector3::zeros(), &cfg, &mut s),
            Err(ControlError::NonFinite("measured body rate"))
        );
        assert!(rate_controller_step(&Vector3::zeros(), &Vector3::new(0.0, f64::INFINITY, 0.0), &cfg, &mut s).is_err());
    }

    #[test]
    fn config_checks() {
        let c = RateLoopConfig {
            sample_hz: 500.0,
            ..RateLoopConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RateLoopConfig {
            output_limit: 0.0,
            ..RateLoopConfig::default()
        };
        assert!(c.validate().is_err());
        let mut c = RateLoopConfig::default();
        c.notch[1].k2 = 0.3;
        assert!(c.validate().is_err());
        RateLoopConfig::default().validate().unwrap();
    }

    #[test]
    fn enabling_notch_mid_run_is_smooth() {
        let mut cfg = RateLoopConfig::default();
        cfg.notch[1].enabled = false;
        let mut s = RateLoopState::new(&cfg).unwrap();
        let cmd = Vector3::new(0.0, 0.4, 0.0);
        let mut last = 0.0;
        for _ in 0..100 {
            last = rate_controller_step(&Vector3::zeros(), &cmd, &cfg, &mut s).unwrap()[1];
        }
        s.set_notch_enabled(1, true);
        let next = rate_controller_step(&Vector3::zeros(), &cmd, &cfg, &mut s).unwrap()[1];
        // Only the integrator moves between the two ticks.
        assert!((next - last).abs() < 1e-3, "{last} -> {next}");
    }
}
