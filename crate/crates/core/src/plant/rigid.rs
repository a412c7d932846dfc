use nalgebra::{Matrix3, Vector3, Vector4};

use super::aero::{aero_force_body, AeroTable};
use super::params::AircraftParams;
use crate::attitude::UnitQuaternion;
use crate::error::PlantError;

/// Position and velocity in NED (m, m/s), body→NED attitude, body rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyState {
    pub p: Vector3<f64>,
    pub v: Vector3<f64>,
    pub q: UnitQuaternion,
    pub omega: Vector3<f64>,
}

impl RigidBodyState {
    pub fn at_rest(q: UnitQuaternion) -> Self {
        Self {
            p: Vector3::zeros(),
            v: Vector3::zeros(),
            q,
            omega: Vector3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(self.v.iter()).chain(self.omega.iter()).all(|x| x.is_finite())
            && self.q.to_array().iter().all(|x| x.is_finite())
    }
}

/// Forces and moments held constant over one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyInputs {
    /// Total rotor thrust along body `+x`, N.
    pub thrust: f64,
    /// Rotor torque in the body frame, N·m.
    pub torque: Vector3<f64>,
}

/// Everything the equations of motion need besides the state.
#[derive(Debug, Clone)]
pub struct RigidBodyModel {
    pub mass: f64,
    pub g: f64,
    pub inertia: Matrix3<f64>,
    pub inertia_inv: Matrix3<f64>,
    pub rho: f64,
    pub wing_area: f64,
    /// Linear aerodynamic rate damping `M_a = −c∘ω`, N·m·s.
    pub rate_damping: Vector3<f64>,
    pub table: AeroTable,
}

impl RigidBodyModel {
    pub fn new(params: &AircraftParams, table: AeroTable, rate_damping: Vector3<f64>) -> Result<Self, PlantError> {
        params.validate()?;
        let inertia = params.inertia_matrix();
        let inertia_inv = inertia
            .try_inverse()
            .ok_or(PlantError::InvalidParameter("inertia is singular"))?;
        Ok(Self {
            mass: params.mass,
            g: params.g,
            inertia,
            inertia_inv,
            rho: params.rho,
            wing_area: params.wing_area,
            rate_damping,
            table,
        })
    }
}

#[derive(Clone, Copy)]
struct Raw {
    p: Vector3<f64>,
    v: Vector3<f64>,
    q: Vector4<f64>,
    w: Vector3<f64>,
}

impl Raw {
    fn axpy(&self, k: f64, d: &Raw) -> Raw {
        Raw {
            p: self.p + d.p * k,
            v: self.v + d.v * k,
            q: self.q + d.q * k,
            w: self.w + d.w * k,
        }
    }
}

fn rotation(q: &Vector4<f64>) -> Matrix3<f64> {
    let n = q.norm();
    let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// State derivative and whether the aero lookup was clamped.
fn derivative(m: &RigidBodyModel, s: &Raw, u: &BodyInputs) -> (Raw, bool) {
    let r = rotation(&s.q);
    let v_body = r.transpose() * s.v;
    let (fa_body, clamped) = aero_force_body(&v_body, &m.table, m.rho, m.wing_area);
    let f_body = fa_body + Vector3::new(u.thrust, 0.0, 0.0);
    let acc = Vector3::new(0.0, 0.0, m.g) + r * f_body / m.mass;
    let w = s.w;
    let m_a = -m.rate_damping.component_mul(&w);
    let wdot = m.inertia_inv * (-w.cross(&(m.inertia * w)) + u.torque + m_a);
    let (q0, qv) = (s.q[0], Vector3::new(s.q[1], s.q[2], s.q[3]));
    let dq0 = -0.5 * qv.dot(&w);
    let dqv = (w * q0 + qv.cross(&w)) * 0.5;
    (
        Raw {
            p: s.v,
            v: acc,
            q: Vector4::new(dq0, dqv.x, dqv.y, dqv.z),
            w: wdot,
        },
        clamped,
    )
}

/// Derivatives `(v̇, ω̇)` at the given state, for equilibrium checks.
pub fn accelerations(model: &RigidBodyModel, state: &RigidBodyState, inputs: &BodyInputs) -> (Vector3<f64>, Vector3<f64>) {
    let (d, _) = derivative(model, &to_raw(state), inputs);
    (d.v, d.w)
}

fn to_raw(s: &RigidBodyState) -> Raw {
    let q = s.q.to_array();
    Raw {
        p: s.p,
        v: s.v,
        q: Vector4::new(q[0], q[1], q[2], q[3]),
        w: s.omega,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: RigidBodyState,
    pub aero_clamped: bool,
}

/// One classical RK4 step with inputs held constant; the quaternion is
/// renormalized afterwards.
pub fn step_dynamics(
    model: &RigidBodyModel,
    state: &RigidBodyState,
    inputs: &BodyInputs,
    dt: f64,
    t: f64,
) -> Result<StepOutcome, PlantError> {
    if !(dt > 0.0 && dt <= 0.002) {
        return Err(PlantError::InvalidParameter("integration step must be in (0, 2 ms]"));
    }
    let s0 = to_raw(state);
    let (k1, c1) = derivative(model, &s0, inputs);
    let (k2, c2) = derivative(model, &s0.axpy(dt / 2.0, &k1), inputs);
    let (k3, c3) = derivative(model, &s0.axpy(dt / 2.0, &k2), inputs);
    let (k4, c4) = derivative(model, &s0.axpy(dt, &k3), inputs);
    let next = Raw {
        p: s0.p + (k1.p + k2.p * 2.0 + k3.p * 2.0 + k4.p) * (dt / 6.0),
        v: s0.v + (k1.v + k2.v * 2.0 + k3.v * 2.0 + k4.v) * (dt / 6.0),
        q: s0.q + (k1.q + k2.q * 2.0 + k3.q * 2.0 + k4.q) * (dt / 6.0),
        w: s0.w + (k1.w + k2.w * 2.0 + k3.w * 2.0 + k4.w) * (dt / 6.0),
    };
    let q = UnitQuaternion::new(next.q[0], next.q[1], next.q[2], next.q[3])
        .ok_or(PlantError::NonFinite { t: t + dt })?;
    let out = RigidBodyState {
        p: next.p,
        v: next.v,
        q,
        omega: next.w,
    };
    if !out.is_finite() {
        return Err(PlantError::NonFinite { t: t + dt });
    }
    Ok(StepOutcome {
        state: out,
        aero_clamped: c1 || c2 || c3 || c4,
    })
}
