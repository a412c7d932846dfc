//! Quaternion and rotation algebra, Z-X-Y Tait-Bryan angles and the
//! attitude-error law that turns an orientation mismatch into a body-rate
//! command.
//!
//! Quaternions are stored scalar-first as `(eta, epsilon)` and always
//! describe the rotation from body frame to inertial (NED) frame.

#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::FRAC_PI_2;
use core::ops::{Mul, Neg};

use nalgebra::{Matrix3, Vector3};

/// Below this rotation angle the `(θ/2)/sin(θ/2)` factor is replaced by its
/// Taylor expansion.
const SMALL_ANGLE: f64 = 1e-6;

/// Roll values closer than this to ±π/2 are reported as gimbal-proximate.
const GIMBAL_TOLERANCE: f64 = 1e-6;

/// Unit quaternion, scalar part first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    eta: f64,
    epsilon: Vector3<f64>,
}

impl UnitQuaternion {
    pub fn identity() -> Self {
        Self {
            eta: 1.0,
            epsilon: Vector3::zeros(),
        }
    }

    /// Builds a quaternion from raw components and normalizes it.
    ///
    /// Returns `None` for a zero or non-finite input.
    pub fn new(eta: f64, ex: f64, ey: f64, ez: f64) -> Option<Self> {
        let n = (eta * eta + ex * ex + ey * ey + ez * ez).sqrt();
        if !n.is_finite() || n < 1e-300 {
            return None;
        }
        Some(Self {
            eta: eta / n,
            epsilon: Vector3::new(ex / n, ey / n, ez / n),
        })
    }

    /// Rotation of `angle` radians about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        let n = axis.norm();
        if n < 1e-300 {
            return Self::identity();
        }
        let half = 0.5 * angle;
        let e = axis * (half.sin() / n);
        Self::new(half.cos(), e.x, e.y, e.z).unwrap_or_else(Self::identity)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn epsilon(&self) -> Vector3<f64> {
        self.epsilon
    }

    /// Components in serialization order `(eta, ex, ey, ez)`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.eta, self.epsilon.x, self.epsilon.y, self.epsilon.z]
    }

    pub fn norm(&self) -> f64 {
        (self.eta * self.eta + self.epsilon.norm_squared()).sqrt()
    }

    pub fn conjugate(&self) -> Self {
        Self {
            eta: self.eta,
            epsilon: -self.epsilon,
        }
    }

    /// Hamilton product `self ⊗ rhs`, renormalized.
    pub fn multiply(&self, rhs: &Self) -> Self {
        let eta = self.eta * rhs.eta - self.epsilon.dot(&rhs.epsilon);
        let eps = rhs.epsilon * self.eta + self.epsilon * rhs.eta + self.epsilon.cross(&rhs.epsilon);
        Self::new(eta, eps.x, eps.y, eps.z).unwrap_or_else(Self::identity)
    }

    /// Direction cosine matrix, body → inertial.
    pub fn to_rotation_matrix(&self) -> RotationMatrix {
        let w = self.eta;
        let (x, y, z) = (self.epsilon.x, self.epsilon.y, self.epsilon.z);
        RotationMatrix(Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ))
    }

    /// Rotates a body-frame vector into the inertial frame.
    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.to_rotation_matrix().0 * v
    }

    /// Time derivative `q̇ = ½ q ⊗ (0, ω)` for a body-frame rate, as raw
    /// components `(eta, epsilon)`. Not normalized.
    pub fn derivative(&self, omega_body: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let d_eta = -0.5 * self.epsilon.dot(omega_body);
        let d_eps = (omega_body * self.eta + self.epsilon.cross(omega_body)) * 0.5;
        (d_eta, d_eps)
    }

    /// Total rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        2.0 * self.eta.abs().min(1.0).acos()
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;

    fn mul(self, rhs: Self) -> Self {
        self.multiply(&rhs)
    }
}

impl Neg for UnitQuaternion {
    type Output = UnitQuaternion;

    fn neg(self) -> Self {
        Self {
            eta: -self.eta,
            epsilon: -self.epsilon,
        }
    }
}

/// 3×3 rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(pub Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Largest element of `RᵀR − I`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).amax()
    }

    /// Element at row `r`, column `c` (zero based).
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.0[(r, c)]
    }
}

/// Axis scaled by the half rotation angle, as produced by [`attitude_error`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngleVector(pub Vector3<f64>);

impl AxisAngleVector {
    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Z-X-Y Tait-Bryan angles in radians: `R = Rz(yaw)·Rx(roll)·Ry(pitch)`.
///
/// This order is regular at pitch = ±π/2 (the nose-up hover attitude of a
/// tail-sitter); its singular axis is roll = ±π/2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EulerZXY {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

/// Result of converting a quaternion back to Z-X-Y angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerConversion {
    pub angles: EulerZXY,
    /// Set when |roll| is within 1e-6 rad of π/2; yaw and pitch are then
    /// not separately observable and pitch is reported as zero.
    pub gimbal_proximate: bool,
}

impl EulerZXY {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }

    pub fn to_quaternion(&self) -> UnitQuaternion {
        euler_zxy_to_quat(self)
    }
}

pub fn euler_zxy_to_quat(e: &EulerZXY) -> UnitQuaternion {
    let qz = UnitQuaternion::from_axis_angle(Vector3::z(), e.yaw);
    let qx = UnitQuaternion::from_axis_angle(Vector3::x(), e.roll);
    let qy = UnitQuaternion::from_axis_angle(Vector3::y(), e.pitch);
    qz * qx * qy
}

/// Inverse of [`euler_zxy_to_quat`]; pitch and yaw in `(−π, π]`, roll in
/// `[−π/2, π/2]`.
pub fn quat_to_euler_zxy(q: &UnitQuaternion) -> EulerConversion {
    let r = q.to_rotation_matrix().0;
    let roll = r[(2, 1)].clamp(-1.0, 1.0).asin();
    let gimbal_proximate = (roll.abs() - FRAC_PI_2).abs() < GIMBAL_TOLERANCE;
    let (pitch, yaw) = if gimbal_proximate {
        // Rz·Rx(±π/2)·Ry collapses to a single angle; attribute it to yaw.
        (0.0, r[(1, 0)].atan2(r[(0, 0)]))
    } else {
        ((-r[(2, 0)]).atan2(r[(2, 2)]), (-r[(0, 1)]).atan2(r[(1, 1)]))
    };
    EulerConversion {
        angles: EulerZXY { roll, pitch, yaw },
        gimbal_proximate,
    }
}

/// Attitude error between the current and desired orientation.
///
/// The error quaternion is `q_e = q_current⁻¹ ⊗ q_desired = [η, ε]`, so the
/// result is expressed in the current body frame and points from current
/// towards desired. With `θ = 2·acos|η|` the returned vector is
/// `sgn(η)·((θ/2)/sin(θ/2))·ε`, i.e. the rotation axis scaled by half the
/// shortest-path angle. `sgn(0)` is taken as `+1`.
pub fn attitude_error(q_current: &UnitQuaternion, q_desired: &UnitQuaternion) -> AxisAngleVector {
    let qe = q_current.conjugate().multiply(q_desired);
    let eta = qe.eta;
    let eps = qe.epsilon;
    let sign = if eta < 0.0 { -1.0 } else { 1.0 };
    let theta = 2.0 * eta.abs().min(1.0).acos();
    let half = 0.5 * theta;
    let scale = if theta > SMALL_ANGLE {
        half / half.sin()
    } else {
        1.0 + half * half / 6.0
    };
    AxisAngleVector(eps * (sign * scale))
}

/// Proportional attitude law `ω_d = K ∘ ξ_e`.
pub fn rate_command(gain: &Vector3<f64>, xi: &AxisAngleVector) -> Vector3<f64> {
    gain.component_mul(&xi.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_PI_4, PI};
    use proptest::prelude::*;

    fn quat_strategy() -> impl Strategy<Value = UnitQuaternion> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter_map("non-zero", |(a, b, c, d)| {
                if a * a + b * b + c * c + d * d < 1e-3 {
                    None
                } else {
                    UnitQuaternion::new(a, b, c, d)
                }
            })
    }

    fn assert_quat_eq(a: &UnitQuaternion, b: &UnitQuaternion, tol: f64) {
        let da = a.to_array();
        let db = b.to_array();
        for i in 0..4 {
            assert_abs_diff_eq!(da[i], db[i], epsilon = tol);
        }
    }

    #[test]
    fn identity_is_neutral() {
        let q = UnitQuaternion::new(0.3, -0.2, 0.9, 0.1).unwrap();
        assert_quat_eq(&(UnitQuaternion::identity() * q), &q, 1e-15);
        assert_quat_eq(&(q * q.conjugate()), &UnitQuaternion::identity(), 1e-15);
    }

    #[test]
    fn half_turns_compose() {
        let q90 = UnitQuaternion::from_axis_angle(Vector3::x(), FRAC_PI_2);
        let q180 = UnitQuaternion::from_axis_angle(Vector3::x(), PI);
        assert_quat_eq(&(q90 * q90), &q180, 1e-15);
    }

    #[test]
    fn rotation_matrix_cases() {
        let r = UnitQuaternion::identity().to_rotation_matrix();
        assert_eq!(r.0, Matrix3::identity());
        let r = UnitQuaternion::from_axis_angle(Vector3::z(), PI).to_rotation_matrix();
        let expected = Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 1.0));
        assert!((r.0 - expected).amax() < 1e-15);
    }

    #[test]
    fn hover_attitude_points_nose_up() {
        let q = euler_zxy_to_quat(&EulerZXY::new(0.0, FRAC_PI_2, 0.0));
        let expected = UnitQuaternion::from_axis_angle(Vector3::y(), FRAC_PI_2);
        assert_quat_eq(&q, &expected, 1e-15);
        // Body x maps to inertial -z (up in NED).
        let nose = q.rotate(&Vector3::x());
        assert!((nose - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-15);
        let back = quat_to_euler_zxy(&q);
        assert!(!back.gimbal_proximate);
        assert_abs_diff_eq!(back.angles.pitch, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(back.angles.roll, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(back.angles.yaw, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_angles_give_identity() {
        assert_quat_eq(
            &euler_zxy_to_quat(&EulerZXY::default()),
            &UnitQuaternion::identity(),
            0.0,
        );
    }

    #[test]
    fn gimbal_proximity_is_flagged() {
        let q = euler_zxy_to_quat(&EulerZXY::new(FRAC_PI_2, 0.3, 0.2));
        let c = quat_to_euler_zxy(&q);
        assert!(c.gimbal_proximate);
        // The combined rotation is still reproduced.
        let q2 = euler_zxy_to_quat(&c.angles);
        assert!((q.to_rotation_matrix().0 - q2.to_rotation_matrix().0).amax() < 1e-6);
    }

    #[test]
    fn attitude_error_cases() {
        let q = UnitQuaternion::new(0.4, 0.1, -0.7, 0.2).unwrap();
        assert!(attitude_error(&q, &q).norm() < 1e-15);

        let qd = UnitQuaternion::from_axis_angle(Vector3::x(), FRAC_PI_2);
        let xi = attitude_error(&UnitQuaternion::identity(), &qd);
        // Independent evaluation: η = cos(π/4), θ = π/2, factor (π/4)/sin(π/4),
        // ε = (sin(π/4), 0, 0).
        let eta = FRAC_PI_4.cos();
        let theta = 2.0 * eta.acos();
        let expected = (theta / 2.0) / (theta / 2.0).sin() * FRAC_PI_4.sin();
        assert_abs_diff_eq!(xi.0.x, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(xi.0.x, FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(xi.0.y, 0.0, epsilon = 1e-15);

        let xi_neg = attitude_error(&UnitQuaternion::identity(), &-qd);
        assert_eq!(xi.0, xi_neg.0);
    }

    #[test]
    fn attitude_error_half_turn_is_finite() {
        let qd = UnitQuaternion::from_axis_angle(Vector3::y(), PI);
        let xi = attitude_error(&UnitQuaternion::identity(), &qd);
        assert_abs_diff_eq!(xi.0.y.abs(), FRAC_PI_2, epsilon = 1e-12);
        assert!(xi.0.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn small_angle_continuity() {
        let theta = 1e-8;
        let qd = UnitQuaternion::from_axis_angle(Vector3::new(1.0, 2.0, -0.5), theta);
        let xi = attitude_error(&UnitQuaternion::identity(), &qd);
        let linear = qd.epsilon();
        assert!((xi.0 - linear).norm() < 1e-12);
        assert_abs_diff_eq!(xi.norm(), theta / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn rate_command_scaling() {
        let k = Vector3::new(2.0, 2.0, 2.0);
        assert_eq!(rate_command(&k, &AxisAngleVector::zero()), Vector3::zeros());
        let w = rate_command(&k, &AxisAngleVector(Vector3::new(FRAC_PI_4, 0.0, 0.0)));
        assert_abs_diff_eq!(w.x, FRAC_PI_2, epsilon = 1e-15);
    }

    /// Integrates pure kinematics `q̇ = ½ q ⊗ ω` under the rate command and
    /// checks exponential decay of the error angle. Since ξ carries the half
    /// angle, `θ̇ = −(θ/2)·nᵀKn`, so the guaranteed rate is `K_min/2`.
    #[test]
    fn kinematic_loop_converges() {
        let k = Vector3::new(3.0, 2.0, 4.0);
        let k_min = 2.0;
        let dt = 1e-3;
        for &theta0 in &[0.1, 1.0, 2.0, 2.9] {
            let qd = UnitQuaternion::from_axis_angle(Vector3::new(0.3, -1.0, 0.5), 0.7);
            let mut q = qd * UnitQuaternion::from_axis_angle(Vector3::new(-0.2, 0.4, 1.0), theta0);
            let mut prev = theta0;
            for step in 1..=3000 {
                let w = rate_command(&k, &attitude_error(&q, &qd));
                q = rk4_kinematics(&q, &w, dt);
                let theta = attitude_error(&q, &qd).norm() * 2.0;
                let t = step as f64 * dt;
                assert!(theta <= prev + 1e-12, "non-monotone at {t}");
                assert!(theta <= theta0 * (-0.5 * k_min * t * 0.95).exp() + 1e-9);
                prev = theta;
            }
        }
    }

    fn rk4_kinematics(q: &UnitQuaternion, w: &Vector3<f64>, dt: f64) -> UnitQuaternion {
        let f = |q: &UnitQuaternion| q.derivative(w);
        let add = |q: &UnitQuaternion, d: (f64, Vector3<f64>), h: f64| {
            let e = q.epsilon() + d.1 * h;
            UnitQuaternion::new(q.eta() + d.0 * h, e.x, e.y, e.z).unwrap()
        };
        let k1 = f(q);
        let k2 = f(&add(q, k1, dt / 2.0));
        let k3 = f(&add(q, k2, dt / 2.0));
        let k4 = f(&add(q, k3, dt));
        let d_eta = (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) / 6.0;
        let d_eps = (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) / 6.0;
        add(q, (d_eta, d_eps), dt)
    }

    /// The log-map oracle, valid below θ = π/2, must agree with the half-angle
    /// vector up to the factor of two.
    #[test]
    fn matches_log_map_oracle() {
        let qc = UnitQuaternion::new(0.9, 0.1, 0.3, -0.2).unwrap();
        let qd = qc * UnitQuaternion::from_axis_angle(Vector3::new(0.2, -0.7, 0.4), 1.2);
        let rc = qc.to_rotation_matrix().0;
        let rd = qd.to_rotation_matrix().0;
        let rel = rc.transpose() * rd;
        let theta = ((rel.trace() - 1.0) / 2.0).acos();
        let axis = Vector3::new(rel[(2, 1)] - rel[(1, 2)], rel[(0, 2)] - rel[(2, 0)], rel[(1, 0)] - rel[(0, 1)])
            / (2.0 * theta.sin());
        let log = axis * theta;
        let xi = attitude_error(&qc, &qd);
        assert!((xi.0 * 2.0 - log).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn rotation_matrix_is_proper(q in quat_strategy()) {
            let r = q.to_rotation_matrix();
            prop_assert!(r.orthonormality_error() < 1e-9);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-9);
            prop_assert_eq!(r.0, (-q).to_rotation_matrix().0);
        }

        #[test]
        fn double_cover_error(qc in quat_strategy(), qd in quat_strategy()) {
            let a = attitude_error(&qc, &qd);
            let b = attitude_error(&qc, &-qd);
            prop_assert_eq!(a.0, b.0);
            prop_assert!(a.norm() <= FRAC_PI_2 + 1e-9);
        }

        #[test]
        fn small_angle_norm(qc in quat_strategy(), theta in 1e-6..1e-3f64) {
            let qd = qc * UnitQuaternion::from_axis_angle(Vector3::new(0.3, 0.1, -0.9), theta);
            let xi = attitude_error(&qc, &qd);
            prop_assert!((xi.norm() - theta / 2.0).abs() < 1e-9);
        }

        #[test]
        fn euler_round_trip(roll in -1.4..1.4f64, pitch in -3.1..3.1f64, yaw in -3.1..3.1f64) {
            let e = EulerZXY::new(roll, pitch, yaw);
            let back = quat_to_euler_zxy(&euler_zxy_to_quat(&e));
            prop_assert!(!back.gimbal_proximate);
            prop_assert!((back.angles.roll - roll).abs() < 1e-9);
            prop_assert!((back.angles.pitch - pitch).abs() < 1e-9);
            prop_assert!((back.angles.yaw - yaw).abs() < 1e-9);
        }
    }

    #[test]
    fn norm_preserved_over_long_products() {
        use rand_chacha::ChaCha8Rng;
        use rand_core::{RngCore, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut uni = || (rng.next_u64() as f64 / u64::MAX as f64) * 2.0 - 1.0;
        let mut acc = UnitQuaternion::identity();
        for _ in 0..10_000 {
            let q = UnitQuaternion::new(uni(), uni(), uni(), uni()).unwrap();
            acc = acc * q;
        }
        assert!((acc.norm() - 1.0).abs() < 1e-6);
    }
}
