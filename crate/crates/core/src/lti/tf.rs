#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use super::poly;
use crate::error::LtiError;

/// Rational transfer function in `s` with a pure input delay.
///
/// Coefficients are stored with ascending powers of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTF {
    num: Vec<f64>,
    den: Vec<f64>,
    delay: f64,
}

impl ContinuousTF {
    pub fn new(num: Vec<f64>, den: Vec<f64>, delay: f64) -> Result<Self, LtiError> {
        if den.is_empty() || poly::is_zero(&den) || den.iter().any(|c| !c.is_finite()) {
            return Err(LtiError::ZeroDenominator);
        }
        if num.iter().any(|c| !c.is_finite()) {
            return Err(LtiError::InvalidParameter("non-finite numerator coefficient"));
        }
        if !(delay >= 0.0) || !delay.is_finite() {
            return Err(LtiError::NegativeDelay(delay));
        }
        let num = if num.is_empty() { vec![0.0] } else { poly::trim(&num) };
        Ok(Self {
            num,
            den: poly::trim(&den),
            delay,
        })
    }

    pub fn unity() -> Self {
        Self::gain(1.0)
    }

    pub fn gain(k: f64) -> Self {
        Self {
            num: vec![k],
            den: vec![1.0],
            delay: 0.0,
        }
    }

    pub fn integrator() -> Self {
        Self {
            num: vec![1.0],
            den: vec![0.0, 1.0],
            delay: 0.0,
        }
    }

    pub fn pure_delay(delay: f64) -> Result<Self, LtiError> {
        Self::new(vec![1.0], vec![1.0], delay)
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn with_delay(&self, delay: f64) -> Result<Self, LtiError> {
        Self::new(self.num.clone(), self.den.clone(), delay)
    }

    /// Same rational part, delay removed.
    pub fn rational(&self) -> Self {
        Self {
            delay: 0.0,
            ..self.clone()
        }
    }

    pub fn is_proper(&self) -> bool {
        poly::degree(&self.num) <= poly::degree(&self.den)
    }

    /// Rational part times the delay factor at an arbitrary complex `s`.
    pub fn eval_s(&self, s: Complex64) -> Complex64 {
        poly::eval(&self.num, s) / poly::eval(&self.den, s) * (-s * self.delay).exp()
    }

    /// Frequency response at `freq_hz`.
    pub fn eval(&self, freq_hz: f64) -> Result<Complex64, LtiError> {
        if !(freq_hz > 0.0) || !freq_hz.is_finite() {
            return Err(LtiError::InvalidFrequency(freq_hz));
        }
        let w = 2.0 * PI * freq_hz;
        let s = Complex64::new(0.0, w);
        let d = poly::eval(&self.den, s);
        if d.norm() <= 1e-12 * poly::eval_scale(&self.den, w) {
            return Err(LtiError::Unbounded { freq_hz });
        }
        let phase = Complex64::new(0.0, -w * self.delay).exp();
        Ok(poly::eval(&self.num, s) / d * phase)
    }

    pub fn series(&self, other: &Self) -> Self {
        Self {
            num: poly::mul(&self.num, &other.num),
            den: poly::mul(&self.den, &other.den),
            delay: self.delay + other.delay,
        }
    }

    /// Sum of two delay-free transfer functions.
    pub fn parallel(&self, other: &Self) -> Result<Self, LtiError> {
        if self.delay != 0.0 || other.delay != 0.0 {
            return Err(LtiError::InvalidParameter(
                "parallel connection of delayed transfer functions",
            ));
        }
        if self.den == other.den {
            return Ok(Self {
                num: poly::add(&self.num, &other.num),
                den: self.den.clone(),
                delay: 0.0,
            });
        }
        Ok(Self {
            num: poly::add(
                &poly::mul(&self.num, &other.den),
                &poly::mul(&other.num, &self.den),
            ),
            den: poly::mul(&self.den, &other.den),
            delay: 0.0,
        })
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            num: poly::scale(&self.num, k),
            ..self.clone()
        }
    }

    pub fn poles(&self) -> Vec<Complex64> {
        poly::roots(&self.den)
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        poly::roots(&self.num)
    }

    /// Value at `s = 0` when finite.
    pub fn dc_gain(&self) -> Option<f64> {
        if self.den[0] == 0.0 {
            None
        } else {
            Some(self.num[0] / self.den[0])
        }
    }
}

/// Second-order Butterworth low-pass with unit DC gain.
pub fn butterworth2(corner_hz: f64) -> Result<ContinuousTF, LtiError> {
    if !(corner_hz > 0.0) || !corner_hz.is_finite() {
        return Err(LtiError::InvalidFrequency(corner_hz));
    }
    let wn = 2.0 * PI * corner_hz;
    ContinuousTF::new(vec![1.0], vec![1.0, SQRT_2 / wn, 1.0 / (wn * wn)], 0.0)
}

/// Band-stop with unity skirts and depth `k2/k1` at `center_hz`.
pub fn notch(center_hz: f64, k1: f64, k2: f64) -> Result<ContinuousTF, LtiError> {
    if !(center_hz > 0.0) || !center_hz.is_finite() {
        return Err(LtiError::InvalidFrequency(center_hz));
    }
    if !(k2 > 0.0) || !k1.is_finite() {
        return Err(LtiError::InvalidParameter("notch requires k1 > k2 > 0"));
    }
    if k2 >= k1 {
        return Err(LtiError::InvalidParameter(
            "notch requires k2 < k1; k2 >= k1 would amplify",
        ));
    }
    let w0 = 2.0 * PI * center_hz;
    let a = 1.0 / (w0 * w0);
    ContinuousTF::new(vec![1.0, k2 / w0, a], vec![1.0, k1 / w0, a], 0.0)
}

/// `kp + ki/s + kd·s·B(s)` with `B` a Butterworth low-pass on the
/// derivative branch only.
pub fn pid_tf(kp: f64, ki: f64, kd: f64, deriv_corner_hz: f64) -> Result<ContinuousTF, LtiError> {
    for g in [kp, ki, kd] {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(LtiError::InvalidParameter("PID gains must be finite and >= 0"));
        }
    }
    if kp == 0.0 && ki == 0.0 && kd == 0.0 {
        return Err(LtiError::InvalidParameter("all PID gains are zero"));
    }
    let mut acc: Option<ContinuousTF> = None;
    let mut push = |tf: ContinuousTF| -> Result<(), LtiError> {
        acc = Some(match acc.take() {
            None => tf,
            Some(a) => a.parallel(&tf)?,
        });
        Ok(())
    };
    if kp > 0.0 {
        push(ContinuousTF::gain(kp))?;
    }
    if ki > 0.0 {
        push(ContinuousTF::integrator().scaled(ki))?;
    }
    if kd > 0.0 {
        let b = butterworth2(deriv_corner_hz)?;
        push(ContinuousTF::new(vec![0.0, kd], vec![1.0], 0.0)?.series(&b))?;
    }
    Ok(acc.expect("at least one gain is positive"))
}

/// Lightly damped pole/zero pair sharing one natural frequency:
/// `(1 + 2ζn/ωn·s + s²/ωn²) / (1 + 2ζd/ωn·s + s²/ωn²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResonancePair {
    pub freq_hz: f64,
    pub num_damping: f64,
    pub den_damping: f64,
}

impl ResonancePair {
    /// Builds the pair from the `s` and `s²` coefficients of numerator and
    /// denominator; the `s²` coefficients are averaged.
    pub fn from_coefficients(num_s: f64, den_s: f64, s2: f64) -> Self {
        let wn = 1.0 / s2.sqrt();
        Self {
            freq_hz: wn / (2.0 * PI),
            num_damping: num_s * wn / 2.0,
            den_damping: den_s * wn / 2.0,
        }
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.freq_hz
    }

    pub fn validate(&self) -> Result<(), LtiError> {
        if !(self.freq_hz > 0.0) || !self.freq_hz.is_finite() {
            return Err(LtiError::InvalidFrequency(self.freq_hz));
        }
        if !(self.num_damping >= 0.0) || !(self.den_damping > 0.0) {
            return Err(LtiError::InvalidParameter("resonance damping must be positive"));
        }
        Ok(())
    }

    pub fn to_tf(&self) -> Result<ContinuousTF, LtiError> {
        self.validate()?;
        let wn = self.omega();
        let a = 1.0 / (wn * wn);
        ContinuousTF::new(
            vec![1.0, 2.0 * self.num_damping / wn, a],
            vec![1.0, 2.0 * self.den_damping / wn, a],
            0.0,
        )
    }
}

/// Parameters of the identified pitch-rate plant: low-pass, rigid-body
/// dynamics, resonance, anti-resonance and delay.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlantFitParams {
    /// `s` and `s²` coefficients of the low-pass denominator.
    pub lf_den: [f64; 2],
    /// `(b0, b1, b2)` of `(b0 + b1 s + b2 s²) / ((1 + tau s) s)`.
    pub dy_num: [f64; 3],
    pub dy_tau: f64,
    pub peak: ResonancePair,
    pub offpeak: ResonancePair,
    pub delay: f64,
}

impl Default for PlantFitParams {
    fn default() -> Self {
        Self {
            lf_den: [0.00321, 0.00000531],
            dy_num: [260.0, 3.764, 0.01362],
            dy_tau: 0.0637,
            peak: ResonancePair::from_coefficients(0.00239, 0.000341, 0.000129),
            offpeak: ResonancePair::from_coefficients(0.000118, 0.0013, 0.0000348),
            delay: 0.021,
        }
    }
}

impl PlantFitParams {
    pub fn lf_corner_hz(&self) -> f64 {
        1.0 / (2.0 * PI * self.lf_den[1].sqrt())
    }

    pub fn lf(&self) -> Result<ContinuousTF, LtiError> {
        ContinuousTF::new(vec![1.0], vec![1.0, self.lf_den[0], self.lf_den[1]], 0.0)
    }

    pub fn dy(&self) -> Result<ContinuousTF, LtiError> {
        if !(self.dy_tau >= 0.0) {
            return Err(LtiError::InvalidParameter("dynamics pole time constant must be >= 0"));
        }
        ContinuousTF::new(self.dy_num.to_vec(), vec![0.0, 1.0, self.dy_tau], 0.0)
    }
}

pub fn fitted_plant(params: &PlantFitParams) -> Result<ContinuousTF, LtiError> {
    if !(params.lf_den[1] > 0.0) {
        return Err(LtiError::InvalidParameter("low-pass natural frequency must be > 0"));
    }
    let tf = params
        .lf()?
        .series(&params.dy()?)
        .series(&params.peak.to_tf()?)
        .series(&params.offpeak.to_tf()?);
    tf.with_delay(params.delay)
}

/// Diagonal Padé approximant of `e^(-s·delay)`.
pub fn pade_delay(delay: f64, order: usize) -> Result<ContinuousTF, LtiError> {
    if !(delay >= 0.0) {
        return Err(LtiError::NegativeDelay(delay));
    }
    if delay == 0.0 || order == 0 {
        return Ok(ContinuousTF::unity());
    }
    let n = order;
    let mut num = vec![0.0; n + 1];
    let mut den = vec![0.0; n + 1];
    // c_k = (2n-k)! n! / ((2n)! k! (n-k)!)
    let mut c = 1.0;
    for k in 0..=n {
        if k > 0 {
            c *= (n - k + 1) as f64 / ((2 * n - k + 1) as f64 * k as f64);
        }
        let t = c * delay.powi(k as i32);
        den[k] = t;
        num[k] = if k % 2 == 0 { t } else { -t };
    }
    ContinuousTF::new(num, den, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mag_db(z: Complex64) -> f64 {
        20.0 * z.norm().log10()
    }

    #[test]
    fn integrator_at_unit_radian_frequency() {
        let h = ContinuousTF::integrator().eval(1.0 / (2.0 * PI)).unwrap();
        assert_relative_eq!(h.norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(h.arg().to_degrees(), -90.0, epsilon = 1e-9);
    }

    #[test]
    fn pure_delay_phase() {
        let h = ContinuousTF::pure_delay(0.021).unwrap().eval(10.0).unwrap();
        assert_relative_eq!(h.norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(h.arg().to_degrees(), -75.6, epsilon = 1e-9);
    }

    #[test]
    fn eval_rejects_non_positive_frequency_and_axis_poles() {
        assert!(matches!(
            ContinuousTF::unity().eval(0.0),
            Err(LtiError::InvalidFrequency(_))
        ));
        let osc = ContinuousTF::new(vec![1.0], vec![1.0, 0.0, 1.0], 0.0).unwrap();
        assert!(matches!(
            osc.eval(1.0 / (2.0 * PI)),
            Err(LtiError::Unbounded { .. })
        ));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert_eq!(
            ContinuousTF::new(vec![1.0], vec![0.0, 0.0], 0.0),
            Err(LtiError::ZeroDenominator)
        );
        assert!(ContinuousTF::new(vec![1.0], vec![1.0], -0.1).is_err());
    }

    #[test]
    fn butterworth_matches_published_low_pass() {
        let b = butterworth2(69.0).unwrap();
        let den = b.den();
        assert_relative_eq!(den[1], 0.003263, max_relative = 1e-3);
        assert_relative_eq!(den[2], 5.317e-6, max_relative = 1e-3);
        assert!((den[1] / 0.00321 - 1.0).abs() < 0.02);
        assert!((den[2] / 0.00000531 - 1.0).abs() < 0.02);
        assert_eq!(b.dc_gain(), Some(1.0));
        assert_relative_eq!(mag_db(b.eval(69.0).unwrap()), -3.0103, epsilon = 1e-3);
    }

    #[test]
    fn published_low_pass_is_three_db_at_corner() {
        let lf = PlantFitParams::default().lf().unwrap();
        let m = mag_db(lf.eval(69.0).unwrap());
        assert!((m + 3.0).abs() < 0.3, "{m}");
    }

    #[test]
    fn notch_center_and_skirts() {
        let n = notch(14.0, 0.2, 0.05).unwrap();
        let c = n.eval(14.0).unwrap();
        assert_relative_eq!(c.norm(), 0.25, epsilon = 1e-12);
        assert_relative_eq!(mag_db(c), -12.0412, epsilon = 1e-3);
        assert_eq!(n.dc_gain(), Some(1.0));
        assert_relative_eq!(n.eval(1e6).unwrap().norm(), 1.0, epsilon = 1e-6);
        let lag = n.eval(7.0).unwrap().arg().to_degrees();
        assert!((-5.7..=-3.8).contains(&lag), "{lag}");
    }

    #[test]
    fn notch_rejects_amplifying_parameters() {
        assert!(notch(14.0, 0.05, 0.2).is_err());
        assert!(notch(14.0, 0.1, 0.1).is_err());
        assert!(notch(14.0, 0.1, 0.0).is_err());
        assert!(notch(-1.0, 0.2, 0.05).is_err());
    }

    #[test]
    fn pid_limits() {
        let p = pid_tf(0.3, 0.0, 0.0, 18.0).unwrap();
        for f in [0.01, 1.0, 100.0, 1e4] {
            assert_relative_eq!(p.eval(f).unwrap().norm(), 0.3, epsilon = 1e-12);
        }
        let c = pid_tf(0.09, 0.1, 0.01, 18.0).unwrap();
        let f = 1e-4;
        let w = 2.0 * PI * f;
        assert_relative_eq!(c.eval(f).unwrap().norm(), 0.1 / w, max_relative = 1e-3);
        // Derivative branch filtered: the gain falls back towards kp well
        // above the corner.
        let hi = c.eval(500.0).unwrap().norm();
        let peak = c.eval(25.0).unwrap().norm();
        assert!(hi < peak);
        assert!((hi - 0.09).abs() < 0.02, "{hi}");
        assert!(pid_tf(0.0, 0.0, 0.0, 18.0).is_err());
        assert!(pid_tf(-1.0, 0.0, 0.0, 18.0).is_err());
    }

    #[test]
    fn pid_equals_sum_of_branches() {
        let c = pid_tf(0.09, 0.1, 0.01, 18.0).unwrap();
        let b = butterworth2(18.0).unwrap();
        for f in [0.3, 3.0, 14.0, 60.0] {
            let s = Complex64::new(0.0, 2.0 * PI * f);
            let expect = 0.09 + 0.1 / s + 0.01 * s * b.eval(f).unwrap();
            assert_relative_eq!((c.eval(f).unwrap() - expect).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn resonance_frequencies_of_published_plant() {
        let p = PlantFitParams::default();
        assert_relative_eq!(p.peak.freq_hz, 1.0 / 0.000129f64.sqrt() / (2.0 * PI), epsilon = 1e-12);
        assert!((p.peak.freq_hz - 14.01).abs() < 0.01);
        assert!((p.offpeak.freq_hz - 26.98).abs() < 0.01);
        let tf = p.peak.to_tf().unwrap();
        assert_relative_eq!(tf.num()[1], 0.00239, max_relative = 1e-12);
        assert_relative_eq!(tf.den()[1], 0.000341, max_relative = 1e-12);
    }

    #[test]
    fn composed_plant_has_peak_at_14_and_dip_at_27() {
        let p = fitted_plant(&PlantFitParams::default()).unwrap();
        assert_eq!(p.delay(), 0.021);
        let m14 = mag_db(p.eval(14.0).unwrap());
        let m27 = mag_db(p.eval(26.98).unwrap());
        let m10 = mag_db(p.eval(10.0).unwrap());
        assert!(m14 - m27 > 20.0, "{m14} {m27}");
        assert!(m14 - m10 > 10.0, "{m14} {m10}");
    }

    #[test]
    fn pade_matches_delay_at_low_frequency() {
        let p = pade_delay(0.021, 10).unwrap();
        let d = ContinuousTF::pure_delay(0.021).unwrap();
        for f in [1.0, 10.0, 40.0] {
            let e = (p.eval(f).unwrap() - d.eval(f).unwrap()).norm();
            assert!(e < 1e-6, "{f}: {e}");
        }
    }

    #[test]
    fn series_with_unity_is_identity() {
        let p = fitted_plant(&PlantFitParams::default()).unwrap();
        assert_eq!(p.series(&ContinuousTF::unity()), p);
    }
}
